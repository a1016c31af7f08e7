//! Gauss–Legendre quadrature.
//!
//! Distribution distances and barycenter normalizations are all computed by
//! deterministic quadrature rather than Monte Carlo, so that Gram matrices
//! over laws are exactly reproducible. Nodes and weights are generated once
//! per order by Newton iteration on the Legendre recurrence and cached.

use std::sync::OnceLock;

/// A quadrature rule on a finite interval: paired nodes and weights.
#[derive(Debug, Clone)]
pub struct QuadRule {
    /// Evaluation points.
    pub nodes: Vec<f64>,
    /// Matching weights (sum to the interval length).
    pub weights: Vec<f64>,
}

/// Evaluate the Legendre polynomial `P_n` and its derivative at `x`
/// via the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0; // P_0
    let mut p1 = x; // P_1
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    // Derivative identity: (1-x^2) P_n'(x) = n (P_{n-1}(x) - x P_n(x))
    let dp = n as f64 * (p0 - x * p1) / (1.0 - x * x);
    (p1, dp)
}

/// Gauss–Legendre nodes and weights of order `n` on `[-1, 1]`.
fn gauss_legendre_unit(n: usize) -> QuadRule {
    assert!(n >= 2, "quadrature order must be at least 2");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi-style initial guess, then Newton to machine precision.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_pair(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_pair(n, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadRule { nodes, weights }
}

pub(crate) fn cached_unit_rule(n: usize) -> &'static QuadRule {
    static RULE_512: OnceLock<QuadRule> = OnceLock::new();
    static RULE_256: OnceLock<QuadRule> = OnceLock::new();
    match n {
        512 => RULE_512.get_or_init(|| gauss_legendre_unit(512)),
        256 => RULE_256.get_or_init(|| gauss_legendre_unit(256)),
        _ => panic!("only orders 256 and 512 are cached"),
    }
}

impl QuadRule {
    /// The rule of order `n` (256 or 512) mapped onto `[a, b]`.
    pub fn on_interval(n: usize, a: f64, b: f64) -> QuadRule {
        let unit = cached_unit_rule(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        QuadRule {
            nodes: unit.nodes.iter().map(|&t| mid + half * t).collect(),
            weights: unit.weights.iter().map(|&w| half * w).collect(),
        }
    }

    /// Integrate a function over the rule's interval.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Default order used for distribution-distance quadrature.
pub const MMD_ORDER: usize = 512;
/// Default order used to marginalize continuous parameter priors.
pub const PARAM_ORDER: usize = 256;
