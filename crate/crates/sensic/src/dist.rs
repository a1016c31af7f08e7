//! Univariate laws, independent product laws, and priors over laws.
//!
//! All laws expose exact `pdf` / `cdf` / `quantile` evaluation and are
//! sampled exclusively by inverse transform, which makes every draw a pure
//! function of the RNG stream: the same seed always yields the same sample,
//! for every family. Parameters are validated at construction so that no
//! NaN can propagate into downstream kernel algebra.

use crate::error::{Error, Result};
use crate::quad::{QuadRule, PARAM_ORDER};
use ndarray::Array2;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Tolerance used when comparing support endpoints.
const SUPPORT_TOL: f64 = 1e-12;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal parameters are valid")
}

/// A continuous law on a bounded interval.
#[derive(Debug, Clone, PartialEq)]
pub enum UnivariateDist {
    /// Uniform on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// Triangular on `[a, b]` with mode `c`.
    Triangular { a: f64, b: f64, c: f64 },
    /// Normal with mean `mean` and standard deviation `sd`, truncated to `[a, b]`.
    TruncNormal {
        a: f64,
        b: f64,
        mean: f64,
        sd: f64,
        /// Standard-normal cdf at the lower truncation bound (precomputed).
        z_lo: f64,
        /// Total truncated mass `Phi(beta) - Phi(alpha)` (precomputed).
        z_mass: f64,
    },
    /// Convex combination of component laws on a common support.
    FiniteMixture {
        components: Vec<(UnivariateDist, f64)>,
    },
    /// Law defined by a monotone quantile table on an equispaced
    /// probability grid; pdf is the slope of the implied cdf.
    QuantileGrid { quantiles: Vec<f64> },
}

impl UnivariateDist {
    /// Uniform law on `[a, b]`.
    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        check_bounds(a, b)?;
        Ok(UnivariateDist::Uniform { a, b })
    }

    /// Triangular law on `[a, b]` with mode `c` (with `a <= c <= b`).
    pub fn triangular(a: f64, b: f64, c: f64) -> Result<Self> {
        check_bounds(a, b)?;
        if !c.is_finite() || c < a || c > b {
            return Err(Error::param(format!(
                "triangular mode {c} outside support [{a}, {b}]"
            )));
        }
        Ok(UnivariateDist::Triangular { a, b, c })
    }

    /// Normal(`mean`, `sd`) truncated to `[a, b]`.
    pub fn trunc_normal(a: f64, b: f64, mean: f64, sd: f64) -> Result<Self> {
        check_bounds(a, b)?;
        if !mean.is_finite() || !sd.is_finite() || sd <= 0.0 {
            return Err(Error::param(format!(
                "truncated normal needs finite mean and sd > 0, got ({mean}, {sd})"
            )));
        }
        let n = std_normal();
        let z_lo = n.cdf((a - mean) / sd);
        let z_hi = n.cdf((b - mean) / sd);
        let z_mass = z_hi - z_lo;
        if z_mass <= 1e-300 {
            return Err(Error::param(format!(
                "truncation interval [{a}, {b}] carries negligible normal mass"
            )));
        }
        Ok(UnivariateDist::TruncNormal {
            a,
            b,
            mean,
            sd,
            z_lo,
            z_mass,
        })
    }

    /// Mixture of laws sharing one support, with weights summing to 1.
    pub fn finite_mixture(components: Vec<(UnivariateDist, f64)>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::param("mixture needs at least one component"));
        }
        let total: f64 = components.iter().map(|(_, w)| w).sum();
        if components.iter().any(|(_, w)| !w.is_finite() || *w < 0.0) {
            return Err(Error::param("mixture weights must be nonnegative"));
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!(
                "mixture weights sum to {total}, expected 1 within 1e-12"
            )));
        }
        let (a0, b0) = components[0].0.support();
        for (law, _) in &components[1..] {
            let (a, b) = law.support();
            if (a - a0).abs() > SUPPORT_TOL || (b - b0).abs() > SUPPORT_TOL {
                return Err(Error::SupportMismatch(format!(
                    "mixture components on [{a0}, {b0}] vs [{a}, {b}]"
                )));
            }
        }
        Ok(UnivariateDist::FiniteMixture { components })
    }

    /// Law given by its quantile values at `len` equispaced probabilities
    /// spanning `[0, 1]`; the table must be nondecreasing with at least 64
    /// entries.
    pub fn quantile_grid(quantiles: Vec<f64>) -> Result<Self> {
        if quantiles.len() < 64 {
            return Err(Error::param(format!(
                "quantile table needs >= 64 nodes, got {}",
                quantiles.len()
            )));
        }
        if quantiles.iter().any(|q| !q.is_finite()) {
            return Err(Error::param("quantile table contains non-finite values"));
        }
        if quantiles.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::param("quantile table must be nondecreasing"));
        }
        if quantiles[quantiles.len() - 1] <= quantiles[0] {
            return Err(Error::degenerate("quantile table spans a single point"));
        }
        Ok(UnivariateDist::QuantileGrid { quantiles })
    }

    /// Support interval `[a, b]`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            UnivariateDist::Uniform { a, b }
            | UnivariateDist::Triangular { a, b, .. }
            | UnivariateDist::TruncNormal { a, b, .. } => (*a, *b),
            UnivariateDist::FiniteMixture { components } => components[0].0.support(),
            UnivariateDist::QuantileGrid { quantiles } => {
                (quantiles[0], quantiles[quantiles.len() - 1])
            }
        }
    }

    /// Density at `x`; zero outside the support.
    pub fn pdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x < a || x > b {
            return 0.0;
        }
        match self {
            UnivariateDist::Uniform { a, b } => 1.0 / (b - a),
            UnivariateDist::Triangular { a, b, c } => {
                let span = b - a;
                if x < *c {
                    2.0 * (x - a) / (span * (c - a))
                } else if x > *c {
                    2.0 * (b - x) / (span * (b - c))
                } else {
                    // At the mode; both one-sided limits equal 2/span unless the
                    // mode sits on a boundary, where only one side exists.
                    2.0 / span
                }
            }
            UnivariateDist::TruncNormal {
                mean, sd, z_mass, ..
            } => {
                let t = (x - mean) / sd;
                let phi = (-0.5 * t * t).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
                phi / z_mass
            }
            UnivariateDist::FiniteMixture { components } => {
                components.iter().map(|(law, w)| w * law.pdf(x)).sum()
            }
            UnivariateDist::QuantileGrid { quantiles } => {
                let g = quantiles.len();
                let dp = 1.0 / (g - 1) as f64;
                // Locate the grid cell containing x and return its cdf slope.
                let idx = match quantiles.binary_search_by(|q| q.partial_cmp(&x).unwrap()) {
                    Ok(i) => i.min(g - 2),
                    Err(i) => i.saturating_sub(1).min(g - 2),
                };
                let dq = quantiles[idx + 1] - quantiles[idx];
                if dq > 0.0 {
                    dp / dq
                } else {
                    0.0
                }
            }
        }
    }

    /// Cumulative distribution at `x`, clamped to `[0, 1]` outside the support.
    pub fn cdf(&self, x: f64) -> f64 {
        let (a, b) = self.support();
        if x <= a {
            return 0.0;
        }
        if x >= b {
            return 1.0;
        }
        match self {
            UnivariateDist::Uniform { a, b } => (x - a) / (b - a),
            UnivariateDist::Triangular { a, b, c } => {
                let span = b - a;
                if x < *c {
                    (x - a) * (x - a) / (span * (c - a))
                } else {
                    1.0 - (b - x) * (b - x) / (span * (b - c))
                }
            }
            UnivariateDist::TruncNormal {
                mean,
                sd,
                z_lo,
                z_mass,
                ..
            } => {
                let p = (std_normal().cdf((x - mean) / sd) - z_lo) / z_mass;
                p.clamp(0.0, 1.0)
            }
            UnivariateDist::FiniteMixture { components } => {
                components.iter().map(|(law, w)| w * law.cdf(x)).sum()
            }
            UnivariateDist::QuantileGrid { quantiles } => {
                let g = quantiles.len();
                let dp = 1.0 / (g - 1) as f64;
                let idx = match quantiles.binary_search_by(|q| q.partial_cmp(&x).unwrap()) {
                    Ok(i) => return i as f64 * dp,
                    Err(i) => i, // first index with q > x; x lies in cell (i-1, i)
                };
                if idx == 0 {
                    return 0.0;
                }
                let lo = quantiles[idx - 1];
                let hi = quantiles[idx];
                let frac = if hi > lo { (x - lo) / (hi - lo) } else { 1.0 };
                ((idx - 1) as f64 + frac) * dp
            }
        }
    }

    /// Quantile (inverse cdf) at `p in (0, 1)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::Domain(format!(
                "quantile argument {p} outside (0, 1)"
            )));
        }
        Ok(self.quantile_inner(p))
    }

    /// Quantile evaluation, total on `[0, 1]` (endpoints map to the support
    /// bounds). Used internally by inverse-transform sampling.
    pub(crate) fn quantile_inner(&self, p: f64) -> f64 {
        let (a, b) = self.support();
        if p <= 0.0 {
            return a;
        }
        if p >= 1.0 {
            return b;
        }
        match self {
            UnivariateDist::Uniform { a, b } => a + p * (b - a),
            UnivariateDist::Triangular { a, b, c } => {
                let span = b - a;
                let fc = (c - a) / span;
                if p < fc {
                    a + (p * span * (c - a)).sqrt()
                } else {
                    b - ((1.0 - p) * span * (b - c)).sqrt()
                }
            }
            UnivariateDist::TruncNormal {
                a,
                b,
                mean,
                sd,
                z_lo,
                z_mass,
            } => {
                let target = z_lo + p * z_mass;
                let mut x = (mean + sd * std_normal().inverse_cdf(target)).clamp(*a, *b);
                // Polish with Newton steps on the exact truncated cdf so the
                // quantile/cdf round trip closes to ~1e-14.
                for _ in 0..3 {
                    let f = self.cdf(x);
                    let d = self.pdf(x);
                    if d <= 0.0 {
                        break;
                    }
                    let step = (f - p) / d;
                    x = (x - step).clamp(*a, *b);
                    if step.abs() < 1e-15 * (b - a) {
                        break;
                    }
                }
                x
            }
            UnivariateDist::FiniteMixture { .. } => self.invert_cdf_numeric(p),
            UnivariateDist::QuantileGrid { quantiles } => {
                let g = quantiles.len();
                let t = p * (g - 1) as f64;
                let idx = (t.floor() as usize).min(g - 2);
                let frac = t - idx as f64;
                quantiles[idx] + frac * (quantiles[idx + 1] - quantiles[idx])
            }
        }
    }

    /// Safeguarded Newton inversion of a monotone cdf (used for mixtures,
    /// whose quantile has no closed form).
    fn invert_cdf_numeric(&self, p: f64) -> f64 {
        let (a, b) = self.support();
        let (mut lo, mut hi) = (a, b);
        let mut x = 0.5 * (a + b);
        for _ in 0..200 {
            let f = self.cdf(x) - p;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.pdf(x);
            let mut next = if d > 0.0 { x - f / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi); // bisection fallback keeps the bracket
            }
            if (next - x).abs() <= 1e-16 * (b - a) {
                return next;
            }
            x = next;
            if hi - lo <= 4.0 * f64::EPSILON * (b - a) {
                break;
            }
        }
        x
    }

    /// `n` i.i.d. draws by inverse transform.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Vec<f64> {
        (0..n)
            .map(|_| self.quantile_inner(rng.gen::<f64>()))
            .collect()
    }
}

fn check_bounds(a: f64, b: f64) -> Result<()> {
    if !a.is_finite() || !b.is_finite() || a >= b {
        return Err(Error::param(format!(
            "support bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    Ok(())
}

/// Independent product of `d` univariate laws.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDist {
    marginals: Vec<UnivariateDist>,
}

impl ProductDist {
    /// Build from marginal laws (at least one).
    pub fn new(marginals: Vec<UnivariateDist>) -> Result<Self> {
        if marginals.is_empty() {
            return Err(Error::param("product law needs at least one marginal"));
        }
        Ok(ProductDist { marginals })
    }

    /// Number of coordinates.
    pub fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// Marginal law of coordinate `k`.
    pub fn marginal(&self, k: usize) -> &UnivariateDist {
        &self.marginals[k]
    }

    /// All marginals in order.
    pub fn marginals(&self) -> &[UnivariateDist] {
        &self.marginals
    }

    /// Joint density: the product of marginal densities.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.dim(), "point dimension mismatch");
        self.marginals
            .iter()
            .zip(x)
            .map(|(law, &xi)| law.pdf(xi))
            .product()
    }

    /// Sample `n` points as an `n x d` matrix (rows are points), consuming
    /// one uniform draw per coordinate in row-major order.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> Array2<f64> {
        let d = self.dim();
        let mut out = Array2::zeros((n, d));
        for i in 0..n {
            for k in 0..d {
                out[[i, k]] = self.marginals[k].quantile_inner(rng.gen::<f64>());
            }
        }
        out
    }
}

/// Parametric families whose single uncertain parameter is itself random.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamFamily {
    /// Triangular on a fixed `[a, b]` with uncertain mode.
    TriangularMode { a: f64, b: f64 },
    /// Truncated normal on `[a, b]` with fixed sd and uncertain mean.
    TruncNormalMean { a: f64, b: f64, sd: f64 },
    /// Truncated normal on `[a, b]` with fixed mean and uncertain sd.
    TruncNormalSd { a: f64, b: f64, mean: f64 },
}

impl ParamFamily {
    /// Instantiate the family at parameter value `theta`.
    pub fn construct(&self, theta: f64) -> Result<UnivariateDist> {
        match *self {
            ParamFamily::TriangularMode { a, b } => UnivariateDist::triangular(a, b, theta),
            ParamFamily::TruncNormalMean { a, b, sd } => {
                UnivariateDist::trunc_normal(a, b, theta, sd)
            }
            ParamFamily::TruncNormalSd { a, b, mean } => {
                UnivariateDist::trunc_normal(a, b, mean, theta)
            }
        }
    }

    /// Support of every law in the family.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            ParamFamily::TriangularMode { a, b }
            | ParamFamily::TruncNormalMean { a, b, .. }
            | ParamFamily::TruncNormalSd { a, b, .. } => (a, b),
        }
    }
}

/// Prior over the law of one input: either a finite set of candidate laws
/// with probabilities, or a parametric family with a continuous parameter
/// prior.
#[derive(Debug, Clone, PartialEq)]
pub enum DistPrior {
    /// Finitely many candidate laws with selection probabilities.
    FiniteSet(Vec<(UnivariateDist, f64)>),
    /// A parametric family with a continuous prior on its free parameter.
    ParamFamily {
        family: ParamFamily,
        param_prior: UnivariateDist,
    },
}

impl DistPrior {
    /// Finite prior; probabilities must sum to 1 and all candidate laws must
    /// share one support interval (required for importance ratios).
    pub fn finite_set(candidates: Vec<(UnivariateDist, f64)>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::param("finite prior needs at least one candidate"));
        }
        let total: f64 = candidates.iter().map(|(_, p)| p).sum();
        if candidates.iter().any(|(_, p)| !p.is_finite() || *p < 0.0) {
            return Err(Error::param("prior probabilities must be nonnegative"));
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!(
                "prior probabilities sum to {total}, expected 1 within 1e-12"
            )));
        }
        let (a0, b0) = candidates[0].0.support();
        for (law, _) in &candidates[1..] {
            let (a, b) = law.support();
            if (a - a0).abs() > SUPPORT_TOL || (b - b0).abs() > SUPPORT_TOL {
                return Err(Error::SupportMismatch(format!(
                    "candidate laws on [{a0}, {b0}] vs [{a}, {b}]; importance ratios \
                     need a common support"
                )));
            }
        }
        Ok(DistPrior::FiniteSet(candidates))
    }

    /// Parametric-family prior.
    pub fn param_family(family: ParamFamily, param_prior: UnivariateDist) -> Result<Self> {
        // The parameter prior's support must produce valid laws at both ends.
        let (lo, hi) = param_prior.support();
        family.construct(lo)?;
        family.construct(hi)?;
        Ok(DistPrior::ParamFamily {
            family,
            param_prior,
        })
    }

    /// Common support of every law the prior can produce.
    pub fn support(&self) -> (f64, f64) {
        match self {
            DistPrior::FiniteSet(cands) => cands[0].0.support(),
            DistPrior::ParamFamily { family, .. } => family.support(),
        }
    }

    /// The candidate list when the prior is finite.
    pub fn finite_candidates(&self) -> Option<&[(UnivariateDist, f64)]> {
        match self {
            DistPrior::FiniteSet(cands) => Some(cands),
            DistPrior::ParamFamily { .. } => None,
        }
    }

    /// Draw one law, returning the candidate index for finite priors.
    pub fn draw_law_indexed(&self, rng: &mut impl Rng) -> (UnivariateDist, Option<usize>) {
        match self {
            DistPrior::FiniteSet(cands) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                for (idx, (law, p)) in cands.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return (law.clone(), Some(idx));
                    }
                }
                let last = cands.len() - 1;
                (cands[last].0.clone(), Some(last))
            }
            DistPrior::ParamFamily {
                family,
                param_prior,
            } => {
                let theta = param_prior.quantile_inner(rng.gen::<f64>());
                let law = family
                    .construct(theta)
                    .expect("parameter prior support was validated at construction");
                (law, None)
            }
        }
    }

    /// Draw one law from the prior.
    pub fn draw_law(&self, rng: &mut impl Rng) -> UnivariateDist {
        self.draw_law_indexed(rng).0
    }

    /// Marginalized density `E_prior[f_theta(x)]`: exact for finite priors,
    /// by quadrature over the parameter prior otherwise.
    pub(crate) fn marginal_pdf(&self, x: f64) -> f64 {
        match self {
            DistPrior::FiniteSet(cands) => cands.iter().map(|(law, p)| p * law.pdf(x)).sum(),
            DistPrior::ParamFamily {
                family,
                param_prior,
            } => {
                let (t_lo, t_hi) = param_prior.support();
                let rule = QuadRule::on_interval(PARAM_ORDER, t_lo, t_hi);
                rule.integrate(|theta| {
                    let law = family.construct(theta).expect("validated family");
                    param_prior.pdf(theta) * law.pdf(x)
                })
            }
        }
    }
}

/// Cartesian product of finite priors: every combination of candidate laws,
/// with its product probability. Errors if any prior is a continuous family.
pub fn enumerate_prior(priors: &[DistPrior]) -> Result<Vec<(ProductDist, f64)>> {
    let mut candidate_lists = Vec::with_capacity(priors.len());
    for (k, prior) in priors.iter().enumerate() {
        match prior.finite_candidates() {
            Some(c) => candidate_lists.push(c),
            None => {
                return Err(Error::UnsupportedEnumeration(format!(
                    "prior for input {} has a continuous parameter family; \
                     exhaustive enumeration needs finite candidate sets",
                    k + 1
                )))
            }
        }
    }
    let mut out = vec![(Vec::new(), 1.0)];
    for cands in &candidate_lists {
        let mut next = Vec::with_capacity(out.len() * cands.len());
        for (laws, prob) in &out {
            for (law, p) in *cands {
                let mut laws2 = laws.clone();
                laws2.push(law.clone());
                next.push((laws2, prob * p));
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|(laws, prob)| Ok((ProductDist::new(laws)?, prob)))
        .collect()
}
