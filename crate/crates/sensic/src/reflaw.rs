//! Reference sampling laws summarizing a prior over candidate input laws.
//!
//! The single-loop second-level procedure draws *one* sample under a
//! reference law and reweights it toward every candidate law, so the
//! reference must (a) share the candidates' support and (b) dominate each of
//! them well enough to keep the importance weights tame. Three summaries of
//! a [`DistPrior`] are provided:
//!
//! - the prior **mixture**, whose density is the prior-weighted average of
//!   the candidate densities — dominates every candidate by construction;
//! - the **symmetrized-KL barycenter**, the closed-form minimizer of the
//!   prior-averaged symmetrized Kullback–Leibler divergence: an equal blend
//!   of the arithmetic and (normalized) geometric density means;
//! - the **Wasserstein barycenter**, obtained by averaging the candidates'
//!   quantile functions.
//!
//! Continuous parameter priors are discretized by Gauss–Legendre quadrature;
//! non-mixture results are represented on a quantile grid.

use crate::dist::{DistPrior, ProductDist, UnivariateDist};
use crate::error::{Error, Result};
use crate::quad::{QuadRule, PARAM_ORDER};

/// Density values treated as zero inside the geometric mean.
const GEO_FLOOR: f64 = 1e-300;

/// Which summary of the prior is used as the reference law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceMethod {
    /// Prior mixture of the candidate laws.
    #[default]
    Mixture,
    /// Barycenter for the symmetrized Kullback–Leibler divergence.
    KlBarycenter,
    /// Barycenter for the 2-Wasserstein distance (quantile average).
    WassersteinBarycenter,
}

/// Reference-law construction parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceLawSpec {
    /// Construction method.
    pub method: ReferenceMethod,
    /// Resolution of grid-based constructions: quantile grids carry
    /// `grid_size + 1` nodes and density grids `2 * grid_size + 1` points.
    pub grid_size: usize,
}

impl Default for ReferenceLawSpec {
    fn default() -> Self {
        Self {
            method: ReferenceMethod::default(),
            grid_size: 2048,
        }
    }
}

impl ReferenceLawSpec {
    /// Spec with an explicit method and grid size (at least 64).
    pub fn new(method: ReferenceMethod, grid_size: usize) -> Result<Self> {
        if grid_size < 64 {
            return Err(Error::param(format!(
                "reference grid size must be at least 64, got {grid_size}"
            )));
        }
        Ok(Self { method, grid_size })
    }

    /// Spec with an explicit method and the default resolution.
    pub fn with_method(method: ReferenceMethod) -> Self {
        Self {
            method,
            ..Self::default()
        }
    }
}

/// Discretize a prior into weighted law atoms. Finite priors pass through;
/// continuous parameter priors are replaced by a Gauss–Legendre rule over
/// the parameter range, weighted by the prior density and renormalized.
fn prior_atoms(prior: &DistPrior) -> Result<Vec<(UnivariateDist, f64)>> {
    if let Some(cands) = prior.finite_candidates() {
        return Ok(cands.to_vec());
    }
    match prior {
        DistPrior::FiniteSet(_) => unreachable!("finite_candidates covers FiniteSet"),
        DistPrior::ParamFamily {
            family,
            param_prior,
        } => {
            let (lo, hi) = param_prior.support();
            let rule = QuadRule::on_interval(PARAM_ORDER, lo, hi);
            let mut atoms = Vec::with_capacity(rule.nodes.len());
            let mut total = 0.0;
            for (&theta, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let p = wt * param_prior.pdf(theta);
                if p <= 0.0 {
                    continue;
                }
                atoms.push((family.construct(theta)?, p));
                total += p;
            }
            if !(total > 0.0) {
                return Err(Error::degenerate(
                    "parameter prior has no mass on its support grid",
                ));
            }
            for a in &mut atoms {
                a.1 /= total;
            }
            Ok(atoms)
        }
    }
}

/// True when every atom equals the first (a fixed point of all three
/// constructions, returned verbatim).
fn all_identical(atoms: &[(UnivariateDist, f64)]) -> bool {
    atoms.windows(2).all(|w| w[0].0 == w[1].0)
}

/// Invert a tabulated density into `grid_size + 1` evenly spaced quantiles.
///
/// The density is accumulated by the trapezoid rule, normalized, and the
/// piecewise-linear cumulative is inverted at `p_j = j / grid_size`.
fn pdf_grid_to_quantiles(xs: &[f64], pdf: &[f64], grid_size: usize) -> Result<Vec<f64>> {
    let m = xs.len();
    let mut cum = vec![0.0; m];
    for i in 1..m {
        cum[i] = cum[i - 1] + 0.5 * (pdf[i - 1] + pdf[i]) * (xs[i] - xs[i - 1]);
    }
    let total = cum[m - 1];
    if !(total > 0.0) {
        return Err(Error::degenerate(
            "reference density integrates to zero on the support grid",
        ));
    }
    let mut qs = Vec::with_capacity(grid_size + 1);
    for j in 0..=grid_size {
        let t = total * j as f64 / grid_size as f64;
        let i = cum.partition_point(|&c| c < t).min(m - 1);
        let q = if i == 0 {
            xs[0]
        } else {
            let dc = cum[i] - cum[i - 1];
            let frac = if dc > 0.0 { (t - cum[i - 1]) / dc } else { 0.0 };
            xs[i - 1] + frac * (xs[i] - xs[i - 1])
        };
        let q = match qs.last() {
            Some(&prev) if q < prev => prev,
            _ => q,
        };
        qs.push(q);
    }
    Ok(qs)
}

/// Evenly spaced abscissas over the prior's support for density tabulation.
fn support_grid(prior: &DistPrior, grid_size: usize) -> Vec<f64> {
    let (a, b) = prior.support();
    let m = 2 * grid_size + 1;
    (0..m)
        .map(|i| a + (b - a) * i as f64 / (m - 1) as f64)
        .collect()
}

/// Prior mixture of the candidate laws.
///
/// Finite priors yield an exact finite mixture; continuous parameter priors
/// yield the prior-marginal density tabulated on a grid and stored as a
/// quantile-grid law.
pub fn mixture_reference(prior: &DistPrior, grid_size: usize) -> Result<UnivariateDist> {
    match prior {
        DistPrior::FiniteSet(cands) => {
            if cands.len() == 1 || all_identical(cands) {
                return Ok(cands[0].0.clone());
            }
            UnivariateDist::finite_mixture(cands.clone())
        }
        DistPrior::ParamFamily { .. } => {
            let xs = support_grid(prior, grid_size);
            let pdf: Vec<f64> = xs.iter().map(|&x| prior.marginal_pdf(x)).collect();
            UnivariateDist::quantile_grid(pdf_grid_to_quantiles(&xs, &pdf, grid_size)?)
        }
    }
}

/// Barycenter of the prior for the symmetrized KL divergence: the density
/// `0.5 * arith + 0.5 * geo / z`, where `arith` and `geo` are the
/// prior-weighted arithmetic and geometric density means and `z` normalizes
/// the geometric part.
pub fn kl_barycenter(prior: &DistPrior, grid_size: usize) -> Result<UnivariateDist> {
    let atoms = prior_atoms(prior)?;
    if all_identical(&atoms) {
        return Ok(atoms[0].0.clone());
    }
    let xs = support_grid(prior, grid_size);
    let m = xs.len();
    let mut arith = vec![0.0; m];
    let mut geo_log = vec![0.0; m];
    let mut geo_zero = vec![false; m];
    for (law, p) in &atoms {
        for i in 0..m {
            let f = law.pdf(xs[i]);
            arith[i] += p * f;
            if f < GEO_FLOOR {
                geo_zero[i] = true;
            } else {
                geo_log[i] += p * f.ln();
            }
        }
    }
    let geo: Vec<f64> = (0..m)
        .map(|i| if geo_zero[i] { 0.0 } else { geo_log[i].exp() })
        .collect();
    let mut z = 0.0;
    for i in 1..m {
        z += 0.5 * (geo[i - 1] + geo[i]) * (xs[i] - xs[i - 1]);
    }
    if !(z > 0.0) {
        return Err(Error::degenerate(
            "geometric density mean vanishes over the whole support",
        ));
    }
    let pdf: Vec<f64> = (0..m).map(|i| 0.5 * arith[i] + 0.5 * geo[i] / z).collect();
    UnivariateDist::quantile_grid(pdf_grid_to_quantiles(&xs, &pdf, grid_size)?)
}

/// Barycenter of the prior for the 2-Wasserstein distance: the law whose
/// quantile function is the prior-weighted average of the candidates'.
pub fn wasserstein_barycenter(prior: &DistPrior, grid_size: usize) -> Result<UnivariateDist> {
    let atoms = prior_atoms(prior)?;
    if all_identical(&atoms) {
        return Ok(atoms[0].0.clone());
    }
    let mut qs = vec![0.0; grid_size + 1];
    for (law, p) in &atoms {
        for (j, q) in qs.iter_mut().enumerate() {
            *q += p * law.quantile_inner(j as f64 / grid_size as f64);
        }
    }
    for j in 1..=grid_size {
        if qs[j] < qs[j - 1] {
            qs[j] = qs[j - 1];
        }
    }
    UnivariateDist::quantile_grid(qs)
}

/// Reference law of a single prior under `spec`.
pub fn reference_law(prior: &DistPrior, spec: &ReferenceLawSpec) -> Result<UnivariateDist> {
    match spec.method {
        ReferenceMethod::Mixture => mixture_reference(prior, spec.grid_size),
        ReferenceMethod::KlBarycenter => kl_barycenter(prior, spec.grid_size),
        ReferenceMethod::WassersteinBarycenter => wasserstein_barycenter(prior, spec.grid_size),
    }
}

/// Coordinate-wise reference product law for a vector of priors.
pub fn reference_product(priors: &[DistPrior], spec: &ReferenceLawSpec) -> Result<ProductDist> {
    let marginals = priors
        .iter()
        .map(|p| reference_law(p, spec))
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(marginals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_atom_prior() -> DistPrior {
        DistPrior::finite_set(vec![
            (UnivariateDist::uniform(0.0, 1.0).unwrap(), 0.5),
            (UnivariateDist::triangular(0.0, 1.0, 0.5).unwrap(), 0.5),
        ])
        .unwrap()
    }

    #[test]
    fn single_candidate_is_fixed_point_of_all_methods() {
        let atom = UnivariateDist::triangular(0.0, 1.0, 0.3).unwrap();
        let prior = DistPrior::finite_set(vec![(atom.clone(), 1.0)]).unwrap();
        for method in [
            ReferenceMethod::Mixture,
            ReferenceMethod::KlBarycenter,
            ReferenceMethod::WassersteinBarycenter,
        ] {
            let spec = ReferenceLawSpec::with_method(method);
            assert_eq!(reference_law(&prior, &spec).unwrap(), atom);
        }
    }

    #[test]
    fn identical_atoms_are_fixed_points() {
        let atom = UnivariateDist::uniform(0.0, 1.0).unwrap();
        let prior = DistPrior::finite_set(vec![(atom.clone(), 0.4), (atom.clone(), 0.6)]).unwrap();
        for method in [
            ReferenceMethod::KlBarycenter,
            ReferenceMethod::WassersteinBarycenter,
        ] {
            let spec = ReferenceLawSpec::with_method(method);
            assert_eq!(reference_law(&prior, &spec).unwrap(), atom);
        }
    }

    #[test]
    fn finite_mixture_density_is_prior_average() {
        let prior = two_atom_prior();
        let mixed = mixture_reference(&prior, 2048).unwrap();
        let tri = UnivariateDist::triangular(0.0, 1.0, 0.5).unwrap();
        for x in [0.1, 0.3, 0.5, 0.8] {
            let expect = 0.5 * 1.0 + 0.5 * tri.pdf(x);
            assert!((mixed.pdf(x) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn kl_barycenter_matches_closed_form_blend() {
        // For {U(0,1), T(0,1,1/2)} with equal weights the geometric mean is
        // sqrt(tri), whose normalizer is 2*sqrt(2)/3, so the blended density
        // at the mode is exactly 3/2, and the law is symmetric about 1/2.
        let kl = kl_barycenter(&two_atom_prior(), 2048).unwrap();
        assert!((kl.pdf(0.5) - 1.5).abs() < 0.02);
        assert!((kl.cdf(0.5) - 0.5).abs() < 1e-3);
        let (a, b) = kl.support();
        assert!((a - 0.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_barycenter_averages_quantiles() {
        let t1 = UnivariateDist::triangular(0.0, 1.0, 0.25).unwrap();
        let t2 = UnivariateDist::triangular(0.0, 1.0, 0.75).unwrap();
        let prior = DistPrior::finite_set(vec![(t1.clone(), 0.5), (t2.clone(), 0.5)]).unwrap();
        let bary = wasserstein_barycenter(&prior, 1024).unwrap();
        for p in [0.1, 0.25, 0.5, 0.9] {
            let expect = 0.5 * t1.quantile(p).unwrap() + 0.5 * t2.quantile(p).unwrap();
            let got = bary.quantile(p).unwrap();
            assert!(
                (got - expect).abs() < 1e-3,
                "p={p}: got {got}, expected {expect}"
            );
        }
    }

    #[test]
    fn param_family_mixture_preserves_symmetry() {
        let family = crate::dist::ParamFamily::TriangularMode { a: 0.0, b: 1.0 };
        let prior =
            DistPrior::param_family(family, UnivariateDist::uniform(0.3, 0.7).unwrap()).unwrap();
        let law = mixture_reference(&prior, 512).unwrap();
        // Symmetric prior over the mode implies a median of 1/2.
        assert!((law.quantile(0.5).unwrap() - 0.5).abs() < 2e-3);
        let (a, b) = law.support();
        assert!((a - 0.0).abs() < 1e-9 && (b - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixture_dominates_each_candidate() {
        let prior = two_atom_prior();
        let mixed = mixture_reference(&prior, 2048).unwrap();
        let tri = UnivariateDist::triangular(0.0, 1.0, 0.5).unwrap();
        for x in [0.05, 0.2, 0.5, 0.7, 0.95] {
            assert!(mixed.pdf(x) >= 0.5 * tri.pdf(x) - 1e-12);
            assert!(mixed.pdf(x) >= 0.5 * 1.0 - 1e-12);
        }
    }

    #[test]
    fn grid_size_floor_enforced() {
        assert!(ReferenceLawSpec::new(ReferenceMethod::Mixture, 32).is_err());
        assert!(ReferenceLawSpec::new(ReferenceMethod::Mixture, 64).is_ok());
    }
}
