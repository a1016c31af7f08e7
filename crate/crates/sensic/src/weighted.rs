//! Importance-weighted HSIC estimators.
//!
//! When the sample was drawn under an alternative product law `f~` instead of
//! the target law `f`, every estimator is corrected by the importance ratios
//! `w_i = f(x_i) / f~(x_i)`, which factor across coordinates as
//! `w_i = prod_k omega_k(x_ik)`. This module provides the corrected
//! V-statistic (in two algebraically equivalent but independently coded
//! forms), the normalized index, the estimator's null-hypothesis mean and
//! variance, and the two corrected independence tests.

use crate::dist::ProductDist;
use crate::error::{Error, Result};
use crate::hsic::{EstimatorKind, HsicValue, SampleSet};
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;
use statrs::distribution::{ContinuousCDF, Gamma};

/// Cap applied to individual importance ratios before the heavy-tail guard.
const RATIO_CAP: f64 = 1e8;
/// Fraction of capped ratios beyond which the weight set is rejected.
const CAP_FRACTION_LIMIT: f64 = 1e-3;
/// Tolerance for support-endpoint comparisons.
const SUPPORT_TOL: f64 = 1e-12;

/// Importance ratios of a sample: per-coordinate factors and full products.
#[derive(Debug, Clone)]
pub struct WeightSet {
    /// `n x d` matrix of per-coordinate ratios `omega_k(x_ik)`.
    factors: Array2<f64>,
    /// Full products `w_i = prod_k omega_k(x_ik)`.
    weights: Vec<f64>,
    target: ProductDist,
    sampling: ProductDist,
    /// Number of individual ratios that hit the overflow cap.
    capped: usize,
}

impl WeightSet {
    /// Full per-point weights.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Per-coordinate ratio factors, one row per sample point.
    pub fn factors(&self) -> ArrayView2<'_, f64> {
        self.factors.view()
    }

    /// Copy of the ratio factors for coordinate `k`.
    pub fn factor_column(&self, k: usize) -> Vec<f64> {
        self.factors.column(k).to_vec()
    }

    /// Product of all ratio factors except coordinate `k`, computed directly
    /// (not by division, which would blow up on near-zero factors).
    pub fn complement_column(&self, k: usize) -> Vec<f64> {
        let (n, d) = self.factors.dim();
        let mut out = vec![1.0; n];
        for j in 0..d {
            if j == k {
                continue;
            }
            for (i, o) in out.iter_mut().enumerate() {
                *o *= self.factors[[i, j]];
            }
        }
        out
    }

    /// The law whose sensitivity indices the weights estimate.
    pub fn target_law(&self) -> &ProductDist {
        &self.target
    }

    /// The law the sample was actually drawn under.
    pub fn sampling_law(&self) -> &ProductDist {
        &self.sampling
    }

    /// How many individual ratios hit the overflow cap (diagnostic).
    pub fn capped_count(&self) -> usize {
        self.capped
    }

    /// Empirical per-coordinate weight variances (population convention).
    /// Finite-variance weights are a standing assumption of the corrected
    /// estimators; this report lets callers check it.
    pub fn factor_variances(&self) -> Vec<f64> {
        (0..self.factors.ncols())
            .map(|k| crate::kernels::population_variance(&self.factor_column(k)))
            .collect()
    }

    /// Weight set that is identically 1: target equals the sampling law.
    pub fn unit(sample: &SampleSet) -> Result<Self> {
        make_weights(
            sample.generating_law().clone(),
            sample.generating_law().clone(),
            sample.inputs(),
        )
    }

    /// Weight set from externally supplied per-coordinate ratio factors
    /// (for example, estimated density ratios). `factors` must be `n x d`
    /// with one row per point of `sample`; every entry must be finite and
    /// nonnegative. The target/sampling laws are recorded as the sample's
    /// own generating law, since the true target behind external ratios is
    /// unknown.
    pub fn from_factors(sample: &SampleSet, factors: Array2<f64>) -> Result<Self> {
        if factors.nrows() != sample.n() || factors.ncols() != sample.dim() {
            return Err(Error::param(format!(
                "factor matrix is {}x{} but the sample is {}x{}",
                factors.nrows(),
                factors.ncols(),
                sample.n(),
                sample.dim()
            )));
        }
        if factors.iter().any(|f| !f.is_finite() || *f < 0.0) {
            return Err(Error::param("ratio factors must be finite and nonnegative"));
        }
        let capped = factors.iter().filter(|f| **f > RATIO_CAP).count();
        if capped as f64 > CAP_FRACTION_LIMIT * factors.len() as f64 {
            return Err(Error::HeavyTailWeights(format!(
                "{capped} of {} supplied ratios exceed {RATIO_CAP:.0e}",
                factors.len()
            )));
        }
        let (n, d) = factors.dim();
        let weights: Vec<f64> = (0..n)
            .map(|i| (0..d).map(|k| factors[[i, k]]).product())
            .collect();
        Ok(WeightSet {
            factors,
            weights,
            target: sample.generating_law().clone(),
            sampling: sample.generating_law().clone(),
            capped,
        })
    }
}

/// Build the importance ratios of `inputs` (drawn under `sampling`) against
/// `target`. Both laws must share supports coordinate by coordinate.
pub fn make_weights(
    target: ProductDist,
    sampling: ProductDist,
    inputs: ArrayView2<f64>,
) -> Result<WeightSet> {
    let d = inputs.ncols();
    if target.dim() != d || sampling.dim() != d {
        return Err(Error::param(format!(
            "dimension mismatch: inputs have {d} columns, target {}, sampling {}",
            target.dim(),
            sampling.dim()
        )));
    }
    for k in 0..d {
        let (ta, tb) = target.marginal(k).support();
        let (sa, sb) = sampling.marginal(k).support();
        if (ta - sa).abs() > SUPPORT_TOL || (tb - sb).abs() > SUPPORT_TOL {
            return Err(Error::SupportMismatch(format!(
                "coordinate {}: target on [{ta}, {tb}] vs sampling on [{sa}, {sb}]",
                k + 1
            )));
        }
    }
    let n = inputs.nrows();
    let mut factors = Array2::zeros((n, d));
    let mut capped = 0usize;
    for i in 0..n {
        for k in 0..d {
            let x = inputs[[i, k]];
            let f = target.marginal(k).pdf(x);
            let g = sampling.marginal(k).pdf(x);
            let ratio = if g > 0.0 {
                f / g
            } else if f > 0.0 {
                return Err(Error::SupportViolation(format!(
                    "point {} coordinate {}: sampling density vanishes at {x} \
                     where the target density is {f}",
                    i + 1,
                    k + 1
                )));
            } else {
                0.0
            };
            if ratio > RATIO_CAP {
                capped += 1;
                factors[[i, k]] = RATIO_CAP;
            } else {
                factors[[i, k]] = ratio;
            }
        }
    }
    if capped as f64 > CAP_FRACTION_LIMIT * (n * d) as f64 {
        return Err(Error::HeavyTailWeights(format!(
            "{capped} of {} importance ratios exceeded {RATIO_CAP:.0e}; the \
             sampling law is too light-tailed relative to the target",
            n * d
        )));
    }
    let weights: Vec<f64> = (0..n)
        .map(|i| (0..d).map(|k| factors[[i, k]]).product())
        .collect();
    Ok(WeightSet {
        factors,
        weights,
        target,
        sampling,
        capped,
    })
}

/// Corrected V-statistic in the *trace* form: the output Gram is centered by
/// the one-sided weighted projections and contracted against the
/// weight-framed input Gram.
pub fn whsic(sample: &SampleSet, weights: &WeightSet, k: usize) -> Result<HsicValue> {
    check_alignment(sample, weights)?;
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let raw = whsic_trace_grams(&lk, &ly, weights.weights());
    Ok(weighted_value(raw, k))
}

/// Corrected V-statistic in the explicit *four-sum* form, kept as an
/// independent code path for oracle comparisons.
pub fn whsic_sum(sample: &SampleSet, weights: &WeightSet, k: usize) -> Result<HsicValue> {
    check_alignment(sample, weights)?;
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let raw = whsic_sum_grams(&lk, &ly, weights.weights());
    Ok(weighted_value(raw, k))
}

fn weighted_value(raw: f64, k: usize) -> HsicValue {
    HsicValue {
        value: raw.max(0.0),
        raw,
        kind: EstimatorKind::Weighted,
        input_index: k,
    }
}

fn check_alignment(sample: &SampleSet, weights: &WeightSet) -> Result<()> {
    if weights.weights.len() != sample.n() || weights.factors.ncols() != sample.dim() {
        return Err(Error::param(
            "weight set does not match the sample's dimensions",
        ));
    }
    Ok(())
}

/// Trace-form evaluation on prebuilt Gram matrices: weighted centering of
/// `ly`, then contraction against `w_i w_j lk_ij`.
pub(crate) fn whsic_trace_grams(lk: &Array2<f64>, ly: &Array2<f64>, w: &[f64]) -> f64 {
    let n = w.len();
    let nf = n as f64;
    // One-sided weighted means: mu_i = (1/n) sum_j ly_ij w_j, m = (1/n) mu . w
    let mut mu = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += ly[[i, j]] * w[j];
        }
        mu[i] = acc / nf;
    }
    let m = mu.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / nf;
    let mut total = 0.0;
    for i in 0..n {
        let wi = w[i];
        let mui = mu[i];
        let mut row = 0.0;
        for j in 0..n {
            row += w[j] * lk[[i, j]] * (ly[[i, j]] - mui - mu[j] + m);
        }
        total += wi * row;
    }
    total / (nf * nf)
}

/// Four-sum evaluation on prebuilt Gram matrices.
pub(crate) fn whsic_sum_grams(lk: &Array2<f64>, ly: &Array2<f64>, w: &[f64]) -> f64 {
    let n = w.len();
    let nf = n as f64;
    let mut h1 = 0.0;
    let mut ak = vec![0.0; n]; // (1/n) sum_j lk_ij w_j
    let mut ay = vec![0.0; n]; // (1/n) sum_j ly_ij w_j
    for i in 0..n {
        let mut acck = 0.0;
        let mut accy = 0.0;
        let mut acc1 = 0.0;
        for j in 0..n {
            let wj = w[j];
            acck += lk[[i, j]] * wj;
            accy += ly[[i, j]] * wj;
            acc1 += lk[[i, j]] * ly[[i, j]] * wj;
        }
        ak[i] = acck / nf;
        ay[i] = accy / nf;
        h1 += acc1 * w[i];
    }
    h1 /= nf * nf;
    let h2 = ak.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / nf;
    let h3 = ay.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / nf;
    let h4 = w
        .iter()
        .zip(ak.iter().zip(&ay))
        .map(|(wi, (ai, bi))| wi * ai * bi)
        .sum::<f64>()
        / nf;
    h1 + h2 * h3 - 2.0 * h4
}

/// Corrected normalized index: the weighted analog of `R2_HSIC`, with the
/// full weights applied in the numerator and both denominators, clamped to
/// `[0, 1]`.
pub fn wr2_hsic(sample: &SampleSet, weights: &WeightSet, k: usize) -> Result<f64> {
    check_alignment(sample, weights)?;
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let w = weights.weights();
    let num = whsic_trace_grams(&lk, &ly, w).max(0.0);
    let hkk = whsic_trace_grams(&lk, &lk, w);
    let hyy = whsic_trace_grams(&ly, &ly, w);
    if hkk <= 0.0 || hyy <= 0.0 {
        return Err(Error::degenerate("weighted self-HSIC denominator vanished"));
    }
    Ok((num / (hkk * hyy).sqrt()).clamp(0.0, 1.0))
}

/// Null-hypothesis mean of the corrected estimator (its O(1/n) bias, since
/// the true HSIC vanishes under independence), with every expectation
/// replaced by its empirical plug-in.
pub fn whsic_bias_h0(sample: &SampleSet, weights: &WeightSet, k: usize) -> Result<f64> {
    check_alignment(sample, weights)?;
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    Ok(bias_h0_grams(
        &lk,
        &ly,
        &weights.factor_column(k),
        &weights.complement_column(k),
    ))
}

pub(crate) fn bias_h0_grams(lk: &Array2<f64>, ly: &Array2<f64>, wk: &[f64], wmk: &[f64]) -> f64 {
    let n = wk.len();
    let nf = n as f64;
    let w: Vec<f64> = wk.iter().zip(wmk).map(|(a, b)| a * b).collect();
    let e_w = w.iter().map(|v| v * v).sum::<f64>() / nf;
    let e_wk = wk.iter().map(|v| v * v).sum::<f64>() / nf;
    let e_wmk = wmk.iter().map(|v| v * v).sum::<f64>() / nf;
    let quad = |g: &Array2<f64>, left: &dyn Fn(usize) -> f64, right: &[f64]| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let li = left(i);
            let mut row = 0.0;
            for j in 0..n {
                row += g[[i, j]] * right[j];
            }
            acc += li * row;
        }
        acc / (nf * nf)
    };
    let e_xk = quad(lk, &|i| wk[i], wk);
    let e_y = quad(ly, &|i| wmk[i], wmk);
    let e_xkw = quad(lk, &|i| wk[i] * wk[i], wk);
    let e_yw = quad(ly, &|i| wmk[i] * wmk[i], wmk);
    (2.0 / nf) * (e_wk - e_xkw) * (e_wmk - e_yw) - (1.0 / nf) * (e_w - e_xk) * (e_w - e_y)
        + (1.0 / nf) * e_w * (e_w - 1.0)
}

/// Which estimator is used for the null-hypothesis variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum H0VarianceForm {
    /// Full second-order degenerate kernel of the corrected V-statistic,
    /// including the first-order cross covariance between the product
    /// terms. Default; calibrated against Monte Carlo variance.
    #[default]
    FullKernel,
    /// Factored row/column-mean form that omits that cross covariance. It
    /// coincides with `FullKernel` at unit weights but underestimates the
    /// variance under strong reweighting; retained for comparison.
    FactoredMeans,
}

/// Null-hypothesis variance estimate of the corrected estimator.
pub fn whsic_var_h0(sample: &SampleSet, weights: &WeightSet, k: usize) -> Result<f64> {
    whsic_var_h0_with(sample, weights, k, H0VarianceForm::default())
}

/// Null-hypothesis variance with an explicit choice of estimator form.
pub fn whsic_var_h0_with(
    sample: &SampleSet,
    weights: &WeightSet,
    k: usize,
    form: H0VarianceForm,
) -> Result<f64> {
    check_alignment(sample, weights)?;
    if sample.n() < 6 {
        return Err(Error::SampleSize(format!(
            "variance estimator needs n >= 6, got {}",
            sample.n()
        )));
    }
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let wk = weights.factor_column(k);
    let wmk = weights.complement_column(k);
    Ok(match form {
        H0VarianceForm::FullKernel => var_h0_full_kernel(&lk, &ly, &wk, &wmk),
        H0VarianceForm::FactoredMeans => var_h0_factored(&lk, &ly, &wk, &wmk),
    })
}

/// Finite-n constant in front of the squared-kernel sum.
fn variance_constant(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * (nf - 4.0) * (nf - 5.0) / (nf.powi(3) * (nf - 1.0) * (nf - 2.0) * (nf - 3.0))
}

/// Variance via the full degenerate second-order kernel `G` of the
/// statistic's von Mises expansion: `Var ~ c(n) * sum_ij G_ij^2`.
///
/// With unit weights `G` reduces exactly to the elementwise product of the
/// doubly centered Gram matrices, recovering the classical estimator.
pub(crate) fn var_h0_full_kernel(
    lk: &Array2<f64>,
    ly: &Array2<f64>,
    wk: &[f64],
    wmk: &[f64],
) -> f64 {
    let n = wk.len();
    let nf = n as f64;
    let w: Vec<f64> = wk.iter().zip(wmk).map(|(a, b)| a * b).collect();
    // Weighted kernel means.
    let mut mu_k = vec![0.0; n]; // (1/n) sum_j lk_ij wk_j
    let mut mu_l = vec![0.0; n]; // (1/n) sum_j ly_ij wmk_j
    for i in 0..n {
        let mut acck = 0.0;
        let mut accl = 0.0;
        for j in 0..n {
            acck += lk[[i, j]] * wk[j];
            accl += ly[[i, j]] * wmk[j];
        }
        mu_k[i] = acck / nf;
        mu_l[i] = accl / nf;
    }
    let m_k = mu_k.iter().zip(wk).map(|(a, b)| a * b).sum::<f64>() / nf;
    let m_l = mu_l.iter().zip(wmk).map(|(a, b)| a * b).sum::<f64>() / nf;
    // First-order pieces and their composites.
    let wmu_k: Vec<f64> = (0..n).map(|i| w[i] * mu_k[i]).collect();
    let wmu_l: Vec<f64> = (0..n).map(|i| w[i] * mu_l[i]).collect();
    let wmu_kl: Vec<f64> = (0..n).map(|i| w[i] * mu_k[i] * mu_l[i]).collect();
    let beta: Vec<f64> = (0..n).map(|i| wmu_k[i] - m_k).collect();
    let gamma: Vec<f64> = (0..n).map(|i| wmu_l[i] - m_l).collect();
    let mkl = m_k * m_l;

    let mut sum_sq = 0.0;
    for i in 0..n {
        let (wi, mui_l) = (w[i], mu_l[i]);
        for j in 0..n {
            let wj = w[j];
            let kij = lk[[i, j]];
            let lij = ly[[i, j]];
            let wij = wi * wj;
            // Doubly centered second-order kernels of the three V-terms.
            let g1 = kij * lij * wij - wmu_kl[i] - wmu_kl[j] + mkl;
            let g2 = kij * wij - wmu_k[i] - wmu_k[j] + m_k;
            let g3 = lij * wij - wmu_l[i] - wmu_l[j] + m_l;
            // First-order cross covariance of the product term.
            let cross = 2.0 * (beta[i] * gamma[j] + beta[j] * gamma[i]);
            // Symmetrized pair projections of the coupling term.
            let c12 = 0.5
                * ((kij * wij * mui_l - wmu_kl[i] - wmu_k[j] * m_l + mkl)
                    + (kij * wij * mu_l[j] - wmu_kl[j] - wmu_k[i] * m_l + mkl));
            let c13 = 0.5
                * ((wmu_k[i] * wj * lij - wmu_kl[i] - wmu_l[j] * m_k + mkl)
                    + (wmu_k[j] * wi * lij - wmu_kl[j] - wmu_l[i] * m_k + mkl));
            let c23 = 0.5
                * ((wmu_k[i] * wmu_l[j] - wmu_k[i] * m_l - wmu_l[j] * m_k + mkl)
                    + (wmu_k[j] * wmu_l[i] - wmu_k[j] * m_l - wmu_l[i] * m_k + mkl));
            let g = g1 + m_l * g2 + m_k * g3 + cross - 2.0 * (c12 + c13 + c23);
            sum_sq += g * g;
        }
    }
    variance_constant(n) * sum_sq
}

/// Variance via the factored row/column-mean form (comparison variant).
pub(crate) fn var_h0_factored(lk: &Array2<f64>, ly: &Array2<f64>, wk: &[f64], wmk: &[f64]) -> f64 {
    let n = wk.len();
    let nf = n as f64;
    let w: Vec<f64> = wk.iter().zip(wmk).map(|(a, b)| a * b).collect();
    let mut ak = vec![0.0; n];
    let mut ay = vec![0.0; n];
    for i in 0..n {
        let mut acck = 0.0;
        let mut accy = 0.0;
        for j in 0..n {
            acck += lk[[i, j]] * wk[j];
            accy += ly[[i, j]] * wmk[j];
        }
        ak[i] = acck / nf;
        ay[i] = accy / nf;
    }
    let gk = ak.iter().sum::<f64>() / nf;
    let gy = ay.iter().sum::<f64>() / nf;
    let mut sum_sq = 0.0;
    for i in 0..n {
        let wi = w[i];
        for j in 0..n {
            let wj = w[j];
            let kij = lk[[i, j]];
            let lij = ly[[i, j]];
            let b1 = kij * wi * wj * (lij - ay[i] - ay[j] + gy);
            let b2 = -ak[i] * wi * (lij * wj - ay[i] - ay[j] * wj + gy);
            let b3 = -ak[j] * wj * (lij * wi - ay[i] * wi - ay[j] + gy);
            let b4 = gk * (lij * wi * wj - ay[i] * wi - ay[j] * wj + gy);
            let b = b1 + b2 + b3 + b4;
            sum_sq += b * b;
        }
    }
    variance_constant(n) * sum_sq
}

/// Which plug-in is used for the null mean in the Gamma test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum H0MeanConvention {
    /// The null-bias plug-in: under independence the estimator's expectation
    /// equals its bias, which has a closed-form estimate. Default.
    #[default]
    NullPlugin,
    /// The literal observed statistic (a single realization). Retained for
    /// comparison; unreliable as a mean estimate.
    ObservedStatistic,
}

/// Options for the Gamma-asymptotic test.
#[derive(Debug, Clone, Copy, Default)]
pub struct GammaTestOptions {
    /// Null-mean plug-in convention.
    pub mean: H0MeanConvention,
    /// Null-variance estimator form.
    pub variance: H0VarianceForm,
}

/// Fitted null moments and the induced Gamma parameters.
#[derive(Debug, Clone, Copy)]
pub struct H0Moments {
    /// Estimated null mean of the statistic.
    pub mean_h0: f64,
    /// Estimated null variance of the statistic.
    pub var_h0: f64,
    /// Gamma shape `mean^2 / var`.
    pub gamma_shape: f64,
    /// Gamma scale `n * var / mean` (the test statistic is `n * HSIC`).
    pub gamma_scale: f64,
}

/// Estimate the null moments of the corrected estimator for input `k`.
pub fn h0_moments(
    sample: &SampleSet,
    weights: &WeightSet,
    k: usize,
    opts: GammaTestOptions,
) -> Result<H0Moments> {
    check_alignment(sample, weights)?;
    if sample.n() < 6 {
        return Err(Error::SampleSize(format!(
            "variance estimator needs n >= 6, got {}",
            sample.n()
        )));
    }
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    h0_moments_grams(
        &lk,
        &ly,
        &weights.factor_column(k),
        &weights.complement_column(k),
        opts,
    )
}

/// Null moments from prebuilt Gram matrices and weight factors.
pub(crate) fn h0_moments_grams(
    lk: &Array2<f64>,
    ly: &Array2<f64>,
    wk: &[f64],
    wmk: &[f64],
    opts: GammaTestOptions,
) -> Result<H0Moments> {
    let mean = match opts.mean {
        H0MeanConvention::NullPlugin => bias_h0_grams(lk, ly, wk, wmk),
        H0MeanConvention::ObservedStatistic => {
            let w: Vec<f64> = wk.iter().zip(wmk).map(|(a, b)| a * b).collect();
            whsic_trace_grams(lk, ly, &w)
        }
    };
    let var = match opts.variance {
        H0VarianceForm::FullKernel => var_h0_full_kernel(lk, ly, wk, wmk),
        H0VarianceForm::FactoredMeans => var_h0_factored(lk, ly, wk, wmk),
    };
    if !(mean > 0.0) || !(var > 0.0) {
        return Err(Error::TestDegenerate(format!(
            "null moments unusable: mean {mean:.3e}, variance {var:.3e}"
        )));
    }
    let n = wk.len() as f64;
    Ok(H0Moments {
        mean_h0: mean,
        var_h0: var,
        gamma_shape: mean * mean / var,
        gamma_scale: n * var / mean,
    })
}

/// Gamma-asymptotic p-value of the corrected independence test.
pub fn wgamma_pvalue(sample: &SampleSet, weights: &WeightSet, k: usize) -> Result<f64> {
    wgamma_pvalue_with(sample, weights, k, GammaTestOptions::default())
}

/// Gamma-asymptotic p-value with explicit moment conventions.
pub fn wgamma_pvalue_with(
    sample: &SampleSet,
    weights: &WeightSet,
    k: usize,
    opts: GammaTestOptions,
) -> Result<f64> {
    check_alignment(sample, weights)?;
    if sample.n() < 6 {
        return Err(Error::SampleSize(format!(
            "variance estimator needs n >= 6, got {}",
            sample.n()
        )));
    }
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    wgamma_pvalue_grams(
        &lk,
        &ly,
        &weights.factor_column(k),
        &weights.complement_column(k),
        opts,
    )
}

/// Gamma-asymptotic p-value from prebuilt Gram matrices and weight factors.
pub(crate) fn wgamma_pvalue_grams(
    lk: &Array2<f64>,
    ly: &Array2<f64>,
    wk: &[f64],
    wmk: &[f64],
    opts: GammaTestOptions,
) -> Result<f64> {
    let moments = h0_moments_grams(lk, ly, wk, wmk, opts)?;
    let w: Vec<f64> = wk.iter().zip(wmk).map(|(a, b)| a * b).collect();
    let stat = wk.len() as f64 * whsic_trace_grams(lk, ly, &w);
    if stat <= 0.0 {
        return Ok(1.0);
    }
    let gamma = Gamma::new(moments.gamma_shape, 1.0 / moments.gamma_scale)
        .map_err(|e| Error::TestDegenerate(format!("Gamma fit failed: {e}")))?;
    Ok(gamma.sf(stat))
}

/// Permutation p-value of the corrected test.
///
/// Each replicate permutes the `k`-th input column *together with its ratio
/// factor* `omega_k`, holding the outputs and the complementary factor
/// `omega_{-k}` in place; this preserves both weighted marginal structures
/// while breaking the dependence under test. The p-value is the
/// strict-exceedance fraction over `B` replicates.
pub fn wperm_pvalue(
    sample: &SampleSet,
    weights: &WeightSet,
    k: usize,
    b: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    if b < 1 {
        return Err(Error::param("permutation test needs B >= 1"));
    }
    check_alignment(sample, weights)?;
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let wk = weights.factor_column(k);
    let wmk = weights.complement_column(k);
    let w: Vec<f64> = wk.iter().zip(&wmk).map(|(a, b)| a * b).collect();
    let obs = whsic_sum_grams(&lk, &ly, &w);
    let n = sample.n();
    let nf = n as f64;
    let mut idx: Vec<usize> = (0..n).collect();
    let mut wp = vec![0.0; n];
    let mut ak = vec![0.0; n];
    let mut ay = vec![0.0; n];
    let mut exceed = 0usize;
    for _ in 0..b {
        idx.shuffle(rng);
        for i in 0..n {
            wp[i] = wk[idx[i]] * wmk[i];
        }
        // Recompute the four-sum statistic against the permuted input Gram
        // (a row/column gather of lk) and the permuted weights.
        let mut h1 = 0.0;
        for i in 0..n {
            let pi = idx[i];
            let mut acck = 0.0;
            let mut accy = 0.0;
            let mut acc1 = 0.0;
            for j in 0..n {
                let wj = wp[j];
                let kv = lk[[pi, idx[j]]];
                let yv = ly[[i, j]];
                acck += kv * wj;
                accy += yv * wj;
                acc1 += kv * yv * wj;
            }
            ak[i] = acck / nf;
            ay[i] = accy / nf;
            h1 += acc1 * wp[i];
        }
        h1 /= nf * nf;
        let h2 = ak.iter().zip(&wp).map(|(a, b)| a * b).sum::<f64>() / nf;
        let h3 = ay.iter().zip(&wp).map(|(a, b)| a * b).sum::<f64>() / nf;
        let h4 = wp
            .iter()
            .zip(ak.iter().zip(&ay))
            .map(|(wi, (ai, bi))| wi * ai * bi)
            .sum::<f64>()
            / nf;
        let stat = h1 + h2 * h3 - 2.0 * h4;
        if stat > obs {
            exceed += 1;
        }
    }
    Ok(exceed as f64 / b as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::UnivariateDist;
    use crate::hsic;
    use crate::rng::stream;

    fn uniform_cube(d: usize) -> ProductDist {
        ProductDist::new(
            (0..d)
                .map(|_| UnivariateDist::uniform(0.0, 1.0).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn triangular_cube(d: usize, mode: f64) -> ProductDist {
        ProductDist::new(
            (0..d)
                .map(|_| UnivariateDist::triangular(0.0, 1.0, mode).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn weighted_sample(n: usize, seed: u64) -> (SampleSet, WeightSet) {
        let sampling = uniform_cube(2);
        let target = triangular_cube(2, 0.5);
        let mut rng = stream(seed, &[1]);
        let inputs = sampling.sample(n, &mut rng);
        let outputs: Vec<f64> = inputs
            .rows()
            .into_iter()
            .map(|r| (3.0 * r[0]).sin() + 0.2 * r[1] * r[1])
            .collect();
        let sample = SampleSet::new(inputs, outputs, sampling.clone()).unwrap();
        let weights = make_weights(target, sampling, sample.inputs()).unwrap();
        (sample, weights)
    }

    #[test]
    fn triangular_peak_weight_is_two() {
        let sampling = uniform_cube(1);
        let target = triangular_cube(1, 0.5);
        let inputs = Array2::from_shape_vec((2, 1), vec![0.5, 0.25]).unwrap();
        let ws = make_weights(target, sampling, inputs.view()).unwrap();
        assert!((ws.weights()[0] - 2.0).abs() < 1e-15);
        assert!((ws.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn unit_weights_are_exactly_one() {
        let (sample, _) = weighted_sample(20, 3);
        let unit = WeightSet::unit(&sample).unwrap();
        assert!(unit.weights().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn support_mismatch_detected() {
        let sampling = uniform_cube(1);
        let target = ProductDist::new(vec![UnivariateDist::uniform(0.0, 2.0).unwrap()]).unwrap();
        let inputs = Array2::from_elem((4, 1), 0.5);
        assert!(matches!(
            make_weights(target, sampling, inputs.view()),
            Err(Error::SupportMismatch(_))
        ));
    }

    #[test]
    fn trace_and_sum_forms_agree() {
        let (sample, weights) = weighted_sample(24, 5);
        for k in 0..2 {
            let a = whsic(&sample, &weights, k).unwrap().raw;
            let b = whsic_sum(&sample, &weights, k).unwrap().raw;
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }

    #[test]
    fn unit_weights_reduce_to_classical() {
        let (sample, _) = weighted_sample(40, 7);
        let unit = WeightSet::unit(&sample).unwrap();
        for k in 0..2 {
            let w = whsic(&sample, &unit, k).unwrap().raw;
            let c = hsic::hsic_v(&sample, k).unwrap().raw;
            assert!((w - c).abs() <= 1e-12 * c.abs().max(1.0));
            let wr = wr2_hsic(&sample, &unit, k).unwrap();
            let cr = hsic::r2_hsic(&sample, k).unwrap();
            assert!((wr - cr).abs() <= 1e-12);
        }
    }

    #[test]
    fn unit_weight_bias_matches_classical_reduction() {
        let (sample, _) = weighted_sample(30, 9);
        let unit = WeightSet::unit(&sample).unwrap();
        let bias = whsic_bias_h0(&sample, &unit, 0).unwrap();
        // At unit weights the formula collapses to (1/n)(1 - Ex)(1 - Ey).
        let n = sample.n() as f64;
        let lk = sample.input_gram(0).unwrap();
        let ly = sample.output_gram().unwrap();
        let ex = lk.sum() / (n * n);
        let ey = ly.sum() / (n * n);
        let expect = (1.0 / n) * (1.0 - ex) * (1.0 - ey);
        assert!((bias - expect).abs() < 1e-14);
    }

    #[test]
    fn variance_forms_coincide_at_unit_weights() {
        let (sample, _) = weighted_sample(16, 11);
        let unit = WeightSet::unit(&sample).unwrap();
        let a = whsic_var_h0_with(&sample, &unit, 0, H0VarianceForm::FullKernel).unwrap();
        let b = whsic_var_h0_with(&sample, &unit, 0, H0VarianceForm::FactoredMeans).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
        assert!(a >= 0.0);
    }

    #[test]
    fn variance_requires_six_points() {
        let (sample, weights) = weighted_sample(24, 13);
        assert!(whsic_var_h0(&sample, &weights, 0).is_ok());
        let small_inputs = sample.inputs().slice(ndarray::s![0..5, ..]).to_owned();
        let small_outputs = sample.outputs()[0..5].to_vec();
        let small =
            SampleSet::new(small_inputs, small_outputs, sample.generating_law().clone()).unwrap();
        let small_w = WeightSet::unit(&small).unwrap();
        assert!(matches!(
            whsic_var_h0(&small, &small_w, 0),
            Err(Error::SampleSize(_))
        ));
    }

    #[test]
    fn gamma_pvalue_in_unit_interval() {
        let (sample, weights) = weighted_sample(120, 17);
        let p = wgamma_pvalue(&sample, &weights, 0).unwrap();
        assert!((0.0..=1.0).contains(&p));
    }

    #[test]
    fn perm_pvalue_single_draw_binary() {
        let (sample, weights) = weighted_sample(40, 19);
        let p = wperm_pvalue(&sample, &weights, 0, 1, &mut stream(2, &[0])).unwrap();
        assert!(p == 0.0 || p == 1.0);
    }

    #[test]
    fn estimator_invariant_under_joint_row_permutation() {
        let (sample, weights) = weighted_sample(18, 23);
        let base = whsic(&sample, &weights, 0).unwrap().raw;
        let n = sample.n();
        let perm: Vec<usize> = (0..n).rev().collect();
        let mut inputs = Array2::zeros((n, sample.dim()));
        let mut outputs = vec![0.0; n];
        for (i, &pi) in perm.iter().enumerate() {
            for k in 0..sample.dim() {
                inputs[[i, k]] = sample.inputs()[[pi, k]];
            }
            outputs[i] = sample.outputs()[pi];
        }
        let s2 = SampleSet::new(inputs, outputs, sample.generating_law().clone()).unwrap();
        let w2 = make_weights(
            weights.target_law().clone(),
            weights.sampling_law().clone(),
            s2.inputs(),
        )
        .unwrap();
        let permuted = whsic(&s2, &w2, 0).unwrap().raw;
        assert!((base - permuted).abs() < 1e-12);
    }
}
