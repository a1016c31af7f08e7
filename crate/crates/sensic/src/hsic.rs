//! First-level sensitivity: classical HSIC V-statistics, normalized R2
//! indices, and the two independence tests (Gamma-asymptotic and
//! permutation-based).
//!
//! All estimators work on one [`SampleSet`]: an `n x d` input matrix with its
//! output vector and the product law the inputs were drawn under. Kernel
//! bandwidths are standardized from the realized sample, once per column.

use crate::dist::ProductDist;
use crate::error::{Error, Result};
use crate::kernels::{gram, standardized_bandwidth, GaussianKernel};
use crate::weighted::{self, WeightSet};
use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use rand::Rng;

/// An evaluated design: inputs, outputs, and the law that generated them.
#[derive(Debug, Clone)]
pub struct SampleSet {
    inputs: Array2<f64>,
    outputs: Vec<f64>,
    generating_law: ProductDist,
}

impl SampleSet {
    /// Validate and assemble a sample.
    pub fn new(
        inputs: Array2<f64>,
        outputs: Vec<f64>,
        generating_law: ProductDist,
    ) -> Result<Self> {
        let n = inputs.nrows();
        if n < 2 {
            return Err(Error::SampleSize(format!("need n >= 2 rows, got {n}")));
        }
        if outputs.len() != n {
            return Err(Error::param(format!(
                "outputs length {} does not match {} input rows",
                outputs.len(),
                n
            )));
        }
        if inputs.ncols() != generating_law.dim() {
            return Err(Error::param(format!(
                "input matrix has {} columns but the law has dimension {}",
                inputs.ncols(),
                generating_law.dim()
            )));
        }
        if inputs.iter().any(|v| !v.is_finite()) || outputs.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("sample contains non-finite values"));
        }
        Ok(SampleSet {
            inputs,
            outputs,
            generating_law,
        })
    }

    /// Number of points.
    pub fn n(&self) -> usize {
        self.inputs.nrows()
    }

    /// Number of input coordinates.
    pub fn dim(&self) -> usize {
        self.inputs.ncols()
    }

    /// The input matrix (rows are points).
    pub fn inputs(&self) -> ArrayView2<'_, f64> {
        self.inputs.view()
    }

    /// The output vector.
    pub fn outputs(&self) -> &[f64] {
        &self.outputs
    }

    /// The law the inputs were sampled from.
    pub fn generating_law(&self) -> &ProductDist {
        &self.generating_law
    }

    /// Copy of input column `k` (the matrix is row-major, so columns are
    /// materialized on demand).
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.inputs.column(k).to_vec()
    }

    /// Standardized Gaussian Gram matrix of input column `k`.
    pub(crate) fn input_gram(&self, k: usize) -> Result<Array2<f64>> {
        let col = self.column(k);
        let lambda = standardized_bandwidth(&col)
            .map_err(|_| Error::degenerate(format!("input column {} has zero variance", k + 1)))?;
        Ok(gram(&GaussianKernel::new(lambda)?, &col))
    }

    /// Standardized Gaussian Gram matrix of the outputs.
    pub(crate) fn output_gram(&self) -> Result<Array2<f64>> {
        let lambda = standardized_bandwidth(&self.outputs)
            .map_err(|_| Error::degenerate("outputs have zero variance"))?;
        Ok(gram(&GaussianKernel::new(lambda)?, &self.outputs))
    }
}

/// Which estimator family produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    /// Sample drawn under the target law itself.
    Classical,
    /// Sample drawn under an alternative law, corrected by importance ratios.
    Weighted,
}

/// One HSIC estimate for one input.
#[derive(Debug, Clone, Copy)]
pub struct HsicValue {
    /// Estimate clamped below at 0 (tiny negative round-off removed).
    pub value: f64,
    /// The unclamped estimate, for diagnostics.
    pub raw: f64,
    /// Estimator family.
    pub kind: EstimatorKind,
    /// Zero-based input index the estimate refers to.
    pub input_index: usize,
}

impl HsicValue {
    pub(crate) fn classical(raw: f64, input_index: usize) -> Self {
        HsicValue {
            value: raw.max(0.0),
            raw,
            kind: EstimatorKind::Classical,
            input_index,
        }
    }
}

/// Double centering: `H G H` with `H = I - (1/n) 11'`, computed through row,
/// column, and grand means.
pub(crate) fn centered_gram(g: &Array2<f64>) -> Array2<f64> {
    let n = g.nrows();
    let nf = n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| g.row(i).sum() / nf).collect();
    let grand = row_means.iter().sum::<f64>() / nf;
    let mut out = g.clone();
    for i in 0..n {
        for j in 0..n {
            out[[i, j]] += grand - row_means[i] - row_means[j];
        }
    }
    out
}

/// `(1/n^2) * sum_ij A_ij B_ij` — the V-statistic contraction of a Gram
/// matrix against an (already centered) partner.
pub(crate) fn vstat_contract(a: &Array2<f64>, b_centered: &Array2<f64>) -> f64 {
    let n = a.nrows() as f64;
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b_centered.iter()) {
        acc += x * y;
    }
    acc / (n * n)
}

/// HSIC V-statistic between input `k` and the outputs, in the trace form
/// `(1/n^2) Tr(L_k H L H)` realized through explicit double centering.
pub fn hsic_v(sample: &SampleSet, k: usize) -> Result<HsicValue> {
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let lyc = centered_gram(&ly);
    Ok(HsicValue::classical(vstat_contract(&lk, &lyc), k))
}

/// The same statistic evaluated through the explicit four-sum form
/// (mean of products, product of means, and the cross term via row sums).
/// Serves as an independent code path for oracle comparisons.
pub fn hsic_v_sum(sample: &SampleSet, k: usize) -> Result<HsicValue> {
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    Ok(HsicValue::classical(vstat_sum_form(&lk, &ly), k))
}

/// Four-sum V-statistic on two Gram matrices.
pub(crate) fn vstat_sum_form(lk: &Array2<f64>, ly: &Array2<f64>) -> f64 {
    let n = lk.nrows();
    let nf = n as f64;
    let mut term1 = 0.0; // (1/n^2) sum_ij Lk_ij Ly_ij
    for (a, b) in lk.iter().zip(ly.iter()) {
        term1 += a * b;
    }
    term1 /= nf * nf;
    let rk: Vec<f64> = (0..n).map(|i| lk.row(i).sum() / nf).collect();
    let ry: Vec<f64> = (0..n).map(|i| ly.row(i).sum() / nf).collect();
    let mk = rk.iter().sum::<f64>() / nf;
    let my = ry.iter().sum::<f64>() / nf;
    let cross = rk.iter().zip(&ry).map(|(a, b)| a * b).sum::<f64>() / nf;
    term1 + mk * my - 2.0 * cross
}

/// Normalized index `HSIC(X_k, Y) / sqrt(HSIC(X_k, X_k) * HSIC(Y, Y))`,
/// clamped to `[0, 1]`.
pub fn r2_hsic(sample: &SampleSet, k: usize) -> Result<f64> {
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let lyc = centered_gram(&ly);
    let num = vstat_contract(&lk, &lyc).max(0.0);
    let hkk = vstat_contract(&lk, &centered_gram(&lk));
    let hyy = vstat_contract(&ly, &lyc);
    if hkk <= 0.0 || hyy <= 0.0 {
        return Err(Error::degenerate(
            "self-HSIC denominator vanished; sample carries no kernel variability",
        ));
    }
    Ok((num / (hkk * hyy).sqrt()).clamp(0.0, 1.0))
}

/// Gamma-asymptotic p-value for independence of `X_k` and `Y`.
///
/// The null moments come from the weighted module evaluated at unit weights;
/// the importance-weighted mean/variance formulas reduce exactly to the
/// classical ones when the sampling law equals the target law.
pub fn asymp_pvalue(sample: &SampleSet, k: usize) -> Result<f64> {
    let unit = WeightSet::unit(sample)?;
    weighted::wgamma_pvalue(sample, &unit, k)
}

/// Permutation p-value: the inputs of column `k` are permuted `B` times
/// while the outputs stay fixed, and the p-value is the strict-exceedance
/// fraction `(1/B) sum 1{stat_b > stat_obs}`.
pub fn perm_pvalue(sample: &SampleSet, k: usize, b: usize, rng: &mut impl Rng) -> Result<f64> {
    if b < 1 {
        return Err(Error::param("permutation test needs B >= 1"));
    }
    let lk = sample.input_gram(k)?;
    let ly = sample.output_gram()?;
    let lyc = centered_gram(&ly);
    let obs = vstat_contract(&lk, &lyc);
    let n = sample.n();
    let mut idx: Vec<usize> = (0..n).collect();
    let mut exceed = 0usize;
    for _ in 0..b {
        idx.shuffle(rng);
        // Permuting the column permutes its Gram rows and columns; the
        // bandwidth is permutation-invariant so the matrix can be reused.
        let mut stat = 0.0;
        for i in 0..n {
            let pi = idx[i];
            for j in 0..n {
                stat += lk[[pi, idx[j]]] * lyc[[i, j]];
            }
        }
        stat /= (n * n) as f64;
        if stat > obs {
            exceed += 1;
        }
    }
    Ok(exceed as f64 / b as f64)
}
