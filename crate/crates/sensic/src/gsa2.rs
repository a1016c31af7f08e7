//! Second-level sensitivity analysis: sensitivity to the input laws.
//!
//! A first-level study measures how much each input *variable* drives the
//! output of a model, summarized by a quantity of interest (QoI) such as the
//! vector of normalized HSIC indices. When the input laws themselves are
//! uncertain — described by a prior over candidate laws per coordinate — the
//! second level asks: how much does the *choice of law* for coordinate `k`
//! drive the QoI? The answer is again an HSIC index, now between a
//! law-valued input (compared through a distribution kernel built on maximum
//! mean discrepancy) and the QoI (compared through a Gaussian vector kernel,
//! or a Mallows kernel when the QoI is a ranking).
//!
//! Two designs are provided. The **double loop** draws a fresh sample and
//! runs a full first-level study per drawn law tuple (`n1 * n2` model
//! evaluations). The **single loop** evaluates the model once on `n2` points
//! drawn under a [reference law](crate::reflaw) and replays every first-level
//! study by importance reweighting — the model evaluation budget drops to
//! `n2` regardless of how many law tuples are examined.

use crate::dist::{enumerate_prior, DistPrior, ProductDist, UnivariateDist};
use crate::error::{Error, Result};
use crate::hsic::{self, SampleSet};
use crate::kernels::{
    self, standardized_bandwidth, DispersionConvention, GaussianKernel, Permutation,
};
use crate::reflaw::{reference_product, ReferenceLawSpec};
use crate::weighted::{self, make_weights, WeightSet};
use ndarray::{Array2, ArrayView2};
use rand::Rng;
use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};

/// Tolerance used when checking that finite priors are equiprobable.
const PROB_TOL: f64 = 1e-12;

/// A deterministic black-box model mapping an input point to a scalar.
pub trait Model: Sync {
    /// Evaluate the model at one input point.
    fn eval(&self, x: &[f64]) -> f64;
}

impl<F> Model for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn eval(&self, x: &[f64]) -> f64 {
        self(x)
    }
}

/// Wrapper counting every model evaluation (for budget accounting).
pub struct CountingModel<M> {
    inner: M,
    count: AtomicUsize,
}

impl<M: Model> CountingModel<M> {
    /// Wrap a model with an evaluation counter starting at zero.
    pub fn new(inner: M) -> Self {
        Self {
            inner,
            count: AtomicUsize::new(0),
        }
    }

    /// Number of evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }
}

impl<M: Model> Model for CountingModel<M> {
    fn eval(&self, x: &[f64]) -> f64 {
        self.count.fetch_add(1, Ordering::Relaxed);
        self.inner.eval(x)
    }
}

/// Evaluate a model on every row, rejecting non-finite outputs with the
/// offending row index.
pub fn evaluate_model<M: Model + ?Sized>(model: &M, inputs: ArrayView2<f64>) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(inputs.nrows());
    for (i, row) in inputs.rows().into_iter().enumerate() {
        let y = model.eval(row.as_slice().expect("row-major input matrix"));
        if !y.is_finite() {
            return Err(Error::ModelEvaluation {
                index: i,
                message: format!("model returned a non-finite output ({y})"),
            });
        }
        out.push(y);
    }
    Ok(out)
}

/// Which quantity of interest each first-level study reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QoiKind {
    /// Vector of normalized HSIC indices, one per input.
    R2Vector,
    /// Importance ranking of the inputs (most important first).
    Ranking,
    /// Vector of asymptotic independence-test p-values.
    AsympPvalVector,
    /// Vector of permutation-test p-values with the given replicate count.
    PermPvalVector(usize),
}

/// Outcome of one first-level study.
#[derive(Debug, Clone, PartialEq)]
pub enum Gsa1Result {
    /// Normalized index per input.
    R2(Vec<f64>),
    /// Input indices ordered from most to least important.
    Ranking(Permutation),
    /// Independence-test p-value per input.
    Pvalues(Vec<f64>),
}

impl Gsa1Result {
    /// The numeric vector payload, when the QoI is vector-valued.
    pub fn as_vector(&self) -> Option<&[f64]> {
        match self {
            Gsa1Result::R2(v) | Gsa1Result::Pvalues(v) => Some(v),
            Gsa1Result::Ranking(_) => None,
        }
    }

    /// The ranking payload, when the QoI is a ranking.
    pub fn as_ranking(&self) -> Option<&Permutation> {
        match self {
            Gsa1Result::Ranking(p) => Some(p),
            _ => None,
        }
    }
}

/// Rank input indices by descending value, breaking ties by ascending index.
pub fn ranking_by_importance(values: &[f64]) -> Permutation {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    Permutation::new(idx).expect("sorted index sequence is a permutation")
}

/// Prebuilt Gram matrices of one sample: one per input column plus the
/// output Gram, all with standardized bandwidths. Built once and shared by
/// every reweighted first-level study on the sample.
pub(crate) struct SampleGrams {
    pub(crate) input: Vec<Array2<f64>>,
    pub(crate) output: Array2<f64>,
}

impl SampleGrams {
    pub(crate) fn build(sample: &SampleSet) -> Result<Self> {
        let input = (0..sample.dim())
            .map(|k| sample.input_gram(k))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            input,
            output: sample.output_gram()?,
        })
    }
}

/// All corrected normalized indices for one weight vector, sharing the
/// output self-term across inputs.
pub(crate) fn wr2_all(grams: &SampleGrams, w: &[f64]) -> Result<Vec<f64>> {
    let hyy = weighted::whsic_sum_grams(&grams.output, &grams.output, w);
    if hyy <= 0.0 {
        return Err(Error::degenerate("weighted output self-HSIC vanished"));
    }
    grams
        .input
        .iter()
        .map(|lk| {
            let num = weighted::whsic_sum_grams(lk, &grams.output, w).max(0.0);
            let hkk = weighted::whsic_sum_grams(lk, lk, w);
            if hkk <= 0.0 {
                return Err(Error::degenerate("weighted input self-HSIC vanished"));
            }
            Ok((num / (hkk * hyy).sqrt()).clamp(0.0, 1.0))
        })
        .collect()
}

fn gsa1_from_grams(
    sample: &SampleSet,
    grams: &SampleGrams,
    weights: &WeightSet,
    qoi: QoiKind,
    rng: &mut impl Rng,
) -> Result<Gsa1Result> {
    match qoi {
        QoiKind::R2Vector => Ok(Gsa1Result::R2(wr2_all(grams, weights.weights())?)),
        QoiKind::Ranking => {
            let r2 = wr2_all(grams, weights.weights())?;
            Ok(Gsa1Result::Ranking(ranking_by_importance(&r2)))
        }
        QoiKind::AsympPvalVector => {
            let ps = (0..sample.dim())
                .map(|k| weighted::wgamma_pvalue(sample, weights, k))
                .collect::<Result<Vec<_>>>()?;
            Ok(Gsa1Result::Pvalues(ps))
        }
        QoiKind::PermPvalVector(b) => {
            let ps = (0..sample.dim())
                .map(|k| weighted::wperm_pvalue(sample, weights, k, b, rng))
                .collect::<Result<Vec<_>>>()?;
            Ok(Gsa1Result::Pvalues(ps))
        }
    }
}

/// One complete first-level study of a sample under a target law expressed
/// through importance weights. With unit weights this is the classical
/// study of the sample's own generating law.
pub fn gsa1_qoi(
    sample: &SampleSet,
    weights: &WeightSet,
    qoi: QoiKind,
    rng: &mut impl Rng,
) -> Result<Gsa1Result> {
    let grams = SampleGrams::build(sample)?;
    gsa1_from_grams(sample, &grams, weights, qoi, rng)
}

/// How law tuples are drawn from the priors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawDraws {
    /// Draw the given number of tuples at random from the priors.
    Random(usize),
    /// Enumerate every candidate combination once. Requires finite,
    /// equiprobable priors so that enumeration matches the draw frequencies
    /// the second-level statistic expects.
    Exhaustive,
}

/// Configuration of the single-loop second-level procedure.
#[derive(Debug, Clone)]
pub struct SingleLoopConfig {
    /// Reference-law construction.
    pub reference: ReferenceLawSpec,
    /// QoI computed by each first-level study.
    pub qoi: QoiKind,
    /// Law-tuple design.
    pub law_draws: LawDraws,
    /// Size of the single sample drawn under the reference law.
    pub n2: usize,
    /// Dispersion convention for the law-kernel bandwidth.
    pub dispersion: DispersionConvention,
}

impl SingleLoopConfig {
    /// Default-convention configuration.
    pub fn new(reference: ReferenceLawSpec, qoi: QoiKind, law_draws: LawDraws, n2: usize) -> Self {
        Self {
            reference,
            qoi,
            law_draws,
            n2,
            dispersion: DispersionConvention::default(),
        }
    }
}

/// Configuration of the double-loop second-level procedure.
#[derive(Debug, Clone)]
pub struct DoubleLoopConfig {
    /// QoI computed by each first-level study.
    pub qoi: QoiKind,
    /// Law-tuple design.
    pub law_draws: LawDraws,
    /// Fresh-sample size per drawn law tuple.
    pub n2: usize,
    /// Dispersion convention for the law-kernel bandwidth.
    pub dispersion: DispersionConvention,
}

impl DoubleLoopConfig {
    /// Default-convention configuration.
    pub fn new(qoi: QoiKind, law_draws: LawDraws, n2: usize) -> Self {
        Self {
            qoi,
            law_draws,
            n2,
            dispersion: DispersionConvention::default(),
        }
    }
}

/// Everything retained from a second-level run besides the indices.
#[derive(Debug, Clone)]
pub struct Gsa2Audit {
    /// The examined law tuples, in design order.
    pub laws: Vec<ProductDist>,
    /// First-level outcome per law tuple.
    pub qois: Vec<Gsa1Result>,
    /// Reference law of a single-loop run; `None` for a double loop.
    pub reference: Option<ProductDist>,
    /// Total model evaluations spent.
    pub model_evals: usize,
    /// Per-coordinate base-kernel bandwidths used inside the MMD.
    pub base_lambdas: Vec<f64>,
    /// Dispersion convention used for the law-kernel bandwidth.
    pub dispersion: DispersionConvention,
}

/// Second-level sensitivity indices with their audit trail.
#[derive(Debug, Clone)]
pub struct Gsa2Result {
    /// Second-level HSIC per input coordinate (clamped at zero).
    pub hsic2: Vec<f64>,
    /// Normalized second-level index per input coordinate, in `[0, 1]`.
    pub r2_2: Vec<f64>,
    /// QoI kind the study was run with.
    pub qoi_kind: QoiKind,
    /// Full audit trail.
    pub audit: Gsa2Audit,
}

impl Gsa2Result {
    /// Input coordinates ranked by descending normalized second-level index.
    pub fn ranking(&self) -> Permutation {
        ranking_by_importance(&self.r2_2)
    }
}

/// Draw or enumerate the law tuples, returning each tuple's candidate-index
/// key when every coordinate has a finite prior (used for result caching).
fn design_laws(
    priors: &[DistPrior],
    draws: LawDraws,
    rng: &mut impl Rng,
) -> Result<(Vec<ProductDist>, Vec<Option<Vec<usize>>>)> {
    match draws {
        LawDraws::Exhaustive => {
            for (k, prior) in priors.iter().enumerate() {
                let cands = prior.finite_candidates().ok_or_else(|| {
                    Error::UnsupportedEnumeration(format!(
                        "coordinate {}: exhaustive design needs a finite candidate set",
                        k + 1
                    ))
                })?;
                let uniform = 1.0 / cands.len() as f64;
                if cands.iter().any(|(_, p)| (p - uniform).abs() > PROB_TOL) {
                    return Err(Error::UnsupportedEnumeration(format!(
                        "coordinate {}: exhaustive design requires equiprobable \
                         candidates (each tuple enters the second-level statistic \
                         once, so unequal prior weights would be ignored)",
                        k + 1
                    )));
                }
            }
            let combos = enumerate_prior(priors)?;
            let mut laws = Vec::with_capacity(combos.len());
            let mut keys = Vec::with_capacity(combos.len());
            // enumerate_prior walks candidates in row-major order, so the
            // tuple key can be reconstructed from the enumeration index.
            let sizes: Vec<usize> = priors
                .iter()
                .map(|p| p.finite_candidates().map(|c| c.len()).unwrap_or(0))
                .collect();
            for (idx, (law, _)) in combos.into_iter().enumerate() {
                let mut key = vec![0usize; priors.len()];
                let mut rem = idx;
                for k in (0..priors.len()).rev() {
                    key[k] = rem % sizes[k];
                    rem /= sizes[k];
                }
                laws.push(law);
                keys.push(Some(key));
            }
            Ok((laws, keys))
        }
        LawDraws::Random(n1) => {
            if n1 < 2 {
                return Err(Error::param(format!(
                    "second level needs at least 2 law draws, got {n1}"
                )));
            }
            let mut laws = Vec::with_capacity(n1);
            let mut keys = Vec::with_capacity(n1);
            for _ in 0..n1 {
                let mut marginals = Vec::with_capacity(priors.len());
                let mut key = Some(Vec::with_capacity(priors.len()));
                for prior in priors {
                    let (law, idx) = prior.draw_law_indexed(rng);
                    marginals.push(law);
                    key = match (key, idx) {
                        (Some(mut v), Some(i)) => {
                            v.push(i);
                            Some(v)
                        }
                        _ => None,
                    };
                }
                laws.push(ProductDist::new(marginals)?);
                keys.push(key);
            }
            Ok((laws, keys))
        }
    }
}

/// Single-loop second-level study: one sample of size `n2` under the
/// reference law (exactly `n2` model evaluations), every first-level study
/// replayed by importance reweighting.
pub fn single_loop<M: Model + ?Sized>(
    priors: &[DistPrior],
    model: &M,
    cfg: &SingleLoopConfig,
    rng: &mut impl Rng,
) -> Result<Gsa2Result> {
    if priors.is_empty() {
        return Err(Error::param("at least one input prior is required"));
    }
    // Validate the design and draw the law tuples before spending any model
    // evaluations, so a bad prior cannot waste the budget.
    let (laws, keys) = design_laws(priors, cfg.law_draws, rng)?;
    let reference = reference_product(priors, &cfg.reference)?;
    let inputs = reference.sample(cfg.n2, rng);
    let outputs = evaluate_model(model, inputs.view())?;
    let sample = SampleSet::new(inputs, outputs, reference.clone())?;
    let grams = SampleGrams::build(&sample)?;
    let mut qois: Vec<Gsa1Result> = Vec::with_capacity(laws.len());
    let mut cache: HashMap<Vec<usize>, usize> = HashMap::new();
    for (law, key) in laws.iter().zip(&keys) {
        if let Some(key) = key {
            if let Some(&hit) = cache.get(key) {
                qois.push(qois[hit].clone());
                continue;
            }
        }
        let weights = make_weights(law.clone(), reference.clone(), sample.inputs())?;
        let qoi = gsa1_from_grams(&sample, &grams, &weights, cfg.qoi, rng)?;
        if let Some(key) = key {
            cache.insert(key.clone(), qois.len());
        }
        qois.push(qoi);
    }

    let base_lambdas = (0..sample.dim())
        .map(|k| standardized_bandwidth(&sample.column(k)))
        .collect::<Result<Vec<_>>>()?;
    let (hsic2, r2_2) = hsic2_estimate(&laws, &qois, &base_lambdas, cfg.dispersion)?;
    Ok(Gsa2Result {
        hsic2,
        r2_2,
        qoi_kind: cfg.qoi,
        audit: Gsa2Audit {
            laws,
            qois,
            reference: Some(reference),
            model_evals: cfg.n2,
            base_lambdas,
            dispersion: cfg.dispersion,
        },
    })
}

/// Double-loop second-level study: a fresh sample and a classical
/// first-level study per law tuple (`n1 * n2` model evaluations).
pub fn double_loop<M: Model + ?Sized>(
    priors: &[DistPrior],
    model: &M,
    cfg: &DoubleLoopConfig,
    rng: &mut impl Rng,
) -> Result<Gsa2Result> {
    if priors.is_empty() {
        return Err(Error::param("at least one input prior is required"));
    }
    let (laws, _) = design_laws(priors, cfg.law_draws, rng)?;
    let d = priors.len();
    let mut qois = Vec::with_capacity(laws.len());
    let mut pooled: Vec<Vec<f64>> = vec![Vec::with_capacity(laws.len() * cfg.n2); d];
    for law in &laws {
        let inputs = law.sample(cfg.n2, rng);
        let outputs = evaluate_model(model, inputs.view())?;
        let sample = SampleSet::new(inputs, outputs, law.clone())?;
        for k in 0..d {
            pooled[k].extend_from_slice(&sample.column(k));
        }
        let grams = SampleGrams::build(&sample)?;
        let unit = WeightSet::unit(&sample)?;
        qois.push(gsa1_from_grams(&sample, &grams, &unit, cfg.qoi, rng)?);
    }
    let base_lambdas = pooled
        .iter()
        .map(|col| standardized_bandwidth(col))
        .collect::<Result<Vec<_>>>()?;
    let (hsic2, r2_2) = hsic2_estimate(&laws, &qois, &base_lambdas, cfg.dispersion)?;
    let model_evals = laws.len() * cfg.n2;
    Ok(Gsa2Result {
        hsic2,
        r2_2,
        qoi_kind: cfg.qoi,
        audit: Gsa2Audit {
            laws,
            qois,
            reference: None,
            model_evals,
            base_lambdas,
            dispersion: cfg.dispersion,
        },
    })
}

/// QoI payloads extracted once for second-level kernel evaluation.
enum QoiData {
    Rows(Array2<f64>),
    Perms(Vec<Permutation>),
}

/// Precomputed second-level state: per-coordinate squared-MMD tables over
/// the law design plus the extracted QoI payloads. Squared MMDs between
/// fixed laws do not depend on which design rows a (re)sample selects, so
/// bootstrap replicates can gather from these tables instead of recomputing
/// the distribution embeddings.
struct SecondLevelCore {
    m2: Vec<Array2<f64>>,
    qoi: QoiData,
    dispersion: DispersionConvention,
}

impl SecondLevelCore {
    fn build(
        laws: &[ProductDist],
        qois: &[Gsa1Result],
        base_lambdas: &[f64],
        dispersion: DispersionConvention,
    ) -> Result<Self> {
        let n1 = laws.len();
        if n1 < 2 {
            return Err(Error::SampleSize(format!(
                "second level needs at least 2 law tuples, got {n1}"
            )));
        }
        if qois.len() != n1 {
            return Err(Error::param("law and QoI counts differ"));
        }
        let d = laws[0].dim();
        if base_lambdas.len() != d {
            return Err(Error::param(
                "one base bandwidth per coordinate is required",
            ));
        }
        let qoi = match &qois[0] {
            Gsa1Result::R2(_) | Gsa1Result::Pvalues(_) => {
                let width = qois[0].as_vector().expect("vector variant").len();
                let mut rows = Array2::zeros((n1, width));
                for (i, q) in qois.iter().enumerate() {
                    let v = q
                        .as_vector()
                        .ok_or_else(|| Error::param("mixed QoI kinds in one second-level study"))?;
                    if v.len() != width {
                        return Err(Error::param("inconsistent QoI vector lengths"));
                    }
                    for (j, &x) in v.iter().enumerate() {
                        rows[[i, j]] = x;
                    }
                }
                QoiData::Rows(rows)
            }
            Gsa1Result::Ranking(_) => {
                let perms = qois
                    .iter()
                    .map(|q| {
                        q.as_ranking().cloned().ok_or_else(|| {
                            Error::param("mixed QoI kinds in one second-level study")
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                QoiData::Perms(perms)
            }
        };
        let mut m2_tables = Vec::with_capacity(d);
        for k in 0..d {
            // Unique marginals first: candidate sets are small, so the MMD
            // table is computed once per distinct law and gathered.
            let mut uniq: Vec<UnivariateDist> = Vec::new();
            let mut map = Vec::with_capacity(n1);
            for law in laws {
                let m = law.marginal(k);
                let pos = uniq.iter().position(|u| u == m).unwrap_or_else(|| {
                    uniq.push(m.clone());
                    uniq.len() - 1
                });
                map.push(pos);
            }
            if uniq.len() < 2 {
                return Err(Error::degenerate(format!(
                    "all law tuples share the same marginal for coordinate {}; \
                     its second-level index is undefined",
                    k + 1
                )));
            }
            let base = GaussianKernel::new(base_lambdas[k])?;
            let m2u = kernels::mmd2_matrix(&uniq, &base)?;
            let mut m2 = Array2::zeros((n1, n1));
            for i in 0..n1 {
                for j in 0..n1 {
                    m2[[i, j]] = m2u[[map[i], map[j]]];
                }
            }
            m2_tables.push(m2);
        }
        Ok(Self {
            m2: m2_tables,
            qoi,
            dispersion,
        })
    }

    /// Second-level indices of the design rows selected by `select`
    /// (`None` = the full design, in order). Kernel bandwidths are
    /// recomputed from the selected rows, mirroring a fresh estimation.
    fn indices(&self, select: Option<&[usize]>) -> Result<(Vec<f64>, Vec<f64>)> {
        let full: Vec<usize>;
        let sel: &[usize] = match select {
            Some(s) => s,
            None => {
                full = (0..self.m2[0].nrows()).collect();
                &full
            }
        };
        let b = sel.len();
        let lr = match &self.qoi {
            QoiData::Rows(rows) => {
                let width = rows.ncols();
                let mut sub = Array2::zeros((b, width));
                for (i, &si) in sel.iter().enumerate() {
                    for j in 0..width {
                        sub[[i, j]] = rows[[si, j]];
                    }
                }
                // One shared bandwidth: the mean per-coordinate variance of
                // the QoI vectors across the selected law sample.
                let mean_var = (0..width)
                    .map(|j| kernels::population_variance(&sub.column(j).to_vec()))
                    .sum::<f64>()
                    / width as f64;
                if !(mean_var > 0.0) {
                    return Err(Error::degenerate(
                        "QoI is constant across the law sample; second level undefined",
                    ));
                }
                let kernel = GaussianKernel::new(1.0 / mean_var)?;
                kernels::gram_vectors(&kernel, sub.view())
            }
            QoiData::Perms(perms) => {
                let chosen: Vec<Permutation> = sel.iter().map(|&si| perms[si].clone()).collect();
                let lambda = kernels::mallows_bandwidth(&chosen)?;
                kernels::mallows_gram(lambda, &chosen)?
            }
        };
        let lrc = hsic::centered_gram(&lr);
        let hrr = hsic::vstat_contract(&lr, &lrc);
        if hrr <= 0.0 {
            return Err(Error::degenerate(
                "QoI kernel has no dispersion; second level undefined",
            ));
        }
        let mut hsic2 = Vec::with_capacity(self.m2.len());
        let mut r2_2 = Vec::with_capacity(self.m2.len());
        for (k, table) in self.m2.iter().enumerate() {
            let mut m2 = Array2::zeros((b, b));
            for i in 0..b {
                for j in 0..b {
                    m2[[i, j]] = table[[sel[i], sel[j]]];
                }
            }
            let s2 = kernels::dispersion_from_m2(&m2, self.dispersion);
            if !(s2 > 0.0) {
                return Err(Error::degenerate(format!(
                    "law sample for coordinate {} has zero MMD dispersion",
                    k + 1
                )));
            }
            let ld = m2.mapv(|v| (-v / s2).exp());
            let h = hsic::vstat_contract(&ld, &lrc);
            let hdd = hsic::vstat_contract(&ld, &hsic::centered_gram(&ld));
            if hdd <= 0.0 {
                return Err(Error::degenerate(format!(
                    "law kernel for coordinate {} has no dispersion",
                    k + 1
                )));
            }
            hsic2.push(h.max(0.0));
            r2_2.push((h.max(0.0) / (hdd * hrr).sqrt()).clamp(0.0, 1.0));
        }
        Ok((hsic2, r2_2))
    }
}

/// Second-level HSIC and normalized indices from a design of law tuples and
/// their first-level QoIs.
///
/// Per input coordinate, laws are compared through
/// `exp(-MMD^2 / s^2)` where `s^2` summarizes the design's MMD dispersion
/// under `dispersion`; QoIs are compared through a Gaussian vector kernel
/// (or Mallows, for rankings). Both Grams then enter the classical HSIC
/// V-statistic.
pub fn hsic2_estimate(
    laws: &[ProductDist],
    qois: &[Gsa1Result],
    base_lambdas: &[f64],
    dispersion: DispersionConvention,
) -> Result<(Vec<f64>, Vec<f64>)> {
    SecondLevelCore::build(laws, qois, base_lambdas, dispersion)?.indices(None)
}

/// Bootstrap robustness report for a second-level study.
#[derive(Debug, Clone)]
pub struct BootstrapReport {
    /// Number of bootstrap replicates.
    pub replicates: usize,
    /// Mean of the normalized second-level index over replicates.
    pub r2_2_mean: Vec<f64>,
    /// Standard deviation of the normalized index over replicates.
    pub r2_2_sd: Vec<f64>,
    /// Fraction of replicates whose full importance ranking matches the
    /// full-sample ranking.
    pub ranking_match_rate: f64,
    /// The full-sample ranking the replicates are compared against.
    pub base_ranking: Permutation,
}

/// Resample the (law tuple, QoI) pairs of a completed study with
/// replacement and re-estimate the second-level indices, measuring their
/// spread and the stability of the induced importance ranking.
pub fn bootstrap_robustness(
    result: &Gsa2Result,
    replicates: usize,
    rng: &mut impl Rng,
) -> Result<BootstrapReport> {
    if replicates < 2 {
        return Err(Error::param("bootstrap needs at least 2 replicates"));
    }
    let n1 = result.audit.laws.len();
    let d = result.r2_2.len();
    let base_ranking = result.ranking();
    let core = SecondLevelCore::build(
        &result.audit.laws,
        &result.audit.qois,
        &result.audit.base_lambdas,
        result.audit.dispersion,
    )?;
    let mut sum = vec![0.0; d];
    let mut sumsq = vec![0.0; d];
    let mut matches = 0usize;
    let mut sel = vec![0usize; n1];
    for _ in 0..replicates {
        for s in sel.iter_mut() {
            *s = rng.gen_range(0..n1);
        }
        let (_, r2) = core.indices(Some(&sel))?;
        for (k, &v) in r2.iter().enumerate() {
            sum[k] += v;
            sumsq[k] += v * v;
        }
        if ranking_by_importance(&r2) == base_ranking {
            matches += 1;
        }
    }
    let b = replicates as f64;
    let r2_2_mean: Vec<f64> = sum.iter().map(|s| s / b).collect();
    let r2_2_sd: Vec<f64> = sumsq
        .iter()
        .zip(&r2_2_mean)
        .map(|(sq, m)| (sq / b - m * m).max(0.0).sqrt())
        .collect();
    Ok(BootstrapReport {
        replicates,
        r2_2_mean,
        r2_2_sd,
        ranking_match_rate: matches as f64 / b,
        base_ranking,
    })
}
