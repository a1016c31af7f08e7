//! Calibration benchmark harness.
//!
//! The library ships one oscillatory three-input benchmark model (a
//! variable-coefficient Ishigami variant restricted to the unit cube) and a
//! fixed set of candidate input laws, and uses them in four reproducible
//! studies:
//!
//! - **gsa1-convergence** — first-level indices estimated directly under a
//!   triangular target versus reweighted from a uniform design, across
//!   sample sizes;
//! - **gsa2-convergence** — second-level ranking stability of the
//!   single-loop procedure under the three reference-law constructions,
//!   across reference sample sizes;
//! - **budget-comparison** — single-loop versus double-loop second level at
//!   a matched model-evaluation budget;
//! - **bootstrap-stability** — bootstrap spread of the second-level indices
//!   and of their induced ranking.
//!
//! Every replicate runs on its own deterministic random stream derived from
//! `(seed, scenario, option, size, replicate)`, so reports are reproducible
//! and replicates can run in parallel.

use crate::dist::{DistPrior, ProductDist, UnivariateDist};
use crate::error::{Error, Result};
use crate::gsa2::{
    self, bootstrap_robustness, double_loop, single_loop, DoubleLoopConfig, LawDraws, Model,
    QoiKind, SampleGrams, SingleLoopConfig,
};
use crate::hsic::SampleSet;
use crate::reflaw::{ReferenceLawSpec, ReferenceMethod};
use crate::rng::stream;
use crate::weighted::{self, make_weights, GammaTestOptions, WeightSet};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::str::FromStr;

/// Rejection level used when reporting test rejection rates.
const TEST_LEVEL: f64 = 0.05;

/// The benchmark model: `sin(x1) + c*sin(x2)^2 + 0.5*x3^4*sin(x1)` on the
/// unit cube. The coefficient `c` tunes the relative importance of the
/// second input.
#[derive(Debug, Clone, Copy)]
pub struct IshigamiVariant {
    /// Weight of the `sin^2` term.
    pub coef: f64,
}

impl Model for IshigamiVariant {
    fn eval(&self, x: &[f64]) -> f64 {
        let s1 = x[0].sin();
        s1 + self.coef * x[1].sin().powi(2) + 0.5 * x[2].powi(4) * s1
    }
}

/// First-level benchmark target law: independent triangular(0, 1, 1/2)
/// marginals on the unit cube.
pub fn triangular_target() -> ProductDist {
    ProductDist::new(
        (0..3)
            .map(|_| UnivariateDist::triangular(0.0, 1.0, 0.5).expect("valid triangular"))
            .collect(),
    )
    .expect("valid product law")
}

/// Alternative first-level sampling law: uniform on the unit cube.
pub fn uniform_sampling() -> ProductDist {
    ProductDist::new(
        (0..3)
            .map(|_| UnivariateDist::uniform(0.0, 1.0).expect("valid uniform"))
            .collect(),
    )
    .expect("valid product law")
}

/// Second-level candidate prior per coordinate: a uniform, a skewed
/// triangular, and a truncated normal, all on `[0, 1]`, equiprobable.
pub fn candidate_prior() -> DistPrior {
    DistPrior::finite_set(vec![
        (
            UnivariateDist::uniform(0.0, 1.0).expect("valid uniform"),
            1.0 / 3.0,
        ),
        (
            UnivariateDist::triangular(0.0, 1.0, 0.4).expect("valid triangular"),
            1.0 / 3.0,
        ),
        (
            UnivariateDist::trunc_normal(0.0, 1.0, 0.6, 0.2).expect("valid truncated normal"),
            1.0 / 3.0,
        ),
    ])
    .expect("valid candidate set")
}

/// One candidate prior per benchmark input.
pub fn candidate_priors() -> Vec<DistPrior> {
    (0..3).map(|_| candidate_prior()).collect()
}

/// The converged importance ranking of the benchmark at large sample sizes
/// (first input, then second, then third), against which ranking-stability
/// percentages are scored.
pub const CONVERGED_RANKING: [usize; 3] = [0, 1, 2];

/// Benchmark scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// First-level direct vs reweighted estimation across sample sizes.
    Gsa1Convergence,
    /// Single-loop second level across reference constructions and sizes.
    Gsa2Convergence,
    /// Single-loop vs double-loop second level at a matched budget.
    BudgetComparison,
    /// Bootstrap spread of second-level indices and rankings.
    BootstrapStability,
}

impl Scenario {
    /// All scenarios, in report order.
    pub fn all() -> [Scenario; 4] {
        [
            Scenario::Gsa1Convergence,
            Scenario::Gsa2Convergence,
            Scenario::BudgetComparison,
            Scenario::BootstrapStability,
        ]
    }

    /// Stable scenario name used in reports and on the command line.
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::Gsa1Convergence => "gsa1-convergence",
            Scenario::Gsa2Convergence => "gsa2-convergence",
            Scenario::BudgetComparison => "budget-comparison",
            Scenario::BootstrapStability => "bootstrap-stability",
        }
    }

    fn id(&self) -> u64 {
        match self {
            Scenario::Gsa1Convergence => 1,
            Scenario::Gsa2Convergence => 2,
            Scenario::BudgetComparison => 3,
            Scenario::BootstrapStability => 4,
        }
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gsa1-convergence" => Ok(Scenario::Gsa1Convergence),
            "gsa2-convergence" => Ok(Scenario::Gsa2Convergence),
            "budget-comparison" => Ok(Scenario::BudgetComparison),
            "bootstrap-stability" => Ok(Scenario::BootstrapStability),
            other => Err(Error::param(format!(
                "unknown scenario '{other}'; expected one of gsa1-convergence, \
                 gsa2-convergence, budget-comparison, bootstrap-stability"
            ))),
        }
    }
}

/// Harness options shared by all scenarios.
#[derive(Debug, Clone, Copy)]
pub struct BenchOptions {
    /// Replicates per (option, size) cell.
    pub reps: usize,
    /// Master seed; every replicate derives its own stream from it.
    pub seed: u64,
    /// Run the larger full-scale grids instead of the desk-scale defaults.
    pub full: bool,
}

impl Default for BenchOptions {
    fn default() -> Self {
        Self {
            reps: 50,
            seed: 20260819,
            full: false,
        }
    }
}

/// One aggregated benchmark statistic.
#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    /// Scenario name.
    pub scenario: String,
    /// Option within the scenario (estimator or reference construction).
    pub option: String,
    /// Size axis of the cell (sample size or evaluation budget).
    pub n: usize,
    /// Statistic name.
    pub statistic: String,
    /// Aggregated value over replicates.
    pub value: f64,
}

/// Aggregated benchmark report.
#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    /// All rows, in scenario/option/size order.
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Append another report's rows.
    pub fn extend(&mut self, other: BenchReport) {
        self.rows.extend(other.rows);
    }

    /// Serialize as CSV with a header row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.rows {
            w.serialize(row)
                .map_err(|e| Error::Config(format!("failed to serialize benchmark row: {e}")))?;
        }
        w.flush()?;
        Ok(())
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sd(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Emit mean and standard deviation rows of a per-input statistic.
fn push_input_stats(
    rows: &mut Vec<BenchRow>,
    scenario: &str,
    option: &str,
    n: usize,
    stem: &str,
    per_rep: &[Vec<f64>],
) {
    let d = per_rep[0].len();
    for k in 0..d {
        let vals: Vec<f64> = per_rep.iter().map(|r| r[k]).collect();
        rows.push(BenchRow {
            scenario: scenario.into(),
            option: option.into(),
            n,
            statistic: format!("{stem}_mean_x{}", k + 1),
            value: mean(&vals),
        });
        rows.push(BenchRow {
            scenario: scenario.into(),
            option: option.into(),
            n,
            statistic: format!("{stem}_sd_x{}", k + 1),
            value: sd(&vals),
        });
    }
}

fn push_scalar(
    rows: &mut Vec<BenchRow>,
    scenario: &str,
    option: &str,
    n: usize,
    statistic: &str,
    value: f64,
) {
    rows.push(BenchRow {
        scenario: scenario.into(),
        option: option.into(),
        n,
        statistic: statistic.into(),
        value,
    });
}

/// Run one scenario.
pub fn run_scenario(scenario: Scenario, opts: &BenchOptions) -> Result<BenchReport> {
    match scenario {
        Scenario::Gsa1Convergence => run_gsa1_convergence(opts),
        Scenario::Gsa2Convergence => run_gsa2_convergence(opts),
        Scenario::BudgetComparison => run_budget_comparison(opts),
        Scenario::BootstrapStability => run_bootstrap_stability(opts),
    }
}

/// Run every scenario and concatenate the reports.
pub fn run_all(opts: &BenchOptions) -> Result<BenchReport> {
    let mut report = BenchReport::default();
    for scenario in Scenario::all() {
        report.extend(run_scenario(scenario, opts)?);
    }
    Ok(report)
}

/// Per-replicate outcome of one first-level benchmark cell.
struct Gsa1Rep {
    r2: Vec<f64>,
    reject: Vec<bool>,
}

fn gsa1_replicate(
    target: &ProductDist,
    sampling: &ProductDist,
    model: &IshigamiVariant,
    n: usize,
    seed: u64,
    path: &[u64],
) -> Result<Gsa1Rep> {
    let mut rng = stream(seed, path);
    let inputs = sampling.sample(n, &mut rng);
    let outputs = gsa2::evaluate_model(model, inputs.view())?;
    let sample = SampleSet::new(inputs, outputs, sampling.clone())?;
    let weights = if target == sampling {
        WeightSet::unit(&sample)?
    } else {
        make_weights(target.clone(), sampling.clone(), sample.inputs())?
    };
    let grams = SampleGrams::build(&sample)?;
    let r2 = gsa2::wr2_all(&grams, weights.weights())?;
    let mut reject = Vec::with_capacity(sample.dim());
    for k in 0..sample.dim() {
        let p = weighted::wgamma_pvalue_grams(
            &grams.input[k],
            &grams.output,
            &weights.factor_column(k),
            &weights.complement_column(k),
            GammaTestOptions::default(),
        )?;
        reject.push(p <= TEST_LEVEL);
    }
    Ok(Gsa1Rep { r2, reject })
}

/// First-level convergence study: the same indices estimated directly under
/// the triangular target and reweighted from a uniform design.
pub fn run_gsa1_convergence(opts: &BenchOptions) -> Result<BenchReport> {
    let scenario = Scenario::Gsa1Convergence;
    let mut sizes = vec![100usize, 200, 500, 1000];
    if opts.full {
        sizes.push(1500);
    }
    let model = IshigamiVariant { coef: 1.8 };
    let target = triangular_target();
    let uniform = uniform_sampling();
    let mut rows = Vec::new();
    for (opt_id, option) in [(0u64, "direct"), (1u64, "reweighted")] {
        let sampling = if option == "direct" {
            target.clone()
        } else {
            uniform.clone()
        };
        for &n in &sizes {
            let reps: Vec<Gsa1Rep> = (0..opts.reps)
                .into_par_iter()
                .map(|rep| {
                    gsa1_replicate(
                        &target,
                        &sampling,
                        &model,
                        n,
                        opts.seed,
                        &[scenario.id(), opt_id, n as u64, rep as u64],
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let r2: Vec<Vec<f64>> = reps.iter().map(|r| r.r2.clone()).collect();
            push_input_stats(&mut rows, scenario.name(), option, n, "r2", &r2);
            for k in 0..3 {
                let rate = reps.iter().filter(|r| r.reject[k]).count() as f64 / reps.len() as f64;
                push_scalar(
                    &mut rows,
                    scenario.name(),
                    option,
                    n,
                    &format!("reject_rate_x{}", k + 1),
                    rate,
                );
            }
        }
    }
    Ok(BenchReport { rows })
}

/// The three reference constructions exercised by the second-level studies.
fn reference_options() -> [(u64, &'static str, ReferenceMethod); 3] {
    [
        (0, "mixture", ReferenceMethod::Mixture),
        (1, "kl-barycenter", ReferenceMethod::KlBarycenter),
        (
            2,
            "wasserstein-barycenter",
            ReferenceMethod::WassersteinBarycenter,
        ),
    ]
}

/// Second-level convergence study: single-loop ranking stability per
/// reference construction across reference sample sizes.
pub fn run_gsa2_convergence(opts: &BenchOptions) -> Result<BenchReport> {
    let scenario = Scenario::Gsa2Convergence;
    let mut sizes = vec![100usize, 200, 500];
    if opts.full {
        sizes.push(1000);
    }
    let model = IshigamiVariant { coef: 1.5 };
    let priors = candidate_priors();
    let mut rows = Vec::new();
    for (opt_id, option, method) in reference_options() {
        for &n2 in &sizes {
            let results: Vec<(Vec<f64>, Vec<f64>, bool)> = (0..opts.reps)
                .into_par_iter()
                .map(|rep| {
                    let mut rng =
                        stream(opts.seed, &[scenario.id(), opt_id, n2 as u64, rep as u64]);
                    let cfg = SingleLoopConfig::new(
                        ReferenceLawSpec::with_method(method),
                        QoiKind::R2Vector,
                        LawDraws::Exhaustive,
                        n2,
                    );
                    let out = single_loop(&priors, &model, &cfg, &mut rng)?;
                    let matched = out.ranking().indices() == CONVERGED_RANKING;
                    Ok((out.hsic2, out.r2_2, matched))
                })
                .collect::<Result<Vec<_>>>()?;
            let hsic2: Vec<Vec<f64>> = results.iter().map(|r| r.0.clone()).collect();
            let r2_2: Vec<Vec<f64>> = results.iter().map(|r| r.1.clone()).collect();
            push_input_stats(&mut rows, scenario.name(), option, n2, "hsic2", &hsic2);
            push_input_stats(&mut rows, scenario.name(), option, n2, "r2_2", &r2_2);
            let pct = 100.0 * results.iter().filter(|r| r.2).count() as f64 / results.len() as f64;
            push_scalar(
                &mut rows,
                scenario.name(),
                option,
                n2,
                "ranking_match_pct",
                pct,
            );
        }
    }
    Ok(BenchReport { rows })
}

/// Budget study: single-loop (mixture and KL references) versus double loop
/// at a matched budget of 1026 model evaluations.
pub fn run_budget_comparison(opts: &BenchOptions) -> Result<BenchReport> {
    let scenario = Scenario::BudgetComparison;
    let model = IshigamiVariant { coef: 1.5 };
    let priors = candidate_priors();
    // 27 candidate tuples: single loop spends its whole budget on one
    // sample; the double loop splits it into 27 fresh samples of 38.
    let budget = 1026usize;
    let inner = budget / 27;
    let mut rows = Vec::new();
    enum Opt {
        Single(ReferenceMethod),
        Double,
    }
    let options = [
        (
            0u64,
            "single-mixture",
            Opt::Single(ReferenceMethod::Mixture),
        ),
        (1, "single-kl", Opt::Single(ReferenceMethod::KlBarycenter)),
        (2, "double", Opt::Double),
    ];
    for (opt_id, option, kind) in options {
        let results: Vec<(Vec<f64>, bool, usize)> = (0..opts.reps)
            .into_par_iter()
            .map(|rep| {
                let mut rng = stream(
                    opts.seed,
                    &[scenario.id(), opt_id, budget as u64, rep as u64],
                );
                let out = match &kind {
                    Opt::Single(method) => {
                        let cfg = SingleLoopConfig::new(
                            ReferenceLawSpec::with_method(*method),
                            QoiKind::R2Vector,
                            LawDraws::Exhaustive,
                            budget,
                        );
                        single_loop(&priors, &model, &cfg, &mut rng)?
                    }
                    Opt::Double => {
                        let cfg =
                            DoubleLoopConfig::new(QoiKind::R2Vector, LawDraws::Exhaustive, inner);
                        double_loop(&priors, &model, &cfg, &mut rng)?
                    }
                };
                let matched = out.ranking().indices() == CONVERGED_RANKING;
                Ok((out.r2_2, matched, out.audit.model_evals))
            })
            .collect::<Result<Vec<_>>>()?;
        let r2_2: Vec<Vec<f64>> = results.iter().map(|r| r.0.clone()).collect();
        push_input_stats(&mut rows, scenario.name(), option, budget, "r2_2", &r2_2);
        let pct = 100.0 * results.iter().filter(|r| r.1).count() as f64 / results.len() as f64;
        push_scalar(
            &mut rows,
            scenario.name(),
            option,
            budget,
            "ranking_match_pct",
            pct,
        );
        push_scalar(
            &mut rows,
            scenario.name(),
            option,
            budget,
            "model_evals",
            results[0].2 as f64,
        );
    }
    Ok(BenchReport { rows })
}

/// Bootstrap stability of the single-loop second level: index spread and
/// ranking persistence under resampling of the law design.
pub fn run_bootstrap_stability(opts: &BenchOptions) -> Result<BenchReport> {
    let scenario = Scenario::BootstrapStability;
    let model = IshigamiVariant { coef: 1.5 };
    let priors = candidate_priors();
    let n2 = if opts.full { 1000 } else { 500 };
    let boot_reps = if opts.full { 200 } else { 100 };
    // The outer replicates only smooth the report; the bootstrap replicates
    // inside each study carry the statistical resolution.
    let outer = (opts.reps / 5).max(10);
    let results: Vec<(Vec<f64>, Vec<f64>, f64)> = (0..outer)
        .into_par_iter()
        .map(|rep| {
            let mut rng = stream(opts.seed, &[scenario.id(), 0, n2 as u64, rep as u64]);
            let cfg = SingleLoopConfig::new(
                ReferenceLawSpec::default(),
                QoiKind::R2Vector,
                LawDraws::Exhaustive,
                n2,
            );
            let out = single_loop(&priors, &model, &cfg, &mut rng)?;
            let report = bootstrap_robustness(&out, boot_reps, &mut rng)?;
            Ok((out.r2_2, report.r2_2_sd, report.ranking_match_rate))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let r2_2: Vec<Vec<f64>> = results.iter().map(|r| r.0.clone()).collect();
    let boot_sd: Vec<Vec<f64>> = results.iter().map(|r| r.1.clone()).collect();
    push_input_stats(&mut rows, scenario.name(), "mixture", n2, "r2_2", &r2_2);
    push_input_stats(
        &mut rows,
        scenario.name(),
        "mixture",
        n2,
        "bootstrap_sd",
        &boot_sd,
    );
    let match_rates: Vec<f64> = results.iter().map(|r| r.2).collect();
    push_scalar(
        &mut rows,
        scenario.name(),
        "mixture",
        n2,
        "bootstrap_ranking_match_rate",
        mean(&match_rates),
    );
    Ok(BenchReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_matches_closed_form() {
        let m = IshigamiVariant { coef: 1.5 };
        let x = [0.3, 0.7, 0.9];
        let expect =
            (0.3f64).sin() + 1.5 * (0.7f64).sin().powi(2) + 0.5 * 0.9f64.powi(4) * (0.3f64).sin();
        assert!((m.eval(&x) - expect).abs() < 1e-15);
    }

    #[test]
    fn scenario_names_round_trip() {
        for s in Scenario::all() {
            assert_eq!(Scenario::from_str(s.name()).unwrap(), s);
        }
        assert!(Scenario::from_str("no-such-scenario").is_err());
    }

    #[test]
    fn candidate_prior_is_equiprobable() {
        let prior = candidate_prior();
        let cands = prior.finite_candidates().unwrap();
        assert_eq!(cands.len(), 3);
        for (_, p) in cands {
            assert!((p - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gsa1_cell_is_deterministic() {
        let target = triangular_target();
        let model = IshigamiVariant { coef: 1.8 };
        let a = gsa1_replicate(&target, &target, &model, 60, 7, &[1, 0, 60, 0]).unwrap();
        let b = gsa1_replicate(&target, &target, &model, 60, 7, &[1, 0, 60, 0]).unwrap();
        assert_eq!(a.r2, b.r2);
    }

    #[test]
    fn csv_serialization_has_header_and_rows() {
        let report = BenchReport {
            rows: vec![BenchRow {
                scenario: "gsa1-convergence".into(),
                option: "direct".into(),
                n: 100,
                statistic: "r2_mean_x1".into(),
                value: 0.5,
            }],
        };
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("scenario,option,n,statistic,value"));
        assert!(text.contains("gsa1-convergence,direct,100,r2_mean_x1,0.5"));
    }
}
