//! Declarative run configuration (TOML).
//!
//! A run file describes the model (a named builtin or a CSV sample), the
//! input laws, and the parameters of a first-level (`[gsa1]`) or
//! second-level (`[gsa2]`) study. Unknown keys are rejected so typos fail
//! loudly instead of silently running a different study.

use crate::bench::IshigamiVariant;
use crate::dist::{DistPrior, ParamFamily, ProductDist, UnivariateDist};
use crate::error::{Error, Result};
use crate::gsa2::QoiKind;
use crate::kernels::DispersionConvention;
use crate::reflaw::{ReferenceLawSpec, ReferenceMethod};
use serde::{Deserialize, Serialize};

/// One univariate law record: `{ family = "...", params = [...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawSpec {
    /// `params = [a, b]`.
    Uniform { params: [f64; 2] },
    /// `params = [a, b, mode]`.
    Triangular { params: [f64; 3] },
    /// `params = [a, b, mean, sd]` (normal truncated to `[a, b]`).
    TruncNormal { params: [f64; 4] },
}

impl LawSpec {
    /// Build the law this record describes.
    pub fn build(&self) -> Result<UnivariateDist> {
        match *self {
            LawSpec::Uniform { params: [a, b] } => UnivariateDist::uniform(a, b),
            LawSpec::Triangular { params: [a, b, c] } => UnivariateDist::triangular(a, b, c),
            LawSpec::TruncNormal {
                params: [a, b, mean, sd],
            } => UnivariateDist::trunc_normal(a, b, mean, sd),
        }
    }
}

/// A one-parameter family record for parametric priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ParamFamilySpec {
    /// Triangular on fixed `bounds` with an uncertain mode.
    TriangularMode {
        bounds: [f64; 2],
        param_prior: LawSpec,
    },
    /// Truncated normal on fixed `bounds` with fixed `sd`, uncertain mean.
    TruncNormalMean {
        bounds: [f64; 2],
        sd: f64,
        param_prior: LawSpec,
    },
    /// Truncated normal on fixed `bounds` with fixed `mean`, uncertain sd.
    TruncNormalSd {
        bounds: [f64; 2],
        mean: f64,
        param_prior: LawSpec,
    },
}

/// Prior over the law of one input coordinate: either a finite candidate
/// set (optionally weighted) or a parametric family.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    /// Finite candidate laws.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<LawSpec>>,
    /// Candidate probabilities; defaults to equiprobable.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    /// Parametric family (exclusive with `candidates`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<ParamFamilySpec>,
}

impl PriorSpec {
    /// Build the prior this record describes.
    pub fn build(&self) -> Result<DistPrior> {
        match (&self.candidates, &self.family) {
            (Some(cands), None) => {
                if cands.is_empty() {
                    return Err(Error::Config(
                        "prior candidate list must not be empty".into(),
                    ));
                }
                let probs = match &self.probs {
                    Some(p) => {
                        if p.len() != cands.len() {
                            return Err(Error::Config(format!(
                                "{} candidates but {} probabilities",
                                cands.len(),
                                p.len()
                            )));
                        }
                        p.clone()
                    }
                    None => vec![1.0 / cands.len() as f64; cands.len()],
                };
                let pairs = cands
                    .iter()
                    .zip(probs)
                    .map(|(spec, p)| Ok((spec.build()?, p)))
                    .collect::<Result<Vec<_>>>()?;
                DistPrior::finite_set(pairs)
            }
            (None, Some(family)) => {
                if self.probs.is_some() {
                    return Err(Error::Config(
                        "probs only apply to finite candidate priors".into(),
                    ));
                }
                let (fam, prior_spec) = match family {
                    ParamFamilySpec::TriangularMode {
                        bounds: [a, b],
                        param_prior,
                    } => (ParamFamily::TriangularMode { a: *a, b: *b }, param_prior),
                    ParamFamilySpec::TruncNormalMean {
                        bounds: [a, b],
                        sd,
                        param_prior,
                    } => (
                        ParamFamily::TruncNormalMean {
                            a: *a,
                            b: *b,
                            sd: *sd,
                        },
                        param_prior,
                    ),
                    ParamFamilySpec::TruncNormalSd {
                        bounds: [a, b],
                        mean,
                        param_prior,
                    } => (
                        ParamFamily::TruncNormalSd {
                            a: *a,
                            b: *b,
                            mean: *mean,
                        },
                        param_prior,
                    ),
                };
                DistPrior::param_family(fam, prior_spec.build()?)
            }
            (Some(_), Some(_)) => Err(Error::Config(
                "a prior takes either candidates or a family, not both".into(),
            )),
            (None, None) => Err(Error::Config("a prior needs candidates or a family".into())),
        }
    }
}

/// The model a study evaluates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    /// Builtin model name. Available: `ishigami`.
    pub builtin: String,
    /// Coefficient of the builtin model (default 1.5).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coef: Option<f64>,
}

impl ModelSpec {
    /// Resolve the builtin model.
    pub fn build(&self) -> Result<IshigamiVariant> {
        match self.builtin.as_str() {
            "ishigami" => Ok(IshigamiVariant {
                coef: self.coef.unwrap_or(1.5),
            }),
            other => Err(Error::Config(format!(
                "unknown builtin model '{other}'; available: ishigami"
            ))),
        }
    }
}

/// A precomputed sample on disk: CSV whose last column is the output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    /// CSV path, relative to the working directory.
    pub path: String,
}

/// First-level study parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gsa1Config {
    /// Target law per coordinate (the law the indices refer to).
    pub target: Vec<LawSpec>,
    /// Law the sample is drawn under; defaults to the target (classical
    /// estimation). When it differs, importance-weighted estimators and
    /// corrected tests are used.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampling: Option<Vec<LawSpec>>,
    /// Sample size when the sample is generated from a builtin model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Permutation-test replicates; 0 or absent skips the permutation test.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
}

/// Which loop design a second-level study uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LoopKind {
    /// One reference sample, reweighted first-level studies.
    Single,
    /// A fresh sample per drawn law tuple.
    Double,
}

/// Second-level study parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gsa2Config {
    /// Prior over laws, one per input coordinate.
    pub priors: Vec<PriorSpec>,
    /// Loop design (default single).
    #[serde(rename = "loop")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loop_kind: Option<LoopKind>,
    /// QoI: `r2`, `ranking`, `asymp-pval`, or `perm-pval`.
    pub qoi: String,
    /// Permutation replicates for `qoi = "perm-pval"`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    /// Number of law tuples to draw (ignored when `exhaustive = true`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n1: Option<usize>,
    /// Sample size per model-evaluation batch.
    pub n2: usize,
    /// Enumerate every candidate tuple once instead of drawing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<bool>,
    /// Reference construction for the single loop: `mixture` (default),
    /// `kl-barycenter`, or `wasserstein-barycenter`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// Grid resolution of grid-based reference constructions.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
    /// MMD dispersion convention: `pairwise-mean` (default) or
    /// `to-barycenter`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dispersion: Option<String>,
}

impl Gsa2Config {
    /// Resolve the QoI kind.
    pub fn qoi_kind(&self) -> Result<QoiKind> {
        match self.qoi.as_str() {
            "r2" => Ok(QoiKind::R2Vector),
            "ranking" => Ok(QoiKind::Ranking),
            "asymp-pval" => Ok(QoiKind::AsympPvalVector),
            "perm-pval" => {
                let b = self
                    .b
                    .ok_or_else(|| Error::Config("qoi = \"perm-pval\" requires b".into()))?;
                Ok(QoiKind::PermPvalVector(b))
            }
            other => Err(Error::Config(format!(
                "unknown qoi '{other}'; expected r2, ranking, asymp-pval, perm-pval"
            ))),
        }
    }

    /// Resolve the reference-law spec.
    pub fn reference_spec(&self) -> Result<ReferenceLawSpec> {
        let method = match self.reference.as_deref().unwrap_or("mixture") {
            "mixture" => ReferenceMethod::Mixture,
            "kl-barycenter" => ReferenceMethod::KlBarycenter,
            "wasserstein-barycenter" => ReferenceMethod::WassersteinBarycenter,
            other => {
                return Err(Error::Config(format!(
                    "unknown reference '{other}'; expected mixture, kl-barycenter, \
                     wasserstein-barycenter"
                )))
            }
        };
        match self.grid_size {
            Some(gs) => ReferenceLawSpec::new(method, gs).map_err(|e| Error::Config(e.to_string())),
            None => Ok(ReferenceLawSpec::with_method(method)),
        }
    }

    /// Resolve the dispersion convention.
    pub fn dispersion_convention(&self) -> Result<DispersionConvention> {
        match self.dispersion.as_deref() {
            None | Some("pairwise-mean") => Ok(DispersionConvention::PairwiseMean),
            Some("to-barycenter") => Ok(DispersionConvention::ToBarycenter),
            Some(other) => Err(Error::Config(format!(
                "unknown dispersion '{other}'; expected pairwise-mean or to-barycenter"
            ))),
        }
    }
}

/// A full run file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed (CLI `--seed` overrides).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Builtin model.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    /// Precomputed sample.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSpec>,
    /// First-level study section.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gsa1: Option<Gsa1Config>,
    /// Second-level study section.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gsa2: Option<Gsa2Config>,
}

impl RunConfig {
    /// Parse from TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("invalid run file: {e}")))
    }
}

/// Build a product law from per-coordinate law records.
pub fn build_product(specs: &[LawSpec]) -> Result<ProductDist> {
    let marginals = specs
        .iter()
        .map(|s| s.build())
        .collect::<Result<Vec<_>>>()?;
    ProductDist::new(marginals)
}
