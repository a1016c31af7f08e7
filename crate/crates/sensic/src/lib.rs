//! Kernel-based global sensitivity analysis.
//!
//! `sensic` measures how much each input of a black-box numerical model
//! contributes to its output, using the Hilbert–Schmidt independence
//! criterion (HSIC) and its normalized index. Beyond the classical
//! estimators it provides:
//!
//! - **importance-weighted estimators** ([`weighted`]) that recover the
//!   indices under a *target* input law from a sample drawn under a
//!   different *sampling* law, together with corrected asymptotic and
//!   permutation independence tests;
//! - **kernels on laws and rankings** ([`kernels`]) — an energy-distance
//!   style kernel between univariate distributions built on maximum mean
//!   discrepancy, and a Mallows kernel between permutations;
//! - **second-level analysis** ([`gsa2`]) for models whose *input laws are
//!   themselves uncertain*: how sensitive is a sensitivity study to the
//!   choice of each input's distribution?
//! - **reference-law construction** ([`reflaw`]) — mixture and barycenter
//!   summaries of a set of candidate laws, used as the single sampling law
//!   of the budget-saving single-loop second-level procedure;
//! - a **benchmark harness** ([`bench`]) and a CLI (`sensic`) that
//!   reproduce the library's calibration studies end to end.
//!
//! The mathematical conventions (V-statistics, population variances,
//! bandwidth heuristics) are documented on the items that implement them.

pub mod bench;
pub mod cli;
pub mod config;
pub mod dist;
pub mod error;
pub mod gsa2;
pub mod hsic;
pub mod io;
pub mod kernels;
pub mod quad;
pub mod reflaw;
pub mod rng;
pub mod weighted;

pub use error::{Error, Result};
