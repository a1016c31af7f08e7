//! First-level sensitivity screening of a simulation model.
//!
//! Draws a design from the input law, runs the model once per point, and
//! scores every input with the HSIC dependence measure: the raw V-statistic,
//! its normalized R² variant for ranking, and two independence tests (the
//! Gamma asymptotic test and a permutation test).
//!
//! Run with `cargo run --example first_level`.

use sensic::dist::{ProductDist, UnivariateDist};
use sensic::gsa2::evaluate_model;
use sensic::hsic::{asymp_pvalue, hsic_v, perm_pvalue, r2_hsic, SampleSet};
use sensic::rng::stream;

/// A three-input oscillatory test model: a strong x1 main effect, a large
/// x1-x3 interaction, and a weaker symmetric effect in x2.
struct Oscillator;

impl sensic::gsa2::Model for Oscillator {
    fn eval(&self, x: &[f64]) -> f64 {
        (6.0 * x[0] - 3.0).sin()
            + 1.8 * (6.0 * x[1] - 3.0).sin().powi(2)
            + 0.1 * (6.0 * x[2] - 3.0).powi(4) * (6.0 * x[0] - 3.0).sin()
    }
}

fn main() -> sensic::Result<()> {
    let n = 400;
    let law = ProductDist::new(vec![
        UnivariateDist::uniform(0.0, 1.0)?,
        UnivariateDist::uniform(0.0, 1.0)?,
        UnivariateDist::uniform(0.0, 1.0)?,
    ])?;

    let mut rng = stream(7, &[1]);
    let inputs = law.sample(n, &mut rng);
    let outputs = evaluate_model(&Oscillator, inputs.view())?;
    let sample = SampleSet::new(inputs, outputs, law)?;

    println!("input   HSIC        R2       gamma-p    perm-p");
    for k in 0..3 {
        let h = hsic_v(&sample, k)?;
        let r2 = r2_hsic(&sample, k)?;
        let gp = asymp_pvalue(&sample, k)?;
        let mut prng = stream(7, &[2, k as u64]);
        let pp = perm_pvalue(&sample, k, 500, &mut prng)?;
        println!(
            "x{}    {:.6}  {:.4}   {:.4}     {:.4}",
            k + 1,
            h.value,
            r2,
            gp,
            pp
        );
    }

    println!();
    println!("R2 is scale-free: use it to rank inputs; use the p-values to");
    println!("decide which inputs can be screened out as independent of the");
    println!("output. x3 matters only through its interaction with x1, which");
    println!("HSIC still detects; x2's weak even effect is the hardest case");
    println!("for kernel detection and needs a larger design to reject.");
    Ok(())
}
