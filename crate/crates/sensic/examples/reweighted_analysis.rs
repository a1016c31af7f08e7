//! Sensitivity analysis under a different input law than the one the
//! design was drawn from — without new model runs.
//!
//! A single design is simulated under a uniform sampling law. Importance
//! weights (density ratios of the target law to the sampling law) then turn
//! the same model evaluations into estimates under a triangular target law:
//! weighted HSIC, its normalized version, the closed-form null bias and
//! variance of the weighted statistic, and a weighted Gamma independence
//! test. A fresh design drawn directly from the target law is run alongside
//! for comparison.
//!
//! Run with `cargo run --example reweighted_analysis`.

use sensic::bench::IshigamiVariant;
use sensic::dist::{ProductDist, UnivariateDist};
use sensic::gsa2::evaluate_model;
use sensic::hsic::SampleSet;
use sensic::rng::stream;
use sensic::weighted::{make_weights, wgamma_pvalue, whsic, whsic_bias_h0, whsic_var_h0, wr2_hsic};

fn product(dist: &UnivariateDist) -> sensic::Result<ProductDist> {
    ProductDist::new(vec![dist.clone(), dist.clone(), dist.clone()])
}

fn main() -> sensic::Result<()> {
    let n = 600;
    let model = IshigamiVariant { coef: 1.8 };
    let sampling = product(&UnivariateDist::uniform(0.0, 1.0)?)?;
    let target = product(&UnivariateDist::triangular(0.0, 1.0, 0.5)?)?;

    // One design, drawn under the sampling law.
    let mut rng = stream(99, &[1]);
    let inputs = sampling.sample(n, &mut rng);
    let outputs = evaluate_model(&model, inputs.view())?;
    let sample = SampleSet::new(inputs, outputs, sampling.clone())?;

    // Density-ratio weights retarget it to the triangular law. Weight
    // construction fails loudly if the target's support exceeds the
    // sampling law's or if the ratio is too heavy-tailed to be usable.
    let weights = make_weights(target.clone(), sampling, sample.inputs())?;
    let mean_w: f64 = weights.weights().iter().sum::<f64>() / n as f64;
    println!("mean importance weight {mean_w:.3} (should be near 1)");
    println!();

    // A second design drawn directly from the target, for reference.
    let mut rng2 = stream(99, &[2]);
    let direct_inputs = target.sample(n, &mut rng2);
    let direct_outputs = evaluate_model(&model, direct_inputs.view())?;
    let direct = SampleSet::new(direct_inputs, direct_outputs, target)?;

    println!("input  weighted-R2  direct-R2   wHSIC      null-bias  null-sd   gamma-p");
    for k in 0..3 {
        let wr2 = wr2_hsic(&sample, &weights, k)?;
        let dr2 = sensic::hsic::r2_hsic(&direct, k)?;
        let wh = whsic(&sample, &weights, k)?;
        let bias = whsic_bias_h0(&sample, &weights, k)?;
        let sd = whsic_var_h0(&sample, &weights, k)?.sqrt();
        let p = wgamma_pvalue(&sample, &weights, k)?;
        println!(
            "x{}     {wr2:.4}      {dr2:.4}     {:.6}  {bias:.6}  {sd:.6}  {p:.4}",
            k + 1,
            wh.value
        );
    }

    println!();
    println!("The two R2 columns rank the inputs identically. Their levels");
    println!("differ because each column standardizes its kernels on its own");
    println!("design; only the ranking is comparable across designs. The");
    println!("null-bias column is what the raw weighted statistic would show");
    println!("for an independent input at this sample size — x3's statistic");
    println!("sits near it, the others are far above.");
    Ok(())
}
