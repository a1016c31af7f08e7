//! Which input's *distributional uncertainty* matters most?
//!
//! Second-level sensitivity analysis puts a prior over candidate laws for
//! every input and asks how strongly the choice of law influences the
//! first-level sensitivity results. Two estimation strategies are compared
//! at the same model-evaluation budget:
//!
//! * the double loop draws a fresh design for every law tuple, and
//! * the single loop runs one design under a reference law and retargets
//!   it to each law tuple with importance weights.
//!
//! Run with `cargo run --example second_level`.

use sensic::bench::{candidate_priors, IshigamiVariant};
use sensic::gsa2::{
    double_loop, single_loop, DoubleLoopConfig, LawDraws, QoiKind, SingleLoopConfig,
};
use sensic::reflaw::{ReferenceLawSpec, ReferenceMethod};
use sensic::rng::stream;

fn main() -> sensic::Result<()> {
    let model = IshigamiVariant { coef: 1.5 };
    // Three candidate laws per input -> 27 law tuples enumerated exactly.
    let priors = candidate_priors();
    let budget = 1026; // model evaluations allowed for either strategy

    // Double loop: 27 tuples x 38 fresh points each.
    let mut rng = stream(2024, &[1]);
    let dcfg = DoubleLoopConfig::new(QoiKind::R2Vector, LawDraws::Exhaustive, budget / 27);
    let double = double_loop(&priors, &model, &dcfg, &mut rng)?;

    // Single loop: one 1026-point design under the mixture reference law,
    // reweighted to all 27 tuples.
    let mut rng = stream(2024, &[2]);
    let scfg = SingleLoopConfig::new(
        ReferenceLawSpec::with_method(ReferenceMethod::Mixture),
        QoiKind::R2Vector,
        LawDraws::Exhaustive,
        budget,
    );
    let single = single_loop(&priors, &model, &scfg, &mut rng)?;

    println!("strategy      evals  law tuples  R2_2 per input            ranking");
    for (name, r) in [("double loop", &double), ("single loop", &single)] {
        println!(
            "{name}   {:>5}  {:>10}  ({:.4}, {:.4}, {:.4})  {:?}",
            r.audit.model_evals,
            r.audit.laws.len(),
            r.r2_2[0],
            r.r2_2[1],
            r.r2_2[2],
            r.ranking().indices()
        );
    }

    println!();
    println!("Both strategies spend exactly {budget} model calls. The double");
    println!("loop spreads them over 27 small designs (high inner-loop noise);");
    println!("the single loop invests them in one large design and pays only");
    println!("a reweighting penalty, which is why its ranking of the three");
    println!("input priors is the more stable one at a fixed budget.");
    Ok(())
}
