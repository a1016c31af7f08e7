//! Kernels whose inputs are probability distributions or rankings.
//!
//! Second-level sensitivity analysis needs a positive-definite similarity
//! between *laws* (here: exp(-MMD²/s²) with the maximum mean discrepancy
//! computed by quadrature) and between *importance rankings* (the Mallows
//! kernel on permutations, driven by the number of discordant pairs).
//!
//! Run with `cargo run --example distribution_kernels`.

use sensic::dist::UnivariateDist;
use sensic::kernels::{
    discordant_pairs, mallows_eval, mmd2, mmd2_matrix, mmd_bandwidth, mmd_kernel_eval,
    DispersionConvention, GaussianKernel, Permutation,
};

fn main() -> sensic::Result<()> {
    let laws = vec![
        UnivariateDist::uniform(0.0, 1.0)?,
        UnivariateDist::triangular(0.0, 1.0, 0.4)?,
        UnivariateDist::trunc_normal(0.0, 1.0, 0.6, 0.2)?,
    ];
    let names = [
        "uniform(0,1)",
        "triangular(0,1,0.4)",
        "trunc-normal(0.6,0.2)",
    ];

    // The base kernel works on the underlying samples; its bandwidth is the
    // caller's choice — here matched to the unit interval.
    let base = GaussianKernel::new(12.0)?;

    println!("pairwise squared maximum mean discrepancy:");
    let m2 = mmd2_matrix(&laws, &base)?;
    for (i, row_name) in names.iter().enumerate() {
        print!("  {row_name:<22}");
        for j in 0..laws.len() {
            print!(" {:>8.5}", m2[[i, j]]);
        }
        println!();
    }

    // Turning MMD² into a kernel needs a dispersion scale s². Two
    // conventions are provided; both give unit self-similarity.
    for conv in [
        DispersionConvention::PairwiseMean,
        DispersionConvention::ToBarycenter,
    ] {
        let lambda = mmd_bandwidth(&laws, &base, conv)?;
        println!();
        println!("law kernel Gram under {conv:?} (bandwidth {lambda:.2}):");
        for (i, row_name) in names.iter().enumerate() {
            print!("  {row_name:<22}");
            for j in 0..laws.len() {
                print!(
                    " {:>7.4}",
                    mmd_kernel_eval(lambda, &laws[i], &laws[j], &base)?
                );
            }
            println!();
        }
    }

    // MMD obeys the triangle inequality, so near/far structure is real:
    let d01 = mmd2(&laws[0], &laws[1], &base)?.sqrt();
    let d02 = mmd2(&laws[0], &laws[2], &base)?.sqrt();
    let d12 = mmd2(&laws[1], &laws[2], &base)?.sqrt();
    println!();
    println!("MMD distances: u-t {d01:.4}, u-n {d02:.4}, t-n {d12:.4}");

    // Rankings are compared the same way: a discordance count plays the
    // role of the squared distance inside an exponential kernel.
    let best = Permutation::new(vec![1, 0, 2])?; // x2 before x1 before x3
    let swapped = Permutation::new(vec![0, 1, 2])?;
    let reversed = Permutation::new(vec![2, 0, 1])?;
    println!();
    println!(
        "Mallows kernel (lambda = 0.5) against ranking {:?}:",
        best.indices()
    );
    for sigma in [&best, &swapped, &reversed] {
        println!(
            "  vs {:?}: {} discordant pairs, kernel {:.4}",
            sigma.indices(),
            discordant_pairs(&best, sigma)?,
            mallows_eval(0.5, &best, sigma)?
        );
    }
    Ok(())
}
