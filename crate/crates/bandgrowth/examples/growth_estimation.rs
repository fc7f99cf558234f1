//! Estimating the growth exponent of one representation, and chasing the
//! idempotent images: minimal-constant series and first-row scatter.
//!
//! Run: `cargo run --example growth_estimation`

use std::sync::Arc;

use bandgrowth::analyze::{constants_series, estimate_growth, scatter_report, IdentityEmbedding};
use bandgrowth::construct::{embed_r, BlockElement, BlockStructure, Frac};
use bandgrowth::field::Gfp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bandgrowth::Result<()> {
    let f = Gfp::new(7)?;
    let r = Frac::new(1, 3);
    let window = 20_000u64;
    let bs = Arc::new(BlockStructure::covering(r, false, window)?);
    let mut rng = ChaCha8Rng::seed_from_u64(bandgrowth::DEFAULT_SEED);

    // Words in two random block elements: the profile envelope fits the
    // structural exponent r. This is an upper-bound witness for the
    // representation, never a dimension claim.
    let gens: Vec<_> = (0..2)
        .map(|_| embed_r(BlockElement::random(f.clone(), bs.clone(), &mut rng)).window(window))
        .collect::<bandgrowth::Result<_>>()?;
    let est = estimate_growth(&gens, 3, bandgrowth::DEFAULT_SEED)?;
    println!(
        "envelope over {} words: fitted exponent {:.3} (r = {:.3}), residual {:.3}",
        est.words_evaluated,
        est.fit.s,
        bs.r_f64(),
        est.fit.residual
    );

    // Minimal constants c_k over the identity embedding: the diagonal units
    // are flat, the cross links carry the growth.
    let theta = IdentityEmbedding::new(f.clone(), bs.clone(), window);
    let series = constants_series(&theta, bs.r_f64(), 12)?;
    println!("c_k series (s = r): {:?}", series.c.iter().map(|c| (c * 100.0).round() / 100.0).collect::<Vec<_>>());

    // Scatter of the first nonzero rows of block 5's idempotent images.
    let scatter = scatter_report(&theta, 5)?;
    println!(
        "block 5 image rows: {:?} (min gap {}, max {})",
        scatter.positions, scatter.min_gap, scatter.max_position
    );
    Ok(())
}
