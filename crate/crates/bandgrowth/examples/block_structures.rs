//! Diagonal block structures `n_k = [k^t]` and the banded embedding of the
//! block algebra.
//!
//! Run: `cargo run --example block_structures`

use std::sync::Arc;

use bandgrowth::construct::{embed_r, BlockElement, BlockStructure, Frac};
use bandgrowth::field::Gfp;
use bandgrowth::growth::fit_exponent;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bandgrowth::Result<()> {
    for (num, den) in [(1u64, 3u64), (1, 2), (2, 3)] {
        let r = Frac::new(num, den);
        let bs = BlockStructure::new(r, false, 8)?;
        println!(
            "r = {r}: t = {}, sizes {:?}, starts {:?}",
            bs.t(),
            bs.sizes(),
            bs.starts()
        );
    }

    // A random block element embeds with its declared growth curve
    // 2 (t + 1) n^r, and its measured profile fits the exponent r.
    let r = Frac::new(1, 2);
    let window = 4000;
    let bs = Arc::new(BlockStructure::covering(r, false, window)?);
    let mut rng = ChaCha8Rng::seed_from_u64(bandgrowth::DEFAULT_SEED);
    let x = BlockElement::random(Gfp::new(7)?, bs.clone(), &mut rng);
    let w = embed_r(x).window(window)?;
    println!(
        "random element of the block algebra: within {:.1} * n^{}: {}",
        bs.growth_constant(),
        bs.r_f64(),
        w.verify_growth(bs.growth_constant(), bs.r_f64())
    );
    let fit = fit_exponent(&w.band_profile(), 16)?;
    println!("measured profile fits exponent {:.3} (r = {:.3})", fit.s, bs.r_f64());
    Ok(())
}
