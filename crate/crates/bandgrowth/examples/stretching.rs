//! Stretching a block-diagonal representation into a smaller growth class.
//!
//! Run: `cargo run --example stretching`

use std::sync::Arc;

use bandgrowth::construct::{stretch_embed, BlockElement, BlockStructure, Frac};
use bandgrowth::field::Gfp;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> bandgrowth::Result<()> {
    let r = Frac::new(1, 2);
    let s = Frac::new(1, 4);
    let bs = Arc::new(BlockStructure::new(r, false, 8)?);
    let st = stretch_embed(&bs, s, 1.0)?;

    // Block k needs position p with c p^s >= n_k, so placements grow like
    // n_k^(1/s) = k^4 here.
    println!("placements: {:?}", st.placements());
    println!("k^4:        {:?}", (1u64..=8).map(|k| k.pow(4)).collect::<Vec<_>>());

    // The map is a unital homomorphism: blocks multiply in place and the
    // gaps carry the scalar block.
    let f = Gfp::new(7)?;
    let mut rng = ChaCha8Rng::seed_from_u64(bandgrowth::DEFAULT_SEED);
    let x = BlockElement::random(f.clone(), bs.clone(), &mut rng);
    let y = BlockElement::random(f.clone(), bs.clone(), &mut rng);
    let window = st.max_window().min(5000);
    let lhs = st.embed(&x)?.window(window)?.mul(&st.embed(&y)?.window(window)?)?;
    let rhs = st.embed(&x.mul(&y)?)?.window(window)?;
    println!(
        "stretched(x) * stretched(y) = stretched(x y) on rows 1..={}: {}",
        lhs.valid_to(),
        lhs.eq_on_rows(&rhs, lhs.valid_to())
    );

    // And the image sits in the smaller class W_{1/4}(1).
    println!(
        "image passes 1 * n^(1/4): {}",
        st.embed(&x)?.window(window)?.verify_growth(1.0, 0.25)
    );
    Ok(())
}
