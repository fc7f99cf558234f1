//! The eight-generator set and its word recipes: every standard matrix unit
//! of every block, and cross elements between consecutive blocks, all
//! verified by exact window multiplication.
//!
//! Run: `cargo run --example matrix_units`

use bandgrowth::construct::{matrix_unit_recipe, Frac, RecipeBook};
use bandgrowth::field::Gfp;

fn main() -> bandgrowth::Result<()> {
    let mut book = RecipeBook::with_defaults(Gfp::new(7)?, Frac::new(1, 2), 8)?;
    let bs = book.structure().clone();
    println!(
        "padded structure: sizes {:?}..., evaluation window {}",
        &bs.sizes()[..8],
        book.window_size()
    );

    // The tiny first block: a two-word difference of at most 4 letters.
    let r11 = matrix_unit_recipe(&bs, 1, 1, 1)?;
    println!("e(1; 1,1) = {}  [{} letters]", r11.combination.display(), r11.letters);

    // A unit deep inside block 6 (size 8), with the addressing sandwich.
    let r = book.verify_unit(6, 3, 7)?;
    println!(
        "e(6; 3,7): {} words, {} letters, {} products; exact",
        r.words, r.letters, r.products
    );

    // Unit identities hold on the nose.
    let (_, e12) = book.eval_unit(5, 1, 2)?;
    let (_, e23) = book.eval_unit(5, 2, 3)?;
    let (_, e13) = book.eval_unit(5, 1, 3)?;
    let prod = e12.mul(&e23)?;
    println!(
        "e(5;1,2) e(5;2,3) = e(5;1,3): {}",
        prod.eq_on_rows(&e13, prod.valid_to().min(e13.valid_to()))
    );

    // Cross elements link consecutive blocks: gamma' gamma and gamma gamma'
    // are the two corner idempotents.
    for k in 1..=6 {
        let cross = book.verify_cross(k)?;
        println!(
            "cross {k} -> {}: exact ({} letters, {} products)",
            k + 1,
            cross.letters,
            cross.products
        );
    }
    Ok(())
}
