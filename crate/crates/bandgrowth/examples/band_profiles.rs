//! Windows, band profiles, and validity margins.
//!
//! Run: `cargo run --example band_profiles`

use bandgrowth::field::Gfp;
use bandgrowth::lazy::LazyMatrix;
use bandgrowth::window::WindowMatrix;

fn main() -> bandgrowth::Result<()> {
    let f = Gfp::new(7)?;

    // The one-step shift S has bandwidth 1 at every position.
    let s = LazyMatrix::shift(f.clone());
    let w = s.window(8)?;
    println!("shift window (8x8), profile = {:?}", w.band_profile().values());

    // A single far-off entry contributes its displacement at the smaller of
    // its two positions only.
    let e15 = LazyMatrix::unit(f.clone(), 1, 5).window(6)?;
    println!("unit(1,5) profile       = {:?}", e15.band_profile().values());

    // Products track which rows stay exact for the infinite matrix. S * S'
    // is the identity there, and visibly not at the window edge.
    let st = LazyMatrix::shift_transpose(f.clone()).window(8)?;
    let prod = s.window(8)?.mul(&st)?;
    println!(
        "S * S': valid rows 1..={}, equals identity there: {}",
        prod.valid_to(),
        prod.eq_on_rows(&WindowMatrix::identity(f.clone(), 8), prod.valid_to())
    );
    println!("        edge entry (8,8) = {} (truncation artifact)", prod.get(8, 8));

    // Growth verification: the measured profile against c * n^s.
    println!(
        "shift within 1 * n^0: {}, within 0.5 * n^0: {}",
        s.window(64)?.verify_growth(1.0, 0.0),
        s.window(64)?.verify_growth(0.5, 0.0)
    );
    Ok(())
}
