//! Interleaving a matrix algebra over A into single matrices: the combined
//! slot map is a unital homomorphism and keeps the growth exponent.
//!
//! Run: `cargo run --example interleaving`

use bandgrowth::construct::{interleave_combine, interleave_slot};
use bandgrowth::field::{Field, Gfp};
use bandgrowth::growth::fit_exponent;
use bandgrowth::lazy::LazyMatrix;
use bandgrowth::window::WindowMatrix;

fn main() -> bandgrowth::Result<()> {
    let f = Gfp::new(7)?;

    // Identity of the 2x2 matrix algebra maps to the identity.
    let id = LazyMatrix::identity(f.clone());
    let combined = interleave_combine(vec![
        interleave_slot(&id, 2, (1, 1))?,
        interleave_slot(&id, 2, (2, 2))?,
    ])?;
    let w = combined.window(16)?;
    println!(
        "diag(1, 1) interleaved at degree 2 is the identity: {}",
        w.eq_on_rows(&WindowMatrix::identity(f.clone(), 16), 16)
    );

    // The shift in one slot: profile stays within n * g + n (here <= 3).
    let s = LazyMatrix::shift(f.clone());
    let img = interleave_slot(&s, 2, (1, 2))?;
    let p = img.matrix().window(24)?.band_profile();
    println!("shift in slot (1,2): profile = {:?}", &p.values()[..12]);

    // Exponent preservation on a matrix with a genuine power profile.
    let field = f.clone();
    let wide = LazyMatrix::new(
        "edge",
        f.clone(),
        bandgrowth::growth::GrowthCurve::power(1.0, 0.5),
        move |i, j| {
            let b = (i.min(j) as f64).sqrt().floor() as u64;
            if j == i + b || i == j + b {
                field.one()
            } else {
                field.zero()
            }
        },
    );
    let base_fit = fit_exponent(&wide.window(4096)?.band_profile(), 16)?;
    let image = interleave_slot(&wide, 2, (2, 1))?;
    let img_fit = fit_exponent(&image.matrix().window(8192)?.band_profile(), 16)?;
    println!(
        "base exponent {:.3} vs interleaved exponent {:.3}",
        base_fit.s, img_fit.s
    );
    Ok(())
}
