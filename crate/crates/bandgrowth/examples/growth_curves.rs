//! The growth-curve calculus: composition bounds, filtration levels, and the
//! iterated power-growth recurrence.
//!
//! Run: `cargo run --example growth_curves`

use bandgrowth::growth::{
    compose_product, membership, minimal_constant, power_growth_check, FiltrationLevel,
    GrowthCurve,
};
use bandgrowth::field::Gfp;
use bandgrowth::lazy::LazyMatrix;

fn main() -> bandgrowth::Result<()> {
    // Constant curves form an exact filtration: W_0(c) * W_0(c') lands in
    // W_0(c + c').
    let f0 = compose_product(&GrowthCurve::power(2.0, 0.0), &GrowthCurve::power(3.0, 0.0));
    println!("compose(2, 3 | s = 0) at n = 50: {}", f0.eval(50));

    // Sublinear curves compose through the shifted-argument rule.
    let half = GrowthCurve::power(1.0, 0.5);
    let f = compose_product(&half, &half);
    println!("compose(sqrt, sqrt) at n = 100: {:.4} (= 10 + sqrt(110))", f.eval(100));

    // Membership of concrete windows in filtration levels.
    let field = Gfp::new(7)?;
    let id = LazyMatrix::identity(field.clone()).window(64)?;
    let s = LazyMatrix::shift(field.clone()).window(64)?;
    println!(
        "identity in W_0(1): {}, shift in W_0(1/2): {}",
        membership(&id, FiltrationLevel::new(0.0, 1.0)?),
        membership(&s, FiltrationLevel::new(0.0, 0.5)?),
    );

    // The minimal constant is the profile's worst ratio against n^s.
    let e15 = LazyMatrix::unit(field, 1, 5).window(8)?;
    println!("minimal constant of unit(1,5) at s = 1/2: {}", minimal_constant(&e15, 0.5));

    // Iterating b_{m+1}(n) = b_m(n) + c (n + b_m(n))^s stays polynomial for
    // s < 1: the report fits the minimal d with b_m <= d m^(1/(1-s)) n^s.
    for s in [0.25, 0.5, 0.75] {
        let report = power_growth_check(1.0, s, 64, &[100, 10_000, 1_000_000])?;
        println!(
            "s = {s}: bound exponent {:.3}, fitted d = {:.4}",
            1.0 / (1.0 - s),
            report.fitted_d
        );
    }
    Ok(())
}
