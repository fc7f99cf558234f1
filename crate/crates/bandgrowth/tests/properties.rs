//! Cross-module algebraic invariants, mostly property-based.

use std::sync::Arc;

use bandgrowth::analyze::{constants_series, estimate_growth, Embedding, IdentityEmbedding};
use bandgrowth::construct::{BlockStructure, Frac, RecipeBook};
use bandgrowth::field::{Field, Gfp};
use bandgrowth::growth::{compose_product, minimal_constant, GrowthCurve, PROFILE_SLACK};
use bandgrowth::lazy::LazyMatrix;
use bandgrowth::window::WindowMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn f7() -> Gfp {
    Gfp::new(7).unwrap()
}

fn banded_strategy(n: u64, max_bw: u64) -> impl Strategy<Value = WindowMatrix<Gfp>> {
    (0..=max_bw, any::<u64>()).prop_map(move |(bw, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let field = f7();
        let mut entries = Vec::new();
        for i in 1..=n {
            for j in i.saturating_sub(bw).max(1)..=(i + bw).min(n) {
                let v = rng.gen_range(0..7u64);
                if v != 0 {
                    entries.push((i, j, v));
                }
            }
        }
        WindowMatrix::from_entries(field, n, entries).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // The symmetrized composition bound dominates the measured profile of a
    // product, pointwise on the exact region.
    #[test]
    fn composition_bound_sound(x in banded_strategy(96, 6), y in banded_strategy(96, 6)) {
        let xy = x.mul(&y).unwrap();
        let gx = GrowthCurve::table(x.band_profile().values().iter().map(|g| *g as f64).collect());
        let gy = GrowthCurve::table(y.band_profile().values().iter().map(|g| *g as f64).collect());
        let bound = compose_product(&gx, &gy);
        let profile = xy.band_profile();
        for k in 1..=xy.valid_to() {
            prop_assert!((profile.get(k) as f64) <= bound.eval(k) + PROFILE_SLACK);
        }
    }

    // Re-masking a window to its own profile changes nothing.
    #[test]
    fn band_profile_remask_idempotent(x in banded_strategy(64, 5)) {
        let profile = x.band_profile();
        let masked: Vec<(u64, u64, u64)> = x
            .entries()
            .filter(|(i, j, _)| i.abs_diff(*j) <= profile.get((*i).min(*j)))
            .map(|(i, j, v)| (i, j, *v))
            .collect();
        let remade = WindowMatrix::from_entries(f7(), 64, masked).unwrap();
        prop_assert_eq!(remade.band_profile(), profile);
    }

    // Transposition preserves the profile exactly.
    #[test]
    fn transpose_preserves_profile(x in banded_strategy(64, 6)) {
        prop_assert_eq!(x.band_profile(), x.transpose().band_profile());
    }

    // Products associate and addition distributes on the common exact region.
    #[test]
    fn ring_laws_on_valid_region(
        x in banded_strategy(48, 3),
        y in banded_strategy(48, 3),
        z in banded_strategy(48, 3),
    ) {
        let assoc_l = x.mul(&y).unwrap().mul(&z).unwrap();
        let assoc_r = x.mul(&y.mul(&z).unwrap()).unwrap();
        let m = assoc_l.valid_to().min(assoc_r.valid_to());
        prop_assert!(assoc_l.eq_on_rows(&assoc_r, m));

        let dist_l = x.mul(&y.add(&z).unwrap()).unwrap();
        let dist_r = x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap();
        let m = dist_l.valid_to().min(dist_r.valid_to());
        prop_assert!(dist_l.eq_on_rows(&dist_r, m));
    }

    // minimal_constant is the argmin: the verification fails just below it.
    #[test]
    fn minimal_constant_is_argmin(x in banded_strategy(64, 5), s in 0.0f64..0.9) {
        let c = minimal_constant(&x, s);
        prop_assert!(x.verify_growth(c, s));
        if c > 0.0 {
            prop_assert!(!x.verify_growth(c * 0.99 - 1e-6, s));
        }
    }

    // The s = 0 levels multiply like a filtration.
    #[test]
    fn zero_exponent_filtration(x in banded_strategy(96, 4), y in banded_strategy(96, 4)) {
        let cx = minimal_constant(&x, 0.0);
        let cy = minimal_constant(&y, 0.0);
        prop_assert!(x.mul(&y).unwrap().verify_growth(cx + cy, 0.0));
    }
}

// Block bookkeeping: sizes sum to the next start.
#[test]
fn block_bookkeeping() {
    for r in [Frac::new(1, 3), Frac::new(1, 2), Frac::new(2, 3)] {
        for padded in [false, true] {
            let bs = BlockStructure::new(r, padded, 200).unwrap();
            for k in 1..200u64 {
                let sum: u64 = (1..=k).map(|j| bs.size(j)).sum();
                assert_eq!(sum, bs.start(k + 1) - 1);
            }
        }
    }
}

// Unit identities across random unit pairs of one block.
#[test]
fn recipe_unit_identities_sampled() {
    let mut book = RecipeBook::with_defaults(f7(), Frac::new(1, 2), 6).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20 {
        let k = rng.gen_range(2..=6u64);
        let n_k = book.structure().size(k);
        let (i, j, l, m) = (
            rng.gen_range(1..=n_k),
            rng.gen_range(1..=n_k),
            rng.gen_range(1..=n_k),
            rng.gen_range(1..=n_k),
        );
        let (_, eij) = book.eval_unit(k, i, j).unwrap();
        let (_, elm) = book.eval_unit(k, l, m).unwrap();
        let prod = eij.mul(&elm).unwrap();
        if j == l {
            let (_, expect) = book.eval_unit(k, i, m).unwrap();
            assert!(prod.eq_on_rows(&expect, prod.valid_to().min(expect.valid_to())));
        } else {
            assert!(prod.is_zero_on_rows(prod.valid_to()));
        }
    }
}

// Recorded recipe costs are nondecreasing in k on average.
#[test]
fn recipe_lengths_trend_upward() {
    let mut book = RecipeBook::with_defaults(f7(), Frac::new(1, 2), 12).unwrap();
    let mut per_block = Vec::new();
    for k in 1..=12u64 {
        let n_k = book.structure().size(k);
        let mut worst = 0u64;
        for i in 1..=n_k {
            for j in 1..=n_k {
                let (r, _) = book.eval_unit(k, i, j).unwrap();
                worst = worst.max(r.products);
            }
        }
        per_block.push(worst as f64);
    }
    let first: f64 = per_block[..6].iter().sum::<f64>() / 6.0;
    let second: f64 = per_block[6..].iter().sum::<f64>() / 6.0;
    assert!(second >= first, "costs shrank: {first} vs {second}");
}

// Every default generator passes its declared growth at exponent r.
#[test]
fn default_generators_pass_growth() {
    for r in [Frac::new(1, 3), Frac::new(1, 2), Frac::new(2, 3)] {
        let bs = Arc::new(BlockStructure::new(r, true, 24).unwrap());
        let gs = bandgrowth::construct::default_generators(f7(), &bs).unwrap();
        for verdict in gs.verify_growth(gs.max_window().min(2000)).unwrap() {
            assert!(verdict.ok, "generator {} fails growth at r = {r}", verdict.name);
        }
    }
}

// Envelope monotonicity in the word length.
#[test]
fn envelope_monotone_in_length() {
    let s = LazyMatrix::shift(f7()).window(256).unwrap();
    let st = LazyMatrix::shift_transpose(f7()).window(256).unwrap();
    let gens = vec![s, st];
    let mut prev: Option<Vec<u64>> = None;
    for len in 1..=4usize {
        let est = estimate_growth(&gens, len, 1).unwrap();
        if let Some(p) = &prev {
            for (a, b) in p.iter().zip(&est.envelope) {
                assert!(b >= a);
            }
        }
        prev = Some(est.envelope);
    }
}

// Scaling every image of an embedding leaves the constants series alone.
#[test]
fn constants_series_scale_invariant() {
    struct Scaled<F: Field> {
        inner: IdentityEmbedding<F>,
        factor: F::Elem,
        field: F,
    }
    impl<F: Field> Embedding<F> for Scaled<F> {
        fn name(&self) -> &str {
            "scaled"
        }
        fn unit_image(&self, k: u64, i: u64) -> bandgrowth::Result<WindowMatrix<F>> {
            Ok(self.inner.unit_image(k, i)?.scale(&self.factor))
        }
        fn cross_image(&self, k: u64) -> bandgrowth::Result<WindowMatrix<F>> {
            Ok(self.inner.cross_image(k)?.scale(&self.factor))
        }
        fn block_size(&self, k: u64) -> u64 {
            let _ = &self.field;
            self.inner.block_size(k)
        }
    }
    let bs = Arc::new(BlockStructure::new(Frac::new(1, 2), false, 13).unwrap());
    let window = bs.end(13);
    let base = IdentityEmbedding::new(f7(), bs.clone(), window);
    let plain = constants_series(&base, 0.5, 12).unwrap();
    let scaled = Scaled {
        inner: IdentityEmbedding::new(f7(), bs, window),
        factor: 3u64,
        field: f7(),
    };
    let scaled_series = constants_series(&scaled, 0.5, 12).unwrap();
    assert_eq!(plain.c, scaled_series.c);
}
