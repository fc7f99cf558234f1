//! Stretching a block-diagonal representation: blocks are re-placed far
//! apart so the same algebra lands in a smaller growth class, with the
//! diagonal gaps carrying copies of the scalar block.


use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::construct::embed::BlockElement;
use crate::construct::structure::{BlockStructure, Frac};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::{GrowthCurve, PROFILE_SLACK};
use crate::lazy::LazyMatrix;

/// Placement data for a stretch embedding into `W_{s}(c)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StretchEmbedding {
    r: Frac,
    s_target: Frac,
    c: f64,
    /// `placements[k-1]` is the start position of block `k`.
    placements: Vec<u64>,
    /// Start the next (uncomputed) block would get; windows must stay below.
    horizon: u64,
}

/// Computes placements `p_k = max(prev_end + 1, ceil((n_k / c)^(1/s)))` for
/// every block of `bs`. Requires `0 < s_target < r`.
pub fn stretch_embed(bs: &BlockStructure, s_target: Frac, c: f64) -> Result<StretchEmbedding> {
    if s_target >= bs.r() {
        return Err(Error::NotAStretch(format!(
            "target exponent {s_target} must be strictly below r = {}",
            bs.r()
        )));
    }
    if s_target <= Frac::new(0, 1) {
        return Err(Error::NotAStretch("target exponent must be positive".into()));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::OutOfRange(format!("stretch constant c = {c} must be positive")));
    }
    let s = s_target.to_f64().expect("small rational fits f64");
    let mut placements = Vec::with_capacity(bs.len());
    let mut prev_end = 0u64;
    for k in 1..=bs.len() as u64 {
        let p = placement_for(bs.size(k), c, s).max(prev_end + 1);
        placements.push(p);
        prev_end = p + bs.size(k) - 1;
    }
    // One block past the structure, so windows can be validated against the
    // first placement we have not materialized.
    let next_size = {
        let ext = BlockStructure::new(bs.r(), bs.padded(), bs.len() + 1)?;
        ext.size(bs.len() as u64 + 1)
    };
    let horizon = placement_for(next_size, c, s).max(prev_end + 1);
    Ok(StretchEmbedding { r: bs.r(), s_target, c, placements, horizon })
}

/// Smallest `p` with `c * p^s >= n` (so a size-`n` block at `p` respects the
/// declared curve), computed as `ceil((n/c)^(1/s))` with boundary repair.
fn placement_for(n: u64, c: f64, s: f64) -> u64 {
    let base = (n as f64 / c).powf(1.0 / s);
    let mut p = base.ceil().max(1.0) as u64;
    let fits = |p: u64| c * (p as f64).powf(s) + PROFILE_SLACK >= n as f64;
    while !fits(p) {
        p += 1;
    }
    while p > 1 && fits(p - 1) {
        p -= 1;
    }
    p
}

impl StretchEmbedding {
    pub fn placements(&self) -> &[u64] {
        &self.placements
    }

    pub fn target(&self) -> Frac {
        self.s_target
    }

    pub fn constant(&self) -> f64 {
        self.c
    }

    /// Largest window the computed placements can serve exactly.
    pub fn max_window(&self) -> u64 {
        self.horizon - 1
    }

    /// The stretched image of a block element: block `k` sits at
    /// `placements[k]`, and every diagonal position outside the placed blocks
    /// repeats the scalar block, making the map a unital homomorphism.
    pub fn embed<F: Field>(&self, element: &BlockElement<F>) -> Result<LazyMatrix<F>> {
        let bs = element.structure().clone();
        if bs.len() != self.placements.len() || bs.r() != self.r {
            return Err(Error::ConfigMismatch(
                "element structure does not match the stretch placements".into(),
            ));
        }
        let field = element.field().clone();
        let scalar = element.scalar_part();
        let placements = self.placements.clone();
        let element = element.clone();
        let s = self.s_target.to_f64().expect("small rational fits f64");
        let curve = GrowthCurve::power(self.c, s);
        let name = format!("stretch(r={}, s={})", self.r, self.s_target);
        let locate = move |pos: u64| -> Option<(u64, u64)> {
            // Block containing pos under the stretched placement.
            let idx = placements.partition_point(|&p| p <= pos);
            if idx == 0 {
                return None;
            }
            let k = idx as u64;
            let off = pos - placements[idx - 1];
            if off < bs.size(k) {
                Some((k, off))
            } else {
                None
            }
        };
        Ok(LazyMatrix::new(name, field.clone(), curve, move |i, j| {
            match (locate(i), locate(j)) {
                (Some((ki, oi)), Some((kj, oj))) if ki == kj => element.block_entry(ki, oi, oj),
                (None, None) if i == j => scalar.clone(),
                _ => field.zero(),
            }
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Gfp;
    use crate::window::WindowMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn f7() -> Gfp {
        Gfp::new(7).unwrap()
    }

    #[test]
    fn placements_grow_like_fourth_power() {
        // r = 1/2 stretched to s = 1/4 with c = 1: p_k >= n_k^4 = k^4.
        let bs = BlockStructure::new(Frac::new(1, 2), false, 8).unwrap();
        let st = stretch_embed(&bs, Frac::new(1, 4), 1.0).unwrap();
        for k in 1..=8u64 {
            let p = st.placements()[k as usize - 1];
            assert!(p >= k.pow(4), "p_{k} = {p} < k^4");
        }
    }

    #[test]
    fn identity_maps_to_identity() {
        let bs = Arc::new(BlockStructure::new(Frac::new(1, 2), false, 4).unwrap());
        let st = stretch_embed(&bs, Frac::new(1, 4), 1.0).unwrap();
        let id = BlockElement::identity(f7(), bs);
        let w = st.embed(&id).unwrap().window(64).unwrap();
        assert!(w.eq_on_rows(&WindowMatrix::identity(f7(), 64), 64));
    }

    #[test]
    fn rejects_non_stretch_targets() {
        let bs = BlockStructure::new(Frac::new(1, 2), false, 4).unwrap();
        assert!(matches!(
            stretch_embed(&bs, Frac::new(1, 2), 1.0),
            Err(Error::NotAStretch(_))
        ));
        assert!(matches!(
            stretch_embed(&bs, Frac::new(2, 3), 1.0),
            Err(Error::NotAStretch(_))
        ));
    }

    #[test]
    fn stretched_image_passes_target_growth() {
        let bs = Arc::new(BlockStructure::new(Frac::new(1, 2), false, 6).unwrap());
        let st = stretch_embed(&bs, Frac::new(1, 4), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = BlockElement::random(f7(), bs, &mut rng);
        let window = st.max_window().min(4096);
        let w = st.embed(&x).unwrap().window(window).unwrap();
        assert!(w.verify_growth(1.0, 0.25));
    }

    #[test]
    fn stretched_multiplication_is_blockwise() {
        let bs = Arc::new(BlockStructure::new(Frac::new(1, 2), false, 5).unwrap());
        let st = stretch_embed(&bs, Frac::new(1, 4), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = BlockElement::random(f7(), bs.clone(), &mut rng);
        let y = BlockElement::random(f7(), bs.clone(), &mut rng);
        let window = st.max_window().min(1024);
        let wx = st.embed(&x).unwrap().window(window).unwrap();
        let wy = st.embed(&y).unwrap().window(window).unwrap();
        let lhs = wx.mul(&wy).unwrap();
        let rhs = st.embed(&x.mul(&y).unwrap()).unwrap().window(window).unwrap();
        assert!(lhs.eq_on_rows(&rhs, lhs.valid_to()));
    }
}
