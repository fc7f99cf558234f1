//! Block structures: sizes `n_k = [k^t]` with `t = r/(1-r)`, their start
//! offsets, and the optional power-of-two padding used by the generator set.
//!
//! The growth parameter `r` is kept as an exact rational so `k^t` can be
//! computed with integer arithmetic (`k^p` followed by a floor `q`-th root
//! for `t = p/q`); float powers misplace block boundaries already at
//! `r = 2/3`, `k = 10`.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational parameter in `(0, 1)`, e.g. a growth exponent.
pub type Frac = Ratio<u64>;

/// Parses `2/3`, `0.5`, or `1` into an exact rational.
pub fn parse_frac(s: &str) -> Result<Frac> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot parse `{s}` as a rational"));
    if let Some((num, den)) = s.split_once('/') {
        let n: u64 = num.trim().parse().map_err(|_| bad())?;
        let d: u64 = den.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Frac::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let int: u64 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        if frac.is_empty() || frac.len() > 18 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let digits: u64 = frac.parse().map_err(|_| bad())?;
        let scale = 10u64.pow(frac.len() as u32);
        return Ok(Frac::new(int * scale + digits, scale));
    }
    let n: u64 = s.parse().map_err(|_| bad())?;
    Ok(Frac::from_integer(n))
}

/// Diagonal block layout: block `k` has size `n_k` and starts at `b_k`,
/// with `b_1 = 1` and `b_{k+1} = b_k + n_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockStructure {
    r: Frac,
    padded: bool,
    sizes: Vec<u64>,
    starts: Vec<u64>,
}

/// `n_k = floor(k^(p/q))` by exact integer arithmetic.
fn unpadded_size(k: u64, t_num: u64, t_den: u64) -> u64 {
    let pow = BigUint::from(k).pow(t_num as u32);
    let root = pow.nth_root(t_den as u32);
    root.to_u64().expect("block size exceeds u64 at desk scale")
}

impl BlockStructure {
    /// Builds the first `k_max` blocks for `r` strictly inside `(0, 1)`.
    pub fn new(r: Frac, padded: bool, k_max: usize) -> Result<BlockStructure> {
        if r <= Frac::new(0, 1) || r >= Frac::new(1, 1) {
            return Err(Error::OutOfRange(format!(
                "r = {r} must lie strictly between 0 and 1"
            )));
        }
        if k_max == 0 {
            return Err(Error::OutOfRange("need at least one block".into()));
        }
        let t = r / (Frac::from_integer(1) - r);
        let (tn, td) = (*t.numer(), *t.denom());
        let mut sizes = Vec::with_capacity(k_max);
        let mut starts = Vec::with_capacity(k_max);
        let mut b = 1u64;
        for k in 1..=k_max as u64 {
            let mut n_k = unpadded_size(k, tn, td);
            if padded {
                n_k = n_k.next_power_of_two();
            }
            sizes.push(n_k);
            starts.push(b);
            b += n_k;
        }
        Ok(BlockStructure { r, padded, sizes, starts })
    }

    /// Builds blocks until they cover positions `1..=window` (the final block
    /// may extend past the window).
    pub fn covering(r: Frac, padded: bool, window: u64) -> Result<BlockStructure> {
        let mut k_max = 16usize;
        loop {
            let bs = BlockStructure::new(r, padded, k_max)?;
            if bs.end(bs.len() as u64) >= window {
                // Trim to the first block reaching the window edge.
                let mut keep = bs.len();
                for k in 1..=bs.len() as u64 {
                    if bs.end(k) >= window {
                        keep = k as usize;
                        break;
                    }
                }
                return BlockStructure::new(r, padded, keep);
            }
            k_max *= 2;
            if k_max > 1 << 26 {
                return Err(Error::WindowExhausted {
                    window,
                    context: "block structure would need too many blocks".into(),
                });
            }
        }
    }

    pub fn r(&self) -> Frac {
        self.r
    }

    pub fn r_f64(&self) -> f64 {
        *self.r.numer() as f64 / *self.r.denom() as f64
    }

    /// `t = r / (1 - r)` as an exact rational.
    pub fn t(&self) -> Frac {
        self.r / (Frac::from_integer(1) - self.r)
    }

    pub fn t_f64(&self) -> f64 {
        let t = self.t();
        *t.numer() as f64 / *t.denom() as f64
    }

    pub fn padded(&self) -> bool {
        self.padded
    }

    /// Number of computed blocks.
    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// `n_k` (1-based `k`; must be within the computed range).
    pub fn size(&self, k: u64) -> u64 {
        self.sizes[k as usize - 1]
    }

    /// `b_k`, the 1-based start position of block `k`.
    pub fn start(&self, k: u64) -> u64 {
        self.starts[k as usize - 1]
    }

    /// Last position of block `k`.
    pub fn end(&self, k: u64) -> u64 {
        self.start(k) + self.size(k) - 1
    }

    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    pub fn starts(&self) -> &[u64] {
        &self.starts
    }

    /// Which block holds position `pos`, and the 0-based offset inside it.
    /// `None` when `pos` lies beyond the computed blocks.
    pub fn block_of(&self, pos: u64) -> Option<(u64, u64)> {
        if pos == 0 || pos > self.end(self.len() as u64) {
            return None;
        }
        let k = match self.starts.binary_search(&pos) {
            Ok(idx) => idx + 1,
            Err(idx) => idx,
        } as u64;
        Some((k, pos - self.start(k)))
    }

    /// The declared growth constant for elements confined to the blocks:
    /// `2 (t + 1)` makes `2 (t + 1) n^r` a growth curve for them.
    pub fn growth_constant(&self) -> f64 {
        2.0 * (self.t_f64() + 1.0)
    }

    /// Blocks whose sizes equal `size` form one contiguous run (sizes are
    /// nondecreasing); returns `(first_k, last_k)` or `None`.
    pub fn run_of_size(&self, size: u64) -> Option<(u64, u64)> {
        let first = self.sizes.iter().position(|&s| s == size)?;
        let mut last = first;
        while last + 1 < self.sizes.len() && self.sizes[last + 1] == size {
            last += 1;
        }
        Some((first as u64 + 1, last as u64 + 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_gives_linear_sizes() {
        let bs = BlockStructure::new(Frac::new(1, 2), false, 6).unwrap();
        assert_eq!(bs.sizes(), &[1, 2, 3, 4, 5, 6]);
        assert_eq!(bs.starts(), &[1, 2, 4, 7, 11, 16]);
        assert_eq!(bs.t(), Frac::new(1, 1));
    }

    #[test]
    fn two_thirds_gives_squares() {
        let bs = BlockStructure::new(Frac::new(2, 3), false, 5).unwrap();
        assert_eq!(bs.sizes(), &[1, 4, 9, 16, 25]);
    }

    #[test]
    fn one_third_gives_floor_sqrt() {
        let bs = BlockStructure::new(Frac::new(1, 3), false, 10).unwrap();
        let expect: Vec<u64> = (1..=10u64).map(|k| (k as f64).sqrt().floor() as u64).collect();
        assert_eq!(bs.sizes(), &expect[..]);
    }

    #[test]
    fn exact_sizes_against_integer_oracle() {
        // Float powers go wrong near integer boundaries; the integer path
        // must match brute-force integer search for n with n^q <= k^p.
        let bs = BlockStructure::new(Frac::new(2, 3), false, 200).unwrap();
        for k in 1..=200u64 {
            assert_eq!(bs.size(k), k * k, "k = {k}");
        }
        let bs = BlockStructure::new(Frac::new(1, 3), false, 500).unwrap();
        for k in 1..=500u64 {
            let mut n = 0u64;
            while (n + 1) * (n + 1) <= k {
                n += 1;
            }
            assert_eq!(bs.size(k), n, "k = {k}");
        }
    }

    #[test]
    fn padding_rounds_to_powers_of_two() {
        let bs = BlockStructure::new(Frac::new(1, 2), true, 8).unwrap();
        assert_eq!(bs.sizes(), &[1, 2, 4, 4, 8, 8, 8, 8]);
        assert_eq!(bs.starts(), &[1, 2, 4, 8, 12, 20, 28, 36]);
    }

    #[test]
    fn rejects_degenerate_r() {
        assert!(BlockStructure::new(Frac::new(0, 1), false, 4).is_err());
        assert!(BlockStructure::new(Frac::new(1, 1), false, 4).is_err());
        assert!(BlockStructure::new(Frac::new(3, 2), false, 4).is_err());
    }

    #[test]
    fn start_recurrence_holds() {
        let bs = BlockStructure::new(Frac::new(1, 3), true, 64).unwrap();
        for k in 1..64u64 {
            assert_eq!(bs.start(k + 1), bs.start(k) + bs.size(k));
        }
        assert_eq!(bs.size(1), 1);
    }

    #[test]
    fn block_lookup() {
        let bs = BlockStructure::new(Frac::new(1, 2), false, 5).unwrap();
        assert_eq!(bs.block_of(1), Some((1, 0)));
        assert_eq!(bs.block_of(2), Some((2, 0)));
        assert_eq!(bs.block_of(3), Some((2, 1)));
        assert_eq!(bs.block_of(10), Some((4, 3)));
        assert_eq!(bs.block_of(0), None);
        assert_eq!(bs.block_of(16), None);
    }

    #[test]
    fn parse_frac_forms() {
        assert_eq!(parse_frac("1/2").unwrap(), Frac::new(1, 2));
        assert_eq!(parse_frac("0.5").unwrap(), Frac::new(1, 2));
        assert_eq!(parse_frac("0.25").unwrap(), Frac::new(1, 4));
        assert!(parse_frac("x").is_err());
        assert!(parse_frac("1/0").is_err());
    }
}
