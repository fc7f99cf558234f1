//! The default eight-generator set over a padded block structure.
//!
//! Names and roles:
//!
//! | name | matrix |
//! |------|--------|
//! | `s`  | global one-step shift, entries at `(i, i+1)` |
//! | `s'` | its transpose |
//! | `u`  | in-block one-step shift |
//! | `u'` | its transpose |
//! | `B`  | in-block doubling, in-block entries `(j, 2j-1)` |
//! | `B'` | its transpose |
//! | `q`  | diagonal marker of block starts |
//! | `h`  | block-diagonal bit-reversal ("binary search") permutations |
//!
//! `s`, `s'`, `u`, `u'`, `q` have bounded bandwidth; `B`, `B'`, `h` spread
//! across whole blocks and carry the genuine `n^r` growth. Padding block
//! sizes to powers of two is what makes in-block binary addressing by `B'`
//! and `u'` exact, so the set refuses unpadded structures.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::construct::structure::BlockStructure;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::GrowthCurve;
use crate::lazy::LazyMatrix;
use crate::window::WindowMatrix;

/// Names of the default generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gen {
    /// Global shift `s`.
    S,
    /// `s` transposed.
    STr,
    /// In-block shift `u`.
    U,
    /// `u` transposed.
    UTr,
    /// In-block doubling `B`.
    Dbl,
    /// `B` transposed.
    DblTr,
    /// Diagonal block-start marker `q`.
    Q,
    /// Blockwise bit-reversal `h`.
    H,
}

impl Gen {
    pub const ALL: [Gen; 8] = [
        Gen::S,
        Gen::STr,
        Gen::U,
        Gen::UTr,
        Gen::Dbl,
        Gen::DblTr,
        Gen::Q,
        Gen::H,
    ];

    pub fn transpose(self) -> Gen {
        match self {
            Gen::S => Gen::STr,
            Gen::STr => Gen::S,
            Gen::U => Gen::UTr,
            Gen::UTr => Gen::U,
            Gen::Dbl => Gen::DblTr,
            Gen::DblTr => Gen::Dbl,
            Gen::Q => Gen::Q,
            Gen::H => Gen::H,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Gen::S => "s",
            Gen::STr => "s'",
            Gen::U => "u",
            Gen::UTr => "u'",
            Gen::Dbl => "B",
            Gen::DblTr => "B'",
            Gen::Q => "q",
            Gen::H => "h",
        }
    }
}

impl fmt::Display for Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Reverses the lowest `bits` bits of `x`.
fn bit_reverse(x: u64, bits: u32) -> u64 {
    let mut out = 0u64;
    for b in 0..bits {
        out |= ((x >> b) & 1) << (bits - 1 - b);
    }
    out
}

/// The eight generators over a padded structure, with per-generator growth
/// verification helpers.
#[derive(Clone)]
pub struct GeneratorSet<F: Field> {
    field: F,
    bs: Arc<BlockStructure>,
    lazies: Vec<(Gen, LazyMatrix<F>)>,
}

/// Builds the named generator set. Errors with [`Error::PaddingRequired`] on
/// unpadded structures.
pub fn default_generators<F: Field>(field: F, bs: &Arc<BlockStructure>) -> Result<GeneratorSet<F>> {
    if !bs.padded() {
        return Err(Error::PaddingRequired);
    }
    let flat = GrowthCurve::power(1.0, 0.0);
    let wide = || GrowthCurve::power(bs.growth_constant(), bs.r_f64());
    let mut lazies: Vec<(Gen, LazyMatrix<F>)> = Vec::with_capacity(8);

    {
        let f = field.clone();
        lazies.push((
            Gen::S,
            LazyMatrix::new("s", field.clone(), flat.clone(), move |i, j| {
                if j == i + 1 {
                    f.one()
                } else {
                    f.zero()
                }
            }),
        ));
    }
    {
        let f = field.clone();
        lazies.push((
            Gen::STr,
            LazyMatrix::new("s'", field.clone(), flat.clone(), move |i, j| {
                if i == j + 1 {
                    f.one()
                } else {
                    f.zero()
                }
            }),
        ));
    }
    {
        let f = field.clone();
        let b = bs.clone();
        lazies.push((
            Gen::U,
            LazyMatrix::new("u", field.clone(), flat.clone(), move |i, j| {
                if j == i + 1 && same_block(&b, i, j) {
                    f.one()
                } else {
                    f.zero()
                }
            }),
        ));
    }
    {
        let f = field.clone();
        let b = bs.clone();
        lazies.push((
            Gen::UTr,
            LazyMatrix::new("u'", field.clone(), flat.clone(), move |i, j| {
                if i == j + 1 && same_block(&b, i, j) {
                    f.one()
                } else {
                    f.zero()
                }
            }),
        ));
    }
    // Block-diagonal generators never reach past their own block, which is a
    // far tighter margin than the analytic curve; windows use it directly.
    let block_reach = |b: Arc<BlockStructure>| {
        move |k: u64| match b.block_of(k) {
            Some((kb, off)) => b.size(kb) - 1 - off,
            None => 0,
        }
    };
    {
        let f = field.clone();
        let b = bs.clone();
        lazies.push((
            Gen::Dbl,
            LazyMatrix::new("B", field.clone(), wide(), move |i, j| {
                match (b.block_of(i), b.block_of(j)) {
                    (Some((ki, oi)), Some((kj, oj))) if ki == kj && oj == 2 * oi => f.one(),
                    _ => f.zero(),
                }
            })
            .with_reach_rule(block_reach(bs.clone())),
        ));
    }
    {
        let f = field.clone();
        let b = bs.clone();
        lazies.push((
            Gen::DblTr,
            LazyMatrix::new("B'", field.clone(), wide(), move |i, j| {
                match (b.block_of(i), b.block_of(j)) {
                    (Some((ki, oi)), Some((kj, oj))) if ki == kj && oi == 2 * oj => f.one(),
                    _ => f.zero(),
                }
            })
            .with_reach_rule(block_reach(bs.clone())),
        ));
    }
    {
        let f = field.clone();
        let b = bs.clone();
        lazies.push((
            Gen::Q,
            LazyMatrix::new("q", field.clone(), flat, move |i, j| {
                if i == j && matches!(b.block_of(i), Some((_, 0))) {
                    f.one()
                } else {
                    f.zero()
                }
            })
            .with_reach_rule(|_| 0),
        ));
    }
    {
        let f = field.clone();
        let b = bs.clone();
        lazies.push((
            Gen::H,
            LazyMatrix::new("h", field.clone(), wide(), move |i, j| {
                match (b.block_of(i), b.block_of(j)) {
                    (Some((ki, oi)), Some((kj, oj))) if ki == kj => {
                        let bits = b.size(ki).trailing_zeros();
                        if bit_reverse(oi, bits) == oj {
                            f.one()
                        } else {
                            f.zero()
                        }
                    }
                    _ => f.zero(),
                }
            })
            .with_reach_rule(block_reach(bs.clone())),
        ));
    }

    Ok(GeneratorSet { field, bs: bs.clone(), lazies })
}

fn same_block(bs: &BlockStructure, i: u64, j: u64) -> bool {
    match (bs.block_of(i), bs.block_of(j)) {
        (Some((ki, _)), Some((kj, _))) => ki == kj,
        _ => false,
    }
}

/// Per-generator growth verdict for a fixed exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorGrowth {
    pub name: String,
    pub minimal_constant: f64,
    pub declared_constant: f64,
    pub ok: bool,
}

impl<F: Field> GeneratorSet<F> {
    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn structure(&self) -> &Arc<BlockStructure> {
        &self.bs
    }

    pub fn lazy(&self, g: Gen) -> &LazyMatrix<F> {
        &self.lazies.iter().find(|(name, _)| *name == g).expect("all generators present").1
    }

    /// Largest window the computed blocks can serve.
    pub fn max_window(&self) -> u64 {
        self.bs.end(self.bs.len() as u64)
    }

    pub fn window(&self, g: Gen, n: u64) -> Result<WindowMatrix<F>> {
        if n > self.max_window() {
            return Err(Error::WindowExhausted {
                window: n,
                context: format!(
                    "generator set only covers positions up to {}",
                    self.max_window()
                ),
            });
        }
        self.lazy(g).window(n)
    }

    /// Checks every generator against `c * n^r` with its declared constant.
    pub fn verify_growth(&self, window: u64) -> Result<Vec<GeneratorGrowth>> {
        let r = self.bs.r_f64();
        let mut out = Vec::with_capacity(8);
        for (g, lazy) in &self.lazies {
            let w = self.window(*g, window)?;
            let declared = match lazy.declared_curve() {
                GrowthCurve::Power { c, .. } => *c,
                _ => self.bs.growth_constant(),
            };
            let minimal = crate::growth::minimal_constant(&w, r);
            out.push(GeneratorGrowth {
                name: g.label().to_string(),
                minimal_constant: minimal,
                declared_constant: declared,
                ok: w.verify_growth(declared, r),
            });
        }
        Ok(out)
    }
}

impl<F: Field> fmt::Debug for GeneratorSet<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratorSet")
            .field("r", &self.bs.r())
            .field("blocks", &self.bs.len())
            .finish()
    }
}
