//! Word recipes for the standard matrix units of each diagonal block, and
//! cross-element recipes linking consecutive blocks.
//!
//! The scheme, for a padded structure:
//!
//! 1. **In-block addressing.** Walking from in-block offset 0 to offset `d`
//!    uses the binary expansion of `d` Horner-style: `B'` doubles the offset,
//!    `u'` adds one. Cost: two letters per bit.
//! 2. **Size filtering.** The word `G_m = q X' X q` (with `X` the addressing
//!    word for offset `2^m - 1`) is the diagonal indicator of starts of
//!    blocks of size at least `2^m`: the addressing walk falls off the end of
//!    any smaller block. `D = G_m - G_{m+1}` pins the starts of size-`2^m`
//!    blocks exactly: the run of such blocks is consecutive and equally
//!    spaced, so shifting `D`'s support with global shifts and intersecting
//!    isolates one member: conjugates of `D` by `s^(j*2^m)` from both ends of
//!    the run meet in the single entry at `b_k`.
//! 3. **Units and crosses.** `e_{ij}` in block `k` is the addressing sandwich
//!    around the isolated start, and the cross element into block `k+1` tacks
//!    a global shift onto the isolated start of the next block.
//!
//! Everything is verified by exact window multiplication; no step of the
//! construction is trusted without it.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::construct::generators::{default_generators, Gen, GeneratorSet};
use crate::construct::structure::{BlockStructure, Frac};
use crate::construct::words::{Combination, EvalCache, Word};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::lazy::LazyMatrix;
use crate::window::WindowMatrix;

/// Word in `u'`, `B'` mapping in-block offset 0 to offset `d` (and killing
/// any start whose block is too small to hold `d`).
pub fn address_word(d: u64) -> Word {
    let mut actions: Vec<(Gen, u64)> = Vec::new();
    if d > 0 {
        let bits = 64 - d.leading_zeros();
        // Most significant bit first: offset starts at 1.
        actions.push((Gen::UTr, 1));
        for b in (0..bits - 1).rev() {
            actions.push((Gen::DblTr, 1));
            if (d >> b) & 1 == 1 {
                actions.push((Gen::UTr, 1));
            }
        }
    }
    // Actions apply right-to-left in a matrix product.
    let mut w = Word::empty();
    for (g, e) in actions.into_iter().rev() {
        w.push(g, e);
    }
    w
}

/// `G_m`: diagonal indicator of starts of blocks of size `>= 2^m`.
pub fn size_filter_word(m: u32) -> Word {
    if m == 0 {
        return Word::letter(Gen::Q);
    }
    let x = address_word((1u64 << m) - 1);
    let mut w = Word::letter(Gen::Q);
    w = w.concat(&x.transpose()).concat(&x);
    w.push(Gen::Q, 1);
    w
}

/// `D`: diagonal indicator of starts of blocks of size exactly `2^m`.
pub fn run_indicator(m: u32) -> Combination {
    Combination::difference(size_filter_word(m), size_filter_word(m + 1))
}

/// Conjugates a diagonal combination so its support shifts right by `c`.
fn shift_support_right(d: &Combination, c: u64) -> Combination {
    if c == 0 {
        return d.clone();
    }
    d.premul(&Word::power(Gen::STr, c)).postmul(&Word::power(Gen::S, c))
}

/// Conjugates a diagonal combination so its support shifts left by `c`.
fn shift_support_left(d: &Combination, c: u64) -> Combination {
    if c == 0 {
        return d.clone();
    }
    d.premul(&Word::power(Gen::S, c)).postmul(&Word::power(Gen::STr, c))
}

/// Combination evaluating to the single entry at `(b_k, b_k)`.
///
/// Needs the run of equal-size blocks around `k` to be completely contained
/// in the computed structure; see [`recipe_structure`].
pub fn block_start_combination(bs: &BlockStructure, k: u64) -> Result<Combination> {
    if !bs.padded() {
        return Err(Error::PaddingRequired);
    }
    if k == 0 || k as usize > bs.len() {
        return Err(Error::OutOfRange(format!("block {k} beyond computed structure")));
    }
    let size = bs.size(k);
    let m = size.trailing_zeros();
    let (first, last) = bs.run_of_size(size).expect("k's own size is present");
    if last as usize == bs.len() {
        // The run touches the structure boundary, so its true extent is
        // unknown and the two-sided pinning below would be unsound.
        return Err(Error::OutOfRange(format!(
            "the run of size-{size} blocks around block {k} is not complete in the computed structure"
        )));
    }
    let d = run_indicator(m);
    let j = k - first; // members of the run before k
    let i = last - k; // members after k
    if j == 0 && i == 0 {
        return Ok(d);
    }
    let left = shift_support_right(&d, j * size);
    let right = shift_support_left(&d, i * size);
    if j == 0 {
        Ok(d.mul(&right))
    } else if i == 0 {
        Ok(left.mul(&d))
    } else {
        Ok(left.mul(&right))
    }
}

/// A verified-by-construction combination for one standard matrix unit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixUnitRecipe {
    pub k: u64,
    pub i: u64,
    pub j: u64,
    pub combination: Combination,
    /// Longest word in the combination, in letters.
    pub letters: u64,
    /// Straight-line product count with squared powers.
    pub products: u64,
    /// Number of words in the combination.
    pub words: usize,
}

/// Builds the recipe for `e_{ij}` inside block `k` (both indices 1-based,
/// at most `n_k`).
pub fn matrix_unit_recipe(bs: &BlockStructure, k: u64, i: u64, j: u64) -> Result<MatrixUnitRecipe> {
    let n_k = bs.size(k);
    if i == 0 || j == 0 || i > n_k || j > n_k {
        return Err(Error::OutOfRange(format!(
            "unit ({i}, {j}) outside block {k} of size {n_k}"
        )));
    }
    let start = block_start_combination(bs, k)?;
    let left = address_word(i - 1);
    let right = address_word(j - 1).transpose();
    let combination = start.premul(&left).postmul(&right);
    if combination.len() > 8 {
        return Err(Error::RecipeNotFound { k, i, j });
    }
    Ok(MatrixUnitRecipe {
        k,
        i,
        j,
        letters: combination.max_letters(),
        products: combination.products(),
        words: combination.len(),
        combination,
    })
}

/// Cross-element recipes between blocks `k` and `k+1`: `gamma` evaluates to
/// the single entry at `(b_{k+1}, b_k)` and `gamma_transpose` to its mirror,
/// so `gamma' * gamma` and `gamma * gamma'` are the two corner idempotents.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CrossElement {
    pub k: u64,
    pub gamma: Combination,
    pub gamma_transpose: Combination,
    pub letters: u64,
    pub products: u64,
}

pub fn cross_element(bs: &BlockStructure, k: u64) -> Result<CrossElement> {
    if k == 0 || (k + 1) as usize > bs.len() {
        return Err(Error::OutOfRange(format!(
            "cross element needs blocks {k} and {} inside the computed structure",
            k + 1
        )));
    }
    let next_start = block_start_combination(bs, k + 1)?;
    // Rows pinned to b_{k+1}; the global shift lands columns n_k earlier,
    // and q keeps only the block-start column, which is b_k exactly.
    let mut tail = Word::power(Gen::STr, bs.size(k));
    tail.push(Gen::Q, 1);
    let gamma = next_start.postmul(&tail);
    let gamma_transpose = gamma.transpose();
    Ok(CrossElement {
        k,
        letters: gamma.max_letters(),
        products: gamma.products(),
        gamma,
        gamma_transpose,
    })
}

/// The standard primitive diagonal idempotents of block `k`.
#[derive(Debug, Clone)]
pub struct IdempotentFamily<F: Field> {
    pub k: u64,
    members: Vec<LazyMatrix<F>>,
    positions: Vec<u64>,
}

impl<F: Field> IdempotentFamily<F> {
    pub fn members(&self) -> &[LazyMatrix<F>] {
        &self.members
    }

    /// Diagonal positions of the members.
    pub fn positions(&self) -> &[u64] {
        &self.positions
    }
}

pub fn idempotent_family<F: Field>(
    field: F,
    bs: &BlockStructure,
    k: u64,
) -> Result<IdempotentFamily<F>> {
    if k == 0 || k as usize > bs.len() {
        return Err(Error::OutOfRange(format!("block {k} beyond computed structure")));
    }
    let start = bs.start(k);
    let positions: Vec<u64> = (0..bs.size(k)).map(|o| start + o).collect();
    let members = positions
        .iter()
        .map(|&p| LazyMatrix::unit(field.clone(), p, p))
        .collect();
    Ok(IdempotentFamily { k, members, positions })
}

/// Builds a padded structure adequate for recipes up to `k_max`: the runs of
/// equal sizes around every needed block are complete, and the computed
/// blocks cover at least `window` positions.
pub fn recipe_structure(r: Frac, k_max: u64, window: u64) -> Result<Arc<BlockStructure>> {
    let mut count = (k_max as usize + 2).max(8);
    loop {
        let bs = BlockStructure::new(r, true, count)?;
        let probe = bs.size(k_max + 1);
        let run_done = bs.sizes().last().copied().unwrap_or(0) > probe;
        if run_done && bs.end(bs.len() as u64) >= window {
            return Ok(Arc::new(bs));
        }
        count *= 2;
        if count > 1 << 24 {
            return Err(Error::WindowExhausted {
                window,
                context: "recipe structure grew unreasonably".into(),
            });
        }
    }
}

/// Window size that keeps every recipe's exact region covering its target
/// block after all the margin shrinkage of word evaluation.
///
/// A recipe's letters move positions by at most `2 * span + O(block size)`
/// in total; the certified-band bookkeeping charges that sum once while
/// evaluating and up to twice more in the final products and transposes, so
/// the window budgets three times the displacement over the needed prefix.
pub fn recommended_window(bs: &BlockStructure, k_max: u64) -> u64 {
    let hi = ((k_max + 2) as usize).min(bs.len()) as u64;
    let needed = bs.end(hi);
    let mut extra = 0u64;
    for k in 1..=hi.min(bs.len() as u64) {
        let size = bs.size(k);
        if let Some((first, last)) = bs.run_of_size(size) {
            let span = (last - first) * size;
            extra = extra.max(2 * span + 16 * size);
        }
    }
    needed + 3 * extra + 64
}

/// Working window: large enough to cover the needed blocks plus the
/// certified-band drag of the cached start windows, small enough that the
/// per-unit products stay cheap.
fn work_window(bs: &BlockStructure, k_max: u64, factor: u64) -> u64 {
    let hi = ((k_max + 2) as usize).min(bs.len()) as u64;
    let needed = bs.end(hi);
    let mut extra = 0u64;
    for k in 1..=hi {
        let size = bs.size(k);
        if let Some((first, last)) = bs.run_of_size(size) {
            let span = (last - first) * size;
            extra = extra.max(2 * span + 16 * size);
        }
    }
    (needed + extra + 64) * factor
}

/// Evaluator for recipes with per-block caching of the isolated start, the
/// addressing windows, and the left half-products, so bulk verification
/// costs one window product per matrix unit.
pub struct RecipeBook<F: Field> {
    /// Full-size window, used only to isolate block starts.
    cache: EvalCache<F>,
    /// Working window for addressing products and verification.
    work: EvalCache<F>,
    starts: BTreeMap<u64, WindowMatrix<F>>,
    lefts: BTreeMap<(u64, u64), WindowMatrix<F>>,
    addr: BTreeMap<u64, WindowMatrix<F>>,
    addr_t: BTreeMap<u64, WindowMatrix<F>>,
    k_max: u64,
}

impl<F: Field> RecipeBook<F> {
    /// Builds the default generators over an adequate padded structure and
    /// sizes the evaluation window for recipes up to `k_max`.
    ///
    /// The displacement budget of a recipe depends on block sizes near the
    /// positions its shifts visit, which in turn depend on the window, so the
    /// size is settled adaptively: double until the worst recipe for `k_max`
    /// verifies with margin to spare.
    pub fn with_defaults(field: F, r: Frac, k_max: u64) -> Result<RecipeBook<F>> {
        let mut factor = 1u64;
        loop {
            let seed = recipe_structure(r, k_max, 1)?;
            let window = recommended_window(&seed, k_max) * factor;
            let bs = recipe_structure(r, k_max, window)?;
            let gs = default_generators(field.clone(), &bs)?;
            let cache = EvalCache::new(&gs, window)?;
            let work = EvalCache::new(&gs, work_window(&bs, k_max, factor).min(window))?;
            let mut book = RecipeBook {
                cache,
                work,
                starts: BTreeMap::new(),
                lefts: BTreeMap::new(),
                addr: BTreeMap::new(),
                addr_t: BTreeMap::new(),
                k_max,
            };
            let n_max = book.structure().size(k_max);
            // Worst cases the book is contracted for: the last unit block and
            // the cross recipe out of the block before it.
            let probe = book
                .verify_cross(k_max.max(2) - 1)
                .and_then(|_| book.verify_unit(k_max, n_max, n_max));
            match probe {
                Ok(_) => return Ok(book),
                Err(Error::WindowExhausted { .. }) if factor < 32 => factor *= 2,
                Err(e) => return Err(e),
            }
        }
    }

    pub fn from_generators(gs: &GeneratorSet<F>, window: u64, k_max: u64) -> Result<RecipeBook<F>> {
        Ok(RecipeBook {
            cache: EvalCache::new(gs, window)?,
            work: EvalCache::new(gs, work_window(gs.structure(), k_max, 1).min(window))?,
            starts: BTreeMap::new(),
            lefts: BTreeMap::new(),
            addr: BTreeMap::new(),
            addr_t: BTreeMap::new(),
            k_max,
        })
    }

    pub fn structure(&self) -> &Arc<BlockStructure> {
        self.cache.generators().structure()
    }

    pub fn window_size(&self) -> u64 {
        self.cache.window_size()
    }

    pub fn k_max(&self) -> u64 {
        self.k_max
    }

    pub fn field(&self) -> F {
        self.cache.generators().field().clone()
    }

    /// Size of the window verification artifacts live on.
    pub fn work_window_size(&self) -> u64 {
        self.work.window_size()
    }

    /// The target single-entry window for `e_{ij}` of block `k`.
    pub fn expected_unit(&self, k: u64, i: u64, j: u64) -> WindowMatrix<F> {
        let bs = self.structure();
        let p = bs.start(k) + i - 1;
        let q = bs.start(k) + j - 1;
        WindowMatrix::unit(self.field(), self.work.window_size(), p, q)
    }

    /// Cached evaluation of the isolated block start `e_{b_k, b_k}`,
    /// computed on the full window and truncated to the working window.
    pub fn block_start_window(&mut self, k: u64) -> Result<WindowMatrix<F>> {
        if let Some(w) = self.starts.get(&k) {
            return Ok(w.clone());
        }
        let combo = block_start_combination(self.structure(), k)?;
        let w = self.cache.eval(&combo)?.truncate(self.work.window_size());
        self.starts.insert(k, w.clone());
        Ok(w)
    }

    /// Window of the addressing word for `offset`, memoized.
    fn addr_window(&mut self, offset: u64, transposed: bool) -> Result<WindowMatrix<F>> {
        let memo = if transposed { &self.addr_t } else { &self.addr };
        if let Some(w) = memo.get(&offset) {
            return Ok(w.clone());
        }
        let word = if transposed {
            address_word(offset).transpose()
        } else {
            address_word(offset)
        };
        let w = self.work.eval_word(&word)?;
        let memo = if transposed { &mut self.addr_t } else { &mut self.addr };
        memo.insert(offset, w.clone());
        Ok(w)
    }

    /// `address(i-1) * D_k`, memoized: a single-column window from which any
    /// unit of the block is one product away.
    fn left_product(&mut self, k: u64, i: u64) -> Result<WindowMatrix<F>> {
        if let Some(w) = self.lefts.get(&(k, i)) {
            return Ok(w.clone());
        }
        let start = self.block_start_window(k)?;
        let w = if i == 1 {
            start
        } else {
            self.addr_window(i - 1, false)?.mul(&start)?
        };
        self.lefts.insert((k, i), w.clone());
        Ok(w)
    }

    /// Evaluates the unit recipe (isolated start cached per block, address
    /// words folded around it by associativity).
    pub fn eval_unit(&mut self, k: u64, i: u64, j: u64) -> Result<(MatrixUnitRecipe, WindowMatrix<F>)> {
        let recipe = matrix_unit_recipe(self.structure(), k, i, j)?;
        let left = self.left_product(k, i)?;
        let value = if j == 1 {
            left
        } else {
            left.mul(&self.addr_window(j - 1, true)?)?
        };
        Ok((recipe, value))
    }

    /// Evaluates and demands exact equality with the single-entry target on
    /// a region covering the whole block.
    pub fn verify_unit(&mut self, k: u64, i: u64, j: u64) -> Result<MatrixUnitRecipe> {
        let (recipe, value) = self.eval_unit(k, i, j)?;
        let bs = self.structure().clone();
        let required = bs.end(k);
        if value.valid_to() < required {
            return Err(Error::WindowExhausted {
                window: self.window_size(),
                context: format!(
                    "unit ({k}, {i}, {j}): exact region {} does not cover block end {required}",
                    value.valid_to()
                ),
            });
        }
        // The exact rows must hold the single target entry and nothing else.
        let p = bs.start(k) + i - 1;
        let q = bs.start(k) + j - 1;
        let field = self.field();
        if value.nnz_on_rows(required) != 1 || value.get(p, q) != field.one() {
            return Err(Error::RecipeNotFound { k, i, j });
        }
        Ok(recipe)
    }

    /// Evaluates the cross recipes for `k -> k+1`.
    pub fn eval_cross(&mut self, k: u64) -> Result<(CrossElement, WindowMatrix<F>, WindowMatrix<F>)> {
        let cross = cross_element(self.structure(), k)?;
        let bs = self.structure().clone();
        let start_next = self.block_start_window(k + 1)?;
        let mut tail = Word::power(Gen::STr, bs.size(k));
        tail.push(Gen::Q, 1);
        let gamma = self.work.eval_sandwich(&Word::empty(), &start_next, &tail)?;
        let gamma_t = gamma.transpose();
        Ok((cross, gamma, gamma_t))
    }

    /// Full cross verification: single-entry values and both corner
    /// idempotent identities, all exact.
    pub fn verify_cross(&mut self, k: u64) -> Result<CrossElement> {
        let (cross, gamma, gamma_t) = self.eval_cross(k)?;
        let bs = self.structure().clone();
        let (b_k, b_next) = (bs.start(k), bs.start(k + 1));
        let required = b_next;
        if gamma.valid_to() < required {
            return Err(Error::WindowExhausted {
                window: self.window_size(),
                context: format!("cross {k}: exact region stops before {required}"),
            });
        }
        let n = self.work.window_size();
        let field = self.field();
        if !gamma.eq_on_rows(&WindowMatrix::unit(field.clone(), n, b_next, b_k), required) {
            return Err(Error::RecipeNotFound { k, i: 1, j: 1 });
        }
        let forward = gamma.mul(&gamma_t)?;
        let backward = gamma_t.mul(&gamma)?;
        let e_next = WindowMatrix::unit(field.clone(), n, b_next, b_next);
        let e_here = WindowMatrix::unit(field, n, b_k, b_k);
        if !forward.eq_on_rows(&e_next, forward.valid_to().min(required))
            || !backward.eq_on_rows(&e_here, backward.valid_to().min(required))
        {
            return Err(Error::RecipeNotFound { k, i: 1, j: 1 });
        }
        Ok(cross)
    }

    /// Reference evaluation straight from the combination, no caching.
    pub fn eval_combination(&mut self, c: &Combination) -> Result<WindowMatrix<F>> {
        self.cache.eval(c)
    }
}
