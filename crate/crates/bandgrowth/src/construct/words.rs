//! Words in the named generators and integer combinations of words, with an
//! exact window evaluator.
//!
//! A word is a product of generator letters; it is stored run-length
//! compressed, so `s^480 q` is two factors but 481 letters. Two lengths are
//! tracked:
//!
//! * `letters`: the plain letter count (a word of `L` letters costs `L - 1`
//!   products without reuse);
//! * `products`: multiplications needed when powers are built by repeated
//!   squaring and factors reuse them, the straight-line count.
//!
//! Reaching block `k` needs words of `Θ(b_k^(1-r))` letters: a product of
//! banded factors can move a position by at most its own bandwidth, so letter
//! counts along the diagonal integrate to a power of the target position.
//! Squaring is what collapses that to logarithms, hence the two counters.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::construct::generators::{Gen, GeneratorSet};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::window::WindowMatrix;

/// A product of generator powers, in matrix-product order (leftmost factor
/// applied last).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word {
    factors: Vec<(Gen, u64)>,
}

impl Word {
    /// The empty word, i.e. the identity.
    pub fn empty() -> Word {
        Word { factors: Vec::new() }
    }

    pub fn letter(g: Gen) -> Word {
        Word { factors: vec![(g, 1)] }
    }

    pub fn power(g: Gen, e: u64) -> Word {
        if e == 0 {
            Word::empty()
        } else {
            Word { factors: vec![(g, e)] }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Gen, u64)] {
        &self.factors
    }

    /// Appends one factor on the right, merging adjacent equal generators.
    pub fn push(&mut self, g: Gen, e: u64) {
        if e == 0 {
            return;
        }
        if let Some(last) = self.factors.last_mut() {
            if last.0 == g {
                last.1 += e;
                return;
            }
        }
        self.factors.push((g, e));
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.clone();
        for (g, e) in &other.factors {
            out.push(*g, *e);
        }
        out
    }

    /// Transpose: reversed order, each letter transposed.
    pub fn transpose(&self) -> Word {
        let mut out = Word::empty();
        for (g, e) in self.factors.iter().rev() {
            out.push(g.transpose(), *e);
        }
        out
    }

    /// Total letter count.
    pub fn letters(&self) -> u64 {
        self.factors.iter().map(|(_, e)| e).sum()
    }

    /// Straight-line product count with squaring-based powers: each factor
    /// `g^e` costs `floor(log2 e) + popcount(e) - 1` multiplications, plus
    /// one per junction between factors.
    pub fn products(&self) -> u64 {
        if self.factors.is_empty() {
            return 0;
        }
        let pow_cost = |e: u64| -> u64 {
            if e <= 1 {
                0
            } else {
                (63 - e.leading_zeros()) as u64 + e.count_ones() as u64 - 1
            }
        };
        let factor_cost: u64 = self.factors.iter().map(|(_, e)| pow_cost(*e)).sum();
        factor_cost + self.factors.len() as u64 - 1
    }

    /// Human-readable form like `s'^3 q u`.
    pub fn display(&self) -> String {
        if self.factors.is_empty() {
            return "1".to_string();
        }
        self.factors
            .iter()
            .map(|(g, e)| {
                if *e == 1 {
                    g.label().to_string()
                } else {
                    format!("{}^{}", g.label(), e)
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// An integer linear combination of words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Combination {
    terms: Vec<(i64, Word)>,
}

impl Combination {
    pub fn from_word(w: Word) -> Combination {
        Combination { terms: vec![(1, w)] }
    }

    pub fn new(terms: Vec<(i64, Word)>) -> Combination {
        Combination { terms }
    }

    pub fn terms(&self) -> &[(i64, Word)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Difference of two words.
    pub fn difference(a: Word, b: Word) -> Combination {
        Combination { terms: vec![(1, a), (-1, b)] }
    }

    /// Left-multiplies every term by `w`.
    pub fn premul(&self, w: &Word) -> Combination {
        Combination {
            terms: self.terms.iter().map(|(c, t)| (*c, w.concat(t))).collect(),
        }
    }

    /// Right-multiplies every term by `w`.
    pub fn postmul(&self, w: &Word) -> Combination {
        Combination {
            terms: self.terms.iter().map(|(c, t)| (*c, t.concat(w))).collect(),
        }
    }

    /// Product of two combinations (term-by-term cross product).
    pub fn mul(&self, other: &Combination) -> Combination {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (ca, wa) in &self.terms {
            for (cb, wb) in &other.terms {
                terms.push((ca * cb, wa.concat(wb)));
            }
        }
        Combination { terms }
    }

    pub fn transpose(&self) -> Combination {
        Combination {
            terms: self.terms.iter().map(|(c, w)| (*c, w.transpose())).collect(),
        }
    }

    /// Longest word in the combination, in letters.
    pub fn max_letters(&self) -> u64 {
        self.terms.iter().map(|(_, w)| w.letters()).max().unwrap_or(0)
    }

    /// Straight-line product count to obtain the combination, with generator
    /// powers built once by squaring and shared across all words; each word
    /// then pays one product per factor junction. Scalar combination is
    /// addition and costs no products.
    pub fn products(&self) -> u64 {
        let mut powers: std::collections::BTreeSet<(Gen, u64)> = std::collections::BTreeSet::new();
        let mut joins = 0u64;
        for (_, w) in &self.terms {
            let factors = w.factors();
            if factors.is_empty() {
                continue;
            }
            joins += factors.len() as u64 - 1;
            for (g, e) in factors {
                powers.insert((*g, *e));
            }
        }
        let pow_cost = |e: u64| -> u64 {
            if e <= 1 {
                0
            } else {
                (63 - e.leading_zeros()) as u64 + e.count_ones() as u64 - 1
            }
        };
        joins + powers.iter().map(|(_, e)| pow_cost(*e)).sum::<u64>()
    }

    pub fn display(&self) -> String {
        let mut out = String::new();
        for (idx, (c, w)) in self.terms.iter().enumerate() {
            let sign = if *c < 0 { "-" } else if idx > 0 { "+" } else { "" };
            let mag = c.unsigned_abs();
            if idx > 0 {
                out.push(' ');
            }
            out.push_str(sign);
            if idx > 0 {
                out.push(' ');
            }
            if mag != 1 {
                out.push_str(&format!("{mag}*"));
            }
            out.push_str(&w.display());
        }
        out
    }
}

/// Window evaluator with memoized generator powers (computed by repeated
/// squaring, each step an exact window product).
pub struct EvalCache<F: Field> {
    gs: GeneratorSet<F>,
    window: u64,
    powers: BTreeMap<(Gen, u64), WindowMatrix<F>>,
}

impl<F: Field> EvalCache<F> {
    pub fn new(gs: &GeneratorSet<F>, window: u64) -> Result<EvalCache<F>> {
        if window > gs.max_window() {
            return Err(Error::WindowExhausted {
                window,
                context: format!(
                    "generator structure covers only positions up to {}",
                    gs.max_window()
                ),
            });
        }
        Ok(EvalCache { gs: gs.clone(), window, powers: BTreeMap::new() })
    }

    pub fn window_size(&self) -> u64 {
        self.window
    }

    pub fn generators(&self) -> &GeneratorSet<F> {
        &self.gs
    }

    pub fn identity(&self) -> WindowMatrix<F> {
        WindowMatrix::identity(self.gs.field().clone(), self.window)
    }

    /// `g^e` on the window, memoized.
    pub fn power(&mut self, g: Gen, e: u64) -> Result<WindowMatrix<F>> {
        assert!(e >= 1);
        if let Some(w) = self.powers.get(&(g, e)) {
            return Ok(w.clone());
        }
        let value = if e == 1 {
            self.gs.window(g, self.window)?
        } else if e % 2 == 0 {
            let half = self.power(g, e / 2)?;
            half.mul(&half)?
        } else {
            let prev = self.power(g, e - 1)?;
            let one = self.power(g, 1)?;
            prev.mul(&one)?
        };
        self.powers.insert((g, e), value.clone());
        Ok(value)
    }

    /// Evaluates a word right-to-left from cached powers. The product margin
    /// rule charges the left operand's certified band, so folding from the
    /// right keeps every step's cost at one generator's displacement instead
    /// of the accumulated reach of a long prefix.
    pub fn eval_word(&mut self, w: &Word) -> Result<WindowMatrix<F>> {
        let mut acc: Option<WindowMatrix<F>> = None;
        for (g, e) in w.factors().iter().rev() {
            let p = self.power(*g, *e)?;
            acc = Some(match acc {
                None => p,
                Some(a) => p.mul(&a)?,
            });
        }
        Ok(acc.unwrap_or_else(|| self.identity()))
    }

    /// Evaluates a combination: scaled word evaluations, summed.
    pub fn eval(&mut self, c: &Combination) -> Result<WindowMatrix<F>> {
        let field = self.gs.field().clone();
        let mut acc = WindowMatrix::zero(field.clone(), self.window);
        for (coeff, w) in c.terms() {
            let v = self.eval_word(w)?;
            let scaled = v.scale(&field.from_i64(*coeff));
            acc = acc.add(&scaled)?;
        }
        Ok(acc)
    }

    /// Folds a pre-evaluated middle window between a left and right word:
    /// `eval(left) * middle * eval(right)`. Association only: the result
    /// equals evaluating the full word product.
    pub fn eval_sandwich(
        &mut self,
        left: &Word,
        middle: &WindowMatrix<F>,
        right: &Word,
    ) -> Result<WindowMatrix<F>> {
        let mut acc = middle.clone();
        if !left.is_empty() {
            let l = self.eval_word(left)?;
            acc = l.mul(&acc)?;
        }
        if !right.is_empty() {
            let r = self.eval_word(right)?;
            acc = acc.mul(&r)?;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::generators::default_generators;
    use crate::construct::structure::{BlockStructure, Frac};
    use crate::field::Gfp;
    use std::sync::Arc;

    fn cache() -> EvalCache<Gfp> {
        let bs = Arc::new(BlockStructure::new(Frac::new(1, 2), true, 10).unwrap());
        let gs = default_generators(Gfp::new(7).unwrap(), &bs).unwrap();
        EvalCache::new(&gs, 40).unwrap()
    }

    #[test]
    fn word_push_merges_runs() {
        let mut w = Word::power(Gen::S, 3);
        w.push(Gen::S, 2);
        w.push(Gen::Q, 1);
        assert_eq!(w.factors(), &[(Gen::S, 5), (Gen::Q, 1)]);
        assert_eq!(w.letters(), 6);
    }

    #[test]
    fn product_count_uses_squaring() {
        // s^8: three squarings; s^5: two squarings plus one multiply.
        assert_eq!(Word::power(Gen::S, 8).products(), 3);
        assert_eq!(Word::power(Gen::S, 5).products(), 3);
        assert_eq!(Word::power(Gen::S, 1).products(), 0);
        assert_eq!(Word::empty().products(), 0);
        let w = Word::power(Gen::S, 4).concat(&Word::letter(Gen::Q));
        assert_eq!(w.products(), 3);
    }

    #[test]
    fn transpose_reverses_and_flips() {
        let w = Word::power(Gen::S, 2).concat(&Word::letter(Gen::Dbl));
        let t = w.transpose();
        assert_eq!(t.factors(), &[(Gen::DblTr, 1), (Gen::STr, 2)]);
    }

    #[test]
    fn power_eval_matches_repeated_multiplication() {
        let mut c = cache();
        let s1 = c.power(Gen::S, 1).unwrap();
        let mut manual = s1.clone();
        for _ in 1..5 {
            manual = manual.mul(&s1).unwrap();
        }
        let fast = c.power(Gen::S, 5).unwrap();
        assert!(manual.eq_on_rows(&fast, manual.valid_to().min(fast.valid_to())));
    }

    #[test]
    fn empty_word_is_identity() {
        let mut c = cache();
        let id = c.eval_word(&Word::empty()).unwrap();
        assert!(id.eq_on_rows(&c.identity(), 40));
    }

    #[test]
    fn difference_cancels() {
        let mut c = cache();
        let w = Word::power(Gen::S, 2);
        let z = c.eval(&Combination::difference(w.clone(), w)).unwrap();
        assert!(z.is_zero_on_rows(40));
    }
}
