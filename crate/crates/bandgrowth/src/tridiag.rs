//! Simultaneous block tridiagonalization of a family of banded operators,
//! plus regular representations of algebras given by structure constants.
//!
//! Given transformations `x_1 .. x_k` on the window, the flag
//!
//! ```text
//! V_1 = <e_1>,   V_{m+1} = V_m + Σ x_i V_m + Σ x_i' V_m
//! ```
//!
//! is closed under every operator and its transpose, which pins the block
//! sizes to at most `1, 2k+1, (2k+1)^2, ...`. Closure alone only yields a
//! block Hessenberg form; the two-sided (tridiagonal) form needs the stages
//! to be mutually orthogonal under the standard bilinear form, with each
//! stage's Gram matrix invertible; then `P^{-1} = diag(G_m^{-1}) P'` and
//! both `x V_m ⊆ V_{m+1}` and `x' V_m ⊆ V_{m+1}` pinch the transformed
//! matrix into the tridiagonal band.
//!
//! Over a finite field the form can degenerate on a stage (a singular Gram).
//! The builder repairs that by pulling a pairing vector from the next stage's
//! image pool, which coarsens one block; if no repair exists it falls back to
//! a plain echelon flag and reports whatever the verification finds. All
//! claims (similarity, block dims, strictness) are checked by exact
//! multiplication on the window, never assumed.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::GrowthCurve;
use crate::lazy::LazyMatrix;
use crate::window::WindowMatrix;

// ─── dense helpers ──────────────────────────────────────────────────────────

fn dense_zero<F: Field>(field: &F, n: usize) -> Vec<F::Elem> {
    vec![field.zero(); n * n]
}

fn dense_to_window<F: Field>(field: &F, dense: &[F::Elem], n: usize) -> WindowMatrix<F> {
    let mut entries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = &dense[i * n + j];
            if !field.is_zero(v) {
                entries.push((i as u64 + 1, j as u64 + 1, v.clone()));
            }
        }
    }
    WindowMatrix::from_entries(field.clone(), n as u64, entries).expect("dense grid is in range")
}

fn dense_mul<F: Field>(field: &F, a: &[F::Elem], b: &[F::Elem], n: usize) -> Vec<F::Elem> {
    let mut c = dense_zero(field, n);
    for i in 0..n {
        for l in 0..n {
            let ail = &a[i * n + l];
            if field.is_zero(ail) {
                continue;
            }
            for j in 0..n {
                let p = field.mul(ail, &b[l * n + j]);
                c[i * n + j] = field.add(&c[i * n + j], &p);
            }
        }
    }
    c
}

/// Gauss-Jordan inverse; `None` when singular.
fn dense_inverse<F: Field>(field: &F, a: &[F::Elem], n: usize) -> Option<Vec<F::Elem>> {
    if n == 0 {
        return Some(Vec::new());
    }
    let mut m = a.to_vec();
    let mut inv: Vec<F::Elem> = dense_zero(field, n);
    for i in 0..n {
        inv[i * n + i] = field.one();
    }
    for col in 0..n {
        let pivot = (col..n).find(|&r| !field.is_zero(&m[r * n + col]))?;
        if pivot != col {
            for j in 0..n {
                m.swap(pivot * n + j, col * n + j);
                inv.swap(pivot * n + j, col * n + j);
            }
        }
        let inv_p = field.inv(&m[col * n + col]).ok()?;
        for j in 0..n {
            m[col * n + j] = field.mul(&m[col * n + j], &inv_p);
            inv[col * n + j] = field.mul(&inv[col * n + j], &inv_p);
        }
        for r in 0..n {
            if r != col && !field.is_zero(&m[r * n + col]) {
                let f = m[r * n + col].clone();
                for j in 0..n {
                    let s = field.mul(&f, &m[col * n + j]);
                    m[r * n + j] = field.sub(&m[r * n + j], &s);
                    let s = field.mul(&f, &inv[col * n + j]);
                    inv[r * n + j] = field.sub(&inv[r * n + j], &s);
                }
            }
        }
    }
    Some(inv)
}

/// A kernel vector of a square matrix, if one exists.
fn dense_kernel_vector<F: Field>(field: &F, a: &[F::Elem], n: usize) -> Option<Vec<F::Elem>> {
    // Row-reduce [a^T | I] so row relations of a^T (i.e. column relations of
    // a) appear next to their combinations.
    let mut m: Vec<F::Elem> = dense_zero(field, n);
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = a[j * n + i].clone();
        }
    }
    let mut aug: Vec<F::Elem> = dense_zero(field, n);
    for i in 0..n {
        aug[i * n + i] = field.one();
    }
    let mut pivot_row = 0usize;
    for col in 0..n {
        let Some(p) = (pivot_row..n).find(|&r| !field.is_zero(&m[r * n + col])) else {
            continue;
        };
        for j in 0..n {
            m.swap(p * n + j, pivot_row * n + j);
            aug.swap(p * n + j, pivot_row * n + j);
        }
        let inv_p = field.inv(&m[pivot_row * n + col]).ok()?;
        for j in 0..n {
            m[pivot_row * n + j] = field.mul(&m[pivot_row * n + j], &inv_p);
            aug[pivot_row * n + j] = field.mul(&aug[pivot_row * n + j], &inv_p);
        }
        for r in 0..n {
            if r != pivot_row && !field.is_zero(&m[r * n + col]) {
                let f = m[r * n + col].clone();
                for j in 0..n {
                    let s = field.mul(&f, &m[pivot_row * n + j]);
                    m[r * n + j] = field.sub(&m[r * n + j], &s);
                    let s = field.mul(&f, &aug[pivot_row * n + j]);
                    aug[r * n + j] = field.sub(&aug[r * n + j], &s);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == n {
            break;
        }
    }
    if pivot_row == n {
        return None;
    }
    // Any zero row of the reduced a^T gives a combination with a^T c = 0,
    // i.e. a kernel vector of a read from the augmented side.
    for r in 0..n {
        if (0..n).all(|j| field.is_zero(&m[r * n + j])) {
            return Some((0..n).map(|j| aug[r * n + j].clone()).collect());
        }
    }
    None
}

// ─── structure constants and the regular representation ────────────────────

type MulRule<F> = Arc<dyn Fn(usize, usize) -> Vec<(usize, <F as Field>::Elem)> + Send + Sync>;

/// An algebra presented by structure constants on a countable basis:
/// `a_i · a_j = Σ_l c_{ij}^l a_l` with finitely many terms per product.
#[derive(Clone)]
pub struct StructureConstants<F: Field> {
    field: F,
    name: String,
    /// `None` for a countable (rule-given) basis.
    dim: Option<usize>,
    identity: usize,
    generators: Vec<usize>,
    rule: MulRule<F>,
}

impl<F: Field> StructureConstants<F> {
    /// Finite-dimensional table: `table[i][j]` lists the `(l, c)` terms of
    /// `a_i · a_j`. Checks the unit law exactly and associativity on all
    /// triples (on a deterministic spread above dimension 12).
    pub fn finite(
        field: F,
        name: impl Into<String>,
        table: Vec<Vec<Vec<(usize, F::Elem)>>>,
        identity: usize,
        generators: Vec<usize>,
    ) -> Result<StructureConstants<F>> {
        let d = table.len();
        if d == 0 || table.iter().any(|row| row.len() != d) || identity >= d {
            return Err(Error::ShapeMismatch("structure-constant table is not square".into()));
        }
        if generators.iter().any(|g| *g >= d) {
            return Err(Error::OutOfRange("generator index beyond basis".into()));
        }
        let table = Arc::new(table);
        let t = table.clone();
        let sc = StructureConstants {
            field,
            name: name.into(),
            dim: Some(d),
            identity,
            generators,
            rule: Arc::new(move |i, j| {
                if i < t.len() && j < t.len() {
                    t[i][j].clone()
                } else {
                    Vec::new()
                }
            }),
        };
        sc.check_unit(d)?;
        sc.check_associativity(d, d <= 12)?;
        Ok(sc)
    }

    /// Countable basis given by a product rule; the laws are checked on the
    /// first `check_horizon` basis elements.
    pub fn countable(
        field: F,
        name: impl Into<String>,
        rule: impl Fn(usize, usize) -> Vec<(usize, F::Elem)> + Send + Sync + 'static,
        identity: usize,
        generators: Vec<usize>,
        check_horizon: usize,
    ) -> Result<StructureConstants<F>> {
        let sc = StructureConstants {
            field,
            name: name.into(),
            dim: None,
            identity,
            generators,
            rule: Arc::new(rule),
        };
        sc.check_unit(check_horizon)?;
        sc.check_associativity(check_horizon, false)?;
        Ok(sc)
    }

    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    fn normalize(&self, mut terms: Vec<(usize, F::Elem)>) -> Vec<(usize, F::Elem)> {
        terms.sort_by_key(|(l, _)| *l);
        let mut out: Vec<(usize, F::Elem)> = Vec::with_capacity(terms.len());
        for (l, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == l {
                    last.1 = self.field.add(&last.1, &c);
                    continue;
                }
            }
            out.push((l, c));
        }
        out.retain(|(_, c)| !self.field.is_zero(c));
        out
    }

    fn product(&self, i: usize, j: usize) -> Vec<(usize, F::Elem)> {
        self.normalize((self.rule)(i, j))
    }

    fn check_unit(&self, horizon: usize) -> Result<()> {
        for j in 0..horizon {
            let left = self.product(self.identity, j);
            let right = self.product(j, self.identity);
            let want = vec![(j, self.field.one())];
            if left != want || right != want {
                return Err(Error::ConfigMismatch(format!(
                    "{}: basis element {} is not a two-sided identity at column {j}",
                    self.name, self.identity
                )));
            }
        }
        Ok(())
    }

    fn mul_expansion_right(&self, terms: &[(usize, F::Elem)], j: usize) -> Vec<(usize, F::Elem)> {
        let mut out = Vec::new();
        for (l, c) in terms {
            for (m, d) in self.product(*l, j) {
                out.push((m, self.field.mul(c, &d)));
            }
        }
        self.normalize(out)
    }

    fn mul_expansion_left(&self, i: usize, terms: &[(usize, F::Elem)]) -> Vec<(usize, F::Elem)> {
        let mut out = Vec::new();
        for (l, c) in terms {
            for (m, d) in self.product(i, *l) {
                out.push((m, self.field.mul(c, &d)));
            }
        }
        self.normalize(out)
    }

    fn check_associativity(&self, horizon: usize, exhaustive: bool) -> Result<()> {
        let indices: Vec<usize> = if exhaustive {
            (0..horizon).collect()
        } else {
            let step = (horizon / 7).max(1);
            (0..horizon).step_by(step).collect()
        };
        for &i in &indices {
            for &j in &indices {
                for &l in &indices {
                    let ij = self.product(i, j);
                    let jl = self.product(j, l);
                    let left = self.mul_expansion_right(&ij, l);
                    let right = self.mul_expansion_left(i, &jl);
                    if left != right {
                        return Err(Error::ConfigMismatch(format!(
                            "{}: associativity fails on triple ({i}, {j}, {l})",
                            self.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Matrices of left multiplication by each chosen generator in the given
    /// basis, supported on the first `horizon` basis elements (all of them
    /// for a finite basis). Errors with [`Error::NotColumnFinite`] when a
    /// rule keeps writing the same output coordinate.
    pub fn regular_representation(&self, horizon: usize) -> Result<Vec<LazyMatrix<F>>> {
        let horizon = match self.dim {
            Some(d) => d,
            None => horizon,
        };
        let mut out = Vec::with_capacity(self.generators.len());
        for &g in &self.generators {
            let mut columns: Vec<Vec<(usize, F::Elem)>> = Vec::with_capacity(horizon);
            let mut row_counts: Vec<u32> = Vec::new();
            let mut max_disp = vec![0u64; horizon];
            for j in 0..horizon {
                let terms = self.product(g, j);
                for (l, _) in &terms {
                    if *l >= row_counts.len() {
                        row_counts.resize(l + 1, 0);
                    }
                    row_counts[*l] += 1;
                    let at = (*l).min(j);
                    if at < horizon {
                        let d = l.abs_diff(j) as u64;
                        if d > max_disp[at] {
                            max_disp[at] = d;
                        }
                    }
                }
                columns.push(terms);
            }
            if self.dim.is_none() {
                // A row written from a constant fraction of all columns will
                // never be column-finite.
                let threshold = (horizon as u32 / 4).max(16);
                if let Some(row) = row_counts.iter().position(|&c| c > threshold) {
                    return Err(Error::NotColumnFinite(format!(
                        "{}: generator {g} writes row {row} from {} of {horizon} columns",
                        self.name, row_counts[row]
                    )));
                }
            }
            let curve = GrowthCurve::table(max_disp.iter().map(|&d| d as f64).collect());
            let field = self.field.clone();
            let columns = Arc::new(columns);
            let f2 = field.clone();
            let lazy = LazyMatrix::new(
                format!("{}[{g}]", self.name),
                field,
                curve,
                move |i, j| {
                    let (bi, bj) = (i as usize - 1, j as usize - 1);
                    if bj >= columns.len() {
                        return f2.zero();
                    }
                    columns[bj]
                        .iter()
                        .find(|(l, _)| *l == bi)
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(|| f2.zero())
                },
            );
            out.push(lazy);
        }
        Ok(out)
    }
}

// ─── the flag builder ───────────────────────────────────────────────────────

/// Outcome of a tridiagonalization run.
#[derive(Debug, Clone)]
pub struct FlagReport<F: Field> {
    /// Dimension added by each stage.
    pub block_dims: Vec<usize>,
    /// Running totals of `block_dims`.
    pub cumulative: Vec<usize>,
    /// True iff every transformed matrix verified block tridiagonal.
    pub strict: bool,
    /// Whether the orthogonal mechanism survived (false means a plain
    /// echelon flag produced the basis).
    pub orthogonal: bool,
    /// Standard basis vectors inserted after the flag stalled.
    pub insertions: usize,
    /// Insertions that could not keep both sides of the band clean.
    pub hessenberg_insertions: usize,
    /// The change of basis and its exact inverse.
    pub basis: WindowMatrix<F>,
    pub basis_inv: WindowMatrix<F>,
    pub diagnostics: Vec<String>,
}

struct Stage<F: Field> {
    vecs: Vec<Vec<F::Elem>>,
    gram_inv: Option<Vec<F::Elem>>,
}

/// Breakdown of the orthogonal mechanism (the run is retried in echelon
/// mode, which cannot fail).
struct GramBreakdown;

type Flag<T> = std::result::Result<T, GramBreakdown>;

struct Builder<'a, F: Field> {
    field: F,
    n: usize,
    xs: &'a [WindowMatrix<F>],
    orthogonal: bool,
    stages: Vec<Stage<F>>,
    dim: usize,
    insertions: usize,
    hessenberg_insertions: usize,
    diagnostics: Vec<String>,
}

impl<'a, F: Field> Builder<'a, F> {
    fn dot(&self, a: &[F::Elem], b: &[F::Elem]) -> F::Elem {
        let mut acc = self.field.zero();
        for (x, y) in a.iter().zip(b) {
            if !self.field.is_zero(x) && !self.field.is_zero(y) {
                acc = self.field.add(&acc, &self.field.mul(x, y));
            }
        }
        acc
    }

    fn apply(&self, x: &WindowMatrix<F>, transpose: bool, v: &[F::Elem]) -> Vec<F::Elem> {
        let mut out = vec![self.field.zero(); self.n];
        for (i, row) in x.rows().iter().enumerate() {
            if transpose {
                if self.field.is_zero(&v[i]) {
                    continue;
                }
                for (j, val) in row {
                    let j = *j as usize - 1;
                    let p = self.field.mul(val, &v[i]);
                    out[j] = self.field.add(&out[j], &p);
                }
            } else {
                for (j, val) in row {
                    let j = *j as usize - 1;
                    if !self.field.is_zero(&v[j]) {
                        let p = self.field.mul(val, &v[j]);
                        out[i] = self.field.add(&out[i], &p);
                    }
                }
            }
        }
        out
    }

    fn images(&self, v: &[F::Elem]) -> Vec<Vec<F::Elem>> {
        let mut out = Vec::with_capacity(2 * self.xs.len());
        for x in self.xs {
            out.push(self.apply(x, false, v));
            out.push(self.apply(x, true, v));
        }
        out
    }

    /// Removes the stage-`idx` component of `v` (projection in orthogonal
    /// mode, pivot elimination otherwise). Reports whether anything changed.
    fn reduce_one_stage(&self, v: &mut Vec<F::Elem>, idx: usize) -> Flag<bool> {
        let stage = &self.stages[idx];
        let mut touched = false;
        if self.orthogonal {
            let Some(g_inv) = &stage.gram_inv else { return Err(GramBreakdown) };
            let d = stage.vecs.len();
            let coords: Vec<F::Elem> = stage.vecs.iter().map(|w| self.dot(w, v)).collect();
            for (r, w) in stage.vecs.iter().enumerate() {
                let mut beta = self.field.zero();
                for (c, coord) in coords.iter().enumerate() {
                    let p = self.field.mul(&g_inv[r * d + c], coord);
                    beta = self.field.add(&beta, &p);
                }
                if self.field.is_zero(&beta) {
                    continue;
                }
                touched = true;
                for (slot, wv) in v.iter_mut().zip(w) {
                    let p = self.field.mul(&beta, wv);
                    *slot = self.field.sub(slot, &p);
                }
            }
        } else {
            for w in &stage.vecs {
                let pivot = w.iter().position(|e| !self.field.is_zero(e)).expect("nonzero basis");
                if !self.field.is_zero(&v[pivot]) {
                    touched = true;
                    let f = v[pivot].clone();
                    for (slot, wv) in v.iter_mut().zip(w) {
                        let p = self.field.mul(&f, wv);
                        *slot = self.field.sub(slot, &p);
                    }
                }
            }
        }
        Ok(touched)
    }

    /// Residual of `v` after removing every finalized stage component.
    fn reduce_against_stages(&self, v: &[F::Elem]) -> Flag<Vec<F::Elem>> {
        let mut v = v.to_vec();
        for idx in 0..self.stages.len() {
            self.reduce_one_stage(&mut v, idx)?;
        }
        Ok(v)
    }

    /// Echelon-reduces `v` against within-stage mates, pivot normalized to
    /// one; `None` if it vanishes.
    fn reduce_within(&self, v: Vec<F::Elem>, mates: &[Vec<F::Elem>]) -> Option<Vec<F::Elem>> {
        let mut v = v;
        for w in mates {
            let pivot = w.iter().position(|e| !self.field.is_zero(e)).expect("mates are nonzero");
            if !self.field.is_zero(&v[pivot]) {
                let f = v[pivot].clone();
                for (slot, wv) in v.iter_mut().zip(w) {
                    let p = self.field.mul(&f, wv);
                    *slot = self.field.sub(slot, &p);
                }
            }
        }
        let pivot = v.iter().position(|e| !self.field.is_zero(e))?;
        let inv = self.field.inv(&v[pivot]).expect("nonzero entry");
        for e in v.iter_mut() {
            *e = self.field.mul(e, &inv);
        }
        Some(v)
    }

    fn gram(&self, vecs: &[Vec<F::Elem>]) -> Vec<F::Elem> {
        let d = vecs.len();
        let mut g = vec![self.field.zero(); d * d];
        for i in 0..d {
            for j in i..d {
                let v = self.dot(&vecs[i], &vecs[j]);
                g[i * d + j] = v.clone();
                g[j * d + i] = v;
            }
        }
        g
    }

    /// Finalizes a stage, pulling repair vectors from `pool` while the Gram
    /// matrix degenerates.
    fn finalize_stage(&mut self, mut vecs: Vec<Vec<F::Elem>>, pool: &mut Vec<Vec<F::Elem>>) -> Flag<()> {
        if !self.orthogonal {
            self.dim += vecs.len();
            self.stages.push(Stage { vecs, gram_inv: None });
            return Ok(());
        }
        loop {
            let d = vecs.len();
            let g = self.gram(&vecs);
            if let Some(g_inv) = dense_inverse(&self.field, &g, d) {
                self.dim += d;
                self.stages.push(Stage { vecs, gram_inv: Some(g_inv) });
                return Ok(());
            }
            let kernel =
                dense_kernel_vector(&self.field, &g, d).expect("singular Gram has a kernel");
            let mut radical = vec![self.field.zero(); self.n];
            for (c, w) in kernel.iter().zip(&vecs) {
                if self.field.is_zero(c) {
                    continue;
                }
                for (slot, wv) in radical.iter_mut().zip(w) {
                    let p = self.field.mul(c, wv);
                    *slot = self.field.add(slot, &p);
                }
            }
            let mut fixed = false;
            for idx in 0..pool.len() {
                if self.field.is_zero(&self.dot(&radical, &pool[idx])) {
                    continue;
                }
                let w = pool.remove(idx);
                let w = self.reduce_against_stages(&w)?;
                if let Some(w) = self.reduce_within(w, &vecs) {
                    // Keep the repair vector's own images available for the
                    // next stage.
                    pool.extend(self.images(&w));
                    vecs.push(w);
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                self.diagnostics.push(format!(
                    "stage {}: singular Gram with no pairing vector in the image pool",
                    self.stages.len() + 1
                ));
                return Err(GramBreakdown);
            }
        }
    }

    /// 1-based stage range the expansion of `v` touches, if any.
    fn touched_stages(&self, v: &[F::Elem]) -> Flag<Option<(usize, usize)>> {
        let mut lo = None;
        let mut hi = None;
        let mut rest = v.to_vec();
        for idx in 0..self.stages.len() {
            if self.reduce_one_stage(&mut rest, idx)? {
                lo = lo.or(Some(idx + 1));
                hi = Some(idx + 1);
            }
        }
        Ok(lo.zip(hi))
    }

    /// Re-establishes stage orthogonality from stage index `from` on, after
    /// a mid-flag insertion enlarged an earlier stage.
    fn reorthogonalize_from(&mut self, from: usize) -> Flag<()> {
        for idx in from..self.stages.len() {
            let raw = std::mem::take(&mut self.stages[idx].vecs);
            self.stages[idx].gram_inv = None;
            let mut cleaned: Vec<Vec<F::Elem>> = Vec::with_capacity(raw.len());
            for v in raw {
                let mut v = v;
                if self.orthogonal {
                    for e in 0..idx {
                        self.reduce_one_stage(&mut v, e)?;
                    }
                }
                let Some(v) = self.reduce_within(v, &cleaned) else {
                    self.diagnostics
                        .push(format!("stage {}: vector vanished re-orthogonalizing", idx + 1));
                    return Err(GramBreakdown);
                };
                cleaned.push(v);
            }
            if self.orthogonal {
                let d = cleaned.len();
                let g = self.gram(&cleaned);
                let Some(g_inv) = dense_inverse(&self.field, &g, d) else {
                    self.diagnostics
                        .push(format!("stage {}: Gram degenerated after insertion", idx + 1));
                    return Err(GramBreakdown);
                };
                self.stages[idx].gram_inv = Some(g_inv);
            }
            self.stages[idx].vecs = cleaned;
        }
        Ok(())
    }

    fn first_unplaced(&self) -> Flag<usize> {
        for j in 0..self.n {
            let mut e = vec![self.field.zero(); self.n];
            e[j] = self.field.one();
            let red = self.reduce_against_stages(&e)?;
            if red.iter().any(|v| !self.field.is_zero(v)) {
                return Ok(j);
            }
        }
        unreachable!("dim < n guarantees an unplaced basis vector");
    }

    fn run(&mut self) -> Flag<()> {
        let mut e1 = vec![self.field.zero(); self.n];
        e1[0] = self.field.one();
        let mut pool = vec![e1];
        loop {
            // Assemble the next stage from the pool.
            let mut vecs: Vec<Vec<F::Elem>> = Vec::new();
            for cand in std::mem::take(&mut pool) {
                let red = self.reduce_against_stages(&cand)?;
                if let Some(v) = self.reduce_within(red, &vecs) {
                    vecs.push(v);
                }
            }
            if !vecs.is_empty() {
                for v in &vecs {
                    pool.extend(self.images(v));
                }
                self.finalize_stage(vecs, &mut pool)?;
                continue;
            }
            if self.dim >= self.n {
                return Ok(());
            }

            // Stalled: insert the first unplaced standard basis vector at the
            // earliest stage that keeps the band two-sided.
            self.insertions += 1;
            let j = self.first_unplaced()?;
            let mut e = vec![self.field.zero(); self.n];
            e[j] = self.field.one();
            let rho = self.reduce_against_stages(&e)?;
            let rho = self.reduce_within(rho, &[]).expect("unplaced vector cannot vanish");
            let mut lo = usize::MAX;
            let mut hi = 0usize;
            for img in self.images(&rho) {
                if let Some((l, h)) = self.touched_stages(&img)? {
                    lo = lo.min(l);
                    hi = hi.max(h);
                }
            }
            let m = self.stages.len();
            let tau = if hi == 0 {
                m + 1
            } else {
                let earliest = hi.saturating_sub(1).max(1);
                if earliest > lo.saturating_add(1) {
                    self.hessenberg_insertions += 1;
                    self.diagnostics.push(format!(
                        "e_{} images span stages {lo}..{hi}; inserted at {earliest}, upper band dirty",
                        j + 1
                    ));
                }
                earliest.min(m + 1)
            };
            if tau == m + 1 {
                pool.push(rho);
                continue;
            }
            // Mid-flag insertion.
            let idx = tau - 1;
            self.stages[idx].vecs.push(rho.clone());
            self.dim += 1;
            self.reorthogonalize_from(idx)?;
            // Images of the inserted vector must land inside V_{tau+1}.
            for img in self.images(&rho) {
                let red = self.reduce_against_stages(&img)?;
                if let Some(v) = self.reduce_within(red, &[]) {
                    if tau < self.stages.len() {
                        self.stages[tau].vecs.push(v);
                        self.dim += 1;
                        self.reorthogonalize_from(tau)?;
                    } else {
                        pool.push(v);
                    }
                }
            }
        }
    }
}

/// Builds the flag, the basis change `P` with its exact inverse, and the
/// transformed matrices `P^{-1} x P`, then verifies the block structure.
pub fn block_tridiagonalize<F: Field>(
    xs: &[WindowMatrix<F>],
) -> Result<(FlagReport<F>, Vec<WindowMatrix<F>>)> {
    if xs.is_empty() {
        return Err(Error::OutOfRange("need at least one matrix".into()));
    }
    let n = xs[0].size();
    let field = xs[0].field().clone();
    for x in xs {
        if x.size() != n || x.field().config() != field.config() {
            return Err(Error::ConfigMismatch(
                "tridiagonalization inputs must share window and field".into(),
            ));
        }
    }

    let attempt = |orthogonal: bool| -> Option<Builder<'_, F>> {
        let mut b = Builder {
            field: field.clone(),
            n: n as usize,
            xs,
            orthogonal,
            stages: Vec::new(),
            dim: 0,
            insertions: 0,
            hessenberg_insertions: 0,
            diagnostics: Vec::new(),
        };
        match b.run() {
            Ok(()) => Some(b),
            Err(GramBreakdown) => None,
        }
    };

    let (builder, orthogonal) = match attempt(true) {
        Some(b) => (b, true),
        None => (attempt(false).expect("echelon mode cannot break down"), false),
    };

    let n_us = n as usize;
    let block_dims: Vec<usize> = builder.stages.iter().map(|s| s.vecs.len()).collect();
    let mut cumulative = Vec::with_capacity(block_dims.len());
    let mut acc = 0usize;
    for d in &block_dims {
        acc += d;
        cumulative.push(acc);
    }
    debug_assert_eq!(acc, n_us);

    let mut p = vec![field.zero(); n_us * n_us];
    let mut col = 0usize;
    for stage in &builder.stages {
        for v in &stage.vecs {
            for (row, value) in v.iter().enumerate() {
                p[row * n_us + col] = value.clone();
            }
            col += 1;
        }
    }
    let p_inv = if orthogonal {
        // P^{-1} = diag(G_m^{-1}) P^T, assembled stage by stage.
        let mut inv = vec![field.zero(); n_us * n_us];
        let mut base = 0usize;
        for stage in &builder.stages {
            let d = stage.vecs.len();
            let g_inv = stage.gram_inv.as_ref().expect("orthogonal mode keeps Gram inverses");
            for r in 0..d {
                for (c, w) in stage.vecs.iter().enumerate() {
                    let coeff = &g_inv[r * d + c];
                    if field.is_zero(coeff) {
                        continue;
                    }
                    for (col2, wv) in w.iter().enumerate() {
                        let p2 = field.mul(coeff, wv);
                        inv[(base + r) * n_us + col2] =
                            field.add(&inv[(base + r) * n_us + col2], &p2);
                    }
                }
            }
            base += d;
        }
        inv
    } else {
        dense_inverse(&field, &p, n_us).expect("flag basis spans the window")
    };

    // Exactness guard on the inverse.
    let check = dense_mul(&field, &p, &p_inv, n_us);
    for i in 0..n_us {
        for j in 0..n_us {
            let want = if i == j { field.one() } else { field.zero() };
            if check[i * n_us + j] != want {
                return Err(Error::ConfigMismatch(
                    "internal: basis inverse failed the exactness check".into(),
                ));
            }
        }
    }

    let mut transformed = Vec::with_capacity(xs.len());
    for x in xs {
        // t = x P (sparse-dense), then P^{-1} t (dense-dense).
        let mut t = vec![field.zero(); n_us * n_us];
        for (i, row) in x.rows().iter().enumerate() {
            for (jj, v) in row {
                let k = *jj as usize - 1;
                for c in 0..n_us {
                    let p2 = field.mul(v, &p[k * n_us + c]);
                    t[i * n_us + c] = field.add(&t[i * n_us + c], &p2);
                }
            }
        }
        let xt = dense_mul(&field, &p_inv, &t, n_us);
        transformed.push(dense_to_window(&field, &xt, n_us));
    }

    let strict = transformed.iter().all(|xt| verify_block_tridiagonal(xt, &block_dims));

    let report = FlagReport {
        block_dims,
        cumulative,
        strict,
        orthogonal,
        insertions: builder.insertions,
        hessenberg_insertions: builder.hessenberg_insertions,
        basis: dense_to_window(&field, &p, n_us),
        basis_inv: dense_to_window(&field, &p_inv, n_us),
        diagnostics: builder.diagnostics,
    };
    Ok((report, transformed))
}

/// Cap on the size of stage `m` (1-based) for a family of `k` operators:
/// `1, 2k+1, (2k+1)^2, ...`: each closure step multiplies the dimension by
/// at most `2k+1`.
pub fn block_dim_bound(k: usize, m: usize) -> u64 {
    (2 * k as u64 + 1)
        .checked_pow(m.saturating_sub(1) as u32)
        .unwrap_or(u64::MAX)
}

/// True iff every nonzero entry lies in a diagonal block or one of the two
/// adjacent off-diagonal blocks.
pub fn verify_block_tridiagonal<F: Field>(x: &WindowMatrix<F>, dims: &[usize]) -> bool {
    let total: usize = dims.iter().sum();
    if total != x.size() as usize {
        return false;
    }
    let mut block_of = vec![0usize; total + 1];
    let mut pos = 1usize;
    for (b, d) in dims.iter().enumerate() {
        for _ in 0..*d {
            block_of[pos] = b;
            pos += 1;
        }
    }
    x.entries().all(|(i, j, _)| block_of[i as usize].abs_diff(block_of[j as usize]) <= 1)
}

/// Minimal linear-growth constant of the transformed family, plus the pass
/// verdict: block dims inside the `(2k+1)`-geometric bound and the constant
/// within `(2k+1)^2`.
pub fn linear_growth_certificate<F: Field>(
    report: &FlagReport<F>,
    transformed: &[WindowMatrix<F>],
) -> (f64, bool) {
    let k = transformed.len() as f64;
    let mut c = 0.0f64;
    for xt in transformed {
        let profile = xt.band_profile();
        for pos in 1..=xt.size() {
            let g = profile.get(pos);
            if g > 0 {
                c = c.max(g as f64 / pos as f64);
            }
        }
    }
    let factor = (2.0 * k + 1.0) as usize;
    let geometric = report
        .block_dims
        .iter()
        .enumerate()
        .skip(1)
        .all(|(m, d)| *d <= factor * report.cumulative[m - 1]);
    let pass = geometric && c <= (2.0 * k + 1.0) * (2.0 * k + 1.0) + 1e-9;
    (c, pass)
}
