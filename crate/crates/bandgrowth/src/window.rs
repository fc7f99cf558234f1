//! Exact finite windows of infinite matrices.
//!
//! A [`WindowMatrix`] is the `n x n` upper-left corner of a row- and
//! column-finite infinite matrix, together with two pieces of bookkeeping:
//!
//! * `valid_to`: the largest `m` such that rows `1..=m` of the window agree
//!   with the infinite matrix. Products shrink it: row `k` of a product is
//!   exact only when the full nonzero row of the left factor lies inside the
//!   right factor's exact region.
//! * `reach`: a certified per-position bound on the *infinite* matrix's
//!   bandwidth. The window's own profile cannot see nonzeros beyond the
//!   window edge, so margin arithmetic uses `reach`, never the measured
//!   profile.
//!
//! Storage is sparse, keyed by row with sorted column segments. Positions are
//! 1-based throughout, matching the ω-ordering of rows and columns.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::PROFILE_SLACK;

/// Sentinel for "no certified bound at this position".
pub(crate) const REACH_UNKNOWN: u64 = u64::MAX;

/// Measured per-position bandwidth of a window: `g(k)` is the largest
/// displacement `i - k` over nonzero entries `(k, i)` or `(i, k)` with
/// `i > k`, or `0` if there are none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BandProfile {
    g: Vec<u64>,
}

impl BandProfile {
    pub fn from_values(g: Vec<u64>) -> BandProfile {
        BandProfile { g }
    }

    /// Value at 1-based position `k`; positions beyond the window read 0.
    pub fn get(&self, k: u64) -> u64 {
        if k == 0 || k as usize > self.g.len() {
            0
        } else {
            self.g[k as usize - 1]
        }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.g
    }

    pub fn max(&self) -> u64 {
        self.g.iter().copied().max().unwrap_or(0)
    }
}

/// Exact `n x n` window of an infinite matrix over the field `F`.
#[derive(Debug, Clone)]
pub struct WindowMatrix<F: Field> {
    field: F,
    n: u64,
    /// `rows[i]` holds the sorted nonzero columns of position `i + 1`.
    rows: Vec<Vec<(u64, F::Elem)>>,
    valid_to: u64,
    reach: Vec<u64>,
}

impl<F: Field> WindowMatrix<F> {
    pub fn zero(field: F, n: u64) -> Self {
        assert!(n >= 1, "window size must be at least 1");
        WindowMatrix {
            field,
            n,
            rows: vec![Vec::new(); n as usize],
            valid_to: n,
            reach: vec![0; n as usize],
        }
    }

    pub fn identity(field: F, n: u64) -> Self {
        let mut m = WindowMatrix::zero(field, n);
        for i in 1..=n {
            let one = m.field.one();
            m.rows[i as usize - 1].push((i, one));
        }
        m
    }

    /// Single entry `1` at `(i, j)`.
    pub fn unit(field: F, n: u64, i: u64, j: u64) -> Self {
        assert!(i >= 1 && i <= n && j >= 1 && j <= n, "unit position out of window");
        let mut m = WindowMatrix::zero(field, n);
        let one = m.field.one();
        m.rows[i as usize - 1].push((j, one));
        let d = i.abs_diff(j);
        let at = i.min(j) as usize - 1;
        m.reach[at] = d;
        m
    }

    /// Builds a window from explicit entries, treating the matrix as finitely
    /// supported (everything outside the window is zero, so `reach` is the
    /// measured profile and every row is exact).
    pub fn from_entries(field: F, n: u64, entries: Vec<(u64, u64, F::Elem)>) -> Result<Self> {
        assert!(n >= 1);
        let mut rows: Vec<Vec<(u64, F::Elem)>> = vec![Vec::new(); n as usize];
        for (i, j, v) in entries {
            if i < 1 || i > n || j < 1 || j > n {
                return Err(Error::OutOfRange(format!(
                    "entry ({i}, {j}) outside window of size {n}"
                )));
            }
            if field.is_zero(&v) {
                continue;
            }
            rows[i as usize - 1].push((j, v));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            row.sort_by_key(|(j, _)| *j);
            for w in row.windows(2) {
                if w[0].0 == w[1].0 {
                    return Err(Error::Parse(format!(
                        "duplicate entry at ({}, {})",
                        i + 1,
                        w[0].0
                    )));
                }
            }
        }
        let mut m = WindowMatrix { field, n, rows, valid_to: n, reach: vec![0; n as usize] };
        m.reach = m.band_profile().g;
        Ok(m)
    }

    pub(crate) fn new_raw(
        field: F,
        n: u64,
        rows: Vec<Vec<(u64, F::Elem)>>,
        valid_to: u64,
        reach: Vec<u64>,
    ) -> Self {
        debug_assert_eq!(rows.len(), n as usize);
        debug_assert_eq!(reach.len(), n as usize);
        WindowMatrix { field, n, rows, valid_to, reach }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn size(&self) -> u64 {
        self.n
    }

    pub fn valid_to(&self) -> u64 {
        self.valid_to
    }

    /// Forces a smaller exact region (never grows it).
    pub fn restrict_valid_to(&mut self, v: u64) {
        self.valid_to = self.valid_to.min(v);
    }

    pub(crate) fn rows(&self) -> &[Vec<(u64, F::Elem)>] {
        &self.rows
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Nonzero count within rows `1..=m`.
    pub fn nnz_on_rows(&self, m: u64) -> usize {
        self.rows[..m.min(self.n) as usize].iter().map(Vec::len).sum()
    }

    /// Entry at 1-based `(i, j)`; absent entries read zero.
    pub fn get(&self, i: u64, j: u64) -> F::Elem {
        assert!(i >= 1 && i <= self.n && j >= 1 && j <= self.n);
        let row = &self.rows[i as usize - 1];
        match row.binary_search_by_key(&j, |(c, _)| *c) {
            Ok(idx) => row[idx].1.clone(),
            Err(_) => self.field.zero(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (u64, u64, &F::Elem)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |(j, v)| (i as u64 + 1, *j, v)))
    }

    /// Largest prefix of positions whose measured profile is exact for the
    /// infinite matrix (the whole certified band fits inside the exact rows).
    pub fn profile_exact_to(&self) -> u64 {
        let mut out = 0;
        for k in 1..=self.n {
            let r = self.reach[k as usize - 1];
            if r == REACH_UNKNOWN || k.saturating_add(r) > self.valid_to {
                break;
            }
            out = k;
        }
        out
    }

    pub fn band_profile(&self) -> BandProfile {
        let mut g = vec![0u64; self.n as usize];
        for (i, row) in self.rows.iter().enumerate() {
            let i = i as u64 + 1;
            for (j, _) in row {
                let at = i.min(*j) as usize - 1;
                let d = i.abs_diff(*j);
                if d > g[at] {
                    g[at] = d;
                }
            }
        }
        BandProfile { g }
    }

    /// True iff the measured profile satisfies `g(k) <= c * k^s` for every
    /// `k <= valid_to` (with the crate-wide analytic slack).
    pub fn verify_growth(&self, c: f64, s: f64) -> bool {
        let profile = self.band_profile();
        for k in 1..=self.valid_to {
            if profile.get(k) as f64 > c * (k as f64).powf(s) + PROFILE_SLACK {
                return false;
            }
        }
        true
    }

    fn check_compatible(&self, other: &Self, op: &str) -> Result<()> {
        if self.n != other.n {
            return Err(Error::ConfigMismatch(format!(
                "{op}: window sizes differ ({} vs {})",
                self.n, other.n
            )));
        }
        if self.field.config() != other.field.config() {
            return Err(Error::ConfigMismatch(format!(
                "{op}: fields differ ({} vs {})",
                self.field.config(),
                other.field.config()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "add")?;
        let mut rows = Vec::with_capacity(self.n as usize);
        for (ra, rb) in self.rows.iter().zip(&other.rows) {
            let mut out: Vec<(u64, F::Elem)> = Vec::with_capacity(ra.len() + rb.len());
            let (mut a, mut b) = (0usize, 0usize);
            while a < ra.len() || b < rb.len() {
                let take_a = b >= rb.len() || (a < ra.len() && ra[a].0 <= rb[b].0);
                let take_b = a >= ra.len() || (b < rb.len() && rb[b].0 <= ra[a].0);
                if take_a && take_b {
                    let v = self.field.add(&ra[a].1, &rb[b].1);
                    if !self.field.is_zero(&v) {
                        out.push((ra[a].0, v));
                    }
                    a += 1;
                    b += 1;
                } else if take_a {
                    out.push(ra[a].clone());
                    a += 1;
                } else {
                    out.push(rb[b].clone());
                    b += 1;
                }
            }
            rows.push(out);
        }
        let reach = self
            .reach
            .iter()
            .zip(&other.reach)
            .map(|(x, y)| (*x).max(*y))
            .collect();
        Ok(WindowMatrix {
            field: self.field.clone(),
            n: self.n,
            rows,
            valid_to: self.valid_to.min(other.valid_to),
            reach,
        })
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        if self.field.is_zero(c) {
            return WindowMatrix {
                field: self.field.clone(),
                n: self.n,
                rows: vec![Vec::new(); self.n as usize],
                valid_to: self.valid_to,
                reach: vec![0; self.n as usize],
            };
        }
        let rows = self
            .rows
            .iter()
            .map(|row| row.iter().map(|(j, v)| (*j, self.field.mul(c, v))).collect())
            .collect();
        WindowMatrix {
            field: self.field.clone(),
            n: self.n,
            rows,
            valid_to: self.valid_to,
            reach: self.reach.clone(),
        }
    }

    pub fn neg(&self) -> Self {
        let minus_one = self.field.neg(&self.field.one());
        self.scale(&minus_one)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Exact product with margin bookkeeping.
    ///
    /// Row `k` of the output is exact when the whole certified band of the
    /// left factor's row `k` lies inside both operands' exact regions, so
    /// `valid_to` becomes the largest prefix with
    /// `k + reach_left(k) <= min(valid_left, valid_right)`.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other, "mul")?;
        let n = self.n as usize;
        let mut rows: Vec<Vec<(u64, F::Elem)>> = Vec::with_capacity(n);
        // Gustavson sparse product with a dense scratch accumulator.
        let mut acc: Vec<F::Elem> = vec![self.field.zero(); n + 1];
        let mut touched: Vec<u64> = Vec::new();
        for ra in &self.rows {
            touched.clear();
            for (k, a) in ra {
                for (j, b) in &other.rows[*k as usize - 1] {
                    let prod = self.field.mul(a, b);
                    let slot = &mut acc[*j as usize];
                    if self.field.is_zero(slot) && !self.field.is_zero(&prod) {
                        touched.push(*j);
                    }
                    *slot = self.field.add(slot, &prod);
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &j in &touched {
                let v = std::mem::replace(&mut acc[j as usize], self.field.zero());
                if !self.field.is_zero(&v) {
                    out.push((j, v));
                }
            }
            rows.push(out);
        }

        let bound = self.valid_to.min(other.valid_to);
        let mut valid_to = 0;
        for k in 1..=self.n {
            let r = self.reach[k as usize - 1];
            if r == REACH_UNKNOWN || k.saturating_add(r) > bound {
                break;
            }
            valid_to = k;
        }

        let ext_self = running_max(&self.reach);
        let ext_other = running_max(&other.reach);
        let mut reach = Vec::with_capacity(n);
        for k in 1..=self.n {
            reach.push(compose_reach_at(k, &self.reach, &ext_other).max(compose_reach_at(
                k,
                &other.reach,
                &ext_self,
            )));
        }
        Ok(WindowMatrix { field: self.field.clone(), n: self.n, rows, valid_to, reach })
    }

    /// Exact transpose. The measured band profile is unchanged (its
    /// definition is row/column symmetric); the exact region becomes the
    /// prefix whose whole certified band was exact in the original.
    pub fn transpose(&self) -> Self {
        let n = self.n as usize;
        let mut rows: Vec<Vec<(u64, F::Elem)>> = vec![Vec::new(); n];
        for (i, row) in self.rows.iter().enumerate() {
            let i = i as u64 + 1;
            for (j, v) in row {
                rows[*j as usize - 1].push((i, v.clone()));
            }
        }
        let mut valid_to = 0;
        for k in 1..=self.n {
            let r = self.reach[k as usize - 1];
            if r == REACH_UNKNOWN || k.saturating_add(r) > self.valid_to {
                break;
            }
            valid_to = k;
        }
        WindowMatrix {
            field: self.field.clone(),
            n: self.n,
            rows,
            valid_to,
            reach: self.reach.clone(),
        }
    }

    /// Restriction to the smaller window `1..=n2` in both coordinates.
    /// Certified reach values are position-wise bounds on the infinite
    /// matrix, so they carry over unchanged.
    pub fn truncate(&self, n2: u64) -> Self {
        assert!(n2 >= 1);
        if n2 >= self.n {
            return self.clone();
        }
        let rows = self.rows[..n2 as usize]
            .iter()
            .map(|row| {
                let cut = row.partition_point(|(j, _)| *j <= n2);
                row[..cut].to_vec()
            })
            .collect();
        WindowMatrix {
            field: self.field.clone(),
            n: n2,
            rows,
            valid_to: self.valid_to.min(n2),
            reach: self.reach[..n2 as usize].to_vec(),
        }
    }

    /// Entry-wise equality of rows `1..=m` (all columns).
    pub fn eq_on_rows(&self, other: &Self, m: u64) -> bool {
        if self.n != other.n || self.field.config() != other.field.config() {
            return false;
        }
        let m = m.min(self.n) as usize;
        self.rows[..m] == other.rows[..m]
    }

    /// True iff rows `1..=m` are all zero.
    pub fn is_zero_on_rows(&self, m: u64) -> bool {
        self.rows[..m.min(self.n) as usize].iter().all(Vec::is_empty)
    }

    /// First row index (1-based) holding a nonzero entry, if any.
    pub fn first_nonzero_row(&self) -> Option<u64> {
        self.rows.iter().position(|r| !r.is_empty()).map(|i| i as u64 + 1)
    }
}

fn running_max(reach: &[u64]) -> Vec<u64> {
    let mut out = Vec::with_capacity(reach.len());
    let mut run = 0u64;
    for &r in reach {
        run = run.max(r);
        out.push(run);
    }
    out
}

/// Row-side composed reach at position `k`: `r1(k) + ext2(k + r1(k))`,
/// unknown when the certified band of the first factor leaves the window.
fn compose_reach_at(k: u64, r1: &[u64], ext2: &[u64]) -> u64 {
    let a = r1[k as usize - 1];
    if a == REACH_UNKNOWN {
        return REACH_UNKNOWN;
    }
    let hit = k.saturating_add(a);
    if hit as usize > ext2.len() {
        return REACH_UNKNOWN;
    }
    let b = ext2[hit as usize - 1];
    if b == REACH_UNKNOWN {
        REACH_UNKNOWN
    } else {
        a.saturating_add(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Gfp;

    fn f7() -> Gfp {
        Gfp::new(7).unwrap()
    }

    #[test]
    fn identity_profile_is_zero() {
        let id = WindowMatrix::identity(f7(), 5);
        assert_eq!(id.band_profile().values(), &[0, 0, 0, 0, 0]);
        assert!(id.verify_growth(1.0, 0.0));
    }

    #[test]
    fn single_entry_profile_attributes_to_min_position() {
        let m = WindowMatrix::unit(f7(), 5, 1, 5);
        let p = m.band_profile();
        assert_eq!(p.get(1), 4);
        for k in 2..=5 {
            assert_eq!(p.get(k), 0, "g({k})");
        }
    }

    #[test]
    fn matrix_unit_product() {
        let e12 = WindowMatrix::unit(f7(), 3, 1, 2);
        let e23 = WindowMatrix::unit(f7(), 3, 2, 3);
        let p = e12.mul(&e23).unwrap();
        assert!(p.eq_on_rows(&WindowMatrix::unit(f7(), 3, 1, 3), p.valid_to()));
        assert_eq!(p.get(1, 3), 1);
        assert!(p.valid_to() >= 1);
    }

    #[test]
    fn add_cancels_to_zero() {
        let m = WindowMatrix::from_entries(
            f7(),
            4,
            vec![(1, 2, 3u64), (2, 2, 5), (4, 1, 6)],
        )
        .unwrap();
        let z = m.add(&m.neg()).unwrap();
        assert!(z.is_zero_on_rows(4));
    }

    #[test]
    fn mismatched_windows_rejected() {
        let a = WindowMatrix::identity(f7(), 4);
        let b = WindowMatrix::identity(f7(), 5);
        assert!(matches!(a.add(&b), Err(Error::ConfigMismatch(_))));
        assert!(matches!(a.mul(&b), Err(Error::ConfigMismatch(_))));
    }

    #[test]
    fn transpose_preserves_profile() {
        let m = WindowMatrix::from_entries(
            f7(),
            6,
            vec![(1, 4, 2u64), (3, 2, 1), (5, 5, 3), (6, 2, 4)],
        )
        .unwrap();
        assert_eq!(m.band_profile(), m.transpose().band_profile());
    }

    #[test]
    fn from_entries_rejects_duplicates_and_out_of_range() {
        assert!(WindowMatrix::from_entries(f7(), 3, vec![(1, 1, 1u64), (1, 1, 2)]).is_err());
        assert!(WindowMatrix::from_entries(f7(), 3, vec![(4, 1, 1u64)]).is_err());
    }

    #[test]
    fn validity_shrinks_through_products() {
        // S * S^T is the identity on the exact region; the window edge row
        // must fall outside it because S's row 5 leaves the window.
        let field = f7();
        let fresh = |transposed: bool| {
            let entries = (1..5u64)
                .map(|i| if transposed { (i + 1, i, 1u64) } else { (i, i + 1, 1u64) })
                .collect();
            let mut m = WindowMatrix::from_entries(field.clone(), 5, entries).unwrap();
            // The infinite shift keeps bandwidth 1 at every position.
            m.reach = vec![1; 5];
            m
        };
        let s = fresh(false);
        let st = fresh(true);
        let p = s.mul(&st).unwrap();
        assert_eq!(p.valid_to(), 4);
        let id = WindowMatrix::identity(field, 5);
        assert!(p.eq_on_rows(&id, 4));
        // And the edge row really is wrong for the infinite product.
        assert_eq!(p.get(5, 5), 0);
        // Deriving S^T by transposing the window is sound but strictly more
        // conservative: the certified band of row 5 leaves the window.
        let p2 = s.mul(&s.transpose()).unwrap();
        assert_eq!(p2.valid_to(), 3);
        assert!(p2.eq_on_rows(&id, 3));
    }
}
