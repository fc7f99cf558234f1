//! Infinite matrices given by an entry rule plus a declared growth curve.
//!
//! A [`LazyMatrix`] stands for a row- and column-finite ω×ω matrix. The
//! declared curve is a contract: the rule must return zero outside the band
//! it spans. Materializing a window enumerates only the band and spot-checks
//! the contract on positions outside it, so a miscoded generator fails loudly
//! instead of silently violating every downstream margin computation.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::{GrowthCurve, PROFILE_SLACK};
use crate::window::WindowMatrix;

type Rule<F> = Arc<dyn Fn(u64, u64) -> <F as Field>::Elem + Send + Sync>;
type ReachRule = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

/// An ω×ω matrix described by a pure entry rule, 1-based in both indices.
#[derive(Clone)]
pub struct LazyMatrix<F: Field> {
    name: String,
    field: F,
    curve: GrowthCurve,
    rule: Rule<F>,
    /// Optional per-position bound on the true profile, tighter than the
    /// declared curve (block-diagonal matrices know their block widths).
    reach_rule: Option<ReachRule>,
}

impl<F: Field> fmt::Debug for LazyMatrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyMatrix")
            .field("name", &self.name)
            .field("curve", &self.curve)
            .finish()
    }
}

impl<F: Field> LazyMatrix<F> {
    pub fn new(
        name: impl Into<String>,
        field: F,
        curve: GrowthCurve,
        rule: impl Fn(u64, u64) -> F::Elem + Send + Sync + 'static,
    ) -> Self {
        LazyMatrix { name: name.into(), field, curve, rule: Arc::new(rule), reach_rule: None }
    }

    /// Attaches a tight per-position profile bound; window margins use it in
    /// place of the declared curve. Entries that escape it are rejected
    /// during materialization just like curve violations.
    pub fn with_reach_rule(mut self, reach: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        self.reach_rule = Some(Arc::new(reach));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn declared_curve(&self) -> &GrowthCurve {
        &self.curve
    }

    /// Entry rule evaluated at 1-based `(i, j)`.
    pub fn entry(&self, i: u64, j: u64) -> F::Elem {
        debug_assert!(i >= 1 && j >= 1);
        (self.rule)(i, j)
    }

    pub fn identity(field: F) -> Self {
        let f = field.clone();
        LazyMatrix::new("identity", field, GrowthCurve::power(1.0, 0.0), move |i, j| {
            if i == j {
                f.one()
            } else {
                f.zero()
            }
        })
    }

    pub fn zero(field: F) -> Self {
        let f = field.clone();
        LazyMatrix::new("zero", field, GrowthCurve::power(1.0, 0.0), move |_, _| f.zero())
    }

    /// The one-step shift `S` with `S(i, i+1) = 1`.
    pub fn shift(field: F) -> Self {
        let f = field.clone();
        LazyMatrix::new("shift", field, GrowthCurve::power(1.0, 0.0), move |i, j| {
            if j == i + 1 {
                f.one()
            } else {
                f.zero()
            }
        })
    }

    /// The transposed shift with entries at `(i+1, i)`.
    pub fn shift_transpose(field: F) -> Self {
        let f = field.clone();
        LazyMatrix::new("shift_t", field, GrowthCurve::power(1.0, 0.0), move |i, j| {
            if i == j + 1 {
                f.one()
            } else {
                f.zero()
            }
        })
    }

    /// Single entry `1` at `(i, j)`.
    pub fn unit(field: F, i: u64, j: u64) -> Self {
        let f = field.clone();
        let d = i.abs_diff(j) as f64;
        LazyMatrix::new(
            format!("e({i},{j})"),
            field,
            GrowthCurve::table(vec![d]),
            move |r, c| {
                if r == i && c == j {
                    f.one()
                } else {
                    f.zero()
                }
            },
        )
    }

    /// Materializes the exact `n x n` window.
    ///
    /// Enumerates the declared band only; a nonzero outside the band (found
    /// by deterministic spot checks) is a [`Error::DeclaredCurveViolation`].
    pub fn window(&self, n: u64) -> Result<WindowMatrix<F>> {
        assert!(n >= 1, "window size must be at least 1");
        let bound = |k: u64| -> u64 { (self.curve.eval(k) + PROFILE_SLACK).floor() as u64 };
        let tight = |k: u64| -> u64 {
            match &self.reach_rule {
                Some(r) => r(k),
                None => bound(k),
            }
        };
        let mut rows: Vec<Vec<(u64, F::Elem)>> = Vec::with_capacity(n as usize);
        let mut reach: Vec<u64> = Vec::with_capacity(n as usize);
        for i in 1..=n {
            let hi = i.saturating_add(bound(i)).min(n);
            // Lower side: (i, j) with j < i is allowed iff i <= j + curve(j);
            // curves are nondecreasing, so walking down stops at first failure.
            let mut lo = i;
            while lo > 1 && (lo - 1) + bound(lo - 1) >= i {
                lo -= 1;
            }
            let mut row = Vec::new();
            for j in lo..=hi {
                let v = self.entry(i, j);
                if !self.field.is_zero(&v) {
                    let at = i.min(j);
                    if i.abs_diff(j) > tight(at) {
                        return Err(Error::DeclaredCurveViolation {
                            matrix: self.name.clone(),
                            row: i,
                            col: j,
                        });
                    }
                    row.push((j, v));
                }
            }
            rows.push(row);
            reach.push(tight(i));
        }
        self.spot_check_outside_band(n, &bound)?;
        Ok(WindowMatrix::new_raw(self.field.clone(), n, rows, n, reach))
    }

    /// Deterministic samples strictly outside the declared band.
    fn spot_check_outside_band(&self, n: u64, bound: &dyn Fn(u64) -> u64) -> Result<()> {
        let probe = |i: u64, j: u64| -> Result<()> {
            if !self.field.is_zero(&self.entry(i, j)) {
                return Err(Error::DeclaredCurveViolation { matrix: self.name.clone(), row: i, col: j });
            }
            Ok(())
        };
        for step in 1..=16u64 {
            let i = (step * n) / 16;
            if i < 1 {
                continue;
            }
            // Just past the row band, and the mirrored column-side position.
            let edge = i.saturating_add(bound(i)).saturating_add(1 + step % 3);
            if edge <= n {
                probe(i, edge)?;
                probe(edge, i)?;
            }
        }
        Ok(())
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
    fn identity_window() {
        let w = LazyMatrix::identity(f7()).window(5).unwrap();
        assert_eq!(w.valid_to(), 5);
        assert_eq!(w.nnz(), 5);
        for i in 1..=5 {
            assert_eq!(w.get(i, i), 1);
        }
    }

    #[test]
    fn shift_window_entries() {
        let w = LazyMatrix::shift(f7()).window(4).unwrap();
        assert_eq!(w.valid_to(), 4);
        let got: Vec<(u64, u64)> = w.entries().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(got, vec![(1, 2), (2, 3), (3, 4)]);
    }

    #[test]
    fn shift_profile_with_window_edge() {
        let w = LazyMatrix::shift(f7()).window(5).unwrap();
        assert_eq!(w.band_profile().values(), &[1, 1, 1, 1, 0]);
    }

    #[test]
    fn rule_outside_declared_band_is_rejected() {
        let f = f7();
        let field = f.clone();
        let bad = LazyMatrix::new(
            "bad",
            f,
            GrowthCurve::power(1.0, 0.0),
            move |i, j| {
                // Secretly dense: nonzero far off the declared unit band.
                if j > i + 1 {
                    field.one()
                } else {
                    field.zero()
                }
            },
        );
        assert!(matches!(
            bad.window(64),
            Err(Error::DeclaredCurveViolation { .. })
        ));
    }

    #[test]
    fn unit_matrix_window() {
        let w = LazyMatrix::unit(f7(), 1, 5).window(6).unwrap();
        assert_eq!(w.nnz(), 1);
        assert_eq!(w.get(1, 5), 1);
        let p = w.band_profile();
        assert_eq!(p.get(1), 4);
        assert_eq!(p.get(5), 0);
    }
}
