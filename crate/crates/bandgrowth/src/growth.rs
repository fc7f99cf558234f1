//! Growth-curve calculus: power and table curves, the product-composition
//! bound, filtration membership, minimal constants, iterated power growth,
//! and log-log exponent fitting.
//!
//! Curves are analytic bounds, so they use `f64`. Comparisons against exact
//! integer band profiles use a fixed `1e-9` slack; matrix entries themselves
//! never touch floating point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::window::{BandProfile, WindowMatrix};

/// Slack for comparing analytic bounds against integer profiles.
pub const PROFILE_SLACK: f64 = 1e-9;

/// A nondecreasing bound `g(n)` on per-position bandwidth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GrowthCurve {
    /// `c * n^s`.
    Power { c: f64, s: f64 },
    /// Explicit nondecreasing table, clamped to its last entry beyond the end.
    Table(Vec<f64>),
    /// Product-composition of two curves: `g(n) + h(n + g(n))`, symmetrized.
    /// Kept unevaluated so the bound stays exact at every `n`.
    Composed(Box<GrowthCurve>, Box<GrowthCurve>),
}

impl GrowthCurve {
    pub fn power(c: f64, s: f64) -> GrowthCurve {
        assert!(c >= 0.0 && c.is_finite(), "curve constant must be nonnegative");
        assert!((0.0..=1.0).contains(&s), "curve exponent must lie in [0, 1]");
        GrowthCurve::Power { c, s }
    }

    /// Builds a table curve; entries are normalized to a running maximum so
    /// the nondecreasing invariant holds by construction.
    pub fn table(values: Vec<f64>) -> GrowthCurve {
        let mut out = Vec::with_capacity(values.len());
        let mut run = 0.0f64;
        for v in values {
            assert!(v >= 0.0 && v.is_finite(), "table entries must be nonnegative");
            run = run.max(v);
            out.push(run);
        }
        GrowthCurve::Table(out)
    }

    /// Evaluates the bound at 1-based position `n >= 1`.
    pub fn eval(&self, n: u64) -> f64 {
        debug_assert!(n >= 1);
        match self {
            GrowthCurve::Power { c, s } => c * (n as f64).powf(*s),
            GrowthCurve::Table(t) => {
                if t.is_empty() {
                    0.0
                } else {
                    let idx = (n as usize - 1).min(t.len() - 1);
                    t[idx]
                }
            }
            GrowthCurve::Composed(g, h) => {
                let gn = g.eval(n);
                let hn = h.eval(n);
                let row = gn + h.eval(n + gn.ceil() as u64);
                let col = hn + g.eval(n + hn.ceil() as u64);
                row.max(col)
            }
        }
    }
}

/// One level `W_s(c)` of the growth filtration: matrices for which
/// `c * n^s` is a growth curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiltrationLevel {
    pub s: f64,
    pub c: f64,
}

impl FiltrationLevel {
    pub fn new(s: f64, c: f64) -> Result<FiltrationLevel> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::ExponentOutOfRange(format!("s = {s} not in [0, 1]")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::OutOfRange(format!("filtration constant c = {c} must be positive")));
        }
        Ok(FiltrationLevel { s, c })
    }
}

/// Composition bound for a product: if `g` bounds `x` and `h` bounds `y`,
/// the returned curve bounds `x * y`.
///
/// The one-sided form `g(n) + h(n + g(n))` only covers row displacements;
/// column displacements need the mirrored term, so the result evaluates the
/// maximum of both. Closed power forms are returned where they exist
/// (matching exponents 0 or 1); otherwise the composition stays symbolic.
pub fn compose_product(g: &GrowthCurve, h: &GrowthCurve) -> GrowthCurve {
    if let (GrowthCurve::Power { c: cg, s: sg }, GrowthCurve::Power { c: ch, s: sh }) = (g, h) {
        if *sg == 0.0 && *sh == 0.0 {
            return GrowthCurve::power(cg + ch, 0.0);
        }
        if *sg == 1.0 && *sh == 1.0 {
            // g(n) + h(n + g(n)) = cg*n + ch*(1 + cg)*n, symmetric in the max.
            let row = cg + ch * (1.0 + cg);
            let col = ch + cg * (1.0 + ch);
            return GrowthCurve::power(row.max(col), 1.0);
        }
    }
    GrowthCurve::Composed(Box::new(g.clone()), Box::new(h.clone()))
}

/// Does `w` lie in the filtration level `W_s(c)` as far as the window shows?
pub fn membership<F: Field>(w: &WindowMatrix<F>, level: FiltrationLevel) -> bool {
    w.verify_growth(level.c, level.s)
}

/// Minimal constant `c` with `profile(k) <= c * k^s` for all `k <= valid_to`;
/// `0` for the zero matrix.
pub fn minimal_constant<F: Field>(w: &WindowMatrix<F>, s: f64) -> f64 {
    let profile = w.band_profile();
    let mut c = 0.0f64;
    for k in 1..=w.valid_to() {
        let g = profile.get(k);
        if g > 0 {
            c = c.max(g as f64 / (k as f64).powf(s));
        }
    }
    c
}

/// Result of iterating the filtration recurrence `b_{m+1}(n) = b_m(n) + c (n + b_m(n))^s`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerGrowthReport {
    pub c: f64,
    pub s: f64,
    pub m_max: u32,
    pub n_grid: Vec<u64>,
    /// Minimal `d` with `b_m(n) <= d * m^(1/(1-s)) * n^s` over the whole grid.
    pub fitted_d: f64,
    /// Worst observed ratio `b_m(n) / (m^(1/(1-s)) * n^s)`; equals `fitted_d`.
    pub worst_ratio: f64,
    /// Sampled `(m, n, b_m(n))` rows.
    pub grid: Vec<(u32, u64, f64)>,
}

/// Raw recurrence values `b_m(n)` for `m = 1..=m_max` over `n_grid`.
/// Works for any `s <= 1`; at `s = 1` the values grow exponentially in `m`.
pub fn power_growth_grid(c: f64, s: f64, m_max: u32, n_grid: &[u64]) -> Vec<(u32, u64, f64)> {
    let mut rows = Vec::with_capacity(m_max as usize * n_grid.len());
    for &n in n_grid {
        let nf = n as f64;
        let mut b = c * nf.powf(s);
        rows.push((1, n, b));
        for m in 2..=m_max {
            b += c * (nf + b).powf(s);
            rows.push((m, n, b));
        }
    }
    rows
}

/// Checks the polynomial power-growth bound for `s < 1` and reports the
/// minimal constant `d` realizing it on the sampled grid.
pub fn power_growth_check(c: f64, s: f64, m_max: u32, n_grid: &[u64]) -> Result<PowerGrowthReport> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::ExponentOutOfRange(format!(
            "s = {s}: the polynomial bound needs 0 <= s < 1 (powers grow exponentially at s = 1; \
             use the raw grid for report-only output)"
        )));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::OutOfRange(format!("c = {c} must be positive")));
    }
    if m_max == 0 || n_grid.is_empty() {
        return Err(Error::OutOfRange("empty power-growth sample grid".into()));
    }
    let grid = power_growth_grid(c, s, m_max, n_grid);
    let alpha = 1.0 / (1.0 - s);
    let mut worst = 0.0f64;
    for &(m, n, b) in &grid {
        let denom = (m as f64).powf(alpha) * (n as f64).powf(s);
        worst = worst.max(b / denom);
    }
    Ok(PowerGrowthReport {
        c,
        s,
        m_max,
        n_grid: n_grid.to_vec(),
        fitted_d: worst,
        worst_ratio: worst,
        grid,
    })
}

/// Least-squares fit of `log g(k) = log c + s log k`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ExponentFit {
    pub c: f64,
    pub s: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
    pub points: usize,
}

/// Fits a power law to a band profile on log-log axes, skipping the first
/// `skip` positions (small-k noise dominates otherwise) and all zero entries.
pub fn fit_exponent(profile: &BandProfile, skip: u64) -> Result<ExponentFit> {
    let collect = |skip: u64| {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for k in 1..=profile.len() as u64 {
            let g = profile.get(k);
            if k > skip && g >= 1 {
                xs.push((k as f64).ln());
                ys.push((g as f64).ln());
            }
        }
        (xs, ys)
    };
    let (mut xs, mut ys) = collect(skip);
    if xs.is_empty() {
        // The burn-in may swallow a short window entirely; only a truly zero
        // profile is an error.
        (xs, ys) = collect(0);
    }
    if xs.is_empty() {
        return Err(Error::ZeroProfile);
    }
    if xs.len() == 1 {
        // A single point pins the constant with exponent zero.
        return Ok(ExponentFit { c: ys[0].exp(), s: 0.0, residual: 0.0, points: 1 });
    }
    let n = xs.len() as f64;
    let sum_x: f64 = xs.iter().sum();
    let sum_y: f64 = ys.iter().sum();
    let sum_xx: f64 = xs.iter().map(|x| x * x).sum();
    let sum_xy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    let denom = n * sum_xx - sum_x * sum_x;
    let slope = if denom.abs() < 1e-12 {
        0.0
    } else {
        (n * sum_xy - sum_x * sum_y) / denom
    };
    let intercept = (sum_y - slope * sum_x) / n;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    Ok(ExponentFit {
        c: intercept.exp(),
        s: slope,
        residual: (ss_res / n).sqrt(),
        points: xs.len(),
    })
}

/// Standard R² of observations `ys` against predictions `preds`.
pub fn r_squared(ys: &[f64], preds: &[f64]) -> f64 {
    assert_eq!(ys.len(), preds.len());
    let n = ys.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let mean = ys.iter().sum::<f64>() / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - mean) * (y - mean)).sum();
    let ss_res: f64 = ys.iter().zip(preds).map(|(y, p)| (y - p) * (y - p)).sum();
    if ss_tot < 1e-12 {
        if ss_res < 1e-12 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}
