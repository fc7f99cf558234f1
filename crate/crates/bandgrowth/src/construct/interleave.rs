//! Interleave embedding of `M_n(A)` into B(F): slot `(a, b)` of the matrix
//! algebra occupies rows `≡ a` and columns `≡ b` modulo `n`, so the combined
//! map is a unital homomorphism and stretches the band profile by at most a
//! factor of `n` plus a constant, so the growth exponent is unchanged.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::growth::GrowthCurve;
use crate::lazy::LazyMatrix;

/// One slot image: `x` placed at rows `n(i-1)+a`, columns `n(j-1)+b`.
#[derive(Clone)]
pub struct SlotImage<F: Field> {
    degree: u64,
    slot: (u64, u64),
    matrix: LazyMatrix<F>,
}

impl<F: Field> SlotImage<F> {
    pub fn slot(&self) -> (u64, u64) {
        self.slot
    }

    pub fn degree(&self) -> u64 {
        self.degree
    }

    pub fn matrix(&self) -> &LazyMatrix<F> {
        &self.matrix
    }
}

/// Embeds `x` into slot `(a, b)` of the degree-`n` interleaving.
pub fn interleave_slot<F: Field>(x: &LazyMatrix<F>, n: u64, slot: (u64, u64)) -> Result<SlotImage<F>> {
    let (a, b) = slot;
    if n < 1 || a < 1 || a > n || b < 1 || b > n {
        return Err(Error::OutOfRange(format!("slot ({a}, {b}) outside degree {n}")));
    }
    let field = x.field().clone();
    let zero_field = field.clone();
    let inner = x.clone();
    let base = x.declared_curve().clone();
    // profile'(m) <= n * g(ceil(m/n) + 1) + n.
    let curve = InterleaveCurve { n, base }.into_curve();
    let name = format!("interleave({}, n={n}, slot=({a},{b}))", x.name());
    let matrix = LazyMatrix::new(name, field, curve, move |i, j| {
        if i >= a && (i - a) % n == 0 && j >= b && (j - b) % n == 0 {
            inner.entry((i - a) / n + 1, (j - b) / n + 1)
        } else {
            zero_field.zero()
        }
    });
    Ok(SlotImage { degree: n, slot, matrix })
}

struct InterleaveCurve {
    n: u64,
    base: GrowthCurve,
}

impl InterleaveCurve {
    fn into_curve(self) -> GrowthCurve {
        // Power curves transform in closed form:
        // n * c * (m/n + 2)^s + n <= c * n^(1-s) * (m + 2n)^s + n.
        // A table would need a horizon, so over-approximate with a power
        // curve when the base is one; otherwise fall back to a generous
        // linear bound (interleaving never exceeds it on a window).
        match self.base {
            GrowthCurve::Power { c, s } => {
                let scaled = c * (self.n as f64).powf(1.0 - s) + 2.0 * self.n as f64 + c;
                GrowthCurve::Power { c: scaled, s }
            }
            other => {
                let n = self.n;
                // Bound a table curve by its largest stored value.
                let peak = match &other {
                    GrowthCurve::Table(t) => t.iter().cloned().fold(0.0, f64::max),
                    _ => 0.0,
                };
                GrowthCurve::table(vec![n as f64 * (peak + 2.0) + n as f64])
            }
        }
    }
}

/// Sums the distinct slot images into a single lazy matrix; slots must cover
/// distinct residues, and a duplicate is a [`Error::SlotCollision`].
pub fn interleave_combine<F: Field>(images: Vec<SlotImage<F>>) -> Result<LazyMatrix<F>> {
    if images.is_empty() {
        return Err(Error::OutOfRange("no slot images to combine".into()));
    }
    let n = images[0].degree;
    let field = images[0].matrix.field().clone();
    let mut seen = vec![false; (n * n) as usize];
    let mut table: Vec<Option<LazyMatrix<F>>> = vec![None; (n * n) as usize];
    let mut worst_c = 0.0f64;
    let mut worst_s = 0.0f64;
    for img in images {
        if img.degree != n {
            return Err(Error::ConfigMismatch("mixed interleave degrees".into()));
        }
        let (a, b) = img.slot;
        let idx = ((a - 1) * n + (b - 1)) as usize;
        if seen[idx] {
            return Err(Error::SlotCollision { a, b });
        }
        seen[idx] = true;
        if let GrowthCurve::Power { c, s } = img.matrix.declared_curve() {
            worst_c = worst_c.max(*c);
            worst_s = worst_s.max(*s);
        }
        table[idx] = Some(img.matrix);
    }
    let zero_field = field.clone();
    let curve = GrowthCurve::power(worst_c.max(1.0), worst_s);
    Ok(LazyMatrix::new(
        format!("interleave_combined(n={n})"),
        field,
        curve,
        move |i, j| {
            let a = (i - 1) % n + 1;
            let b = (j - 1) % n + 1;
            let idx = ((a - 1) * n + (b - 1)) as usize;
            match &table[idx] {
                Some(m) => m.entry(i, j),
                None => zero_field.zero(),
            }
        },
    ))
}
