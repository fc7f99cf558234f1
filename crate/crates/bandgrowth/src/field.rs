//! Exact scalar arithmetic: prime fields GF(p) for p < 2^61 and the
//! rationals with big-integer fractions.
//!
//! Every entry of every matrix in this crate lives in one of these fields;
//! there is no floating point anywhere near matrix entries. Growth-curve
//! *bounds* are analytic and use `f64`; see [`crate::growth`].

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a coefficient field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum FieldConfig {
    #[serde(rename = "gfp")]
    Gfp { p: u64 },
    #[serde(rename = "q")]
    Rationals,
}

impl fmt::Display for FieldConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldConfig::Gfp { p } => write!(f, "gfp:{p}"),
            FieldConfig::Rationals => write!(f, "q"),
        }
    }
}

impl FieldConfig {
    /// Parses `gfp:7` or `q`.
    pub fn parse(s: &str) -> Result<FieldConfig> {
        let s = s.trim();
        if s == "q" || s == "Q" {
            return Ok(FieldConfig::Rationals);
        }
        if let Some(p) = s.strip_prefix("gfp:") {
            let p: u64 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad prime in field spec `{s}`")))?;
            return Ok(FieldConfig::Gfp { p });
        }
        Err(Error::Parse(format!(
            "unknown field spec `{s}` (expected `gfp:<p>` or `q`)"
        )))
    }
}

/// A field with exact arithmetic. Implementations carry whatever run-time
/// data the arithmetic needs (the modulus for GF(p), nothing for ℚ).
pub trait Field: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    type Elem: Clone + PartialEq + fmt::Debug + Send + Sync + 'static;

    fn config(&self) -> FieldConfig;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;

    /// Multiplicative inverse; error on zero.
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;

    fn div(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        Ok(self.mul(a, &self.inv(b)?))
    }

    fn from_i64(&self, v: i64) -> Self::Elem;

    /// Parses the value-string format used in matrix files.
    fn parse_elem(&self, s: &str) -> Result<Self::Elem>;
    /// Renders an element as the value-string format.
    fn render_elem(&self, a: &Self::Elem) -> String;

    /// Uniform sample (zero allowed).
    fn sample(&self, rng: &mut dyn RngCore) -> Self::Elem;

    /// Uniform nonzero sample.
    fn sample_nonzero(&self, rng: &mut dyn RngCore) -> Self::Elem {
        loop {
            let x = self.sample(rng);
            if !self.is_zero(&x) {
                return x;
            }
        }
    }
}

/// The prime field GF(p), elements stored as canonical residues in `[0, p)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gfp {
    p: u64,
    /// p < 2^32, so products fit in u64 without widening to u128.
    narrow: bool,
}

impl Gfp {
    pub fn new(p: u64) -> Result<Gfp> {
        if p >= (1 << 61) || !is_prime_u64(p) {
            return Err(Error::NotPrime(p));
        }
        Ok(Gfp { p, narrow: p < (1 << 32) })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn reduce_i64(&self, v: i64) -> u64 {
        let m = v.rem_euclid(self.p as i64);
        m as u64
    }
}

impl Field for Gfp {
    type Elem = u64;

    fn config(&self) -> FieldConfig {
        FieldConfig::Gfp { p: self.p }
    }

    #[inline]
    fn zero(&self) -> u64 {
        0
    }

    #[inline]
    fn one(&self) -> u64 {
        1 % self.p
    }

    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }

    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        if self.narrow {
            (a * b) % self.p
        } else {
            ((*a as u128 * *b as u128) % self.p as u128) as u64
        }
    }

    fn inv(&self, a: &u64) -> Result<u64> {
        if *a == 0 {
            return Err(Error::OutOfRange("division by zero".into()));
        }
        // Fermat: a^(p-2) mod p.
        Ok(pow_mod(*a, self.p - 2, self.p))
    }

    fn from_i64(&self, v: i64) -> u64 {
        self.reduce_i64(v)
    }

    fn parse_elem(&self, s: &str) -> Result<u64> {
        let v: i64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad GF({}) value `{s}`", self.p)))?;
        Ok(self.reduce_i64(v))
    }

    fn render_elem(&self, a: &u64) -> String {
        a.to_string()
    }

    fn sample(&self, rng: &mut dyn RngCore) -> u64 {
        // Rejection sampling; the retry probability is negligible for small p.
        let bound = u64::MAX - u64::MAX % self.p;
        loop {
            let x = rng.next_u64();
            if x < bound {
                return x % self.p;
            }
        }
    }
}

/// The rational field ℚ with exact big-integer fractions.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = Arc<BigRational>;

    fn config(&self) -> FieldConfig {
        FieldConfig::Rationals
    }

    fn zero(&self) -> Self::Elem {
        Arc::new(BigRational::zero())
    }

    fn one(&self) -> Self::Elem {
        Arc::new(BigRational::one())
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        Arc::new(a.as_ref() + b.as_ref())
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        Arc::new(a.as_ref() - b.as_ref())
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        Arc::new(-a.as_ref())
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        Arc::new(a.as_ref() * b.as_ref())
    }

    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem> {
        if a.is_zero() {
            return Err(Error::OutOfRange("division by zero".into()));
        }
        Ok(Arc::new(a.recip()))
    }

    fn from_i64(&self, v: i64) -> Self::Elem {
        Arc::new(BigRational::from_integer(BigInt::from(v)))
    }

    fn parse_elem(&self, s: &str) -> Result<Self::Elem> {
        let s = s.trim();
        let parse_int = |t: &str| -> Result<BigInt> {
            t.parse()
                .map_err(|_| Error::Parse(format!("bad rational value `{s}`")))
        };
        if let Some((num, den)) = s.split_once('/') {
            let den = parse_int(den)?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in `{s}`")));
            }
            Ok(Arc::new(BigRational::new(parse_int(num)?, den)))
        } else {
            Ok(Arc::new(BigRational::from_integer(parse_int(s)?)))
        }
    }

    fn render_elem(&self, a: &Self::Elem) -> String {
        if a.denom().is_one() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Self::Elem {
        // Small numerators/denominators keep downstream exact arithmetic
        // from ballooning during long sampled products.
        let num = (rng.next_u32() % 21) as i64 - 10;
        let den = (rng.next_u32() % 6) as i64 + 1;
        Arc::new(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc: u64 = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for u64 (the fixed base set is exact below 3.3e24).
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut r = 0u32;
    while d % 2 == 0 {
        d /= 2;
        r += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..r {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn primality_small_cases() {
        let primes = [2u64, 3, 5, 7, 61, 2_147_483_647, 2_305_843_009_213_693_951];
        for p in primes {
            assert!(is_prime_u64(p), "{p} should be prime");
        }
        for c in [0u64, 1, 4, 9, 91, 561, 2_147_483_649] {
            assert!(!is_prime_u64(c), "{c} should be composite");
        }
    }

    #[test]
    fn gfp_rejects_bad_moduli() {
        assert!(Gfp::new(6).is_err());
        assert!(Gfp::new(1 << 61).is_err());
        assert!(Gfp::new(7).is_ok());
    }

    #[test]
    fn gfp_inverse_round_trip() {
        let f = Gfp::new(7).unwrap();
        for a in 1..7u64 {
            let inv = f.inv(&a).unwrap();
            assert_eq!(f.mul(&a, &inv), 1);
        }
        assert!(f.inv(&0).is_err());
    }

    #[test]
    fn rationals_parse_render() {
        let f = Rationals;
        let x = f.parse_elem("-3/6").unwrap();
        assert_eq!(f.render_elem(&x), "-1/2");
        let y = f.parse_elem("5").unwrap();
        assert_eq!(f.render_elem(&y), "5");
        assert!(f.parse_elem("1/0").is_err());
    }

    #[test]
    fn field_config_parse() {
        assert_eq!(FieldConfig::parse("gfp:7").unwrap(), FieldConfig::Gfp { p: 7 });
        assert_eq!(FieldConfig::parse("q").unwrap(), FieldConfig::Rationals);
        assert!(FieldConfig::parse("f64").is_err());
    }

    // Field axioms on sampled triples, for both fields.
    fn axioms_hold<F: Field>(field: &F, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..200 {
            let a = field.sample(&mut rng);
            let b = field.sample(&mut rng);
            let c = field.sample(&mut rng);
            assert_eq!(field.add(&a, &b), field.add(&b, &a));
            assert_eq!(field.mul(&a, &b), field.mul(&b, &a));
            assert_eq!(
                field.add(&field.add(&a, &b), &c),
                field.add(&a, &field.add(&b, &c))
            );
            assert_eq!(
                field.mul(&field.mul(&a, &b), &c),
                field.mul(&a, &field.mul(&b, &c))
            );
            assert_eq!(
                field.mul(&a, &field.add(&b, &c)),
                field.add(&field.mul(&a, &b), &field.mul(&a, &c))
            );
            assert_eq!(field.add(&a, &field.neg(&a)), field.zero());
            if !field.is_zero(&a) {
                let inv = field.inv(&a).unwrap();
                assert_eq!(field.mul(&a, &inv), field.one());
            }
        }
    }

    #[test]
    fn gfp_axioms() {
        axioms_hold(&Gfp::new(7).unwrap(), 1);
        axioms_hold(&Gfp::new(2_147_483_647).unwrap(), 2);
    }

    #[test]
    fn rational_axioms() {
        axioms_hold(&Rationals, 3);
    }

    proptest! {
        #[test]
        fn gfp_closed_under_ops(a in 0u64..7, b in 0u64..7) {
            let f = Gfp::new(7).unwrap();
            prop_assert!(f.add(&a, &b) < 7);
            prop_assert!(f.mul(&a, &b) < 7);
            prop_assert!(f.sub(&a, &b) < 7);
        }
    }
}
