//! Dense univariate polynomials over complex scalars.
//!
//! Coefficients are stored in ascending power order. A normalized polynomial
//! either has a nonzero leading coefficient or is the zero polynomial with an
//! empty coefficient vector. Values are immutable once built.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Complex scalar used throughout the crate.
pub type C64 = Complex64;

/// Trailing coefficients at or below this fraction of the largest coefficient
/// are treated as zero after additive cancellation.
pub const ZERO_THRESHOLD: f64 = 1e-14;

/// Relative imaginary-part threshold for recognizing real values.
pub const REAL_THRESHOLD: f64 = 1e-9;

/// `true` when `z` is real up to `|Im z| <= 1e-9 (1 + |Re z|)`.
pub fn is_real(z: C64) -> bool {
    z.im.abs() <= REAL_THRESHOLD * (1.0 + z.re.abs())
}

/// `true` when both components are finite.
pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<C64>,
}

impl ComplexPoly {
    /// Builds a polynomial from ascending coefficients, trimming trailing
    /// entries that are negligible relative to the largest one.
    pub fn new(coeffs: Vec<C64>) -> Self {
        let mut coeffs = coeffs;
        let max = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        while let Some(last) = coeffs.last() {
            if last.norm() <= ZERO_THRESHOLD * max || *last == C64::new(0.0, 0.0) {
                coeffs.pop();
            } else {
                break;
            }
        }
        Self { coeffs }
    }

    /// Only strips exact zeros. Used where no cancellation can occur, so that
    /// legitimately small leading terms survive.
    fn trimmed_exact(mut coeffs: Vec<C64>) -> Self {
        while coeffs.last() == Some(&C64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::new(vec![c])
    }

    /// `c z^k`
    pub fn monomial(c: C64, k: usize) -> Self {
        let mut coeffs = vec![C64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::trimmed_exact(coeffs)
    }

    /// Monic polynomial `prod (z - r)` over `roots`; the empty product is 1.
    pub fn from_roots(roots: &[C64]) -> Self {
        let mut coeffs = Vec::with_capacity(roots.len() + 1);
        coeffs.push(C64::new(1.0, 0.0));
        for &r in roots {
            coeffs.push(C64::new(0.0, 0.0));
            for k in (1..coeffs.len()).rev() {
                let prev = coeffs[k - 1];
                coeffs[k] = prev - r * coeffs[k];
            }
            coeffs[0] = -r * coeffs[0];
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> Option<C64> {
        self.coeffs.last().copied()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `sum |c_k| r^k`, the evaluation bound used to normalize residuals.
    pub fn eval_abs(&self, r: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        let coeffs = self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect();
        Self::trimmed_exact(coeffs)
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == C64::new(0.0, 0.0) {
            return Self::zero();
        }
        Self::trimmed_exact(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Multiplies by `z^k`.
    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut coeffs = vec![C64::new(0.0, 0.0); k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { coeffs }
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &ComplexPoly) -> (ComplexPoly, ComplexPoly) {
        let d = divisor.degree().expect("division by the zero polynomial");
        let lead = divisor.coeffs[d];
        let mut rem = self.coeffs.clone();
        if rem.len() <= d {
            return (Self::zero(), self.clone());
        }
        let mut quot = vec![C64::new(0.0, 0.0); rem.len() - d];
        for k in (0..quot.len()).rev() {
            let q = rem[k + d] / lead;
            quot[k] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
        }
        rem.truncate(d);
        (Self::new(quot), Self::new(rem))
    }

    /// Evaluates the polynomial at every point of `zs`.
    pub fn eval_many(&self, zs: &[C64]) -> Vec<C64> {
        zs.iter().map(|&z| self.eval(z)).collect()
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..len).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        let len = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new((0..len).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &p) in self.coeffs.iter().enumerate() {
            for (j, &q) in rhs.coeffs.iter().enumerate() {
                out[i + j] += p * q;
            }
        }
        ComplexPoly::trimmed_exact(out)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        ComplexPoly { coeffs: self.coeffs.iter().map(|&c| -c).collect() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for ComplexPoly {
            type Output = ComplexPoly;
            fn $method(self, rhs: ComplexPoly) -> ComplexPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&ComplexPoly> for ComplexPoly {
            type Output = ComplexPoly;
            fn $method(self, rhs: &ComplexPoly) -> ComplexPoly {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        -&self
    }
}

impl fmt::Display for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if *c == C64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

// Polynomials travel as JSON arrays of [re, im] pairs in ascending power order.
impl Serialize for ComplexPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(deserializer)?;
        if pairs.iter().flatten().any(|x| !x.is_finite()) {
            return Err(serde::de::Error::custom("non-finite polynomial coefficient"));
        }
        Ok(ComplexPoly::new(pairs.into_iter().map(|[re, im]| C64::new(re, im)).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn eval_examples() {
        let p = ComplexPoly::from_real(&[-2.0, 0.0, 1.0]);
        assert!(p.eval(c(2f64.sqrt())).norm() < 1e-15);
        assert_eq!(ComplexPoly::one().eval(C64::new(5.0, 3.0)), c(1.0));
        // 1 + 1 + 1 + 1 + 1 by direct summation
        let q = ComplexPoly::from_real(&[1.0; 5]);
        let direct: C64 = (0..5).map(|k| c(1.0).powi(k)).sum();
        assert_eq!(q.eval(c(1.0)), direct);
        assert_eq!(direct, c(5.0));
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(ComplexPoly::monomial(c(1.0), 3).derivative(), ComplexPoly::monomial(c(3.0), 2));
        assert!(ComplexPoly::constant(c(7.0)).derivative().is_zero());
        let p = ComplexPoly::from_real(&[-1.0, 0.0, 1.0]);
        assert_eq!(p.derivative(), ComplexPoly::from_real(&[0.0, 2.0]));
    }

    #[test]
    fn ring_examples() {
        let zm1 = ComplexPoly::from_real(&[-1.0, 1.0]);
        let zp1 = ComplexPoly::from_real(&[1.0, 1.0]);
        assert_eq!(&zm1 * &zp1, ComplexPoly::from_real(&[-1.0, 0.0, 1.0]));
        assert!((&zm1 + &zm1.scale(c(-1.0))).is_zero());
        assert_eq!(
            &ComplexPoly::monomial(c(1.0), 2) * &ComplexPoly::monomial(c(1.0), 3),
            ComplexPoly::monomial(c(1.0), 5)
        );
    }

    #[test]
    fn from_roots_examples() {
        let s = 2f64.sqrt();
        let p = ComplexPoly::from_roots(&[c(s), c(-s)]);
        assert!((p.coeff(0) - c(-2.0)).norm() < 1e-15);
        assert_eq!(p.coeff(1), c(0.0));
        assert_eq!(p.coeff(2), c(1.0));
        assert_eq!(ComplexPoly::from_roots(&[]), ComplexPoly::one());
        assert_eq!(ComplexPoly::from_roots(&[c(0.0)]), ComplexPoly::from_real(&[0.0, 1.0]));
    }

    #[test]
    fn zero_detection_after_cancellation() {
        let p = ComplexPoly::new(vec![c(1.0), c(2.0), c(1e-16)]);
        assert_eq!(p.degree(), Some(1));
        // leading terms far below 1 survive construction paths without cancellation
        let q = ComplexPoly::from_roots(&[c(1e8), c(1e8)]);
        assert_eq!(q.degree(), Some(2));
    }

    #[test]
    fn div_rem_reconstructs() {
        let p = ComplexPoly::from_real(&[1.0, -3.0, 0.5, 2.0, 1.0]);
        let d = ComplexPoly::from_real(&[2.0, 0.0, 1.0]);
        let (q, r) = p.div_rem(&d);
        assert!(r.degree().unwrap_or(0) < 2);
        let back = &(&q * &d) + &r;
        for k in 0..5 {
            assert!((back.coeff(k) - p.coeff(k)).norm() < 1e-13);
        }
    }

    #[test]
    fn json_pairs() {
        let p = ComplexPoly::new(vec![C64::new(1.0, -2.0), C64::new(0.5, 0.0)]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, "[[1.0,-2.0],[0.5,0.0]]");
        let back: ComplexPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    fn arb_c64() -> impl Strategy<Value = C64> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_map(|(re, im)| C64::new(re, im))
    }

    fn arb_int_poly() -> impl Strategy<Value = ComplexPoly> {
        prop::collection::vec((-9i32..=9, -9i32..=9), 0..6)
            .prop_map(|v| ComplexPoly::new(v.into_iter().map(|(a, b)| C64::new(a as f64, b as f64)).collect()))
    }

    proptest! {
        #[test]
        fn roots_are_zeros(roots in prop::collection::vec(arb_c64(), 0..7)) {
            let p = ComplexPoly::from_roots(&roots);
            prop_assert_eq!(p.degree(), Some(roots.len()));
            let scale = p.max_abs_coeff().max(1.0);
            for &r in &roots {
                prop_assert!(p.eval(r).norm() <= 1e-12 * scale);
            }
        }

        #[test]
        fn derivative_is_linear(p in arb_int_poly(), q in arb_int_poly(), a in -5i32..5, b in -5i32..5) {
            // small integers keep every product exact in f64
            let (a, b) = (c(a as f64), c(b as f64));
            let lhs = (&p.scale(a) + &q.scale(b)).derivative();
            let rhs = &p.derivative().scale(a) + &q.derivative().scale(b);
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn mul_commutes_and_distributes(p in arb_int_poly(), q in arb_int_poly(), r in arb_int_poly()) {
            prop_assert_eq!(&p * &q, &q * &p);
            prop_assert_eq!(&p * &(&q + &r), &(&p * &q) + &(&p * &r));
            if let (Some(dp), Some(dq)) = (p.degree(), q.degree()) {
                prop_assert_eq!((&p * &q).degree(), Some(dp + dq));
            }
        }
    }
}
