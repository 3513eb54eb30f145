//! Hyper-dual scalars `a + a₁ε + a₂ε* + a₃εε*` with `ε² = (ε*)² = 0` and
//! `εε* ≠ 0`.
//!
//! Evaluating a twice-differentiable `f` at `a + Δ(ε + ε*)` gives
//! `f(a) + Δf′(a)(ε + ε*) + Δ²f″(a)εε*`, so the ε slot carries the first
//! directional derivative and the εε* slot the second.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Real parts at or below this magnitude are treated as zero by [`HyperDual::inv`].
pub const INV_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct HyperDual {
    pub re: f64,
    pub eps: f64,
    pub eps_star: f64,
    pub eps_eps_star: f64,
}

/// Names one of the four components of a [`HyperDual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Re,
    Eps,
    EpsStar,
    EpsEpsStar,
}

impl HyperDual {
    pub const ZERO: HyperDual = HyperDual::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: HyperDual = HyperDual::new(1.0, 0.0, 0.0, 0.0);

    pub const fn new(re: f64, eps: f64, eps_star: f64, eps_eps_star: f64) -> Self {
        HyperDual { re, eps, eps_star, eps_eps_star }
    }

    pub const fn real(re: f64) -> Self {
        HyperDual::new(re, 0.0, 0.0, 0.0)
    }

    /// `a + Δ(ε + ε*)`, the seed used for second directional derivatives.
    pub const fn seed(a: f64, delta: f64) -> Self {
        HyperDual::new(a, delta, delta, 0.0)
    }

    pub fn coeff(&self, slot: Slot) -> f64 {
        match slot {
            Slot::Re => self.re,
            Slot::Eps => self.eps,
            Slot::EpsStar => self.eps_star,
            Slot::EpsEpsStar => self.eps_eps_star,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.re, self.eps, self.eps_star, self.eps_eps_star]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        HyperDual::new(a[0], a[1], a[2], a[3])
    }

    pub fn scale(self, c: f64) -> Self {
        HyperDual::new(c * self.re, c * self.eps, c * self.eps_star, c * self.eps_eps_star)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    /// Multiplicative inverse `(1/a, −a₁/a², −a₂/a², 2a₁a₂/a³ − a₃/a²)`.
    pub fn inv(self) -> Result<Self> {
        let a = self.re;
        if !(a.abs() > INV_TOL) {
            return Err(Error::NonInvertible { re: a });
        }
        let r = 1.0 / a;
        let r2 = r * r;
        Ok(HyperDual::new(
            r,
            -self.eps * r2,
            -self.eps_star * r2,
            2.0 * self.eps * self.eps_star * r2 * r - self.eps_eps_star * r2,
        ))
    }

    pub fn checked_div(self, rhs: HyperDual) -> Result<Self> {
        Ok(self * rhs.inv()?)
    }
}

impl fmt::Display for HyperDual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}ε + {}ε* + {}εε*", self.re, self.eps, self.eps_star, self.eps_eps_star)
    }
}

impl From<f64> for HyperDual {
    fn from(re: f64) -> Self {
        HyperDual::real(re)
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    fn add(self, rhs: HyperDual) -> HyperDual {
        HyperDual::new(
            self.re + rhs.re,
            self.eps + rhs.eps,
            self.eps_star + rhs.eps_star,
            self.eps_eps_star + rhs.eps_eps_star,
        )
    }
}

impl Sub for HyperDual {
    type Output = HyperDual;
    fn sub(self, rhs: HyperDual) -> HyperDual {
        self + (-rhs)
    }
}

impl Neg for HyperDual {
    type Output = HyperDual;
    fn neg(self) -> HyperDual {
        self.scale(-1.0)
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    fn mul(self, rhs: HyperDual) -> HyperDual {
        let (a, b) = (self, rhs);
        HyperDual::new(
            a.re * b.re,
            a.re * b.eps + a.eps * b.re,
            a.re * b.eps_star + a.eps_star * b.re,
            a.re * b.eps_eps_star + a.eps * b.eps_star + a.eps_star * b.eps + a.eps_eps_star * b.re,
        )
    }
}

impl Mul<f64> for HyperDual {
    type Output = HyperDual;
    fn mul(self, rhs: f64) -> HyperDual {
        self.scale(rhs)
    }
}

impl AddAssign for HyperDual {
    fn add_assign(&mut self, rhs: HyperDual) {
        *self = *self + rhs;
    }
}

impl SubAssign for HyperDual {
    fn sub_assign(&mut self, rhs: HyperDual) {
        *self = *self - rhs;
    }
}

impl MulAssign for HyperDual {
    fn mul_assign(&mut self, rhs: HyperDual) {
        *self = *self * rhs;
    }
}

impl std::iter::Sum for HyperDual {
    fn sum<I: Iterator<Item = HyperDual>>(iter: I) -> HyperDual {
        iter.fold(HyperDual::ZERO, Add::add)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use proptest::prelude::*;

    fn hd(a: f64, b: f64, c: f64, d: f64) -> HyperDual {
        HyperDual::new(a, b, c, d)
    }

    #[test]
    fn addition() {
        assert_eq!(hd(1., 0., 0., 0.) + hd(0., 1., 1., 0.), hd(1., 1., 1., 0.));
        assert_eq!(hd(2., 1., 1., 3.) + hd(-2., -1., -1., -3.), HyperDual::ZERO);
        assert_eq!(hd(0.5, 0.25, 0., 0.) + hd(0.5, 0., 0.25, 1.), hd(1., 0.25, 0.25, 1.));
    }

    #[test]
    fn multiplication() {
        assert_eq!(hd(0., 1., 0., 0.) * hd(0., 0., 1., 0.), hd(0., 0., 0., 1.));
        let s = hd(0., 1., 1., 0.);
        assert_eq!(s * s, hd(0., 0., 0., 2.));
        assert_eq!(hd(1., 2., 0., 0.) * hd(3., 0., 1., 0.), hd(3., 6., 1., 2.));
    }

    #[test]
    fn inverse() {
        assert_eq!(HyperDual::ONE.inv().unwrap(), HyperDual::ONE);
        assert_eq!(hd(2., 1., 1., 0.).inv().unwrap(), hd(0.5, -0.25, -0.25, 0.25));
        assert_eq!(hd(1., 1., 1., 0.).inv().unwrap(), hd(1., -1., -1., 2.));
        assert_eq!(hd(2., 1., 1., 0.) * hd(0.5, -0.25, -0.25, 0.25), HyperDual::ONE);
        assert_eq!(hd(1., 1., 1., 0.) * hd(1., -1., -1., 2.), HyperDual::ONE);
    }

    #[test]
    fn inverse_rejects_zero_real_part() {
        assert!(matches!(hd(0., 1., 1., 0.).inv(), Err(Error::NonInvertible { .. })));
        assert!(hd(1e-13, 0., 0., 0.).inv().is_err());
        assert!(hd(2e-12, 0., 0., 0.).inv().is_ok());
        assert!(hd(f64::NAN, 0., 0., 0.).inv().is_err());
    }

    #[test]
    fn coefficients() {
        assert_eq!(hd(3., 6., 1., 2.).coeff(Slot::EpsEpsStar), 2.0);
        assert_eq!(hd(1., -1., -1., 2.).coeff(Slot::Eps), -1.0);
        assert_eq!(hd(1., 1., 1., 0.).inv().unwrap().coeff(Slot::EpsEpsStar), 2.0);
        assert_eq!(hd(1., 2., 3., 4.).coeff(Slot::EpsStar), 3.0);
        assert_eq!(hd(1., 2., 3., 4.).coeff(Slot::Re), 1.0);
    }

    type Q = Ratio<i64>;

    // Rational re-derivation of the product and inverse rules.
    fn q_mul(a: [Q; 4], b: [Q; 4]) -> [Q; 4] {
        [
            a[0] * b[0],
            a[0] * b[1] + a[1] * b[0],
            a[0] * b[2] + a[2] * b[0],
            a[0] * b[3] + a[1] * b[2] + a[2] * b[1] + a[3] * b[0],
        ]
    }

    fn q_inv(a: [Q; 4]) -> [Q; 4] {
        let r = Q::from_integer(1) / a[0];
        [r, -a[1] * r * r, -a[2] * r * r, Q::from_integer(2) * a[1] * a[2] * r * r * r - a[3] * r * r]
    }

    fn q_to_f(a: [Q; 4]) -> [f64; 4] {
        a.map(|q| *q.numer() as f64 / *q.denom() as f64)
    }

    proptest! {
        #[test]
        fn rational_inverse_is_exact(
            a in (1i64..50).prop_flat_map(|v| prop_oneof![Just(v), Just(-v)]),
            b in -50i64..50, c in -50i64..50, d in -50i64..50, den in 1i64..8,
        ) {
            let x = [Q::new(a, den), Q::new(b, den), Q::new(c, den), Q::new(d, den)];
            let one = [Q::from_integer(1), Q::from_integer(0), Q::from_integer(0), Q::from_integer(0)];
            prop_assert_eq!(q_mul(x, q_inv(x)), one);
            prop_assert_eq!(q_mul(q_inv(x), x), one);

            // f64 implementation tracks the rational oracle.
            let xf = HyperDual::from_array(q_to_f(x));
            let got = xf.inv().unwrap().to_array();
            let want = q_to_f(q_inv(x));
            for s in 0..4 {
                prop_assert!((got[s] - want[s]).abs() <= 1e-12 * want[s].abs().max(1.0));
            }
            // Float product is one up to a few ulps of the summed magnitudes.
            let inv = xf.inv().unwrap();
            let prod = (xf * inv).to_array();
            let abs = |h: HyperDual| HyperDual::from_array(h.to_array().map(f64::abs));
            let mag = (abs(xf) * abs(inv)).to_array();
            let one_f = [1.0, 0.0, 0.0, 0.0];
            for s in 0..4 {
                prop_assert!((prod[s] - one_f[s]).abs() <= 4.0 * f64::EPSILON * mag[s].max(1.0));
            }
        }

        #[test]
        fn integer_multiplication_is_associative_and_commutative(
            x in prop::array::uniform4(-1024i32..1024),
            y in prop::array::uniform4(-1024i32..1024),
            z in prop::array::uniform4(-1024i32..1024),
        ) {
            let f = |a: [i32; 4]| HyperDual::from_array(a.map(f64::from));
            let (x, y, z) = (f(x), f(y), f(z));
            prop_assert_eq!((x * y) * z, x * (y * z));
            prop_assert_eq!(x * y, y * x);
            prop_assert_eq!(x + y, y + x);
        }

        #[test]
        fn nilpotent_square(b in -1e3f64..1e3, c in -1e3f64..1e3) {
            let x = HyperDual::new(0.0, b, c, 0.0);
            let sq = x * x;
            prop_assert_eq!(sq.re, 0.0);
            prop_assert_eq!(sq.eps, 0.0);
            prop_assert_eq!(sq.eps_star, 0.0);
            prop_assert_eq!(sq.eps_eps_star, 2.0 * b * c);
        }

        #[test]
        fn seeded_derivatives_match_finite_differences(a in 0.2f64..5.0, delta in -2.0f64..2.0) {
            let fns: [(fn(HyperDual) -> HyperDual, fn(f64) -> f64); 3] = [
                (|x| x.inv().unwrap(), |x| 1.0 / x),
                (|x| x * x, |x| x * x),
                (|x| x * x * x, |x| x * x * x),
            ];
            let h = 1e-4;
            for (f_hd, f) in fns {
                let out = f_hd(HyperDual::seed(a, delta));
                let d1 = (f(a + h) - f(a - h)) / (2.0 * h);
                let d2 = (f(a + h) - 2.0 * f(a) + f(a - h)) / (h * h);
                let close = |got: f64, want: f64| (got - want).abs() <= 1e-6 * want.abs().max(1.0);
                prop_assert!(close(out.re, f(a)));
                prop_assert!(close(out.eps, delta * d1));
                prop_assert_eq!(out.eps, out.eps_star);
                prop_assert!(close(out.eps_eps_star, delta * delta * d2), "{} vs {}", out.eps_eps_star, delta * delta * d2);
            }
        }
    }
}
