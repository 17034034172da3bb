//! Forward-mode dual numbers.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// A value together with its derivative with respect to one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual<T> {
    pub v: T,
    pub d: T,
}

/// Dual number over double-precision complex scalars.
pub type DualScalar = Dual<Complex64>;

impl<T> Dual<T> {
    pub fn new(v: T, d: T) -> Self {
        Self { v, d }
    }
}

impl<T: num_traits::Zero> Dual<T> {
    pub fn constant(v: T) -> Self {
        Self { v, d: T::zero() }
    }
}

impl<T: num_traits::One> Dual<T> {
    /// The independent variable itself.
    pub fn variable(v: T) -> Self {
        Self { v, d: T::one() }
    }
}

impl<T: Copy + Add<Output = T>> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.v + rhs.v, self.d + rhs.d)
    }
}

impl<T: Copy + Sub<Output = T>> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.v - rhs.v, self.d - rhs.d)
    }
}

impl<T: Copy + Add<Output = T> + Mul<Output = T>> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.v * rhs.v, self.d * rhs.v + self.v * rhs.d)
    }
}

impl<T: Copy + Sub<Output = T> + Mul<Output = T> + Div<Output = T>> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let v = self.v / rhs.v;
        Self::new(v, (self.d - v * rhs.d) / rhs.v)
    }
}

impl<T: Neg<Output = T>> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.v, -self.d)
    }
}

impl<T: Copy + Mul<S, Output = T>, S: Copy> Mul<S> for Dual<T>
where
    S: Scalar,
{
    type Output = Self;
    fn mul(self, rhs: S) -> Self {
        Self::new(self.v * rhs, self.d * rhs)
    }
}

impl<T: Copy + Add<S, Output = T>, S: Copy + Scalar> Add<S> for Dual<T> {
    type Output = Self;
    fn add(self, rhs: S) -> Self {
        Self::new(self.v + rhs, self.d)
    }
}

impl<T: Copy + Sub<S, Output = T>, S: Copy + Scalar> Sub<S> for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: S) -> Self {
        Self::new(self.v - rhs, self.d)
    }
}

/// Marker for plain (non-dual) operands of mixed arithmetic.
pub trait Scalar {}
impl Scalar for f64 {}
impl Scalar for Complex64 {}
impl Scalar for twofloat::TwoFloat {}
impl Scalar for num_complex::Complex<twofloat::TwoFloat> {}
#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn tangent_rules() {
        let x = DualScalar::variable(c(1.5, -0.5));
        // f(x) = (x^2 - 3) / (2x + 1)
        let f = (x * x - c(3.0, 0.0)) / (x * 2.0 + c(1.0, 0.0));
        let xv = c(1.5, -0.5);
        let expected = (xv * xv * 2.0 + xv * 2.0 + 6.0) / ((xv * 2.0 + 1.0) * (xv * 2.0 + 1.0));
        assert!((f.d - expected).norm() < 1e-14);
        assert_eq!((-x).d, c(-1.0, 0.0));
        assert_eq!(DualScalar::constant(c(2.0, 0.0)).d, c(0.0, 0.0));
    }
}
