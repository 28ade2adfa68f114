//! Forward-mode dual numbers over complex values.
//!
//! `Dual<T>` carries a value and one tangent. Nesting once, `Dual<Dual<C>>`,
//! yields exact mixed second partials. Chart coordinates are real, so
//! `re`, `im` and `conj` act componentwise on the tangent.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Arithmetic needed to evaluate an expression tree.
pub trait Scalar:
    Clone
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(c: Complex64) -> Self;
    /// Value with every tangent stripped.
    fn primal(&self) -> Complex64;
    /// True when the value and every nested tangent are finite.
    fn is_finite(&self) -> bool;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn re(&self) -> Self;
    fn im(&self) -> Self;
    fn conj(&self) -> Self;
    fn powi(&self, k: i32) -> Self;

    fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }
    fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }
    fn real(x: f64) -> Self {
        Self::constant(Complex64::new(x, 0.0))
    }
}

impl Scalar for Complex64 {
    fn constant(c: Complex64) -> Self {
        c
    }
    fn primal(&self) -> Complex64 {
        *self
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
    fn sin(&self) -> Self {
        Complex64::sin(*self)
    }
    fn cos(&self) -> Self {
        Complex64::cos(*self)
    }
    fn sqrt(&self) -> Self {
        Complex64::sqrt(*self)
    }
    fn re(&self) -> Self {
        Complex64::new(self.re, 0.0)
    }
    fn im(&self) -> Self {
        Complex64::new(self.im, 0.0)
    }
    fn conj(&self) -> Self {
        Complex64::conj(self)
    }
    fn powi(&self, k: i32) -> Self {
        Complex64::powi(self, k)
    }
}

/// `value + tangent * eps` with `eps^2 = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<T> {
    pub value: T,
    pub tangent: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(value: T, tangent: T) -> Self {
        Self { value, tangent }
    }

    pub fn variable(value: T) -> Self {
        Self::new(value, T::one())
    }

    fn chain(&self, value: T, derivative: T) -> Self {
        Self::new(value, derivative * self.tangent.clone())
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.value + rhs.value, self.tangent + rhs.tangent)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.value - rhs.value, self.tangent - rhs.tangent)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let tangent = self.tangent * rhs.value.clone() + self.value.clone() * rhs.tangent;
        Self::new(self.value * rhs.value, tangent)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let value = self.value.clone() / rhs.value.clone();
        let tangent = (self.tangent - value.clone() * rhs.tangent) / rhs.value;
        Self::new(value, tangent)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.value, -self.tangent)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn constant(c: Complex64) -> Self {
        Self::new(T::constant(c), T::zero())
    }
    fn primal(&self) -> Complex64 {
        self.value.primal()
    }
    fn is_finite(&self) -> bool {
        self.value.is_finite() && self.tangent.is_finite()
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e.clone(), e)
    }
    fn ln(&self) -> Self {
        self.chain(self.value.ln(), T::one() / self.value.clone())
    }
    fn sin(&self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        let d = T::real(0.5) / s.clone();
        self.chain(s, d)
    }
    fn re(&self) -> Self {
        Self::new(self.value.re(), self.tangent.re())
    }
    fn im(&self) -> Self {
        Self::new(self.value.im(), self.tangent.im())
    }
    fn conj(&self) -> Self {
        Self::new(self.value.conj(), self.tangent.conj())
    }
    fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Self::one();
        }
        let below = self.value.powi(k - 1);
        let value = below.clone() * self.value.clone();
        self.chain(value, T::real(k as f64) * below)
    }
}

/// Lifts a real point into dual numbers seeded along coordinate `k`.
pub fn seed<T: Scalar>(point: &[T], k: usize) -> Vec<Dual<T>> {
    point
        .iter()
        .enumerate()
        .map(|(m, x)| Dual::new(x.clone(), if m == k { T::one() } else { T::zero() }))
        .collect()
}
