//! Forward-mode dual numbers.
//!
//! A [`Dual`] carries a primal value and one directional derivative. Nesting
//! duals (`Dual<Dual<f64>>`, `Dual<Dual<Dual<f64>>>`) seeds independent
//! directions at each level, so a single evaluation of a generic function
//! yields mixed partials up to the nesting depth. The chart metrics in
//! [`crate::base`] are written against [`Scalar`] for exactly this purpose:
//! third derivatives of the metric components are needed for the covariant
//! derivative of the curvature tensor.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Arithmetic needed to evaluate metric components generically.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Primal value, discarding all infinitesimal parts.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i32) -> Self;

    fn recip(self) -> Self {
        Self::from_f64(1.0) / self
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn constant(re: T) -> Self {
        Self {
            re,
            eps: T::from_f64(0.0),
        }
    }

    /// A variable with unit derivative along the seeded direction.
    pub fn variable(re: T) -> Self {
        Self {
            re,
            eps: T::from_f64(1.0),
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = rhs.re.recip();
        let re = self.re * inv;
        Self::new(re, (self.eps - re * rhs.eps) * inv)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }

    fn re(&self) -> f64 {
        self.re.re()
    }

    fn sqrt(self) -> Self {
        let s = self.re.sqrt();
        Self::new(s, self.eps / (T::from_f64(2.0) * s))
    }

    fn exp(self) -> Self {
        let e = self.re.exp();
        Self::new(e, self.eps * e)
    }

    fn ln(self) -> Self {
        Self::new(self.re.ln(), self.eps / self.re)
    }

    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::from_f64(1.0);
        }
        let lower = self.re.powi(n - 1);
        Self::new(lower * self.re, T::from_f64(n as f64) * lower * self.eps)
    }
}

pub type Dual1 = Dual<f64>;
pub type Dual2 = Dual<Dual<f64>>;
pub type Dual3 = Dual<Dual<Dual<f64>>>;

/// Seeds `x` so that the outer, middle and inner infinitesimals point along
/// coordinate axes `a`, `b` and `c` respectively.
pub fn seed3(x: &[f64], a: usize, b: usize, c: usize) -> Vec<Dual3> {
    let ind = |k: usize, axis: usize| if k == axis { 1.0 } else { 0.0 };
    x.iter()
        .enumerate()
        .map(|(k, &xk)| {
            let inner = Dual::new(xk, ind(k, c));
            let middle = Dual::new(inner, Dual::new(ind(k, b), 0.0));
            let outer_eps = Dual::new(Dual::new(ind(k, a), 0.0), Dual::new(0.0, 0.0));
            Dual::new(middle, outer_eps)
        })
        .collect()
}

/// Seeds two independent directions `a` (outer) and `b` (inner).
pub fn seed2(x: &[f64], a: usize, b: usize) -> Vec<Dual2> {
    let ind = |k: usize, axis: usize| if k == axis { 1.0 } else { 0.0 };
    x.iter()
        .enumerate()
        .map(|(k, &xk)| Dual::new(Dual::new(xk, ind(k, b)), Dual::new(ind(k, a), 0.0)))
        .collect()
}

pub fn seed1(x: &[f64], a: usize) -> Vec<Dual1> {
    x.iter()
        .enumerate()
        .map(|(k, &xk)| Dual::new(xk, if k == a { 1.0 } else { 0.0 }))
        .collect()
}
