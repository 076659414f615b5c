//! Scalar expressions in the energy density `t`, with symbolic differentiation.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// An expression tree in one variable `t`. Cheap to clone.
#[derive(Clone, PartialEq)]
pub struct Expr(Arc<Node>);

#[derive(Clone, PartialEq)]
enum Node {
    Const(f64),
    T,
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Powi(Expr, i32),
    Powf(Expr, f64),
    Sqrt(Expr),
    Exp(Expr),
    Ln(Expr),
}

impl Expr {
    pub fn t() -> Self {
        Expr(Arc::new(Node::T))
    }

    pub fn c(v: f64) -> Self {
        Expr(Arc::new(Node::Const(v)))
    }

    fn node(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn powi(self, n: i32) -> Self {
        match (self.as_const(), n) {
            (_, 0) => Expr::c(1.0),
            (_, 1) => self,
            (Some(v), _) => Expr::c(v.powi(n)),
            _ => Expr::node(Node::Powi(self, n)),
        }
    }

    pub fn powf(self, p: f64) -> Self {
        if p == 0.0 {
            return Expr::c(1.0);
        }
        if p == 1.0 {
            return self;
        }
        match self.as_const() {
            Some(v) => Expr::c(v.powf(p)),
            None => Expr::node(Node::Powf(self, p)),
        }
    }

    pub fn sqrt(self) -> Self {
        match self.as_const() {
            Some(v) => Expr::c(v.sqrt()),
            None => Expr::node(Node::Sqrt(self)),
        }
    }

    pub fn exp(self) -> Self {
        match self.as_const() {
            Some(v) => Expr::c(v.exp()),
            None => Expr::node(Node::Exp(self)),
        }
    }

    pub fn ln(self) -> Self {
        match self.as_const() {
            Some(v) => Expr::c(v.ln()),
            None => Expr::node(Node::Ln(self)),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match &*self.0 {
            Node::Const(v) => *v,
            Node::T => t,
            Node::Add(a, b) => a.eval(t) + b.eval(t),
            Node::Sub(a, b) => a.eval(t) - b.eval(t),
            Node::Mul(a, b) => a.eval(t) * b.eval(t),
            Node::Div(a, b) => a.eval(t) / b.eval(t),
            Node::Neg(a) => -a.eval(t),
            Node::Powi(a, n) => a.eval(t).powi(*n),
            Node::Powf(a, p) => a.eval(t).powf(*p),
            Node::Sqrt(a) => a.eval(t).sqrt(),
            Node::Exp(a) => a.eval(t).exp(),
            Node::Ln(a) => a.eval(t).ln(),
        }
    }

    /// Derivative with respect to `t`.
    pub fn diff(&self) -> Expr {
        match &*self.0 {
            Node::Const(_) => Expr::c(0.0),
            Node::T => Expr::c(1.0),
            Node::Add(a, b) => a.diff() + b.diff(),
            Node::Sub(a, b) => a.diff() - b.diff(),
            Node::Mul(a, b) => a.diff() * b.clone() + a.clone() * b.diff(),
            Node::Div(a, b) => {
                (a.diff() * b.clone() - a.clone() * b.diff()) / b.clone().powi(2)
            }
            Node::Neg(a) => -a.diff(),
            Node::Powi(a, n) => Expr::c(*n as f64) * a.clone().powi(n - 1) * a.diff(),
            Node::Powf(a, p) => Expr::c(*p) * a.clone().powf(p - 1.0) * a.diff(),
            Node::Sqrt(a) => a.diff() / (Expr::c(2.0) * self.clone()),
            Node::Exp(a) => self.clone() * a.diff(),
            Node::Ln(a) => a.diff() / a.clone(),
        }
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::T => write!(f, "t"),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Sub(a, b) => write!(f, "({a} - {b})"),
            Node::Mul(a, b) => write!(f, "{a}*{b}"),
            Node::Div(a, b) => write!(f, "{a}/{b}"),
            Node::Neg(a) => write!(f, "-{a}"),
            Node::Powi(a, n) => write!(f, "{a}^{n}"),
            Node::Powf(a, p) => write!(f, "{a}^{p}"),
            Node::Sqrt(a) => write!(f, "sqrt({a})"),
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::c(v)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::c(a + b),
            (Some(z), _) if z == 0.0 => rhs,
            (_, Some(z)) if z == 0.0 => self,
            _ => Expr::node(Node::Add(self, rhs)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::c(a - b),
            (Some(z), _) if z == 0.0 => -rhs,
            (_, Some(z)) if z == 0.0 => self,
            _ => Expr::node(Node::Sub(self, rhs)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::c(a * b),
            (Some(z), _) | (_, Some(z)) if z == 0.0 => Expr::c(0.0),
            (Some(o), _) if o == 1.0 => rhs,
            (_, Some(o)) if o == 1.0 => self,
            _ => Expr::node(Node::Mul(self, rhs)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        match (self.as_const(), rhs.as_const()) {
            (Some(a), Some(b)) => Expr::c(a / b),
            (Some(z), _) if z == 0.0 => Expr::c(0.0),
            (_, Some(o)) if o == 1.0 => self,
            _ => Expr::node(Node::Div(self, rhs)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.as_const() {
            Some(v) => Expr::c(-v),
            None => Expr::node(Node::Neg(self)),
        }
    }
}

macro_rules! scalar_ops {
    ($($tr:ident $method:ident),*) => {$(
        impl $tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $tr::$method(self, Expr::c(rhs))
            }
        }
        impl $tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $tr::$method(Expr::c(self), rhs)
            }
        }
    )*};
}

scalar_ops!(Add add, Sub sub, Mul mul, Div div);

#[cfg(test)]
mod tests {
    use super::*;

    fn central(e: &Expr, t: f64) -> f64 {
        let h = 1e-6;
        (e.eval(t + h) - e.eval(t - h)) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_central_differences() {
        let t = Expr::t();
        let s = (1.0 + 2.0 * t.clone()).sqrt();
        let exprs = [
            1.0 / (1.0 + 2.0 * t.clone()),
            (2.0 * s.clone()).exp() / (1.0 + s.clone()).powi(2),
            t.clone().ln() * t.clone().powf(-1.5),
            -(t.clone() - 3.0) / (t.clone() * t.clone() + 1.0),
        ];
        for e in &exprs {
            for &x in &[0.3, 1.0, 2.7] {
                let d = e.diff().eval(x);
                assert!((d - central(e, x)).abs() < 1e-6, "{e}: {d}");
            }
        }
    }

    #[test]
    fn constants_fold() {
        let e = Expr::c(2.0) * Expr::c(3.0) + Expr::c(1.0);
        assert_eq!(e.as_const(), Some(7.0));
        assert_eq!(Expr::c(5.0).diff().as_const(), Some(0.0));
        assert_eq!((Expr::t() * 0.0).as_const(), Some(0.0));
    }
}
