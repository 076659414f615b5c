//! The tangent bundle with metric `g_A` and almost complex structure `J_A`,
//! evaluated pointwise in the adapted frame `{δ_i, ∂/∂y^i}`.
//!
//! Tangent vectors of `T(M)` are [`SplitVector`]s: a horizontal part on the
//! `δ_i` and a vertical part on the `∂/∂y^i`. Connection and curvature take
//! their arguments as lifts of base vector fields whose chart coefficients are
//! constant near the evaluation point.

use std::sync::Arc;

use crate::base::{ChartMetric, LocalGeometry};
use crate::error::{GeometryError, Result};
use crate::vecops::{add, axpy, scale, sub, zeros};
use crate::weights::{DerivedCoefficients, WeightPair, WeightValues};

/// A point `(x, u)` of `T(M)` with its energy density `t = ½ g_x(u, u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentPoint {
    x: Vec<f64>,
    u: Vec<f64>,
    t: f64,
}

impl TangentPoint {
    pub fn new(base: &ChartMetric, x: &[f64], u: &[f64]) -> Result<Self> {
        if u.len() != base.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: base.dim(),
                found: u.len(),
            });
        }
        let g = base.matrix(x)?;
        let gu = &g * nalgebra::DVector::from_column_slice(u);
        let t = 0.5 * gu.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        Ok(Self {
            x: x.to_vec(),
            u: u.to_vec(),
            t,
        })
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn same_as(&self, other: &TangentPoint) -> bool {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(p, q)| (p - q).abs() <= 1e-14);
        self.x.len() == other.x.len() && close(&self.x, &other.x) && close(&self.u, &other.u)
    }
}

/// A tangent vector of `T(M)` in the adapted frame, attached to its point.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitVector {
    h: Vec<f64>,
    v: Vec<f64>,
    at: Arc<TangentPoint>,
}

impl SplitVector {
    pub fn new(at: Arc<TangentPoint>, h: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let m = at.dim();
        for part in [&h, &v] {
            if part.len() != m {
                return Err(GeometryError::DimensionMismatch {
                    expected: m,
                    found: part.len(),
                });
            }
        }
        Ok(Self { h, v, at })
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn at(&self) -> &TangentPoint {
        &self.at
    }

    pub fn anchor(&self) -> Arc<TangentPoint> {
        self.at.clone()
    }

    fn check_same(&self, other: &SplitVector) -> Result<()> {
        if Arc::ptr_eq(&self.at, &other.at) || self.at.same_as(&other.at) {
            Ok(())
        } else {
            Err(GeometryError::MismatchedBasePoint)
        }
    }

    pub fn checked_add(&self, other: &SplitVector) -> Result<SplitVector> {
        self.check_same(other)?;
        Ok(Self {
            h: add(&self.h, &other.h),
            v: add(&self.v, &other.v),
            at: self.at.clone(),
        })
    }

    pub fn checked_sub(&self, other: &SplitVector) -> Result<SplitVector> {
        self.check_same(other)?;
        Ok(Self {
            h: sub(&self.h, &other.h),
            v: sub(&self.v, &other.v),
            at: self.at.clone(),
        })
    }

    pub fn scaled(&self, s: f64) -> SplitVector {
        Self {
            h: scale(s, &self.h),
            v: scale(s, &self.v),
            at: self.at.clone(),
        }
    }

    /// Concatenated `(h, v)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = self.h.clone();
        out.extend_from_slice(&self.v);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.h.iter().chain(&self.v).fold(0.0, |acc, x| acc.max(x.abs()))
    }
}

/// Which lift each slot of a curvature display takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurvatureCase {
    Hhh,
    Hhv,
    Hvh,
    Hvv,
    Vvh,
    Vvv,
}

impl CurvatureCase {
    pub const ALL: [CurvatureCase; 6] = [
        CurvatureCase::Hhh,
        CurvatureCase::Hhv,
        CurvatureCase::Hvh,
        CurvatureCase::Hvv,
        CurvatureCase::Vvh,
        CurvatureCase::Vvv,
    ];

    /// `true` for each slot taken as a horizontal lift.
    pub fn slots(self) -> [bool; 3] {
        match self {
            CurvatureCase::Hhh => [true, true, true],
            CurvatureCase::Hhv => [true, true, false],
            CurvatureCase::Hvh => [true, false, true],
            CurvatureCase::Hvv => [true, false, false],
            CurvatureCase::Vvh => [false, false, true],
            CurvatureCase::Vvv => [false, false, false],
        }
    }
}

/// Which pair of lifts a two-slot display takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairCase {
    Hh,
    Hv,
    Vv,
}

/// `(T(M), g_A, J_A)` over a chart-presented base.
#[derive(Clone, Debug)]
pub struct TangentBundle {
    base: ChartMetric,
    weights: WeightPair,
}

impl TangentBundle {
    pub fn new(base: ChartMetric, weights: WeightPair) -> Self {
        Self { base, weights }
    }

    pub fn base(&self) -> &ChartMetric {
        &self.base
    }

    pub fn weights(&self) -> &WeightPair {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    /// All pointwise data needed by the frame formulas at `(x, u)`.
    pub fn at(&self, x: &[f64], u: &[f64]) -> Result<BundlePoint> {
        let point = Arc::new(TangentPoint::new(&self.base, x, u)?);
        let local = self.base.local(x)?;
        let w = self.weights.values(point.t)?;
        let d = w.derived()?;
        Ok(BundlePoint { point, local, w, d })
    }
}

/// Frame formulas at one point of `T(M)`.
#[derive(Clone, Debug)]
pub struct BundlePoint {
    point: Arc<TangentPoint>,
    local: LocalGeometry,
    w: WeightValues,
    d: DerivedCoefficients,
}

type Pair = (Vec<f64>, Vec<f64>);

impl BundlePoint {
    pub fn point(&self) -> &TangentPoint {
        &self.point
    }

    pub fn local(&self) -> &LocalGeometry {
        &self.local
    }

    pub fn weights(&self) -> &WeightValues {
        &self.w
    }

    pub fn coefficients(&self) -> &DerivedCoefficients {
        &self.d
    }

    pub fn dim(&self) -> usize {
        self.point.dim()
    }

    pub fn t(&self) -> f64 {
        self.point.t
    }

    pub fn u(&self) -> &[f64] {
        &self.point.u
    }

    pub fn split(&self, h: &[f64], v: &[f64]) -> Result<SplitVector> {
        SplitVector::new(self.point.clone(), h.to_vec(), v.to_vec())
    }

    pub fn horizontal(&self, x: &[f64]) -> Result<SplitVector> {
        self.split(x, &zeros(self.dim()))
    }

    pub fn vertical(&self, x: &[f64]) -> Result<SplitVector> {
        self.split(&zeros(self.dim()), x)
    }

    fn wrap(&self, (h, v): Pair) -> SplitVector {
        SplitVector {
            h,
            v,
            at: self.point.clone(),
        }
    }

    fn check(&self, u: &SplitVector) -> Result<()> {
        if Arc::ptr_eq(&u.at, &self.point) || u.at.same_as(&self.point) {
            Ok(())
        } else {
            Err(GeometryError::MismatchedBasePoint)
        }
    }

    fn g(&self, x: &[f64], y: &[f64]) -> f64 {
        self.local.inner(x, y)
    }

    fn gu(&self, x: &[f64]) -> f64 {
        self.local.inner(x, &self.point.u)
    }

    fn r(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        self.local.r(x, y, z)
    }

    fn nr(&self, w: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        self.local.nabla_r(w, x, y, z)
    }

    fn j_coefficients(&self) -> Result<(f64, f64)> {
        match (self.d.a_coef, self.d.b_coef) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(GeometryError::ZeroSection),
        }
    }

    // ----- metric and almost complex structure -----

    fn metric_raw(&self, u: &Pair, v: &Pair) -> f64 {
        self.g(&u.0, &v.0) + self.w.a * self.g(&u.1, &v.1) + self.w.b * self.gu(&u.1) * self.gu(&v.1)
    }

    /// `g_A(U, V) = g(U_h, V_h) + a g(U_v, V_v) + b g(U_v, u) g(V_v, u)`.
    pub fn metric(&self, u: &SplitVector, v: &SplitVector) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.metric_raw(&(u.h.clone(), u.v.clone()), &(v.h.clone(), v.v.clone())))
    }

    fn j_raw(&self, h: &[f64], v: &[f64]) -> Result<Pair> {
        let (a_coef, b_coef) = self.j_coefficients()?;
        let sa = self.w.a.sqrt();
        let u = &self.point.u;
        // J X^H = X^V/√a − A g(X,u) u^V
        let mut out_v = scale(1.0 / sa, h);
        axpy(&mut out_v, -a_coef * self.gu(h), u);
        // J X^V = −√a X^H + B g(X,u) u^H
        let mut out_h = scale(-sa, v);
        axpy(&mut out_h, b_coef * self.gu(v), u);
        Ok((out_h, out_v))
    }

    pub fn j(&self, u: &SplitVector) -> Result<SplitVector> {
        self.check(u)?;
        Ok(self.wrap(self.j_raw(&u.h, &u.v)?))
    }

    /// Matrix of `J_A` acting on concatenated adapted components `(h, v)`.
    pub fn j_matrix(&self) -> Result<nalgebra::DMatrix<f64>> {
        let m = self.dim();
        let mut jm = nalgebra::DMatrix::zeros(2 * m, 2 * m);
        for k in 0..2 * m {
            let mut e = vec![0.0; 2 * m];
            e[k] = 1.0;
            let (h, v) = self.j_raw(&e[..m], &e[m..])?;
            for i in 0..m {
                jm[(i, k)] = h[i];
                jm[(m + i, k)] = v[i];
            }
        }
        Ok(jm)
    }

    /// Largest `|g_A(JU, JV) − g_A(U, V)|` over the given pairs.
    pub fn compatibility_residual(&self, pairs: &[(SplitVector, SplitVector)]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (u, v) in pairs {
            let lhs = self.metric(&self.j(u)?, &self.j(v)?)?;
            worst = worst.max((lhs - self.metric(u, v)?).abs());
        }
        Ok(worst)
    }

    /// `Ω_A(U, V) = g_A(U, J_A V)`.
    pub fn kahler_form(&self, u: &SplitVector, v: &SplitVector) -> Result<f64> {
        self.metric(u, &self.j(v)?)
    }

    /// The Lee form with the oracle-confirmed coefficient.
    pub fn lee_form(&self, u: &SplitVector) -> Result<f64> {
        self.check(u)?;
        let coef = self.d.lee_coef.ok_or(GeometryError::ZeroSection)?;
        Ok(coef * self.gu(&u.v))
    }

    /// The Lee form built from the alternative coefficient `(1/√a)(a'/√a + B)`.
    pub fn lee_form_stated(&self, u: &SplitVector) -> Result<f64> {
        self.check(u)?;
        let (_, b_coef) = self.j_coefficients()?;
        let sa = self.w.a.sqrt();
        Ok((self.w.da / sa + b_coef) / sa * self.gu(&u.v))
    }

    /// `N(X^H, Y^H)` from its closed form.
    pub fn nijenhuis_hh(&self, x: &[f64], y: &[f64]) -> Result<SplitVector> {
        let (a_coef, _) = self.j_coefficients()?;
        let WeightValues { t, a, da, .. } = self.w;
        let coef = -da / (2.0 * a * a) + (a + t * da) / (a * a.sqrt()) * a_coef;
        let mut v = scale(coef * self.gu(x), y);
        axpy(&mut v, -coef * self.gu(y), x);
        v = add(&v, &self.r(x, y, self.u()));
        Ok(self.wrap((zeros(self.dim()), v)))
    }

    /// `N(X^V, Y^V)`, antisymmetric form confirmed by the oracle.
    pub fn nijenhuis_vv(&self, x: &[f64], y: &[f64]) -> Result<SplitVector> {
        self.nijenhuis_vv_impl(x, y, self.gu(x))
    }

    /// `N(X^V, Y^V)` with the alternative unweighted `R(Y,u)u` term.
    pub fn nijenhuis_vv_stated(&self, x: &[f64], y: &[f64]) -> Result<SplitVector> {
        self.nijenhuis_vv_impl(x, y, 1.0)
    }

    fn nijenhuis_vv_impl(&self, x: &[f64], y: &[f64], ryu_weight: f64) -> Result<SplitVector> {
        let (_, b_coef) = self.j_coefficients()?;
        let WeightValues { a, da, .. } = self.w;
        let sa = a.sqrt();
        let u = self.u();
        let mut v = scale(-a, &self.r(x, y, u));
        axpy(&mut v, sa * b_coef * self.gu(y), &self.r(x, u, u));
        axpy(&mut v, -sa * b_coef * ryu_weight, &self.r(y, u, u));
        let coef = (da / (2.0 * sa) + b_coef) / sa;
        axpy(&mut v, -coef * self.gu(y), x);
        axpy(&mut v, coef * self.gu(x), y);
        Ok(self.wrap((zeros(self.dim()), v)))
    }

    /// `c(t) = −a'/(2a²) + ((a + ta')/(a√a)) A(t)`.
    pub fn integrability_c(&self) -> Result<f64> {
        let (a_coef, _) = self.j_coefficients()?;
        let WeightValues { t, a, da, .. } = self.w;
        Ok(-da / (2.0 * a * a) + (a + t * da) / (a * a.sqrt()) * a_coef)
    }

    // ----- Levi-Civita connection -----

    fn nabla_hh(&self, x: &[f64], y: &[f64]) -> Pair {
        (self.local.nabla(x, y), scale(-0.5, &self.r(x, y, self.u())))
    }

    fn nabla_hv(&self, x: &[f64], y: &[f64]) -> Pair {
        (scale(0.5 * self.w.a, &self.r(self.u(), y, x)), self.local.nabla(x, y))
    }

    fn nabla_vh(&self, x: &[f64], y: &[f64]) -> Pair {
        (scale(0.5 * self.w.a, &self.r(self.u(), x, y)), zeros(self.dim()))
    }

    fn nabla_vv(&self, x: &[f64], y: &[f64]) -> Pair {
        let DerivedCoefficients { l, m, n, .. } = self.d;
        let u = self.u();
        let (gx, gy) = (self.gu(x), self.gu(y));
        let mut v = scale(l * gx, y);
        axpy(&mut v, l * gy, x);
        axpy(&mut v, m * self.g(x, y) + n * gx * gy, u);
        (zeros(self.dim()), v)
    }

    /// `∇^A_{X^?} Y^?` for one of the four lift patterns.
    pub fn connection_case(&self, case: PairCase, x_horizontal: bool, x: &[f64], y: &[f64]) -> SplitVector {
        let pair = match (case, x_horizontal) {
            (PairCase::Hh, _) => self.nabla_hh(x, y),
            (PairCase::Hv, true) => self.nabla_hv(x, y),
            (PairCase::Hv, false) => self.nabla_vh(x, y),
            (PairCase::Vv, _) => self.nabla_vv(x, y),
        };
        self.wrap(pair)
    }

    /// `∇^A_U V` where `V = Y^H + Z^V` is the lift of constant-coefficient
    /// base fields `Y`, `Z`.
    pub fn connection(&self, u: &SplitVector, v: &SplitVector) -> Result<SplitVector> {
        self.check(u)?;
        self.check(v)?;
        let parts = [
            self.nabla_hh(&u.h, &v.h),
            self.nabla_hv(&u.h, &v.v),
            self.nabla_vh(&u.v, &v.h),
            self.nabla_vv(&u.v, &v.v),
        ];
        Ok(self.wrap(sum_pairs(self.dim(), &parts)))
    }

    // ----- curvature -----

    fn curv_hhh(&self, x: &[f64], y: &[f64], z: &[f64]) -> Pair {
        let u = self.u();
        let a = self.w.a;
        let mut h = self.r(x, y, z);
        axpy(&mut h, 0.25 * a, &self.r(u, &self.r(x, z, u), y));
        axpy(&mut h, -0.25 * a, &self.r(u, &self.r(y, z, u), x));
        axpy(&mut h, 0.5 * a, &self.r(u, &self.r(x, y, u), z));
        let v = scale(0.5, &self.nr(z, x, y, u));
        (h, v)
    }

    fn curv_hhv(&self, x: &[f64], y: &[f64], z: &[f64]) -> Pair {
        let u = self.u();
        let a = self.w.a;
        let DerivedCoefficients { l, m, .. } = self.d;
        let rxyu = self.r(x, y, u);
        let mut v = self.r(x, y, z);
        axpy(&mut v, 0.25 * a, &self.r(y, &self.r(u, z, x), u));
        axpy(&mut v, -0.25 * a, &self.r(x, &self.r(u, z, y), u));
        axpy(&mut v, l * self.gu(z), &rxyu);
        axpy(&mut v, m * self.g(&rxyu, z), u);
        let mut h = scale(0.5 * a, &self.nr(x, u, z, y));
        axpy(&mut h, -0.5 * a, &self.nr(y, u, z, x));
        (h, v)
    }

    fn curv_hvh(&self, x: &[f64], y: &[f64], z: &[f64]) -> Pair {
        let u = self.u();
        let a = self.w.a;
        let DerivedCoefficients { l, m, .. } = self.d;
        let h = scale(0.5 * a, &self.nr(x, u, y, z));
        let rxzu = self.r(x, z, u);
        let mut v = self.r(x, z, y);
        axpy(&mut v, -0.5 * a, &self.r(x, &self.r(u, y, z), u));
        axpy(&mut v, l * self.gu(y), &rxzu);
        axpy(&mut v, m * self.g(&rxzu, y), u);
        (h, scale(0.5, &v))
    }

    fn curv_hvv(&self, x: &[f64], y: &[f64], z: &[f64]) -> Pair {
        let u = self.u();
        let WeightValues { a, da, .. } = self.w;
        let mut h = scale(-0.5 * a, &self.r(y, z, x));
        axpy(&mut h, -0.25 * a * a, &self.r(u, y, &self.r(u, z, x)));
        axpy(&mut h, 0.25 * da * self.gu(z), &self.r(u, y, x));
        axpy(&mut h, -0.25 * da * self.gu(y), &self.r(u, z, x));
        (h, zeros(self.dim()))
    }

    fn curv_vvh(&self, x: &[f64], y: &[f64], z: &[f64]) -> Pair {
        let u = self.u();
        let WeightValues { a, da, .. } = self.w;
        let mut h = scale(a, &self.r(x, y, z));
        axpy(&mut h, 0.5 * da * self.gu(x), &self.r(u, y, z));
        axpy(&mut h, -0.5 * da * self.gu(y), &self.r(u, x, z));
        axpy(&mut h, 0.25 * a * a, &self.r(u, x, &self.r(u, y, z)));
        axpy(&mut h, -0.25 * a * a, &self.r(u, y, &self.r(u, x, z)));
        (h, zeros(self.dim()))
    }

    fn curv_vvv(&self, x: &[f64], y: &[f64], z: &[f64]) -> Pair {
        let u = self.u();
        let DerivedCoefficients { f1, f2, f3, .. } = self.d;
        let (gx, gy, gz) = (self.gu(x), self.gu(y), self.gu(z));
        let (gxz, gyz) = (self.g(x, z), self.g(y, z));
        let mut v = scale(f1 * gz * gx + f2 * gxz, y);
        axpy(&mut v, -(f1 * gz * gy + f2 * gyz), x);
        axpy(&mut v, f3 * (gxz * gy - gyz * gx), u);
        (zeros(self.dim()), v)
    }

    /// One of the six displayed curvature patterns `R̃(X^?, Y^?)Z^?`.
    pub fn curvature_case(&self, case: CurvatureCase, x: &[f64], y: &[f64], z: &[f64]) -> SplitVector {
        let pair = match case {
            CurvatureCase::Hhh => self.curv_hhh(x, y, z),
            CurvatureCase::Hhv => self.curv_hhv(x, y, z),
            CurvatureCase::Hvh => self.curv_hvh(x, y, z),
            CurvatureCase::Hvv => self.curv_hvv(x, y, z),
            CurvatureCase::Vvh => self.curv_vvh(x, y, z),
            CurvatureCase::Vvv => self.curv_vvv(x, y, z),
        };
        self.wrap(pair)
    }

    /// `R̃(U, V)W` by trilinear expansion over the displayed patterns; the two
    /// patterns with a vertical first slot and horizontal second slot follow
    /// from antisymmetry.
    pub fn curvature(&self, u: &SplitVector, v: &SplitVector, w: &SplitVector) -> Result<SplitVector> {
        for s in [u, v, w] {
            self.check(s)?;
        }
        let neg = |(h, v): Pair| (scale(-1.0, &h), scale(-1.0, &v));
        let parts = [
            self.curv_hhh(&u.h, &v.h, &w.h),
            self.curv_hhv(&u.h, &v.h, &w.v),
            self.curv_hvh(&u.h, &v.v, &w.h),
            self.curv_hvv(&u.h, &v.v, &w.v),
            neg(self.curv_hvh(&v.h, &u.v, &w.h)),
            neg(self.curv_hvv(&v.h, &u.v, &w.v)),
            self.curv_vvh(&u.v, &v.v, &w.h),
            self.curv_vvv(&u.v, &v.v, &w.v),
        ];
        Ok(self.wrap(sum_pairs(self.dim(), &parts)))
    }

    // ----- areas and sectional curvature -----

    /// Gram determinant `g_A(U,U) g_A(V,V) − g_A(U,V)²`.
    pub fn area_sq(&self, u: &SplitVector, v: &SplitVector) -> Result<f64> {
        let uu = self.metric(u, u)?;
        let vv = self.metric(v, v)?;
        let uv = self.metric(u, v)?;
        Ok(uu * vv - uv * uv)
    }

    /// Closed-form area for `g`-orthonormal `X`, `Y`.
    pub fn area_sq_display(&self, case: PairCase, x: &[f64], y: &[f64]) -> f64 {
        let WeightValues { a, b, .. } = self.w;
        let (gx, gy) = (self.gu(x), self.gu(y));
        match case {
            PairCase::Hh => 1.0,
            PairCase::Hv => a + b * gy * gy,
            PairCase::Vv => a * a + a * b * (gx * gx + gy * gy),
        }
    }

    /// `K̃(U, V) = g_A(R̃(U,V)V, U) / Q̃(U, V)`.
    pub fn sectional(&self, u: &SplitVector, v: &SplitVector) -> Result<f64> {
        let q = self.area_sq(u, v)?;
        let scale_ref = self.metric(u, u)? * self.metric(v, v)?;
        if q <= 1e-14 * scale_ref || q <= 0.0 {
            return Err(GeometryError::DegeneratePlane);
        }
        let r = self.curvature(u, v, v)?;
        Ok(self.metric(&r, u)? / q)
    }

    /// Closed-form sectional curvature for `g`-orthonormal `X`, `Y`.
    pub fn sectional_display(&self, case: PairCase, x: &[f64], y: &[f64]) -> Result<f64> {
        let WeightValues { t, a, b, .. } = self.w;
        let DerivedCoefficients { f1, f2, f3, .. } = self.d;
        let u = self.u();
        let (gx, gy) = (self.gu(x), self.gu(y));
        Ok(match case {
            PairCase::Hh => {
                let rxyu = self.r(x, y, u);
                self.local.sectional(x, y)? - 0.75 * a * self.local.norm_sq(&rxyu)
            }
            PairCase::Hv => {
                let r = self.r(u, y, x);
                a * a / (4.0 * (a + b * gy * gy)) * self.local.norm_sq(&r)
            }
            PairCase::Vv => {
                -(f1 * a * gy * gy + f2 * (a + b * gx * gx) + f3 * (a + 2.0 * t * b) * gx * gx)
                    / (a * a + a * b * (gx * gx + gy * gy))
            }
        })
    }

    /// Space-form specializations of the horizontal and mixed displays.
    pub fn sectional_space_form_display(&self, case: PairCase, c: f64, x: &[f64], y: &[f64]) -> Option<f64> {
        let WeightValues { a, b, .. } = self.w;
        let (gx, gy) = (self.gu(x), self.gu(y));
        match case {
            PairCase::Hh => Some(c - 0.75 * a * c * c * (gx * gx + gy * gy)),
            PairCase::Hv => Some(a * a * c * c * gx * gx / (4.0 * (a + b * gy * gy))),
            PairCase::Vv => None,
        }
    }

    // ----- adapted basis and scalar curvature -----

    /// `g`-orthonormal base frame with `e_1 = u/|u|`.
    pub fn base_frame(&self) -> Result<Vec<Vec<f64>>> {
        self.local.orthonormal_frame_from(self.u())
    }

    /// The `g_A`-orthonormal basis `E_1, …, E_{2m}`.
    pub fn adapted_basis(&self) -> Result<Vec<SplitVector>> {
        let frame = self.base_frame()?;
        let m = self.dim();
        let mut basis = Vec::with_capacity(2 * m);
        for e in &frame {
            basis.push(self.horizontal(e)?);
        }
        basis.push(self.vertical(&scale(1.0 / self.w.radial().sqrt(), &frame[0]))?);
        for e in &frame[1..] {
            basis.push(self.vertical(&scale(1.0 / self.w.a.sqrt(), e))?);
        }
        Ok(basis)
    }

    /// Sectional curvature of `(E_α, E_β)` from the closed-form table
    /// (indices are zero-based). The mixed entries carry the weight factor
    /// `a/4` confirmed by the oracle.
    pub fn adapted_sectional(&self, alpha: usize, beta: usize) -> Result<f64> {
        self.adapted_table(alpha, beta, self.w.a)
    }

    /// The same table with the unweighted mixed entry `¼|R(u,e_k)e_i|²`.
    pub fn adapted_sectional_stated(&self, alpha: usize, beta: usize) -> Result<f64> {
        self.adapted_table(alpha, beta, 1.0)
    }

    fn adapted_table(&self, alpha: usize, beta: usize, mixed_weight: f64) -> Result<f64> {
        let m = self.dim();
        let (alpha, beta) = (alpha.min(beta), alpha.max(beta));
        if alpha == beta || beta >= 2 * m {
            return Err(GeometryError::Precondition("need two distinct basis indices".into()));
        }
        let frame = self.base_frame()?;
        let u = self.u();
        let WeightValues { t, a, .. } = self.w;
        let DerivedCoefficients { f2, f3, .. } = self.d;
        Ok(if beta < m {
            let (ei, ej) = (&frame[alpha], &frame[beta]);
            self.local.sectional(ei, ej)? - 0.75 * a * self.local.norm_sq(&self.r(ei, ej, u))
        } else if alpha < m {
            if beta == m {
                0.0
            } else {
                let ek = &frame[beta - m];
                0.25 * mixed_weight * self.local.norm_sq(&self.r(u, ek, &frame[alpha]))
            }
        } else if alpha == m {
            -(f2 + 2.0 * t * f3) / a
        } else {
            -f2 / a
        })
    }

    /// `Σ_{i<j} |R(e_i, e_j)u|²` over a `g`-orthonormal frame.
    fn curvature_energy(&self, frame: &[Vec<f64>]) -> f64 {
        let u = self.u();
        let mut s = 0.0;
        for i in 0..frame.len() {
            for j in i + 1..frame.len() {
                s += self.local.norm_sq(&self.r(&frame[i], &frame[j], u));
            }
        }
        s
    }

    fn any_frame(&self) -> Result<Vec<Vec<f64>>> {
        if self.t() > 0.0 {
            self.base_frame()
        } else {
            self.local.orthonormal_frame_from(&crate::vecops::unit(self.dim(), 0))
        }
    }

    fn scalar_with(&self, energy_coef: f64) -> Result<f64> {
        let frame = self.any_frame()?;
        let m = self.dim() as f64;
        let WeightValues { t, a, .. } = self.w;
        let DerivedCoefficients { f2, f3, .. } = self.d;
        Ok(self.local.scalar_curvature()
            + energy_coef * self.curvature_energy(&frame)
            + (1.0 - m) / a * (m * f2 + 4.0 * t * f3))
    }

    /// Scalar curvature in closed form:
    /// `scal − (a/2) Σ_{i<j} |R(e_i,e_j)u|² − ((m−1)/a)(mF₂ + 4tF₃)`.
    pub fn scalar_closed_form(&self) -> Result<f64> {
        self.scalar_with(-0.5 * self.w.a)
    }

    /// The alternative closed form with coefficient `(2 − 3a)/2` on
    /// `Σ_{i<j} |R(e_i,e_j)u|²`; agrees with the true value only when `a = 1`
    /// or the base is flat.
    pub fn scalar_stated(&self) -> Result<f64> {
        self.scalar_with((2.0 - 3.0 * self.w.a) / 2.0)
    }

    /// Space-form value `(m−1)[mc − a t c² − (mF₂ + 4tF₃)/a]`.
    pub fn scalar_space_form(&self, c: f64) -> f64 {
        self.scalar_space_form_with(c, -self.w.a)
    }

    /// Space-form specialization of [`scalar_stated`](Self::scalar_stated):
    /// `(m−1)[mc + t(2−3a)c² − (mF₂ + 4tF₃)/a]`.
    pub fn scalar_space_form_stated(&self, c: f64) -> f64 {
        self.scalar_space_form_with(c, 2.0 - 3.0 * self.w.a)
    }

    fn scalar_space_form_with(&self, c: f64, energy_coef: f64) -> f64 {
        let m = self.dim() as f64;
        let WeightValues { t, a, .. } = self.w;
        let DerivedCoefficients { f2, f3, .. } = self.d;
        (m - 1.0) * (m * c + t * energy_coef * c * c - (m * f2 + 4.0 * t * f3) / a)
    }

    /// `Σ_{α≠β} g_A(R̃(E_α,E_β)E_β, E_α)` over the adapted basis.
    pub fn scalar_basis_sum(&self) -> Result<f64> {
        let basis = if self.t() > 0.0 {
            self.adapted_basis()?
        } else {
            let frame = self.any_frame()?;
            let mut b = Vec::new();
            for e in &frame {
                b.push(self.horizontal(e)?);
            }
            for e in &frame {
                b.push(self.vertical(&scale(1.0 / self.w.a.sqrt(), e))?);
            }
            b
        };
        let mut s = 0.0;
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let r = self.curvature(&basis[i], &basis[j], &basis[j])?;
                s += 2.0 * self.metric(&r, &basis[i])?;
            }
        }
        Ok(s)
    }

    // ----- coordinates -----

    /// Chart components `(dx, dy)` of an adapted vector: `dy = v − Γ(h, u)`.
    pub fn to_coordinates(&self, u: &SplitVector) -> Result<Vec<f64>> {
        self.check(u)?;
        let mut out = u.h.clone();
        out.extend(sub(&u.v, &self.local.gamma.contract(&u.h, self.u())));
        Ok(out)
    }

    /// Inverse of [`to_coordinates`](Self::to_coordinates).
    pub fn from_coordinates(&self, c: &[f64]) -> Result<SplitVector> {
        let m = self.dim();
        if c.len() != 2 * m {
            return Err(GeometryError::DimensionMismatch {
                expected: 2 * m,
                found: c.len(),
            });
        }
        let h = c[..m].to_vec();
        let v = add(&c[m..], &self.local.gamma.contract(&h, self.u()));
        self.split(&h, &v)
    }
}

fn sum_pairs(m: usize, parts: &[Pair]) -> Pair {
    let mut h = zeros(m);
    let mut v = zeros(m);
    for (ph, pv) in parts {
        axpy(&mut h, 1.0, ph);
        axpy(&mut v, 1.0, pv);
    }
    (h, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cg_over_flat() -> TangentBundle {
        TangentBundle::new(ChartMetric::euclidean(2), WeightPair::cheeger_gromoll())
    }

    #[test]
    fn sasaki_metric_blocks() {
        let b = TangentBundle::new(ChartMetric::space_form(2, 1.0), WeightPair::sasaki());
        let p = b.at(&[0.1, 0.2], &[0.3, -0.4]).unwrap();
        let (x, y) = ([1.0, 0.5], [-0.2, 0.7]);
        let g = p.local().inner(&x, &y);
        let hh = p.metric(&p.horizontal(&x).unwrap(), &p.horizontal(&y).unwrap()).unwrap();
        let vv = p.metric(&p.vertical(&x).unwrap(), &p.vertical(&y).unwrap()).unwrap();
        let hv = p.metric(&p.horizontal(&x).unwrap(), &p.vertical(&y).unwrap()).unwrap();
        assert_abs_diff_eq!(hh, g, epsilon = 1e-15);
        assert_abs_diff_eq!(vv, g, epsilon = 1e-15);
        assert_eq!(hv, 0.0);
    }

    #[test]
    fn cheeger_gromoll_radial_norm() {
        let b = cg_over_flat();
        let u = [1.0, 0.0];
        let p = b.at(&[0.0, 0.0], &u).unwrap();
        assert_abs_diff_eq!(p.t(), 0.5, epsilon = 1e-15);
        let uv = p.vertical(&u).unwrap();
        assert_abs_diff_eq!(p.metric(&uv, &uv).unwrap(), 1.0, epsilon = 1e-15);
        let zero = p.vertical(&[0.0, 0.0]).unwrap();
        assert_eq!(p.metric(&zero, &uv).unwrap(), 0.0);
    }

    #[test]
    fn sasaki_and_cg_almost_complex_structures() {
        let s = TangentBundle::new(ChartMetric::euclidean(2), WeightPair::sasaki());
        let p = s.at(&[0.0, 0.0], &[0.3, 0.1]).unwrap();
        let x = [0.7, -1.1];
        let jh = p.j(&p.horizontal(&x).unwrap()).unwrap();
        assert!(jh.h().iter().all(|v| *v == 0.0));
        assert_abs_diff_eq!(jh.v()[0], 0.7, epsilon = 1e-15);
        let jv = p.j(&p.vertical(&x).unwrap()).unwrap();
        assert_abs_diff_eq!(jv.h()[1], 1.1, epsilon = 1e-15);

        let cg = cg_over_flat();
        let u = [0.6, -0.8];
        let p = cg.at(&[0.0, 0.0], &u).unwrap();
        let ju = p.j(&p.horizontal(&u).unwrap()).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(ju.v()[k], u[k], epsilon = 1e-14);
            assert_abs_diff_eq!(ju.h()[k], 0.0, epsilon = 1e-14);
        }
        let juv = p.j(&p.vertical(&u).unwrap()).unwrap();
        for k in 0..2 {
            assert_abs_diff_eq!(juv.h()[k], -u[k], epsilon = 1e-14);
        }
    }

    #[test]
    fn cg_kahler_form_display() {
        let cg = cg_over_flat();
        let u = [0.9, 0.4];
        let p = cg.at(&[0.0, 0.0], &u).unwrap();
        let (x, y) = ([0.3, -0.5], [1.2, 0.2]);
        let s = (1.0 + 2.0 * p.t()).sqrt();
        let xh = p.horizontal(&x).unwrap();
        let yv = p.vertical(&y).unwrap();
        let omega = p.kahler_form(&xh, &yv).unwrap();
        let gx = p.local().inner(&x, &u);
        let gy = p.local().inner(&y, &u);
        let expect = -(p.local().inner(&x, &y) + gx * gy / (1.0 + s)) / s;
        assert_abs_diff_eq!(omega, expect, epsilon = 1e-14);
        let yh = p.horizontal(&y).unwrap();
        assert_abs_diff_eq!(p.kahler_form(&xh, &yh).unwrap(), 0.0, epsilon = 1e-15);
        let xv = p.vertical(&x).unwrap();
        assert_abs_diff_eq!(p.kahler_form(&xv, &yv).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mismatched_points_are_rejected() {
        let b = cg_over_flat();
        let p = b.at(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        let q = b.at(&[0.0, 0.0], &[0.0, 1.0]).unwrap();
        let a = p.horizontal(&[1.0, 0.0]).unwrap();
        let c = q.horizontal(&[1.0, 0.0]).unwrap();
        assert_eq!(a.checked_add(&c), Err(GeometryError::MismatchedBasePoint));
        assert_eq!(p.metric(&a, &c), Err(GeometryError::MismatchedBasePoint));
    }

    #[test]
    fn plus_branch_is_undefined_on_zero_section() {
        let w = WeightPair::cheeger_gromoll().with_epsilon(crate::weights::Epsilon::Plus);
        let b = TangentBundle::new(ChartMetric::euclidean(2), w);
        let p = b.at(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        let x = p.horizontal(&[1.0, 0.0]).unwrap();
        assert_eq!(p.j(&x), Err(GeometryError::ZeroSection));
    }

    #[test]
    fn cg_radial_vertical_connection_vanishes_at_half() {
        let b = cg_over_flat();
        let u = [1.0, 0.0];
        let p = b.at(&[0.0, 0.0], &u).unwrap();
        let r = p.connection_case(PairCase::Vv, false, &u, &u);
        assert!(r.max_abs() < 1e-15);
    }

    #[test]
    fn area_lemma_example() {
        let b = cg_over_flat();
        let u = [1.0, 0.0];
        let p = b.at(&[0.0, 0.0], &u).unwrap();
        let (x, y) = ([0.0, 1.0], [1.0, 0.0]);
        let q = p.area_sq(&p.vertical(&x).unwrap(), &p.vertical(&y).unwrap()).unwrap();
        assert_abs_diff_eq!(q, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.area_sq_display(PairCase::Vv, &x, &y), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn coordinate_round_trip() {
        let b = TangentBundle::new(ChartMetric::space_form(2, 1.0), WeightPair::cheeger_gromoll());
        let p = b.at(&[0.3, 0.4], &[0.5, -0.2]).unwrap();
        let w = p.split(&[0.1, 0.2], &[-0.3, 0.4]).unwrap();
        let c = p.to_coordinates(&w).unwrap();
        let back = p.from_coordinates(&c).unwrap();
        assert!(back.checked_sub(&w).unwrap().max_abs() < 1e-15);
    }
}
