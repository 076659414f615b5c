//! Tangent sphere bundles as hypersurfaces of `T(M)`: `T_rM` inside the
//! Sasaki ambient and `T₁M` inside `(T(M), g_A, J_A)`, with their almost
//! contact metric structures and the radial isometry between them.
//!
//! Tangent vectors are [`SplitVector`]s of the ambient whose vertical part is
//! `g`-orthogonal to the fiber point.

use nalgebra::DMatrix;

use crate::base::ChartMetric;
use crate::error::{GeometryError, Result};
use crate::oracle::{directional, fd_exterior_derivative, InducedMetric};
use crate::tbundle::{BundlePoint, SplitVector, TangentBundle};
use crate::vecops::{axpy, max_abs, scale, sub, unit, zeros};
use crate::weights::{Epsilon, WeightPair};

/// Tolerance on `|g_x(u,u) − r²|` for a point to lie on the bundle.
pub const ON_BUNDLE_TOL: f64 = 1e-12;

/// Which hypersurface and ambient structure.
#[derive(Clone, Debug)]
pub enum SphereFlavor {
    /// `T_rM` in `(T(M), g_S, J_S)`.
    SasakiRadius { r: f64 },
    /// `T₁M` in `(T(M), g_A, J_A)`.
    Weighted { weights: WeightPair },
}

/// A point `(x, u)` with `g_x(u, u) = r²`.
#[derive(Clone, Debug, PartialEq)]
pub struct SphereBundlePoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub r: f64,
}

/// `T_rM` or `T₁M` over a chart-presented base.
#[derive(Clone, Debug)]
pub struct SphereBundle {
    ambient: TangentBundle,
    flavor: SphereFlavor,
    radius: f64,
    a: f64,
    epsilon: Epsilon,
}

impl SphereBundle {
    pub fn tangent_sphere(base: ChartMetric, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(GeometryError::InvalidParameter {
                family: "tangent sphere bundle".into(),
                reason: format!("radius {r} must be positive"),
            });
        }
        Ok(Self {
            ambient: TangentBundle::new(base, WeightPair::sasaki()),
            flavor: SphereFlavor::SasakiRadius { r },
            radius: r,
            a: 1.0,
            epsilon: Epsilon::Minus,
        })
    }

    /// `T₁M` with `a` frozen at `a(½)`.
    pub fn unit(base: ChartMetric, weights: WeightPair) -> Result<Self> {
        let a = weights.values(0.5)?.a;
        let epsilon = weights.epsilon();
        Ok(Self {
            ambient: TangentBundle::new(base, weights.clone()),
            flavor: SphereFlavor::Weighted { weights },
            radius: 1.0,
            a,
            epsilon,
        })
    }

    pub fn flavor(&self) -> &SphereFlavor {
        &self.flavor
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The constant `a(½)`, or `1` for the Sasaki ambient.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn base(&self) -> &ChartMetric {
        self.ambient.base()
    }

    pub fn ambient(&self) -> &TangentBundle {
        &self.ambient
    }

    pub fn dim(&self) -> usize {
        self.ambient.dim()
    }

    fn is_unit(&self) -> bool {
        matches!(self.flavor, SphereFlavor::Weighted { .. })
    }

    pub fn point(&self, x: &[f64], u: &[f64]) -> Result<SphereBundlePoint> {
        let g = self.base().matrix(x)?;
        let gu = &g * nalgebra::DVector::from_column_slice(u);
        let norm_sq: f64 = gu.iter().zip(u).map(|(a, b)| a * b).sum();
        if (norm_sq - self.radius * self.radius).abs() > ON_BUNDLE_TOL {
            return Err(GeometryError::Precondition(format!(
                "g(u,u) = {norm_sq} differs from r² = {}",
                self.radius * self.radius
            )));
        }
        Ok(SphereBundlePoint {
            x: x.to_vec(),
            u: u.to_vec(),
            r: self.radius,
        })
    }

    /// Rescales a nonzero `u` onto the bundle.
    pub fn project(&self, x: &[f64], u: &[f64]) -> Result<SphereBundlePoint> {
        let g = self.base().matrix(x)?;
        let gu = &g * nalgebra::DVector::from_column_slice(u);
        let norm = gu.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(GeometryError::ZeroSection);
        }
        self.point(x, &scale(self.radius / norm, u))
    }

    pub fn at(&self, p: &SphereBundlePoint) -> Result<SphereFrame> {
        let bp = self.ambient.at(&p.x, &p.u)?;
        Ok(SphereFrame {
            bundle: self.clone(),
            p: bp,
            point: p.clone(),
        })
    }
}

/// Pointwise structures of a sphere bundle.
#[derive(Clone, Debug)]
pub struct SphereFrame {
    bundle: SphereBundle,
    p: BundlePoint,
    point: SphereBundlePoint,
}

/// Almost contact metric data at one point, acting on adapted components.
#[derive(Clone, Debug)]
pub struct ContactStructure {
    /// `φ` on concatenated adapted components `(h, w)`.
    pub phi: DMatrix<f64>,
    pub xi: SplitVector,
    /// `η` as a row on adapted components.
    pub eta: Vec<f64>,
    /// Gram matrix of `G` on adapted components.
    pub metric: DMatrix<f64>,
    pub rescaled: bool,
}

impl ContactStructure {
    pub fn apply_phi(&self, u: &SplitVector) -> SplitVector {
        let m = u.h().len();
        let out = &self.phi * nalgebra::DVector::from_vec(u.to_vec());
        let (h, v) = out.as_slice().split_at(m);
        SplitVector::new(self.xi.anchor(), h.to_vec(), v.to_vec()).expect("dimensions agree")
    }

    pub fn eta(&self, u: &SplitVector) -> f64 {
        self.eta.iter().zip(u.to_vec()).map(|(a, b)| a * b).sum()
    }

    pub fn g(&self, u: &SplitVector, v: &SplitVector) -> f64 {
        let (a, b) = (nalgebra::DVector::from_vec(u.to_vec()), nalgebra::DVector::from_vec(v.to_vec()));
        a.dot(&(&self.metric * b))
    }

    /// Largest residual of `φ² = −I + η⊗ξ`, `φξ = 0`, `η∘φ = 0`, `η(ξ) = 1`
    /// and `G(φU, φV) = G(U,V) − η(U)η(V)` over the given tangent vectors.
    pub fn identity_residual(&self, tangent: &[SplitVector]) -> f64 {
        let mut worst: f64 = (self.eta(&self.xi) - 1.0).abs();
        worst = worst.max(self.apply_phi(&self.xi).max_abs());
        for u in tangent {
            let pu = self.apply_phi(u);
            let ppu = self.apply_phi(&pu);
            let expect = u.scaled(-1.0).checked_add(&self.xi.scaled(self.eta(u)));
            if let Ok(e) = expect {
                worst = worst.max(max_abs(&sub(&ppu.to_vec(), &e.to_vec())));
            }
            worst = worst.max(self.eta(&pu).abs());
            for v in tangent {
                let pv = self.apply_phi(v);
                let lhs = self.g(&pu, &pv);
                let rhs = self.g(u, v) - self.eta(u) * self.eta(v);
                worst = worst.max((lhs - rhs).abs());
            }
        }
        worst
    }
}

/// Prop-style cases of the `T₁M` connection on generators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GeneratorPair {
    /// `∇_{δ_i} δ_j`
    DeltaDelta,
    /// `∇_{Y_i} δ_j`
    YDelta,
    /// `∇_{δ_i} Y_j`
    DeltaY,
    /// `∇_{Y_i} Y_j`
    YY,
}

impl GeneratorPair {
    pub const ALL: [GeneratorPair; 4] = [
        GeneratorPair::DeltaDelta,
        GeneratorPair::YDelta,
        GeneratorPair::DeltaY,
        GeneratorPair::YY,
    ];
}

/// A vector field near the bundle, given by its adapted components as a
/// function of the chart point `(x, y)`.
pub type AdaptedField<'a> = Box<dyn Fn(&[f64]) -> Result<Vec<f64>> + 'a>;

impl SphereFrame {
    pub fn ambient_point(&self) -> &BundlePoint {
        &self.p
    }

    pub fn point(&self) -> &SphereBundlePoint {
        &self.point
    }

    fn m(&self) -> usize {
        self.p.dim()
    }

    fn u(&self) -> &[f64] {
        &self.point.u
    }

    fn r2(&self) -> f64 {
        self.point.r * self.point.r
    }

    fn gu(&self, x: &[f64]) -> f64 {
        self.p.local().inner(x, self.u())
    }

    /// `e_i − (g(e_i,u)/r²) u`, the vertical part of `Z_i` or `Y_i`.
    fn fiber_generator(&self, i: usize) -> Vec<f64> {
        let e = unit(self.m(), i);
        let mut w = e.clone();
        axpy(&mut w, -self.gu(&e) / self.r2(), self.u());
        w
    }

    /// `δ_1, …, δ_m` followed by `Z_1, …, Z_m` (or `Y_1, …, Y_m`).
    pub fn generators(&self) -> Result<Vec<SplitVector>> {
        let m = self.m();
        let mut out = Vec::with_capacity(2 * m);
        for i in 0..m {
            out.push(self.p.horizontal(&unit(m, i))?);
        }
        for i in 0..m {
            out.push(self.p.vertical(&self.fiber_generator(i))?);
        }
        Ok(out)
    }

    /// Rank of the vertical generators (expected `m − 1`).
    pub fn fiber_rank(&self) -> usize {
        let m = self.m();
        let cols: Vec<f64> = (0..m).flat_map(|i| self.fiber_generator(i)).collect();
        let mat = DMatrix::from_column_slice(m, m, &cols);
        mat.singular_values().iter().filter(|s| **s > 1e-10).count()
    }

    /// `|g(w, u)|` for `U = (h, w)`; zero iff `U` is tangent to the bundle.
    pub fn normal_component(&self, v: &SplitVector) -> f64 {
        self.gu(v.v()).abs()
    }

    /// Orthogonal projection of an ambient vector onto the bundle.
    pub fn tangential(&self, v: &SplitVector) -> Result<SplitVector> {
        let n = self.p.vertical(self.u())?;
        let c = self.p.metric(v, &n)? / self.p.metric(&n, &n)?;
        v.checked_sub(&n.scaled(c))
    }

    /// A tangent vector built from arbitrary horizontal and vertical parts.
    pub fn tangent(&self, h: &[f64], w: &[f64]) -> Result<SplitVector> {
        let mut v = w.to_vec();
        axpy(&mut v, -self.gu(w) / self.r2(), self.u());
        self.p.split(h, &v)
    }

    /// Induced metric restricted from the ambient.
    pub fn induced_metric(&self, u: &SplitVector, v: &SplitVector) -> Result<f64> {
        self.p.metric(u, v)
    }

    /// Gram matrix of the generators from the component display.
    pub fn induced_metric_display(&self) -> DMatrix<f64> {
        let m = self.m();
        let l = self.p.local();
        let gi: Vec<f64> = (0..m).map(|i| self.gu(&unit(m, i))).collect();
        let a = self.bundle.a;
        DMatrix::from_fn(2 * m, 2 * m, |p, q| {
            let (i, j) = (p % m, q % m);
            let gij = l.g[i * m + j];
            match (p < m, q < m) {
                (true, true) => gij,
                (false, false) => a * (gij - gi[i] * gi[j] / self.r2()),
                _ => 0.0,
            }
        })
    }

    /// `φ(h, w) = (−√a w, (h − g(h,u)u/r²)/√a)`.
    fn phi_matrix(&self) -> DMatrix<f64> {
        let m = self.m();
        let sa = self.bundle.a.sqrt();
        let lu = self.p.local().lower(self.u());
        let u = self.u();
        let mut phi = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            phi[(i, m + i)] = -sa;
            phi[(m + i, i)] = 1.0 / sa;
            for k in 0..m {
                phi[(m + k, i)] -= lu[i] * u[k] / (self.r2() * sa);
            }
        }
        phi
    }

    fn ambient_gram(&self) -> DMatrix<f64> {
        let m = self.m();
        let l = self.p.local();
        let lu = l.lower(self.u());
        let w = self.p.weights();
        DMatrix::from_fn(2 * m, 2 * m, |p, q| {
            let (i, j) = (p % m, q % m);
            let gij = l.g[i * m + j];
            match (p < m, q < m) {
                (true, true) => gij,
                (false, false) => w.a * gij + w.b * lu[i] * lu[j],
                _ => 0.0,
            }
        })
    }

    /// Scalars `(ξ coefficient of u^H, η coefficient of g(h,u), metric scale)`.
    fn contact_scalars(&self, rescaled: bool) -> (f64, f64, f64) {
        let sa = self.bundle.a.sqrt();
        let r = self.point.r;
        match (self.bundle.is_unit(), rescaled) {
            (_, true) => (2.0 * sa, 1.0 / (2.0 * sa * r * r), 1.0 / (4.0 * sa * sa * r * r)),
            (false, false) => (1.0 / r, 1.0 / r, 1.0),
            (true, false) => {
                let eps = self.bundle.epsilon.sign();
                (-eps, -eps, 1.0)
            }
        }
    }

    pub fn contact_structure(&self, rescaled: bool) -> Result<ContactStructure> {
        let m = self.m();
        let (xi_c, eta_c, g_c) = self.contact_scalars(rescaled);
        let xi = self.p.horizontal(&scale(xi_c, self.u()))?;
        let mut eta = scale(eta_c, &self.p.local().lower(self.u()));
        eta.extend(zeros(m));
        Ok(ContactStructure {
            phi: self.phi_matrix(),
            xi,
            eta,
            metric: self.ambient_gram() * g_c,
            rescaled,
        })
    }

    /// `η` as a chart 1-form `c · g_ij(x) y^j dx^i` with the structure's
    /// coefficient `c`, evaluated on a coordinate vector.
    fn eta_coordinate(&self, rescaled: bool) -> impl Fn(&[f64], &[f64]) -> Result<f64> + '_ {
        let (_, eta_c, _) = self.contact_scalars(rescaled);
        let m = self.m();
        let base = self.bundle.base().clone();
        move |z: &[f64], v: &[f64]| {
            let g = base.matrix(&z[..m])?;
            let gy = &g * nalgebra::DVector::from_column_slice(&z[m..]);
            Ok(eta_c * gy.iter().zip(&v[..m]).map(|(a, b)| a * b).sum::<f64>())
        }
    }

    fn coordinates(&self, v: &SplitVector) -> Result<Vec<f64>> {
        self.p.to_coordinates(v)
    }

    fn chart_point(&self) -> Vec<f64> {
        let mut z = self.point.x.clone();
        z.extend_from_slice(self.u());
        z
    }

    /// Numeric `dη(U, V)` with the `½` convention.
    pub fn d_eta(&self, u: &SplitVector, v: &SplitVector, rescaled: bool, h: f64) -> Result<f64> {
        let eta = self.eta_coordinate(rescaled);
        let cu = self.coordinates(u)?;
        let cv = self.coordinates(v)?;
        fd_exterior_derivative(|z, vs| eta(z, &vs[0]), &self.chart_point(), &[cu, cv], h)
    }

    /// Displayed `dη(δ_i, Z_j)` (or `dη(δ_i, Y_j)`) for the unrescaled form.
    pub fn d_eta_display(&self, i: usize, j: usize) -> f64 {
        let m = self.m();
        let gij = self.p.local().g[i * m + j];
        let (gi, gj) = (self.gu(&unit(m, i)), self.gu(&unit(m, j)));
        let q = gij - gi * gj / self.r2();
        if self.bundle.is_unit() {
            0.5 * self.bundle.epsilon.sign() * q
        } else {
            -q / (2.0 * self.point.r)
        }
    }

    /// Largest `|dη(U,V) − G(U, φV)|` over pairs of the given tangent vectors.
    pub fn contact_metric_residual(&self, tangent: &[SplitVector], rescaled: bool, h: f64) -> Result<f64> {
        let cs = self.contact_structure(rescaled)?;
        let mut worst: f64 = 0.0;
        for u in tangent {
            for v in tangent {
                let d = self.d_eta(u, v, rescaled, h)?;
                let rhs = cs.g(u, &cs.apply_phi(v));
                worst = worst.max((d - rhs).abs());
            }
        }
        Ok(worst)
    }

    // ----- connection of T₁M -----

    /// Closed-form `∇_{A_i} B_j` on generators, with `0` meaning contraction
    /// with `u`.
    pub fn t1_connection(&self, case: GeneratorPair, i: usize, j: usize) -> Result<SplitVector> {
        let m = self.m();
        let l = self.p.local();
        let u = self.u();
        let a = self.bundle.a;
        let (ei, ej) = (unit(m, i), unit(m, j));
        let gamma = l.nabla(&ei, &ej);
        let as_y = |c: &[f64]| {
            // Σ c^k Y_k = c − g(c,u) u
            let mut w = c.to_vec();
            axpy(&mut w, -self.gu(c), u);
            w
        };
        match case {
            GeneratorPair::DeltaDelta => {
                let rk = l.r(&ei, &ej, u);
                self.p.split(&gamma, &as_y(&scale(-0.5, &rk)))
            }
            GeneratorPair::YDelta => self.p.horizontal(&scale(0.5 * a, &l.r(u, &ei, &ej))),
            GeneratorPair::DeltaY => {
                self.p.split(&scale(0.5 * a, &l.r(u, &ej, &ei)), &as_y(&gamma))
            }
            GeneratorPair::YY => self.p.vertical(&as_y(&scale(-self.gu(&ej), &ei))),
        }
    }

    /// Generator field `δ_j` or `Y_j` near the bundle, in adapted components.
    pub fn generator_field(&self, horizontal: bool, j: usize) -> AdaptedField<'_> {
        let m = self.m();
        let base = self.bundle.base().clone();
        Box::new(move |z: &[f64]| {
            let e = unit(m, j);
            if horizontal {
                let mut out = e;
                out.extend(zeros(m));
                return Ok(out);
            }
            let g = base.matrix(&z[..m])?;
            let y = &z[m..];
            let gj: f64 = (0..m).map(|k| g[(j, k)] * y[k]).sum();
            let mut w = e;
            axpy(&mut w, -gj, y);
            let mut out = zeros(m);
            out.extend(w);
            Ok(out)
        })
    }

    /// Induced Levi-Civita derivative `∇_U W`: ambient frame connection,
    /// product rule on the adapted coefficients, then tangential projection.
    pub fn covariant_derivative(&self, u: &SplitVector, field: &dyn Fn(&[f64]) -> Result<Vec<f64>>, h: f64) -> Result<SplitVector> {
        let m = self.m();
        let z = self.chart_point();
        let w0 = field(&z)?;
        let dir = self.coordinates(u)?;
        let dw = directional(field, &z, &dir, h)?;
        let w = self.p.split(&w0[..m], &w0[m..])?;
        let amb = self.p.connection(u, &w)?;
        let total = amb.checked_add(&self.p.split(&dw[..m], &dw[m..])?)?;
        self.tangential(&total)
    }

    /// Finite-difference hypersurface connection: coordinate Christoffels
    /// of the ambient metric, then projection along the gradient normal.
    pub fn hypersurface_oracle(&self, u: &SplitVector, field: &dyn Fn(&[f64]) -> Result<Vec<f64>>, h: f64) -> Result<SplitVector> {
        let m = self.m();
        let im = InducedMetric::from_bundle(self.bundle.ambient());
        let z = self.chart_point();
        let coord_field = |p: &[f64]| -> Result<Vec<f64>> {
            let w = field(p)?;
            im.adapted_to_coordinates(p, &w[..m], &w[m..])
        };
        let dir = self.coordinates(u)?;
        let amb = im.covariant_derivative(&z, &dir, coord_field, h)?;
        // normal: G⁻¹ d(½ g_ij y^i y^j)
        let mut df = zeros(2 * m);
        for k in 0..2 * m {
            df[k] = directional(
                |p| {
                    let g = self.bundle.base().matrix(&p[..m])?;
                    let y = nalgebra::DVector::from_column_slice(&p[m..]);
                    Ok(vec![0.5 * y.dot(&(g * &y))])
                },
                &z,
                &unit(2 * m, k),
                h,
            )?[0];
        }
        let gm = im.components(&z)?;
        let ginv = gm
            .try_inverse()
            .ok_or(GeometryError::SingularMetric { point: z.clone() })?;
        let n = ginv * nalgebra::DVector::from_vec(df.clone());
        let dfv = nalgebra::DVector::from_vec(df);
        let a = nalgebra::DVector::from_vec(amb);
        let proj = &a - &n * (dfv.dot(&a) / dfv.dot(&n));
        self.p.from_coordinates(proj.as_slice())
    }

    // ----- K-contact and Sasakian residuals -----

    fn xi_field(&self) -> AdaptedField<'_> {
        let (xi_c, _, _) = self.contact_scalars(true);
        let m = self.m();
        Box::new(move |z: &[f64]| {
            let mut out = scale(xi_c, &z[m..]);
            out.extend(zeros(m));
            Ok(out)
        })
    }

    fn phi_at(&self, z: &[f64], w: &[f64]) -> Result<Vec<f64>> {
        let m = self.m();
        let sa = self.bundle.a.sqrt();
        let g = self.bundle.base().matrix(&z[..m])?;
        let y = &z[m..];
        let (h, v) = w.split_at(m);
        let gy = &g * nalgebra::DVector::from_column_slice(y);
        let ghy: f64 = gy.iter().zip(h).map(|(a, b)| a * b).sum();
        let mut out = scale(-sa, v);
        let mut lower = h.to_vec();
        axpy(&mut lower, -ghy / self.r2(), y);
        out.extend(scale(1.0 / sa, &lower));
        Ok(out)
    }

    /// `max |∇_U ξ + φU|` over the given tangent vectors (rescaled structure).
    pub fn k_contact_residual(&self, tangent: &[SplitVector], h: f64) -> Result<f64> {
        let cs = self.contact_structure(true)?;
        let xi = self.xi_field();
        let mut worst: f64 = 0.0;
        for u in tangent {
            let d = self.covariant_derivative(u, &*xi, h)?;
            let res = d.checked_add(&cs.apply_phi(u))?;
            worst = worst.max(res.max_abs());
        }
        Ok(worst)
    }

    /// `max |(∇_U φ)V − (G(U,V)ξ − η(V)U)|` with `V` ranging over the
    /// generator fields (rescaled structure).
    pub fn sasakian_residual(&self, tangent: &[SplitVector], h: f64) -> Result<f64> {
        let cs = self.contact_structure(true)?;
        let m = self.m();
        let mut worst: f64 = 0.0;
        for horizontal in [true, false] {
            for j in 0..m {
                let vf = self.generator_field(horizontal, j);
                let phi_v = |z: &[f64]| -> Result<Vec<f64>> {
                    let w = vf(z)?;
                    self.phi_at(z, &w)
                };
                let v0 = vf(&self.chart_point())?;
                let v = self.p.split(&v0[..m], &v0[m..])?;
                for u in tangent {
                    let lhs = self
                        .covariant_derivative(u, &phi_v, h)?
                        .checked_sub(&cs.apply_phi(&self.covariant_derivative(u, &*vf, h)?))?;
                    let rhs = cs.xi.scaled(cs.g(u, &v)).checked_sub(&u.scaled(cs.eta(&v)))?;
                    worst = worst.max(lhs.checked_sub(&rhs)?.max_abs());
                }
            }
        }
        Ok(worst)
    }
}

/// Residuals of the radial map `F(x, u) = (x, r u)` from `T₁M` to `T_rM`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsometryResiduals {
    /// `max |G_r(dF U, dF V) − G_A(U, V)|` over generators (rescaled metrics).
    pub metric: f64,
    /// `max |dF(φ_A U) − φ_r(dF U)|` over generators.
    pub phi: f64,
    /// `|dF(ξ_A) − ξ_r|` (rescaled).
    pub xi: f64,
}

impl IsometryResiduals {
    pub fn max(&self) -> f64 {
        self.metric.max(self.phi).max(self.xi)
    }
}

/// Evaluates the isometry and `φ`-equivariance of `F` at one point of `T₁M`.
pub fn isometry_check(unit: &SphereBundle, target: &SphereBundle, x: &[f64], u: &[f64]) -> Result<IsometryResiduals> {
    let r = target.radius();
    let p1 = unit.project(x, u)?;
    let pr = target.point(x, &scale(r, &p1.u))?;
    let f1 = unit.at(&p1)?;
    let fr = target.at(&pr)?;
    let c1 = f1.contact_structure(true)?;
    let cr = fr.contact_structure(true)?;
    let gens = f1.generators()?;
    let push = |v: &SplitVector| fr.ambient_point().split(v.h(), &scale(r, v.v()));
    let mut res = IsometryResiduals {
        metric: 0.0,
        phi: 0.0,
        xi: 0.0,
    };
    for a in &gens {
        let fa = push(a)?;
        for b in &gens {
            let fb = push(b)?;
            res.metric = res.metric.max((cr.g(&fa, &fb) - c1.g(a, b)).abs());
        }
        let lhs = push(&c1.apply_phi(a))?;
        let rhs = cr.apply_phi(&fa);
        res.phi = res.phi.max(max_abs(&sub(&lhs.to_vec(), &rhs.to_vec())));
    }
    let fxi = push(&c1.xi)?;
    res.xi = max_abs(&sub(&fxi.to_vec(), &cr.xi.to_vec()));
    Ok(res)
}
