//! Riemannian geometry of the base manifold in a single coordinate chart.
//!
//! Metric components are evaluated generically over [`Scalar`], so the
//! derivatives needed downstream (up to third order, for `∇R`) come from
//! nested dual numbers rather than differencing. A central-difference jet is
//! available as an independent cross-check.
//!
//! Curvature follows `R(X,Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_[X,Y] Z` with
//! components `R(∂_i, ∂_j)∂_k = R^h_{kij} ∂_h`, so that a space form of
//! curvature `c` satisfies `R(X,Y)Z = c (g(Y,Z)X − g(X,Z)Y)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dual::{seed1, seed2, seed3, Scalar};
use crate::error::{GeometryError, Result};

/// A monomial `coeff · Π x_k^{powers[k]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Polynomial in the chart variables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn constant(c: f64, dim: usize) -> Self {
        Self {
            terms: vec![Monomial {
                coeff: c,
                powers: vec![0; dim],
            }],
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S]) -> S {
        let mut acc = S::from_f64(0.0);
        for term in &self.terms {
            let mut v = S::from_f64(term.coeff);
            for (xk, &p) in x.iter().zip(&term.powers) {
                if p > 0 {
                    v = v * xk.powi(p as i32);
                }
            }
            acc = acc + v;
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricKind {
    Euclidean,
    /// `g_ij = δ_ij / (1 + (c/4)|x|²)²`.
    SpaceForm { curvature: f64 },
    /// `g = diag(p_1(x), …, p_m(x))`.
    DiagonalPolynomial { entries: Vec<Polynomial> },
    /// Upper triangle of a symmetric matrix of polynomials, row-major.
    Polynomial { upper: Vec<Polynomial> },
}

/// A Riemannian metric presented in one coordinate chart.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartMetric {
    dim: usize,
    kind: MetricKind,
}

/// Declarative form used by run-configs and metric files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub dim: usize,
    pub kind: String,
    #[serde(default)]
    pub params: serde_json::Value,
}

impl ChartMetric {
    pub fn euclidean(dim: usize) -> Self {
        Self {
            dim,
            kind: MetricKind::Euclidean,
        }
    }

    pub fn space_form(dim: usize, curvature: f64) -> Self {
        Self {
            dim,
            kind: MetricKind::SpaceForm { curvature },
        }
    }

    pub fn diagonal_polynomial(entries: Vec<Polynomial>) -> Result<Self> {
        let dim = entries.len();
        check_powers(&entries, dim)?;
        Ok(Self {
            dim,
            kind: MetricKind::DiagonalPolynomial { entries },
        })
    }

    pub fn polynomial(dim: usize, upper: Vec<Polynomial>) -> Result<Self> {
        if upper.len() != dim * (dim + 1) / 2 {
            return Err(GeometryError::DimensionMismatch {
                expected: dim * (dim + 1) / 2,
                found: upper.len(),
            });
        }
        check_powers(&upper, dim)?;
        Ok(Self {
            dim,
            kind: MetricKind::Polynomial { upper },
        })
    }

    pub fn from_spec(spec: &MetricSpec) -> Result<Self> {
        if spec.dim == 0 {
            return Err(GeometryError::InvalidSpec("dim must be positive".into()));
        }
        let params = &spec.params;
        match spec.kind.as_str() {
            "euclidean" => Ok(Self::euclidean(spec.dim)),
            "space_form" => {
                let c = params
                    .get("c")
                    .or_else(|| params.get("curvature"))
                    .and_then(|v| v.as_f64())
                    .ok_or_else(|| {
                        GeometryError::InvalidSpec("space_form requires numeric params.c".into())
                    })?;
                Ok(Self::space_form(spec.dim, c))
            }
            "diagonal_polynomial" => {
                let entries: Vec<Polynomial> = params
                    .get("entries")
                    .cloned()
                    .map(serde_json::from_value)
                    .transpose()
                    .map_err(|e| GeometryError::InvalidSpec(format!("params.entries: {e}")))?
                    .ok_or_else(|| {
                        GeometryError::InvalidSpec("diagonal_polynomial requires params.entries".into())
                    })?;
                if entries.len() != spec.dim {
                    return Err(GeometryError::DimensionMismatch {
                        expected: spec.dim,
                        found: entries.len(),
                    });
                }
                Self::diagonal_polynomial(entries)
            }
            "polynomial" => {
                let upper: Vec<Polynomial> = params
                    .get("upper")
                    .cloned()
                    .map(serde_json::from_value)
                    .transpose()
                    .map_err(|e| GeometryError::InvalidSpec(format!("params.upper: {e}")))?
                    .ok_or_else(|| {
                        GeometryError::InvalidSpec("polynomial requires params.upper".into())
                    })?;
                Self::polynomial(spec.dim, upper)
            }
            other => Err(GeometryError::Unknown {
                kind: "metric kind",
                name: other.to_string(),
            }),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &MetricKind {
        &self.kind
    }

    /// Constant sectional curvature when the metric is a known space form.
    pub fn space_form_curvature(&self) -> Option<f64> {
        match self.kind {
            MetricKind::Euclidean => Some(0.0),
            MetricKind::SpaceForm { curvature } => Some(curvature),
            _ => None,
        }
    }

    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if let MetricKind::SpaceForm { curvature } = self.kind {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            if 1.0 + 0.25 * curvature * r2 <= 0.0 {
                return Err(GeometryError::OutsideChart {
                    point: x.to_vec(),
                    reason: format!("1 + (c/4)|x|^2 <= 0 for c = {curvature}"),
                });
            }
        }
        Ok(())
    }

    /// Row-major `m × m` components at `x`.
    pub fn components<S: Scalar>(&self, x: &[S]) -> Vec<S> {
        let m = self.dim;
        let zero = S::from_f64(0.0);
        let one = S::from_f64(1.0);
        let mut g = vec![zero; m * m];
        match &self.kind {
            MetricKind::Euclidean => {
                for i in 0..m {
                    g[i * m + i] = one;
                }
            }
            MetricKind::SpaceForm { curvature } => {
                let r2 = x.iter().fold(zero, |acc, &v| acc + v * v);
                let denom = one + S::from_f64(0.25 * curvature) * r2;
                let factor = (denom * denom).recip();
                for i in 0..m {
                    g[i * m + i] = factor;
                }
            }
            MetricKind::DiagonalPolynomial { entries } => {
                for (i, p) in entries.iter().enumerate() {
                    g[i * m + i] = p.eval(x);
                }
            }
            MetricKind::Polynomial { upper } => {
                let mut idx = 0;
                for i in 0..m {
                    for j in i..m {
                        let v = upper[idx].eval(x);
                        g[i * m + j] = v;
                        g[j * m + i] = v;
                        idx += 1;
                    }
                }
            }
        }
        g
    }

    pub fn matrix(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        let g = DMatrix::from_row_slice(self.dim, self.dim, &self.components(x));
        check_positive_definite(&g, x)?;
        Ok(g)
    }

    /// Metric components with analytic derivatives up to `order` (≤ 3).
    pub fn jet(&self, x: &[f64], order: usize) -> Result<MetricJet> {
        self.check_domain(x)?;
        let m = self.dim;
        let mut jet = MetricJet::zeros(m, order.min(3));
        jet.g = self.components(x);
        match jet.order {
            0 => {}
            1 => {
                for a in 0..m {
                    let v = self.components(&seed1(x, a));
                    for (ij, d) in v.iter().enumerate() {
                        jet.dg[a * m * m + ij] = d.eps;
                    }
                }
            }
            2 => {
                for a in 0..m {
                    for b in a..m {
                        let v = self.components(&seed2(x, a, b));
                        for (ij, d) in v.iter().enumerate() {
                            jet.dg[a * m * m + ij] = d.eps.re;
                            jet.set_d2(a, b, ij, d.eps.eps);
                        }
                    }
                }
            }
            _ => {
                for a in 0..m {
                    for b in a..m {
                        for c in b..m {
                            let v = self.components(&seed3(x, a, b, c));
                            for (ij, d) in v.iter().enumerate() {
                                jet.dg[a * m * m + ij] = d.eps.re.re;
                                jet.set_d2(a, b, ij, d.eps.eps.re);
                                jet.set_d2(a, c, ij, d.eps.re.eps);
                                jet.set_d2(b, c, ij, d.re.eps.eps);
                                jet.set_d3(a, b, c, ij, d.eps.eps.eps);
                            }
                        }
                    }
                }
            }
        }
        let gm = DMatrix::from_row_slice(m, m, &jet.g);
        check_positive_definite(&gm, x)?;
        Ok(jet)
    }

    /// Central-difference jet (first and second derivatives only). The
    /// second-derivative stencil uses its own step `h2`.
    pub fn jet_finite_difference(&self, x: &[f64], h: f64, h2: f64) -> Result<MetricJet> {
        self.check_domain(x)?;
        let m = self.dim;
        let mut jet = MetricJet::zeros(m, 2);
        jet.g = self.components(x);
        let shifted = |steps: &[(usize, f64)]| {
            let mut y = x.to_vec();
            for &(k, s) in steps {
                y[k] += s;
            }
            self.components(&y)
        };
        for a in 0..m {
            let p = shifted(&[(a, h)]);
            let n = shifted(&[(a, -h)]);
            for ij in 0..m * m {
                jet.dg[a * m * m + ij] = (p[ij] - n[ij]) / (2.0 * h);
            }
        }
        for a in 0..m {
            for b in a..m {
                let pp = shifted(&[(a, h2), (b, h2)]);
                let pn = shifted(&[(a, h2), (b, -h2)]);
                let np = shifted(&[(a, -h2), (b, h2)]);
                let nn = shifted(&[(a, -h2), (b, -h2)]);
                for ij in 0..m * m {
                    let v = (pp[ij] - pn[ij] - np[ij] + nn[ij]) / (4.0 * h2 * h2);
                    jet.set_d2(a, b, ij, v);
                }
            }
        }
        Ok(jet)
    }

    pub fn local(&self, x: &[f64]) -> Result<LocalGeometry> {
        Ok(LocalGeometry::from_jet(x, &self.jet(x, 3)?)?)
    }

    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        let jet = self.jet(x, 1)?;
        let ginv = invert(&jet.g, self.dim, x)?;
        Ok(christoffel_from_jet(&jet, &ginv))
    }

    pub fn curvature(&self, x: &[f64]) -> Result<Curvature> {
        let jet = self.jet(x, 2)?;
        Ok(LocalGeometry::from_jet(x, &jet)?.riemann)
    }

    pub fn nabla_curvature(&self, x: &[f64]) -> Result<CurvatureGradient> {
        Ok(self.local(x)?.nabla_riemann)
    }

    pub fn sectional(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        self.jet(x, 2)
            .and_then(|jet| LocalGeometry::from_jet(x, &jet))?
            .sectional(u, v)
    }
}

fn check_powers(polys: &[Polynomial], dim: usize) -> Result<()> {
    for p in polys {
        for t in &p.terms {
            if t.powers.len() != dim {
                return Err(GeometryError::DimensionMismatch {
                    expected: dim,
                    found: t.powers.len(),
                });
            }
        }
    }
    Ok(())
}

fn check_positive_definite(g: &DMatrix<f64>, x: &[f64]) -> Result<()> {
    if g.iter().any(|v| !v.is_finite()) {
        return Err(GeometryError::SingularMetric { point: x.to_vec() });
    }
    if g.clone().cholesky().is_none() {
        let det = g.determinant();
        return Err(if det.abs() < 1e-300 {
            GeometryError::SingularMetric { point: x.to_vec() }
        } else {
            GeometryError::NotPositiveDefinite { point: x.to_vec() }
        });
    }
    Ok(())
}

fn invert(g: &[f64], m: usize, x: &[f64]) -> Result<Vec<f64>> {
    let gm = DMatrix::from_row_slice(m, m, g);
    let inv = gm
        .try_inverse()
        .ok_or_else(|| GeometryError::SingularMetric { point: x.to_vec() })?;
    let mut out = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            out[i * m + j] = inv[(i, j)];
        }
    }
    Ok(out)
}

/// Metric components and partial derivatives at a chart point.
///
/// Layout: `g[i*m+j]`, `dg[(a*m)*m + i*m+j] = ∂_a g_ij`, and similarly for the
/// second (`d2g`, indices `a,b`) and third (`d3g`, indices `a,b,c`)
/// derivatives. Derivative arrays are fully symmetrized.
#[derive(Clone, Debug)]
pub struct MetricJet {
    pub dim: usize,
    pub order: usize,
    pub g: Vec<f64>,
    pub dg: Vec<f64>,
    pub d2g: Vec<f64>,
    pub d3g: Vec<f64>,
}

impl MetricJet {
    fn zeros(m: usize, order: usize) -> Self {
        let mm = m * m;
        Self {
            dim: m,
            order,
            g: vec![0.0; mm],
            dg: vec![0.0; if order >= 1 { m * mm } else { 0 }],
            d2g: vec![0.0; if order >= 2 { m * m * mm } else { 0 }],
            d3g: vec![0.0; if order >= 3 { m * m * m * mm } else { 0 }],
        }
    }

    fn set_d2(&mut self, a: usize, b: usize, ij: usize, v: f64) {
        let m = self.dim;
        let mm = m * m;
        self.d2g[(a * m + b) * mm + ij] = v;
        self.d2g[(b * m + a) * mm + ij] = v;
    }

    fn set_d3(&mut self, a: usize, b: usize, c: usize, ij: usize, v: f64) {
        let m = self.dim;
        let mm = m * m;
        for (p, q, r) in [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
            self.d3g[((p * m + q) * m + r) * mm + ij] = v;
        }
    }

    pub fn dg(&self, a: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.dg[a * m * m + i * m + j]
    }

    pub fn d2g(&self, a: usize, b: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.d2g[(a * m + b) * m * m + i * m + j]
    }

    pub fn d3g(&self, a: usize, b: usize, c: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.d3g[((a * m + b) * m + c) * m * m + i * m + j]
    }
}

/// `Γ^k_ij`, stored at `k*m*m + i*m + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.data[k * m * m + i * m + j]
    }

    /// `Γ(X, Y)^k = Γ^k_ij X^i Y^j`.
    pub fn contract(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let m = self.dim;
        (0..m)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        s += self.get(k, i, j) * x[i] * y[j];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// `R^h_{kij}`, stored at `((h*m + k)*m + i)*m + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Curvature {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Curvature {
    pub fn get(&self, h: usize, k: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.data[((h * m + k) * m + i) * m + j]
    }

    /// `R(X, Y)Z`.
    pub fn apply(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; m];
        for (h, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in 0..m {
                if z[k] == 0.0 {
                    continue;
                }
                for i in 0..m {
                    for j in 0..m {
                        s += self.get(h, k, i, j) * z[k] * x[i] * y[j];
                    }
                }
            }
            *o = s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

/// `(∇_l R)^h_{kij}`, stored at `(((l*m + h)*m + k)*m + i)*m + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureGradient {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl CurvatureGradient {
    pub fn get(&self, l: usize, h: usize, k: usize, i: usize, j: usize) -> f64 {
        let m = self.dim;
        self.data[(((l * m + h) * m + k) * m + i) * m + j]
    }

    /// `(∇_W R)(X, Y)Z`.
    pub fn apply(&self, w: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let m = self.dim;
        let mut out = vec![0.0; m];
        for (h, o) in out.iter_mut().enumerate() {
            let mut s = 0.0;
            for l in 0..m {
                for k in 0..m {
                    for i in 0..m {
                        for j in 0..m {
                            s += self.get(l, h, k, i, j) * w[l] * z[k] * x[i] * y[j];
                        }
                    }
                }
            }
            *o = s;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }
}

fn christoffel_from_jet(jet: &MetricJet, ginv: &[f64]) -> Christoffel {
    let m = jet.dim;
    let mut data = vec![0.0; m * m * m];
    for k in 0..m {
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for l in 0..m {
                    s += ginv[k * m + l] * (jet.dg(i, j, l) + jet.dg(j, i, l) - jet.dg(l, i, j));
                }
                data[k * m * m + i * m + j] = 0.5 * s;
                data[k * m * m + j * m + i] = 0.5 * s;
            }
        }
    }
    Christoffel { dim: m, data }
}

/// Everything the bundle formulas need from the base at one chart point.
#[derive(Clone, Debug)]
pub struct LocalGeometry {
    pub x: Vec<f64>,
    pub dim: usize,
    pub g: Vec<f64>,
    pub ginv: Vec<f64>,
    pub gamma: Christoffel,
    /// `∂_a Γ^k_ij` at `((a*m + k)*m + i)*m + j`; empty unless the jet had order ≥ 2.
    pub dgamma: Vec<f64>,
    pub riemann: Curvature,
    pub nabla_riemann: CurvatureGradient,
}

impl LocalGeometry {
    /// Builds Christoffels, curvature and (when the jet has order 3) `∇R`.
    pub fn from_jet(x: &[f64], jet: &MetricJet) -> Result<Self> {
        let m = jet.dim;
        let ginv = invert(&jet.g, m, x)?;
        let gamma = christoffel_from_jet(jet, &ginv);
        let idx3 = |k: usize, i: usize, j: usize| (k * m + i) * m + j;
        let idx4 = |a: usize, k: usize, i: usize, j: usize| ((a * m + k) * m + i) * m + j;

        // Christoffel symbols of the first kind Γ_{l,ij} and their derivatives.
        let first = |l: usize, i: usize, j: usize| 0.5 * (jet.dg(i, j, l) + jet.dg(j, i, l) - jet.dg(l, i, j));
        let dfirst = |a: usize, l: usize, i: usize, j: usize| {
            0.5 * (jet.d2g(a, i, j, l) + jet.d2g(a, j, i, l) - jet.d2g(a, l, i, j))
        };
        let ddfirst = |a: usize, b: usize, l: usize, i: usize, j: usize| {
            0.5 * (jet.d3g(a, b, i, j, l) + jet.d3g(a, b, j, i, l) - jet.d3g(a, b, l, i, j))
        };

        let mut dgamma = Vec::new();
        let mut riemann = vec![0.0; m * m * m * m];
        let mut nabla = vec![0.0; m.pow(5)];

        if jet.order >= 2 {
            // ∂_a g^{kl} = −g^{kp} ∂_a g_pq g^{ql}
            let mut dginv = vec![0.0; m * m * m];
            for a in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let mut s = 0.0;
                        for p in 0..m {
                            for q in 0..m {
                                s -= ginv[k * m + p] * jet.dg(a, p, q) * ginv[q * m + l];
                            }
                        }
                        dginv[idx3(a, k, l)] = s;
                    }
                }
            }
            dgamma = vec![0.0; m.pow(4)];
            for a in 0..m {
                for k in 0..m {
                    for i in 0..m {
                        for j in 0..m {
                            let mut s = 0.0;
                            for l in 0..m {
                                s += dginv[idx3(a, k, l)] * first(l, i, j)
                                    + ginv[k * m + l] * dfirst(a, l, i, j);
                            }
                            dgamma[idx4(a, k, i, j)] = s;
                        }
                    }
                }
            }
            let dg_at = |a: usize, k: usize, i: usize, j: usize| dgamma[idx4(a, k, i, j)];
            for h in 0..m {
                for k in 0..m {
                    for i in 0..m {
                        for j in 0..m {
                            let mut s = dg_at(i, h, j, k) - dg_at(j, h, i, k);
                            for l in 0..m {
                                s += gamma.get(h, i, l) * gamma.get(l, j, k)
                                    - gamma.get(h, j, l) * gamma.get(l, i, k);
                            }
                            riemann[idx4(h, k, i, j)] = s;
                        }
                    }
                }
            }

            if jet.order >= 3 {
                // ∂_a∂_b g^{kl}
                let mut ddginv = vec![0.0; m.pow(4)];
                for a in 0..m {
                    for b in 0..m {
                        for k in 0..m {
                            for l in 0..m {
                                let mut s = 0.0;
                                for p in 0..m {
                                    for q in 0..m {
                                        s -= dginv[idx3(b, k, p)] * jet.dg(a, p, q) * ginv[q * m + l]
                                            + ginv[k * m + p] * jet.d2g(a, b, p, q) * ginv[q * m + l]
                                            + ginv[k * m + p] * jet.dg(a, p, q) * dginv[idx3(b, q, l)];
                                    }
                                }
                                ddginv[idx4(a, b, k, l)] = s;
                            }
                        }
                    }
                }
                // ∂_a∂_b Γ^k_ij at ((((a*m+b)*m+k)*m+i)*m+j)
                let idx5 = |a: usize, b: usize, k: usize, i: usize, j: usize| (((a * m + b) * m + k) * m + i) * m + j;
                let mut ddgamma = vec![0.0; m.pow(5)];
                for a in 0..m {
                    for b in 0..m {
                        for k in 0..m {
                            for i in 0..m {
                                for j in 0..m {
                                    let mut s = 0.0;
                                    for l in 0..m {
                                        s += ddginv[idx4(a, b, k, l)] * first(l, i, j)
                                            + dginv[idx3(a, k, l)] * dfirst(b, l, i, j)
                                            + dginv[idx3(b, k, l)] * dfirst(a, l, i, j)
                                            + ginv[k * m + l] * ddfirst(a, b, l, i, j);
                                    }
                                    ddgamma[idx5(a, b, k, i, j)] = s;
                                }
                            }
                        }
                    }
                }
                // ∂_a R^h_{kij}
                let mut dr = vec![0.0; m.pow(5)];
                for a in 0..m {
                    for h in 0..m {
                        for k in 0..m {
                            for i in 0..m {
                                for j in 0..m {
                                    let mut s = ddgamma[idx5(a, i, h, j, k)] - ddgamma[idx5(a, j, h, i, k)];
                                    for l in 0..m {
                                        s += dg_at(a, h, i, l) * gamma.get(l, j, k)
                                            + gamma.get(h, i, l) * dg_at(a, l, j, k)
                                            - dg_at(a, h, j, l) * gamma.get(l, i, k)
                                            - gamma.get(h, j, l) * dg_at(a, l, i, k);
                                    }
                                    dr[idx5(a, h, k, i, j)] = s;
                                }
                            }
                        }
                    }
                }
                let r = |h: usize, k: usize, i: usize, j: usize| riemann[idx4(h, k, i, j)];
                for a in 0..m {
                    for h in 0..m {
                        for k in 0..m {
                            for i in 0..m {
                                for j in 0..m {
                                    let mut s = dr[idx5(a, h, k, i, j)];
                                    for p in 0..m {
                                        s += gamma.get(h, a, p) * r(p, k, i, j)
                                            - gamma.get(p, a, k) * r(h, p, i, j)
                                            - gamma.get(p, a, i) * r(h, k, p, j)
                                            - gamma.get(p, a, j) * r(h, k, i, p);
                                    }
                                    nabla[idx5(a, h, k, i, j)] = s;
                                }
                            }
                        }
                    }
                }
            }
        }

        Ok(Self {
            x: x.to_vec(),
            dim: m,
            g: jet.g.clone(),
            ginv,
            gamma,
            dgamma,
            riemann: Curvature { dim: m, data: riemann },
            nabla_riemann: CurvatureGradient { dim: m, data: nabla },
        })
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        let m = self.dim;
        let mut s = 0.0;
        for i in 0..m {
            for j in 0..m {
                s += self.g[i * m + j] * u[i] * v[j];
            }
        }
        s
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.inner(u, u)
    }

    /// `g(X, ·)` as a covector.
    pub fn lower(&self, u: &[f64]) -> Vec<f64> {
        let m = self.dim;
        (0..m)
            .map(|i| (0..m).map(|j| self.g[i * m + j] * u[j]).sum())
            .collect()
    }

    pub fn raise(&self, w: &[f64]) -> Vec<f64> {
        let m = self.dim;
        (0..m)
            .map(|i| (0..m).map(|j| self.ginv[i * m + j] * w[j]).sum())
            .collect()
    }

    /// `R(X, Y)Z`.
    pub fn r(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        self.riemann.apply(x, y, z)
    }

    /// `(∇_W R)(X, Y)Z`.
    pub fn nabla_r(&self, w: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        self.nabla_riemann.apply(w, x, y, z)
    }

    /// `∇_X Y` for `Y` with constant chart coefficients.
    pub fn nabla(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        self.gamma.contract(x, y)
    }

    /// `∂_X Γ^k_ij`, contracted as `(∂_X Γ)(Y, Z)`.
    pub fn dgamma_contract(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        let m = self.dim;
        assert!(!self.dgamma.is_empty(), "Christoffel derivatives need a second-order jet");
        (0..m)
            .map(|k| {
                let mut s = 0.0;
                for a in 0..m {
                    for i in 0..m {
                        for j in 0..m {
                            s += self.dgamma[((a * m + k) * m + i) * m + j] * x[a] * y[i] * z[j];
                        }
                    }
                }
                s
            })
            .collect()
    }

    pub fn sectional(&self, u: &[f64], v: &[f64]) -> Result<f64> {
        let uu = self.norm_sq(u);
        let vv = self.norm_sq(v);
        let uv = self.inner(u, v);
        let denom = uu * vv - uv * uv;
        if denom <= 1e-14 * uu * vv || denom <= 0.0 {
            return Err(GeometryError::DegeneratePlane);
        }
        let ruvv = self.r(u, v, v);
        Ok(self.inner(&ruvv, u) / denom)
    }

    /// Scalar curvature `g^{kj} R^i_{kij}`.
    pub fn scalar_curvature(&self) -> f64 {
        let m = self.dim;
        let mut s = 0.0;
        for i in 0..m {
            for k in 0..m {
                for j in 0..m {
                    s += self.ginv[k * m + j] * self.riemann.get(i, k, i, j);
                }
            }
        }
        s
    }

    /// A `g`-orthonormal frame whose first vector is `u/|u|`.
    pub fn orthonormal_frame_from(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        let m = self.dim;
        let n = self.norm_sq(u).sqrt();
        if n < 1e-12 {
            return Err(GeometryError::Precondition(
                "adapted frame requires a nonzero fiber vector".into(),
            ));
        }
        let mut frame: Vec<Vec<f64>> = vec![u.iter().map(|v| v / n).collect()];
        for k in 0..m {
            if frame.len() == m {
                break;
            }
            let mut w: Vec<f64> = (0..m).map(|i| if i == k { 1.0 } else { 0.0 }).collect();
            for e in &frame {
                let p = self.inner(&w, e);
                for i in 0..m {
                    w[i] -= p * e[i];
                }
            }
            let wn = self.norm_sq(&w).sqrt();
            if wn > 1e-8 {
                frame.push(w.iter().map(|v| v / wn).collect());
            }
        }
        Ok(frame)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn product_metric() -> ChartMetric {
        // diag(1, 1 + x0^2)
        ChartMetric::diagonal_polynomial(vec![
            Polynomial::constant(1.0, 2),
            Polynomial {
                terms: vec![
                    Monomial { coeff: 1.0, powers: vec![0, 0] },
                    Monomial { coeff: 1.0, powers: vec![2, 0] },
                ],
            },
        ])
        .unwrap()
    }

    #[test]
    fn euclidean_has_vanishing_christoffels_and_curvature() {
        let g = ChartMetric::euclidean(3);
        let x = [0.3, -1.2, 2.0];
        assert_eq!(g.christoffel(&x).unwrap().max_abs(), 0.0);
        let local = g.local(&x).unwrap();
        assert_eq!(local.riemann.max_abs(), 0.0);
        assert_eq!(local.nabla_riemann.max_abs(), 0.0);
        assert_eq!(local.sectional(&[1.0, 0.0, 0.0], &[0.2, 1.0, 0.5]).unwrap(), 0.0);
    }

    #[test]
    fn space_form_christoffels_vanish_at_origin() {
        let g = ChartMetric::space_form(2, 4.0);
        assert!(g.christoffel(&[0.0, 0.0]).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn christoffels_match_central_differences() {
        let g = ChartMetric::space_form(2, 1.0);
        let x = [0.3, 0.4];
        let analytic = g.christoffel(&x).unwrap();
        // oracle: differentiate the raw components numerically
        let h = 1e-5;
        let comp = |y: &[f64]| g.components(y);
        let m = 2;
        let g0 = comp(&x);
        let ginv = invert(&g0, m, &x).unwrap();
        let d = |a: usize, i: usize, j: usize| {
            let mut p = x.to_vec();
            let mut n = x.to_vec();
            p[a] += h;
            n[a] -= h;
            (comp(&p)[i * m + j] - comp(&n)[i * m + j]) / (2.0 * h)
        };
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    let mut s = 0.0;
                    for l in 0..m {
                        s += 0.5 * ginv[k * m + l] * (d(i, j, l) + d(j, i, l) - d(l, i, j));
                    }
                    assert_abs_diff_eq!(analytic.get(k, i, j), s, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn space_form_curvature_identity() {
        let c = -1.0;
        let g = ChartMetric::space_form(3, c);
        let x = [0.4, -0.3, 0.55];
        let local = g.local(&x).unwrap();
        let m = 3;
        let mut worst: f64 = 0.0;
        for k in 0..m {
            for l in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let di = if k == i { 1.0 } else { 0.0 };
                        let dj = if k == j { 1.0 } else { 0.0 };
                        let expect = c * (local.g[j * m + l] * di - local.g[i * m + l] * dj);
                        worst = worst.max((local.riemann.get(k, l, i, j) - expect).abs());
                    }
                }
            }
        }
        assert!(worst <= 1e-7, "worst = {worst}");
        assert!(local.nabla_riemann.max_abs() < 1e-6);
    }

    #[test]
    fn space_form_sectional_curvature() {
        let g = ChartMetric::space_form(2, 1.0);
        let x = [0.3, 0.4];
        let local = g.local(&x).unwrap();
        let s = 1.0 / (1.0 + 0.25 * 0.25);
        let k = local.sectional(&[s, 0.0], &[0.0, s]).unwrap();
        assert_abs_diff_eq!(k, 1.0, epsilon = 1e-7);
        let g = ChartMetric::space_form(3, 2.5);
        let local = g.local(&[0.1, 0.2, -0.3]).unwrap();
        let k = local.sectional(&[1.0, 0.3, 0.0], &[-0.2, 0.5, 0.9]).unwrap();
        assert_abs_diff_eq!(k, 2.5, epsilon = 1e-6);
    }

    #[test]
    fn sectional_is_scale_invariant() {
        let g = product_metric();
        let local = g.local(&[0.2, 0.1]).unwrap();
        let x = [0.3, 0.7];
        let y = [1.0, -0.2];
        let k1 = local.sectional(&x, &y).unwrap();
        let k2 = local.sectional(&[0.6, 1.4], &y).unwrap();
        assert!((k1 - k2).abs() <= 1e-14 * k1.abs().max(1.0));
    }

    #[test]
    fn degenerate_plane_is_rejected() {
        let g = ChartMetric::space_form(2, 1.0);
        let err = g.sectional(&[0.1, 0.1], &[1.0, 2.0], &[2.0, 4.0]).unwrap_err();
        assert_eq!(err, GeometryError::DegeneratePlane);
    }

    #[test]
    fn chart_domain_violation_is_an_error() {
        let g = ChartMetric::space_form(2, -1.0);
        let err = g.christoffel(&[2.0, 1.0]).unwrap_err();
        assert!(matches!(err, GeometryError::OutsideChart { .. }));
    }

    #[test]
    fn singular_metric_names_the_point() {
        // diag(x0^2, 1) is singular at x0 = 0
        let g = ChartMetric::diagonal_polynomial(vec![
            Polynomial { terms: vec![Monomial { coeff: 1.0, powers: vec![2, 0] }] },
            Polynomial::constant(1.0, 2),
        ])
        .unwrap();
        match g.christoffel(&[0.0, 0.5]).unwrap_err() {
            GeometryError::SingularMetric { point } => assert_eq!(point, vec![0.0, 0.5]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn analytic_jet_agrees_with_finite_difference_jet() {
        let g = product_metric();
        let x = [0.2, 0.0];
        let analytic = LocalGeometry::from_jet(&x, &g.jet(&x, 2).unwrap()).unwrap();
        let fd = LocalGeometry::from_jet(&x, &g.jet_finite_difference(&x, 1e-5, 1e-4).unwrap()).unwrap();
        for (a, b) in analytic.gamma.data.iter().zip(&fd.gamma.data) {
            assert!((a - b).abs() < 1e-6);
        }
        for (a, b) in analytic.riemann.data.iter().zip(&fd.riemann.data) {
            assert!((a - b).abs() < 1e-6);
        }
    }

    #[test]
    fn spec_round_trip() {
        let spec: MetricSpec = serde_json::from_str(
            r#"{"dim": 2, "kind": "diagonal_polynomial",
                "params": {"entries": [[{"coeff": 1.0, "powers": [0, 0]}],
                                       [{"coeff": 1.0, "powers": [0, 0]}, {"coeff": 1.0, "powers": [2, 0]}]]}}"#,
        )
        .unwrap();
        assert_eq!(ChartMetric::from_spec(&spec).unwrap(), product_metric());
        let spec: MetricSpec =
            serde_json::from_str(r#"{"dim": 3, "kind": "space_form", "params": {"c": -1.0}}"#).unwrap();
        assert_eq!(ChartMetric::from_spec(&spec).unwrap(), ChartMetric::space_form(3, -1.0));
        let bad: MetricSpec = serde_json::from_str(r#"{"dim": 2, "kind": "torus"}"#).unwrap();
        assert!(ChartMetric::from_spec(&bad).is_err());
    }
}
