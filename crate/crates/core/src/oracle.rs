//! Finite-difference ground truth on the chart `(x, y)` of `T(M)`.
//!
//! `g_A` is written as a `2m × 2m` coordinate metric and every derived object
//! is obtained by central differences with one Richardson step. Nothing here
//! uses the adapted-frame formulas of [`crate::tbundle`].
//!
//! Differential forms follow the `½`-normalized convention: for a `k`-form
//! and constant coordinate fields,
//! `dα(V₀,…,V_k) = 1/(k+1) Σ (−1)^i V_i α(…, V̂_i, …)`, and
//! `(ω∧Ω)(X,Y,Z) = ⅓(ω(X)Ω(Y,Z) + ω(Y)Ω(Z,X) + ω(Z)Ω(X,Y))`.

use nalgebra::{DMatrix, DVector};

use crate::base::{ChartMetric, Christoffel, Curvature};
use crate::error::{GeometryError, Result};
use crate::tbundle::TangentBundle;
use crate::weights::WeightPair;

/// Default differencing step.
pub const DEFAULT_STEP: f64 = 1e-4;

/// Outer step used when differencing an already differenced quantity,
/// as a multiple of the inner step.
pub const OUTER_STEP_FACTOR: f64 = 10.0;

const MIN_STEP: f64 = 1e-10;

fn check_step(h: f64) -> Result<()> {
    if !(h.is_finite() && h >= MIN_STEP) {
        return Err(GeometryError::InvalidParameter {
            family: "oracle".into(),
            reason: format!("differencing step {h} underflows"),
        });
    }
    Ok(())
}

/// Central derivative of `f(s)` at `s = 0`, extrapolated once:
/// `(4 D(h/2) − D(h)) / 3`.
pub fn richardson<F>(f: F, h: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    check_step(h)?;
    let central = |s: f64| -> Result<Vec<f64>> {
        let p = f(s)?;
        let n = f(-s)?;
        Ok(p.iter().zip(&n).map(|(a, b)| (a - b) / (2.0 * s)).collect())
    };
    let coarse = central(h)?;
    let fine = central(0.5 * h)?;
    Ok(fine.iter().zip(&coarse).map(|(f, c)| (4.0 * f - c) / 3.0).collect())
}

/// Directional derivative `D F(z)[v]` of a vector-valued map.
pub fn directional<F>(f: F, z: &[f64], v: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    richardson(
        |s| {
            let p: Vec<f64> = z.iter().zip(v).map(|(a, b)| a + s * b).collect();
            f(&p)
        },
        h,
    )
}

fn shifted(z: &[f64], k: usize, s: f64) -> Vec<f64> {
    let mut p = z.to_vec();
    p[k] += s;
    p
}

/// `g_A` in chart coordinates `(x, y)`.
#[derive(Clone, Debug)]
pub struct InducedMetric {
    base: ChartMetric,
    weights: WeightPair,
}

/// Pointwise data shared by the coordinate metric and `J`.
struct Frame {
    m: usize,
    g: DMatrix<f64>,
    /// `Γ^k_{i0} = Γ^k_ij y^j` at `(k, i)`.
    gamma0: DMatrix<f64>,
    gy: DVector<f64>,
    a: f64,
    b: f64,
    t: f64,
    epsilon: f64,
}

impl Frame {
    fn vertical_block(&self) -> DMatrix<f64> {
        &self.g * self.a + (&self.gy * self.gy.transpose()) * self.b
    }

    /// Maps adapted components `(h, v)` to coordinate components.
    fn to_coordinates(&self) -> DMatrix<f64> {
        let m = self.m;
        let mut p = DMatrix::identity(2 * m, 2 * m);
        p.view_mut((m, 0), (m, m)).copy_from(&(-&self.gamma0));
        p
    }

    fn from_coordinates(&self) -> DMatrix<f64> {
        let m = self.m;
        let mut p = DMatrix::identity(2 * m, 2 * m);
        p.view_mut((m, 0), (m, m)).copy_from(&self.gamma0);
        p
    }
}

impl InducedMetric {
    pub fn induce(base: ChartMetric, weights: WeightPair) -> Self {
        Self { base, weights }
    }

    pub fn from_bundle(bundle: &TangentBundle) -> Self {
        Self::induce(bundle.base().clone(), bundle.weights().clone())
    }

    pub fn base(&self) -> &ChartMetric {
        &self.base
    }

    pub fn weights(&self) -> &WeightPair {
        &self.weights
    }

    /// Dimension `2m` of the coordinate chart.
    pub fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(())
    }

    fn frame(&self, z: &[f64]) -> Result<Frame> {
        self.check_point(z)?;
        let m = self.base.dim();
        let (x, y) = z.split_at(m);
        let g = self.base.matrix(x)?;
        let gamma = self.base.christoffel(x)?;
        let gamma0 = DMatrix::from_fn(m, m, |k, i| (0..m).map(|j| gamma.get(k, i, j) * y[j]).sum());
        let gy = &g * DVector::from_column_slice(y);
        let t = 0.5 * gy.dot(&DVector::from_column_slice(y));
        let w = self.weights.values(t)?;
        Ok(Frame {
            m,
            g,
            gamma0,
            gy,
            a: w.a,
            b: w.b,
            t,
            epsilon: w.epsilon.sign(),
        })
    }

    /// The symmetric `2m × 2m` matrix `G` at `z = (x, y)`.
    pub fn components(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        let f = self.frame(z)?;
        let m = f.m;
        let v = f.vertical_block();
        let xy = f.gamma0.transpose() * &v;
        let xx = &f.g + &xy * &f.gamma0;
        let mut out = DMatrix::zeros(2 * m, 2 * m);
        out.view_mut((0, 0), (m, m)).copy_from(&xx);
        out.view_mut((0, m), (m, m)).copy_from(&xy);
        out.view_mut((m, 0), (m, m)).copy_from(&xy.transpose());
        out.view_mut((m, m), (m, m)).copy_from(&v);
        Ok(out)
    }

    /// Ratio of largest to smallest eigenvalue of `G`.
    pub fn condition_number(&self, z: &[f64]) -> Result<f64> {
        let eig = self.components(z)?.symmetric_eigenvalues();
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), e| (lo.min(*e), hi.max(*e)));
        Ok(hi / lo)
    }

    /// Coordinate matrix of `J_A`, built from its action on `δ_i`, `∂/∂y^i`
    /// and conjugated into coordinates.
    pub fn j_matrix(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        let f = self.frame(z)?;
        let m = f.m;
        let sa = f.a.sqrt();
        let sq = (f.a + 2.0 * f.b * f.t).sqrt();
        // Coefficients of u^V in J δ_i and of u^H in J ∂/∂y^i, fixed by J² = −I
        // and compatibility on the radial direction.
        let (coef_v, coef_h) = if f.epsilon < 0.0 {
            (f.b / (sa * sq * (sa + sq)), -f.b / (sa + sq))
        } else {
            if f.t < crate::weights::ZERO_SECTION_GUARD {
                return Err(GeometryError::ZeroSection);
            }
            ((1.0 / sa + 1.0 / sq) / (2.0 * f.t), (sa + sq) / (2.0 * f.t))
        };
        let y = &z[m..];
        let mut jad = DMatrix::zeros(2 * m, 2 * m);
        for i in 0..m {
            jad[(m + i, i)] += 1.0 / sa;
            jad[(i, m + i)] -= sa;
            for k in 0..m {
                jad[(m + k, i)] -= coef_v * f.gy[i] * y[k];
                jad[(k, m + i)] += coef_h * f.gy[i] * y[k];
            }
        }
        Ok(f.to_coordinates() * jad * f.from_coordinates())
    }

    /// `Ω_A(U, V) = G(U, JV)` in coordinates.
    pub fn kahler_form(&self, z: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let g = self.components(z)?;
        let jv = self.j_matrix(z)? * DVector::from_column_slice(v);
        Ok(DVector::from_column_slice(u).dot(&(g * jv)))
    }

    /// Coordinate components of the adapted vector `(h, v)` at `z`.
    pub fn adapted_to_coordinates(&self, z: &[f64], h: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let f = self.frame(z)?;
        let mut ad = h.to_vec();
        ad.extend_from_slice(v);
        Ok((f.to_coordinates() * DVector::from_vec(ad)).as_slice().to_vec())
    }

    /// Coordinate field of the lift `Y^H + Z^V` of constant-coefficient base
    /// fields, as a function of the chart point.
    pub fn lift_field<'a>(&'a self, h: &'a [f64], v: &'a [f64]) -> impl Fn(&[f64]) -> Result<Vec<f64>> + 'a {
        move |z| self.adapted_to_coordinates(z, h, v)
    }

    /// `∂_K G_IJ` at `(K, I, J)`.
    fn metric_derivatives(&self, z: &[f64], h: f64) -> Result<Vec<DMatrix<f64>>> {
        (0..self.dim())
            .map(|k| {
                let d = richardson(
                    |s| Ok(self.components(&shifted(z, k, s))?.as_slice().to_vec()),
                    h,
                )?;
                let n = self.dim();
                Ok(DMatrix::from_column_slice(n, n, &d))
            })
            .collect()
    }

    /// Christoffel symbols of `G` from differenced metric components.
    pub fn fd_connection(&self, z: &[f64], h: f64) -> Result<Christoffel> {
        let n = self.dim();
        let g = self.components(z)?;
        let ginv = g
            .try_inverse()
            .ok_or(GeometryError::SingularMetric { point: z.to_vec() })?;
        let dg = self.metric_derivatives(z, h)?;
        let mut data = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                // lowered Γ_{l,ij}
                let low: Vec<f64> = (0..n)
                    .map(|l| 0.5 * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]))
                    .collect();
                for k in 0..n {
                    data[k * n * n + i * n + j] = (0..n).map(|l| ginv[(k, l)] * low[l]).sum();
                }
            }
        }
        Ok(Christoffel { dim: n, data })
    }

    /// Curvature `R^H_{KIJ}` of `G`, differencing [`fd_connection`](Self::fd_connection)
    /// with the outer step `OUTER_STEP_FACTOR · h`.
    pub fn fd_curvature(&self, z: &[f64], h: f64) -> Result<Curvature> {
        let n = self.dim();
        let gamma = self.fd_connection(z, h)?;
        let outer = OUTER_STEP_FACTOR * h;
        // dgamma[a][k*n*n + i*n + j] = ∂_a Γ^k_ij
        let dgamma: Vec<Vec<f64>> = (0..n)
            .map(|a| richardson(|s| Ok(self.fd_connection(&shifted(z, a, s), h)?.data), outer))
            .collect::<Result<_>>()?;
        let idx = |k: usize, i: usize, j: usize| k * n * n + i * n + j;
        let mut data = vec![0.0; n * n * n * n];
        for hh in 0..n {
            for k in 0..n {
                for i in 0..n {
                    for j in 0..n {
                        let mut v = dgamma[i][idx(hh, j, k)] - dgamma[j][idx(hh, i, k)];
                        for l in 0..n {
                            v += gamma.get(hh, i, l) * gamma.get(l, j, k) - gamma.get(hh, j, l) * gamma.get(l, i, k);
                        }
                        data[((hh * n + k) * n + i) * n + j] = v;
                    }
                }
            }
        }
        Ok(Curvature { dim: n, data })
    }

    /// Scalar curvature `G^{KJ} R^I_{KIJ}`.
    pub fn oracle_scalar(&self, z: &[f64], h: f64) -> Result<f64> {
        let n = self.dim();
        let r = self.fd_curvature(z, h)?;
        let ginv = self
            .components(z)?
            .try_inverse()
            .ok_or(GeometryError::SingularMetric { point: z.to_vec() })?;
        let mut s = 0.0;
        for k in 0..n {
            for j in 0..n {
                let ric: f64 = (0..n).map(|i| r.get(i, k, i, j)).sum();
                s += ginv[(k, j)] * ric;
            }
        }
        Ok(s)
    }

    /// `∇^G_U W = DW[U] + Γ^G(U, W)` for a coordinate field `W`.
    pub fn covariant_derivative<F>(&self, z: &[f64], u: &[f64], field: F, h: f64) -> Result<Vec<f64>>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let w = field(z)?;
        let dw = directional(&field, z, u, h)?;
        let gamma = self.fd_connection(z, h)?;
        let corr = gamma.contract(u, &w);
        Ok(dw.iter().zip(&corr).map(|(a, b)| a + b).collect())
    }

    /// Numeric Nijenhuis tensor on constant coordinate fields:
    /// `(∂_{JU}J)V − (∂_{JV}J)U + J(∂_V J)U − J(∂_U J)V`.
    pub fn fd_nijenhuis(&self, z: &[f64], u: &[f64], v: &[f64], h: f64) -> Result<Vec<f64>> {
        let n = self.dim();
        let j = self.j_matrix(z)?;
        let uu = DVector::from_column_slice(u);
        let vv = DVector::from_column_slice(v);
        let dj = |dir: &DVector<f64>| -> Result<DMatrix<f64>> {
            let d = directional(|p| Ok(self.j_matrix(p)?.as_slice().to_vec()), z, dir.as_slice(), h)?;
            Ok(DMatrix::from_column_slice(n, n, &d))
        };
        let ju = &j * &uu;
        let jv = &j * &vv;
        let out = dj(&ju)? * &vv - dj(&jv)? * &uu + &j * (dj(&vv)? * &uu) - &j * (dj(&uu)? * &vv);
        Ok(out.as_slice().to_vec())
    }

    /// Numeric `dΩ_A(U, V, W)` on constant coordinate fields.
    pub fn d_kahler_form(&self, z: &[f64], vectors: [&[f64]; 3], h: f64) -> Result<f64> {
        fd_exterior_derivative(
            |p, vs| self.kahler_form(p, &vs[0], &vs[1]),
            z,
            &vectors.map(|v| v.to_vec()),
            h,
        )
    }

    /// `Ω_A` on the coordinate basis, `Ω_IJ`.
    pub fn kahler_matrix(&self, z: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.components(z)? * self.j_matrix(z)?)
    }

    /// Least-squares 1-form `ω` with `dΩ_A = ω ∧ Ω_A` on all coordinate
    /// triples. Returns `ω` in coordinates and the fit residual.
    pub fn lee_fit(&self, z: &[f64], h: f64) -> Result<(Vec<f64>, f64)> {
        let n = self.dim();
        let omega = self.kahler_matrix(z)?;
        let e = |k: usize| crate::vecops::unit(n, k);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let d = self.d_kahler_form(z, [&e(i), &e(j), &e(k)], h)?;
                    let mut row = vec![0.0; n];
                    row[i] += omega[(j, k)] / 3.0;
                    row[j] += omega[(k, i)] / 3.0;
                    row[k] += omega[(i, j)] / 3.0;
                    rows.extend(row);
                    rhs.push(d);
                }
            }
        }
        let count = rhs.len();
        let a = DMatrix::from_row_slice(count, n, &rows);
        let b = DVector::from_vec(rhs);
        let svd = a.clone().svd(true, true);
        let sol = svd
            .solve(&b, 1e-12)
            .map_err(|e| GeometryError::Precondition(e.to_string()))?;
        let residual = (&a * &sol - &b).amax();
        Ok((sol.as_slice().to_vec(), residual))
    }
}

/// Numeric exterior derivative of a `k`-form on constant coordinate fields
/// `V₀, …, V_k`, with the `1/(k+1)` normalization.
pub fn fd_exterior_derivative<F>(form: F, z: &[f64], vectors: &[Vec<f64>], h: f64) -> Result<f64>
where
    F: Fn(&[f64], &[Vec<f64>]) -> Result<f64>,
{
    let k1 = vectors.len();
    if k1 == 0 {
        return Err(GeometryError::Precondition("exterior derivative needs at least one vector".into()));
    }
    let mut total = 0.0;
    for i in 0..k1 {
        let rest: Vec<Vec<f64>> = vectors
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, v)| v.clone())
            .collect();
        let d = directional(|p| Ok(vec![form(p, &rest)?]), z, &vectors[i], h)?[0];
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * d;
    }
    Ok(total / k1 as f64)
}

/// `(ω∧Ω)(X,Y,Z) = ⅓(ω(X)Ω(Y,Z) + ω(Y)Ω(Z,X) + ω(Z)Ω(X,Y))`.
pub fn wedge_one_two<W, O>(omega: W, big_omega: O, x: &[f64], y: &[f64], z: &[f64]) -> f64
where
    W: Fn(&[f64]) -> f64,
    O: Fn(&[f64], &[f64]) -> f64,
{
    (omega(x) * big_omega(y, z) + omega(y) * big_omega(z, x) + omega(z) * big_omega(x, y)) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye_residual(m: &DMatrix<f64>) -> f64 {
        (m - DMatrix::identity(m.nrows(), m.ncols())).amax()
    }

    #[test]
    fn sasaki_over_flat_is_identity() {
        let im = InducedMetric::induce(ChartMetric::euclidean(2), WeightPair::sasaki());
        let g = im.components(&[0.3, -0.2, 0.5, 1.1]).unwrap();
        assert!(eye_residual(&g) < 1e-15);
        assert!(im.fd_connection(&[0.3, -0.2, 0.5, 1.1], DEFAULT_STEP).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn cg_over_flat_unit_fiber_block() {
        let im = InducedMetric::induce(ChartMetric::euclidean(2), WeightPair::cheeger_gromoll());
        let (c, s) = (0.6, 0.8);
        let g = im.components(&[0.0, 0.0, c, s]).unwrap();
        let expect = [[1.0 + c * c, c * s], [c * s, 1.0 + s * s]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(2 + i, 2 + j)] - 0.5 * expect[i][j]).abs() < 1e-15);
                assert!((g[(i, j)] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
                assert_eq!(g[(i, 2 + j)], 0.0);
            }
        }
    }

    #[test]
    fn coordinate_j_squares_to_minus_identity() {
        let im = InducedMetric::induce(ChartMetric::space_form(2, 1.0), WeightPair::cheeger_gromoll());
        let z = [0.2, -0.1, 0.7, 0.4];
        let j = im.j_matrix(&z).unwrap();
        assert!((&j * &j + DMatrix::identity(4, 4)).amax() < 1e-12);
        let g = im.components(&z).unwrap();
        assert!((j.transpose() * &g * &j - g).amax() < 1e-12);
    }

    #[test]
    fn exact_forms_are_closed() {
        // f = t, so df is exact and d(df) = 0.
        let im = InducedMetric::induce(ChartMetric::space_form(2, 1.0), WeightPair::sasaki());
        let t = |p: &[f64]| -> Result<f64> {
            let g = im.base().matrix(&p[..2])?;
            let y = DVector::from_column_slice(&p[2..]);
            Ok(0.5 * y.dot(&(g * &y)))
        };
        let df = |p: &[f64], vs: &[Vec<f64>]| fd_exterior_derivative(|q, _| t(q), p, &vs[..1], 1e-3).map(|d| 2.0 * d);
        let z = [0.1, 0.2, 0.3, -0.5];
        let (x, y) = (vec![0.3, 1.0, -0.2, 0.4], vec![-0.7, 0.1, 0.9, 0.2]);
        let ddf = fd_exterior_derivative(df, &z, &[x, y], 1e-3).unwrap();
        assert!(ddf.abs() < 1e-6, "{ddf}");
    }

    #[test]
    fn step_underflow_is_an_error() {
        let im = InducedMetric::induce(ChartMetric::euclidean(2), WeightPair::sasaki());
        assert!(im.fd_connection(&[0.0; 4], 1e-14).is_err());
    }
}
