//! Weight pairs `(a, b, ε)` and the scalar coefficients derived from them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{GeometryError, Result};
use crate::expr::Expr;

/// Sign branch of the almost complex structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Epsilon {
    #[serde(rename = "+1")]
    Plus,
    #[serde(rename = "-1")]
    Minus,
}

impl Epsilon {
    pub fn sign(self) -> f64 {
        match self {
            Epsilon::Plus => 1.0,
            Epsilon::Minus => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Result<Self> {
        if s == 1.0 {
            Ok(Epsilon::Plus)
        } else if s == -1.0 {
            Ok(Epsilon::Minus)
        } else {
            Err(GeometryError::InvalidSpec(format!("epsilon must be +1 or -1, got {s}")))
        }
    }
}

impl fmt::Display for Epsilon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Epsilon::Plus => "+1",
            Epsilon::Minus => "-1",
        })
    }
}

/// Interval of admissible energy densities. The upper end is always open.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TDomain {
    pub lower: f64,
    pub lower_inclusive: bool,
    pub upper: Option<f64>,
}

impl TDomain {
    pub const NON_NEGATIVE: TDomain = TDomain {
        lower: 0.0,
        lower_inclusive: true,
        upper: None,
    };

    pub const POSITIVE: TDomain = TDomain {
        lower: 0.0,
        lower_inclusive: false,
        upper: None,
    };

    pub fn below(self, upper: f64) -> Self {
        Self {
            upper: Some(upper),
            ..self
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let lower_ok = if self.lower_inclusive {
            t >= self.lower
        } else {
            t > self.lower
        };
        lower_ok && self.upper.map_or(true, |u| t < u) && t.is_finite()
    }

    /// A bounded sub-interval suitable for sampling, capped at `span` beyond the lower end.
    pub fn sampling_interval(&self, span: f64) -> (f64, f64) {
        let hi = self.upper.map_or(self.lower + span, |u| u.min(self.lower + span));
        (self.lower, hi)
    }
}

/// Point values of a weight pair and the derivatives the geometry needs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightValues {
    pub t: f64,
    pub a: f64,
    pub da: f64,
    pub d2a: f64,
    pub b: f64,
    pub db: f64,
    pub epsilon: Epsilon,
}

impl WeightValues {
    /// `a + 2tb`, the weight along the radial vertical direction.
    pub fn radial(&self) -> f64 {
        self.a + 2.0 * self.t * self.b
    }

    /// Coefficients `A(t)` and `B(t)` of the almost complex structure.
    ///
    /// For `ε = −1` both are evaluated in rationalized form, which is exact and
    /// regular at `t = 0`. For `ε = +1` the structure does not exist on the
    /// zero section.
    pub fn j_coefficients(&self) -> Result<(f64, f64)> {
        let sa = self.a.sqrt();
        let sq = self.radial().sqrt();
        match self.epsilon {
            Epsilon::Minus => {
                let a_coef = self.b / (sa * sq * (sa + sq));
                let b_coef = -self.b / (sa + sq);
                Ok((a_coef, b_coef))
            }
            Epsilon::Plus => {
                if self.t < ZERO_SECTION_GUARD {
                    return Err(GeometryError::ZeroSection);
                }
                let inv = 0.5 / self.t;
                Ok((inv * (1.0 / sa + 1.0 / sq), inv * (sa + sq)))
            }
        }
    }

    pub fn derived(&self) -> Result<DerivedCoefficients> {
        let WeightValues { t, a, da, d2a, b, db, .. } = *self;
        let q = self.radial();
        let l = da / (2.0 * a);
        let m = (2.0 * b - da) / (2.0 * q);
        let n = (a * db - 2.0 * da * b) / (2.0 * a * q);
        let dl = (d2a * a - da * da) / (2.0 * a * a);
        // q' = a' + 2b + 2tb'
        let dq = da + 2.0 * b + 2.0 * t * db;
        let dm = ((2.0 * db - d2a) * q - (2.0 * b - da) * dq) / (2.0 * q * q);
        let f1 = dl - l * l - n * (1.0 + 2.0 * t * l);
        let f2 = l - m * (1.0 + 2.0 * t * l);
        let f3 = n - (dm + m * m + 2.0 * t * m * n);
        let j = self.j_coefficients();
        let (a_coef, b_coef) = match j {
            Ok(v) => (Some(v.0), Some(v.1)),
            Err(GeometryError::ZeroSection) => (None, None),
            Err(e) => return Err(e),
        };
        Ok(DerivedCoefficients {
            l,
            m,
            n,
            dl,
            dm,
            f1,
            f2,
            f3,
            a_coef,
            b_coef,
            lee_coef: b_coef.map(|bc| da / (2.0 * a) + bc / a.sqrt()),
        })
    }
}

/// Smallest energy density at which `ε = +1` structures are evaluated.
pub const ZERO_SECTION_GUARD: f64 = 1e-12;

/// Connection, curvature and Lee-form coefficients at one value of `t`.
///
/// `a_coef`, `b_coef` and `lee_coef` are `None` on the zero section for
/// `ε = +1`, where the almost complex structure is undefined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DerivedCoefficients {
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub dl: f64,
    pub dm: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub a_coef: Option<f64>,
    pub b_coef: Option<f64>,
    /// `ω(X^V) = lee_coef · g(X, u)`.
    pub lee_coef: Option<f64>,
}

/// A weight pair defining the metric `g_A` and the structure `J_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightPair {
    name: String,
    a: Expr,
    da: Expr,
    d2a: Expr,
    b: Expr,
    db: Expr,
    epsilon: Epsilon,
    domain: TDomain,
}

/// Which completion formula to use when building an almost-Kähler pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompletionRule {
    /// `b = 2a'(ta' + a)/a`, with `a` increasing (`ε = −1`) or `ta`
    /// decreasing (`ε = +1`).
    Stated,
    /// `b = a'(ta' + 2a)/(2a)`, the root of the verified Lee coefficient,
    /// with `ta` increasing (`ε = −1`) or decreasing (`ε = +1`).
    Verified,
}

const MONOTONE_SAMPLES: usize = 1000;

impl WeightPair {
    pub fn new(name: impl Into<String>, a: Expr, b: Expr, epsilon: Epsilon, domain: TDomain) -> Self {
        let da = a.diff();
        let d2a = da.diff();
        let db = b.diff();
        Self {
            name: name.into(),
            a,
            da,
            d2a,
            b,
            db,
            epsilon,
            domain,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn epsilon(&self) -> Epsilon {
        self.epsilon
    }

    pub fn domain(&self) -> TDomain {
        self.domain
    }

    pub fn a_expr(&self) -> &Expr {
        &self.a
    }

    pub fn b_expr(&self) -> &Expr {
        &self.b
    }

    pub fn with_epsilon(mut self, epsilon: Epsilon) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_domain(mut self, domain: TDomain) -> Self {
        self.domain = domain;
        self
    }

    /// Evaluates the pair at `t`, enforcing the domain and positivity.
    pub fn values(&self, t: f64) -> Result<WeightValues> {
        if !self.domain.contains(t) {
            return Err(GeometryError::OutsideWeightDomain {
                t,
                family: self.name.clone(),
            });
        }
        let v = self.values_unchecked(t);
        if !(v.a > 0.0) {
            return Err(GeometryError::InadmissibleWeights {
                t,
                family: self.name.clone(),
                reason: format!("a = {} is not positive", v.a),
            });
        }
        if !(v.radial() > 0.0) {
            return Err(GeometryError::InadmissibleWeights {
                t,
                family: self.name.clone(),
                reason: format!("a + 2tb = {} is not positive", v.radial()),
            });
        }
        Ok(v)
    }

    /// Raw evaluation without domain or positivity checks.
    pub fn values_unchecked(&self, t: f64) -> WeightValues {
        WeightValues {
            t,
            a: self.a.eval(t),
            da: self.da.eval(t),
            d2a: self.d2a.eval(t),
            b: self.b.eval(t),
            db: self.db.eval(t),
            epsilon: self.epsilon,
        }
    }

    pub fn derived(&self, t: f64) -> Result<DerivedCoefficients> {
        self.values(t)?.derived()
    }

    /// Coefficient of `g(X,u)` in `ω(X^V)`, as confirmed by the exterior
    /// derivative oracle: `a'/(2a) + B/√a`.
    pub fn lee_coef(&self, t: f64) -> Result<f64> {
        let v = self.values(t)?;
        let (_, b_coef) = v.j_coefficients()?;
        Ok(v.da / (2.0 * v.a) + b_coef / v.a.sqrt())
    }

    /// The alternative reading `(1/√a)(a'/√a + B)` of the same coefficient.
    /// It does not satisfy `dΩ = ω ∧ Ω` unless `a' = 0`; kept for comparison.
    pub fn lee_coef_stated(&self, t: f64) -> Result<f64> {
        let v = self.values(t)?;
        let (_, b_coef) = v.j_coefficients()?;
        Ok((v.da / v.a.sqrt() + b_coef) / v.a.sqrt())
    }

    /// `−a'/(2a²) + ((a + ta')/(a√a)) A(t)`; constant and equal to the base
    /// curvature whenever `J_A` is integrable over a space form.
    pub fn integrability_c(&self, t: f64) -> Result<f64> {
        let v = self.values(t)?;
        if v.t <= 0.0 && self.epsilon == Epsilon::Plus {
            return Err(GeometryError::ZeroSection);
        }
        let (a_coef, _) = v.j_coefficients()?;
        Ok(-v.da / (2.0 * v.a * v.a) + (v.a + t * v.da) / (v.a * v.a.sqrt()) * a_coef)
    }

    /// Residuals of the Kähler system `b = 2a'(ta'+a)/a` and `a' = 2ca(2ta'+a)`.
    pub fn kahler_residuals(&self, t: f64, c: f64) -> Result<(f64, f64)> {
        let v = self.values(t)?;
        let r13 = v.b - 2.0 * v.da * (t * v.da + v.a) / v.a;
        let r14 = v.da - 2.0 * c * v.a * (2.0 * t * v.da + v.a);
        Ok((r13, r14))
    }

    /// Residual of the flatness relation `b = a'(1 + ta'/(2a))`.
    pub fn flatness_residual(&self, t: f64) -> Result<f64> {
        let v = self.values(t)?;
        Ok(v.b - v.da * (1.0 + t * v.da / (2.0 * v.a)))
    }

    /// Residual of `t a'² + 2aa' − 2ab = 0`.
    pub fn flatness_ode_residual(&self, t: f64) -> Result<f64> {
        let v = self.values(t)?;
        Ok(t * v.da * v.da + 2.0 * v.a * v.da - 2.0 * v.a * v.b)
    }

    /// Completes `a` to an almost-Kähler weight pair.
    pub fn almost_kahler_complete(
        a: Expr,
        epsilon: Epsilon,
        domain: TDomain,
        rule: CompletionRule,
    ) -> Result<Self> {
        let name = "almost_kahler";
        let da = a.diff();
        let t = Expr::t();
        let (lo, hi) = domain.sampling_interval(10.0);
        let monotone_expr = match rule {
            CompletionRule::Stated => match epsilon {
                Epsilon::Minus => da.clone(),
                Epsilon::Plus => a.clone() + t.clone() * da.clone(),
            },
            CompletionRule::Verified => a.clone() + t.clone() * da.clone(),
        };
        let want_increasing = epsilon == Epsilon::Minus;
        for k in 0..MONOTONE_SAMPLES {
            let s = lo + (hi - lo) * (k as f64 + 0.5) / MONOTONE_SAMPLES as f64;
            let d = monotone_expr.eval(s);
            let ok = if want_increasing { d >= 0.0 } else { d <= 0.0 };
            if !ok {
                let what = match (rule, epsilon) {
                    (CompletionRule::Stated, Epsilon::Minus) => "a must be increasing",
                    (CompletionRule::Stated, Epsilon::Plus) => "t·a must be decreasing",
                    (CompletionRule::Verified, Epsilon::Minus) => "t·a must be increasing",
                    (CompletionRule::Verified, Epsilon::Plus) => "t·a must be decreasing",
                };
                return Err(GeometryError::Precondition(format!("{what} (fails at t = {s})")));
            }
        }
        let b = match rule {
            CompletionRule::Stated => 2.0 * da.clone() * (t.clone() * da.clone() + a.clone()) / a.clone(),
            CompletionRule::Verified => {
                da.clone() * (t.clone() * da.clone() + 2.0 * a.clone()) / (2.0 * a.clone())
            }
        };
        let pair = WeightPair::new(name, a, b, epsilon, domain);
        for k in 0..MONOTONE_SAMPLES {
            let s = lo + (hi - lo) * (k as f64 + 0.5) / MONOTONE_SAMPLES as f64;
            pair.values(s)?;
        }
        Ok(pair)
    }

    /// The closed-form Kähler solutions.
    ///
    /// Case 1 needs `c > 0`, `κ < 0` and uses `ε = +1` on `0 < t < −1/κ`.
    /// Case 2 needs `κc < 0` and uses `ε = −1`; for `c < 0` it is defined for
    /// all `t ≥ 0`, for `c > 0` on `t < −1/κ`.
    pub fn kahler_family(case: u8, c: f64, kappa: f64) -> Result<Self> {
        let family = format!("kahler_case{case}");
        let invalid = |reason: &str| GeometryError::InvalidParameter {
            family: family.clone(),
            reason: reason.to_string(),
        };
        let t = Expr::t();
        let root = (1.0 + kappa * t.clone()).sqrt();
        match case {
            1 => {
                if !(c > 0.0 && kappa < 0.0) {
                    return Err(invalid("case 1 requires c > 0 and kappa < 0"));
                }
                let a = (1.0 + root.clone()) / (4.0 * c * t.clone());
                let b = -kappa * (1.0 + root.clone())
                    / (8.0 * c * t.clone() * (1.0 + kappa * t.clone()));
                Ok(Self::new(family, a, b, Epsilon::Plus, TDomain::POSITIVE.below(-1.0 / kappa)))
            }
            2 => {
                if !(kappa * c < 0.0) {
                    return Err(invalid("case 2 requires kappa * c < 0"));
                }
                let a = -kappa / (4.0 * c * (1.0 + root.clone()));
                let b = kappa * kappa
                    / (8.0 * c * (1.0 + kappa * t.clone()) * (1.0 + root.clone()));
                let domain = if c < 0.0 {
                    TDomain::NON_NEGATIVE
                } else {
                    TDomain::NON_NEGATIVE.below(-1.0 / kappa)
                };
                Ok(Self::new(family, a, b, Epsilon::Minus, domain))
            }
            _ => Err(invalid("case must be 1 or 2")),
        }
    }

    pub fn sasaki() -> Self {
        Self::new("sasaki", Expr::c(1.0), Expr::c(0.0), Epsilon::Minus, TDomain::NON_NEGATIVE)
    }

    pub fn cheeger_gromoll() -> Self {
        let w = 1.0 / (1.0 + 2.0 * Expr::t());
        Self::new("cheeger_gromoll", w.clone(), w, Epsilon::Minus, TDomain::NON_NEGATIVE)
    }

    /// The flat metric with `a = b = e^{2s}/(1+s)²`, `s = √(1+2t)`.
    pub fn g1() -> Self {
        let mut w = Self::flat_exp(1.0).expect("a0 = 1 is admissible");
        w.name = "g1".into();
        w
    }

    /// Flat family `b = a`, `a = a0 e^{2s}/(1+s)²`.
    pub fn flat_exp(a0: f64) -> Result<Self> {
        if !(a0 > 0.0) {
            return Err(GeometryError::InvalidParameter {
                family: "flat_exp".into(),
                reason: "a0 must be positive".into(),
            });
        }
        let s = (1.0 + 2.0 * Expr::t()).sqrt();
        let a = a0 * (2.0 * s.clone()).exp() / (1.0 + s).powi(2);
        Ok(Self::new("flat_exp", a.clone(), a, Epsilon::Minus, TDomain::NON_NEGATIVE))
    }

    /// Flat family `b = k a'`, `a = a0 t^{2(k−1)}` on non-zero vectors.
    pub fn flat_power(a0: f64, k: f64) -> Result<Self> {
        if !(a0 > 0.0) || (k > 0.0 && k <= 1.0) {
            return Err(GeometryError::InvalidParameter {
                family: "flat_power".into(),
                reason: "requires a0 > 0 and k > 1 or k <= 0".into(),
            });
        }
        let a = a0 * Expr::t().powf(2.0 * (k - 1.0));
        let b = k * a.diff();
        Ok(Self::new("flat_power", a, b, Epsilon::Minus, TDomain::POSITIVE))
    }

    /// `a = b = e^{2s} / (2(c e^{2s} t + (1 + t + s)k))`, `s = √(1+2t)`.
    pub fn lck_example(c: f64, k: f64) -> Result<Self> {
        if !(k > 0.0 && c >= 0.0) {
            return Err(GeometryError::InvalidParameter {
                family: "lck_example".into(),
                reason: "requires k > 0 and c >= 0".into(),
            });
        }
        let t = Expr::t();
        let s = (1.0 + 2.0 * t.clone()).sqrt();
        let e = (2.0 * s.clone()).exp();
        let a = e.clone() / (2.0 * (c * e * t.clone() + (1.0 + t + s) * k));
        Ok(Self::new("lck_example", a.clone(), a, Epsilon::Minus, TDomain::NON_NEGATIVE))
    }

    /// `a = 2/3`, `b = 0`.
    pub fn scal_a23() -> Self {
        Self::new("scal_a23", Expr::c(2.0 / 3.0), Expr::c(0.0), Epsilon::Minus, TDomain::NON_NEGATIVE)
    }

    /// `a = 2/3`, `b = exp(−(3/2)[(m−2)t + (m/3) ln t])` on non-zero vectors.
    pub fn scal_exp(m: usize) -> Result<Self> {
        check_dim("scal_exp", m)?;
        let t = Expr::t();
        let mf = m as f64;
        let b = (-1.5 * ((mf - 2.0) * t.clone() + (mf / 3.0) * t.ln())).exp();
        Ok(Self::new("scal_exp", Expr::c(2.0 / 3.0), b, Epsilon::Minus, TDomain::POSITIVE))
    }

    /// `a = k ∈ (0, 2/3)`, `b = c²k²(3k−2)t / (2 + m + 2c²(2−3k)kt²)`.
    pub fn scal_band(k: f64, c: f64, m: usize) -> Result<Self> {
        check_dim("scal_band", m)?;
        if !(k > 0.0 && k < 2.0 / 3.0) {
            return Err(GeometryError::InvalidParameter {
                family: "scal_band".into(),
                reason: "requires 0 < k < 2/3".into(),
            });
        }
        let t = Expr::t();
        let mf = m as f64;
        let b = c * c * k * k * (3.0 * k - 2.0) * t.clone()
            / (2.0 + mf + 2.0 * c * c * (2.0 - 3.0 * k) * k * t.clone() * t);
        Ok(Self::new("scal_band", Expr::c(k), b, Epsilon::Minus, TDomain::NON_NEGATIVE))
    }

    /// `a = 1`, `b = (k(2+m) + c²mt) / (m(2+m) − 2k(2+m)t − 2c²mt²)` for
    /// `t` below the positive root `t₂` of the denominator.
    pub fn scal_t2(k: f64, c: f64, m: usize) -> Result<Self> {
        check_dim("scal_t2", m)?;
        let mf = m as f64;
        let t = Expr::t();
        let denom = mf * (2.0 + mf) - 2.0 * k * (2.0 + mf) * t.clone() - 2.0 * c * c * mf * t.clone() * t.clone();
        let b = (k * (2.0 + mf) + c * c * mf * t) / denom;
        let t2 = scal_t2_root(k, c, m).ok_or_else(|| GeometryError::InvalidParameter {
            family: "scal_t2".into(),
            reason: "denominator has no positive root".into(),
        })?;
        Ok(Self::new("scal_t2", Expr::c(1.0), b, Epsilon::Minus, TDomain::NON_NEGATIVE.below(t2)))
    }

    /// Builds a family from its name and parameter map.
    pub fn named_family(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |key: &str| -> Result<f64> {
            params.get(key).copied().ok_or_else(|| GeometryError::InvalidParameter {
                family: name.to_string(),
                reason: format!("missing parameter `{key}`"),
            })
        };
        let get_or = |key: &str, default: f64| params.get(key).copied().unwrap_or(default);
        let dim = |key: &str| -> Result<usize> {
            let v = get(key)?;
            if v.fract() != 0.0 || v < 1.0 {
                return Err(GeometryError::InvalidParameter {
                    family: name.to_string(),
                    reason: format!("`{key}` must be a positive integer"),
                });
            }
            Ok(v as usize)
        };
        match name {
            "sasaki" => Ok(Self::sasaki()),
            "cheeger_gromoll" => Ok(Self::cheeger_gromoll()),
            "g1" => Ok(Self::g1()),
            "flat_exp" => Self::flat_exp(get_or("a0", 1.0)),
            "flat_power" => Self::flat_power(get_or("a0", 1.0), get("k")?),
            "lck_example" => Self::lck_example(get("c")?, get("k")?),
            "scal_a23" => Ok(Self::scal_a23()),
            "scal_exp" => Self::scal_exp(dim("m")?),
            "scal_band" => Self::scal_band(get("k")?, get("c")?, dim("m")?),
            "scal_t2" => Self::scal_t2(get("k")?, get("c")?, dim("m")?),
            "kahler" => {
                let case = get("case")?;
                if case != 1.0 && case != 2.0 {
                    return Err(GeometryError::InvalidParameter {
                        family: name.into(),
                        reason: "case must be 1 or 2".into(),
                    });
                }
                Self::kahler_family(case as u8, get("c")?, get("kappa")?)
            }
            "constant" => {
                let a = get("a")?;
                let b = get_or("b", 0.0);
                Ok(Self::new("constant", Expr::c(a), Expr::c(b), Epsilon::Minus, TDomain::NON_NEGATIVE))
            }
            other => Err(GeometryError::Unknown {
                kind: "weight family",
                name: other.to_string(),
            }),
        }
    }

    pub fn from_spec(spec: &FamilySpec) -> Result<Self> {
        let mut pair = if spec.name == "custom" {
            let a = spec
                .a
                .as_ref()
                .ok_or_else(|| GeometryError::InvalidSpec("custom weights need `a`".into()))?
                .to_expr();
            let b = spec.b.as_ref().map_or(Expr::c(0.0), ScalarFunctionSpec::to_expr);
            WeightPair::new("custom", a, b, Epsilon::Minus, TDomain::NON_NEGATIVE)
        } else if spec.name == "almost_kahler" {
            let a = spec
                .a
                .as_ref()
                .ok_or_else(|| GeometryError::InvalidSpec("almost_kahler needs `a`".into()))?
                .to_expr();
            let eps = spec.epsilon.map(Epsilon::from_sign).transpose()?.unwrap_or(Epsilon::Minus);
            let domain = if eps == Epsilon::Plus { TDomain::POSITIVE } else { TDomain::NON_NEGATIVE };
            return WeightPair::almost_kahler_complete(a, eps, domain, spec.rule.unwrap_or(CompletionRule::Verified));
        } else {
            WeightPair::named_family(&spec.name, &spec.params)?
        };
        if let Some(e) = spec.epsilon {
            pair = pair.with_epsilon(Epsilon::from_sign(e)?);
        }
        Ok(pair)
    }
}

fn check_dim(family: &str, m: usize) -> Result<()> {
    if m < 2 {
        return Err(GeometryError::InvalidParameter {
            family: family.into(),
            reason: "m must be at least 2".into(),
        });
    }
    Ok(())
}

/// Positive root of `m(2+m) − 2k(2+m)t − 2c²mt² = 0`.
pub fn scal_t2_root(k: f64, c: f64, m: usize) -> Option<f64> {
    let mf = m as f64;
    let qa = -2.0 * c * c * mf;
    let qb = -2.0 * k * (2.0 + mf);
    let qc = mf * (2.0 + mf);
    if qa == 0.0 {
        return if qb < 0.0 { Some(-qc / qb) } else { None };
    }
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let r1 = (-qb + disc.sqrt()) / (2.0 * qa);
    let r2 = (-qb - disc.sqrt()) / (2.0 * qa);
    [r1, r2].into_iter().filter(|r| *r > 0.0).reduce(f64::min)
}

/// Left-hand side of the constant-scalar-curvature ODE for constant `a = k`
/// over a space form; constant in `t` exactly when the scalar curvature is.
pub fn constant_scalar_ode_residual(k: f64, c: f64, m: usize, t: f64, b: f64, db: f64) -> f64 {
    let mf = m as f64;
    let q = c * c * (2.0 - 3.0 * k) * k;
    c * c * (2.0 - 3.0 * k) * k.powi(3) * t
        + b * (k * (mf + 4.0 * q * t * t) + 2.0 * t * (-2.0 + mf + 2.0 * q * t * t) * b)
        + 2.0 * k * t * db
}

/// Declarative weight family: a named family with parameters, or a custom
/// pair of scalar functions.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub a: Option<ScalarFunctionSpec>,
    #[serde(default)]
    pub b: Option<ScalarFunctionSpec>,
    #[serde(default)]
    pub rule: Option<CompletionRule>,
}

/// A function of `t` given by polynomial coefficients (constant term first).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarFunctionSpec {
    /// `Σ c_k t^k`
    Poly(Vec<f64>),
    /// `exp(Σ c_k t^k)`
    ExpPoly(Vec<f64>),
}

impl ScalarFunctionSpec {
    pub fn to_expr(&self) -> Expr {
        let poly = |coeffs: &[f64]| {
            coeffs
                .iter()
                .enumerate()
                .fold(Expr::c(0.0), |acc, (k, &c)| acc + c * Expr::t().powi(k as i32))
        };
        match self {
            ScalarFunctionSpec::Poly(c) => poly(c),
            ScalarFunctionSpec::ExpPoly(c) => poly(c).exp(),
        }
    }
}
