use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use tangent_geom::oracle::{fd_exterior_derivative, InducedMetric};
use tangent_geom::sphere::{isometry_check, GeneratorPair, SphereBundle};
use tangent_geom::tbundle::{BundlePoint, PairCase, SplitVector, TangentBundle};
use tangent_geom::vecops::{max_abs, sub, unit};
use tangent_geom::base::MetricKind;
use tangent_geom::{ChartMetric, LocalGeometry, Result, WeightPair};

use crate::sampling::{random_vector, Sample};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteId {
    BaseChecks,
    Lck,
    AlmostKahler,
    Kahler,
    Connection,
    Curvature,
    FlatG1,
    Sectional,
    Scalar,
    SphereBundle,
    Isometry,
    KContact,
    OracleCross,
}

impl SuiteId {
    pub const ALL: [SuiteId; 13] = [
        SuiteId::BaseChecks,
        SuiteId::Lck,
        SuiteId::AlmostKahler,
        SuiteId::Kahler,
        SuiteId::Connection,
        SuiteId::Curvature,
        SuiteId::FlatG1,
        SuiteId::Sectional,
        SuiteId::Scalar,
        SuiteId::SphereBundle,
        SuiteId::Isometry,
        SuiteId::KContact,
        SuiteId::OracleCross,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteId::BaseChecks => "base_checks",
            SuiteId::Lck => "lck",
            SuiteId::AlmostKahler => "almost_kahler",
            SuiteId::Kahler => "kahler",
            SuiteId::Connection => "connection",
            SuiteId::Curvature => "curvature",
            SuiteId::FlatG1 => "flat_g1",
            SuiteId::Sectional => "sectional",
            SuiteId::Scalar => "scalar",
            SuiteId::SphereBundle => "sphere_bundle",
            SuiteId::Isometry => "isometry",
            SuiteId::KContact => "k_contact",
            SuiteId::OracleCross => "oracle_cross",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// What the suite checks, in one line.
    pub fn anchor(self) -> &'static str {
        match self {
            SuiteId::BaseChecks => "base metric: Christoffel symbols, curvature symmetries, space-form curvature",
            SuiteId::Lck => "locally conformal almost Kähler: dΩ = ω∧Ω with a closed Lee form",
            SuiteId::AlmostKahler => "almost Kähler weights close Ω; Cheeger-Gromoll never does",
            SuiteId::Kahler => "Kähler families: vanishing Nijenhuis tensor and closed Kähler form",
            SuiteId::Connection => "Levi-Civita connection of g_A in the horizontal/vertical splitting",
            SuiteId::Curvature => "Riemann curvature of g_A and its algebraic symmetries",
            SuiteId::FlatG1 => "flatness of (T(M), g1) over a flat base",
            SuiteId::Sectional => "sectional curvature displays and the adapted-frame table",
            SuiteId::Scalar => "scalar curvature closed forms against the adapted-basis sum",
            SuiteId::SphereBundle => "contact metric structure on the unit tangent sphere bundle",
            SuiteId::Isometry => "radial map T1M -> TrM is a phi-equivariant isometry iff r = sqrt(a)",
            SuiteId::KContact => "unit tangent sphere bundle is K-contact iff the base has curvature 1/a",
            SuiteId::OracleCross => "closed forms against the coordinate finite-difference oracle",
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            SuiteId::BaseChecks => 1e-6,
            SuiteId::Lck | SuiteId::AlmostKahler | SuiteId::Kahler | SuiteId::Connection => 1e-5,
            SuiteId::Curvature | SuiteId::OracleCross | SuiteId::SphereBundle => 1e-4,
            SuiteId::FlatG1 | SuiteId::Scalar => 1e-6,
            SuiteId::Sectional | SuiteId::KContact => 1e-8,
            SuiteId::Isometry => 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Passes when every residual is at most the tolerance.
    AtMost,
    /// Negative control: passes when every residual is at least the threshold.
    AtLeast,
}

impl Direction {
    pub fn passes(self, residual: f64, tolerance: f64) -> bool {
        match self {
            Direction::AtMost => residual <= tolerance,
            Direction::AtLeast => residual >= tolerance,
        }
    }
}

/// One residual produced by one check at one sample point.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub check: &'static str,
    pub direction: Direction,
    pub tolerance: f64,
    pub residual: f64,
}

/// Fixed tolerances of secondary checks; the suite tolerance only governs
/// the primary ones.
const EXACT: f64 = 1e-10;
const ALGEBRAIC: f64 = 1e-8;
const ORACLE: f64 = 1e-4;
const CONTROL: f64 = 1e-2;
const ISOMETRY_CONTROL: f64 = 0.1;

/// Geometry shared by all samples of one suite.
pub struct SuiteContext {
    pub base: ChartMetric,
    pub weights: WeightPair,
    pub bundle: TangentBundle,
    pub oracle: InducedMetric,
    pub h: f64,
    pub tolerance: f64,
}

impl SuiteContext {
    pub fn new(base: ChartMetric, weights: WeightPair, h: f64, tolerance: f64) -> Self {
        let bundle = TangentBundle::new(base.clone(), weights.clone());
        let oracle = InducedMetric::from_bundle(&bundle);
        Self {
            base,
            weights,
            bundle,
            oracle,
            h,
            tolerance,
        }
    }

    fn space_form_curvature(&self) -> Option<f64> {
        self.base.space_form_curvature()
    }
}

struct Recorder {
    tolerance: f64,
    out: Vec<Measurement>,
}

impl Recorder {
    fn new(tolerance: f64) -> Self {
        Self {
            tolerance,
            out: Vec::new(),
        }
    }

    fn primary(&mut self, check: &'static str, residual: f64) {
        self.push(check, Direction::AtMost, self.tolerance, residual);
    }

    fn push(&mut self, check: &'static str, direction: Direction, tolerance: f64, residual: f64) {
        self.out.push(Measurement {
            check,
            direction,
            tolerance,
            residual,
        });
    }
}

pub fn evaluate(id: SuiteId, ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng) -> Result<Vec<Measurement>> {
    let mut rec = Recorder::new(ctx.tolerance);
    match id {
        SuiteId::BaseChecks => base_checks(ctx, s, rng, &mut rec)?,
        SuiteId::Lck => lck(ctx, s, rng, &mut rec)?,
        SuiteId::AlmostKahler => almost_kahler(ctx, s, &mut rec)?,
        SuiteId::Kahler => kahler(ctx, s, &mut rec)?,
        SuiteId::Connection => {
            let r = connection_residual(ctx, s, rng)?;
            rec.primary("connection_vs_oracle", r);
        }
        SuiteId::Curvature => curvature(ctx, s, rng, &mut rec)?,
        SuiteId::FlatG1 => flat_g1(ctx, s, &mut rec)?,
        SuiteId::Sectional => sectional(ctx, s, rng, &mut rec)?,
        SuiteId::Scalar => scalar(ctx, s, &mut rec)?,
        SuiteId::SphereBundle => sphere_bundle(ctx, s, rng, &mut rec)?,
        SuiteId::Isometry => isometry(ctx, s, &mut rec)?,
        SuiteId::KContact => k_contact(ctx, s, rng, &mut rec)?,
        SuiteId::OracleCross => oracle_cross(ctx, s, rng, &mut rec)?,
    }
    Ok(rec.out)
}

fn z_of(s: &Sample) -> Vec<f64> {
    let mut z = s.x.clone();
    z.extend_from_slice(&s.u);
    z
}

fn coordinate_basis(n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|k| unit(n, k)).collect()
}

fn relative(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(1.0)
}

fn diff(a: &SplitVector, b: &SplitVector) -> f64 {
    max_abs(&sub(&a.to_vec(), &b.to_vec()))
}

fn random_split(p: &BundlePoint, rng: &mut ChaCha8Rng) -> Result<SplitVector> {
    let m = p.dim();
    p.split(&random_vector(rng, m), &random_vector(rng, m))
}

fn base_curvature_symmetries(local: &LocalGeometry, v: &[Vec<f64>]) -> f64 {
    let r = |a: &[f64], b: &[f64], c: &[f64]| local.r(a, b, c);
    let (x, y, z, w) = (&v[0], &v[1], &v[2], &v[3]);
    let skew = max_abs(&tangent_geom::vecops::add(&r(x, y, z), &r(y, x, z)));
    let metric_skew = (local.inner(&r(x, y, z), w) + local.inner(&r(x, y, w), z)).abs();
    let pair = (local.inner(&r(x, y, z), w) - local.inner(&r(z, w, x), y)).abs();
    let bianchi = {
        let s = tangent_geom::vecops::add(&r(x, y, z), &r(y, z, x));
        max_abs(&tangent_geom::vecops::add(&s, &r(z, x, y)))
    };
    skew.max(metric_skew).max(pair).max(bianchi)
}

fn base_checks(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Result<()> {
    let m = ctx.base.dim();
    let local = ctx.base.local(&s.x)?;
    let fd_jet = ctx.base.jet_finite_difference(&s.x, ctx.h, 1e-3)?;
    let fd = LocalGeometry::from_jet(&s.x, &fd_jet)?;
    let gamma = local
        .gamma
        .data
        .iter()
        .zip(&fd.gamma.data)
        .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
    rec.primary("christoffel_vs_finite_difference", gamma);
    let v: Vec<Vec<f64>> = (0..4).map(|_| random_vector(rng, m)).collect();
    rec.push("curvature_symmetries", Direction::AtMost, EXACT, base_curvature_symmetries(&local, &v));
    if let Some(c) = ctx.space_form_curvature() {
        let (x, y, z) = (&v[0], &v[1], &v[2]);
        let mut expected = tangent_geom::vecops::scale(c * local.inner(y, z), x);
        tangent_geom::vecops::axpy(&mut expected, -c * local.inner(x, z), y);
        rec.push("space_form_identity", Direction::AtMost, EXACT, max_abs(&sub(&local.r(x, y, z), &expected)));
    }
    Ok(())
}

/// Largest `|dΩ|` over coordinate basis triples.
fn d_kahler_max(oracle: &InducedMetric, z: &[f64], h: f64) -> Result<f64> {
    let basis = coordinate_basis(z.len());
    let mut worst: f64 = 0.0;
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            for k in j + 1..basis.len() {
                let d = oracle.d_kahler_form(z, [&basis[i], &basis[j], &basis[k]], h)?;
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(worst)
}

fn lee_at(bundle: &TangentBundle, z: &[f64], v: &[f64]) -> Result<f64> {
    let m = bundle.dim();
    let p = bundle.at(&z[..m], &z[m..])?;
    p.lee_form(&p.from_coordinates(v)?)
}

fn lck(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Result<()> {
    let z = z_of(s);
    let n = z.len();
    let p = ctx.bundle.at(&s.x, &s.u)?;
    let vs: Vec<Vec<f64>> = (0..3).map(|_| random_vector(rng, n)).collect();
    let d = ctx.oracle.d_kahler_form(&z, [&vs[0], &vs[1], &vs[2]], ctx.h)?;
    let lee: Vec<f64> = vs
        .iter()
        .map(|v| p.lee_form(&p.from_coordinates(v)?))
        .collect::<Result<_>>()?;
    let omega = |a: usize, b: usize| ctx.oracle.kahler_form(&z, &vs[a], &vs[b]);
    let wedge = (lee[0] * omega(1, 2)? + lee[1] * omega(2, 0)? + lee[2] * omega(0, 1)?) / 3.0;
    rec.primary("d_omega_minus_lee_wedge_omega", (d - wedge).abs());
    let dw = fd_exterior_derivative(
        |q, rest| lee_at(&ctx.bundle, q, &rest[0]),
        &z,
        &vs[..2],
        ctx.h,
    )?;
    rec.primary("lee_form_closed", dw.abs());
    Ok(())
}

fn almost_kahler(ctx: &SuiteContext, s: &Sample, rec: &mut Recorder) -> Result<()> {
    let z = z_of(s);
    rec.primary("d_omega", d_kahler_max(&ctx.oracle, &z, ctx.h)?);
    let cg = InducedMetric::induce(ctx.base.clone(), WeightPair::cheeger_gromoll());
    rec.push("cheeger_gromoll_control", Direction::AtLeast, CONTROL, d_kahler_max(&cg, &z, ctx.h)?);
    Ok(())
}

fn kahler(ctx: &SuiteContext, s: &Sample, rec: &mut Recorder) -> Result<()> {
    let z = z_of(s);
    let basis = coordinate_basis(z.len());
    let mut nij: f64 = 0.0;
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            nij = nij.max(max_abs(&ctx.oracle.fd_nijenhuis(&z, &basis[i], &basis[j], ctx.h)?));
        }
    }
    rec.primary("nijenhuis", nij);
    rec.primary("d_omega", d_kahler_max(&ctx.oracle, &z, ctx.h)?);
    if let Some(c) = ctx.space_form_curvature() {
        let p = ctx.bundle.at(&s.x, &s.u)?;
        let (r1, r2) = ctx.weights.kahler_residuals(p.t(), c)?;
        rec.push("weight_system", Direction::AtMost, EXACT, r1.abs().max(r2.abs()));
    }
    Ok(())
}

fn connection_residual(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng) -> Result<f64> {
    let m = ctx.base.dim();
    let z = z_of(s);
    let p = ctx.bundle.at(&s.x, &s.u)?;
    let dir = random_split(&p, rng)?;
    let (wh, wv) = (random_vector(rng, m), random_vector(rng, m));
    let field = p.split(&wh, &wv)?;
    let closed = p.to_coordinates(&p.connection(&dir, &field)?)?;
    let oracle = ctx
        .oracle
        .covariant_derivative(&z, &p.to_coordinates(&dir)?, ctx.oracle.lift_field(&wh, &wv), ctx.h)?;
    Ok(max_abs(&sub(&closed, &oracle)))
}

fn curvature_oracle_residual(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng) -> Result<f64> {
    let z = z_of(s);
    let p = ctx.bundle.at(&s.x, &s.u)?;
    let vs: Vec<SplitVector> = (0..3).map(|_| random_split(&p, rng)).collect::<Result<_>>()?;
    let closed = p.to_coordinates(&p.curvature(&vs[0], &vs[1], &vs[2])?)?;
    let rc = ctx.oracle.fd_curvature(&z, ctx.h)?;
    let oracle = rc.apply(
        &p.to_coordinates(&vs[0])?,
        &p.to_coordinates(&vs[1])?,
        &p.to_coordinates(&vs[2])?,
    );
    Ok(max_abs(&sub(&closed, &oracle)))
}

/// Antisymmetry, metric skew-symmetry, pair symmetry and first Bianchi
/// identity of the closed-form curvature.
pub fn curvature_symmetry_residual(p: &BundlePoint, v: &[SplitVector]) -> Result<f64> {
    let r = |a: &SplitVector, b: &SplitVector, c: &SplitVector| p.curvature(a, b, c);
    let (x, y, z, w) = (&v[0], &v[1], &v[2], &v[3]);
    let rxyz = r(x, y, z)?;
    let skew = rxyz.checked_add(&r(y, x, z)?)?.max_abs();
    let metric_skew = (p.metric(&rxyz, w)? + p.metric(&r(x, y, w)?, z)?).abs();
    let pair = (p.metric(&rxyz, w)? - p.metric(&r(z, w, x)?, y)?).abs();
    let bianchi = rxyz.checked_add(&r(y, z, x)?)?.checked_add(&r(z, x, y)?)?.max_abs();
    Ok(skew.max(metric_skew).max(pair).max(bianchi))
}

fn curvature(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Result<()> {
    rec.primary("curvature_vs_oracle", curvature_oracle_residual(ctx, s, rng)?);
    let p = ctx.bundle.at(&s.x, &s.u)?;
    let vs: Vec<SplitVector> = (0..4).map(|_| random_split(&p, rng)).collect::<Result<_>>()?;
    rec.push("symmetries_and_bianchi", Direction::AtMost, ALGEBRAIC, curvature_symmetry_residual(&p, &vs)?);
    Ok(())
}

/// Max-norm of the closed-form curvature tensor in bundle coordinates.
pub fn closed_form_curvature_norm(p: &BundlePoint) -> Result<f64> {
    let basis: Vec<SplitVector> = coordinate_basis(2 * p.dim())
        .iter()
        .map(|e| p.from_coordinates(e))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for a in &basis {
        for b in &basis {
            for c in &basis {
                worst = worst.max(max_abs(&p.to_coordinates(&p.curvature(a, b, c)?)?));
            }
        }
    }
    Ok(worst)
}

fn flat_g1(ctx: &SuiteContext, s: &Sample, rec: &mut Recorder) -> Result<()> {
    let p = ctx.bundle.at(&s.x, &s.u)?;
    rec.primary("closed_form_curvature", closed_form_curvature_norm(&p)?);
    rec.primary("oracle_curvature", ctx.oracle.fd_curvature(&z_of(s), ctx.h)?.max_abs());
    Ok(())
}

fn sectional(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Result<()> {
    let m = ctx.base.dim();
    let p = ctx.bundle.at(&s.x, &s.u)?;
    let frame = p.local().orthonormal_frame_from(&random_vector(rng, m))?;
    let (ex, ey) = (&frame[0], &frame[1]);
    let mut display: f64 = 0.0;
    let mut space_form: f64 = 0.0;
    let mut hv_negative: f64 = 0.0;
    for case in [PairCase::Hh, PairCase::Hv, PairCase::Vv] {
        let (a, b) = match case {
            PairCase::Hh => (p.horizontal(ex)?, p.horizontal(ey)?),
            PairCase::Hv => (p.horizontal(ex)?, p.vertical(ey)?),
            PairCase::Vv => (p.vertical(ex)?, p.vertical(ey)?),
        };
        let k = p.sectional(&a, &b)?;
        display = display.max((k - p.sectional_display(case, ex, ey)?).abs());
        if let Some(c) = ctx.space_form_curvature() {
            if let Some(d) = p.sectional_space_form_display(case, c, ex, ey) {
                space_form = space_form.max((k - d).abs());
            }
            if case == PairCase::Hv {
                hv_negative = hv_negative.max(-k);
            }
        }
    }
    rec.primary("displays_vs_definition", display);
    let basis = p.adapted_basis()?;
    let (mut table, mut published): (f64, f64) = (0.0, 0.0);
    for i in 0..2 * m {
        for j in i + 1..2 * m {
            let k = p.sectional(&basis[i], &basis[j])?;
            table = table.max((k - p.adapted_sectional(i, j)?).abs());
            published = published.max((k - p.adapted_sectional_stated(i, j)?).abs());
        }
    }
    rec.primary("adapted_table", table);
    rec.primary("adapted_table_published", published);
    if ctx.space_form_curvature().is_some() {
        rec.primary("space_form_displays", space_form);
        let mut radial: f64 = 0.0;
        for i in 0..m {
            radial = radial.max(p.sectional(&basis[i], &basis[m])?.abs());
        }
        rec.primary("horizontal_radial_vanishes", radial);
        rec.push("hv_nonnegative", Direction::AtMost, 1e-12, hv_negative.max(0.0));
    }
    Ok(())
}

fn scalar(ctx: &SuiteContext, s: &Sample, rec: &mut Recorder) -> Result<()> {
    let p = ctx.bundle.at(&s.x, &s.u)?;
    let sum = p.scalar_basis_sum()?;
    rec.primary("closed_form", relative(p.scalar_closed_form()?, sum));
    rec.primary("published_closed_form", relative(p.scalar_stated()?, sum));
    if let Some(c) = ctx.space_form_curvature() {
        rec.primary("space_form", relative(p.scalar_space_form(c), sum));
        rec.primary("published_space_form", relative(p.scalar_space_form_stated(c), sum));
        if ctx.weights.name().starts_with("scal_") {
            let m = ctx.base.dim() as f64;
            rec.primary("constant_value", relative(sum, m * (m - 1.0) * c));
        }
    }
    let oracle = ctx.oracle.oracle_scalar(&z_of(s), ctx.h)?;
    rec.push("basis_sum_vs_oracle", Direction::AtMost, ORACLE, relative(sum, oracle));
    Ok(())
}

fn unit_sphere(ctx: &SuiteContext) -> Result<SphereBundle> {
    SphereBundle::unit(ctx.base.clone(), ctx.weights.clone())
}

fn sphere_tangents(frame: &tangent_geom::sphere::SphereFrame, m: usize, rng: &mut ChaCha8Rng, n: usize) -> Result<Vec<SplitVector>> {
    (0..n)
        .map(|_| frame.tangent(&random_vector(rng, m), &random_vector(rng, m)))
        .collect()
}

fn sphere_bundle(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Result<()> {
    let m = ctx.base.dim();
    let sb = unit_sphere(ctx)?;
    let frame = sb.at(&sb.project(&s.x, &s.u)?)?;
    let gens = frame.generators()?;
    let disp = frame.induced_metric_display();
    let mut metric: f64 = 0.0;
    for (i, a) in gens.iter().enumerate() {
        for (j, b) in gens.iter().enumerate() {
            metric = metric.max((frame.induced_metric(a, b)? - disp[(i, j)]).abs());
        }
    }
    rec.push("induced_metric_display", Direction::AtMost, EXACT, metric);
    let ts = sphere_tangents(&frame, m, rng, 4)?;
    let mut identities: f64 = 0.0;
    for rescaled in [false, true] {
        identities = identities.max(frame.contact_structure(rescaled)?.identity_residual(&ts));
    }
    rec.push("almost_contact_identities", Direction::AtMost, EXACT, identities);
    rec.primary("contact_metric", frame.contact_metric_residual(&ts, true, ctx.h)?);
    let mut connection: f64 = 0.0;
    for case in GeneratorPair::ALL {
        let (dir_h, field_h) = match case {
            GeneratorPair::DeltaDelta => (true, true),
            GeneratorPair::YDelta => (false, true),
            GeneratorPair::DeltaY => (true, false),
            GeneratorPair::YY => (false, false),
        };
        for i in 0..m {
            for j in 0..m {
                let dir = &gens[if dir_h { i } else { m + i }];
                let field = frame.generator_field(field_h, j);
                let closed = frame.t1_connection(case, i, j)?;
                let oracle = frame.hypersurface_oracle(dir, &*field, ctx.h)?;
                connection = connection.max(diff(&closed, &oracle));
            }
        }
    }
    rec.primary("connection_displays", connection);
    Ok(())
}

fn isometry(ctx: &SuiteContext, s: &Sample, rec: &mut Recorder) -> Result<()> {
    let unit_bundle = unit_sphere(ctx)?;
    let root_a = unit_bundle.a().sqrt();
    let target = SphereBundle::tangent_sphere(ctx.base.clone(), root_a)?;
    rec.primary("radius_sqrt_a", isometry_check(&unit_bundle, &target, &s.x, &s.u)?.max());
    if (root_a - 1.0).abs() > 0.05 {
        let wrong = SphereBundle::tangent_sphere(ctx.base.clone(), 1.0)?;
        let res = isometry_check(&unit_bundle, &wrong, &s.x, &s.u)?;
        rec.push("radius_one_control", Direction::AtLeast, ISOMETRY_CONTROL, res.metric);
    }
    Ok(())
}

/// Whether the unit tangent sphere bundle should be K-contact: the base is
/// a space form of curvature exactly `1/a`.
pub fn k_contact_predicted(base: &ChartMetric, a: f64) -> bool {
    match base.kind() {
        MetricKind::SpaceForm { curvature } => (curvature * a - 1.0).abs() < 1e-12,
        _ => false,
    }
}

fn k_contact(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Result<()> {
    let m = ctx.base.dim();
    let sb = unit_sphere(ctx)?;
    let frame = sb.at(&sb.project(&s.x, &s.u)?)?;
    let ts = sphere_tangents(&frame, m, rng, 4)?;
    let k = frame.k_contact_residual(&ts, ctx.h)?;
    let sasakian = frame.sasakian_residual(&ts, ctx.h)?;
    if k_contact_predicted(&ctx.base, sb.a()) {
        rec.primary("k_contact", k);
        rec.primary("sasakian", sasakian);
    } else {
        rec.push("k_contact_fails", Direction::AtLeast, CONTROL, k);
        rec.push("sasakian_fails", Direction::AtLeast, CONTROL, sasakian);
    }
    Ok(())
}

fn oracle_cross(ctx: &SuiteContext, s: &Sample, rng: &mut ChaCha8Rng, rec: &mut Recorder) -> Result<()> {
    let m = ctx.base.dim();
    let z = z_of(s);
    rec.primary("connection", connection_residual(ctx, s, rng)?);
    rec.primary("curvature", curvature_oracle_residual(ctx, s, rng)?);
    let p = ctx.bundle.at(&s.x, &s.u)?;
    let (a, b) = (random_vector(rng, m), random_vector(rng, m));
    let hh = ctx.oracle.fd_nijenhuis(&z, &p.to_coordinates(&p.horizontal(&a)?)?, &p.to_coordinates(&p.horizontal(&b)?)?, ctx.h)?;
    let vv = ctx.oracle.fd_nijenhuis(&z, &p.to_coordinates(&p.vertical(&a)?)?, &p.to_coordinates(&p.vertical(&b)?)?, ctx.h)?;
    let nij = max_abs(&sub(&hh, &p.to_coordinates(&p.nijenhuis_hh(&a, &b)?)?))
        .max(max_abs(&sub(&vv, &p.to_coordinates(&p.nijenhuis_vv(&a, &b)?)?)));
    rec.primary("nijenhuis", nij);
    let (fit, _) = ctx.oracle.lee_fit(&z, ctx.h)?;
    let mut lee: f64 = 0.0;
    for (k, e) in coordinate_basis(2 * m).iter().enumerate() {
        lee = lee.max((p.lee_form(&p.from_coordinates(e)?)? - fit[k]).abs());
    }
    rec.primary("lee_form", lee);
    Ok(())
}
