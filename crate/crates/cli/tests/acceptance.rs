//! Acceptance run: one PASS/FAIL line per criterion, at the stated tolerance.
//! Exits non-zero when any criterion fails.

use serde_json::{json, Value};
use tangent_geom::tbundle::TangentBundle;
use tangent_geom::{ChartMetric, FamilySpec, WeightPair};
use tangent_verify::report::CheckReport;
use tangent_verify::sampling::{draw, suite_seed};
use tangent_verify::{run, RunConfig, SamplingSpec, SuiteReport};

struct Line {
    label: &'static str,
    pass: bool,
    detail: String,
}

fn config(base: Value, weights: Value, suites: &[&str], samples: usize, seed: u64, sampling: Option<Value>) -> RunConfig {
    let mut doc = json!({
        "base": base,
        "weights": weights,
        "suites": suites,
        "samples": samples,
        "seed": seed,
        "h": 1e-4,
    });
    if let Some(s) = sampling {
        doc["sampling"] = s;
    }
    serde_json::from_value(doc).expect("acceptance config is well formed")
}

fn suite(base: Value, weights: Value, name: &str, samples: usize, seed: u64, sampling: Option<Value>) -> SuiteReport {
    let cfg = config(base, weights, &[name], samples, seed, sampling)
        .validate()
        .expect("acceptance config validates");
    let mut report = run(&cfg);
    let s = report.suites.remove(0);
    assert!(s.errors.is_empty(), "{name}: {:?}", s.errors);
    s
}

fn check<'a>(s: &'a SuiteReport, name: &str) -> &'a CheckReport {
    s.checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("suite {} has no check {name}", s.suite))
}

fn space_form(m: usize, c: f64) -> Value {
    json!({ "dim": m, "kind": "space_form", "params": { "c": c } })
}

fn euclidean(m: usize) -> Value {
    json!({ "dim": m, "kind": "euclidean" })
}

fn family(name: &str) -> Value {
    json!({ "name": name })
}

fn constant(a: f64) -> Value {
    json!({ "name": "constant", "params": { "a": a, "b": 0.0 } })
}

/// Tracks the worst residual of checks that must stay below a tolerance.
struct AtMost {
    tol: f64,
    worst: f64,
}

impl AtMost {
    fn new(tol: f64) -> Self {
        Self { tol, worst: 0.0 }
    }

    fn see(&mut self, value: f64) {
        self.worst = self.worst.max(value);
    }

    fn pass(&self) -> bool {
        self.worst <= self.tol
    }

    fn text(&self) -> String {
        format!("{:.2e} <= {:.0e}", self.worst, self.tol)
    }
}

fn flat_g1() -> Line {
    let mut worst = AtMost::new(1e-6);
    let sampling = json!({ "box": 0.5, "fiber": [0.05, 6f64.sqrt() - 1e-9] });
    for m in [2, 3] {
        let s = suite(euclidean(m), family("g1"), "flat_g1", 50, 1, Some(sampling.clone()));
        worst.see(check(&s, "closed_form_curvature").max_residual);
        worst.see(check(&s, "oracle_curvature").max_residual);
    }
    Line {
        label: "g1 over a Euclidean base is flat (closed form and oracle)",
        pass: worst.pass(),
        detail: worst.text(),
    }
}

fn scalar_at(bundle: &TangentBundle, t: f64) -> f64 {
    let m = bundle.dim();
    let mut u = vec![0.0; m];
    u[0] = (2.0 * t).sqrt();
    bundle.at(&vec![0.0; m], &u).unwrap().scalar_basis_sum().unwrap()
}

fn sasaki_rigidity() -> Line {
    let mut flat = AtMost::new(1e-8);
    let s = suite(euclidean(2), family("sasaki"), "flat_g1", 20, 2, None);
    flat.see(check(&s, "closed_form_curvature").max_residual);
    let bundle = TangentBundle::new(ChartMetric::space_form(2, 1.0), WeightPair::sasaki());
    let (s1, s2) = (scalar_at(&bundle, 0.1), scalar_at(&bundle, 1.0));
    let gap = (s1 - s2).abs();
    Line {
        label: "Sasaki: flat over Euclidean, non-constant scalar over the unit sphere",
        pass: flat.pass() && gap >= 0.05,
        detail: format!("R {}; |scal(0.1) - scal(1.0)| = {gap:.3} >= 0.05", flat.text()),
    }
}

fn lck_identity() -> Line {
    let mut worst = AtMost::new(1e-5);
    let families = [
        family("cheeger_gromoll"),
        json!({ "name": "custom", "a": { "poly": [1.0, 0.5] }, "b": { "poly": [0.2, 0.1] } }),
        json!({ "name": "custom", "a": { "exp_poly": [0.0, 0.3] }, "b": { "poly": [0.1, 0.0, 0.05] } }),
    ];
    for (i, w) in families.iter().enumerate() {
        for c in [1.0, -1.0] {
            let s = suite(space_form(2, c), w.clone(), "lck", 5, 10 + i as u64, None);
            worst.see(check(&s, "d_omega_minus_lee_wedge_omega").max_residual);
            worst.see(check(&s, "lee_form_closed").max_residual);
        }
    }
    Line {
        label: "locally conformal almost Kähler identity and closed Lee form",
        pass: worst.pass(),
        detail: worst.text(),
    }
}

fn almost_kahler() -> Line {
    let weights = json!({ "name": "almost_kahler", "a": { "poly": [1.0, 1.0] }, "rule": "stated" });
    let s = suite(space_form(2, 1.0), weights, "almost_kahler", 10, 3, None);
    let d = check(&s, "d_omega");
    let control = check(&s, "cheeger_gromoll_control");
    Line {
        label: "a = 1 + t with the completing b is almost Kähler; Cheeger-Gromoll is not",
        pass: d.max_residual <= 1e-5 && control.min_residual >= 1e-2,
        detail: format!(
            "dΩ {:.2e} <= 1e-5; control dΩ {:.2e} >= 1e-2",
            d.max_residual, control.min_residual
        ),
    }
}

fn kahler() -> Line {
    let weights = json!({ "name": "kahler", "params": { "case": 2.0, "c": -1.0, "kappa": 2.0 } });
    let s = suite(space_form(2, -1.0), weights, "kahler", 20, 4, None);
    let n = check(&s, "nijenhuis").max_residual;
    let d = check(&s, "d_omega").max_residual;
    let w = check(&s, "weight_system").max_residual;
    Line {
        label: "second Kähler family over the hyperbolic plane",
        pass: n <= 1e-5 && d <= 1e-5 && w <= 1e-10,
        detail: format!("N {n:.2e} <= 1e-5; dΩ {d:.2e} <= 1e-5; weight ODEs {w:.2e} <= 1e-10"),
    }
}

fn connection_curvature() -> Line {
    let c = suite(space_form(2, 1.0), family("cheeger_gromoll"), "connection", 20, 5, None);
    let r = suite(space_form(2, 1.0), family("cheeger_gromoll"), "curvature", 20, 6, None);
    let conn = check(&c, "connection_vs_oracle").max_residual;
    let curv = check(&r, "curvature_vs_oracle").max_residual;
    let sym = check(&r, "symmetries_and_bianchi").max_residual;
    Line {
        label: "Cheeger-Gromoll connection and curvature against the oracle",
        pass: conn <= 1e-5 && curv <= 1e-4 && sym <= 1e-8,
        detail: format!("connection {conn:.2e} <= 1e-5; curvature {curv:.2e} <= 1e-4; symmetries {sym:.2e} <= 1e-8"),
    }
}

/// Relative spread and offset from `m(m-1)c` of the scalar curvature over
/// 20 sampled points with `t` in `(0.05, 2)`.
fn scalar_constancy(spec: Value, c: f64, m: usize, seed: u64) -> (f64, f64) {
    let spec: FamilySpec = serde_json::from_value(spec).unwrap();
    let weights = WeightPair::from_spec(&spec).unwrap();
    let base = ChartMetric::space_form(m, c);
    let sampling = SamplingSpec {
        half_width: 0.5,
        fiber: [0.1f64.sqrt(), 2.0],
    };
    let samples = draw(20, suite_seed(seed, "scalar"), &sampling, &base, &weights).unwrap();
    let bundle = TangentBundle::new(base, weights);
    let values: Vec<f64> = samples
        .iter()
        .map(|s| bundle.at(&s.x, &s.u).unwrap().scalar_basis_sum().unwrap())
        .collect();
    let target = (m * (m - 1)) as f64 * c;
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = values.iter().map(|v| (v - target).abs()).fold(0.0, f64::max);
    ((max - min) / target.abs(), offset / target.abs())
}

fn scalar_constant() -> Line {
    let mut worst = AtMost::new(1e-6);
    let mut parts = Vec::new();
    for (name, make) in [
        ("a = 2/3", Box::new(|_: f64, _: usize| json!({ "name": "scal_a23" })) as Box<dyn Fn(f64, usize) -> Value>),
        ("a = k = 1/2 family", Box::new(|c, m| json!({ "name": "scal_band", "params": { "k": 0.5, "c": c, "m": m as f64 } }))),
    ] {
        let mut family_worst: f64 = 0.0;
        for c in [-1.0, 1.0] {
            for m in [2, 3] {
                let (spread, offset) = scalar_constancy(make(c, m), c, m, 7);
                family_worst = family_worst.max(spread).max(offset);
            }
        }
        worst.see(family_worst);
        parts.push(format!("{name} {family_worst:.2e}"));
    }
    Line {
        label: "constant scalar curvature m(m-1)c for a = 2/3, b = 0 and the a = k family",
        pass: worst.pass(),
        detail: format!("{} (worst relative deviation <= 1e-6)", parts.join(", ")),
    }
}

fn scalar_closed_form() -> Line {
    let mut worst = AtMost::new(1e-6);
    let mut parts = Vec::new();
    for name in ["cheeger_gromoll", "sasaki"] {
        let s = suite(space_form(2, 1.0), family(name), "scalar", 20, 8, None);
        let r = check(&s, "published_closed_form").max_residual;
        worst.see(r);
        parts.push(format!("{name} {r:.2e}"));
    }
    Line {
        label: "scalar curvature closed form equals the adapted-basis sum",
        pass: worst.pass(),
        detail: format!("{} (relative, <= 1e-6)", parts.join(", ")),
    }
}

fn isometry() -> Line {
    let mut worst = AtMost::new(1e-10);
    let mut control = f64::INFINITY;
    for base in [euclidean(2), space_form(2, 1.0)] {
        let s = suite(base, constant(4.0), "isometry", 10, 9, None);
        worst.see(check(&s, "radius_sqrt_a").max_residual);
        control = control.min(check(&s, "radius_one_control").min_residual);
    }
    Line {
        label: "a = 4: radial map onto the radius-2 sphere bundle is a phi-isometry; radius 1 is not",
        pass: worst.pass() && control >= 0.1,
        detail: format!("{}; r = 1 residual {control:.2e} >= 0.1", worst.text()),
    }
}

fn k_contact() -> Line {
    let mut holds = AtMost::new(1e-8);
    let s = suite(space_form(2, 1.0), constant(1.0), "k_contact", 30, 11, None);
    holds.see(check(&s, "k_contact").max_residual);
    holds.see(check(&s, "sasakian").max_residual);
    let mut fails = f64::INFINITY;
    for (base, a) in [(space_form(2, 1.0), 2.0), (euclidean(2), 1.0)] {
        let s = suite(base, constant(a), "k_contact", 30, 12, None);
        fails = fails
            .min(check(&s, "k_contact_fails").min_residual)
            .min(check(&s, "sasakian_fails").min_residual);
    }
    Line {
        label: "unit sphere bundle is K-contact and Sasakian exactly when c = 1/a",
        pass: holds.pass() && fails >= 1e-2,
        detail: format!("c = 1/a {}; otherwise {fails:.2e} >= 1e-2", holds.text()),
    }
}

fn space_form_sectional() -> Line {
    let mut displays = AtMost::new(1e-8);
    let mut negative = AtMost::new(1e-12);
    for (base, w) in [
        (space_form(2, 1.0), family("cheeger_gromoll")),
        (space_form(3, 1.0), family("sasaki")),
        (space_form(3, -1.0), json!({ "name": "lck_example", "params": { "c": 1.0, "k": 0.5 } })),
    ] {
        let s = suite(base, w, "sectional", 20, 13, None);
        displays.see(check(&s, "space_form_displays").max_residual);
        displays.see(check(&s, "horizontal_radial_vanishes").max_residual);
        negative.see(check(&s, "hv_nonnegative").max_residual);
    }
    Line {
        label: "space-form sectional displays; mixed sectional curvature non-negative",
        pass: displays.pass() && negative.pass(),
        detail: format!("displays {}; -K(X^H,Y^V) {}", displays.text(), negative.text()),
    }
}

fn determinism() -> Line {
    let make = || {
        config(
            space_form(2, 1.0),
            family("cheeger_gromoll"),
            &["connection", "curvature", "lck", "sphere_bundle", "oracle_cross"],
            12,
            42,
            None,
        )
        .validate()
        .unwrap()
    };
    let (r1, r2) = (run(&make()).without_timing(), run(&make()).without_timing());
    let json_equal = r1.to_json().unwrap() == r2.to_json().unwrap();
    let mut c1 = Vec::new();
    let mut c2 = Vec::new();
    r1.write_csv(&mut c1).unwrap();
    r2.write_csv(&mut c2).unwrap();
    Line {
        label: "identical config and seed reproduce the report bit for bit",
        pass: json_equal && c1 == c2,
        detail: format!("json identical: {json_equal}; csv identical: {}", c1 == c2),
    }
}

fn main() {
    let criteria: [fn() -> Line; 12] = [
        flat_g1,
        sasaki_rigidity,
        lck_identity,
        almost_kahler,
        kahler,
        connection_curvature,
        scalar_constant,
        scalar_closed_form,
        isometry,
        k_contact,
        space_form_sectional,
        determinism,
    ];
    let mut failed = 0;
    for (i, criterion) in criteria.iter().enumerate() {
        let line = criterion();
        let verdict = if line.pass { "PASS" } else { "FAIL" };
        if !line.pass {
            failed += 1;
        }
        println!("[{verdict}] {:>2}. {}: {}", i + 1, line.label, line.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
