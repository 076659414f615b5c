mod common;

use std::collections::BTreeMap;

use common::{concat, max_abs, max_abs_diff, rng, vector};
use tangent_geom::base::{Monomial, Polynomial};
use tangent_geom::oracle::{InducedMetric, DEFAULT_STEP};
use tangent_geom::tbundle::TangentBundle;
use tangent_geom::{ChartMetric, WeightPair};

fn warped_plane() -> ChartMetric {
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
fn curvature_gradient_matches_finite_difference() {
    let g = warped_plane();
    let x = [0.2, 0.0];
    let m = 2;
    let local = g.local(&x).unwrap();
    let h = 1e-4;
    let mut worst: f64 = 0.0;
    for l in 0..m {
        let mut xp = x.to_vec();
        let mut xn = x.to_vec();
        xp[l] += h;
        xn[l] -= h;
        let (rp, rn) = (g.curvature(&xp).unwrap(), g.curvature(&xn).unwrap());
        let r = &local.riemann;
        let gamma = &local.gamma;
        for a in 0..m {
            for k in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        let mut v = (rp.get(a, k, i, j) - rn.get(a, k, i, j)) / (2.0 * h);
                        for p in 0..m {
                            v += gamma.get(a, l, p) * r.get(p, k, i, j)
                                - gamma.get(p, l, k) * r.get(a, p, i, j)
                                - gamma.get(p, l, i) * r.get(a, k, p, j)
                                - gamma.get(p, l, j) * r.get(a, k, i, p);
                        }
                        worst = worst.max((local.nabla_riemann.get(l, a, k, i, j) - v).abs());
                    }
                }
            }
        }
    }
    assert!(local.nabla_riemann.max_abs() > 1e-2);
    assert!(worst < 1e-5, "∇R residual {worst:e}");
}

#[test]
fn sasaki_nijenhuis_sees_base_curvature() {
    let bundle = TangentBundle::new(ChartMetric::space_form(2, 1.0), WeightPair::sasaki());
    let p = bundle.at(&[0.1, -0.2], &[0.7, 0.4]).unwrap();
    let (a, b) = ([1.0, 0.3], [-0.2, 0.8]);
    let n = p.nijenhuis_hh(&a, &b).unwrap();
    let ru = p.local().r(&a, &b, p.u());
    assert!(max_abs(n.h()) < 1e-14);
    assert!(max_abs_diff(n.v(), &ru) < 1e-14);
    assert!(max_abs(&ru) > 1e-2);
}

#[test]
fn second_kahler_family_is_integrable() {
    let w = WeightPair::kahler_family(2, -1.0, 2.0).unwrap();
    let bundle = TangentBundle::new(ChartMetric::space_form(2, -1.0), w);
    let mut r = rng(31);
    for _ in 0..20 {
        let p = bundle.at(&vector(&mut r, 2, 0.5), &vector(&mut r, 2, 1.2)).unwrap();
        let (a, b) = (vector(&mut r, 2, 1.0), vector(&mut r, 2, 1.0));
        assert!(p.nijenhuis_hh(&a, &b).unwrap().max_abs() < 1e-8);
        assert!(p.nijenhuis_vv(&a, &b).unwrap().max_abs() < 1e-8);
    }
}

#[test]
fn t2_family_has_constant_scalar_curvature() {
    for (c, m, k) in [(1.0, 2, 1.0), (-1.0, 3, 0.5), (1.0, 3, -0.5)] {
        let params = BTreeMap::from([
            ("k".to_string(), k),
            ("c".to_string(), c),
            ("m".to_string(), m as f64),
        ]);
        let w = WeightPair::named_family("scal_t2", &params).unwrap();
        let upper = w.domain().sampling_interval(2.0).1;
        let bundle = TangentBundle::new(ChartMetric::space_form(m, c), w);
        let expect = (m as f64 - 1.0) * (m as f64 * c + k);
        let mut r = rng(5);
        for step in 1..=10 {
            let t = upper * step as f64 / 11.0;
            let mut u = vector(&mut r, m, 1.0);
            let p0 = bundle.at(&vec![0.0; m], &u).unwrap();
            let s = (t / p0.t()).sqrt();
            u.iter_mut().for_each(|v| *v *= s);
            let p = bundle.at(&vec![0.0; m], &u).unwrap();
            let scal = p.scalar_basis_sum().unwrap();
            assert!((scal - expect).abs() < 1e-9 * expect.abs().max(1.0), "t = {t}: {scal} vs {expect}");
        }
    }
}

#[test]
fn cheeger_gromoll_kahler_form_differential_structure() {
    let bundle = TangentBundle::new(ChartMetric::space_form(2, 1.0), WeightPair::cheeger_gromoll());
    let im = InducedMetric::from_bundle(&bundle);
    let mut r = rng(19);
    let x = vector(&mut r, 2, 0.4);
    let u = vector(&mut r, 2, 1.0);
    let z = concat(&x, &u);
    let p = bundle.at(&x, &u).unwrap();
    let hor = |v: &[f64]| p.to_coordinates(&p.horizontal(v).unwrap()).unwrap();
    let ver = |v: &[f64]| p.to_coordinates(&p.vertical(v).unwrap()).unwrap();
    let vs: Vec<Vec<f64>> = (0..3).map(|_| vector(&mut r, 2, 1.0)).collect();
    let d = |a: Vec<f64>, b: Vec<f64>, c: Vec<f64>| im.d_kahler_form(&z, [&a, &b, &c], DEFAULT_STEP).unwrap();
    assert!(d(hor(&vs[0]), hor(&vs[1]), hor(&vs[2])).abs() < 1e-6);
    assert!(d(hor(&vs[0]), hor(&vs[1]), ver(&vs[2])).abs() < 1e-6);
    assert!(d(ver(&vs[0]), ver(&vs[1]), ver(&vs[2])).abs() < 1e-6);

    // dΩ(X^H, Y^V, Z^V) is a multiple of g(X,Y)g(Z,u) − g(X,Z)g(Y,u).
    let local = p.local();
    let mut ratios = Vec::new();
    for _ in 0..4 {
        let (a, b, c) = (vector(&mut r, 2, 1.0), vector(&mut r, 2, 1.0), vector(&mut r, 2, 1.0));
        let shape = local.inner(&a, &b) * local.inner(&c, &u) - local.inner(&a, &c) * local.inner(&b, &u);
        ratios.push(d(hor(&a), ver(&b), ver(&c)) / shape);
    }
    let spread = ratios.iter().fold(0.0f64, |acc, v| acc.max((v - ratios[0]).abs()));
    assert!(spread < 1e-5, "{ratios:?}");
}

#[test]
fn finite_differences_converge_under_step_halving() {
    let bundle = TangentBundle::new(ChartMetric::space_form(2, 1.0), WeightPair::cheeger_gromoll());
    let im = InducedMetric::from_bundle(&bundle);
    let z = [0.2, -0.1, 0.6, 0.3];
    // Large steps, so truncation error dominates rounding; the extrapolated
    // stencil is fourth order, so each halving should gain close to 16x.
    let coarse = im.fd_connection(&z, 0.08).unwrap();
    let fine = im.fd_connection(&z, 0.04).unwrap();
    let finer = im.fd_connection(&z, 0.02).unwrap();
    let d1 = max_abs_diff(&coarse.data, &fine.data);
    let d2 = max_abs_diff(&fine.data, &finer.data);
    assert!(d2 < d1 / 8.0, "{d1:e} {d2:e}");
}
