mod common;

use std::collections::BTreeMap;

use common::{max_abs_diff, rng, vector};
use tangent_geom::sphere::{isometry_check, GeneratorPair, SphereBundle};
use tangent_geom::{ChartMetric, Epsilon, WeightPair};

const H: f64 = 1e-4;

fn constant(a: f64) -> WeightPair {
    let params = BTreeMap::from([("a".to_string(), a), ("b".to_string(), 0.0)]);
    WeightPair::named_family("constant", &params).unwrap()
}

fn random_tangents(frame: &tangent_geom::sphere::SphereFrame, seed: u64, n: usize) -> Vec<tangent_geom::tbundle::SplitVector> {
    let mut r = rng(seed);
    let m = frame.point().x.len();
    (0..n)
        .map(|_| frame.tangent(&vector(&mut r, m, 1.0), &vector(&mut r, m, 1.0)).unwrap())
        .collect()
}

#[test]
fn fiber_generators_of_unit_vector() {
    let sb = SphereBundle::tangent_sphere(ChartMetric::euclidean(3), 1.0).unwrap();
    let f = sb.at(&sb.point(&[0.0; 3], &[1.0, 0.0, 0.0]).unwrap()).unwrap();
    let gens = f.generators().unwrap();
    assert!(gens[3].max_abs() == 0.0);
    assert_eq!(gens[4].v(), &[0.0, 1.0, 0.0]);
    assert_eq!(f.fiber_rank(), 2);
}

#[test]
fn points_off_the_bundle_are_rejected() {
    let sb = SphereBundle::tangent_sphere(ChartMetric::euclidean(2), 2.0).unwrap();
    assert!(sb.point(&[0.0, 0.0], &[1.0, 0.0]).is_err());
    assert!(sb.point(&[0.0, 0.0], &[2.0, 0.0]).is_ok());
}

#[test]
fn induced_metric_display_matches_restriction() {
    for sb in [
        SphereBundle::tangent_sphere(ChartMetric::space_form(2, 1.0), 1.7).unwrap(),
        SphereBundle::unit(ChartMetric::space_form(3, 1.0), constant(4.0)).unwrap(),
        SphereBundle::unit(ChartMetric::space_form(2, -1.0), WeightPair::cheeger_gromoll()).unwrap(),
    ] {
        let m = sb.dim();
        let mut r = rng(2);
        let p = sb.project(&vector(&mut r, m, 0.4), &vector(&mut r, m, 1.0)).unwrap();
        let f = sb.at(&p).unwrap();
        let gens = f.generators().unwrap();
        let disp = f.induced_metric_display();
        for (i, a) in gens.iter().enumerate() {
            assert!(f.normal_component(a) < 1e-14);
            for (j, b) in gens.iter().enumerate() {
                let v = f.induced_metric(a, b).unwrap();
                assert!((v - disp[(i, j)]).abs() < 1e-12, "{i} {j}: {v} vs {}", disp[(i, j)]);
            }
        }
    }
}

#[test]
fn almost_contact_identities_hold() {
    for eps in [Epsilon::Minus, Epsilon::Plus] {
        let sb = SphereBundle::unit(ChartMetric::space_form(2, 1.0), constant(2.5).with_epsilon(eps)).unwrap();
        let p = sb.project(&[0.2, -0.3], &[0.4, 0.9]).unwrap();
        let f = sb.at(&p).unwrap();
        let ts = random_tangents(&f, 4, 5);
        for rescaled in [false, true] {
            let cs = f.contact_structure(rescaled).unwrap();
            assert!(cs.identity_residual(&ts) < 1e-12);
        }
    }
    let sb = SphereBundle::tangent_sphere(ChartMetric::space_form(3, 1.0), 0.7).unwrap();
    let p = sb.project(&[0.2, -0.3, 0.1], &[0.4, 0.9, -0.2]).unwrap();
    let f = sb.at(&p).unwrap();
    let ts = random_tangents(&f, 5, 5);
    for rescaled in [false, true] {
        assert!(f.contact_structure(rescaled).unwrap().identity_residual(&ts) < 1e-12);
    }
}

#[test]
fn eta_sign_on_minus_branch() {
    let sb = SphereBundle::unit(ChartMetric::euclidean(2), constant(1.0).with_epsilon(Epsilon::Minus)).unwrap();
    let u = [0.6, 0.8];
    let f = sb.at(&sb.point(&[0.0, 0.0], &u).unwrap()).unwrap();
    let cs = f.contact_structure(false).unwrap();
    assert_eq!(cs.xi.h(), &u);
    assert!((cs.eta[0] - 0.6).abs() < 1e-15);
}

#[test]
fn rescaled_structures_are_contact_metric() {
    let sbs = [
        SphereBundle::tangent_sphere(ChartMetric::space_form(2, 1.0), 2.0).unwrap(),
        SphereBundle::tangent_sphere(ChartMetric::euclidean(3), 0.5).unwrap(),
        SphereBundle::unit(ChartMetric::space_form(2, -1.0), constant(3.0)).unwrap(),
        SphereBundle::unit(ChartMetric::space_form(2, 1.0), WeightPair::cheeger_gromoll()).unwrap(),
    ];
    for sb in sbs {
        let m = sb.dim();
        let mut r = rng(7);
        let p = sb.project(&vector(&mut r, m, 0.4), &vector(&mut r, m, 1.0)).unwrap();
        let f = sb.at(&p).unwrap();
        let ts = random_tangents(&f, 9, 4);
        let res = f.contact_metric_residual(&ts, true, 1e-3).unwrap();
        assert!(res < 1e-8, "contact metric residual {res:e}");
    }
}

#[test]
fn unrescaled_d_eta_matches_display() {
    let sbs = [
        SphereBundle::tangent_sphere(ChartMetric::space_form(2, 1.0), 2.0).unwrap(),
        SphereBundle::unit(ChartMetric::space_form(2, 1.0), constant(2.0).with_epsilon(Epsilon::Plus)).unwrap(),
        SphereBundle::unit(ChartMetric::space_form(2, 1.0), constant(2.0)).unwrap(),
    ];
    for sb in sbs {
        let p = sb.project(&[0.1, 0.3], &[-0.5, 0.7]).unwrap();
        let f = sb.at(&p).unwrap();
        let gens = f.generators().unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let d = f.d_eta(&gens[i], &gens[2 + j], false, 1e-3).unwrap();
                assert!((d - f.d_eta_display(i, j)).abs() < 1e-9);
                assert!(f.d_eta(&gens[i], &gens[j], false, 1e-3).unwrap().abs() < 1e-9);
                assert!(f.d_eta(&gens[2 + i], &gens[2 + j], false, 1e-3).unwrap().abs() < 1e-9);
            }
        }
    }
}

#[test]
fn t1_connection_displays_match_hypersurface_oracle() {
    for (base, w) in [
        (ChartMetric::space_form(2, 1.0), constant(1.0)),
        (ChartMetric::space_form(2, -1.0), constant(2.0)),
        (ChartMetric::space_form(3, 0.5), WeightPair::cheeger_gromoll()),
    ] {
        let sb = SphereBundle::unit(base, w).unwrap();
        let m = sb.dim();
        let mut r = rng(13);
        let p = sb.project(&vector(&mut r, m, 0.4), &vector(&mut r, m, 1.0)).unwrap();
        let f = sb.at(&p).unwrap();
        let gens = f.generators().unwrap();
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
                    let field = f.generator_field(field_h, j);
                    let closed = f.t1_connection(case, i, j).unwrap();
                    let oracle = f.hypersurface_oracle(dir, &*field, H).unwrap();
                    let frame = f.covariant_derivative(dir, &*field, H).unwrap();
                    let d1 = max_abs_diff(&closed.to_vec(), &oracle.to_vec());
                    let d2 = max_abs_diff(&frame.to_vec(), &oracle.to_vec());
                    assert!(d1 < 1e-4, "{case:?} {i}{j}: display vs oracle {d1:e}");
                    assert!(d2 < 1e-6, "{case:?} {i}{j}: frame vs oracle {d2:e}");
                }
            }
        }
    }
}

#[test]
fn k_contact_exactly_on_curvature_one_over_a() {
    let cases = [
        (ChartMetric::space_form(2, 1.0), 1.0, true),
        (ChartMetric::space_form(3, 0.5), 2.0, true),
        (ChartMetric::space_form(2, 1.0), 2.0, false),
        (ChartMetric::euclidean(2), 1.0, false),
    ];
    for (base, a, expect) in cases {
        let sb = SphereBundle::unit(base, constant(a)).unwrap();
        let m = sb.dim();
        let mut r = rng(21);
        let p = sb.project(&vector(&mut r, m, 0.4), &vector(&mut r, m, 1.0)).unwrap();
        let f = sb.at(&p).unwrap();
        let ts = random_tangents(&f, 3, 4);
        let k = f.k_contact_residual(&ts, H).unwrap();
        let s = f.sasakian_residual(&ts, H).unwrap();
        if expect {
            assert!(k < 1e-8 && s < 1e-8, "a={a}: {k:e} {s:e}");
        } else {
            assert!(k > 1e-2 && s > 1e-2, "a={a}: {k:e} {s:e}");
        }
    }
}

#[test]
fn radial_map_is_isometric_only_for_root_a() {
    for base in [ChartMetric::euclidean(2), ChartMetric::space_form(2, 1.0)] {
        let unit = SphereBundle::unit(base.clone(), constant(4.0)).unwrap();
        let good = SphereBundle::tangent_sphere(base.clone(), 2.0).unwrap();
        let bad = SphereBundle::tangent_sphere(base.clone(), 1.0).unwrap();
        let res = isometry_check(&unit, &good, &[0.2, 0.1], &[0.3, -0.8]).unwrap();
        assert!(res.max() < 1e-12, "{res:?}");
        let res = isometry_check(&unit, &bad, &[0.2, 0.1], &[0.3, -0.8]).unwrap();
        assert!(res.metric >= 0.1, "{res:?}");
    }
    let sasaki = SphereBundle::unit(ChartMetric::space_form(2, 1.0), WeightPair::sasaki()).unwrap();
    let same = SphereBundle::tangent_sphere(ChartMetric::space_form(2, 1.0), 1.0).unwrap();
    assert!(isometry_check(&sasaki, &same, &[0.1, 0.0], &[1.0, 1.0]).unwrap().max() < 1e-15);
}
