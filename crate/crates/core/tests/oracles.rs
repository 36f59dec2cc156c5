mod common;

use common::*;
use conecd_core::cd::{tau, DistortionQuery};
use conecd_core::cones::{cone_distance, ConeKind};
use conecd_core::metric_space::{antipode_set, build_space, midpoint_index, validate_metric, ManifoldDescriptor};
use proptest::prelude::*;

#[test]
fn tau_matches_high_precision_table() {
    let rows = tau_rows();
    assert_eq!(rows.len(), 1000);
    for [k, n, t, theta, expect] in rows {
        let got = tau(&DistortionQuery::new(k, n, t, theta)).unwrap();
        assert!((got - expect).abs() <= 1e-12 * expect.abs().max(1.0), "K={k} N={n} t={t} θ={theta}: {got} vs {expect}");
    }
}

#[test]
fn euclidean_cone_over_circle_is_the_plane() {
    assert!(planar_error(&circle_cone(ConeKind::Euclidean, 64, 32, 1.0)) <= 1e-12);
    assert!(planar_error(&circle_cone(ConeKind::Euclidean, 12, 5, 7.0)) <= 1e-12);
}

#[test]
fn spherical_cone_over_circle_is_the_sphere() {
    assert!(sphere_error(&circle_cone(ConeKind::Spherical, 64, 32, 0.0)) <= 1e-12);
}

#[test]
fn kappa_cones_rescale_spherical_distances() {
    let a = circle_cone(ConeKind::Spherical, 16, 8, 0.0);
    for kappa in [0.25f64, 4.0] {
        let b = build_space(&ManifoldDescriptor::circle(1.0, 16)).unwrap();
        let s = kappa.sqrt();
        for i in 0..b.len() {
            for j in 0..b.len() {
                for &r in a.grid().midpoints() {
                    for &q in a.grid().midpoints() {
                        let lhs = cone_distance(ConeKind::Kappa(kappa), b.dist(i, j), r / s, q / s).unwrap();
                        let rhs = cone_distance(ConeKind::Spherical, b.dist(i, j), r, q).unwrap() / s;
                        assert!((lhs - rhs).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn built_circles_are_metric(n in 3usize..40, radius in 0.2..3.0f64) {
        let s = build_space(&ManifoldDescriptor::circle(radius, n)).unwrap();
        prop_assert!(validate_metric(&s, 1e-9).is_valid());
        prop_assert!((s.total_weight() - std::f64::consts::TAU * radius).abs() < 1e-9);
    }

    #[test]
    fn antipodes_are_symmetric(n in 3usize..30, i in 0usize..30) {
        let s = build_space(&ManifoldDescriptor::circle(1.0, n)).unwrap().with_diameter_cap(std::f64::consts::PI, 1e-9).unwrap();
        let i = i % n;
        let tol = s.default_antipode_tol();
        for j in antipode_set(&s, i, tol).unwrap() {
            prop_assert!(antipode_set(&s, j, tol).unwrap().contains(&i));
        }
    }

    #[test]
    fn midpoints_are_equidistant_up_to_a_cell(n in 3usize..30, i in 0usize..30, j in 0usize..30) {
        let s = build_space(&ManifoldDescriptor::interval(1.0, n)).unwrap();
        let (i, j) = (i % n, j % n);
        let m = midpoint_index(&s, i, j);
        let h = 1.0 / n as f64;
        prop_assert!((s.dist(i, m) - s.dist(m, j)).abs() <= h + 1e-12);
        prop_assert!((s.dist(i, m) + s.dist(m, j) - s.dist(i, j)).abs() <= 1e-12);
    }
}
