//! Independent oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use conecd_core::cones::{build_cone, BaseRef, ConeKind, ConeOptions, ConeSpace, RadialGrid};
use conecd_core::metric_space::{build_space, ManifoldDescriptor, PointLabel};

pub const TAU_ORACLE: &str = include_str!("../data/tau_oracle.csv");

/// `(k, n, t, theta, tau)` rows of the high-precision table.
pub fn tau_rows() -> Vec<[f64; 5]> {
    TAU_ORACLE
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let v: Vec<f64> = l.split(',').map(|x| x.trim().parse().unwrap()).collect();
            [v[0], v[1], v[2], v[3], v[4]]
        })
        .collect()
}

pub fn circle_cone(kind: ConeKind, base: usize, radial: usize, r_max: f64) -> ConeSpace {
    let b = build_space(&ManifoldDescriptor::circle(1.0, base)).unwrap();
    build_cone(&b, kind, 1.0, RadialGrid::for_kind(kind, radial, r_max).unwrap(), ConeOptions::default()).unwrap()
}

fn angle_and_radius(cone: &ConeSpace, idx: usize) -> (f64, f64) {
    let p = cone.point(idx);
    match p.base {
        BaseRef::Cell(i) => match &cone.base().labels()[i] {
            PointLabel::Coords(c) => (c[0], p.r),
            PointLabel::Apex(_) => unreachable!(),
        },
        _ => (0.0, p.r),
    }
}

/// Largest deviation of cone distances from planar distances under
/// `(φ, r) ↦ (r cos φ, r sin φ)`.
pub fn planar_error(cone: &ConeSpace) -> f64 {
    let pts: Vec<[f64; 2]> = (0..cone.len())
        .map(|i| {
            let (a, r) = angle_and_radius(cone, i);
            [r * a.cos(), r * a.sin()]
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let d = (pts[i][0] - pts[j][0]).hypot(pts[i][1] - pts[j][1]);
            worst = worst.max((d - cone.mms().dist(i, j)).abs());
        }
    }
    worst
}

/// Largest deviation of cone distances from great-circle distances under
/// `(φ, r) ↦ (sin r cos φ, sin r sin φ, cos r)`.
pub fn sphere_error(cone: &ConeSpace) -> f64 {
    let pts: Vec<[f64; 3]> = (0..cone.len())
        .map(|i| {
            let (a, r) = angle_and_radius(cone, i);
            [r.sin() * a.cos(), r.sin() * a.sin(), r.cos()]
        })
        .collect();
    let mut worst: f64 = 0.0;
    for i in 0..pts.len() {
        for j in 0..pts.len() {
            let (p, q) = (pts[i], pts[j]);
            let cross = [p[1] * q[2] - p[2] * q[1], p[2] * q[0] - p[0] * q[2], p[0] * q[1] - p[1] * q[0]];
            let c = (cross[0] * cross[0] + cross[1] * cross[1] + cross[2] * cross[2]).sqrt();
            let d = c.atan2(p[0] * q[0] + p[1] * q[1] + p[2] * q[2]);
            worst = worst.max((d - cone.mms().dist(i, j)).abs());
        }
    }
    worst
}

use conecd_core::metric_space::FiniteMetricMeasureSpace;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// 12 random planar points: the first 6 carry the source, the last 6 the target.
pub fn random_planar_space(rng: &mut ChaCha8Rng) -> FiniteMetricMeasureSpace {
    let pts: Vec<(f64, f64)> = (0..12).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let mut d = vec![0.0; 144];
    for i in 0..12 {
        for j in 0..12 {
            d[i * 12 + j] = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
        }
    }
    FiniteMetricMeasureSpace::from_matrix(d, vec![1.0; 12]).unwrap()
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    heap(n, &mut p, &mut out);
    out
}

fn heap(k: usize, p: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(p.clone());
        return;
    }
    heap(k - 1, p, out);
    for i in 0..k - 1 {
        if k % 2 == 0 {
            p.swap(i, k - 1);
        } else {
            p.swap(0, k - 1);
        }
        heap(k - 1, p, out);
    }
}

/// Minimum of `Σ c(a_k, b_{σ(k)})` over permutations: the vertices of the
/// assignment polytope, hence of the transport polytope with equal unit masses.
pub fn brute_force(s: &FiniteMetricMeasureSpace, rows: &[usize], cols: &[usize], perms: &[Vec<usize>], unit: f64) -> f64 {
    perms
        .iter()
        .map(|p| rows.iter().zip(p).map(|(&i, &k)| s.dist(i, cols[k]).powi(2)).sum::<f64>() * unit)
        .fold(f64::INFINITY, f64::min)
}
