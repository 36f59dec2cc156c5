//! Network simplex against brute-force vertex enumeration.

mod common;

use common::{brute_force, permutations, random_planar_space as random_space};
use conecd_core::{check_cyclic_monotonicity, solve_ot, DiscreteMeasure, FiniteMetricMeasureSpace};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn uniform_six_by_six() {
    let perms = permutations(6);
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = random_space(&mut rng);
        let mut m0 = vec![0.0; 12];
        let mut m1 = vec![0.0; 12];
        m0[..6].fill(1.0);
        m1[6..].fill(1.0);
        let mu0 = DiscreteMeasure::from_unnormalized(&s, m0).unwrap();
        let mu1 = DiscreteMeasure::from_unnormalized(&s, m1).unwrap();
        let plan = solve_ot(&mu0, &mu1).unwrap();
        let rows: Vec<usize> = (0..6).collect();
        let cols: Vec<usize> = (6..12).collect();
        let best = brute_force(&s, &rows, &cols, &perms, 1.0 / 6.0);
        assert!((plan.cost() - best).abs() <= 1e-12, "seed {seed}: {} vs {best}", plan.cost());
        assert!(check_cyclic_monotonicity(&plan, 3, 1e-9).unwrap().is_empty());
    }
}

#[test]
fn eighths_six_by_six() {
    // masses k/8: every vertex of the transport polytope is an assignment of
    // the eight mass units
    let perms = permutations(8);
    for seed in 0..100 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let s = random_space(&mut rng);
        let split = |rng: &mut ChaCha8Rng| {
            let mut counts = [0usize; 6];
            for _ in 0..8 {
                counts[rng.random_range(0..6)] += 1;
            }
            counts
        };
        let (c0, c1) = (split(&mut rng), split(&mut rng));
        let mut m0 = vec![0.0; 12];
        let mut m1 = vec![0.0; 12];
        let (mut rows, mut cols) = (Vec::new(), Vec::new());
        for k in 0..6 {
            m0[k] = c0[k] as f64 / 8.0;
            m1[6 + k] = c1[k] as f64 / 8.0;
            rows.extend(std::iter::repeat(k).take(c0[k]));
            cols.extend(std::iter::repeat(6 + k).take(c1[k]));
        }
        let mu0 = DiscreteMeasure::from_mass(&s, m0).unwrap();
        let mu1 = DiscreteMeasure::from_mass(&s, m1).unwrap();
        let plan = solve_ot(&mu0, &mu1).unwrap();
        let best = brute_force(&s, &rows, &cols, &perms, 1.0 / 8.0);
        assert!((plan.cost() - best).abs() <= 1e-12, "seed {seed}: {} vs {best}", plan.cost());
        assert!(check_cyclic_monotonicity(&plan, 3, 1e-9).unwrap().is_empty());
        let back = solve_ot(&mu1, &mu0).unwrap();
        assert!((back.cost() - plan.cost()).abs() <= 1e-9);
    }
}

#[test]
fn marginals_on_larger_random_instance() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 300;
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
        }
    }
    let s = FiniteMetricMeasureSpace::from_matrix(d, vec![1.0; n]).unwrap();
    let mu0 = DiscreteMeasure::from_density_fn(&s, |i| 1.0 + pts[i].0).unwrap();
    let mu1 = DiscreteMeasure::from_density_fn(&s, |i| 2.0 - pts[i].1).unwrap();
    let plan = solve_ot(&mu0, &mu1).unwrap();
    let (rows, cols) = plan.marginals();
    for i in 0..n {
        assert!((rows[i] - mu0.mass()[i]).abs() <= 1e-9);
        assert!((cols[i] - mu1.mass()[i]).abs() <= 1e-9);
    }
    assert!(plan.entries().len() < 2 * n);
    assert!(check_cyclic_monotonicity(&plan, 2, 1e-9).unwrap().is_empty());
}
