//! Exact quadratic-cost optimal transport between discrete measures.
//!
//! [`solve_ot`] runs a network simplex over the supports of the two
//! marginals. [`interpolate`] turns a plan into chains of recursive discrete
//! midpoints, the surrogate for an optimal path measure, and
//! [`DiscretePathEnsemble::measure_at`] pushes the chain masses forward to
//! give the displacement interpolant at dyadic times.

mod network_simplex;

use alloc::collections::BTreeMap;
use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cones::{is_through_apex_pair, ConeSpace};
use crate::metric_space::{midpoint_index, DiscreteMeasure, FiniteMetricMeasureSpace};
use crate::{Error, Result};

/// Couplings entries at or below this mass are ignored when extracting supports.
pub const MASS_FLOOR: f64 = 1e-12;
/// Marginal tolerance for plans.
pub const TOL_MARGINAL: f64 = 1e-9;

/// A coupling of two measures on one space, stored sparsely.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<'a> {
    source: DiscreteMeasure<'a>,
    target: DiscreteMeasure<'a>,
    entries: Vec<(usize, usize, f64)>,
    cost: f64,
}

impl<'a> TransportPlan<'a> {
    /// Builds a plan from explicit `(i, j, mass)` entries, checking the
    /// marginals to [`TOL_MARGINAL`]. Entries are merged and sorted.
    pub fn from_entries(
        source: DiscreteMeasure<'a>,
        target: DiscreteMeasure<'a>,
        entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        if !source.same_space(&target) {
            return Err(Error::SpaceMismatch);
        }
        let space = source.space();
        let n = space.len();
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (i, j, m) in entries {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: n });
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(Error::Domain(format!("coupling mass {m} at ({i}, {j})")));
            }
            *merged.entry((i, j)).or_insert(0.0) += m;
        }
        let entries: Vec<(usize, usize, f64)> =
            merged.into_iter().filter(|&(_, m)| m > 0.0).map(|((i, j), m)| (i, j, m)).collect();
        let plan = Self::assemble(source, target, entries);
        let (rows, cols) = plan.marginals();
        for (k, (&a, &b)) in rows.iter().zip(plan.source.mass()).enumerate() {
            if (a - b).abs() > TOL_MARGINAL {
                return Err(Error::Infeasible(format!("row {k} sums to {a}, expected {b}")));
            }
        }
        for (k, (&a, &b)) in cols.iter().zip(plan.target.mass()).enumerate() {
            if (a - b).abs() > TOL_MARGINAL {
                return Err(Error::Infeasible(format!("column {k} sums to {a}, expected {b}")));
            }
        }
        Ok(plan)
    }

    fn assemble(source: DiscreteMeasure<'a>, target: DiscreteMeasure<'a>, entries: Vec<(usize, usize, f64)>) -> Self {
        let space = source.space();
        let cost = entries.iter().map(|&(i, j, m)| m * space.dist(i, j) * space.dist(i, j)).sum();
        TransportPlan { source, target, entries, cost }
    }

    pub fn source(&self) -> &DiscreteMeasure<'a> {
        &self.source
    }

    pub fn target(&self) -> &DiscreteMeasure<'a> {
        &self.target
    }

    pub fn space(&self) -> &'a FiniteMetricMeasureSpace {
        self.source.space()
    }

    /// Nonzero entries `(i, j, q_ij)` sorted by `(i, j)`.
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// `Σ q_ij d(i,j)²`, the squared Wasserstein distance for an optimal plan.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn wasserstein2(&self) -> f64 {
        crate::math::sqrt(self.cost)
    }

    /// Row and column sums.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let n = self.space().len();
        let (mut rows, mut cols) = (vec![0.0; n], vec![0.0; n]);
        for &(i, j, m) in &self.entries {
            rows[i] += m;
            cols[j] += m;
        }
        (rows, cols)
    }

    /// Dense row-major coupling matrix.
    pub fn dense(&self) -> Vec<f64> {
        let n = self.space().len();
        let mut q = vec![0.0; n * n];
        for &(i, j, m) in &self.entries {
            q[i * n + j] = m;
        }
        q
    }

    /// Entries with mass above [`MASS_FLOOR`].
    pub fn support(&self) -> Vec<(usize, usize)> {
        self.entries.iter().filter(|e| e.2 > MASS_FLOOR).map(|&(i, j, _)| (i, j)).collect()
    }
}

/// Exact optimal coupling for the cost `d²`.
pub fn solve_ot<'a>(mu0: &DiscreteMeasure<'a>, mu1: &DiscreteMeasure<'a>) -> Result<TransportPlan<'a>> {
    if !mu0.same_space(mu1) {
        return Err(Error::SpaceMismatch);
    }
    for mu in [mu0, mu1] {
        let total = mu.total_mass();
        if (total - 1.0).abs() > crate::metric_space::TOL_MASS {
            return Err(Error::Unnormalized { total });
        }
    }
    let space = mu0.space();
    let s0 = mu0.support(0.0);
    let s1 = mu1.support(0.0);
    let supply: Vec<f64> = s0.iter().map(|&i| mu0.mass()[i]).collect();
    let demand: Vec<f64> = s1.iter().map(|&j| mu1.mass()[j]).collect();
    let mut cost = Vec::with_capacity(s0.len() * s1.len());
    for &i in &s0 {
        let row = space.row(i);
        cost.extend(s1.iter().map(|&j| row[j] * row[j]));
    }
    let flow = network_simplex::solve_transportation(&supply, &demand, &cost)?;
    let mut entries: Vec<(usize, usize, f64)> =
        flow.entries.into_iter().map(|(a, b, m)| (s0[a], s1[b], m)).collect();
    entries.sort_by_key(|e| (e.0, e.1));
    Ok(TransportPlan::assemble(mu0.clone(), mu1.clone(), entries))
}

/// A reassignment of support pairs that lowers the total squared cost.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CycleViolation {
    /// Support pairs `(x_k, y_k)` in cycle order.
    pub pairs: Vec<(usize, usize)>,
    /// `Σ d²(x_k, y_k) − Σ d²(x_k, y_{k+1})`.
    pub excess: f64,
}

/// Scans all cycles of `2..=k_max` distinct support pairs for a cheaper
/// cyclic reassignment. Each cycle is listed once, starting at its smallest
/// pair index.
pub fn check_cyclic_monotonicity(plan: &TransportPlan<'_>, k_max: usize, tol: f64) -> Result<Vec<CycleViolation>> {
    if !(2..=4).contains(&k_max) {
        return Err(Error::Domain(format!("cycle length bound {k_max} not in 2..=4")));
    }
    let space = plan.space();
    let pairs = plan.support();
    let c = |i: usize, j: usize| space.dist(i, j) * space.dist(i, j);
    let mut out = Vec::new();
    let mut cycle = Vec::with_capacity(k_max);
    for k in 2..=k_max {
        for first in 0..pairs.len() {
            cycle.clear();
            cycle.push(first);
            extend_cycles(&pairs, k, &mut cycle, &mut |idx: &[usize]| {
                let n = idx.len();
                let mut direct = 0.0;
                let mut shifted = 0.0;
                for a in 0..n {
                    let (x, y) = pairs[idx[a]];
                    direct += c(x, y);
                    shifted += c(x, pairs[idx[(a + 1) % n]].1);
                }
                if direct > shifted + tol {
                    out.push(CycleViolation {
                        pairs: idx.iter().map(|&p| pairs[p]).collect(),
                        excess: direct - shifted,
                    });
                }
            });
        }
    }
    Ok(out)
}

fn extend_cycles(pairs: &[(usize, usize)], k: usize, cycle: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
    if cycle.len() == k {
        // a 2-cycle is its own reverse; list it once
        if k == 2 && cycle[1] < cycle[0] {
            return;
        }
        visit(cycle);
        return;
    }
    for next in (cycle[0] + 1)..pairs.len() {
        if cycle.contains(&next) {
            continue;
        }
        cycle.push(next);
        extend_cycles(pairs, k, cycle, visit);
        cycle.pop();
    }
}

/// A discrete geodesic: `2^L + 1` point indices and the coupling mass it carries.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathChain {
    pub points: Vec<usize>,
    pub mass: f64,
}

impl PathChain {
    pub fn start(&self) -> usize {
        self.points[0]
    }

    pub fn end(&self) -> usize {
        self.points[self.points.len() - 1]
    }
}

/// Midpoint chains of every plan entry, standing in for an optimal path measure.
#[derive(Debug, Clone)]
pub struct DiscretePathEnsemble<'a> {
    source: DiscreteMeasure<'a>,
    target: DiscreteMeasure<'a>,
    chains: Vec<PathChain>,
    levels: u32,
    merge_count: usize,
}

impl<'a> DiscretePathEnsemble<'a> {
    pub fn chains(&self) -> &[PathChain] {
        &self.chains
    }

    pub fn levels(&self) -> u32 {
        self.levels
    }

    /// Number of time steps `2^L`.
    pub fn steps(&self) -> usize {
        1 << self.levels
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 / self.steps() as f64
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps()).map(|k| self.time(k)).collect()
    }

    pub fn space(&self) -> &'a FiniteMetricMeasureSpace {
        self.source.space()
    }

    /// Unordered pairs of chains that share a point at some interior time.
    /// Always zero for genuinely non-branching transport; on coarse grids
    /// chains routinely merge.
    pub fn merge_count(&self) -> usize {
        self.merge_count
    }

    /// Masses pushed to the `k`-th chain entry, i.e. `μ_{k/2^L}`. The end
    /// times return the plan marginals themselves.
    pub fn measure_at(&self, k: usize) -> Result<DiscreteMeasure<'a>> {
        let steps = self.steps();
        if k > steps {
            return Err(Error::IndexOutOfRange { index: k, len: steps + 1 });
        }
        if k == 0 {
            return Ok(self.source.clone());
        }
        if k == steps {
            return Ok(self.target.clone());
        }
        DiscreteMeasure::from_unnormalized(self.space(), self.pushforward(k))
    }

    /// Raw pushforward of chain masses at step `k`, without renormalisation.
    pub fn pushforward(&self, k: usize) -> Vec<f64> {
        let mut mass = vec![0.0; self.space().len()];
        for c in &self.chains {
            mass[c.points[k]] += c.mass;
        }
        mass
    }
}

/// Builds the dyadic midpoint chain of every plan entry down to level `L`.
pub fn interpolate<'a>(plan: &TransportPlan<'a>, levels: u32) -> Result<DiscretePathEnsemble<'a>> {
    if levels == 0 {
        return Err(Error::Domain("interpolation needs at least one level".into()));
    }
    if levels > 16 {
        return Err(Error::Domain(format!("{levels} interpolation levels is excessive")));
    }
    let space = plan.space();
    let steps = 1usize << levels;
    let mut memo: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut mid = |a: usize, b: usize| *memo.entry((a, b)).or_insert_with(|| midpoint_index(space, a, b));
    let mut chains = Vec::with_capacity(plan.entries().len());
    for &(i, j, m) in plan.entries() {
        let mut points = vec![usize::MAX; steps + 1];
        points[0] = i;
        points[steps] = j;
        let mut stride = steps;
        while stride > 1 {
            let half = stride / 2;
            let mut a = 0;
            while a < steps {
                points[a + half] = mid(points[a], points[a + stride]);
                a += stride;
            }
            stride = half;
        }
        chains.push(PathChain { points, mass: m });
    }

    let mut met: BTreeSet<(usize, usize)> = BTreeSet::new();
    for k in 1..steps {
        let mut at: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (c, chain) in chains.iter().enumerate() {
            at.entry(chain.points[k]).or_default().push(c);
        }
        for group in at.values() {
            for a in 0..group.len() {
                for b in (a + 1)..group.len() {
                    met.insert((group[a], group[b]));
                }
            }
        }
    }

    Ok(DiscretePathEnsemble {
        source: plan.source().clone(),
        target: plan.target().clone(),
        chains,
        levels,
        merge_count: met.len(),
    })
}

/// Coupling mass on pairs whose geodesic runs through an apex (antipodal base
/// points within `tol_antipode`) plus mass sitting on apex cells.
pub fn apex_mass(plan: &TransportPlan<'_>, cone: &ConeSpace, tol_antipode: f64) -> Result<f64> {
    if plan.space().len() != cone.len() || plan.space() != cone.mms() {
        return Err(Error::SpaceMismatch);
    }
    let mut total = 0.0;
    for &(i, j, m) in plan.entries() {
        let (p, q) = (cone.point(i), cone.point(j));
        if p.is_apex() || q.is_apex() || is_through_apex_pair(cone, &p, &q, tol_antipode) {
            total += m;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cones::{build_cone, ConeKind, ConeOptions, RadialGrid};
    use crate::metric_space::{build_space, ManifoldDescriptor};
    use approx::assert_abs_diff_eq;

    fn three_points() -> FiniteMetricMeasureSpace {
        let d = vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0];
        FiniteMetricMeasureSpace::from_matrix(d, vec![1.0; 3]).unwrap()
    }

    #[test]
    fn identity_plan() {
        let s = build_space(&ManifoldDescriptor::circle(1.0, 8)).unwrap();
        let mu = DiscreteMeasure::from_density_fn(&s, |i| 1.0 + i as f64).unwrap();
        let plan = solve_ot(&mu, &mu).unwrap();
        assert_eq!(plan.cost(), 0.0);
        assert!(plan.entries().iter().all(|&(i, j, _)| i == j));
    }

    #[test]
    fn dirac_to_dirac() {
        let s = build_space(&ManifoldDescriptor::circle(1.0, 8)).unwrap();
        let a = DiscreteMeasure::dirac(&s, 1).unwrap();
        let b = DiscreteMeasure::dirac(&s, 4).unwrap();
        let plan = solve_ot(&a, &b).unwrap();
        assert_eq!(plan.entries(), &[(1, 4, 1.0)]);
        assert_abs_diff_eq!(plan.cost(), s.dist(1, 4).powi(2), epsilon = 1e-15);
    }

    #[test]
    fn three_point_line() {
        let s = three_points();
        let mu0 = DiscreteMeasure::from_mass(&s, vec![0.5, 0.5, 0.0]).unwrap();
        let mu1 = DiscreteMeasure::from_mass(&s, vec![0.0, 0.5, 0.5]).unwrap();
        let plan = solve_ot(&mu0, &mu1).unwrap();
        // vertex plans: {0→1, 1→2} costs 1, {0→2, 1→1} costs 2
        assert_abs_diff_eq!(plan.cost(), 1.0, epsilon = 1e-15);
        assert_eq!(plan.entries(), &[(0, 1, 0.5), (1, 2, 0.5)]);
        assert!(check_cyclic_monotonicity(&plan, 3, 1e-9).unwrap().is_empty());

        let swapped = TransportPlan::from_entries(mu0, mu1, vec![(0, 2, 0.5), (1, 1, 0.5)]).unwrap();
        assert_abs_diff_eq!(swapped.cost(), 2.0, epsilon = 1e-15);
        let v = check_cyclic_monotonicity(&swapped, 2, 1e-9).unwrap();
        assert_eq!(v.len(), 1);
        assert_abs_diff_eq!(v[0].excess, 2.0, epsilon = 1e-15);
    }

    #[test]
    fn single_pair_has_no_cycle() {
        let s = three_points();
        let plan = solve_ot(&DiscreteMeasure::dirac(&s, 0).unwrap(), &DiscreteMeasure::dirac(&s, 2).unwrap()).unwrap();
        assert!(check_cyclic_monotonicity(&plan, 4, 0.0).unwrap().is_empty());
        assert!(check_cyclic_monotonicity(&plan, 5, 0.0).is_err());
    }

    #[test]
    fn marginal_mismatch_rejected() {
        let s = three_points();
        let mu0 = DiscreteMeasure::dirac(&s, 0).unwrap();
        let mu1 = DiscreteMeasure::dirac(&s, 1).unwrap();
        assert!(TransportPlan::from_entries(mu0, mu1, vec![(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn circle_midpoint_chain() {
        let s = build_space(&ManifoldDescriptor::circle(1.0, 8)).unwrap();
        let plan = solve_ot(&DiscreteMeasure::dirac(&s, 0).unwrap(), &DiscreteMeasure::dirac(&s, 2).unwrap()).unwrap();
        let ens = interpolate(&plan, 1).unwrap();
        assert_eq!(ens.measure_at(1).unwrap().support(0.0), vec![1]);
        let ens = interpolate(&plan, 2).unwrap();
        assert_eq!(ens.chains()[0].points, vec![0, 0, 1, 1, 2]);
        assert_eq!(ens.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn diagonal_interpolation_is_constant() {
        let s = build_space(&ManifoldDescriptor::interval(1.0, 6)).unwrap();
        let mu = DiscreteMeasure::from_density_fn(&s, |i| (i + 2) as f64).unwrap();
        let ens = interpolate(&solve_ot(&mu, &mu).unwrap(), 3).unwrap();
        for k in 0..=8 {
            let m = ens.measure_at(k).unwrap();
            for (a, b) in m.mass().iter().zip(mu.mass()) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-15);
            }
        }
        assert_eq!(ens.merge_count(), 0);
    }

    #[test]
    fn apex_mass_of_antipodal_rays() {
        let base = build_space(&ManifoldDescriptor::circle(1.0, 8)).unwrap();
        let cone = build_cone(&base, ConeKind::Euclidean, 1.0, RadialGrid::uniform(4, 1.0).unwrap(), ConeOptions::default()).unwrap();
        let s = cone.mms();
        let ray0: Vec<usize> = (0..4).map(|j| cone.cell_index(0, j)).collect();
        let ray4: Vec<usize> = (0..4).map(|j| cone.cell_index(4, j)).collect();
        let mu0 = DiscreteMeasure::uniform_on(s, &ray0).unwrap();
        let mu1 = DiscreteMeasure::uniform_on(s, &ray4).unwrap();
        let plan = solve_ot(&mu0, &mu1).unwrap();
        assert_abs_diff_eq!(apex_mass(&plan, &cone, base.default_antipode_tol()).unwrap(), 1.0, epsilon = 1e-12);

        // a quarter-turn sector never meets its antipodes
        let ray2: Vec<usize> = (0..4).map(|j| cone.cell_index(2, j)).collect();
        let mu2 = DiscreteMeasure::uniform_on(s, &ray2).unwrap();
        let plan = solve_ot(&mu0, &mu2).unwrap();
        assert_eq!(apex_mass(&plan, &cone, base.default_antipode_tol()).unwrap(), 0.0);
    }
}
