//! Primal network simplex for the balanced transportation problem.
//!
//! Strongly feasible spanning-tree bases with an artificial root, block
//! search pricing and thread/successor tree bookkeeping. Arc capacities are
//! unbounded, so every pivot changes the basis. Potentials are recomputed from
//! the tree periodically and before termination so that roundoff in the
//! incremental updates cannot stop the method early.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;
const NONE: usize = usize::MAX;
const REFRESH_EVERY: usize = 2048;

pub(crate) struct Flow {
    /// `(source row, target column, flow)` for every arc with positive flow.
    pub entries: Vec<(usize, usize, f64)>,
}

/// Minimises `Σ c[i·n1 + j]·x_ij` over `x ≥ 0` with row sums `supply` and
/// column sums `demand`. Supplies and demands must be positive with equal
/// totals up to roundoff.
pub(crate) fn solve_transportation(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<Flow> {
    let (n0, n1) = (supply.len(), demand.len());
    if cost.len() != n0 * n1 {
        return Err(Error::LengthMismatch { expected: n0 * n1, got: cost.len() });
    }
    if n0 == 0 || n1 == 0 {
        return Err(Error::Infeasible("empty marginal".into()));
    }
    let mut ns = Simplex::new(supply, demand, cost);
    ns.run();
    let art_flow: f64 = (0..ns.node_num).map(|u| ns.flow[ns.arc_num + u]).sum();
    let total: f64 = supply.iter().sum();
    if art_flow > 1e-9 * total.max(1.0) {
        return Err(Error::Infeasible("marginals cannot be matched".into()));
    }
    let mut entries = Vec::new();
    for e in 0..ns.arc_num {
        let f = ns.flow[e];
        if f > 0.0 {
            entries.push((e / n1, e % n1, f));
        }
    }
    Ok(Flow { entries })
}

struct Simplex {
    node_num: usize,
    arc_num: usize,
    root: usize,

    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<i8>,
    supply: Vec<f64>,

    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    pred_dir: Vec<i8>,
    dirty_revs: Vec<usize>,

    block_size: usize,
    next_arc: usize,
    eps: f64,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
}

impl Simplex {
    fn new(supply_in: &[f64], demand: &[f64], cost_in: &[f64]) -> Self {
        let (n0, n1) = (supply_in.len(), demand.len());
        let node_num = n0 + n1;
        let arc_num = n0 * n1;
        let all = arc_num + node_num;
        let root = node_num;

        let mut source = vec![0; all];
        let mut target = vec![0; all];
        for i in 0..n0 {
            for j in 0..n1 {
                source[i * n1 + j] = i;
                target[i * n1 + j] = n0 + j;
            }
        }
        let mut cost = vec![0.0; all];
        cost[..arc_num].copy_from_slice(cost_in);
        let max_cost = cost_in.iter().copied().fold(0.0, f64::max);
        let scale = if max_cost > 0.0 { max_cost } else { 1.0 };
        let art_cost = scale * (node_num + 1) as f64;

        let mut supply: Vec<f64> = supply_in.to_vec();
        supply.extend(demand.iter().map(|d| -d));

        let mut s = Simplex {
            node_num,
            arc_num,
            root,
            source,
            target,
            cost,
            flow: vec![0.0; all],
            state: vec![STATE_LOWER; all],
            supply,
            pi: vec![0.0; node_num + 1],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            pred_dir: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: (math::sqrt(arc_num as f64) as usize + 1).max(10),
            next_arc: 0,
            eps: 1e-14 * art_cost,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
        };

        s.parent[root] = NONE;
        s.pred[root] = NONE;
        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;
        s.pi[root] = 0.0;
        for u in 0..node_num {
            let e = arc_num + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = STATE_TREE;
            if s.supply[u] >= 0.0 {
                s.pred_dir[u] = DIR_UP;
                s.pi[u] = 0.0;
                s.source[e] = u;
                s.target[e] = root;
                s.flow[e] = s.supply[u];
                s.cost[e] = 0.0;
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.pi[u] = art_cost;
                s.source[e] = root;
                s.target[e] = u;
                s.flow[e] = -s.supply[u];
                s.cost[e] = art_cost;
            }
        }
        s
    }

    #[inline]
    fn reduced(&self, e: usize) -> f64 {
        f64::from(self.state[e]) * (self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]])
    }

    fn find_entering_arc(&mut self) -> bool {
        let mut min = -self.eps;
        let mut found = false;
        let mut cnt = self.block_size;
        let m = self.arc_num;
        let mut e = self.next_arc;
        for _ in 0..m {
            let c = self.reduced(e);
            if c < min {
                min = c;
                self.in_arc = e;
                found = true;
            }
            e += 1;
            if e == m {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if found {
                    self.next_arc = e;
                    return true;
                }
                cnt = self.block_size;
            }
        }
        self.next_arc = e;
        found
    }

    fn find_join_node(&mut self) {
        let (mut u, mut v) = (self.source[self.in_arc], self.target[self.in_arc]);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        let in_arc = self.in_arc;
        let (first, second) = (self.source[in_arc], self.target[in_arc]);
        self.delta = f64::INFINITY;
        let mut result = 0;
        let mut u = first;
        while u != self.join {
            if self.pred_dir[u] == DIR_UP {
                let d = self.flow[self.pred[u]];
                if d < self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 1;
                }
            }
            u = self.parent[u];
        }
        let mut u = second;
        while u != self.join {
            if self.pred_dir[u] == DIR_DOWN {
                let d = self.flow[self.pred[u]];
                if d <= self.delta {
                    self.delta = d;
                    self.u_out = u;
                    result = 2;
                }
            }
            u = self.parent[u];
        }
        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self) {
        let in_arc = self.in_arc;
        let val = self.delta;
        if val > 0.0 {
            self.flow[in_arc] += val;
            let mut u = self.source[in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
            let mut u = self.target[in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += f64::from(self.pred_dir[u]) * val;
                u = self.parent[u];
            }
        }
        let out = self.pred[self.u_out];
        self.flow[out] = 0.0;
        self.state[in_arc] = STATE_TREE;
        self.state[out] = STATE_LOWER;
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;

        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                tmp_sc = tmp_sc + self.succ_num[u] - self.succ_num[p];
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] { DIR_UP } else { DIR_DOWN };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in { join } else { NONE };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let sigma = self.pi[self.v_in] - self.pi[u_in] - f64::from(self.pred_dir[u_in]) * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    /// Recomputes all potentials from the tree; the thread order visits every
    /// parent before its children.
    fn refresh_potentials(&mut self) {
        self.pi[self.root] = 0.0;
        let mut u = self.thread[self.root];
        while u != self.root {
            let e = self.pred[u];
            let p = self.parent[u];
            self.pi[u] = if self.pred_dir[u] == DIR_UP {
                self.pi[p] - self.cost[e]
            } else {
                self.pi[p] + self.cost[e]
            };
            u = self.thread[u];
        }
    }

    fn run(&mut self) {
        let mut pivots = 0usize;
        loop {
            while self.find_entering_arc() {
                self.find_join_node();
                if !self.find_leaving_arc() {
                    // unbounded cycle: impossible with nonnegative costs
                    return;
                }
                self.change_flow();
                self.update_tree_structure();
                self.update_potential();
                pivots += 1;
                if pivots % REFRESH_EVERY == 0 {
                    self.refresh_potentials();
                }
            }
            self.refresh_potentials();
            if !self.find_entering_arc() {
                return;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cost_of(flow: &Flow, c: &[f64], n1: usize) -> f64 {
        flow.entries.iter().map(|&(i, j, f)| f * c[i * n1 + j]).sum()
    }

    #[test]
    fn two_by_two() {
        let c = [0.0, 1.0, 1.0, 0.0];
        let f = solve_transportation(&[0.5, 0.5], &[0.5, 0.5], &c).unwrap();
        assert_eq!(cost_of(&f, &c, 2), 0.0);
        assert_eq!(f.entries, vec![(0, 0, 0.5), (1, 1, 0.5)]);
    }

    #[test]
    fn marginals_respected() {
        let (n0, n1) = (7, 5);
        let supply: Vec<f64> = (0..n0).map(|i| (i + 1) as f64).collect();
        let tot: f64 = supply.iter().sum();
        let demand: Vec<f64> = (0..n1).map(|_| tot / n1 as f64).collect();
        let c: Vec<f64> = (0..n0 * n1).map(|k| ((k * 37) % 11) as f64).collect();
        let f = solve_transportation(&supply, &demand, &c).unwrap();
        let mut rows = vec![0.0; n0];
        let mut cols = vec![0.0; n1];
        for &(i, j, x) in &f.entries {
            rows[i] += x;
            cols[j] += x;
        }
        for (a, b) in rows.iter().zip(&supply) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in cols.iter().zip(&demand) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
