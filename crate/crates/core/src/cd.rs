//! Curvature-dimension checks on sampled spaces.
//!
//! For `μ_t = ρ_t m` the Rényi entropy is `S_N′(μ_t) = −∫ ρ_t^{1−1/N′} dm`.
//! `CD(K, N)` asks, along some optimal coupling `q` and geodesic, for
//!
//! ```text
//! −S_N′(μ_t) ≥ ∫ [τ^{(1−t)}_{K,N′}(d(x₀,x₁)) ρ₀^{−1/N′}(x₀) + τ^{(t)}_{K,N′}(d(x₀,x₁)) ρ₁^{−1/N′}(x₁)] dq(x₀,x₁)
//! ```
//!
//! for all `N′ ≥ N`. The discrete checks evaluate both sides on the plan the
//! solver returns and the midpoint-chain interpolant, so a positive deficit is
//! a violation for that plan, not a disproof of the condition.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cones::{build_cone, ConeKind, ConeOptions, RadialGrid};
use crate::math::{self, PI};
use crate::metric_space::{build_space, DiscreteMeasure, ManifoldDescriptor};
use crate::transport::{interpolate, solve_ot, DiscretePathEnsemble, TransportPlan, MASS_FLOOR};
use crate::{Error, Result};

/// Arguments of `τ^{(t)}_{K,N}(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DistortionQuery {
    pub k: f64,
    pub n: f64,
    pub t: f64,
    pub theta: f64,
}

impl DistortionQuery {
    pub fn new(k: f64, n: f64, t: f64, theta: f64) -> Self {
        DistortionQuery { k, n, t, theta }
    }
}

/// Volume distortion coefficient
/// `τ^{(t)}_{K,N}(θ) = t^{1/N}·[sin(√(K/(N−1)) tθ) / sin(√(K/(N−1)) θ)]^{1−1/N}`
/// for `K > 0`, with `sinh` and `−K` for `K < 0` and `t` for `K = 0`.
/// Returns `+∞` once `θ ≥ √((N−1)/K)·π`.
pub fn tau(q: &DistortionQuery) -> Result<f64> {
    let DistortionQuery { k, n, t, theta } = *q;
    if !(k.is_finite() && n.is_finite() && n >= 1.0) {
        return Err(Error::IllPosedDistortion(format!("K = {k}, N = {n}")));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::IllPosedDistortion(format!("t = {t} outside [0, 1]")));
    }
    if !(theta >= 0.0) {
        return Err(Error::IllPosedDistortion(format!("θ = {theta} must be nonnegative")));
    }
    if n == 1.0 {
        if k > 0.0 {
            return Err(Error::IllPosedDistortion("N = 1 with K > 0".into()));
        }
        return Ok(t);
    }
    if k == 0.0 || theta == 0.0 || t == 0.0 || t == 1.0 {
        if k > 0.0 && theta >= math::sqrt((n - 1.0) / k) * PI {
            return Ok(f64::INFINITY);
        }
        return Ok(t);
    }
    let alpha = math::sqrt(k.abs() / (n - 1.0));
    let ratio = if k > 0.0 {
        if alpha * theta >= PI || theta >= math::sqrt((n - 1.0) / k) * PI {
            return Ok(f64::INFINITY);
        }
        math::sin(alpha * t * theta) / math::sin(alpha * theta)
    } else {
        math::sinh(alpha * t * theta) / math::sinh(alpha * theta)
    };
    Ok(math::powf(t, 1.0 / n) * math::powf(ratio, 1.0 - 1.0 / n))
}

fn tau_of(k: f64, n: f64, t: f64, theta: f64) -> Result<f64> {
    tau(&DistortionQuery { k, n, t, theta })
}

/// `S_N′(μ) = −Σ ρ_i^{1−1/N′} w_i`, evaluated as `−Σ m_i^{1−1/N′} w_i^{1/N′}`
/// so that empty cells and mass on zero-weight cells contribute nothing.
pub fn renyi_entropy(mu: &DiscreteMeasure<'_>, n_prime: f64) -> Result<f64> {
    if !(n_prime.is_finite() && n_prime >= 1.0) {
        return Err(Error::Domain(format!("N′ = {n_prime} must be ≥ 1")));
    }
    let e = 1.0 / n_prime;
    let w = mu.space().weights();
    Ok(-mu
        .mass()
        .iter()
        .zip(w)
        .filter(|(&m, _)| m > 0.0)
        .map(|(&m, &w)| math::powf(m, 1.0 - e) * math::powf(w, e))
        .sum::<f64>())
}

/// Both sides of the integral inequality at each requested time.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CdReport {
    pub k: f64,
    pub n_prime: f64,
    pub times: Vec<f64>,
    /// `−S_N′(μ_t)`.
    pub lhs: Vec<f64>,
    /// The τ-weighted coupling integral.
    pub rhs: Vec<f64>,
    /// `rhs − lhs`; positive means the inequality fails at that time.
    pub deficit: Vec<f64>,
    /// For `K = 0`, `(1−t)(−S(μ₀)) + t(−S(μ₁))`, which must equal `rhs`.
    pub rhs_convex: Option<Vec<f64>>,
    /// Coupling entries above the mass floor whose τ is infinite.
    pub infinite_pairs: usize,
    pub pointwise_violations: usize,
    pub worst_pointwise: f64,
}

impl CdReport {
    /// Largest deficit over the listed times.
    pub fn max_deficit(&self) -> f64 {
        self.deficit.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.deficit.iter().all(|&d| d <= tol)
    }
}

fn step_of(ensemble: &DiscretePathEnsemble<'_>, t: f64) -> Result<usize> {
    let steps = ensemble.steps() as f64;
    let k = math::round(t * steps);
    if !(0.0..=steps).contains(&k) || (k - t * steps).abs() > 1e-9 {
        return Err(Error::Domain(format!("time {t} is not on the dyadic grid of level {}", ensemble.levels())));
    }
    Ok(k as usize)
}

fn inv_root_density(mu: &DiscreteMeasure<'_>, i: usize, n_prime: f64) -> Result<f64> {
    let w = mu.space().weight(i);
    let m = mu.mass()[i];
    if w == 0.0 && m > 0.0 {
        return Err(Error::SingularMass { index: i, mass: m });
    }
    Ok(math::powf(m / w, -1.0 / n_prime))
}

/// Evaluates the integral form of `CD(K, N′)` at the dyadic `times`.
pub fn cd_integral_check(
    plan: &TransportPlan<'_>,
    ensemble: &DiscretePathEnsemble<'_>,
    k: f64,
    n_prime: f64,
    times: &[f64],
) -> Result<CdReport> {
    if !core::ptr::eq(plan.space(), ensemble.space()) && plan.space() != ensemble.space() {
        return Err(Error::SpaceMismatch);
    }
    let (mu0, mu1) = (plan.source(), plan.target());
    for mu in [mu0, mu1] {
        if let Some(i) = mu.singular_cell() {
            return Err(Error::SingularMass { index: i, mass: mu.mass()[i] });
        }
    }
    let space = plan.space();
    let a0: Vec<f64> = plan.entries().iter().map(|e| inv_root_density(mu0, e.0, n_prime)).collect::<Result<_>>()?;
    let a1: Vec<f64> = plan.entries().iter().map(|e| inv_root_density(mu1, e.1, n_prime)).collect::<Result<_>>()?;
    let s0 = -renyi_entropy(mu0, n_prime)?;
    let s1 = -renyi_entropy(mu1, n_prime)?;

    let mut report = CdReport {
        k,
        n_prime,
        times: times.to_vec(),
        lhs: Vec::with_capacity(times.len()),
        rhs: Vec::with_capacity(times.len()),
        deficit: Vec::with_capacity(times.len()),
        rhs_convex: (k == 0.0).then(Vec::new),
        infinite_pairs: 0,
        pointwise_violations: 0,
        worst_pointwise: 0.0,
    };
    let mut infinite = vec![false; plan.entries().len()];
    for &t in times {
        let step = step_of(ensemble, t)?;
        let mu_t = ensemble.measure_at(step)?;
        let lhs = -renyi_entropy(&mu_t, n_prime)?;
        let mut rhs = 0.0;
        for (e, &(i, j, q)) in plan.entries().iter().enumerate() {
            let theta = space.dist(i, j);
            let (ta, tb) = (tau_of(k, n_prime, 1.0 - t, theta)?, tau_of(k, n_prime, t, theta)?);
            if (ta.is_infinite() || tb.is_infinite()) && q > MASS_FLOOR {
                infinite[e] = true;
                rhs = f64::INFINITY;
            } else if ta.is_finite() && tb.is_finite() {
                rhs += q * (ta * a0[e] + tb * a1[e]);
            }
        }
        report.lhs.push(lhs);
        report.rhs.push(rhs);
        report.deficit.push(rhs - lhs);
        if let Some(c) = report.rhs_convex.as_mut() {
            c.push((1.0 - t) * s0 + t * s1);
        }
    }
    report.infinite_pairs = infinite.iter().filter(|&&b| b).count();
    let violations = cd_pointwise_check(ensemble, k, n_prime, 0.0)?;
    report.pointwise_violations = violations.len();
    report.worst_pointwise = violations.iter().map(|v| v.excess).fold(0.0, f64::max);
    Ok(report)
}

/// Runs [`cd_integral_check`] for `N′ ∈ {N, N+1, 2N}`.
pub fn cd_sweep(
    plan: &TransportPlan<'_>,
    ensemble: &DiscretePathEnsemble<'_>,
    k: f64,
    n: f64,
    times: &[f64],
) -> Result<Vec<CdReport>> {
    let mut ns = vec![n, n + 1.0, 2.0 * n];
    ns.dedup();
    ns.iter().map(|&np| cd_integral_check(plan, ensemble, k, np, times)).collect()
}

/// Self-calibrating tolerance: five times the deficit observed for the same
/// configuration at doubled resolution.
pub fn calibrated_tolerance(fine_deficit: f64) -> f64 {
    5.0 * fine_deficit.abs()
}

/// A chain and time at which the pointwise inequality fails.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointwiseViolation {
    pub chain: usize,
    pub step: usize,
    pub time: f64,
    /// `ρ_t^{−1/N}(γ_t)`.
    pub lhs: f64,
    /// `τ^{(1−t)} ρ₀^{−1/N}(γ₀) + τ^{(t)} ρ₁^{−1/N}(γ₁)`.
    pub rhs: f64,
    pub excess: f64,
}

/// Checks `ρ_t^{−1/N}(γ_t) ≥ τ^{(1−t)}_{K,N}(|γ̇|) ρ₀^{−1/N}(γ₀) + τ^{(t)}_{K,N}(|γ̇|) ρ₁^{−1/N}(γ₁)`
/// along every chain at every interior dyadic time, with densities of the
/// pushed-forward measures. Infinite densities (mass on apex cells) give
/// `ρ^{−1/N} = 0`.
pub fn cd_pointwise_check(ensemble: &DiscretePathEnsemble<'_>, k: f64, n: f64, tol: f64) -> Result<Vec<PointwiseViolation>> {
    let space = ensemble.space();
    let steps = ensemble.steps();
    let dens: Vec<Vec<f64>> = (0..=steps)
        .map(|s| ensemble.measure_at(s).map(|m| m.density().to_vec()))
        .collect::<Result<_>>()?;
    let root = |rho: f64| math::powf(rho, -1.0 / n);
    let mut out = Vec::new();
    for (c, chain) in ensemble.chains().iter().enumerate() {
        let (x0, x1) = (chain.start(), chain.end());
        let theta = space.dist(x0, x1);
        let (r0, r1) = (root(dens[0][x0]), root(dens[steps][x1]));
        for step in 1..steps {
            let t = ensemble.time(step);
            let lhs = root(dens[step][chain.points[step]]);
            let rhs = tau_of(k, n, 1.0 - t, theta)? * r0 + tau_of(k, n, t, theta)? * r1;
            let excess = rhs - lhs;
            if excess > tol {
                out.push(PointwiseViolation { chain: c, step, time: t, lhs, rhs, excess });
            }
        }
    }
    Ok(out)
}

/// Setup of the wide-base counterexample on a Euclidean cone.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CounterexampleConfig {
    /// Interval or circle of diameter larger than `π`.
    pub base: ManifoldDescriptor,
    /// Length of the intervals `I` and `J`.
    pub r: f64,
    pub eps: f64,
    pub n: f64,
    /// Radial cells in each of `(0, ε]` and `[1−ε, 1]`.
    pub fine_cells: usize,
    /// Radial cells in `(ε, 1−ε)`.
    pub bulk_cells: usize,
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            base: ManifoldDescriptor::interval(3.5, 35),
            r: 0.2,
            eps: 0.01,
            n: 1.0,
            fine_cells: 8,
            bulk_cells: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CounterexampleRecord {
    pub eps: f64,
    pub n: f64,
    /// Number of cone cells, apex excluded.
    pub cone_cells: usize,
    /// Smallest base distance between the sampled `I` and `J` cells.
    pub separation: f64,
    /// `−S_{N+1}(μ₀)`.
    pub endpoint_entropy: f64,
    /// `−S_{N+1}(μ₁)`.
    pub endpoint_entropy_target: f64,
    /// `(Rε)^{1/(N+1)}`, the continuum upper bound for `endpoint_entropy`.
    pub endpoint_bound: f64,
    /// `−m_N(B_ε)^{1/(N+1)}`: the entropy of the normalised reference measure
    /// on `B_ε`, a lower bound for `S_{N+1}` of anything supported there.
    pub midpoint_entropy_bound: f64,
    /// `−(2R ε^{N+1}/(N+1))^{1/(N+1)}`, the continuum value of the bound.
    pub midpoint_bound_continuum: f64,
    /// `S_{N+1}(μ_{1/2})`.
    pub measured_midpoint_entropy: f64,
    /// `S_{N+1}(μ_{1/2}) − ½(S_{N+1}(μ₀) + S_{N+1}(μ₁))`.
    pub convexity_gap: f64,
    /// Mass of `μ_{1/2}` outside `B_ε`.
    pub mass_outside_ball: f64,
    /// Mass of `μ_{1/2}` on the apex cell.
    pub apex_mass: f64,
    pub violated: bool,
}

/// Builds uniform measures on `I × [1−ε, 1]` and `J × [1−ε, 1]` in the
/// `N`-Euclidean cone over a base of diameter larger than `π`, transports one
/// onto the other and compares the midpoint entropy with the endpoints.
pub fn counterexample_run(cfg: &CounterexampleConfig) -> Result<CounterexampleRecord> {
    let setup = |msg: &str| Err(Error::CounterexampleSetup(msg.into()));
    if !(cfg.eps > 0.0 && cfg.eps < 0.5) {
        return setup("ε must lie in (0, ½)");
    }
    if !(cfg.r > 0.0 && cfg.n >= 1.0 && cfg.fine_cells >= 1 && cfg.bulk_cells >= 1) {
        return setup("R, N, and cell counts must be positive (N ≥ 1)");
    }
    let (count, h) = match cfg.base {
        ManifoldDescriptor::Interval { length, resolution } => (resolution, length / resolution as f64),
        ManifoldDescriptor::Circle { radius, resolution } => (resolution, radius * 2.0 * PI / resolution as f64),
        _ => return setup("base must be an interval or a circle"),
    };
    let base = build_space(&cfg.base)?;
    if base.diameter() <= PI {
        return setup("base diameter must exceed π");
    }
    let width = math::round(cfg.r / h).max(1.0) as usize;
    if 2 * width > count {
        return setup("intervals I and J do not fit in the base");
    }
    let i_cells: Vec<usize> = (0..width).collect();
    let j_start = match cfg.base {
        ManifoldDescriptor::Circle { .. } => count / 2,
        _ => count - width,
    };
    let j_cells: Vec<usize> = (j_start..j_start + width).collect();
    let separation = i_cells
        .iter()
        .flat_map(|&i| j_cells.iter().map(move |&j| (i, j)))
        .map(|(i, j)| base.dist(i, j))
        .fold(f64::INFINITY, f64::min);
    if separation <= PI {
        return Err(Error::CounterexampleSetup(format!("I and J are only {separation} apart, need more than π")));
    }

    let eps = cfg.eps;
    let mut edges = Vec::new();
    for k in 0..cfg.fine_cells {
        edges.push(eps * k as f64 / cfg.fine_cells as f64);
    }
    for k in 0..cfg.bulk_cells {
        edges.push(eps + (1.0 - 2.0 * eps) * k as f64 / cfg.bulk_cells as f64);
    }
    for k in 0..=cfg.fine_cells {
        edges.push(1.0 - eps + eps * k as f64 / cfg.fine_cells as f64);
    }
    let grid = RadialGrid::from_edges(&edges)?;
    let m = grid.len();
    let opts = ConeOptions { allow_wide_base: true, ..ConeOptions::default() };
    let cone = build_cone(&base, ConeKind::Euclidean, cfg.n, grid, opts)?;
    let space = cone.mms();

    let top: Vec<usize> = (m - cfg.fine_cells..m).collect();
    let bottom: Vec<usize> = (0..cfg.fine_cells).collect();
    let cells = |base_cells: &[usize], radial: &[usize]| -> Vec<usize> {
        base_cells.iter().flat_map(|&i| radial.iter().map(move |&j| i * m + j)).collect()
    };
    let mu0 = DiscreteMeasure::uniform_on(space, &cells(&i_cells, &top))?;
    let mu1 = DiscreteMeasure::uniform_on(space, &cells(&j_cells, &top))?;
    let plan = solve_ot(&mu0, &mu1)?;
    let ens = interpolate(&plan, 1)?;
    let mid = ens.measure_at(1)?;

    let np = cfg.n + 1.0;
    let s0 = renyi_entropy(&mu0, np)?;
    let s1 = renyi_entropy(&mu1, np)?;
    let s_half = renyi_entropy(&mid, np)?;

    let mut ball: Vec<usize> = cells(&i_cells, &bottom);
    ball.extend(cells(&j_cells, &bottom));
    let apex = cone.apex_index(crate::cones::Pole::South).unwrap_or(usize::MAX);
    ball.push(apex);
    let ball_weight: f64 = ball.iter().map(|&c| space.weight(c)).sum();
    let inside: f64 = ball.iter().map(|&c| mid.mass()[c]).sum();

    let gap = s_half - 0.5 * (s0 + s1);
    Ok(CounterexampleRecord {
        eps,
        n: cfg.n,
        cone_cells: base.len() * m,
        separation,
        endpoint_entropy: -s0,
        endpoint_entropy_target: -s1,
        endpoint_bound: math::powf(cfg.r * eps, 1.0 / np),
        midpoint_entropy_bound: -math::powf(ball_weight, 1.0 / np),
        midpoint_bound_continuum: -math::powf(2.0 * cfg.r / np * math::powf(eps, np), 1.0 / np),
        measured_midpoint_entropy: s_half,
        convexity_gap: gap,
        mass_outside_ball: (1.0 - inside).max(0.0),
        apex_mass: mid.mass()[apex],
        violated: gap > 0.0,
    })
}

/// Least-squares slope of `ln |y|` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let lx: Vec<f64> = x.iter().map(|v| math::ln(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| math::ln(math::abs(*v))).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}
