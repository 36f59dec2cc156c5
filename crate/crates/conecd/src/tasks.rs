//! Task runners. Each computes its full report in memory; nothing is written
//! until the run has succeeded.

use std::f64::consts::PI;

use conecd_core::cd::{
    calibrated_tolerance, cd_integral_check, counterexample_run, log_log_slope, CdReport, CounterexampleConfig,
    CounterexampleRecord,
};
use conecd_core::cones::{build_cone, ConeKind, ConeOptions, ConeSpace, RadialGrid};
use conecd_core::metric_space::{
    build_space, validate_metric, DiscreteMeasure, FiniteMetricMeasureSpace, ManifoldDescriptor, PointLabel,
};
use conecd_core::ricci::{
    euclid_cone_ricci, hess_v_cross_check, hess_w_fd_check, product_sphere_curvature_table, spherical_cone_ricci,
    BaseTerms, ConeTangent, CurvatureTable, LinearHeight, ModelManifold, WeightedManifoldPoint,
};
use conecd_core::spectral::{build_laplacian, lichnerowicz_check, poincare_check, SpectralReport};
use conecd_core::transport::{apex_mass, check_cyclic_monotonicity, interpolate, solve_ot, DiscretePathEnsemble, TransportPlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{refine, ConeConfig, DensitySpec, ExperimentConfig, Task};
use crate::error::{CliError, CliResult};
use crate::output::{csv_bytes, RunOutput};

pub fn run(task: Task, cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    cfg.check_task(task)?;
    let mut out = RunOutput::new(task, cfg);
    match task {
        Task::Validate => validate(cfg, &mut out)?,
        Task::Ot => ot(cfg, &mut out)?,
        Task::CdCheck => cd_check(cfg, &mut out)?,
        Task::Counterexample => counterexample(cfg, &mut out)?,
        Task::RicciTable => ricci_table(cfg, &mut out)?,
        Task::HessCheck => hess_check(cfg, &mut out)?,
        Task::Spectral => spectral(cfg, &mut out)?,
    }
    Ok(out)
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// A sampled base, optionally lifted to a cone.
pub enum Sample {
    Plain(FiniteMetricMeasureSpace),
    Cone(ConeSpace),
}

impl Sample {
    pub fn build(base: &ManifoldDescriptor, cone: Option<&ConeConfig>) -> CliResult<Self> {
        let space = build_space(base)?;
        let Some(c) = cone else {
            return Ok(Sample::Plain(space));
        };
        let grid = RadialGrid::for_kind(c.kind, c.radial_cells, c.r_max.unwrap_or(1.0))?;
        let options = ConeOptions { allow_wide_base: c.allow_wide_base, ..ConeOptions::default() };
        Ok(Sample::Cone(build_cone(&space, c.kind, c.n, grid, options)?))
    }

    pub fn mms(&self) -> &FiniteMetricMeasureSpace {
        match self {
            Sample::Plain(s) => s,
            Sample::Cone(c) => c.mms(),
        }
    }

    pub fn cone(&self) -> Option<&ConeSpace> {
        match self {
            Sample::Plain(_) => None,
            Sample::Cone(c) => Some(c),
        }
    }
}

fn planar(label: &PointLabel) -> (f64, f64) {
    match label {
        PointLabel::Coords(c) if c.len() >= 2 => {
            let (phi, r) = (c[0], c[c.len() - 1]);
            (r * phi.cos(), r * phi.sin())
        }
        PointLabel::Coords(c) => (c[0].cos(), c[0].sin()),
        PointLabel::Apex(_) => (0.0, 0.0),
    }
}

pub fn measure<'a>(space: &'a FiniteMetricMeasureSpace, spec: &DensitySpec) -> CliResult<DiscreteMeasure<'a>> {
    let labels = space.labels();
    Ok(match spec {
        DensitySpec::Uniform => DiscreteMeasure::uniform(space)?,
        DensitySpec::Dirac { index } => DiscreteMeasure::dirac(space, *index)?,
        DensitySpec::Cells { indices } => DiscreteMeasure::uniform_on(space, indices)?,
        DensitySpec::Masses { values } => {
            if values.len() != space.len() {
                return Err(config_error(format!("{} masses for {} points", values.len(), space.len())));
            }
            DiscreteMeasure::from_unnormalized(space, values.clone())?
        }
        DensitySpec::Affine { constant, coefficients } => DiscreteMeasure::from_density_fn(space, |i| match &labels[i] {
            PointLabel::Coords(c) => constant + c.iter().zip(coefficients).map(|(x, a)| x * a).sum::<f64>(),
            PointLabel::Apex(_) => *constant,
        })?,
        DensitySpec::Planar { constant, x, y } => DiscreteMeasure::from_density_fn(space, |i| {
            let (px, py) = planar(&labels[i]);
            constant + x * px + y * py
        })?,
    })
}

fn required<'a>(v: &'a Option<DensitySpec>, name: &str) -> CliResult<&'a DensitySpec> {
    v.as_ref().ok_or_else(|| config_error(format!("params.{name} is required for this task")))
}

#[derive(Serialize)]
struct ValidateResult {
    points: usize,
    weighted_points: usize,
    total_weight: f64,
    diameter: f64,
    diameter_cap: Option<f64>,
    min_positive_distance: f64,
    max_nearest_neighbor_distance: f64,
    violations: usize,
    asymmetry_violations: usize,
    triangle_violations: usize,
    valid: bool,
}

fn space_csv(space: &FiniteMetricMeasureSpace) -> CliResult<Vec<u8>> {
    csv_bytes(&["index", "weight", "label"], (0..space.len()).map(|i| {
        let label = match &space.labels()[i] {
            PointLabel::Coords(c) => c.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(" "),
            PointLabel::Apex(p) => format!("apex-{p:?}").to_lowercase(),
        };
        vec![i.to_string(), format!("{:e}", space.weight(i)), label]
    }))
}

fn validate(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let sample = Sample::build(cfg.require_base()?, cfg.cone.as_ref())?;
    let s = sample.mms();
    let rep = validate_metric(s, conecd_core::metric_space::TOL_METRIC);
    out.set_result(&ValidateResult {
        points: s.len(),
        weighted_points: s.weights().iter().filter(|&&w| w > 0.0).count(),
        total_weight: s.total_weight(),
        diameter: s.diameter(),
        diameter_cap: s.diameter_cap(),
        min_positive_distance: s.min_positive_distance(),
        max_nearest_neighbor_distance: s.max_nearest_neighbor_distance(),
        violations: rep.violations.len(),
        asymmetry_violations: rep.count_asymmetry(),
        triangle_violations: rep.count_triangle(),
        valid: rep.is_valid(),
    });
    out.add_file("space.csv", space_csv(s)?);
    Ok(())
}

#[derive(Serialize)]
struct OtResult {
    cost: f64,
    wasserstein2: f64,
    support_size: usize,
    cycle_length: usize,
    cyclic_violations: usize,
    worst_cycle_excess: f64,
    apex_mass: Option<f64>,
    levels: Option<u32>,
    merge_count: Option<usize>,
}

fn plan_csv(plan: &TransportPlan<'_>) -> CliResult<Vec<u8>> {
    csv_bytes(
        &["source", "target", "mass"],
        plan.entries().iter().map(|&(i, j, m)| vec![i.to_string(), j.to_string(), format!("{m:e}")]),
    )
}

fn ensemble_csv(ens: &DiscretePathEnsemble<'_>) -> CliResult<Vec<u8>> {
    let rows = ens.chains().iter().enumerate().flat_map(|(c, chain)| {
        chain.points.iter().enumerate().map(move |(k, &p)| {
            vec![c.to_string(), format!("{:e}", chain.mass), k.to_string(), format!("{}", ens.time(k)), p.to_string()]
        })
    });
    csv_bytes(&["chain", "mass", "step", "time", "point"], rows)
}

fn ot(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let sample = Sample::build(cfg.require_base()?, cfg.cone.as_ref())?;
    let s = sample.mms();
    let p = &cfg.params;
    let mu0 = measure(s, required(&p.source, "source")?)?;
    let mu1 = measure(s, required(&p.target, "target")?)?;
    let plan = solve_ot(&mu0, &mu1)?;
    let cycle_length = p.cycle_length.unwrap_or(if plan.entries().len() <= 300 { 3 } else { 2 });
    let cycles = check_cyclic_monotonicity(&plan, cycle_length, 1e-9)?;
    let apex = match sample.cone() {
        Some(c) => Some(apex_mass(&plan, c, c.base().default_antipode_tol())?),
        None => None,
    };
    let ens = p.levels.map(|l| interpolate(&plan, l)).transpose()?;
    out.set_result(&OtResult {
        cost: plan.cost(),
        wasserstein2: plan.wasserstein2(),
        support_size: plan.entries().len(),
        cycle_length,
        cyclic_violations: cycles.len(),
        worst_cycle_excess: cycles.iter().map(|c| c.excess).fold(0.0, f64::max),
        apex_mass: apex,
        levels: p.levels,
        merge_count: ens.as_ref().map(|e| e.merge_count()),
    });
    out.add_file("plan.csv", plan_csv(&plan)?);
    if let Some(e) = &ens {
        out.add_file("ensemble.csv", ensemble_csv(e)?);
    }
    Ok(())
}

#[derive(Serialize)]
struct CdResult {
    k: f64,
    n: f64,
    levels: u32,
    merge_count: usize,
    reports: Vec<CdReport>,
    /// Largest deficit per `N′` at doubled resolution.
    fine_max_deficit: Option<Vec<f64>>,
    tolerance: Vec<f64>,
    holds: Vec<bool>,
}

fn default_n(cfg: &ExperimentConfig, base: &ManifoldDescriptor) -> f64 {
    match &cfg.cone {
        Some(c) => c.n + 1.0,
        None => base.dimension() as f64,
    }
}

fn cd_reports(
    base: &ManifoldDescriptor,
    cone: Option<&ConeConfig>,
    cfg: &ExperimentConfig,
    k: f64,
    n_primes: &[f64],
    times: &[f64],
    levels: u32,
) -> CliResult<(Vec<CdReport>, usize, Vec<u8>)> {
    let sample = Sample::build(base, cone)?;
    let s = sample.mms();
    let mu0 = measure(s, required(&cfg.params.source, "source")?)?;
    let mu1 = measure(s, required(&cfg.params.target, "target")?)?;
    let plan = solve_ot(&mu0, &mu1)?;
    let ens = interpolate(&plan, levels)?;
    let reports = n_primes.iter().map(|&np| cd_integral_check(&plan, &ens, k, np, times)).collect::<Result<Vec<_>, _>>()?;
    Ok((reports, ens.merge_count(), plan_csv(&plan)?))
}

fn cd_check(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let base = cfg.require_base()?;
    let p = &cfg.params;
    let k = p.k.unwrap_or(0.0);
    let n = p.n.unwrap_or_else(|| default_n(cfg, base));
    let n_primes = p.n_primes.clone().unwrap_or_else(|| {
        let mut v = vec![n, n + 1.0, 2.0 * n];
        v.dedup();
        v
    });
    let levels = p.levels.unwrap_or(2);
    let times = p.times.clone().unwrap_or_else(|| vec![0.25, 0.5, 0.75]);
    let (reports, merge_count, plan) = cd_reports(base, cfg.cone.as_ref(), cfg, k, &n_primes, &times, levels)?;

    let fine = if p.calibrate {
        for spec in [&p.source, &p.target].into_iter().flatten() {
            if matches!(spec, DensitySpec::Dirac { .. } | DensitySpec::Cells { .. } | DensitySpec::Masses { .. }) {
                return Err(config_error("calibration needs resolution-independent densities"));
            }
        }
        let fine_base = refine(base);
        let fine_cone = cfg.cone.clone().map(|c| ConeConfig { radial_cells: 2 * c.radial_cells, ..c });
        let (fr, _, _) = cd_reports(&fine_base, fine_cone.as_ref(), cfg, k, &n_primes, &times, levels)?;
        Some(fr.iter().map(CdReport::max_deficit).collect::<Vec<_>>())
    } else {
        None
    };
    let tolerance: Vec<f64> = match &fine {
        Some(f) => f.iter().map(|&d| calibrated_tolerance(d)).collect(),
        None => vec![0.0; reports.len()],
    };
    let holds = reports.iter().zip(&tolerance).map(|(r, &t)| r.holds(t)).collect();
    out.set_result(&CdResult { k, n, levels, merge_count, reports, fine_max_deficit: fine, tolerance, holds });
    out.add_file("plan.csv", plan);
    Ok(())
}

#[derive(Serialize)]
struct CounterexampleResult {
    records: Vec<CounterexampleRecord>,
    violated_all: bool,
    endpoint_slope: Option<f64>,
    expected_endpoint_slope: f64,
    midpoint_bound_slope: Option<f64>,
}

fn counterexample(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let p = &cfg.params;
    let defaults = CounterexampleConfig::default();
    let eps = p.eps.clone().unwrap_or_else(|| vec![0.02, 0.01, 0.005]);
    if eps.is_empty() {
        return Err(config_error("params.eps must not be empty"));
    }
    let records = eps
        .iter()
        .map(|&e| {
            counterexample_run(&CounterexampleConfig {
                base: cfg.base.clone().unwrap_or_else(|| defaults.base.clone()),
                r: p.big_r.unwrap_or(defaults.r),
                eps: e,
                n: p.n.unwrap_or(defaults.n),
                fine_cells: p.fine_cells.unwrap_or(defaults.fine_cells),
                bulk_cells: p.bulk_cells.unwrap_or(defaults.bulk_cells),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let slope = |f: fn(&CounterexampleRecord) -> f64| {
        (eps.len() >= 2).then(|| log_log_slope(&eps, &records.iter().map(f).collect::<Vec<_>>()))
    };
    let rows = records.iter().map(|r| {
        vec![
            format!("{}", r.eps),
            r.cone_cells.to_string(),
            format!("{:e}", r.endpoint_entropy),
            format!("{:e}", r.midpoint_entropy_bound),
            format!("{:e}", r.measured_midpoint_entropy),
            format!("{:e}", r.convexity_gap),
            r.violated.to_string(),
        ]
    });
    let csv = csv_bytes(
        &["eps", "cone_cells", "endpoint_entropy", "midpoint_entropy_bound", "measured_midpoint_entropy", "convexity_gap", "violated"],
        rows,
    )?;
    out.set_result(&CounterexampleResult {
        violated_all: records.iter().all(|r| r.violated),
        endpoint_slope: slope(|r| r.endpoint_entropy),
        expected_endpoint_slope: 1.0 / (records[0].n + 1.0),
        midpoint_bound_slope: slope(|r| r.midpoint_entropy_bound.abs()),
        records,
    });
    out.add_file("records.csv", csv);
    Ok(())
}

fn ricci_table(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let table: CurvatureTable = product_sphere_curvature_table(cfg.params.r.unwrap_or(1.0))?;
    out.set_result(&table);
    Ok(())
}

#[derive(Serialize)]
struct HessDraw {
    draw: usize,
    kind: &'static str,
    r: f64,
    t: f64,
    v_norm: f64,
    ric_cone_weighted: f64,
    analytic_residual: f64,
    fd_residual: f64,
    hess_w_residual: f64,
    hess_v_residual: f64,
    cross_residual: f64,
}

#[derive(Serialize)]
struct HessResult {
    draws: usize,
    dimension: usize,
    n: f64,
    step: f64,
    max_analytic_residual: f64,
    max_fd_residual: f64,
    max_hess_w_residual: f64,
    max_hess_v_residual: f64,
    max_cross_residual: f64,
    pass: bool,
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn hess_draw(model: &ModelManifold, kind: ConeKind, n_big: f64, step: f64, seed: u64, draw: usize) -> CliResult<HessDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(draw as u64);
    let dim = model.ambient_dim();
    let x0 = model.base_point();
    let x = model.exp(&x0, &model.project_tangent(&x0, &gaussian(&mut rng, dim)), 1.0);
    let potential = LinearHeight { e: gaussian(&mut rng, dim) };
    let point = WeightedManifoldPoint::new(model.clone(), x.clone(), &potential)?;
    let mut v = model.project_tangent(&x, &gaussian(&mut rng, dim));
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    let scale = rng.random_range(0.1..1.5) / norm;
    v.iter_mut().for_each(|c| *c *= scale);
    let v_norm = norm * scale;
    let r = match kind {
        ConeKind::Spherical => rng.random_range(0.3..PI - 0.3),
        _ => rng.random_range(0.3..3.0),
    };
    let t = rng.random_range(-1.0..1.0);
    let tangent = ConeTangent { r, v_norm, t };
    let n = model.dim();
    let eval = match kind {
        ConeKind::Spherical => spherical_cone_ricci(&BaseTerms::at(&point, &v), n, n_big, &tangent)?,
        _ => euclid_cone_ricci(&BaseTerms::at(&point, &v), n, n_big, &tangent)?,
    };
    let gap = n_big - n as f64;
    let w = hess_w_fd_check(kind, n, n_big, &tangent, step)?;
    let c = hess_v_cross_check(kind, &point, &v, n_big, r, t, step)?;
    let grad_v = point.derivatives_fd(&v, step).0;
    let fd = eval.ric_cone + c.hess.fd + w.fd - (2.0 * c.cross.fd + grad_v * grad_v) / gap;
    Ok(HessDraw {
        draw,
        kind: if kind == ConeKind::Spherical { "spherical" } else { "euclidean" },
        r,
        t,
        v_norm,
        ric_cone_weighted: eval.ric_cone_weighted,
        analytic_residual: eval.residual,
        fd_residual: (fd - eval.ric_cone_weighted).abs(),
        hess_w_residual: w.residual,
        hess_v_residual: c.hess.residual,
        cross_residual: c.cross.residual,
    })
}

fn hess_check(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let base = cfg.base.clone().unwrap_or_else(|| ManifoldDescriptor::circle(1.0, 8));
    let model = ModelManifold::try_from(&base)?;
    let p = &cfg.params;
    let draws = p.draws.unwrap_or(200);
    let step = p.step.unwrap_or(conecd_core::ricci::FD_STEP);
    let n_big = p.n.unwrap_or(model.dim() as f64 + 1.0);
    if n_big <= model.dim() as f64 || n_big.is_nan() {
        return Err(config_error(format!("params.n = {n_big} must exceed the base dimension {}", model.dim())));
    }
    let kinds: Vec<ConeKind> = match &cfg.cone {
        Some(c) if matches!(c.kind, ConeKind::Kappa(_)) => return Err(config_error("hess-check supports euclidean and spherical cones")),
        Some(c) => vec![c.kind],
        None => vec![ConeKind::Euclidean, ConeKind::Spherical],
    };
    let rows: Vec<HessDraw> = (0..draws)
        .into_par_iter()
        .map(|d| hess_draw(&model, kinds[d % kinds.len()], n_big, step, cfg.seed, d))
        .collect::<CliResult<_>>()?;
    let max = |f: fn(&HessDraw) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let result = HessResult {
        draws,
        dimension: model.dim(),
        n: n_big,
        step,
        max_analytic_residual: max(|d| d.analytic_residual),
        max_fd_residual: max(|d| d.fd_residual),
        max_hess_w_residual: max(|d| d.hess_w_residual),
        max_hess_v_residual: max(|d| d.hess_v_residual),
        max_cross_residual: max(|d| d.cross_residual),
        pass: max(|d| d.analytic_residual) <= 1e-9 && max(|d| d.fd_residual) <= 1e-5,
    };
    let csv = csv_bytes(
        &["draw", "kind", "r", "t", "v_norm", "ric_cone_weighted", "analytic_residual", "fd_residual", "hess_w_residual", "hess_v_residual", "cross_residual"],
        rows.iter().map(|d| {
            vec![
                d.draw.to_string(),
                d.kind.to_string(),
                format!("{:e}", d.r),
                format!("{:e}", d.t),
                format!("{:e}", d.v_norm),
                format!("{:e}", d.ric_cone_weighted),
                format!("{:e}", d.analytic_residual),
                format!("{:e}", d.fd_residual),
                format!("{:e}", d.hess_w_residual),
                format!("{:e}", d.hess_v_residual),
                format!("{:e}", d.cross_residual),
            ]
        }),
    )?;
    out.set_result(&result);
    out.add_file("draws.csv", csv);
    Ok(())
}

#[derive(Serialize)]
struct PoincareSummary {
    test_functions: usize,
    bound: f64,
    slack: f64,
    max_ratio: f64,
    violations: usize,
    holds: bool,
    first_eigenvector_ratio: Option<f64>,
}

#[derive(Serialize)]
struct SpectralResult {
    #[serde(flatten)]
    gap: SpectralReport,
    gap_slack: f64,
    bandwidth: f64,
    nodes: usize,
    eigenvalues: Vec<f64>,
    poincare: PoincareSummary,
}

fn spectral(cfg: &ExperimentConfig, out: &mut RunOutput) -> CliResult<()> {
    let base = cfg.require_base()?;
    let sample = Sample::build(base, cfg.cone.as_ref())?;
    let p = &cfg.params;
    let l = build_laplacian(sample.mms(), p.bandwidth)?;
    let n = p.n.unwrap_or(match &cfg.cone {
        Some(c) => c.n,
        None => base.dimension() as f64,
    });
    let gap_slack = p.gap_slack.unwrap_or(0.1);
    let slack = p.slack.unwrap_or(0.05);
    let spec = l.spectrum();
    let gap = lichnerowicz_check(&l, n, gap_slack);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let count = p.test_functions.unwrap_or(50);
    let fs: Vec<Vec<f64>> = (0..count).map(|_| gaussian(&mut rng, l.len())).collect();
    let rep = poincare_check(&l, &fs, n, slack)?;
    let eig = poincare_check(&l, &spec.vectors[1..2], n, slack)?;
    let first: Vec<f64> = spec.values.iter().take(10).copied().collect();
    let csv = csv_bytes(&["index", "eigenvalue"], first.iter().enumerate().map(|(i, v)| vec![i.to_string(), format!("{v:e}")]))?;
    out.set_result(&SpectralResult {
        gap,
        gap_slack,
        bandwidth: l.eps(),
        nodes: l.len(),
        eigenvalues: first,
        poincare: PoincareSummary {
            test_functions: count,
            bound: rep.bound,
            slack,
            max_ratio: rep.max_ratio,
            violations: rep.violations.len(),
            holds: rep.holds(),
            first_eigenvector_ratio: eig.ratios[0],
        },
    });
    out.add_file("eigenvalues.csv", csv);
    Ok(())
}
