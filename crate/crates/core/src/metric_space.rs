//! Finite samples of metric measure spaces.
//!
//! A [`FiniteMetricMeasureSpace`] is a distance matrix together with a
//! positive weight per point; the weight is the reference measure of the
//! cell the point represents. [`build_space`] realises the model spaces used
//! throughout the crate (circles, round spheres, intervals and products)
//! with exact geodesic distances and simple quadrature weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, PI, TAU};
use crate::{Error, Result};

/// Default tolerance for [`validate_metric`].
pub const TOL_METRIC: f64 = 1e-9;
/// Tolerance on the total mass of a [`DiscreteMeasure`].
pub const TOL_MASS: f64 = 1e-12;

/// Which collapsed fibre an apex cell stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Pole {
    /// `r = 0`: the origin of a Euclidean cone or the south pole.
    South,
    /// `r = π/√κ` for `κ > 0`: the north pole.
    North,
}

/// Per-point coordinate record.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum PointLabel {
    /// Intrinsic coordinates: angle on a circle, position on an interval,
    /// colatitudes then longitude on a sphere, concatenated for products,
    /// with the radial coordinate appended on cones.
    Coords(Vec<f64>),
    /// A collapsed cone fibre. Apex cells are the only points allowed to
    /// carry zero weight.
    Apex(Pole),
}

impl PointLabel {
    pub fn is_apex(&self) -> bool {
        matches!(self, PointLabel::Apex(_))
    }

    pub fn coords(&self) -> Option<&[f64]> {
        match self {
            PointLabel::Coords(c) => Some(c),
            PointLabel::Apex(_) => None,
        }
    }
}

/// Description of a model space to sample.
///
/// `resolution` is the number of sample points for circles and intervals.
/// For a sphere of dimension `d ≥ 2` it is the number of cells per
/// colatitude angle; the longitude gets twice as many, so a 2-sphere at
/// resolution `m` has `m · 2m` points. A 1-sphere is sampled like a circle.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(
    feature = "serde",
    serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)
)]
pub enum ManifoldDescriptor {
    Circle { radius: f64, resolution: usize },
    Sphere { dim: usize, radius: f64, resolution: usize },
    Interval { length: f64, resolution: usize },
    Product { factors: Vec<ManifoldDescriptor> },
}

impl ManifoldDescriptor {
    pub fn circle(radius: f64, resolution: usize) -> Self {
        ManifoldDescriptor::Circle { radius, resolution }
    }

    pub fn sphere(dim: usize, radius: f64, resolution: usize) -> Self {
        ManifoldDescriptor::Sphere { dim, radius, resolution }
    }

    pub fn interval(length: f64, resolution: usize) -> Self {
        ManifoldDescriptor::Interval { length, resolution }
    }

    pub fn product(factors: Vec<ManifoldDescriptor>) -> Self {
        ManifoldDescriptor::Product { factors }
    }

    /// Topological dimension of the described manifold.
    pub fn dimension(&self) -> usize {
        match self {
            ManifoldDescriptor::Circle { .. } | ManifoldDescriptor::Interval { .. } => 1,
            ManifoldDescriptor::Sphere { dim, .. } => *dim,
            ManifoldDescriptor::Product { factors } => factors.iter().map(Self::dimension).sum(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_res = |resolution: usize| {
            if resolution < 2 {
                Err(Error::ResolutionTooSmall { resolution, minimum: 2 })
            } else {
                Ok(())
            }
        };
        match *self {
            ManifoldDescriptor::Circle { radius, resolution } => {
                positive("radius", radius)?;
                check_res(resolution)
            }
            ManifoldDescriptor::Sphere { dim, radius, resolution } => {
                if dim < 1 {
                    return Err(Error::InvalidDescriptor(format!("sphere dimension {dim} < 1")));
                }
                positive("radius", radius)?;
                check_res(resolution)
            }
            ManifoldDescriptor::Interval { length, resolution } => {
                positive("length", length)?;
                check_res(resolution)
            }
            ManifoldDescriptor::Product { ref factors } => {
                if factors.is_empty() {
                    return Err(Error::InvalidDescriptor("product without factors".into()));
                }
                factors.iter().try_for_each(Self::validate)
            }
        }
    }
}

fn positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDescriptor(format!("{name} must be positive, got {value}")))
    }
}

/// A point sample with distances and cell weights, standing in for `(M, d, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricMeasureSpace {
    n: usize,
    dist: Vec<f64>,
    weight: Vec<f64>,
    labels: Vec<PointLabel>,
    diameter_cap: Option<f64>,
}

impl FiniteMetricMeasureSpace {
    /// Assembles a space from a row-major `n × n` distance matrix, weights and
    /// labels. Only shapes are checked here; use [`validate_metric`] for the
    /// metric axioms.
    pub fn from_parts(dist: Vec<f64>, weight: Vec<f64>, labels: Vec<PointLabel>) -> Result<Self> {
        let n = weight.len();
        if n == 0 {
            return Err(Error::InvalidDescriptor("empty space".into()));
        }
        if dist.len() != n * n {
            return Err(Error::LengthMismatch { expected: n * n, got: dist.len() });
        }
        if labels.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: labels.len() });
        }
        Ok(FiniteMetricMeasureSpace { n, dist, weight, labels, diameter_cap: None })
    }

    /// Like [`from_parts`](Self::from_parts) with coordinate-free labels.
    pub fn from_matrix(dist: Vec<f64>, weight: Vec<f64>) -> Result<Self> {
        let labels = (0..weight.len()).map(|_| PointLabel::Coords(Vec::new())).collect();
        Self::from_parts(dist, weight, labels)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    /// Row-major distance matrix.
    pub fn distances(&self) -> &[f64] {
        &self.dist
    }

    #[inline]
    pub fn weight(&self, i: usize) -> f64 {
        self.weight[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weight
    }

    pub fn labels(&self) -> &[PointLabel] {
        &self.labels
    }

    pub fn total_weight(&self) -> f64 {
        self.weight.iter().sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    pub fn diameter_cap(&self) -> Option<f64> {
        self.diameter_cap
    }

    /// Sets the diameter cap, rejecting spaces whose diameter exceeds it by
    /// more than `tol`.
    pub fn with_diameter_cap(mut self, cap: f64, tol: f64) -> Result<Self> {
        let diameter = self.diameter();
        if diameter > cap + tol {
            return Err(Error::DiameterExceedsCap { diameter, cap });
        }
        self.diameter_cap = Some(cap);
        Ok(self)
    }

    /// Sets the cap without checking it. Used for cones over wide bases where
    /// the base distance is truncated at `π` inside the cone formulas.
    pub(crate) fn set_cap_unchecked(&mut self, cap: f64) {
        self.diameter_cap = Some(cap);
    }

    pub fn min_positive_distance(&self) -> f64 {
        self.dist.iter().copied().filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min)
    }

    /// Largest nearest-neighbour distance among positive-weight points; a
    /// computable proxy for the fill distance of the sample.
    pub fn max_nearest_neighbor_distance(&self) -> f64 {
        let active: Vec<usize> = (0..self.n).filter(|&i| self.weight[i] > 0.0).collect();
        let mut worst: f64 = 0.0;
        for &i in &active {
            let row = self.row(i);
            let nn = active
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| row[j])
                .fold(f64::INFINITY, f64::min);
            if nn.is_finite() {
                worst = worst.max(nn);
            }
        }
        worst
    }

    /// Half the smallest nonzero distance: the resolution-adaptive default
    /// for [`antipode_set`].
    pub fn default_antipode_tol(&self) -> f64 {
        0.5 * self.min_positive_distance()
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.n })
        }
    }
}

/// One failed metric-measure axiom.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Violation {
    NonFinite { i: usize, j: usize },
    Diagonal { i: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    Asymmetry { i: usize, j: usize, excess: f64 },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
    Weight { i: usize, value: f64 },
    Cap { i: usize, j: usize, value: f64 },
}

#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn count_triangle(&self) -> usize {
        self.violations.iter().filter(|v| matches!(v, Violation::Triangle { .. })).count()
    }

    pub fn count_asymmetry(&self) -> usize {
        self.violations.iter().filter(|v| matches!(v, Violation::Asymmetry { .. })).count()
    }
}

/// Lists every violation of the metric measure axioms exceeding `tol`.
///
/// The triangle check is cubic in the number of points. Weights must be
/// positive except on apex cells, which carry zero weight.
pub fn validate_metric(space: &FiniteMetricMeasureSpace, tol: f64) -> ValidationReport {
    let n = space.len();
    let mut violations = Vec::new();
    for i in 0..n {
        let d = space.dist(i, i);
        if d.abs() > tol {
            violations.push(Violation::Diagonal { i, value: d });
        }
        let w = space.weight(i);
        let weight_ok = w.is_finite() && (w > 0.0 || (w == 0.0 && space.labels[i].is_apex()));
        if !weight_ok {
            violations.push(Violation::Weight { i, value: w });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (space.dist(i, j), space.dist(j, i));
            if !a.is_finite() || !b.is_finite() {
                violations.push(Violation::NonFinite { i, j });
                continue;
            }
            if a < -tol || b < -tol {
                violations.push(Violation::Negative { i, j, value: a.min(b) });
            }
            if (a - b).abs() > tol {
                violations.push(Violation::Asymmetry { i, j, excess: (a - b).abs() });
            }
            if let Some(cap) = space.diameter_cap {
                if a.max(b) > cap + tol {
                    violations.push(Violation::Cap { i, j, value: a.max(b) });
                }
            }
        }
    }
    for i in 0..n {
        let row_i = space.row(i);
        for k in (i + 1)..n {
            let direct = row_i[k];
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let excess = direct - (row_i[j] + space.dist(j, k));
                if excess > tol {
                    violations.push(Violation::Triangle { i, j, k, excess });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// All points at distance `π` (within `tol`) from point `i`.
pub fn antipode_set(space: &FiniteMetricMeasureSpace, i: usize, tol: f64) -> Result<Vec<usize>> {
    if space.diameter_cap.is_none() {
        return Err(Error::DiameterCapUnset);
    }
    space.check_index(i)?;
    Ok(space
        .row(i)
        .iter()
        .enumerate()
        .filter(|&(_, &d)| (d - PI).abs() <= tol)
        .map(|(j, _)| j)
        .collect())
}

/// Discrete midpoint of `i` and `j`: the sample point minimising
/// `max(|d(i,k) - d(i,j)/2|, |d(k,j) - d(i,j)/2|)`, smallest index on ties.
pub fn midpoint_index(space: &FiniteMetricMeasureSpace, i: usize, j: usize) -> usize {
    midpoint_with_objective(space, i, j).0
}

/// [`midpoint_index`] together with the attained objective value.
pub fn midpoint_with_objective(space: &FiniteMetricMeasureSpace, i: usize, j: usize) -> (usize, f64) {
    if i == j {
        return (i, 0.0);
    }
    let half = 0.5 * space.dist(i, j);
    let (row_i, row_j) = (space.row(i), space.row(j));
    let mut best = (0, f64::INFINITY);
    for k in 0..space.len() {
        let obj = (row_i[k] - half).abs().max((row_j[k] - half).abs());
        if obj < best.1 {
            best = (k, obj);
        }
    }
    best
}

/// Samples the model space described by `desc`.
///
/// Circles use equispaced angles starting at 0 with uniform weights;
/// intervals use cell midpoints; spheres use a colatitude/longitude grid with
/// midpoint-rule area weights; products take the Cartesian product with the
/// last factor varying fastest, distance `√(Σ dᵢ²)` and product weights.
pub fn build_space(desc: &ManifoldDescriptor) -> Result<FiniteMetricMeasureSpace> {
    desc.validate()?;
    let sample = sample_factor(desc);
    FiniteMetricMeasureSpace::from_parts(sample.dist, sample.weight, sample.labels)
}

struct Sample {
    dist: Vec<f64>,
    weight: Vec<f64>,
    labels: Vec<PointLabel>,
}

fn sample_factor(desc: &ManifoldDescriptor) -> Sample {
    match *desc {
        ManifoldDescriptor::Circle { radius, resolution } => sample_circle(radius, resolution),
        ManifoldDescriptor::Sphere { dim: 1, radius, resolution } => sample_circle(radius, resolution),
        ManifoldDescriptor::Sphere { dim, radius, resolution } => sample_sphere(dim, radius, resolution),
        ManifoldDescriptor::Interval { length, resolution } => sample_interval(length, resolution),
        ManifoldDescriptor::Product { ref factors } => {
            let mut acc = sample_factor(&factors[0]);
            acc.dist.iter_mut().for_each(|d| *d *= *d);
            for f in &factors[1..] {
                acc = product(&acc, &sample_factor(f));
            }
            acc.dist.iter_mut().for_each(|d| *d = math::sqrt(*d));
            acc
        }
    }
}

fn sample_circle(radius: f64, n: usize) -> Sample {
    let step = TAU / n as f64;
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let k = i.abs_diff(j).min(n - i.abs_diff(j));
            dist[i * n + j] = radius * k as f64 * step;
        }
    }
    Sample {
        dist,
        weight: vec![radius * step; n],
        labels: (0..n).map(|i| PointLabel::Coords(vec![i as f64 * step])).collect(),
    }
}

fn sample_interval(length: f64, n: usize) -> Sample {
    let h = length / n as f64;
    let pos: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            dist[i * n + j] = i.abs_diff(j) as f64 * h;
        }
    }
    Sample {
        dist,
        weight: vec![h; n],
        labels: pos.into_iter().map(|x| PointLabel::Coords(vec![x])).collect(),
    }
}

/// Hyperspherical grid on `S^dim(radius)`: `dim - 1` colatitudes with
/// `m` midpoint cells on `(0, π)` and a longitude with `2m` cells from 0.
fn sample_sphere(dim: usize, radius: f64, m: usize) -> Sample {
    let colat_step = PI / m as f64;
    let long_count = 2 * m;
    let long_step = TAU / long_count as f64;

    let mut angles: Vec<Vec<f64>> = vec![Vec::new()];
    let mut cell: Vec<f64> = vec![1.0];
    for axis in 0..dim {
        let last = axis + 1 == dim;
        let (count, step) = if last { (long_count, long_step) } else { (m, colat_step) };
        let mut next_angles = Vec::with_capacity(angles.len() * count);
        let mut next_cell = Vec::with_capacity(angles.len() * count);
        for (a, &c) in angles.iter().zip(&cell) {
            for k in 0..count {
                let phi = if last { k as f64 * step } else { (k as f64 + 0.5) * step };
                // colatitude `axis` carries sin^(dim-1-axis) in the volume element
                let factor = if last { step } else { math::powi(math::sin(phi), (dim - 1 - axis) as i32) * step };
                let mut na = a.clone();
                na.push(phi);
                next_angles.push(na);
                next_cell.push(c * factor);
            }
        }
        angles = next_angles;
        cell = next_cell;
    }

    let scale = math::powi(radius, dim as i32);
    let points: Vec<Vec<f64>> = angles.iter().map(|a| embed_sphere(a)).collect();
    let n = points.len();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = radius * unit_sphere_angle(&points[i], &points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    Sample {
        dist,
        weight: cell.into_iter().map(|c| c * scale).collect(),
        labels: angles.into_iter().map(PointLabel::Coords).collect(),
    }
}

/// Unit vector in `R^{d+1}` for hyperspherical angles `(φ₁, …, φ_d)`.
pub(crate) fn embed_sphere(angles: &[f64]) -> Vec<f64> {
    let d = angles.len();
    let mut out = Vec::with_capacity(d + 1);
    let mut sin_prod = 1.0;
    for (k, &phi) in angles.iter().enumerate() {
        if k + 1 == d {
            out.push(sin_prod * math::cos(phi));
            out.push(sin_prod * math::sin(phi));
        } else {
            out.push(sin_prod * math::cos(phi));
            sin_prod *= math::sin(phi);
        }
    }
    out
}

/// Angle between unit vectors, `2·atan2(|p−q|, |p+q|)`; accurate at both 0 and π.
pub(crate) fn unit_sphere_angle(p: &[f64], q: &[f64]) -> f64 {
    let (mut diff, mut sum) = (0.0, 0.0);
    for (a, b) in p.iter().zip(q) {
        diff += (a - b) * (a - b);
        sum += (a + b) * (a + b);
    }
    2.0 * math::atan2(math::sqrt(diff), math::sqrt(sum))
}

/// Cartesian product. `a` carries squared distances, `b` plain ones; the
/// result carries squared distances.
fn product(a: &Sample, b: &Sample) -> Sample {
    let (na, nb) = (a.weight.len(), b.weight.len());
    let n = na * nb;
    let mut dist = vec![0.0; n * n];
    for ia in 0..na {
        for ib in 0..nb {
            let p = ia * nb + ib;
            for ja in 0..na {
                let da = a.dist[ia * na + ja];
                for jb in 0..nb {
                    let db = b.dist[ib * nb + jb];
                    dist[p * n + ja * nb + jb] = da + db * db;
                }
            }
        }
    }
    let mut weight = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for ia in 0..na {
        for ib in 0..nb {
            weight.push(a.weight[ia] * b.weight[ib]);
            let mut c = a.labels[ia].coords().unwrap_or(&[]).to_vec();
            c.extend_from_slice(b.labels[ib].coords().unwrap_or(&[]));
            labels.push(PointLabel::Coords(c));
        }
    }
    Sample { dist, weight, labels }
}

/// A probability measure on a sampled space, `μ = ρ m`.
///
/// `mass[i]` is the measure of cell `i` and `density[i] = mass[i] / weight[i]`.
/// Cells with zero weight (apexes) get density 0 when empty and `+∞` when
/// they carry mass; the latter signals a measure that is not absolutely
/// continuous.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure<'a> {
    space: &'a FiniteMetricMeasureSpace,
    mass: Vec<f64>,
    density: Vec<f64>,
}

impl<'a> DiscreteMeasure<'a> {
    /// Wraps a mass vector that already sums to one within [`TOL_MASS`].
    pub fn from_mass(space: &'a FiniteMetricMeasureSpace, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != space.len() {
            return Err(Error::LengthMismatch { expected: space.len(), got: mass.len() });
        }
        if let Some(i) = mass.iter().position(|m| !(m.is_finite() && *m >= 0.0)) {
            return Err(Error::Domain(format!("mass[{i}] = {} is not a nonnegative number", mass[i])));
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > TOL_MASS {
            return Err(Error::Unnormalized { total });
        }
        let density = mass
            .iter()
            .zip(space.weights())
            .map(|(&m, &w)| {
                if w > 0.0 {
                    m / w
                } else if m > 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            })
            .collect();
        Ok(DiscreteMeasure { space, mass, density })
    }

    /// Normalises a nonnegative mass vector with positive total.
    pub fn from_unnormalized(space: &'a FiniteMetricMeasureSpace, mut mass: Vec<f64>) -> Result<Self> {
        let total: f64 = mass.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::Unnormalized { total });
        }
        mass.iter_mut().for_each(|m| *m /= total);
        Self::from_mass(space, mass)
    }

    /// The measure with density proportional to `f` w.r.t. the cell weights.
    pub fn from_density_fn(space: &'a FiniteMetricMeasureSpace, f: impl Fn(usize) -> f64) -> Result<Self> {
        let mass = (0..space.len()).map(|i| f(i) * space.weight(i)).collect();
        Self::from_unnormalized(space, mass)
    }

    pub fn dirac(space: &'a FiniteMetricMeasureSpace, i: usize) -> Result<Self> {
        space.check_index(i)?;
        let mut mass = vec![0.0; space.len()];
        mass[i] = 1.0;
        Self::from_mass(space, mass)
    }

    /// Normalised reference measure restricted to `cells`.
    pub fn uniform_on(space: &'a FiniteMetricMeasureSpace, cells: &[usize]) -> Result<Self> {
        let mut mass = vec![0.0; space.len()];
        for &c in cells {
            space.check_index(c)?;
            mass[c] = space.weight(c);
        }
        Self::from_unnormalized(space, mass)
    }

    /// Normalised reference measure on the whole space.
    pub fn uniform(space: &'a FiniteMetricMeasureSpace) -> Result<Self> {
        Self::from_unnormalized(space, space.weights().to_vec())
    }

    pub fn space(&self) -> &'a FiniteMetricMeasureSpace {
        self.space
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    /// Cells carrying mass above `floor`.
    pub fn support(&self, floor: f64) -> Vec<usize> {
        (0..self.mass.len()).filter(|&i| self.mass[i] > floor).collect()
    }

    /// First cell with positive mass but zero weight, if any.
    pub fn singular_cell(&self) -> Option<usize> {
        (0..self.mass.len()).find(|&i| self.mass[i] > 0.0 && self.space.weight(i) == 0.0)
    }

    pub(crate) fn same_space(&self, other: &DiscreteMeasure<'_>) -> bool {
        core::ptr::eq(self.space, other.space) || self.space == other.space
    }
}
