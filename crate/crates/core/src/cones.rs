//! Euclidean, spherical and `(κ, N)`-cones over a sampled base.
//!
//! Distances use the cosine laws of the model spaces of curvature `κ`,
//! rewritten in half-angle form so that nearby points keep full relative
//! precision:
//!
//! - `κ = 0`: `d² = (s−t)² + 4st·sin²(θ/2)`
//! - `κ > 0`: `sin²(√κ d/2) = sin²(√κ(s−t)/2) + sin(√κ s)·sin(√κ t)·sin²(θ/2)`
//! - `κ < 0`: `sinh²(√−κ d/2) = sinh²(√−κ(s−t)/2) + sinh(√−κ s)·sinh(√−κ t)·sin²(θ/2)`
//!
//! where `θ = d_base ∧ π`. The reference measure of the cell `(x_i, r_j)` is
//! `m(x_i)·S_κ(r_j)^N·Δr_j`; apex cells carry zero weight and sit at the end
//! of the point list (south first, then north).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{self, PI};
use crate::metric_space::{FiniteMetricMeasureSpace, PointLabel, TOL_METRIC};
use crate::{Error, Result};

pub use crate::metric_space::Pole;

/// Curvature of the model fibre.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum ConeKind {
    Euclidean,
    Spherical,
    Kappa(f64),
}

impl ConeKind {
    pub fn curvature(self) -> f64 {
        match self {
            ConeKind::Euclidean => 0.0,
            ConeKind::Spherical => 1.0,
            ConeKind::Kappa(k) => k,
        }
    }

    /// `π/√κ` for positive curvature, where the north pole sits.
    pub fn radial_extent(self) -> Option<f64> {
        let k = self.curvature();
        (k > 0.0).then(|| PI / math::sqrt(k))
    }

    pub fn has_north_pole(self) -> bool {
        self.curvature() > 0.0
    }

    /// `S_κ(r)`: `sin(√κ r)/√κ`, `r` or `sinh(√−κ r)/√−κ`. The spherical kind
    /// uses `sin r` exactly.
    pub fn s_kappa(self, r: f64) -> f64 {
        let k = self.curvature();
        if k > 0.0 {
            let a = math::sqrt(k);
            math::sin(a * r) / a
        } else if k < 0.0 {
            let a = math::sqrt(-k);
            math::sinh(a * r) / a
        } else {
            r
        }
    }

    /// Radial density `S_κ(r)^N` of the cone measure.
    pub fn radial_weight(self, r: f64, n_exp: f64) -> f64 {
        math::powf(self.s_kappa(r).max(0.0), n_exp)
    }

    fn check_radius(self, r: f64) -> Result<()> {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::Domain(format!("radial coordinate {r} must be finite and nonnegative")));
        }
        if let Some(top) = self.radial_extent() {
            if r > top * (1.0 + 1e-12) {
                return Err(Error::Domain(format!("radial coordinate {r} exceeds {top}")));
            }
        }
        Ok(())
    }
}

/// Distance between `(x, s)` and `(x', t)` where `d(x, x') = d_base`.
pub fn cone_distance(kind: ConeKind, d_base: f64, s: f64, t: f64) -> Result<f64> {
    if d_base.is_nan() || d_base < 0.0 {
        return Err(Error::Domain(format!("base distance {d_base} must be nonnegative")));
    }
    if let ConeKind::Kappa(k) = kind {
        if !k.is_finite() {
            return Err(Error::Domain(format!("curvature {k} must be finite")));
        }
    }
    kind.check_radius(s)?;
    kind.check_radius(t)?;
    let theta = d_base.min(PI);
    let half = math::sin(0.5 * theta);
    let sin2 = half * half;
    let k = kind.curvature();
    Ok(match kind {
        ConeKind::Spherical => spherical(s, t, theta),
        _ if k > 0.0 => {
            let a = math::sqrt(k);
            spherical(a * s, a * t, theta) / a
        }
        _ if k < 0.0 => {
            let a = math::sqrt(-k);
            let sh = math::sinh(0.5 * a * (s - t));
            let h = sh * sh + math::sinh(a * s) * math::sinh(a * t) * sin2;
            2.0 * math::asinh(math::sqrt(h.max(0.0))) / a
        }
        _ => math::sqrt((s - t) * (s - t) + 4.0 * s * t * sin2),
    })
}

/// Spherical law of cosines in haversine form, switching to the complement
/// near `π` so both ends stay well conditioned.
fn spherical(s: f64, t: f64, theta: f64) -> f64 {
    let (ss, st) = (math::sin(s), math::sin(t));
    let hd = math::sin(0.5 * (s - t));
    let hs = math::sin(0.5 * theta);
    let h = hd * hd + ss * st * hs * hs;
    let d = if h <= 0.5 {
        2.0 * math::asin(math::sqrt(h.max(0.0)))
    } else {
        let hp = math::sin(0.5 * (s + t - PI));
        let hc = math::cos(0.5 * theta);
        let h2 = hp * hp + ss * st * hc * hc;
        PI - 2.0 * math::asin(math::sqrt(h2.clamp(0.0, 1.0)))
    };
    d.clamp(0.0, PI)
}

/// Radial cells given by their midpoints and widths.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RadialGrid {
    midpoints: Vec<f64>,
    widths: Vec<f64>,
}

impl RadialGrid {
    /// `cells` uniform cells on `(0, r_max]` with midpoints `(j − ½)·Δr`.
    pub fn uniform(cells: usize, r_max: f64) -> Result<Self> {
        if cells == 0 {
            return Err(Error::ResolutionTooSmall { resolution: 0, minimum: 1 });
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(Error::Domain(format!("radial extent {r_max} must be positive")));
        }
        let h = r_max / cells as f64;
        Ok(RadialGrid {
            midpoints: (0..cells).map(|j| (j as f64 + 0.5) * h).collect(),
            widths: vec![h; cells],
        })
    }

    /// The uniform grid appropriate for `kind`: on `(0, π/√κ)` for positive
    /// curvature, on `(0, r_max]` otherwise.
    pub fn for_kind(kind: ConeKind, cells: usize, r_max: f64) -> Result<Self> {
        Self::uniform(cells, kind.radial_extent().unwrap_or(r_max))
    }

    /// Cells between consecutive entries of a strictly increasing edge list
    /// starting at or above 0.
    pub fn from_edges(edges: &[f64]) -> Result<Self> {
        if edges.len() < 2 {
            return Err(Error::ResolutionTooSmall { resolution: edges.len().saturating_sub(1), minimum: 1 });
        }
        if !(edges[0] >= 0.0) {
            return Err(Error::Domain(format!("first radial edge {} is negative", edges[0])));
        }
        let mut midpoints = Vec::with_capacity(edges.len() - 1);
        let mut widths = Vec::with_capacity(edges.len() - 1);
        for w in edges.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::Domain("radial edges must be strictly increasing and finite".into()));
            }
            midpoints.push(0.5 * (w[0] + w[1]));
            widths.push(w[1] - w[0]);
        }
        Ok(RadialGrid { midpoints, widths })
    }

    /// Arbitrary cells; midpoints strictly increasing and positive, widths positive.
    pub fn custom(midpoints: Vec<f64>, widths: Vec<f64>) -> Result<Self> {
        if midpoints.is_empty() {
            return Err(Error::ResolutionTooSmall { resolution: 0, minimum: 1 });
        }
        if widths.len() != midpoints.len() {
            return Err(Error::LengthMismatch { expected: midpoints.len(), got: widths.len() });
        }
        let increasing = midpoints.windows(2).all(|w| w[1] > w[0]);
        let positive = midpoints[0] > 0.0 && widths.iter().all(|&w| w > 0.0 && w.is_finite());
        if !increasing || !positive || !midpoints.iter().all(|m| m.is_finite()) {
            return Err(Error::Domain("radial midpoints must increase strictly and be positive, widths positive".into()));
        }
        Ok(RadialGrid { midpoints, widths })
    }

    pub fn len(&self) -> usize {
        self.midpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.midpoints.is_empty()
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }
}

/// Base coordinate of a cone point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BaseRef {
    Cell(usize),
    ApexSouth,
    ApexNorth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConePoint {
    pub base: BaseRef,
    pub r: f64,
}

impl ConePoint {
    pub fn cell(base: usize, r: f64) -> Self {
        ConePoint { base: BaseRef::Cell(base), r }
    }

    pub fn is_apex(&self) -> bool {
        !matches!(self.base, BaseRef::Cell(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeOptions {
    /// Accept bases of diameter larger than `π`; their distances are
    /// truncated at `π` by the cone formulas.
    pub allow_wide_base: bool,
    /// Slack on the base diameter check.
    pub tol: f64,
}

impl Default for ConeOptions {
    fn default() -> Self {
        ConeOptions { allow_wide_base: false, tol: TOL_METRIC }
    }
}

/// A sampled cone together with its induced metric measure space.
#[derive(Debug, Clone)]
pub struct ConeSpace {
    base: FiniteMetricMeasureSpace,
    kind: ConeKind,
    n_exp: f64,
    grid: RadialGrid,
    points: Vec<ConePoint>,
    mms: FiniteMetricMeasureSpace,
}

/// Samples the `N`-cone of the given kind over `base`.
///
/// Cell `(i, j)` (base cell `i`, radial cell `j`) has index `i·m + j` with
/// `m` radial cells; the apexes follow.
pub fn build_cone(
    base: &FiniteMetricMeasureSpace,
    kind: ConeKind,
    n_exp: f64,
    grid: RadialGrid,
    options: ConeOptions,
) -> Result<ConeSpace> {
    if !(n_exp.is_finite() && n_exp >= 1.0) {
        return Err(Error::Domain(format!("cone dimension parameter N = {n_exp} must be ≥ 1")));
    }
    if let ConeKind::Kappa(k) = kind {
        if !k.is_finite() {
            return Err(Error::Domain(format!("curvature {k} must be finite")));
        }
    }
    let diameter = base.diameter();
    if diameter > PI + options.tol && !options.allow_wide_base {
        return Err(Error::DiameterExceedsCap { diameter, cap: PI });
    }
    for &r in grid.midpoints() {
        kind.check_radius(r)?;
    }
    if let Some(top) = kind.radial_extent() {
        let last = grid.len() - 1;
        if grid.midpoints()[last] + 0.5 * grid.widths()[last] > top * (1.0 + 1e-12) {
            return Err(Error::Domain(format!("radial grid extends beyond {top}")));
        }
    }

    let mut base = base.clone();
    base.set_cap_unchecked(PI);
    let (nb, m) = (base.len(), grid.len());
    let mut points = Vec::with_capacity(nb * m + 2);
    let mut weight = Vec::with_capacity(nb * m + 2);
    let mut labels = Vec::with_capacity(nb * m + 2);
    for i in 0..nb {
        for (&r, &dr) in grid.midpoints().iter().zip(grid.widths()) {
            points.push(ConePoint::cell(i, r));
            weight.push(base.weight(i) * kind.radial_weight(r, n_exp) * dr);
            let mut c = base.labels()[i].coords().unwrap_or(&[]).to_vec();
            c.push(r);
            labels.push(PointLabel::Coords(c));
        }
    }
    points.push(ConePoint { base: BaseRef::ApexSouth, r: 0.0 });
    weight.push(0.0);
    labels.push(PointLabel::Apex(Pole::South));
    if let Some(top) = kind.radial_extent() {
        points.push(ConePoint { base: BaseRef::ApexNorth, r: top });
        weight.push(0.0);
        labels.push(PointLabel::Apex(Pole::North));
    }

    let n = points.len();
    let mut dist = vec![0.0; n * n];
    for a in 0..n {
        for b in (a + 1)..n {
            let d = point_distance(&base, kind, &points[a], &points[b])?;
            dist[a * n + b] = d;
            dist[b * n + a] = d;
        }
    }
    let mut mms = FiniteMetricMeasureSpace::from_parts(dist, weight, labels)?;
    if kind.curvature() > 0.0 {
        let top = kind.radial_extent().unwrap_or(PI);
        mms.set_cap_unchecked(top);
    }
    Ok(ConeSpace { base, kind, n_exp, grid, points, mms })
}

fn point_distance(base: &FiniteMetricMeasureSpace, kind: ConeKind, p: &ConePoint, q: &ConePoint) -> Result<f64> {
    let d_base = match (p.base, q.base) {
        (BaseRef::Cell(i), BaseRef::Cell(j)) => {
            if i >= base.len() || j >= base.len() {
                return Err(Error::IndexOutOfRange { index: i.max(j), len: base.len() });
            }
            base.dist(i, j)
        }
        // an apex is a whole collapsed fibre, so the base angle is irrelevant
        _ => 0.0,
    };
    cone_distance(kind, d_base, p.r, q.r)
}

impl ConeSpace {
    pub fn base(&self) -> &FiniteMetricMeasureSpace {
        &self.base
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    /// The dimension parameter `N` of the radial weight.
    pub fn n_exp(&self) -> f64 {
        self.n_exp
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn points(&self) -> &[ConePoint] {
        &self.points
    }

    pub fn point(&self, idx: usize) -> ConePoint {
        self.points[idx]
    }

    /// The induced metric measure space, apex cells included.
    pub fn mms(&self) -> &FiniteMetricMeasureSpace {
        &self.mms
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the cell over base cell `i` at radial cell `j`.
    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.grid.len() + j
    }

    pub fn apex_index(&self, pole: Pole) -> Option<usize> {
        let cells = self.base.len() * self.grid.len();
        match pole {
            Pole::South => Some(cells),
            Pole::North => self.kind.has_north_pole().then_some(cells + 1),
        }
    }

    /// Cone distance between arbitrary points, on or off the radial grid.
    pub fn distance(&self, p: &ConePoint, q: &ConePoint) -> Result<f64> {
        point_distance(&self.base, self.kind, p, q)
    }

    /// Base distance of two non-apex points, `None` if either is an apex.
    pub fn base_distance(&self, p: &ConePoint, q: &ConePoint) -> Option<f64> {
        match (p.base, q.base) {
            (BaseRef::Cell(i), BaseRef::Cell(j)) => Some(self.base.dist(i, j)),
            _ => None,
        }
    }
}

/// Whether the geodesic from `p` to `q` runs through an apex, i.e. whether
/// the base points are antipodal (`|d ∧ π − π| ≤ tol`).
pub fn is_through_apex_pair(cone: &ConeSpace, p: &ConePoint, q: &ConePoint, tol: f64) -> bool {
    through_apex_pole(cone, p, q, tol).is_some()
}

/// The apex the geodesic from `p` to `q` passes through, if any. On cones of
/// positive curvature the path crosses the north pole when `s + t` exceeds
/// the pole distance `π/√κ`.
pub fn through_apex_pole(cone: &ConeSpace, p: &ConePoint, q: &ConePoint, tol: f64) -> Option<Pole> {
    let d = cone.base_distance(p, q)?;
    if (d.min(PI) - PI).abs() > tol {
        return None;
    }
    match cone.kind.radial_extent() {
        Some(top) if p.r + q.r > top => Some(Pole::North),
        _ => Some(Pole::South),
    }
}

/// Outcome of [`verify_apex_midpoint_antipodality`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ApexCheck {
    /// The geodesic hypothesis does not hold for the given points.
    Inapplicable { reason: alloc::string::String },
    /// `lemma_cos` is `cos d(x₀,x₁)` solved from the cone cosine law with
    /// `r₁ = (1−t)/t · r₀`; `observed_cos` is the sampled base value.
    Checked { lemma_cos: f64, observed_cos: f64, holds: bool },
}

/// On a spherical cone, if the geodesic from `p` to `q` sits at the south pole
/// at time `t` (`d(p,𝒮) = t·d(p,q)` and `d(𝒮,q) = (1−t)·d(p,q)`), the base
/// points must be antipodal. Solves the cosine law for `cos d(x₀,x₁)` and
/// checks that it equals `−1` and matches the sample.
pub fn verify_apex_midpoint_antipodality(cone: &ConeSpace, p: &ConePoint, q: &ConePoint, t: f64, tol: f64) -> ApexCheck {
    let inapplicable = |reason: &str| ApexCheck::Inapplicable { reason: reason.into() };
    if cone.kind != ConeKind::Spherical {
        return inapplicable("not a spherical cone");
    }
    if !(t > 0.0 && t < 1.0) {
        return inapplicable("t must lie in (0, 1)");
    }
    let Some(d_base) = cone.base_distance(p, q) else {
        return inapplicable("endpoint is a pole");
    };
    let Ok(d) = cone.distance(p, q) else {
        return inapplicable("endpoint outside the cone");
    };
    if d <= tol {
        return inapplicable("constant geodesic");
    }
    if (p.r - t * d).abs() > tol || (q.r - (1.0 - t) * d).abs() > tol {
        return inapplicable("geodesic does not meet the south pole at time t");
    }
    let r0 = p.r;
    let r1 = (1.0 - t) / t * r0;
    let lemma_cos = (math::cos(r0 / t) - math::cos(r0) * math::cos(r1)) / (math::sin(r0) * math::sin(r1));
    let observed_cos = math::cos(d_base.min(PI));
    let holds = (lemma_cos + 1.0).abs() <= tol && (observed_cos - lemma_cos).abs() <= tol;
    ApexCheck::Checked { lemma_cos, observed_cos, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_space::{build_space, validate_metric, ManifoldDescriptor};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn circle_cone(kind: ConeKind, nb: usize, m: usize) -> ConeSpace {
        let base = build_space(&ManifoldDescriptor::circle(1.0, nb)).unwrap();
        let grid = RadialGrid::for_kind(kind, m, 1.0).unwrap();
        build_cone(&base, kind, 1.0, grid, ConeOptions::default()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e = ConeKind::Euclidean;
        assert_abs_diff_eq!(cone_distance(e, PI / 2.0, 1.0, 1.0).unwrap(), 2f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cone_distance(e, PI, 3.0, 4.0).unwrap(), 7.0, epsilon = 1e-15);
        assert_abs_diff_eq!(cone_distance(e, 5.0, 3.0, 4.0).unwrap(), 7.0, epsilon = 1e-15);
        for k in 0..=20 {
            let theta = PI * k as f64 / 20.0;
            let d = cone_distance(ConeKind::Spherical, theta, PI / 2.0, PI / 2.0).unwrap();
            assert_abs_diff_eq!(d, theta, epsilon = 1e-15);
        }
    }

    #[test]
    fn hyperbolic_example() {
        // cosh d = cosh²1 − sinh²1·cos(π/2) = cosh²1
        let d = cone_distance(ConeKind::Kappa(-1.0), PI / 2.0, 1.0, 1.0).unwrap();
        let c = 1f64.cosh();
        assert_abs_diff_eq!(d, (c * c).acosh(), epsilon = 1e-14);
    }

    #[test]
    fn domain_errors() {
        assert!(cone_distance(ConeKind::Euclidean, 1.0, -0.1, 1.0).is_err());
        assert!(cone_distance(ConeKind::Spherical, 1.0, 0.1, 3.5).is_err());
        assert!(cone_distance(ConeKind::Kappa(4.0), 1.0, 0.1, 1.6).is_err());
        assert!(cone_distance(ConeKind::Euclidean, f64::NAN, 0.1, 1.0).is_err());
    }

    #[test]
    fn wide_base_rejected_by_default() {
        let base = build_space(&ManifoldDescriptor::interval(3.5, 10)).unwrap();
        let grid = RadialGrid::uniform(4, 1.0).unwrap();
        assert!(matches!(
            build_cone(&base, ConeKind::Euclidean, 1.0, grid.clone(), ConeOptions::default()),
            Err(Error::DiameterExceedsCap { .. })
        ));
        let opts = ConeOptions { allow_wide_base: true, ..ConeOptions::default() };
        assert!(build_cone(&base, ConeKind::Euclidean, 1.0, grid, opts).is_ok());
    }

    #[test]
    fn apex_bookkeeping() {
        let cone = circle_cone(ConeKind::Spherical, 8, 6);
        let (s, n) = (cone.apex_index(Pole::South).unwrap(), cone.apex_index(Pole::North).unwrap());
        assert_eq!((s, n), (48, 49));
        let mms = cone.mms();
        assert_eq!(mms.weight(s), 0.0);
        assert_eq!(mms.weight(n), 0.0);
        assert_abs_diff_eq!(mms.dist(s, n), PI, epsilon = 1e-15);
        for idx in 0..48 {
            let r = cone.point(idx).r;
            assert_abs_diff_eq!(mms.dist(s, idx), r, epsilon = 1e-14);
            assert_abs_diff_eq!(mms.dist(n, idx), PI - r, epsilon = 1e-14);
        }
        assert!(validate_metric(mms, TOL_METRIC).is_valid());

        let e = circle_cone(ConeKind::Euclidean, 8, 6);
        assert_eq!(e.apex_index(Pole::North), None);
        assert_eq!(e.len(), 49);
        assert!(validate_metric(e.mms(), TOL_METRIC).is_valid());
    }

    #[test]
    fn disc_area_exact_for_linear_weight() {
        // the midpoint rule integrates r dr exactly
        for m in [4, 8, 16, 32] {
            let cone = circle_cone(ConeKind::Euclidean, 32, m);
            assert_abs_diff_eq!(cone.mms().total_weight(), PI, epsilon = 1e-12);
        }
    }

    #[test]
    fn sphere_area_converges() {
        let mut prev = f64::INFINITY;
        for m in [4, 8, 16, 32] {
            let cone = circle_cone(ConeKind::Spherical, 16, m);
            let err = (cone.mms().total_weight() - 4.0 * PI).abs();
            assert!(err < prev);
            prev = err;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn apex_pairs() {
        let cone = circle_cone(ConeKind::Euclidean, 4, 3);
        let (p, q) = (ConePoint::cell(0, 0.3), ConePoint::cell(2, 0.9));
        assert!(is_through_apex_pair(&cone, &p, &q, 1e-9));
        assert!(!is_through_apex_pair(&cone, &p, &ConePoint::cell(0, 0.9), 1e-9));
        assert!(!is_through_apex_pair(&cone, &p, &ConePoint::cell(1, 0.9), 1e-9));
        assert_abs_diff_eq!(cone.distance(&p, &q).unwrap(), 1.2, epsilon = 1e-15);
    }

    #[test]
    fn spherical_apex_pole_identity() {
        let cone = circle_cone(ConeKind::Spherical, 4, 3);
        for (s, t) in [(0.4, 0.9), (2.0, 2.5), (1.5, 1.6), (3.0, 0.5)] {
            let (p, q) = (ConePoint::cell(0, s), ConePoint::cell(2, t));
            let d = cone.distance(&p, &q).unwrap();
            let through = f64::min(s + t, 2.0 * PI - s - t);
            assert_abs_diff_eq!(d, through, epsilon = 1e-14);
            let pole = through_apex_pole(&cone, &p, &q, 1e-9).unwrap();
            assert_eq!(pole == Pole::North, s + t > PI);
        }
    }

    #[test]
    fn lemma_antipode_example() {
        let cone = circle_cone(ConeKind::Spherical, 4, 3);
        let p = ConePoint::cell(0, 0.3);
        let q = ConePoint::cell(2, 0.45);
        match verify_apex_midpoint_antipodality(&cone, &p, &q, 0.4, 1e-9) {
            ApexCheck::Checked { lemma_cos, observed_cos, holds } => {
                assert!(holds);
                assert_abs_diff_eq!(lemma_cos, -1.0, epsilon = 1e-9);
                assert_abs_diff_eq!(observed_cos, -1.0, epsilon = 1e-15);
            }
            other => panic!("{other:?}"),
        }
        let off = ConePoint::cell(1, 0.45);
        assert!(matches!(verify_apex_midpoint_antipodality(&cone, &p, &off, 0.4, 1e-9), ApexCheck::Inapplicable { .. }));
        assert!(matches!(verify_apex_midpoint_antipodality(&cone, &p, &p, 0.4, 1e-9), ApexCheck::Inapplicable { .. }));
    }

    #[test]
    fn radial_grid_validation() {
        assert!(RadialGrid::custom(vec![0.2, 0.1], vec![0.1, 0.1]).is_err());
        assert!(RadialGrid::custom(vec![0.0, 0.1], vec![0.1, 0.1]).is_err());
        let g = RadialGrid::from_edges(&[0.0, 0.01, 0.5, 1.0]).unwrap();
        assert_eq!(g.midpoints(), &[0.005, 0.255, 0.75]);
        let too_long = RadialGrid::uniform(4, 4.0).unwrap();
        let base = build_space(&ManifoldDescriptor::circle(1.0, 4)).unwrap();
        assert!(build_cone(&base, ConeKind::Spherical, 1.0, too_long, ConeOptions::default()).is_err());
    }

    proptest! {
        #[test]
        fn kappa_zero_is_euclidean(th in 0.0..4.0f64, s in 0.0..5.0f64, t in 0.0..5.0f64) {
            let a = cone_distance(ConeKind::Kappa(0.0), th, s, t).unwrap();
            let b = cone_distance(ConeKind::Euclidean, th, s, t).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn kappa_one_is_spherical(th in 0.0..4.0f64, s in 0.0..PI, t in 0.0..PI) {
            let a = cone_distance(ConeKind::Kappa(1.0), th, s, t).unwrap();
            let b = cone_distance(ConeKind::Spherical, th, s, t).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }

        #[test]
        fn positive_kappa_rescales(k in 0.05..9.0f64, th in 0.0..PI, u in 0.0..1.0f64, v in 0.0..1.0f64) {
            let a = k.sqrt();
            let (s, t) = (u * PI / a, v * PI / a);
            let lhs = cone_distance(ConeKind::Kappa(k), th, s, t).unwrap();
            let rhs = cone_distance(ConeKind::Spherical, th, a * s, a * t).unwrap() / a;
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }

        #[test]
        fn monotone_in_base_distance(s in 0.0..PI, t in 0.0..PI, k in -2.0..2.0f64) {
            for kind in [ConeKind::Euclidean, ConeKind::Spherical, ConeKind::Kappa(k)] {
                let (s, t) = match kind.radial_extent() {
                    Some(top) => (s / PI * top, t / PI * top),
                    None => (s, t),
                };
                let mut prev = 0.0;
                for i in 0..=64 {
                    let d = cone_distance(kind, PI * i as f64 / 64.0, s, t).unwrap();
                    prop_assert!(d >= prev - 1e-15);
                    prev = d;
                }
            }
        }

        #[test]
        fn same_ray_is_radial_difference(s in 0.0..10.0f64, t in 0.0..10.0f64) {
            prop_assert_eq!(cone_distance(ConeKind::Euclidean, 0.0, s, t).unwrap(), (s - t).abs());
        }

        #[test]
        fn spherical_in_range(th in 0.0..10.0f64, s in 0.0..PI, t in 0.0..PI) {
            let d = cone_distance(ConeKind::Spherical, th, s, t).unwrap();
            prop_assert!((0.0..=PI).contains(&d));
        }
    }
}
