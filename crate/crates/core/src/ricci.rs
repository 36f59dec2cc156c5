//! N-Ricci tensors of weighted model manifolds and of their cones.
//!
//! The base is a round sphere, a circle, or a product of those, embedded in
//! Euclidean space; points and tangent vectors are given in ambient
//! coordinates. For `dm = e^{−V} dvol` on an `n`-manifold
//!
//! ```text
//! Ric^{N,V}(v,v) = Ric(v,v) + Hess V(v,v) − ∇V(v)² / (N − n).
//! ```
//!
//! On the punctured cone over `M` with radial weight `e^{−W}`,
//! `W = −(N−n) log r` (Euclidean) or `−(N−n) log sin r` (spherical), the
//! `(N+1)`-Ricci tensor of `V + W` is assembled term by term and compared
//! with its closed form; every Hessian term also has a finite-difference
//! counterpart along the explicit curves `h(s)` and `f(s)`.

use alloc::boxed::Box;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cones::ConeKind;
use crate::math;
use crate::metric_space::ManifoldDescriptor;
use crate::{Error, Result};

/// Round spheres, circles and their Riemannian products.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ModelManifold {
    /// `S^dim` of the given radius in `R^{dim+1}`; `dim = 1` is a circle.
    Sphere { dim: usize, radius: f64 },
    Product(Vec<ModelManifold>),
}

impl TryFrom<&ManifoldDescriptor> for ModelManifold {
    type Error = Error;

    fn try_from(desc: &ManifoldDescriptor) -> Result<Self> {
        desc.validate()?;
        match desc {
            ManifoldDescriptor::Circle { radius, .. } => Ok(ModelManifold::Sphere { dim: 1, radius: *radius }),
            ManifoldDescriptor::Sphere { dim, radius, .. } => Ok(ModelManifold::Sphere { dim: *dim, radius: *radius }),
            ManifoldDescriptor::Product { factors } => {
                factors.iter().map(ModelManifold::try_from).collect::<Result<_>>().map(ModelManifold::Product)
            }
            ManifoldDescriptor::Interval { .. } => {
                Err(Error::InvalidDescriptor("intervals have no analytic Ricci table here".into()))
            }
        }
    }
}

impl ModelManifold {
    pub fn circle(radius: f64) -> Self {
        ModelManifold::Sphere { dim: 1, radius }
    }

    pub fn sphere(dim: usize, radius: f64) -> Self {
        ModelManifold::Sphere { dim, radius }
    }

    /// Spheres making up the manifold, with their ambient offsets.
    fn factors(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        self.collect(0, &mut out);
        out
    }

    fn collect(&self, offset: usize, out: &mut Vec<(usize, usize, f64)>) -> usize {
        match *self {
            ModelManifold::Sphere { dim, radius } => {
                out.push((offset, dim, radius));
                offset + dim + 1
            }
            ModelManifold::Product(ref fs) => fs.iter().fold(offset, |o, f| f.collect(o, out)),
        }
    }

    pub fn dim(&self) -> usize {
        self.factors().iter().map(|f| f.1).sum()
    }

    pub fn ambient_dim(&self) -> usize {
        self.factors().iter().map(|f| f.1 + 1).sum()
    }

    /// The point with every factor at its first ambient axis.
    pub fn base_point(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.ambient_dim()];
        for (o, _, a) in self.factors() {
            x[o] = a;
        }
        x
    }

    /// Whether `x` lies on the manifold within `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.ambient_dim()
            && self.factors().iter().all(|&(o, d, a)| (norm(&x[o..o + d + 1]) - a).abs() <= tol)
    }

    /// Orthogonal projection of `u` onto `T_x`.
    pub fn project_tangent(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        let mut out = u.to_vec();
        for (o, d, a) in self.factors() {
            let r = o..o + d + 1;
            let c = dot(&x[r.clone()], &u[r.clone()]) / (a * a);
            for k in r {
                out[k] -= c * x[k];
            }
        }
        out
    }

    /// `exp_x(s·u)` factor by factor.
    pub fn exp(&self, x: &[f64], u: &[f64], s: f64) -> Vec<f64> {
        let mut out = x.to_vec();
        for (o, d, a) in self.factors() {
            let r = o..o + d + 1;
            let speed = norm(&u[r.clone()]);
            if speed == 0.0 {
                continue;
            }
            let ang = s * speed / a;
            let (c, sn) = (math::cos(ang), math::sin(ang));
            for k in r {
                out[k] = x[k] * c + a * u[k] / speed * sn;
            }
        }
        out
    }

    /// `Ric_x(v, v) = Σ (dim_b − 1)/a_b² · |v_b|²`.
    pub fn ricci(&self, v: &[f64]) -> f64 {
        self.factors()
            .iter()
            .map(|&(o, d, a)| (d as f64 - 1.0) / (a * a) * dot(&v[o..o + d + 1], &v[o..o + d + 1]))
            .sum()
    }

    /// Sectional curvature of the plane spanned by orthonormal `u`, `w`.
    pub fn sectional(&self, u: &[f64], w: &[f64]) -> f64 {
        self.factors()
            .iter()
            .map(|&(o, d, a)| {
                let (ub, wb) = (&u[o..o + d + 1], &w[o..o + d + 1]);
                (dot(ub, ub) * dot(wb, wb) - dot(ub, wb) * dot(ub, wb)) / (a * a)
            })
            .sum()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// A potential `V` on a model manifold. Only [`value`](Potential::value) is
/// required; analytic derivatives enable the closed-form checks.
pub trait Potential {
    fn value(&self, x: &[f64]) -> f64;

    /// `∇V_x(v)`.
    fn gradient(&self, _m: &ModelManifold, _x: &[f64], _v: &[f64]) -> Option<f64> {
        None
    }

    /// `Hess V_x(v, v)`.
    fn hessian(&self, _m: &ModelManifold, _x: &[f64], _v: &[f64]) -> Option<f64> {
        None
    }

    fn is_constant(&self) -> bool {
        false
    }
}

/// `V ≡ c`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstantPotential(pub f64);

impl Potential for ConstantPotential {
    fn value(&self, _x: &[f64]) -> f64 {
        self.0
    }

    fn gradient(&self, _m: &ModelManifold, _x: &[f64], _v: &[f64]) -> Option<f64> {
        Some(0.0)
    }

    fn hessian(&self, _m: &ModelManifold, _x: &[f64], _v: &[f64]) -> Option<f64> {
        Some(0.0)
    }

    fn is_constant(&self) -> bool {
        true
    }
}

/// `V(x) = ⟨e, x⟩` in ambient coordinates. On the unit circle with
/// `e = (1, 0)` this is `cos θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearHeight {
    pub e: Vec<f64>,
}

impl Potential for LinearHeight {
    fn value(&self, x: &[f64]) -> f64 {
        dot(&self.e, x)
    }

    fn gradient(&self, _m: &ModelManifold, _x: &[f64], v: &[f64]) -> Option<f64> {
        Some(dot(&self.e, v))
    }

    fn hessian(&self, m: &ModelManifold, x: &[f64], v: &[f64]) -> Option<f64> {
        Some(
            m.factors()
                .iter()
                .map(|&(o, d, a)| {
                    let r = o..o + d + 1;
                    -dot(&v[r.clone()], &v[r.clone()]) * dot(&self.e[r.clone()], &x[r]) / (a * a)
                })
                .sum(),
        )
    }

    fn is_constant(&self) -> bool {
        self.e.iter().all(|&c| c == 0.0)
    }
}

/// A point of a weighted model manifold `(M, e^{−V} vol)`.
pub struct WeightedManifoldPoint<'a> {
    pub model: ModelManifold,
    pub x: Vec<f64>,
    pub potential: &'a dyn Potential,
}

impl<'a> WeightedManifoldPoint<'a> {
    pub fn new(model: ModelManifold, x: Vec<f64>, potential: &'a dyn Potential) -> Result<Self> {
        if !model.contains(&x, 1e-9) {
            return Err(Error::Domain("point does not lie on the model manifold".into()));
        }
        Ok(WeightedManifoldPoint { model, x, potential })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// `V(exp_x(a·u))`.
    pub fn along(&self, u: &[f64], a: f64) -> f64 {
        self.potential.value(&self.model.exp(&self.x, u, a))
    }

    pub fn gradient(&self, v: &[f64], h: f64) -> f64 {
        self.potential
            .gradient(&self.model, &self.x, v)
            .unwrap_or_else(|| derivatives(|s| self.along(v, s), h).0)
    }

    pub fn hessian(&self, v: &[f64], h: f64) -> f64 {
        self.potential
            .hessian(&self.model, &self.x, v)
            .unwrap_or_else(|| derivatives(|s| self.along(v, s), h).1)
    }

    /// Finite-difference `(∇V(v), Hess V(v,v))` along `s ↦ exp_x(s v)`.
    pub fn derivatives_fd(&self, v: &[f64], h: f64) -> (f64, f64) {
        derivatives(|s| self.along(v, s), h)
    }

    /// Deviation of the finite-difference gradient from the analytic one.
    pub fn gradient_residual(&self, v: &[f64], h: f64) -> Option<f64> {
        let exact = self.potential.gradient(&self.model, &self.x, v)?;
        Some((exact - self.derivatives_fd(v, h).0).abs())
    }
}

/// Richardson-extrapolated central differences `(g′(0), g″(0))` over steps
/// `h` and `h/2`.
pub fn derivatives(g: impl Fn(f64) -> f64, h: f64) -> (f64, f64) {
    let g0 = g(0.0);
    let d = |h: f64| {
        let (p, m) = (g(h), g(-h));
        ((p - m) / (2.0 * h), (p - 2.0 * g0 + m) / (h * h))
    };
    let (a1, a2) = d(h);
    let (b1, b2) = d(0.5 * h);
    ((4.0 * b1 - a1) / 3.0, (4.0 * b2 - a2) / 3.0)
}

/// Default finite-difference step.
pub const FD_STEP: f64 = 1e-4;

/// `Ric^{N,V}_x(v, v)`.
pub fn n_ricci(point: &WeightedManifoldPoint<'_>, v: &[f64], n_big: f64) -> Result<f64> {
    let base = BaseTerms::at(point, v);
    base.n_ricci(point.dim(), n_big)
}

/// Base data along one tangent vector `v`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BaseTerms {
    /// `Ric_x(v, v)`.
    pub ric: f64,
    /// `Hess V_x(v, v)`.
    pub hess_v: f64,
    /// `∇V_x(v)`.
    pub grad_v: f64,
}

impl BaseTerms {
    /// Unweighted base: `V ≡ 0`.
    pub fn unweighted(ric: f64) -> Self {
        BaseTerms { ric, hess_v: 0.0, grad_v: 0.0 }
    }

    /// Analytic terms where available, finite differences otherwise.
    pub fn at(point: &WeightedManifoldPoint<'_>, v: &[f64]) -> Self {
        BaseTerms {
            ric: point.model.ricci(v),
            hess_v: point.hessian(v, FD_STEP),
            grad_v: point.gradient(v, FD_STEP),
        }
    }

    /// Finite-difference potential terms.
    pub fn fd(point: &WeightedManifoldPoint<'_>, v: &[f64], h: f64) -> Self {
        let (grad_v, hess_v) = point.derivatives_fd(v, h);
        BaseTerms { ric: point.model.ricci(v), hess_v, grad_v }
    }

    fn is_flat(&self) -> bool {
        self.hess_v == 0.0 && self.grad_v == 0.0
    }

    /// `Ric + Hess V − ∇V²/(N−n)`; requires `N > n` unless `V` is constant.
    pub fn n_ricci(&self, n: usize, n_big: f64) -> Result<f64> {
        let gap = n_big - n as f64;
        if gap < 0.0 || (gap == 0.0 && !self.is_flat()) {
            return Err(Error::Domain(format!("N = {n_big} must exceed the dimension {n} for a nonconstant potential")));
        }
        if gap == 0.0 {
            return Ok(self.ric);
        }
        Ok(self.ric + self.hess_v - self.grad_v * self.grad_v / gap)
    }
}

/// A tangent vector `(v, t)` at the cone point `(x, r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConeTangent {
    pub r: f64,
    /// `‖v‖` in the base metric.
    pub v_norm: f64,
    pub t: f64,
}

impl ConeTangent {
    /// `r²‖v‖² + t²` (Euclidean) or `sin²r·‖v‖² + t²` (spherical).
    pub fn norm2(&self, kind: ConeKind) -> f64 {
        let w = match kind {
            ConeKind::Spherical => math::sin(self.r),
            _ => self.r,
        };
        w * w * self.v_norm * self.v_norm + self.t * self.t
    }
}

/// Individual terms of the cone's weighted Ricci tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HessTerms {
    /// `Hess V` on the cone: `Hess V_x(v,v) − 2∇V_x(v)·t/r` or `·cot r·t`.
    pub hess_v_cone: f64,
    /// `[Hess W − ∇W⊗∇W/(N−n)]((v,t),(v,t))`.
    pub hess_w: f64,
    /// `∇W(v,t) = W′(r)·t`.
    pub grad_w: f64,
    /// `−(2/(N−n))·∇V_x(v)·W′(r)·t`.
    pub cross: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RicciEvaluation {
    /// `Ric_x(v, v)`.
    pub ric_base: f64,
    /// `Ric^{N,V}_x(v, v)`.
    pub ric_nv_base: f64,
    /// Unweighted cone Ricci `Ric_{(x,r)}((v,t),(v,t))`.
    pub ric_cone: f64,
    /// `Ric^{N+1,V+W}_{(x,r)}((v,t),(v,t))` from the closed-form identity.
    pub ric_cone_weighted: f64,
    pub hess_terms: HessTerms,
    /// Sum of `ric_cone` and the individual potential terms.
    pub assembled: f64,
    /// `|assembled − ric_cone_weighted|`.
    pub residual: f64,
}

/// `W′(r)` for the radial weight of the cone.
fn w_prime(kind: ConeKind, gap: f64, r: f64) -> f64 {
    match kind {
        ConeKind::Spherical => -gap * math::cos(r) / math::sin(r),
        _ => -gap / r,
    }
}

fn cone_ricci(kind: ConeKind, base: &BaseTerms, n: usize, n_big: f64, tg: &ConeTangent) -> Result<RicciEvaluation> {
    if !(tg.r > 0.0) || !tg.r.is_finite() {
        return Err(Error::Domain(format!("cone radius {} must be positive", tg.r)));
    }
    let ric_nv_base = base.n_ricci(n, n_big)?;
    let gap = n_big - n as f64;
    let nf = n as f64;
    let v2 = tg.v_norm * tg.v_norm;
    let t = tg.t;
    let (ric_cone, weighted, hess_v_cone, hess_w) = match kind {
        ConeKind::Spherical => {
            let c = math::cos(tg.r);
            let cot = c / math::sin(tg.r);
            let norm2 = tg.norm2(kind);
            (
                base.ric + (1.0 - nf * c * c) * v2 + nf * t * t,
                ric_nv_base - (n_big - 1.0) * v2 + n_big * norm2,
                base.hess_v - 2.0 * base.grad_v * cot * t,
                gap * (t * t - c * c * v2),
            )
        }
        _ => (
            base.ric - (nf - 1.0) * v2,
            ric_nv_base - (n_big - 1.0) * v2,
            base.hess_v - 2.0 * base.grad_v * t / tg.r,
            -gap * v2,
        ),
    };
    let wp = w_prime(kind, gap, tg.r);
    let grad_w = wp * t;
    let cross = if gap > 0.0 { -2.0 / gap * base.grad_v * grad_w } else { 0.0 };
    let grad_v_sq = if gap > 0.0 { base.grad_v * base.grad_v / gap } else { 0.0 };
    let assembled = ric_cone + hess_v_cone + hess_w + cross - grad_v_sq;
    Ok(RicciEvaluation {
        ric_base: base.ric,
        ric_nv_base,
        ric_cone,
        ric_cone_weighted: weighted,
        hess_terms: HessTerms { hess_v_cone, hess_w, grad_w, cross },
        assembled,
        residual: (assembled - weighted).abs(),
    })
}

/// Ricci identities on the Euclidean cone:
/// `Ric = Ric_x(v,v) − (n−1)‖v‖²` and
/// `Ric^{N+1,V+W} = Ric^{N,V}_x(v,v) − (N−1)‖v‖²`.
pub fn euclid_cone_ricci(base: &BaseTerms, n: usize, n_big: f64, tangent: &ConeTangent) -> Result<RicciEvaluation> {
    cone_ricci(ConeKind::Euclidean, base, n, n_big, tangent)
}

/// Ricci identities on the spherical cone:
/// `Ric = Ric_x(v,v) + (1 − n cos²r)‖v‖² + n t²` and
/// `Ric^{N+1,V+W} − N‖(v,t)‖² = Ric^{N,V}_x(v,v) − (N−1)‖v‖²`.
pub fn spherical_cone_ricci(base: &BaseTerms, n: usize, n_big: f64, tangent: &ConeTangent) -> Result<RicciEvaluation> {
    if !(tangent.r > 0.0 && tangent.r < math::PI) {
        return Err(Error::Domain(format!("spherical cone radius {} must lie in (0, π)", tangent.r)));
    }
    cone_ricci(ConeKind::Spherical, base, n, n_big, tangent)
}

/// A closed form and its finite-difference estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FdCheck {
    pub closed: f64,
    pub fd: f64,
    pub residual: f64,
}

impl FdCheck {
    fn new(closed: f64, fd: f64) -> Self {
        FdCheck { closed, fd, residual: (closed - fd).abs() }
    }
}

fn check_step(h: f64) -> Result<()> {
    if (1e-6..=1e-3).contains(&h) {
        Ok(())
    } else {
        Err(Error::Domain(format!("finite-difference step {h} outside [1e-6, 1e-3]")))
    }
}

fn radial_curve(kind: ConeKind, gap: f64, tg: ConeTangent) -> Result<Box<dyn Fn(f64) -> f64>> {
    let ConeTangent { r, v_norm, t } = tg;
    Ok(match kind {
        ConeKind::Euclidean => Box::new(move |s: f64| {
            let rho = math::sqrt((r + s * t) * (r + s * t) + s * s * r * r * v_norm * v_norm);
            -gap * math::ln(rho)
        }),
        ConeKind::Spherical => Box::new(move |s: f64| {
            let rho = math::acos(math::cos(r + s * t) * math::cos(s * math::sin(r) * v_norm));
            -gap * math::ln(math::sin(rho))
        }),
        ConeKind::Kappa(_) => return Err(Error::Domain("only Euclidean and spherical cones have a Hessian check".into())),
    })
}

/// Finite-difference check of `[Hess W − ∇W⊗∇W/(N−n)]((v,t),(v,t))` via
/// `h″(0) − h′(0)²/(N−n)` against `−(N−n)‖v‖²` (Euclidean) or
/// `(N−n)(t² − cos²r‖v‖²)` (spherical).
pub fn hess_w_fd_check(kind: ConeKind, n: usize, n_big: f64, tangent: &ConeTangent, h: f64) -> Result<FdCheck> {
    check_step(h)?;
    let gap = n_big - n as f64;
    if !(gap > 0.0) {
        return Err(Error::Domain(format!("N = {n_big} must exceed n = {n}")));
    }
    let curve = radial_curve(kind, gap, *tangent)?;
    let (d1, d2) = derivatives(&curve, h);
    let v2 = tangent.v_norm * tangent.v_norm;
    let closed = match kind {
        ConeKind::Spherical => {
            let c = math::cos(tangent.r);
            gap * (tangent.t * tangent.t - c * c * v2)
        }
        _ => -gap * v2,
    };
    Ok(FdCheck::new(closed, d2 - d1 * d1 / gap))
}

/// Finite-difference checks of the cone Hessian of `V` and of the cross term.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossCheck {
    /// `f″(0)` against `Hess V_x(v,v) − 2∇V_x(v)·t/r` (or `·cot r·t`).
    pub hess: FdCheck,
    /// `f′(0)·h′(0)` against `∇V_x(v)·W′(r)·t`.
    pub cross: FdCheck,
}

/// Checks `[Hess V]_{(x,r)}((v,t),(v,t)) = f″(0)` where `f` follows `V` along
/// the base shadow of the cone geodesic, and `[∇V⊗∇W] = ∇V_x(v)·W′(r)·t`.
pub fn hess_v_cross_check(
    kind: ConeKind,
    point: &WeightedManifoldPoint<'_>,
    v: &[f64],
    n_big: f64,
    r: f64,
    t: f64,
    h: f64,
) -> Result<CrossCheck> {
    check_step(h)?;
    let vn = norm(v);
    if !(vn > 0.0) {
        return Err(Error::Domain("base tangent must be nonzero".into()));
    }
    let n = point.dim();
    let gap = n_big - n as f64;
    if !(gap > 0.0) {
        return Err(Error::Domain(format!("N = {n_big} must exceed n = {n}")));
    }
    let u: Vec<f64> = v.iter().map(|c| c / vn).collect();
    let angle = move |s: f64| -> f64 {
        match kind {
            ConeKind::Spherical => math::atan2(math::tan(math::sin(r) * s * vn), math::sin(r + s * t)),
            _ => math::atan2(r * s * vn, r + s * t),
        }
    };
    if matches!(kind, ConeKind::Kappa(_)) {
        return Err(Error::Domain("only Euclidean and spherical cones have a Hessian check".into()));
    }
    if matches!(kind, ConeKind::Spherical) && !(r > 0.0 && r < math::PI) {
        return Err(Error::Domain(format!("spherical cone radius {r} must lie in (0, π)")));
    }
    let (f1, f2) = derivatives(|s| point.along(&u, angle(s)), h);
    let grad = point.gradient(v, h);
    let hess = point.hessian(v, h);
    let factor = match kind {
        ConeKind::Spherical => math::cos(r) / math::sin(r),
        _ => 1.0 / r,
    };
    let hess_closed = hess - 2.0 * grad * factor * t;

    let tangent = ConeTangent { r, v_norm: vn, t };
    let curve = radial_curve(kind, gap, tangent)?;
    let (w1, _) = derivatives(&curve, h);
    let cross_closed = grad * w_prime(kind, gap, r) * t;
    Ok(CrossCheck { hess: FdCheck::new(hess_closed, f2), cross: FdCheck::new(cross_closed, f1 * w1) })
}

/// Sectional curvature of the cone over a plane of base curvature `k_base`,
/// both directions tangent to the base, at radius `r`.
pub fn cone_sectional(kind: ConeKind, k_base: f64, r: f64) -> f64 {
    match kind {
        ConeKind::Spherical => {
            let (s, c) = (math::sin(r), math::cos(r));
            (k_base - c * c) / (s * s)
        }
        _ => (k_base - 1.0) / (r * r),
    }
}

/// Sectional curvature of planes containing the radial direction.
pub fn cone_radial_sectional(kind: ConeKind) -> f64 {
    match kind {
        ConeKind::Spherical => 1.0,
        _ => 0.0,
    }
}

/// Curvatures of `M = (1/√3)S² × (1/√3)S²` and of its 4-Euclidean cone at `r`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CurvatureTable {
    pub r: f64,
    /// `Sec(ũ₁,ũ₂)`, `Sec(ũ₁,ṽ₁)`, `Sec(ũ₁,ṽ₂)` on `M`.
    pub base_sec: [f64; 3],
    /// `Sec(û₁,û₂)`, `Sec(û₁,v̂₁)`, `Sec(û₁,v̂₂)`, `Sec(û₁,ŵ)` on the cone.
    pub sec: [f64; 4],
    /// `Ric(ũ₁,ũ₁)` on `M`.
    pub base_ric: f64,
    /// `Ric(û₁,û₁)` on the cone, summed over the orthonormal frame.
    pub cone_ric: f64,
    /// The same value from the cone Ricci identity.
    pub cone_ric_identity: f64,
}

pub fn product_sphere_curvature_table(r: f64) -> Result<CurvatureTable> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("cone radius {r} must be positive")));
    }
    let a = 1.0 / math::sqrt(3.0);
    let m = ModelManifold::Product(vec![ModelManifold::sphere(2, a), ModelManifold::sphere(2, a)]);
    // at the base point each factor sits on its first axis; axes 1, 2 and 4, 5 span the tangent space
    let e = |k: usize| {
        let mut v = vec![0.0; 6];
        v[k] = 1.0;
        v
    };
    let (u1, u2, v1, v2) = (e(1), e(2), e(4), e(5));
    let base_sec = [m.sectional(&u1, &u2), m.sectional(&u1, &v1), m.sectional(&u1, &v2)];
    let kind = ConeKind::Euclidean;
    let sec = [
        cone_sectional(kind, base_sec[0], r),
        cone_sectional(kind, base_sec[1], r),
        cone_sectional(kind, base_sec[2], r),
        cone_radial_sectional(kind),
    ];
    let base_ric = m.ricci(&u1);
    // û₁ is unit in the cone metric, so its base part has norm 1/r
    let v: Vec<f64> = u1.iter().map(|c| c / r).collect();
    let id = euclid_cone_ricci(&BaseTerms::unweighted(m.ricci(&v)), m.dim(), m.dim() as f64, &ConeTangent { r, v_norm: 1.0 / r, t: 0.0 })?;
    Ok(CurvatureTable {
        r,
        base_sec,
        sec,
        base_ric,
        cone_ric: sec.iter().sum(),
        cone_ric_identity: id.ric_cone,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn circle_point(theta: f64, v: &dyn Potential) -> WeightedManifoldPoint<'_> {
        WeightedManifoldPoint::new(ModelManifold::circle(1.0), vec![theta.cos(), theta.sin()], v).unwrap()
    }

    fn circle_tangent(theta: f64) -> Vec<f64> {
        vec![-theta.sin(), theta.cos()]
    }

    #[test]
    fn sphere_and_product_ricci() {
        let a = 1.0 / 3f64.sqrt();
        let s = ModelManifold::sphere(2, a);
        assert_abs_diff_eq!(s.ricci(&[0.0, 1.0, 0.0]), 3.0, epsilon = 1e-12);
        let p = ModelManifold::Product(vec![s.clone(), s]);
        for xi in [[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], [0.0, 0.6, 0.0, 0.0, 0.0, 0.8], [0.0, 0.0, 0.5, 0.0, 0.5, 0.5f64.sqrt()]] {
            assert_abs_diff_eq!(p.ricci(&xi), 3.0, epsilon = 1e-12);
        }
        let zero = ConstantPotential(0.0);
        let pt = WeightedManifoldPoint::new(p.clone(), p.base_point(), &zero).unwrap();
        assert_abs_diff_eq!(n_ricci(&pt, &[0.0, 1.0, 0.0, 0.0, 0.0, 0.0], 4.0).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn circle_with_cosine_potential() {
        let v = LinearHeight { e: vec![1.0, 0.0] };
        for theta in [0.0, 0.3, 1.2, 2.9] {
            let p = circle_point(theta, &v);
            let u = circle_tangent(theta);
            let expected = -theta.cos() - theta.sin().powi(2);
            assert_abs_diff_eq!(n_ricci(&p, &u, 2.0).unwrap(), expected, epsilon = 1e-12);
            let fd = BaseTerms::fd(&p, &u, FD_STEP).n_ricci(1, 2.0).unwrap();
            assert_abs_diff_eq!(fd, expected, epsilon = 1e-7);
            assert!(p.gradient_residual(&u, FD_STEP).unwrap() < 1e-6);
        }
        let p = circle_point(0.3, &v);
        assert!(n_ricci(&p, &circle_tangent(0.3), 1.0).is_err());
    }

    #[test]
    fn euclidean_cone_examples() {
        let tg = ConeTangent { r: 0.7, v_norm: 1.0, t: 0.4 };
        let e = euclid_cone_ricci(&BaseTerms::unweighted(3.0), 4, 4.0, &tg).unwrap();
        assert_abs_diff_eq!(e.ric_cone, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e.ric_cone_weighted, 0.0, epsilon = 1e-15);
        let radial = ConeTangent { r: 0.7, v_norm: 0.0, t: 1.3 };
        assert_eq!(euclid_cone_ricci(&BaseTerms::unweighted(0.0), 4, 4.0, &radial).unwrap().ric_cone, 0.0);
        let e = euclid_cone_ricci(&BaseTerms::unweighted(4.0), 4, 5.0, &tg).unwrap();
        assert_eq!(e.ric_cone_weighted, 0.0);
        assert!(e.residual < 1e-12);
    }

    #[test]
    fn spherical_cone_examples() {
        let s = spherical_cone_ricci(&BaseTerms::unweighted(0.0), 1, 1.0, &ConeTangent { r: math::PI / 2.0, v_norm: 1.0, t: 0.0 }).unwrap();
        assert_abs_diff_eq!(s.ric_cone, 1.0, epsilon = 1e-15);
        let s = spherical_cone_ricci(&BaseTerms::unweighted(0.0), 3, 3.0, &ConeTangent { r: 1.1, v_norm: 0.0, t: 1.0 }).unwrap();
        assert_abs_diff_eq!(s.ric_cone, 3.0, epsilon = 1e-15);
        let tg = ConeTangent { r: 1.0, v_norm: 1.0, t: 0.37 };
        let s = spherical_cone_ricci(&BaseTerms::unweighted(2.0), 2, 3.0, &tg).unwrap();
        assert_abs_diff_eq!(s.ric_cone_weighted - 3.0 * tg.norm2(ConeKind::Spherical), 0.0, epsilon = 1e-14);
        assert!(spherical_cone_ricci(&BaseTerms::unweighted(2.0), 2, 3.0, &ConeTangent { r: 0.0, ..tg }).is_err());
        assert!(spherical_cone_ricci(&BaseTerms::unweighted(2.0), 2, 3.0, &ConeTangent { r: math::PI, ..tg }).is_err());
    }

    #[test]
    fn hess_w_examples() {
        let e = hess_w_fd_check(ConeKind::Euclidean, 2, 3.0, &ConeTangent { r: 1.0, v_norm: 0.7, t: 0.4 }, FD_STEP).unwrap();
        assert_abs_diff_eq!(e.closed, -0.49, epsilon = 1e-15);
        assert!(e.residual <= 1e-5, "{e:?}");
        let s = hess_w_fd_check(ConeKind::Spherical, 2, 3.0, &ConeTangent { r: math::PI / 3.0, v_norm: 0.5, t: 0.2 }, FD_STEP).unwrap();
        assert_abs_diff_eq!(s.closed, -0.0225, epsilon = 1e-15);
        assert!(s.residual <= 1e-5, "{s:?}");
        let radial = hess_w_fd_check(ConeKind::Euclidean, 2, 3.0, &ConeTangent { r: 1.3, v_norm: 0.0, t: 0.9 }, FD_STEP).unwrap();
        assert_eq!(radial.closed, 0.0);
        assert!(radial.residual <= 1e-5);
        assert!(hess_w_fd_check(ConeKind::Euclidean, 2, 3.0, &ConeTangent { r: 1.3, v_norm: 0.0, t: 0.9 }, 1e-2).is_err());
    }

    #[test]
    fn hess_v_examples() {
        let v = LinearHeight { e: vec![1.0, 0.0] };
        let p = circle_point(0.3, &v);
        let u = circle_tangent(0.3);
        let c = hess_v_cross_check(ConeKind::Euclidean, &p, &u, 2.0, 2.0, 0.5, FD_STEP).unwrap();
        assert_abs_diff_eq!(c.hess.closed, -(0.3f64.cos()) - 2.0 * (-(0.3f64.sin())) * (0.5 / 2.0), epsilon = 1e-14);
        assert!(c.hess.residual <= 1e-5 && c.cross.residual <= 1e-5, "{c:?}");
        let c = hess_v_cross_check(ConeKind::Spherical, &p, &u, 2.0, math::PI / 4.0, 0.5, FD_STEP).unwrap();
        assert!(c.hess.residual <= 1e-5 && c.cross.residual <= 1e-5, "{c:?}");

        let zero = ConstantPotential(1.5);
        let p = circle_point(0.3, &zero);
        let c = hess_v_cross_check(ConeKind::Euclidean, &p, &u, 2.0, 2.0, 0.5, FD_STEP).unwrap();
        assert_eq!((c.hess.closed, c.hess.fd, c.cross.closed), (0.0, 0.0, 0.0));
    }

    #[test]
    fn curvature_table() {
        for r in [0.1, 1.0, 10.0] {
            let t = product_sphere_curvature_table(r).unwrap();
            assert_abs_diff_eq!(t.base_ric, 3.0, epsilon = 1e-12);
            let expect = [2.0 / (r * r), -1.0 / (r * r), -1.0 / (r * r), 0.0];
            for (a, b) in t.sec.iter().zip(expect) {
                assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
            }
            assert_abs_diff_eq!(t.cone_ric, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(t.cone_ric_identity, 0.0, epsilon = 1e-12);
        }
        assert!(product_sphere_curvature_table(0.0).is_err());
    }

    #[test]
    fn sectional_matches_warped_product_on_round_cones() {
        // the Euclidean cone over the unit sphere is flat, the spherical cone is the unit sphere
        for r in [0.3, 1.0, 2.5] {
            assert_abs_diff_eq!(cone_sectional(ConeKind::Euclidean, 1.0, r), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(cone_sectional(ConeKind::Spherical, 1.0, r), 1.0, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn homogeneity(lambda in 0.1..3.0f64, vn in 0.0..2.0f64, t in -2.0..2.0f64, r in 0.1..3.0f64, rho in -3.0..3.0f64) {
            for kind in [ConeKind::Euclidean, ConeKind::Spherical] {
                let base = |s: f64| BaseTerms { ric: rho * s * s * vn * vn, hess_v: 0.3 * s * s * vn * vn, grad_v: 0.2 * s * vn };
                let tg = |s: f64| ConeTangent { r, v_norm: s * vn, t: s * t };
                let f = if kind == ConeKind::Spherical { spherical_cone_ricci } else { euclid_cone_ricci };
                let a = f(&base(1.0), 2, 3.5, &tg(1.0)).unwrap();
                let b = f(&base(lambda), 2, 3.5, &tg(lambda)).unwrap();
                prop_assert!((b.ric_cone_weighted - lambda * lambda * a.ric_cone_weighted).abs() <= 1e-9 * (1.0 + a.ric_cone_weighted.abs()));
                prop_assert!((b.ric_cone - lambda * lambda * a.ric_cone).abs() <= 1e-9 * (1.0 + a.ric_cone.abs()));
            }
        }
    }
}
