//! Kernel graph Laplacians on weighted samples and their spectral gaps.
//!
//! For a bandwidth `ε` and Gaussian kernel `k(u) = exp(−u²)` truncated at
//! `u = 3`,
//!
//! ```text
//! D_i  = Σ_j k(d_ij/ε) w_j,
//! K_ij = k(d_ij/ε) / √(D_i D_j),
//! L f(i) = (4/ε²) Σ_j K_ij w_j (f_j − f_i).
//! ```
//!
//! `K` is symmetric, so `L` is self-adjoint for `⟨f, g⟩ = Σ f g w`, and the
//! density normalisation makes `L` approximate the weighted Laplacian of the
//! measure the weights sample. Zero-weight cells (cone apexes) are dropped.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::math;
use crate::metric_space::FiniteMetricMeasureSpace;
use crate::{Error, Result};

/// Kernel cut-off in units of `ε`.
pub const KERNEL_CUTOFF: f64 = 3.0;

/// Default bandwidth in units of the largest nearest-neighbour distance.
pub const DEFAULT_BANDWIDTH_FACTOR: f64 = 2.5;

fn kernel(u: f64) -> f64 {
    if u <= KERNEL_CUTOFF {
        math::exp(-u * u)
    } else {
        0.0
    }
}

#[derive(Debug, Clone)]
pub struct WeightedGraphLaplacian<'a> {
    space: &'a FiniteMetricMeasureSpace,
    eps: f64,
    nodes: Vec<usize>,
    weights: Vec<f64>,
    /// Row-major `K_ij`.
    kernel: Vec<f64>,
    /// `Σ_j K_ij w_j`.
    degree: Vec<f64>,
}

/// `2.5 ×` the largest nearest-neighbour distance among positive-weight cells.
pub fn default_bandwidth(space: &FiniteMetricMeasureSpace) -> f64 {
    DEFAULT_BANDWIDTH_FACTOR * space.max_nearest_neighbor_distance()
}

/// Assembles the Laplacian; `eps = None` selects [`default_bandwidth`].
pub fn build_laplacian(space: &FiniteMetricMeasureSpace, eps: Option<f64>) -> Result<WeightedGraphLaplacian<'_>> {
    let eps = eps.unwrap_or_else(|| default_bandwidth(space));
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Domain(alloc::format!("bandwidth {eps} must be positive")));
    }
    let nodes: Vec<usize> = (0..space.len()).filter(|&i| space.weight(i) > 0.0).collect();
    let m = nodes.len();
    if m < 2 {
        return Err(Error::Domain("the Laplacian needs at least two weighted cells".into()));
    }
    let weights: Vec<f64> = nodes.iter().map(|&i| space.weight(i)).collect();
    let mut raw = vec![0.0; m * m];
    for (a, &i) in nodes.iter().enumerate() {
        for (b, &j) in nodes.iter().enumerate() {
            raw[a * m + b] = kernel(space.dist(i, j) / eps);
        }
    }

    let components = count_components(m, |a, b| raw[a * m + b] > 0.0);
    if components > 1 {
        return Err(Error::DisconnectedGraph { components, eps });
    }

    let density: Vec<f64> = (0..m).map(|a| (0..m).map(|b| raw[a * m + b] * weights[b]).sum()).collect();
    let mut kernel = raw;
    for a in 0..m {
        for b in 0..m {
            kernel[a * m + b] /= math::sqrt(density[a] * density[b]);
        }
    }
    let degree = (0..m).map(|a| (0..m).map(|b| kernel[a * m + b] * weights[b]).sum()).collect();
    Ok(WeightedGraphLaplacian { space, eps, nodes, weights, kernel, degree })
}

fn count_components(m: usize, adjacent: impl Fn(usize, usize) -> bool) -> usize {
    let mut seen = vec![false; m];
    let mut components = 0;
    for start in 0..m {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(a) = queue.pop_front() {
            for b in 0..m {
                if !seen[b] && adjacent(a, b) {
                    seen[b] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    components
}

impl<'a> WeightedGraphLaplacian<'a> {
    pub fn space(&self) -> &'a FiniteMetricMeasureSpace {
        self.space
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Indices into the space of the cells the operator acts on.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn scale(&self) -> f64 {
        4.0 / (self.eps * self.eps)
    }

    fn check_len(&self, f: &[f64]) -> Result<()> {
        if f.len() == self.len() {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected: self.len(), got: f.len() })
        }
    }

    /// `L f` on the operator's nodes.
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_len(f)?;
        let m = self.len();
        let s = self.scale();
        Ok((0..m)
            .map(|a| {
                let row = &self.kernel[a * m..(a + 1) * m];
                s * row.iter().zip(&self.weights).zip(f).map(|((k, w), fb)| k * w * (fb - f[a])).sum::<f64>()
            })
            .collect())
    }

    /// `⟨f, g⟩ = Σ f g w`.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
    }

    /// `−⟨f, L f⟩ = (2/ε²) Σ_ij K_ij w_i w_j (f_i − f_j)²`.
    pub fn dirichlet(&self, f: &[f64]) -> Result<f64> {
        self.check_len(f)?;
        let m = self.len();
        let mut acc = 0.0;
        for a in 0..m {
            for b in 0..m {
                let d = f[a] - f[b];
                acc += self.kernel[a * m + b] * self.weights[a] * self.weights[b] * d * d;
            }
        }
        Ok(0.5 * self.scale() * acc)
    }

    /// `f` minus its weighted mean.
    pub fn center(&self, f: &[f64]) -> Vec<f64> {
        let total: f64 = self.weights.iter().sum();
        let mean = self.inner(f, &vec![1.0; f.len()]) / total;
        f.iter().map(|x| x - mean).collect()
    }

    /// Values of a function of the space's cell index on the operator's nodes.
    pub fn sample(&self, f: impl Fn(usize) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&i| f(i)).collect()
    }

    fn symmetrised(&self) -> DMatrix<f64> {
        let m = self.len();
        let s = self.scale();
        let sw: Vec<f64> = self.weights.iter().map(|w| math::sqrt(*w)).collect();
        DMatrix::from_fn(m, m, |a, b| {
            let off = -s * sw[a] * self.kernel[a * m + b] * sw[b];
            if a == b {
                off + s * self.degree[a]
            } else {
                off
            }
        })
    }

    /// Eigenpairs of `−L`, ascending; eigenvectors are `w`-orthonormal.
    pub fn spectrum(&self) -> Spectrum {
        let eig = SymmetricEigen::new(self.symmetrised());
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = order
            .iter()
            .map(|&k| eig.eigenvectors.column(k).iter().zip(&self.weights).map(|(y, w)| y / math::sqrt(*w)).collect())
            .collect();
        Spectrum { values, vectors }
    }

    /// Eigenvalues of `−L`, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = SymmetricEigen::new(self.symmetrised()).eigenvalues.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Smallest eigenvalue of `−L` on the complement of constants.
    pub fn spectral_gap(&self) -> f64 {
        self.eigenvalues()[1]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Smallest nonzero eigenvalue of `−L`.
pub fn spectral_gap(l: &WeightedGraphLaplacian<'_>) -> f64 {
    l.spectral_gap()
}

/// `λ₁` against the Lichnerowicz bound `N + 1`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpectralReport {
    pub lambda1: f64,
    #[cfg_attr(feature = "serde", serde(rename = "N"))]
    pub n: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Compares `λ₁` with `N + 1`, allowing a relative `slack`.
pub fn lichnerowicz_check(l: &WeightedGraphLaplacian<'_>, n: f64, slack: f64) -> SpectralReport {
    let lambda1 = l.spectral_gap();
    let bound = n + 1.0;
    SpectralReport { lambda1, n, bound, pass: lambda1 >= bound * (1.0 - slack) }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PoincareReport {
    /// `⟨f,f⟩ / −⟨f,Lf⟩` after centring; `None` for constant `f`.
    pub ratios: Vec<Option<f64>>,
    pub bound: f64,
    pub slack: f64,
    /// Indices whose ratio exceeds `bound·(1 + slack)`.
    pub violations: Vec<usize>,
    pub max_ratio: f64,
}

impl PoincareReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Poincaré ratios of test vectors against `1/(N+1)`.
pub fn poincare_check(l: &WeightedGraphLaplacian<'_>, fs: &[Vec<f64>], n: f64, slack: f64) -> Result<PoincareReport> {
    let bound = 1.0 / (n + 1.0);
    let mut ratios = Vec::with_capacity(fs.len());
    let mut violations = Vec::new();
    let mut max_ratio: f64 = 0.0;
    for (k, f) in fs.iter().enumerate() {
        l.check_len(f)?;
        let g = l.center(f);
        let mass = l.inner(&g, &g);
        let energy = l.dirichlet(&g)?;
        let scale = l.inner(f, f).max(f64::MIN_POSITIVE);
        if mass <= 1e-24 * scale || energy <= 0.0 {
            ratios.push(None);
            continue;
        }
        let ratio = mass / energy;
        max_ratio = max_ratio.max(ratio);
        if ratio > bound * (1.0 + slack) {
            violations.push(k);
        }
        ratios.push(Some(ratio));
    }
    Ok(PoincareReport { ratios, bound, slack, violations, max_ratio })
}
