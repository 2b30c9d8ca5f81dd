//! Star-shaped, m-fold symmetric boundary pairs in polar form.
//!
//! The outer and inner radii are truncated cosine series
//!
//! ```text
//! ρ₁(θ) = 1 + Σ_k a1[k-1] cos(m k θ)
//! ρ₂(θ) = b + Σ_k a2[k-1] cos(m k θ)
//! ```
//!
//! and the curves are `z_j(θ) = e^{iθ} ρ_j(θ)`. Using only `cos(m k θ)`
//! makes every state m-fold symmetric and symmetric about the real axis.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Outer,
    Inner,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Boundary::Outer => f.write_str("outer"),
            Boundary::Inner => f.write_str("inner"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("inner radius b = {0} must lie in (0, 1)")]
    RadiusOutOfRange(f64),
    #[error("fold number must be positive")]
    ZeroFold,
    #[error("coefficient arrays have different lengths ({outer} outer, {inner} inner)")]
    ModeMismatch { outer: usize, inner: usize },
    #[error("at least one cosine mode is required")]
    NoModes,
    #[error("{nodes} nodes cannot resolve {modes} modes of fold {fold}: need at least {required}")]
    Undersampled { nodes: usize, fold: usize, modes: usize, required: usize },
    #[error("{nodes} nodes is not a multiple of the fold number {fold}")]
    NotFoldMultiple { nodes: usize, fold: usize },
    #[error("{boundary} radius {radius:e} is not positive at θ = {theta}")]
    NonPositiveRadius { boundary: Boundary, theta: f64, radius: f64 },
    #[error("boundaries cross at θ = {theta}: outer radius {outer}, inner radius {inner}")]
    Crossing { theta: f64, outer: f64, inner: f64 },
    #[error("non-finite coefficient")]
    NonFinite,
}

/// Unknowns of the boundary problem: the cosine amplitudes of both radii.
#[derive(Debug, Clone, PartialEq)]
pub struct VortexContourCoeffs {
    pub b: f64,
    pub fold: usize,
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
}

impl VortexContourCoeffs {
    pub fn new(b: f64, fold: usize, a1: Vec<f64>, a2: Vec<f64>) -> Result<Self, ContourError> {
        if !(b > 0.0 && b < 1.0) {
            return Err(ContourError::RadiusOutOfRange(b));
        }
        if fold == 0 {
            return Err(ContourError::ZeroFold);
        }
        if a1.len() != a2.len() {
            return Err(ContourError::ModeMismatch { outer: a1.len(), inner: a2.len() });
        }
        if a1.is_empty() {
            return Err(ContourError::NoModes);
        }
        if a1.iter().chain(&a2).any(|v| !v.is_finite()) {
            return Err(ContourError::NonFinite);
        }
        Ok(Self { b, fold, a1, a2 })
    }

    /// The circular annulus `{b < |z| < 1}`.
    pub fn annulus(b: f64, fold: usize, modes: usize) -> Result<Self, ContourError> {
        Self::new(b, fold, vec![0.0; modes], vec![0.0; modes])
    }

    /// Annulus with a single first-mode perturbation on one boundary.
    pub fn perturbed(
        b: f64,
        fold: usize,
        modes: usize,
        boundary: Boundary,
        amplitude: f64,
    ) -> Result<Self, ContourError> {
        let mut c = Self::annulus(b, fold, modes)?;
        match boundary {
            Boundary::Outer => c.a1[0] = amplitude,
            Boundary::Inner => c.a2[0] = amplitude,
        }
        Ok(c)
    }

    pub fn modes(&self) -> usize {
        self.a1.len()
    }

    /// Flattened unknowns `(a1[..], a2[..])`.
    pub fn to_vector(&self) -> Vec<f64> {
        self.a1.iter().chain(&self.a2).copied().collect()
    }

    /// Same `b` and `fold` with coefficients taken from a flat vector.
    pub fn with_vector(&self, x: &[f64]) -> Self {
        let m = self.modes();
        assert_eq!(x.len(), 2 * m, "flat vector length must be twice the mode count");
        Self { b: self.b, fold: self.fold, a1: x[..m].to_vec(), a2: x[m..].to_vec() }
    }

    /// Resize to `modes` coefficients, truncating or padding with zeros.
    pub fn resized(&self, modes: usize) -> Self {
        let mut a1 = self.a1.clone();
        let mut a2 = self.a2.clone();
        a1.resize(modes, 0.0);
        a2.resize(modes, 0.0);
        Self { b: self.b, fold: self.fold, a1, a2 }
    }

    pub fn max_abs(&self) -> f64 {
        self.a1.iter().chain(&self.a2).fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn series(&self, boundary: Boundary) -> (f64, &[f64]) {
        match boundary {
            Boundary::Outer => (1.0, &self.a1),
            Boundary::Inner => (self.b, &self.a2),
        }
    }

    /// `(ρ, ρ')` at an arbitrary angle.
    pub fn radius(&self, boundary: Boundary, theta: f64) -> (f64, f64) {
        let (base, coeffs) = self.series(boundary);
        let m = self.fold as f64;
        let mut rho = base;
        let mut drho = 0.0;
        for (k, a) in coeffs.iter().enumerate() {
            let freq = m * (k + 1) as f64;
            let (s, c) = (freq * theta).sin_cos();
            rho += a * c;
            drho -= a * freq * s;
        }
        (rho, drho)
    }

    pub fn point(&self, boundary: Boundary, theta: f64) -> Complex64 {
        let (rho, _) = self.radius(boundary, theta);
        Complex64::from_polar(rho, theta)
    }
}

/// Boundary points and tangents at `N` equispaced angles `2πj/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledContour {
    pub fold: usize,
    pub theta: Vec<f64>,
    pub z1: Vec<Complex64>,
    pub z2: Vec<Complex64>,
    pub dz1: Vec<Complex64>,
    pub dz2: Vec<Complex64>,
}

impl SampledContour {
    pub fn nodes(&self) -> usize {
        self.theta.len()
    }

    pub fn boundary(&self, which: Boundary) -> (&[Complex64], &[Complex64]) {
        match which {
            Boundary::Outer => (&self.z1, &self.dz1),
            Boundary::Inner => (&self.z2, &self.dz2),
        }
    }
}

/// Smallest admissible node count for `modes` cosine modes of fold `fold`.
pub fn min_nodes(fold: usize, modes: usize) -> usize {
    2 * fold * modes + 1
}

pub fn check_sampling(fold: usize, modes: usize, nodes: usize) -> Result<(), ContourError> {
    if fold == 0 {
        return Err(ContourError::ZeroFold);
    }
    let required = min_nodes(fold, modes);
    if nodes < required {
        return Err(ContourError::Undersampled { nodes, fold, modes, required });
    }
    if nodes % fold != 0 {
        return Err(ContourError::NotFoldMultiple { nodes, fold });
    }
    Ok(())
}

/// Precomputed trigonometric tables for one `(fold, modes, nodes)` grid.
///
/// `cos(m k θ_i)` is read from the table at index `(m k i) mod N`; the
/// table is mirrored so that `θ → -θ` conjugates samples exactly.
#[derive(Debug, Clone)]
pub struct Sampler {
    fold: usize,
    modes: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Sampler {
    pub fn new(fold: usize, modes: usize, nodes: usize) -> Result<Self, ContourError> {
        check_sampling(fold, modes, nodes)?;
        let mut cos = vec![0.0; nodes];
        let mut sin = vec![0.0; nodes];
        for j in 0..=nodes / 2 {
            let t = 2.0 * PI * j as f64 / nodes as f64;
            let (s, c) = t.sin_cos();
            cos[j] = c;
            sin[j] = s;
            if j > 0 && j < nodes - j {
                cos[nodes - j] = c;
                sin[nodes - j] = -s;
            }
        }
        if nodes % 2 == 0 {
            sin[nodes / 2] = 0.0;
        }
        Ok(Self { fold, modes, cos, sin })
    }

    pub fn nodes(&self) -> usize {
        self.cos.len()
    }

    pub fn fold(&self) -> usize {
        self.fold
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn theta(&self) -> Vec<f64> {
        let n = self.nodes() as f64;
        (0..self.nodes()).map(|i| 2.0 * PI * i as f64 / n).collect()
    }

    /// `(cos, sin)` of `2π j / N`.
    pub fn trig(&self, j: usize) -> (f64, f64) {
        let j = j % self.nodes();
        (self.cos[j], self.sin[j])
    }

    fn radii(&self, base: f64, coeffs: &[f64], i: usize) -> (f64, f64) {
        let n = self.nodes();
        let step = (self.fold * i) % n;
        let mut idx = 0usize;
        let mut rho = base;
        let mut drho = 0.0;
        for (k, a) in coeffs.iter().enumerate() {
            idx += step;
            if idx >= n {
                idx -= n;
            }
            let freq = (self.fold * (k + 1)) as f64;
            rho += a * self.cos[idx];
            drho -= a * freq * self.sin[idx];
        }
        (rho, drho)
    }

    /// Sample both curves. Positivity and ordering are checked at every node.
    pub fn sample(&self, coeffs: &VortexContourCoeffs) -> Result<SampledContour, ContourError> {
        assert_eq!(coeffs.fold, self.fold, "sampler built for a different fold");
        let n = self.nodes();
        if coeffs.modes() > self.modes {
            check_sampling(self.fold, coeffs.modes(), n)?;
        }
        let theta = self.theta();
        let mut z1 = Vec::with_capacity(n);
        let mut z2 = Vec::with_capacity(n);
        let mut dz1 = Vec::with_capacity(n);
        let mut dz2 = Vec::with_capacity(n);
        for i in 0..n {
            let e = Complex64::new(self.cos[i], self.sin[i]);
            let (r1, dr1) = self.radii(1.0, &coeffs.a1, i);
            let (r2, dr2) = self.radii(coeffs.b, &coeffs.a2, i);
            if !(r1 > 0.0) {
                return Err(ContourError::NonPositiveRadius {
                    boundary: Boundary::Outer,
                    theta: theta[i],
                    radius: r1,
                });
            }
            if !(r2 > 0.0) {
                return Err(ContourError::NonPositiveRadius {
                    boundary: Boundary::Inner,
                    theta: theta[i],
                    radius: r2,
                });
            }
            if r2 >= r1 {
                return Err(ContourError::Crossing { theta: theta[i], outer: r1, inner: r2 });
            }
            z1.push(e * r1);
            z2.push(e * r2);
            dz1.push(e * Complex64::new(dr1, r1));
            dz2.push(e * Complex64::new(dr2, r2));
        }
        Ok(SampledContour { fold: self.fold, theta, z1, z2, dz1, dz2 })
    }
}

/// Sample at `nodes` equispaced angles; `nodes` must be a multiple of the
/// fold and at least `2 m M + 1`.
pub fn sample(coeffs: &VortexContourCoeffs, nodes: usize) -> Result<SampledContour, ContourError> {
    Sampler::new(coeffs.fold, coeffs.modes(), nodes)?.sample(coeffs)
}

/// Minimum distance between the two boundaries over all node pairs.
pub fn boundary_distance(sc: &SampledContour) -> f64 {
    let mut best = f64::INFINITY;
    for p in &sc.z1 {
        for q in &sc.z2 {
            best = best.min((p - q).norm_sqr());
        }
    }
    best.sqrt()
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if hi - lo < 1e-14 {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Node-pair minimum followed by alternating golden-section refinement of
/// both angles on the continuous curves around the discrete argmin.
pub fn refined_boundary_distance(coeffs: &VortexContourCoeffs, sc: &SampledContour) -> f64 {
    let n = sc.nodes();
    let (mut bi, mut bj, mut best) = (0, 0, f64::INFINITY);
    for (i, p) in sc.z1.iter().enumerate() {
        for (j, q) in sc.z2.iter().enumerate() {
            let d = (p - q).norm_sqr();
            if d < best {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    let h = 2.0 * PI / n as f64;
    let mut alpha = sc.theta[bi];
    let mut beta = sc.theta[bj];
    let mut current = best;
    for _ in 0..8 {
        let zb = coeffs.point(Boundary::Inner, beta);
        let (a, _) = golden_min(|t| (coeffs.point(Boundary::Outer, t) - zb).norm_sqr(), alpha - h, alpha + h);
        alpha = a;
        let za = coeffs.point(Boundary::Outer, alpha);
        let (bt, v) = golden_min(|t| (za - coeffs.point(Boundary::Inner, t)).norm_sqr(), beta - h, beta + h);
        beta = bt;
        let improved = current - v;
        current = current.min(v);
        if improved.abs() < 1e-18 {
            break;
        }
    }
    current.min(best).sqrt()
}

/// The first `N/m` nodes of a sampled contour; the rest follow by rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedContour {
    pub fold: usize,
    pub nodes: usize,
    pub theta: Vec<f64>,
    pub z1: Vec<Complex64>,
    pub z2: Vec<Complex64>,
    pub dz1: Vec<Complex64>,
    pub dz2: Vec<Complex64>,
}

pub fn fold_reduce(sc: &SampledContour) -> ReducedContour {
    let n = sc.nodes();
    assert_eq!(n % sc.fold, 0, "node count must be a multiple of the fold");
    let len = n / sc.fold;
    ReducedContour {
        fold: sc.fold,
        nodes: n,
        theta: sc.theta[..len].to_vec(),
        z1: sc.z1[..len].to_vec(),
        z2: sc.z2[..len].to_vec(),
        dz1: sc.dz1[..len].to_vec(),
        dz2: sc.dz2[..len].to_vec(),
    }
}

/// Rebuild all `N` nodes from the fundamental sector.
pub fn reconstruct(rc: &ReducedContour) -> SampledContour {
    let len = rc.theta.len();
    let rotate = |v: &[Complex64]| -> Vec<Complex64> {
        (0..rc.fold)
            .flat_map(|s| {
                let w = Complex64::from_polar(1.0, 2.0 * PI * s as f64 / rc.fold as f64);
                v.iter().map(move |z| if s == 0 { *z } else { w * z })
            })
            .collect()
    };
    let theta = (0..rc.nodes).map(|i| 2.0 * PI * i as f64 / rc.nodes as f64).collect();
    debug_assert_eq!(len * rc.fold, rc.nodes);
    SampledContour {
        fold: rc.fold,
        theta,
        z1: rotate(&rc.z1),
        z2: rotate(&rc.z2),
        dz1: rotate(&rc.dz1),
        dz2: rotate(&rc.dz2),
    }
}
