//! Trapezoidal evaluation of the boundary integral
//!
//! ```text
//! I(z) = (1/2πi) ∮ (conj(ζ) - conj(z)) / (ζ - z) dζ
//! ```
//!
//! over one sampled boundary, and the pointwise rotating-patch residual
//! `Re[(2Ω conj(z) + I₁(z) - I₂(z)) z_θ]` built from it.

use num_complex::Complex64;
use thiserror::Error;

use crate::contour::{Boundary, SampledContour};

/// Off-curve targets closer than this to a source node are rejected.
pub const PROXIMITY_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("on-curve target {index} does not coincide with source node {index}")]
    Misaligned { index: usize },
    #[error("{targets} on-curve targets exceed the {nodes} source nodes")]
    TooManyTargets { targets: usize, nodes: usize },
    #[error("off-curve target {index} lies {distance:e} from source node {node}")]
    TooClose { index: usize, node: usize, distance: f64 },
    #[error("source has {points} points but {tangents} tangents")]
    SourceShape { points: usize, tangents: usize },
}

/// One sampled boundary used as the integration contour.
#[derive(Debug, Clone, Copy)]
pub struct Source<'a> {
    pub z: &'a [Complex64],
    pub dz: &'a [Complex64],
}

impl<'a> Source<'a> {
    pub fn new(z: &'a [Complex64], dz: &'a [Complex64]) -> Result<Self, QuadratureError> {
        if z.len() != dz.len() {
            return Err(QuadratureError::SourceShape { points: z.len(), tangents: dz.len() });
        }
        Ok(Self { z, dz })
    }

    pub fn of(sc: &'a SampledContour, which: Boundary) -> Self {
        let (z, dz) = sc.boundary(which);
        Self { z, dz }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagonal {
    /// Targets are the leading source nodes themselves (index-aligned).
    OnCurve,
    /// Targets are away from the source curve.
    OffCurve,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSum {
    pub target: Complex64,
    pub value: Complex64,
}

// 1/(2πi) times the trapezoid weight 2π/N.
#[inline]
fn weight(n: usize) -> Complex64 {
    Complex64::new(0.0, -1.0 / n as f64)
}

/// Integral at source node `i` itself, with the removable diagonal term
/// replaced by its limit `conj(z')/z'`.
#[inline]
pub(crate) fn self_integral(src: Source<'_>, i: usize) -> Complex64 {
    let z = src.z[i];
    let zc = z.conj();
    let mut acc = src.dz[i].conj();
    for (k, (zeta, dzeta)) in src.z.iter().zip(src.dz).enumerate() {
        if k != i {
            acc += (zeta.conj() - zc) / (zeta - z) * dzeta;
        }
    }
    acc * weight(src.z.len())
}

#[inline]
pub(crate) fn cross_integral(src: Source<'_>, z: Complex64) -> Complex64 {
    let zc = z.conj();
    let mut acc = Complex64::new(0.0, 0.0);
    for (zeta, dzeta) in src.z.iter().zip(src.dz) {
        acc += (zeta.conj() - zc) / (zeta - z) * dzeta;
    }
    acc * weight(src.z.len())
}

/// Trapezoidal approximation of `I` over `source` at each target.
///
/// With [`Diagonal::OnCurve`] the targets must equal the first
/// `targets.len()` source nodes, in order.
pub fn kernel_integral(
    targets: &[Complex64],
    source: Source<'_>,
    diagonal: Diagonal,
) -> Result<Vec<KernelSum>, QuadratureError> {
    let n = source.z.len();
    match diagonal {
        Diagonal::OnCurve => {
            if targets.len() > n {
                return Err(QuadratureError::TooManyTargets { targets: targets.len(), nodes: n });
            }
            targets
                .iter()
                .enumerate()
                .map(|(i, &t)| {
                    if t != source.z[i] {
                        return Err(QuadratureError::Misaligned { index: i });
                    }
                    Ok(KernelSum { target: t, value: self_integral(source, i) })
                })
                .collect()
        }
        Diagonal::OffCurve => targets
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let (node, distance) = source
                    .z
                    .iter()
                    .enumerate()
                    .map(|(k, zeta)| (k, (zeta - t).norm()))
                    .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
                if distance < PROXIMITY_THRESHOLD {
                    return Err(QuadratureError::TooClose { index: i, node, distance });
                }
                Ok(KernelSum { target: t, value: cross_integral(source, t) })
            })
            .collect(),
    }
}

/// Residual on both boundaries at the first `count` nodes.
///
/// The residual is invariant under the m-fold rotation, so `count = N/m`
/// already determines it everywhere.
pub fn vstate_residual_leading(sc: &SampledContour, omega: f64, count: usize) -> (Vec<f64>, Vec<f64>) {
    let outer = Source::of(sc, Boundary::Outer);
    let inner = Source::of(sc, Boundary::Inner);
    let count = count.min(sc.nodes());
    let r1 = (0..count)
        .map(|i| {
            let z = sc.z1[i];
            let integral = self_integral(outer, i) - cross_integral(inner, z);
            ((2.0 * omega * z.conj() + integral) * sc.dz1[i]).re
        })
        .collect();
    let r2 = (0..count)
        .map(|i| {
            let z = sc.z2[i];
            let integral = cross_integral(outer, z) - self_integral(inner, i);
            ((2.0 * omega * z.conj() + integral) * sc.dz2[i]).re
        })
        .collect();
    (r1, r2)
}

/// Pointwise residual at all `N` nodes of both boundaries.
pub fn vstate_residual_pointwise(sc: &SampledContour, omega: f64) -> (Vec<f64>, Vec<f64>) {
    vstate_residual_leading(sc, omega, sc.nodes())
}
