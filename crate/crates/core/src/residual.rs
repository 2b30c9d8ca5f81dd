//! The finite-dimensional map `F_{b,Ω}: R^{2M} → R^{2M}`.
//!
//! Coefficients are sampled onto the grid, the pointwise residual is
//! evaluated on the fundamental sector, and each boundary's residual is
//! projected onto `sin(m k θ)`, `k = 1..M`, with
//! `b_k = (2/N) Σ_i r(θ_i) sin(m k θ_i)`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::contour::{ContourError, Sampler, VortexContourCoeffs};
use crate::quadrature::{vstate_residual_leading, vstate_residual_pointwise};

/// Sine coefficients of the residual on each boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteResidual {
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    /// Largest pointwise residual over the nodes of both boundaries.
    pub max_abs: f64,
    /// Largest constant/cosine coefficient of the sector residual; zero
    /// for an exactly odd residual.
    pub off_sine: f64,
}

impl DiscreteResidual {
    pub fn to_vector(&self) -> Vec<f64> {
        self.b1.iter().chain(&self.b2).copied().collect()
    }

    pub fn norm(&self) -> f64 {
        self.b1.iter().chain(&self.b2).map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Reusable evaluator of `F_{b,Ω}` on one `(b, m, M, N)` grid.
#[derive(Clone)]
pub struct ResidualMap {
    b: f64,
    sampler: Sampler,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ResidualMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ResidualMap")
            .field("b", &self.b)
            .field("fold", &self.sampler.fold())
            .field("modes", &self.sampler.modes())
            .field("nodes", &self.sampler.nodes())
            .finish()
    }
}

impl ResidualMap {
    pub fn new(b: f64, fold: usize, modes: usize, nodes: usize) -> Result<Self, ContourError> {
        if !(b > 0.0 && b < 1.0) {
            return Err(ContourError::RadiusOutOfRange(b));
        }
        let sampler = Sampler::new(fold, modes, nodes)?;
        let fft = FftPlanner::new().plan_fft_forward(nodes / fold);
        Ok(Self { b, sampler, fft })
    }

    pub fn fold(&self) -> usize {
        self.sampler.fold()
    }

    pub fn modes(&self) -> usize {
        self.sampler.modes()
    }

    pub fn nodes(&self) -> usize {
        self.sampler.nodes()
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sampler
    }

    pub fn coeffs_from(&self, x: &[f64]) -> VortexContourCoeffs {
        let m = self.modes();
        VortexContourCoeffs { b: self.b, fold: self.fold(), a1: x[..m].to_vec(), a2: x[m..].to_vec() }
    }

    /// `F` at flattened coefficients `x = (a1, a2)`.
    pub fn eval(&self, x: &[f64], omega: f64) -> Result<DiscreteResidual, ContourError> {
        self.assemble(&self.coeffs_from(x), omega)
    }

    pub fn assemble(&self, coeffs: &VortexContourCoeffs, omega: f64) -> Result<DiscreteResidual, ContourError> {
        let sc = self.sampler.sample(coeffs)?;
        let sector = self.nodes() / self.fold();
        let (r1, r2) = vstate_residual_leading(&sc, omega, sector);
        let (b1, c1) = self.project_sector(&r1);
        let (b2, c2) = self.project_sector(&r2);
        let max_abs = r1.iter().chain(&r2).fold(0.0f64, |acc, v| acc.max(v.abs()));
        Ok(DiscreteResidual { b1, b2, max_abs, off_sine: c1.max(c2) })
    }

    /// Sine coefficients from one period of a `2π/m`-periodic sequence via
    /// a length-`N/m` FFT, plus the largest cosine/constant content.
    fn project_sector(&self, values: &[f64]) -> (Vec<f64>, f64) {
        let len = values.len();
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.process(&mut buf);
        let scale = 2.0 / len as f64;
        let sines = (1..=self.modes()).map(|k| -buf[k].im * scale).collect();
        let cosines = (0..=len / 2)
            .map(|k| if k == 0 { buf[0].re / len as f64 } else { buf[k].re * scale })
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        (sines, cosines)
    }
}

/// Evaluate `F_{b,Ω}` at `coeffs` on an `N`-node grid.
pub fn assemble(coeffs: &VortexContourCoeffs, omega: f64, nodes: usize) -> Result<DiscreteResidual, ContourError> {
    ResidualMap::new(coeffs.b, coeffs.fold, coeffs.modes(), nodes)?.assemble(coeffs, omega)
}

/// Direct length-`N` sine projection `(2/N) Σ r_i sin(m k θ_i)`.
pub fn project_sine(values: &[f64], fold: usize, modes: usize) -> Vec<f64> {
    let n = values.len();
    let sampler = Sampler::new(fold, modes, n).expect("projection grid must resolve the requested modes");
    (1..=modes)
        .map(|k| {
            let sum: f64 = values
                .iter()
                .enumerate()
                .map(|(i, v)| v * sampler.trig(fold * k * i).1)
                .sum();
            2.0 * sum / n as f64
        })
        .collect()
}

/// Reference path: full-length residual and projection without any use of
/// the rotation symmetry.
pub fn assemble_unreduced(
    coeffs: &VortexContourCoeffs,
    omega: f64,
    nodes: usize,
) -> Result<DiscreteResidual, ContourError> {
    let sc = crate::contour::sample(coeffs, nodes)?;
    let (r1, r2) = vstate_residual_pointwise(&sc, omega);
    let modes = coeffs.modes();
    let b1 = project_sine(&r1, coeffs.fold, modes);
    let b2 = project_sine(&r2, coeffs.fold, modes);
    let max_abs = r1.iter().chain(&r2).fold(0.0f64, |acc, v| acc.max(v.abs()));
    let off = |r: &[f64]| {
        let n = r.len();
        let sampler = Sampler::new(coeffs.fold, modes, n).expect("validated above");
        (0..=n / (2 * coeffs.fold))
            .map(|k| {
                let s: f64 = r.iter().enumerate().map(|(i, v)| v * sampler.trig(coeffs.fold * k * i).0).sum();
                if k == 0 {
                    s / n as f64
                } else {
                    2.0 * s / n as f64
                }
            })
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
    };
    Ok(DiscreteResidual { b1, b2, max_abs, off_sine: off(&r1).max(off(&r2)) })
}
