//! Linear theory around the annulus `{b < |z| < 1}`.
//!
//! Everything here is indexed by the fold number `m` (the number of
//! symmetry sides of the bifurcating patch) except the per-frequency
//! objects (`delta`, `frequency_matrix`, `kernel_vector`), which take the
//! Fourier frequency `n`. A fold-`m` branch lives on frequency `n = m - 1`.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DispersionError {
    #[error("inner radius b = {0} must lie in (0, 1)")]
    RadiusOutOfRange(f64),
    #[error("fold number m = {0} must be at least {1}")]
    FoldTooSmall(u32, u32),
}

/// `base^exp` by binary exponentiation.
pub fn powu(base: f64, mut exp: u64) -> f64 {
    let mut acc = 1.0;
    let mut sq = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= sq;
        }
        exp >>= 1;
        if exp > 0 {
            sq *= sq;
        }
    }
    acc
}

fn check_radius(b: f64) -> Result<(), DispersionError> {
    if b > 0.0 && b < 1.0 {
        Ok(())
    } else {
        Err(DispersionError::RadiusOutOfRange(b))
    }
}

/// The dispersion polynomial `Δ_n(λ, b)`, quadratic in `λ`.
pub fn delta(n: u32, lambda: f64, b: f64) -> Result<f64, DispersionError> {
    check_radius(b)?;
    let nf = f64::from(n);
    let b2 = b * b;
    let first = (1.0 - lambda) + b2 + nf * (b2 - lambda);
    let second = nf * (1.0 - lambda) - lambda;
    Ok(first * second + powu(b, 2 * u64::from(n) + 2))
}

/// `f_m(b) = 1 + b^m - m(1 - b²)/2`. Negative values mean two distinct
/// bifurcation speeds exist for fold `m`.
pub fn feasibility(m: u32, b: f64) -> f64 {
    1.0 + powu(b, u64::from(m)) - f64::from(m) * (1.0 - b * b) / 2.0
}

fn feasibility_slope(m: u32, b: f64) -> f64 {
    let mf = f64::from(m);
    mf * (b + powu(b, u64::from(m) - 1))
}

/// Root of a strictly monotone function on `(lo, hi)` with a sign change.
///
/// Bisection keeps a bracket; a Newton step is taken whenever it lands
/// inside the bracket. Stops at `|f| <= 1e-13` or bracket width `<= 1e-15`.
pub(crate) fn monotone_root<F, D>(f: F, df: D, mut lo: f64, mut hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let f_lo = f(lo);
    let increasing = f_lo < 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..400 {
        let fx = f(x);
        if fx.abs() <= 1e-13 || hi - lo <= 1e-15 {
            return x;
        }
        if (fx < 0.0) == increasing {
            lo = x;
        } else {
            hi = x;
        }
        let slope = df(x);
        let newton = x - fx / slope;
        x = if slope != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    x
}

/// The unique `b_m ∈ (0, 1)` with `f_m(b_m) = 0`; fold `m` bifurcates from
/// the annulus only for `b < b_m`.
pub fn critical_radius(m: u32) -> Result<f64, DispersionError> {
    if m < 3 {
        return Err(DispersionError::FoldTooSmall(m, 3));
    }
    Ok(monotone_root(
        |b| feasibility(m, b),
        |b| feasibility_slope(m, b),
        0.0,
        1.0,
    ))
}

/// Linear-theory bifurcation data for one `(m, b)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionPoint {
    pub fold: u32,
    pub inner_radius: f64,
    pub lambda_minus: f64,
    pub lambda_plus: f64,
    pub omega_minus: f64,
    pub omega_plus: f64,
    pub transversal: bool,
}

impl DispersionPoint {
    /// Frequency carrying the fold-`m` kernel.
    pub fn frequency(&self) -> u32 {
        self.fold - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Eigenvalues {
    Feasible(DispersionPoint),
    /// `f_m(b) >= 0`: no pair of distinct real speeds.
    Infeasible { fold: u32, inner_radius: f64, feasibility: f64 },
}

impl Eigenvalues {
    pub fn point(&self) -> Option<&DispersionPoint> {
        match self {
            Eigenvalues::Feasible(p) => Some(p),
            Eigenvalues::Infeasible { .. } => None,
        }
    }
}

/// Angular velocities `Ω_m^±(b)` at which fold-`m` states branch off the
/// annulus, in center ± radius form.
pub fn eigenvalues_for_fold(m: u32, b: f64) -> Result<Eigenvalues, DispersionError> {
    if m < 3 {
        return Err(DispersionError::FoldTooSmall(m, 3));
    }
    check_radius(b)?;
    let f = feasibility(m, b);
    if f >= 0.0 {
        return Ok(Eigenvalues::Infeasible { fold: m, inner_radius: b, feasibility: f });
    }
    let mf = f64::from(m);
    let shifted = mf * (1.0 - b * b) / 2.0 - 1.0;
    let disc = shifted * shifted - powu(b, 2 * u64::from(m));
    if disc <= 0.0 {
        return Ok(Eigenvalues::Infeasible { fold: m, inner_radius: b, feasibility: f });
    }
    let center = (1.0 - b * b) / 4.0;
    let radius = disc.sqrt() / (2.0 * mf);
    let omega_minus = center - radius;
    let omega_plus = center + radius;
    Ok(Eigenvalues::Feasible(DispersionPoint {
        fold: m,
        inner_radius: b,
        lambda_minus: 1.0 - 2.0 * omega_plus,
        lambda_plus: 1.0 - 2.0 * omega_minus,
        omega_minus,
        omega_plus,
        transversal: true,
    }))
}

/// The 2×2 linearized operator acting on frequency `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyMatrix {
    pub n: u32,
    pub lambda: f64,
    pub b: f64,
    pub entries: [[f64; 2]; 2],
}

impl FrequencyMatrix {
    pub fn det(&self) -> f64 {
        let [[p, q], [r, s]] = self.entries;
        p * s - q * r
    }

    pub fn apply(&self, v: (f64, f64)) -> (f64, f64) {
        let [[p, q], [r, s]] = self.entries;
        (p * v.0 + q * v.1, r * v.0 + s * v.1)
    }
}

pub fn frequency_matrix(n: u32, lambda: f64, b: f64) -> FrequencyMatrix {
    let nf = f64::from(n);
    let b2 = b * b;
    let nu = u64::from(n);
    FrequencyMatrix {
        n,
        lambda,
        b,
        entries: [
            [(1.0 - lambda) + b2 + nf * (b2 - lambda), -powu(b, nu + 2)],
            [powu(b, nu + 1), b * (nf * (1.0 - lambda) - lambda)],
        ],
    }
}

/// Generator of the kernel of `frequency_matrix(n, λ, b)`. Only meaningful
/// when `Δ_n(λ, b) = 0`; the caller is responsible for checking that.
pub fn kernel_vector(n: u32, lambda: f64, b: f64) -> (f64, f64) {
    let nf = f64::from(n);
    (nf * (1.0 - lambda) - lambda, -powu(b, u64::from(n)))
}

/// `φ_n(b) = (1 - b²) n - (1 + b²) - 2 b^{n+1}`; vanishes where
/// `λ = (1 + b²)/2` is a double eigenvalue.
pub fn double_eigenvalue_locus(n: u32, b: f64) -> f64 {
    let nf = f64::from(n);
    let b2 = b * b;
    (1.0 - b2) * nf - (1.0 + b2) - 2.0 * powu(b, u64::from(n) + 1)
}

/// Unique root of `φ_n` on `(0, 1)` for `n >= 2`.
pub fn double_eigenvalue_radius(n: u32) -> Result<f64, DispersionError> {
    if n < 2 {
        return Err(DispersionError::FoldTooSmall(n, 2));
    }
    let nf = f64::from(n);
    Ok(monotone_root(
        |b| double_eigenvalue_locus(n, b),
        |b| -2.0 * b * nf - 2.0 * b - 2.0 * (nf + 1.0) * powu(b, u64::from(n)),
        0.0,
        1.0,
    ))
}
