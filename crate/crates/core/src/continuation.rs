//! Warm-started sweeps in `Ω` along a bifurcating branch.

use std::fmt;

use thiserror::Error;

use crate::contour::{refined_boundary_distance, sample, Boundary, VortexContourCoeffs};
use crate::dispersion::{eigenvalues_for_fold, DispersionError, Eigenvalues};
use crate::solver::{newton_solve, SolveError, SolveReport, SolverConfig};

/// Which end of the trivial branch a sweep starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchOrigin {
    OmegaMinus,
    OmegaPlus,
}

impl BranchOrigin {
    /// Sweeps ascend away from `Ω⁻` and descend away from `Ω⁺`.
    pub fn from_step(step: f64) -> Self {
        if step > 0.0 {
            BranchOrigin::OmegaMinus
        } else {
            BranchOrigin::OmegaPlus
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BranchOrigin::OmegaMinus => "omega_minus",
            BranchOrigin::OmegaPlus => "omega_plus",
        }
    }
}

impl fmt::Display for BranchOrigin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BranchOrigin {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "omega_minus" => Ok(BranchOrigin::OmegaMinus),
            "omega_plus" => Ok(BranchOrigin::OmegaPlus),
            other => Err(format!("unknown branch origin `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub omega: f64,
    pub report: SolveReport,
    /// Minimum distance between the outer and inner boundary.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub b: f64,
    pub fold: usize,
    pub origin: BranchOrigin,
    pub step: f64,
    pub records: Vec<BranchRecord>,
    /// First grid `Ω` at which the solve failed, even after the retry.
    pub terminated_at: Option<f64>,
    pub termination_reason: Option<String>,
}

/// First-point seeds: the annulus with one first-mode coefficient set to
/// each amplitude in turn.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedLadder {
    pub boundary: Boundary,
    pub amplitudes: Vec<f64>,
    /// Keep trivial roots instead of treating them as a failed solve.
    pub accept_trivial: bool,
}

impl SeedLadder {
    /// `a_{1,1} ∈ {0.02, 0.04, 0.06}`, used when descending from `Ω⁺`.
    pub fn outer() -> Self {
        Self { boundary: Boundary::Outer, amplitudes: vec![0.02, 0.04, 0.06], accept_trivial: false }
    }

    /// `a_{2,1} ∈ {-0.02, -0.04, -0.06}`, used when ascending from `Ω⁻`.
    pub fn inner() -> Self {
        Self { boundary: Boundary::Inner, amplitudes: vec![-0.02, -0.04, -0.06], accept_trivial: false }
    }

    pub fn for_origin(origin: BranchOrigin) -> Self {
        match origin {
            BranchOrigin::OmegaMinus => Self::inner(),
            BranchOrigin::OmegaPlus => Self::outer(),
        }
    }

    /// Zero seed with trivial roots accepted: the annulus at every `Ω`.
    pub fn annulus() -> Self {
        Self { boundary: Boundary::Outer, amplitudes: vec![0.0], accept_trivial: true }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("step must be nonzero and finite, got {0}")]
    BadStep(f64),
    #[error("step {step} points away from the end value (start {start}, end {end})")]
    WrongDirection { start: f64, end: f64, step: f64 },
    #[error("seed ladder is empty")]
    EmptyLadder,
    #[error("no ladder seed gave a nontrivial state at Ω = {omega}: {attempts}")]
    EmptyBranch { omega: f64, attempts: String },
    #[error("fold {0} is below 3")]
    FoldTooSmall(usize),
    #[error("no bifurcation from the annulus for m = {fold}, b = {b}")]
    Infeasible { fold: usize, b: f64 },
    #[error(transparent)]
    Dispersion(#[from] DispersionError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Minimum boundary distance of a state, resampled on `nodes` points.
pub fn state_distance(coeffs: &VortexContourCoeffs, nodes: usize) -> f64 {
    match sample(coeffs, nodes) {
        Ok(sc) => refined_boundary_distance(coeffs, &sc),
        Err(_) => f64::NAN,
    }
}

enum Failure {
    /// Newton converged, but to the annulus.
    Collapsed(String),
    Failed(String),
}

impl Failure {
    fn message(&self) -> &str {
        match self {
            Failure::Collapsed(m) | Failure::Failed(m) => m,
        }
    }
}

fn accepted(
    b: f64,
    omega: f64,
    fold: usize,
    seed: &VortexContourCoeffs,
    config: &SolverConfig,
    accept_trivial: bool,
) -> Result<SolveReport, Failure> {
    match newton_solve(b, omega, fold, seed, config) {
        Ok(r) if r.trivial && !accept_trivial => {
            Err(Failure::Collapsed(format!("collapsed to the annulus in {} iterations", r.iterations)))
        }
        Ok(r) => Ok(r),
        Err(e) => Err(Failure::Failed(e.to_string())),
    }
}

fn from_ladder(
    b: f64,
    omega: f64,
    fold: usize,
    ladder: &SeedLadder,
    config: &SolverConfig,
) -> Result<Result<SolveReport, String>, ContinuationError> {
    let mut attempts = Vec::new();
    for &amp in &ladder.amplitudes {
        let seed = VortexContourCoeffs::perturbed(b, fold, config.modes, ladder.boundary, amp)
            .map_err(SolveError::Contour)?;
        match accepted(b, omega, fold, &seed, config, ladder.accept_trivial) {
            Ok(r) => return Ok(Ok(r)),
            Err(e) => attempts.push(format!("{amp}: {}", e.message())),
        }
    }
    Ok(Err(attempts.join("; ")))
}

/// Grid `start + i·step` strictly before `end`, then `end` itself.
fn omega_grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let span = (end - start) / step;
    let whole = (span + 1e-9).floor().max(0.0) as usize;
    let mut grid: Vec<f64> = (0..=whole).map(|i| start + i as f64 * step).collect();
    if span - whole as f64 > 1e-9 {
        grid.push(end);
    }
    grid
}

/// Sweep `Ω_i = start + i·step` up to `end` (which is always included),
/// seeding each point with the previous state.
///
/// A failed point is retried once through the midpoint of the last step.
/// If the failure was a collapse onto the annulus, the point is reseeded
/// from the ladder before the branch is declared terminated.
pub fn sweep(
    b: f64,
    fold: usize,
    omega_start: f64,
    omega_end: f64,
    omega_step: f64,
    ladder: &SeedLadder,
    config: &SolverConfig,
) -> Result<Branch, ContinuationError> {
    sweep_observed(b, fold, omega_start, omega_end, omega_step, ladder, config, |_| {})
}

/// [`sweep`] with a callback invoked on every accepted record.
#[allow(clippy::too_many_arguments)]
pub fn sweep_observed<F: FnMut(&BranchRecord)>(
    b: f64,
    fold: usize,
    omega_start: f64,
    omega_end: f64,
    omega_step: f64,
    ladder: &SeedLadder,
    config: &SolverConfig,
    mut observe: F,
) -> Result<Branch, ContinuationError> {
    if fold < 3 {
        return Err(ContinuationError::FoldTooSmall(fold));
    }
    if omega_step == 0.0 || !omega_step.is_finite() {
        return Err(ContinuationError::BadStep(omega_step));
    }
    if (omega_end - omega_start) * omega_step < 0.0 {
        return Err(ContinuationError::WrongDirection { start: omega_start, end: omega_end, step: omega_step });
    }
    if ladder.amplitudes.is_empty() {
        return Err(ContinuationError::EmptyLadder);
    }
    config.validate(fold)?;

    let grid = omega_grid(omega_start, omega_end, omega_step);
    let mut branch = Branch {
        b,
        fold,
        origin: BranchOrigin::from_step(omega_step),
        step: omega_step,
        records: Vec::with_capacity(grid.len()),
        terminated_at: None,
        termination_reason: None,
    };

    let first = from_ladder(b, omega_start, fold, ladder, config)?
        .map_err(|attempts| ContinuationError::EmptyBranch { omega: omega_start, attempts })?;
    let record = BranchRecord { omega: omega_start, distance: state_distance(&first.coeffs, config.nodes), report: first };
    observe(&record);
    branch.records.push(record);

    for &omega in &grid[1..] {
        let prev = branch.records.last().expect("branch holds its first record");
        let warm = prev.report.coeffs.clone();
        let mid = (prev.omega + omega) / 2.0;
        let mut solved = accepted(b, omega, fold, &warm, config, ladder.accept_trivial).or_else(|first_err| {
            accepted(b, mid, fold, &warm, config, ladder.accept_trivial)
                .and_then(|r| accepted(b, omega, fold, &r.coeffs, config, ladder.accept_trivial))
                .map_err(|retry_err| (first_err, retry_err))
        });
        // Close to a bifurcation point the amplitude grows too fast for a
        // warm start, which then falls back onto the annulus.
        if let Err((Failure::Collapsed(_), _) | (_, Failure::Collapsed(_))) = &solved {
            if let Ok(r) = from_ladder(b, omega, fold, ladder, config)? {
                solved = Ok(r);
            }
        }
        match solved {
            Ok(report) => {
                let record = BranchRecord { omega, distance: state_distance(&report.coeffs, config.nodes), report };
                observe(&record);
                branch.records.push(record);
            }
            Err((first_err, retry_err)) => {
                branch.terminated_at = Some(omega);
                branch.termination_reason =
                    Some(format!("{}; half-step retry: {}", first_err.message(), retry_err.message()));
                break;
            }
        }
    }
    Ok(branch)
}

/// Sweep range starting one step inside `[Ω⁻, Ω⁺]` at `origin` and ending
/// one step inside the other eigenvalue, as `(start, end, signed step)`.
pub fn eigenvalue_range(b: f64, fold: usize, origin: BranchOrigin, step: f64) -> Result<(f64, f64, f64), ContinuationError> {
    if fold < 3 {
        return Err(ContinuationError::FoldTooSmall(fold));
    }
    if step <= 0.0 || !step.is_finite() {
        return Err(ContinuationError::BadStep(step));
    }
    let m = u32::try_from(fold).map_err(|_| ContinuationError::FoldTooSmall(fold))?;
    let point = match eigenvalues_for_fold(m, b)? {
        Eigenvalues::Feasible(p) => p,
        Eigenvalues::Infeasible { .. } => return Err(ContinuationError::Infeasible { fold, b }),
    };
    let (start, end, signed) = match origin {
        BranchOrigin::OmegaMinus => (point.omega_minus + step, point.omega_plus - step, step),
        BranchOrigin::OmegaPlus => (point.omega_plus - step, point.omega_minus + step, -step),
    };
    if (end - start) * signed < 0.0 {
        return Ok((start, start, signed));
    }
    Ok((start, end, signed))
}

/// Sweep away from `Ω⁻` (ascending) or `Ω⁺` (descending) towards the other
/// eigenvalue.
pub fn sweep_from_eigenvalue(
    b: f64,
    fold: usize,
    origin: BranchOrigin,
    step: f64,
    ladder: &SeedLadder,
    config: &SolverConfig,
) -> Result<Branch, ContinuationError> {
    let (start, end, signed) = eigenvalue_range(b, fold, origin, step)?;
    sweep(b, fold, start, end, signed, ladder, config)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceProfile {
    pub points: Vec<(f64, f64)>,
    pub argmin_omega: f64,
    pub min_distance: f64,
}

/// Boundary distance against `Ω` over the recorded states.
pub fn distance_profile(branch: &Branch) -> DistanceProfile {
    let points: Vec<(f64, f64)> = branch.records.iter().map(|r| (r.omega, r.distance)).collect();
    let (argmin_omega, min_distance) = points
        .iter()
        .copied()
        .fold((f64::NAN, f64::INFINITY), |best, p| if p.1 < best.1 { p } else { best });
    DistanceProfile { points, argmin_omega, min_distance }
}
