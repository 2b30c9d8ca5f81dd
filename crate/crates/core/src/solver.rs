//! Newton iteration for nontrivial roots of `F_{b,Ω}`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use thiserror::Error;

use crate::contour::{check_sampling, ContourError, VortexContourCoeffs};
use crate::residual::ResidualMap;

/// LU pivots smaller than this abort the solve.
pub const PIVOT_THRESHOLD: f64 = 1e-14;

/// Coefficients below this magnitude count as the annulus.
pub const TRIVIAL_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub fd_step: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub modes: usize,
    pub nodes: usize,
}

impl SolverConfig {
    /// Defaults with the largest mode count the grid resolves,
    /// `M = ⌊(N - 1) / 2m⌋`.
    pub fn for_grid(fold: usize, nodes: usize) -> Self {
        Self {
            fd_step: 1e-9,
            tol: 1e-12,
            max_iter: 50,
            modes: max_modes(fold, nodes),
            nodes,
        }
    }

    pub fn validate(&self, fold: usize) -> Result<(), SolveError> {
        if !(self.fd_step > 0.0) || !(self.tol > 0.0) {
            return Err(SolveError::InvalidConfig(format!(
                "fd_step ({}) and tol ({}) must be positive",
                self.fd_step, self.tol
            )));
        }
        if self.modes == 0 {
            return Err(SolveError::InvalidConfig("at least one mode is required".into()));
        }
        check_sampling(fold, self.modes, self.nodes).map_err(SolveError::Contour)
    }
}

/// Smallest grid of the form `m·2^r` with at least 512 nodes.
pub fn default_nodes(fold: usize) -> usize {
    let mut n = fold.max(1);
    while n < 512 {
        n *= 2;
    }
    n
}

pub fn max_modes(fold: usize, nodes: usize) -> usize {
    if fold == 0 || nodes == 0 {
        return 0;
    }
    (nodes - 1) / (2 * fold)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub coeffs: VortexContourCoeffs,
    pub iterations: usize,
    pub residual_max: f64,
    pub converged: bool,
    pub trivial: bool,
    /// `max_abs` of the residual before each update and at the end.
    pub history: Vec<f64>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64, last: Box<VortexContourCoeffs> },
    #[error("geometry broke down at iteration {iteration}: {source}")]
    GeometryBreakdown { iteration: usize, source: ContourError },
    #[error("singular Jacobian at iteration {iteration} (pivot {pivot:e})")]
    SingularJacobian { iteration: usize, pivot: f64 },
    #[error("invalid seed or grid: {0}")]
    Contour(ContourError),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
}

fn jacobian_with(map: &ResidualMap, x: &[f64], f0: &[f64], omega: f64, h: f64) -> Result<DMatrix<f64>, ContourError> {
    let dim = x.len();
    let columns: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut xp = x.to_vec();
            xp[j] += h;
            let fp = map.eval(&xp, omega)?.to_vector();
            Ok(fp.iter().zip(f0).map(|(a, b)| (a - b) / h).collect())
        })
        .collect::<Result<_, ContourError>>()?;
    Ok(DMatrix::from_fn(dim, dim, |i, j| columns[j][i]))
}

/// Forward-difference Jacobian of `F_{b,Ω}`; column `j` is the derivative
/// with respect to the `j`-th flattened coefficient `(a1.., a2..)`.
pub fn fd_jacobian(coeffs: &VortexContourCoeffs, omega: f64, config: &SolverConfig) -> Result<DMatrix<f64>, SolveError> {
    config.validate(coeffs.fold)?;
    let coeffs = coeffs.resized(config.modes);
    let map = ResidualMap::new(coeffs.b, coeffs.fold, config.modes, config.nodes).map_err(SolveError::Contour)?;
    let x = coeffs.to_vector();
    let f0 = map.eval(&x, omega).map_err(SolveError::Contour)?.to_vector();
    jacobian_with(&map, &x, &f0, omega, config.fd_step).map_err(SolveError::Contour)
}

/// Rotation by `π/m`: flips the sign of every odd-`k` coefficient. This is
/// the global sign change that maps solutions to solutions.
pub fn half_turn(coeffs: &VortexContourCoeffs) -> VortexContourCoeffs {
    let flip = |v: &[f64]| -> Vec<f64> {
        v.iter().enumerate().map(|(k, a)| if k % 2 == 0 { -a } else { *a }).collect()
    };
    VortexContourCoeffs { b: coeffs.b, fold: coeffs.fold, a1: flip(&coeffs.a1), a2: flip(&coeffs.a2) }
}

/// Choose the representative with `a1[0] > 0` (then `a2[0] < 0` for every
/// state observed on the bifurcating branches).
pub fn normalize_sign(coeffs: &VortexContourCoeffs) -> VortexContourCoeffs {
    if coeffs.a1[0] < 0.0 || (coeffs.a1[0] == 0.0 && coeffs.a2[0] > 0.0) {
        half_turn(coeffs)
    } else {
        coeffs.clone()
    }
}

pub fn is_trivial(coeffs: &VortexContourCoeffs) -> bool {
    coeffs.max_abs() < TRIVIAL_THRESHOLD
}

/// Plain Newton with a fresh finite-difference Jacobian every iteration.
///
/// Stops once the largest pointwise residual on both boundaries is below
/// `config.tol`. The seed is padded or truncated to `config.modes`.
pub fn newton_solve(
    b: f64,
    omega: f64,
    fold: usize,
    seed: &VortexContourCoeffs,
    config: &SolverConfig,
) -> Result<SolveReport, SolveError> {
    config.validate(fold)?;
    if seed.fold != fold || seed.b != b {
        return Err(SolveError::InvalidConfig(format!(
            "seed was built for b = {}, m = {} but the solve asks for b = {b}, m = {fold}",
            seed.b, seed.fold
        )));
    }
    let map = ResidualMap::new(b, fold, config.modes, config.nodes).map_err(SolveError::Contour)?;
    let mut x = seed.resized(config.modes).to_vector();
    let mut history = Vec::new();

    for iteration in 0..=config.max_iter {
        let res = map.eval(&x, omega).map_err(|source| {
            if iteration == 0 {
                SolveError::Contour(source)
            } else {
                SolveError::GeometryBreakdown { iteration, source }
            }
        })?;
        history.push(res.max_abs);
        if res.max_abs < config.tol {
            let raw = map.coeffs_from(&x);
            let trivial = is_trivial(&raw);
            let coeffs = if trivial { raw } else { normalize_sign(&raw) };
            return Ok(SolveReport {
                coeffs,
                iterations: iteration,
                residual_max: res.max_abs,
                converged: true,
                trivial,
                history,
            });
        }
        if iteration == config.max_iter || !res.max_abs.is_finite() {
            return Err(SolveError::NonConvergence {
                iterations: iteration,
                residual: res.max_abs,
                last: Box::new(map.coeffs_from(&x)),
            });
        }

        let f0 = res.to_vector();
        let jac = jacobian_with(&map, &x, &f0, omega, config.fd_step)
            .map_err(|source| SolveError::GeometryBreakdown { iteration, source })?;
        let lu = jac.lu();
        let pivot = lu.u().diagonal().iter().fold(f64::INFINITY, |acc, v| acc.min(v.abs()));
        if !(pivot >= PIVOT_THRESHOLD) {
            return Err(SolveError::SingularJacobian { iteration, pivot });
        }
        let delta = lu
            .solve(&DVector::from_vec(f0))
            .ok_or(SolveError::SingularJacobian { iteration, pivot })?;
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::SingularJacobian { iteration, pivot });
        }
        for (xi, di) in x.iter_mut().zip(delta.iter()) {
            *xi -= di;
        }
    }
    unreachable!("loop returns on its final iteration")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::Boundary;
    use crate::residual::assemble;

    #[test]
    fn zero_seed_is_immediately_trivial() {
        let cfg = SolverConfig::for_grid(4, 64);
        let seed = VortexContourCoeffs::annulus(0.5, 4, cfg.modes).unwrap();
        let r = newton_solve(0.5, 0.2, 4, &seed, &cfg).unwrap();
        assert!(r.converged && r.trivial);
        assert!(r.iterations <= 1);
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::for_grid(4, 64);
        assert_eq!(cfg.modes, 7);
        assert!(cfg.validate(4).is_ok());
        cfg.nodes = 62;
        assert!(cfg.validate(4).is_err());
        let mut cfg = SolverConfig::for_grid(4, 64);
        cfg.fd_step = 0.0;
        assert!(matches!(cfg.validate(4), Err(SolveError::InvalidConfig(_))));
    }

    #[test]
    fn default_grids() {
        assert_eq!(default_nodes(4), 512);
        assert_eq!(default_nodes(12), 768);
        assert_eq!(default_nodes(3), 768);
        assert_eq!(max_modes(4, 512), 63);
        assert_eq!(max_modes(12, 768), 31);
    }

    #[test]
    fn half_turn_is_an_involution_preserving_the_residual() {
        let c = VortexContourCoeffs::new(0.6, 4, vec![-0.03, 0.004, 0.001], vec![0.05, -0.006, 0.0007]).unwrap();
        assert_eq!(half_turn(&half_turn(&c)), c);
        let n = normalize_sign(&c);
        assert_eq!(normalize_sign(&n), n);
        assert!(n.a1[0] > 0.0 && n.a2[0] < 0.0);
        let r0 = assemble(&c, 0.15, 64).unwrap();
        let r1 = assemble(&n, 0.15, 64).unwrap();
        assert!((r0.max_abs - r1.max_abs).abs() < 1e-14);
        // Odd modes of the residual flip with the state; even modes stay.
        for k in 0..r0.b1.len() {
            let s = if k % 2 == 0 { -1.0 } else { 1.0 };
            assert!((r0.b1[k] - s * r1.b1[k]).abs() < 1e-13);
            assert!((r0.b2[k] - s * r1.b2[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn jacobian_at_annulus_decouples_modes() {
        let cfg = SolverConfig { modes: 5, ..SolverConfig::for_grid(4, 64) };
        let c = VortexContourCoeffs::annulus(0.5, 4, 5).unwrap();
        let j = fd_jacobian(&c, 0.05, &cfg).unwrap();
        for r in 0..10 {
            for col in 0..10 {
                if r % 5 != col % 5 {
                    assert!(j[(r, col)].abs() < 1e-6, "({r},{col}) = {}", j[(r, col)]);
                }
            }
        }
        let doubled = fd_jacobian(&c, 0.05, &SolverConfig { fd_step: 2e-9, ..cfg }).unwrap();
        assert!((&j - &doubled).amax() < 1e-5);
    }

    #[test]
    fn converges_on_a_small_grid() {
        let cfg = SolverConfig::for_grid(4, 128);
        let seed = VortexContourCoeffs::perturbed(0.63, 4, cfg.modes, Boundary::Inner, -0.02).unwrap();
        let r = newton_solve(0.63, 0.1342, 4, &seed, &cfg).unwrap();
        assert!(r.converged && !r.trivial, "{r:?}");
        assert!(r.iterations <= 12);
        assert!(r.coeffs.a1[0] > 0.0 && r.coeffs.a2[0] < 0.0);
        let check = assemble(&r.coeffs, 0.1342, 128).unwrap();
        assert!(check.max_abs < cfg.tol);
    }

    #[test]
    fn bad_seed_geometry_is_reported() {
        let cfg = SolverConfig::for_grid(4, 64);
        let seed = VortexContourCoeffs::perturbed(0.5, 4, cfg.modes, Boundary::Inner, 0.7).unwrap();
        assert!(matches!(newton_solve(0.5, 0.1, 4, &seed, &cfg), Err(SolveError::Contour(_))));
    }
}
