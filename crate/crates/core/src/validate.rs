//! Self-checks against closed forms and the linear theory.

use std::fmt;

use nalgebra::DMatrix;

use crate::contour::{sample, Boundary, VortexContourCoeffs};
use crate::dispersion::{eigenvalues_for_fold, Eigenvalues};
use crate::quadrature::{kernel_integral, vstate_residual_pointwise, Diagonal, Source};
use crate::residual::assemble;
use crate::solver::{fd_jacobian, SolverConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: Bound,
    pub limit: f64,
}

impl Check {
    pub fn below(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: Bound::Below, limit }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self { name: name.into(), value, bound: Bound::Above, limit }
    }

    pub fn passed(&self) -> bool {
        match self.bound {
            Bound::Below => self.value < self.limit,
            Bound::Above => self.value > self.limit,
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (op, verdict) = match self.bound {
            Bound::Below => ("<", self.passed()),
            Bound::Above => (">", self.passed()),
        };
        write!(
            f,
            "{} {}: {:.3e} {op} {:.1e}",
            if verdict { "PASS" } else { "FAIL" },
            self.name,
            self.value,
            self.limit
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Annulus,
    Jacobian,
    Convergence,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "annulus" => Ok(Suite::Annulus),
            "jacobian" => Ok(Suite::Jacobian),
            "convergence" => Ok(Suite::Convergence),
            other => Err(format!("unknown suite `{other}` (expected annulus, jacobian or convergence)")),
        }
    }
}

fn max_norm<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// The boundary integral at the annulus: `(b² - 1)/z` on the outer circle
/// and zero on the inner one.
pub fn annulus_suite(b: f64, nodes: usize) -> Vec<Check> {
    let c = match VortexContourCoeffs::annulus(b, 1, 1) {
        Ok(c) => c,
        Err(e) => return vec![Check::below(format!("annulus with b = {b}: {e}"), f64::INFINITY, 0.0)],
    };
    let sc = sample(&c, nodes).expect("a circle samples on any grid");
    let outer = Source::of(&sc, Boundary::Outer);
    let inner = Source::of(&sc, Boundary::Inner);
    let on = |t, s| kernel_integral(t, s, Diagonal::OnCurve).expect("targets are the source nodes");
    let off = |t, s| kernel_integral(t, s, Diagonal::OffCurve).expect("the circles are separated");

    let outer_err = max_norm(
        on(&sc.z1, outer)
            .iter()
            .zip(off(&sc.z1, inner))
            .map(|(i1, i2)| (i1.value - i2.value - (b * b - 1.0) / i1.target).norm()),
    );
    let inner_err = max_norm(on(&sc.z2, inner).iter().zip(off(&sc.z2, outer)).map(|(i2, i1)| (i1.value - i2.value).norm()));
    let residual = {
        let (r1, r2) = vstate_residual_pointwise(&sc, (1.0 - b * b) / 4.0);
        max_norm(r1.iter().chain(&r2).map(|v| v.abs()))
    };
    vec![
        Check::below("outer boundary, |I - (b²-1)/z|", outer_err, 1e-12),
        Check::below("inner boundary, |I|", inner_err, 1e-12),
        Check::below("annulus residual", residual, 1e-13),
    ]
}

pub fn min_singular_value(j: &DMatrix<f64>) -> f64 {
    j.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Smallest singular value of the Jacobian at the annulus.
pub fn annulus_min_singular_value(b: f64, fold: usize, omega: f64, config: &SolverConfig) -> Result<f64, String> {
    let c = VortexContourCoeffs::annulus(b, fold, config.modes).map_err(|e| e.to_string())?;
    let j = fd_jacobian(&c, omega, config).map_err(|e| e.to_string())?;
    Ok(min_singular_value(&j))
}

/// The Jacobian at the annulus loses rank at `Ω_m^±(b)` and nowhere
/// between them.
pub fn jacobian_suite(b: f64, fold: usize, config: &SolverConfig) -> Vec<Check> {
    let point = match u32::try_from(fold).map_err(|e| e.to_string()).and_then(|m| {
        eigenvalues_for_fold(m, b).map_err(|e| e.to_string())
    }) {
        Ok(Eigenvalues::Feasible(p)) => p,
        Ok(Eigenvalues::Infeasible { .. }) => {
            return vec![Check::below(format!("bifurcation from the annulus for m = {fold}, b = {b}"), 1.0, 0.0)]
        }
        Err(e) => return vec![Check::below(e, 1.0, 0.0)],
    };
    let sigma = |omega| annulus_min_singular_value(b, fold, omega, config).unwrap_or(f64::NAN);
    let dip = |centre: f64| (-5..=5).map(|i| sigma(centre + 2e-4 * f64::from(i))).fold(f64::INFINITY, f64::min);
    let mid = 0.5 * (point.omega_minus + point.omega_plus);
    vec![
        Check::below(format!("min σ within 1e-3 of Ω⁻ = {:.6}", point.omega_minus), dip(point.omega_minus), 1e-4),
        Check::below(format!("min σ within 1e-3 of Ω⁺ = {:.6}", point.omega_plus), dip(point.omega_plus), 1e-4),
        Check::above(format!("σ at the midpoint Ω = {mid:.6}"), sigma(mid), 1e-2),
    ]
}

/// A smooth state well inside the annulus, used to test grid refinement.
pub fn probe_state(b: f64, fold: usize) -> VortexContourCoeffs {
    let g = 1.0 - b;
    VortexContourCoeffs::new(b, fold, vec![0.08 * g, 0.01 * g, -0.002 * g], vec![-0.1 * g, 0.015 * g, 0.001 * g])
        .expect("probe amplitudes are valid for b in (0, 1)")
}

/// Residual on `N` and `2N` nodes agrees where the grids overlap.
pub fn convergence_suite(b: f64, fold: usize, nodes: usize) -> Vec<Check> {
    if !(b > 0.0 && b < 1.0) || fold == 0 {
        return vec![Check::below(format!("parameters b = {b}, m = {fold}"), 1.0, 0.0)];
    }
    let c = probe_state(b, fold);
    let omega = (1.0 - b * b) / 4.0;
    let (coarse, fine) = match (sample(&c, nodes), sample(&c, 2 * nodes)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return vec![Check::below(format!("grid of {nodes} nodes: {e}"), 1.0, 0.0)],
    };
    let (c1, c2) = vstate_residual_pointwise(&coarse, omega);
    let (f1, f2) = vstate_residual_pointwise(&fine, omega);
    let pointwise = max_norm(
        c1.iter()
            .zip(f1.iter().step_by(2))
            .chain(c2.iter().zip(f2.iter().step_by(2)))
            .map(|(a, b)| (a - b).abs()),
    );
    let size = max_norm(c1.iter().chain(&c2).map(|v| v.abs()));
    let projected = match (assemble(&c, omega, nodes), assemble(&c, omega, 2 * nodes)) {
        (Ok(a), Ok(b)) => max_norm(a.to_vector().iter().zip(b.to_vector()).map(|(x, y)| (x - y).abs())),
        _ => f64::NAN,
    };
    vec![
        Check::above("probe residual is nontrivial", size, 1e-4),
        Check::below(format!("pointwise residual, N = {nodes} vs {}", 2 * nodes), pointwise, 1e-12),
        Check::below(format!("sine coefficients, N = {nodes} vs {}", 2 * nodes), projected, 1e-12),
    ]
}
