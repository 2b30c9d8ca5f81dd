use vstates::continuation::{distance_profile, sweep, sweep_from_eigenvalue, BranchOrigin, SeedLadder};
use vstates::contour::{Boundary, VortexContourCoeffs};
use vstates::dispersion::eigenvalues_for_fold;
use vstates::residual::{assemble, assemble_unreduced};
use vstates::solver::{newton_solve, SolveReport, SolverConfig};

fn config() -> SolverConfig {
    SolverConfig::for_grid(4, 256)
}

fn solve_inner(b: f64, omega: f64, amp: f64) -> SolveReport {
    let cfg = config();
    let seed = VortexContourCoeffs::perturbed(b, 4, cfg.modes, Boundary::Inner, amp).unwrap();
    newton_solve(b, omega, 4, &seed, &cfg).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[test]
fn converged_states_pass_an_independent_residual_check() {
    for (omega, amp) in [(0.1342, -0.02), (0.14, -0.04), (0.1564, -0.06)] {
        let r = solve_inner(0.63, omega, amp);
        assert!(r.converged && !r.trivial);
        let check = assemble_unreduced(&r.coeffs, omega, config().nodes).unwrap();
        assert!(check.max_abs < config().tol, "Ω = {omega}: {}", check.max_abs);
        assert!(r.coeffs.a1[0] > 0.0 && r.coeffs.a2[0] < 0.0);
    }
}

#[test]
fn final_iterations_contract_quadratically() {
    let r = solve_inner(0.63, 0.14, -0.04);
    let h = &r.history;
    assert!(h.len() >= 3, "{h:?}");
    let (prev, last) = (h[h.len() - 2], h[h.len() - 1]);
    // Rounding sets a floor near the tolerance.
    assert!(last <= (10.0 * prev * prev).max(config().tol), "{h:?}");
}

#[test]
fn solves_are_deterministic() {
    let a = solve_inner(0.63, 0.145, -0.06);
    let b = solve_inner(0.63, 0.145, -0.06);
    assert_eq!(a, b);
    let bits = |r: &SolveReport| r.coeffs.to_vector().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a), bits(&b));
}

#[test]
fn recorded_states_resolve_immediately() {
    let cfg = config();
    let br = sweep(0.63, 4, 0.1342, 0.1382, 1e-3, &SeedLadder::inner(), &cfg).unwrap();
    assert_eq!(br.records.len(), 5);
    for r in &br.records {
        let again = newton_solve(0.63, r.omega, 4, &r.report.coeffs, &cfg).unwrap();
        assert!(again.iterations <= 2, "Ω = {}: {} iterations", r.omega, again.iterations);
        assert!(assemble(&again.coeffs, r.omega, cfg.nodes).unwrap().max_abs < cfg.tol);
    }
}

#[test]
fn amplitude_is_smallest_next_to_the_eigenvalue() {
    let cfg = config();
    for origin in [BranchOrigin::OmegaMinus, BranchOrigin::OmegaPlus] {
        let mut br = sweep_from_eigenvalue(0.63, 4, origin, 2e-4, &SeedLadder::for_origin(origin), &cfg).unwrap();
        br.records.truncate(8);
        let amps: Vec<f64> = br.records.iter().map(|r| norm(&r.report.coeffs.to_vector())).collect();
        let smallest = amps.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(amps[0], smallest, "{origin}: {amps:?}");
        let d = distance_profile(&br);
        assert_eq!(d.points.len(), br.records.len());
        assert!(d.points.iter().all(|p| p.1 <= 1.0 - 0.63 + 1e-12));
    }
}

#[test]
fn outer_deformation_separates_the_two_branches_as_b_shrinks() {
    // At matched offsets from the eigenvalues, the Ω⁻ branch barely moves
    // the outer circle while the Ω⁺ branch deforms it strongly.
    let cfg = config();
    let offset = 1e-3;
    let mut ratios = Vec::new();
    for b in [0.45, 0.3, 0.2] {
        let p = *eigenvalues_for_fold(4, b).unwrap().point().unwrap();
        let lower = sweep(b, 4, p.omega_minus + offset, p.omega_minus + offset, 1.0, &SeedLadder::inner(), &cfg).unwrap();
        let upper = sweep(b, 4, p.omega_plus - offset, p.omega_plus - offset, -1.0, &SeedLadder::outer(), &cfg).unwrap();
        let low = &lower.records[0].report.coeffs;
        let up = &upper.records[0].report.coeffs;
        assert!(norm(&up.a1) > 10.0 * norm(&up.a2), "b = {b}");
        assert!(norm(&low.a2) > 10.0 * norm(&low.a1), "b = {b}");
        ratios.push(norm(&low.a1) / norm(&up.a1));
    }
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}
