//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit status
//! if any criterion fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use rand::{rngs::StdRng, Rng, SeedableRng};

use vstates::continuation::{distance_profile, sweep, sweep_from_eigenvalue, Branch, BranchOrigin, SeedLadder};
use vstates::contour::{sample, Boundary, VortexContourCoeffs};
use vstates::dispersion::{critical_radius, delta, eigenvalues_for_fold, frequency_matrix, Eigenvalues};
use vstates::io::StateFile;
use vstates::residual::{assemble, assemble_unreduced};
use vstates::solver::{half_turn, newton_solve, normalize_sign, SolveError, SolverConfig};
use vstates::validate::{annulus_suite, convergence_suite, jacobian_suite, Check};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

fn omega_pair(m: u32, b: f64) -> (f64, f64) {
    match eigenvalues_for_fold(m, b).expect("valid fold and radius") {
        Eigenvalues::Feasible(p) => (p.omega_minus, p.omega_plus),
        Eigenvalues::Infeasible { .. } => (f64::NAN, f64::NAN),
    }
}

/// Quoted digits are the value cut after four decimals.
fn matches_quote(value: f64, quote: f64) -> bool {
    value >= quote - 1e-12 && value < quote + 1e-4
}

fn eigenvalue_table() -> Outcome {
    let table = [(0.63, 0.1341, 0.1674), (0.6, 0.1289, 0.1910), (0.4, 0.1250, 0.2949), (0.2, 0.1250, 0.3549)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (b, lo, hi) in table {
        let (minus, plus) = omega_pair(4, b);
        ok &= matches_quote(minus, lo) && matches_quote(plus, hi);
        detail.push(format!("b={b}: {minus:.6}/{plus:.6}"));
    }
    Outcome::new(ok, detail.join(", "))
}

fn critical_radii() -> Outcome {
    let b3 = critical_radius(3).unwrap();
    let b4 = critical_radius(4).unwrap();
    let exact4 = (2f64.sqrt() - 1.0).sqrt();
    let radii: Vec<f64> = (3..=100).map(|m| critical_radius(m).unwrap()).collect();
    let monotone = radii.windows(2).all(|w| w[1] > w[0]);
    Outcome::new(
        (b3 - 0.5).abs() <= 1e-12 && (b4 - exact4).abs() <= 1e-9 && monotone,
        format!(
            "|b_3 - 1/2| = {:.1e}, |b_4 - √(√2-1)| = {:.1e}, increasing over m = 3..100: {monotone}, b_100 = {:.6}",
            (b3 - 0.5).abs(),
            (b4 - exact4).abs(),
            radii[97]
        ),
    )
}

fn annulus_oracle() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for b in [0.2, 0.5, 0.85] {
        for c in annulus_suite(b, 256).into_iter().take(2) {
            ok &= c.passed();
            worst = worst.max(c.value);
        }
    }
    Outcome::new(ok, format!("worst deviation {worst:.2e} (limit 1e-12) at N = 256"))
}

fn trivial_root() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20_251_016);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let b = rng.gen_range(0.05..0.95);
        let omega = rng.gen_range(-0.5..0.5);
        let fold = rng.gen_range(3..13usize);
        let c = VortexContourCoeffs::annulus(b, fold, 7).unwrap();
        let r = assemble(&c, omega, fold * 32).unwrap();
        worst = worst.max(r.max_abs).max(r.to_vector().iter().fold(0.0, |a, v| a.max(v.abs())));
    }
    Outcome::new(worst <= 1e-13, format!("max |F(0)| over 20 random (b, Ω, m) = {worst:.2e}"))
}

fn jacobian_spectrum() -> Outcome {
    let cfg = SolverConfig { modes: 15, ..SolverConfig::for_grid(4, 512) };
    let checks = jacobian_suite(0.63, 4, &cfg);
    let detail: Vec<String> = checks.iter().map(|c| format!("{}: {:.2e}", c.name, c.value)).collect();
    Outcome::new(checks.iter().all(Check::passed), detail.join("; "))
}

fn twelve_fold_solve(omega: f64, boundary: Boundary, amp: f64) -> Result<(usize, f64, f64, f64, bool), SolveError> {
    let cfg = SolverConfig::for_grid(12, 768);
    let seed = VortexContourCoeffs::perturbed(0.85, 12, cfg.modes, boundary, amp).map_err(SolveError::Contour)?;
    let r = newton_solve(0.85, omega, 12, &seed, &cfg)?;
    Ok((r.iterations, r.residual_max, r.coeffs.a1[0], r.coeffs.a2[0], r.trivial))
}

fn describe(r: &Result<(usize, f64, f64, f64, bool), SolveError>) -> String {
    match r {
        Ok((it, res, a1, a2, trivial)) => format!(
            "{it} iterations, residual {res:.1e}, a11 = {a1:.5}, a21 = {a2:.5}{}",
            if *trivial { " (the annulus)" } else { "" }
        ),
        Err(e) => e.to_string(),
    }
}

fn newton_replication() -> Outcome {
    let cases = [(0.04852, Boundary::Outer, 0.06, 12), (0.09011, Boundary::Inner, -0.04, 13)];
    let mut ok = true;
    let mut detail = Vec::new();
    for (omega, boundary, amp, limit) in cases {
        let r = twelve_fold_solve(omega, boundary, amp);
        ok &= matches!(r, Ok((it, res, _, _, false)) if it <= limit && res < 1e-12);
        let name = if boundary == Boundary::Outer { "a11" } else { "a21" };
        detail.push(format!("Ω = {omega}, {name} = {amp}: {}", describe(&r)));
    }
    // Same two speeds with the two seeds exchanged; reported only.
    for (omega, boundary, amp) in [(0.04852, Boundary::Inner, -0.04), (0.09011, Boundary::Outer, 0.06)] {
        let name = if boundary == Boundary::Outer { "a11" } else { "a21" };
        let r = twelve_fold_solve(omega, boundary, amp);
        detail.push(format!("[exchanged seeds, informational] Ω = {omega}, {name} = {amp}: {}", describe(&r)));
    }
    Outcome::new(ok, detail.join("\n      "))
}

fn branch_checks(branch: &Branch, label: &str, expect_points: usize) -> (bool, String) {
    let p = distance_profile(branch);
    let first = p.points.first().copied().unwrap_or((f64::NAN, f64::NAN));
    let last = p.points.last().copied().unwrap_or((f64::NAN, f64::NAN));
    let ok = branch.records.len() == expect_points
        && branch.terminated_at.is_none()
        && branch.records.iter().all(|r| r.report.converged && !r.report.trivial)
        && (first.0 - 0.1342).abs() < 1e-12
        && (last.0 - 0.1674).abs() < 1e-12
        && (first.1 - 0.3642).abs() <= 5e-4
        && (last.1 - 0.3660).abs() <= 5e-4
        && (p.min_distance - 0.2530).abs() <= 1e-3
        && (p.argmin_omega - 0.1564).abs() <= 5e-4;
    (
        ok,
        format!(
            "{label}: {} states (expected {expect_points}), terminated {:?}, d(0.1342) = {:.5}, d(0.1674) = {:.5}, min {:.5} at Ω = {:.4}",
            branch.records.len(),
            branch.terminated_at,
            first.1,
            last.1,
            p.min_distance,
            p.argmin_omega
        ),
    )
}

fn branch_replication(coarse_out: &mut Option<Branch>) -> Outcome {
    let cfg = SolverConfig::for_grid(4, 512);
    let mut ok = true;
    let mut detail = Vec::new();
    for (step, points, label) in [(1e-3, 35, "step 1e-3"), (1e-4, 333, "step 1e-4")] {
        let t = Instant::now();
        match sweep(0.63, 4, 0.1342, 0.1674, step, &SeedLadder::inner(), &cfg) {
            Ok(br) => {
                let (pass, text) = branch_checks(&br, label, points);
                ok &= pass;
                detail.push(format!("{text} [{:.0} s]", t.elapsed().as_secs_f64()));
                if step > 5e-4 {
                    *coarse_out = Some(br);
                }
            }
            Err(e) => {
                ok = false;
                detail.push(format!("{label}: {e}"));
            }
        }
    }
    Outcome::new(ok, detail.join("\n      "))
}

fn branch_termination() -> Outcome {
    let cfg = SolverConfig::for_grid(4, 512);
    let mut ok = true;
    let mut detail = Vec::new();
    for (origin, expected) in [(BranchOrigin::OmegaPlus, 0.1755), (BranchOrigin::OmegaMinus, 0.158)] {
        let t = Instant::now();
        match sweep_from_eigenvalue(0.6, 4, origin, 1e-4, &SeedLadder::for_origin(origin), &cfg) {
            Ok(br) => {
                let end = br.terminated_at;
                ok &= end.is_some_and(|w| (w - expected).abs() <= 0.005);
                detail.push(format!(
                    "from {origin}: {} states, terminated at {} (expected {expected} ± 0.005) [{:.0} s]",
                    br.records.len(),
                    end.map_or("never".to_string(), |w| format!("{w:.4}")),
                    t.elapsed().as_secs_f64()
                ));
            }
            Err(e) => {
                ok = false;
                detail.push(format!("from {origin}: {e}"));
            }
        }
    }
    Outcome::new(ok, detail.join("; "))
}

fn property_suites(branch: Option<&Branch>) -> Outcome {
    let mut failures = Vec::new();
    let mut rng = StdRng::seed_from_u64(9);

    // Rotation and conjugation symmetry of sampled contours.
    for _ in 0..20 {
        let fold = rng.gen_range(3..10usize);
        let b: f64 = rng.gen_range(0.3..0.7);
        let g = 0.05 * b.min(1.0 - b);
        let c = VortexContourCoeffs::new(
            b,
            fold,
            (0..3).map(|_| rng.gen_range(-g..g)).collect(),
            (0..3).map(|_| rng.gen_range(-g..g)).collect(),
        )
        .unwrap();
        let n = fold * 16;
        let sc = sample(&c, n).unwrap();
        let rot = Complex64::from_polar(1.0, 2.0 * PI / fold as f64);
        let sym = (0..n).all(|i| (sc.z1[(i + 16) % n] - sc.z1[i] * rot).norm() < 1e-14);
        let conj = (1..n).all(|i| sc.z1[n - i] == sc.z1[i].conj() && sc.z2[n - i] == sc.z2[i].conj());
        if !sym {
            failures.push("m-fold symmetry");
        }
        if !conj {
            failures.push("conjugation symmetry");
        }
        let n0 = normalize_sign(&c);
        let r0 = assemble(&c, 0.1, n).unwrap();
        let r1 = assemble(&n0, 0.1, n).unwrap();
        if normalize_sign(&n0) != n0 || half_turn(&half_turn(&c)) != c || (r0.max_abs - r1.max_abs).abs() > 1e-13 {
            failures.push("sign normalization");
        }
    }

    // det M_n = b Δ_n and the eigen-pair centre.
    for _ in 0..200 {
        let n = rng.gen_range(1..40u32);
        let lambda = rng.gen_range(-2.0..2.0);
        let b = rng.gen_range(0.05..0.95);
        let det = frequency_matrix(n, lambda, b).det();
        let expected = b * delta(n, lambda, b).unwrap();
        if (det - expected).abs() > 1e-12 * (1.0 + expected.abs()) {
            failures.push("det identity");
        }
    }
    for m in 3..30u32 {
        let b = 0.5 * critical_radius(m).unwrap();
        let (lo, hi) = omega_pair(m, b);
        if ((lo + hi) - (1.0 - b * b) / 2.0).abs() > 1e-14 {
            failures.push("eigen-pair centre");
        }
    }

    // Quadrature refinement.
    for (b, m) in [(0.63, 4), (0.85, 12), (0.3, 5)] {
        if !convergence_suite(b, m, m * 64).iter().all(Check::passed) {
            failures.push("quadrature N vs 2N");
        }
    }

    // Serialization.
    let state = StateFile {
        schema_version: vstates::io::STATE_SCHEMA_VERSION,
        created_unix: None,
        b: 0.63,
        m: 4,
        omega: 0.1342,
        modes: 3,
        nodes: 512,
        a1: vec![0.1 + 0.2, 1.074771033189341e89, 5e-324],
        a2: vec![-1.0 / 3.0, f64::MIN_POSITIVE, -0.0],
        residual_max: 1e-15,
        iterations: 7,
        converged: true,
        trivial: false,
    };
    let back = StateFile::from_json(&state.to_json().unwrap()).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    if back != state || bits(&back.a1) != bits(&state.a1) || bits(&back.a2) != bits(&state.a2) {
        failures.push("serialization round-trip");
    }

    // Independent re-verification of converged states.
    let mut verified = 0;
    if let Some(br) = branch {
        for r in &br.records {
            match assemble_unreduced(&r.report.coeffs, r.omega, 512) {
                Ok(check) if check.max_abs < 1e-12 => verified += 1,
                _ => failures.push("converged-state re-verification"),
            }
        }
    } else {
        failures.push("converged-state re-verification (no branch)");
    }

    failures.dedup();
    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("symmetries, det identity, eigen-pair centre, refinement, round-trip, sign normalization; {verified} branch states re-verified")
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn main() -> ExitCode {
    let mut coarse = None;
    let criteria: Vec<(&str, Box<dyn FnOnce(&mut Option<Branch>) -> Outcome>)> = vec![
        ("eigenvalue table for m = 4", Box::new(|_| eigenvalue_table())),
        ("critical radii", Box::new(|_| critical_radii())),
        ("annulus quadrature oracle", Box::new(|_| annulus_oracle())),
        ("trivial root", Box::new(|_| trivial_root())),
        ("Jacobian rank loss at the eigenvalues", Box::new(|_| jacobian_spectrum())),
        ("Newton convergence, b = 0.85, m = 12", Box::new(|_| newton_replication())),
        ("branch b = 0.63, m = 4", Box::new(branch_replication)),
        ("branch termination b = 0.6, m = 4", Box::new(|_| branch_termination())),
        ("property suites", Box::new(|c: &mut Option<Branch>| property_suites(c.as_ref()))),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let outcome = run(&mut coarse);
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "{} criterion {}: {title} ({:.1} s)\n      {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64(),
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
