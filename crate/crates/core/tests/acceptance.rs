//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Criterion 10 (64³ inverse-cascade sign) takes hours and only runs when
//! `HELIDEC_FULL_VALIDATION=1`.

use std::cell::RefCell;
use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use helidec::diagnostics::{
    apriori_bound_series, energy_budget_residual, lipschitz_probe, spectra_and_fluxes_with, BoundTracker,
};
use helidec::integrator::{integrate, run_with_observer, triad_state, InitSpec};
use helidec::nonlinear::RhsMode;
use helidec::verify::{
    basis_identity_errors, oracle_equivalence_error, projector_errors, random_triad, triad_increment,
};
use helidec::{Dynamics, ForcingSpec, Grid, SimConfig, SpectralState, Stepper};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, bool);

#[derive(Default)]
struct Structure {
    samples: usize,
    min_helicity: f64,
    worst_rel: f64,
}

thread_local! {
    static STRUCTURE: RefCell<Structure> = RefCell::new(Structure { min_helicity: f64::INFINITY, ..Default::default() });
}

/// Positivity and `H = ‖v‖²_{H^{1/2}}` at every sample of every run.
fn observe(state: &SpectralState) {
    let h = state.helicity();
    let rel = if h > 0.0 { (h - state.norm_hs(0.5).powi(2)).abs() / h } else { 0.0 };
    STRUCTURE.with(|s| {
        let mut s = s.borrow_mut();
        s.samples += 1;
        s.min_helicity = s.min_helicity.min(h);
        s.worst_rel = s.worst_rel.max(rel);
    });
}

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_basis() -> Outcome {
    let e = basis_identity_errors(8);
    check(
        e.worst() <= 1e-13,
        format!(
            "N=8 curl={:.2e} norm={:.2e} k·h={:.2e} conj={:.2e} orth={:.2e} (tol 1e-13)",
            e.curl, e.norm, e.transverse, e.conjugation, e.orthogonality
        ),
    )
}

fn c2_projector() -> Outcome {
    let e = projector_errors(200, 2024);
    let worst = e.idempotence.max(e.self_adjoint).max(e.completeness);
    check(
        worst <= 1e-13,
        format!(
            "200 trials idempotence={:.2e} self-adjoint={:.2e} completeness={:.2e} (tol 1e-13)",
            e.idempotence, e.self_adjoint, e.completeness
        ),
    )
}

fn c3_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (n, reps) in [(2usize, 7u64), (3, 7), (4, 6)] {
        for r in 0..reps {
            let e = oracle_equivalence_error(n, 1000 * n as u64 + r).map_err(|e| e.to_string())?;
            worst = worst.max(e);
            count += 1;
        }
    }
    check(worst <= 1e-12, format!("{count} states N∈{{2,3,4}} worst relative error {worst:.2e} (tol 1e-12)"))
}

fn c4_triads() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut inst = 0.0f64;
    let mut drift = 0.0f64;
    for i in 0..5 {
        let t = random_triad(&mut rng, 3);
        let (s, du) = triad_increment(&t, 100 + i).map_err(|e| e.to_string())?;
        inst = inst.max(s.weighted_exchange(&du, |_| 1.0).abs()).max(s.weighted_exchange(&du, |k| k).abs());

        let state = triad_state(Grid::new(t.max_abs()).unwrap(), &t, 200 + i).map_err(|e| e.to_string())?;
        let zero = state.zeros_like();
        let dynamics =
            Dynamics::with_mode(state.modes().clone(), 0.0, zero, RhsMode::Oracle).map_err(|e| e.to_string())?;
        let (e0, h0) = (state.energy(), state.helicity());
        let tr = integrate(&dynamics, state, 1e-3, 10_000, 1000, |s, _| observe(s)).map_err(|e| e.to_string())?;
        if tr.final_state.modes().len() != 3 {
            return Err("triad support changed".into());
        }
        for r in &tr.records {
            drift = drift.max((r.energy - e0).abs() / e0).max((r.helicity - h0).abs() / h0);
        }
    }
    check(
        inst <= 1e-13 && drift <= 1e-8,
        format!("5 triads instantaneous exchange {inst:.2e} (tol 1e-13); RK4 t=10 drift {drift:.2e} (tol 1e-8)"),
    )
}

fn c5_inviscid() -> Outcome {
    let mut cfg = SimConfig::new(Grid::from_physical(16).unwrap());
    cfg.nu = 0.0;
    cfg.dt = 1e-3;
    cfg.t_end = 1.0;
    cfg.seed = 5;
    let tr = run_with_observer(&cfg, |s, _| observe(s)).map_err(|e| e.to_string())?;
    let (a, b) = (tr.records[0], *tr.records.last().unwrap());
    let de = (b.energy - a.energy).abs() / a.energy;
    let dh = (b.helicity - a.helicity).abs() / a.helicity;
    check(de <= 1e-8 && dh <= 1e-8, format!("16³ t=1 |ΔE|/E={de:.2e} |ΔH|/H={dh:.2e} (tol 1e-8)"))
}

fn c6_budgets() -> Outcome {
    let mut cfg = SimConfig::new(Grid::from_physical(16).unwrap());
    cfg.nu = 0.02;
    cfg.t_end = 1.0;
    cfg.seed = 6;
    cfg.forcing = Some(ForcingSpec { band: [2.0, 3.0], amplitude: 1.0 });
    let init = cfg.initial_state().map_err(|e| e.to_string())?;
    let forcing = cfg.forcing_for(init.modes()).map_err(|e| e.to_string())?;
    let companion = Dynamics::new(init.modes().clone(), cfg.nu, forcing).map_err(|e| e.to_string())?;
    let mut worst_e = 0.0f64;
    let tr = run_with_observer(&cfg, |s, _| {
        observe(s);
        worst_e = worst_e.max(energy_budget_residual(&companion, s).map(f64::abs).unwrap_or(f64::INFINITY));
    })
    .map_err(|e| e.to_string())?;
    let worst_h = tr.records.iter().map(|r| r.budget_residual_h.abs()).fold(0.0, f64::max);
    let injecting = tr.records.iter().any(|r| r.inj_h.abs() > 1e-6);
    check(
        worst_h <= 1e-12 && worst_e <= 1e-12 && injecting,
        format!("forced 16³ {} samples helicity residual {worst_h:.2e} energy residual {worst_e:.2e} (tol 1e-12)", tr.records.len()),
    )
}

fn c7_bound() -> Outcome {
    let nu = 0.05;
    let mut cfg = SimConfig::new(Grid::from_physical(32).unwrap());
    cfg.nu = nu;
    cfg.t_end = 5.0;
    cfg.seed = 7;
    cfg.forcing = Some(ForcingSpec { band: [2.0, 4.0], amplitude: 1.0 });
    let tr = run_with_observer(&cfg, |s, _| observe(s)).map_err(|e| e.to_string())?;
    let worst_forced = tr
        .records
        .iter()
        .map(|r| (r.bound_lhs - r.bound_rhs) / r.bound_rhs)
        .fold(f64::NEG_INFINITY, f64::max);
    // recomputed independently of the in-run tracker
    let series = apriori_bound_series(&tr.records, nu, &tr.forcing).map_err(|e| e.to_string())?;
    let recomputed_ok = series.iter().all(|b| b.margin >= -1e-3 * b.rhs);

    cfg.forcing = None;
    let tr = run_with_observer(&cfg, |s, _| observe(s)).map_err(|e| e.to_string())?;
    let h0 = tr.records[0].helicity;
    let mut tracker = BoundTracker::new(nu, &tr.forcing);
    let mut worst_unforced = f64::NEG_INFINITY;
    for r in &tr.records {
        tracker.push(r.t, r.helicity, r.dissipation);
        let lhs = r.helicity + 0.5 * nu * tracker.integral_d();
        worst_unforced = worst_unforced.max(lhs / h0 - 1.0);
    }
    check(
        worst_forced <= 1e-3 && recomputed_ok && worst_unforced <= 1e-3,
        format!(
            "32³ ν=0.05 t=5 forced max (lhs-rhs)/rhs={worst_forced:.3e} (tol 1e-3); unforced max H(t)+(ν/2)∫D / H(0) - 1 = {worst_unforced:.3e} (tol 1e-3)"
        ),
    )
}

fn c8_structure() -> Outcome {
    STRUCTURE.with(|s| {
        let s = s.borrow();
        check(
            s.samples > 0 && s.min_helicity >= 0.0 && s.worst_rel <= 1e-14,
            format!("{} samples min H={:.3e} worst |H-‖v‖²_H½|/H={:.2e} (tol 1e-14)", s.samples, s.min_helicity, s.worst_rel),
        )
    })
}

fn c9_lipschitz() -> Outcome {
    let mut cfg = SimConfig::new(Grid::from_physical(16).unwrap());
    cfg.nu = 0.05;
    cfg.t_end = 2.0;
    cfg.seed = 9;
    let rows = lipschitz_probe(&cfg, &[1e-4, 5e-5, 2.5e-5]).map_err(|e| e.to_string())?;
    // sup over t includes t=0, so the end-of-run amplification is compared too
    let spread = |xs: &[f64]| {
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        hi / lo - 1.0
    };
    let sup: Vec<f64> = rows.iter().map(|r| r.sup_ratio).collect();
    let fin: Vec<f64> = rows.iter().map(|r| r.final_ratio).collect();
    let (s1, s2) = (spread(&sup), spread(&fin));
    check(
        sup.iter().chain(&fin).all(|r| r.is_finite() && *r > 0.0) && s1 <= 0.1 && s2 <= 0.1,
        format!("16³ ν=0.05 t=2 sup ratios {sup:.4?} (spread {s1:.2e}), final ratios {fin:.4?} (spread {s2:.2e}) (tol 0.1)"),
    )
}

fn c10_inverse_cascade() -> Outcome {
    // Forced at [10, 12] on 64³ (cutoff 21); energy flux averaged over the
    // second half of the run.
    let mut cfg = SimConfig::new(Grid::from_physical(64).unwrap());
    cfg.nu = 2e-3;
    cfg.dt = 2e-3;
    cfg.t_end = 40.0;
    cfg.sample_every = 100;
    cfg.seed = 10;
    cfg.init = InitSpec::Random { band: [10.0, 12.0], exponent: 0.0, energy: 0.05 };
    cfg.forcing = Some(ForcingSpec { band: [10.0, 12.0], amplitude: 2.0 });
    let init = cfg.initial_state().map_err(|e| e.to_string())?;
    let forcing = cfg.forcing_for(init.modes()).map_err(|e| e.to_string())?;
    let dynamics = Dynamics::new(init.modes().clone(), cfg.nu, forcing).map_err(|e| e.to_string())?;
    let mut acc = [0.0; 9];
    let mut count = 0usize;
    let t_half = cfg.t_end / 2.0;
    integrate(&dynamics, init, cfg.dt, cfg.steps(), cfg.sample_every, |s, _| {
        observe(s);
        if s.time >= t_half {
            let sp = spectra_and_fluxes_with(dynamics.evaluator(), s);
            for n in 3..=8 {
                acc[n] += sp[n - 1].pi_e;
            }
            count += 1;
        }
    })
    .map_err(|e| e.to_string())?;
    let avg: Vec<f64> = (3..=8).map(|n| acc[n] / count as f64).collect();
    check(avg.iter().all(|&p| p < 0.0), format!("64³ time-averaged Π_E(3..8) = {:?}", avg.iter().map(|p| format!("{p:.3e}")).collect::<Vec<_>>()))
}

fn c11_order() -> Outcome {
    let grid = Grid::from_physical(8).unwrap();
    let mut cfg = SimConfig::new(grid);
    cfg.seed = 11;
    let init = cfg.initial_state().map_err(|e| e.to_string())?;
    let forcing = helidec::make_forcing(grid, [1.0, 2.0], 1.0, 3).map_err(|e| e.to_string())?;
    let dynamics = Dynamics::new(init.modes().clone(), 0.05, forcing).map_err(|e| e.to_string())?;
    let t_end = 1.0;
    let solve = |dt: f64| -> Result<SpectralState, String> {
        let stepper = Stepper::new(&dynamics, dt).map_err(|e| e.to_string())?;
        let mut s = init.clone();
        for _ in 0..(t_end / dt).round() as usize {
            s = stepper.step(&s).map_err(|e| e.to_string())?;
        }
        Ok(s)
    };
    let dt = 0.05;
    let reference = solve(dt / 8.0)?;
    let e1 = solve(dt)?.l2_distance(&reference);
    let e2 = solve(dt / 2.0)?.l2_distance(&reference);
    let ratio = e1 / e2;
    check(
        (ratio - 16.0).abs() <= 0.2 * 16.0,
        format!("8³ dt={dt} err={e1:.3e} dt/2 err={e2:.3e} ratio={ratio:.2} (16 ± 20%)"),
    )
}

fn main() -> ExitCode {
    let full = std::env::var("HELIDEC_FULL_VALIDATION").map(|v| v == "1").unwrap_or(false);
    let criteria: [Criterion; 11] = [
        ("C1 basis identities", c1_basis, true),
        ("C2 projector algebra", c2_projector, true),
        ("C3 oracle equivalence", c3_oracle, true),
        ("C4 triad-by-triad conservation", c4_triads, true),
        ("C5 inviscid unforced conservation", c5_inviscid, true),
        ("C6 helicity/energy budget identities", c6_budgets, true),
        ("C7 a-priori bound", c7_bound, true),
        ("C9 Lipschitz probe", c9_lipschitz, true),
        ("C10 inverse-cascade sign", c10_inverse_cascade, full),
        ("C11 RK4 order", c11_order, true),
        // evaluated last: aggregates every sample observed above
        ("C8 positivity / H = ‖v‖²_H½", c8_structure, true),
    ];
    let mut failed = 0;
    for (name, f, enabled) in criteria {
        if !enabled {
            println!("[SKIP] {name}: set HELIDEC_FULL_VALIDATION=1 (release validation, hours)");
            continue;
        }
        let start = Instant::now();
        match f() {
            Ok(d) => println!("[PASS] {name}: {d} ({:.1?})", start.elapsed()),
            Err(d) => {
                failed += 1;
                println!("[FAIL] {name}: {d} ({:.1?})", start.elapsed())
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
