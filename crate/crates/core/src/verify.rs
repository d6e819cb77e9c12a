//! The invariant suite behind `helidec verify`: measured worst-case errors
//! for the basis, projector, nonlinear-term and budget identities.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::{self, ccross3, cdot_conj, BasisAxes, CVec3};
use crate::diagnostics::{self, apriori_bound_series, flux_closure, spectra_and_fluxes_with};
use crate::error::Result;
use crate::field::{random_state, SpectralState};
use crate::integrator::{integrate, Dynamics, SimConfig};
use crate::lattice::{Grid, ModeSet, WaveVector};
use crate::nonlinear::{triadic_rhs, NonlinearEvaluator, TriadSpec};

pub const BASIS_TOL: f64 = 1e-13;
pub const ORACLE_TOL: f64 = 1e-12;
pub const TRIAD_TOL: f64 = 1e-13;
pub const BUDGET_TOL: f64 = 1e-12;
pub const BOUND_SLACK: f64 = 1e-3;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BasisErrors {
    pub curl: f64,
    pub norm: f64,
    pub transverse: f64,
    pub conjugation: f64,
    pub orthogonality: f64,
}

impl BasisErrors {
    pub fn worst(&self) -> f64 {
        [self.curl, self.norm, self.transverse, self.conjugation, self.orthogonality].into_iter().fold(0.0, f64::max)
    }
}

/// Worst componentwise errors of the basis identities over all `|k_i| <= n`.
pub fn basis_identity_errors(n: usize) -> BasisErrors {
    let axes = BasisAxes::default();
    let mut e = BasisErrors::default();
    let n = n as i32;
    let i = Complex64::new(0.0, 1.0);
    for kz in -n..=n {
        for ky in -n..=n {
            for kx in -n..=n {
                let k = WaveVector::new(kx, ky, kz);
                if k.is_zero() {
                    continue;
                }
                let (hp, hm) = basis::helical_vectors(&k, &axes).expect("nonzero k");
                let kc = k.to_f64().map(|x| Complex64::new(x, 0.0));
                for (h, sign) in [(&hp.h, 1.0), (&hm.h, -1.0)] {
                    let c = ccross3(&kc, h);
                    for j in 0..3 {
                        e.curl = e.curl.max((i * c[j] - h[j] * (sign * k.norm())).norm());
                    }
                    e.norm = e.norm.max((cdot_conj(h, h) - 2.0).norm());
                    e.transverse = e.transverse.max(cdot_conj(&kc, h).norm());
                }
                let (hpn, hmn) = basis::helical_vectors(&-k, &axes).expect("nonzero k");
                for j in 0..3 {
                    e.conjugation = e.conjugation.max((hpn.h[j] - hp.h[j].conj()).norm());
                    e.conjugation = e.conjugation.max((hmn.h[j] - hm.h[j].conj()).norm());
                }
                e.orthogonality = e.orthogonality.max(cdot_conj(&hp.h, &hm.h).norm());
            }
        }
    }
    e
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProjectorErrors {
    pub idempotence: f64,
    pub self_adjoint: f64,
    pub completeness: f64,
}

fn random_cvec(rng: &mut ChaCha8Rng) -> CVec3 {
    [0, 1, 2].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn vnorm(u: &CVec3) -> f64 {
    cdot_conj(u, u).re.sqrt()
}

pub fn random_wavevector(rng: &mut ChaCha8Rng, n: i32) -> WaveVector {
    loop {
        let k = WaveVector::new(rng.gen_range(-n..=n), rng.gen_range(-n..=n), rng.gen_range(-n..=n));
        if !k.is_zero() {
            return k;
        }
    }
}

/// Relative projector errors over `trials` random `(k, u, a, b)`.
pub fn projector_errors(trials: usize, seed: u64) -> ProjectorErrors {
    let axes = BasisAxes::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut e = ProjectorErrors::default();
    for _ in 0..trials {
        let k = random_wavevector(&mut rng, 8);
        let (u, a, b) = (random_cvec(&mut rng), random_cvec(&mut rng), random_cvec(&mut rng));
        let pu = basis::project_plus(&u, &k, &axes).unwrap();
        let ppu = basis::project_plus(&pu, &k, &axes).unwrap();
        let d: CVec3 = [0, 1, 2].map(|j| ppu[j] - pu[j]);
        e.idempotence = e.idempotence.max(vnorm(&d) / vnorm(&u));

        let pa = basis::project_plus(&a, &k, &axes).unwrap();
        let pb = basis::project_plus(&b, &k, &axes).unwrap();
        let lhs = cdot_conj(&pa, &b);
        let rhs = cdot_conj(&a, &pb);
        e.self_adjoint = e.self_adjoint.max((lhs - rhs).norm() / (vnorm(&a) * vnorm(&b)));

        // Remove the longitudinal part so u is divergence-free.
        let kf = k.to_f64();
        let kc = kf.map(|x| Complex64::new(x, 0.0));
        let along = cdot_conj(&kc, &u) / k.norm_sq() as f64;
        let sol: CVec3 = [0, 1, 2].map(|j| u[j] - kc[j] * along);
        let pm = basis::project_minus(&sol, &k, &axes).unwrap();
        let ps = basis::project_plus(&sol, &k, &axes).unwrap();
        let r: CVec3 = [0, 1, 2].map(|j| ps[j] + pm[j] - sol[j]);
        e.completeness = e.completeness.max(vnorm(&r) / vnorm(&sol).max(f64::MIN_POSITIVE));
    }
    e
}

/// `‖fast − oracle‖ / ‖oracle‖` for a random state on cutoff `n`.
pub fn oracle_equivalence_error(n: usize, seed: u64) -> Result<f64> {
    let g = Grid::new(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exponent = rng.gen_range(-2.0..0.0);
    let s = random_state(g, exponent, [1.0, g.max_k()], seed)?;
    let oracle = triadic_rhs(&s)?;
    let fast = NonlinearEvaluator::new(s.modes().clone()).fast_rhs(&s);
    Ok(fast.l2_distance(&oracle) / oracle.norm_hs(0.0))
}

/// Random non-degenerate triad with all legs inside `|k_i| <= n`.
pub fn random_triad(rng: &mut ChaCha8Rng, n: i32) -> TriadSpec {
    loop {
        let k = random_wavevector(rng, n);
        let p = random_wavevector(rng, n);
        let q = -(k + p);
        if q.max_abs() as i32 <= n {
            if let Ok(t) = TriadSpec::new(k, p, q) {
                return t;
            }
        }
    }
}

/// Random-amplitude state on a triad-only Galerkin set and its oracle
/// increment.
pub fn triad_increment(triad: &TriadSpec, seed: u64) -> Result<(SpectralState, SpectralState)> {
    let grid = Grid::new(triad.max_abs().max(1))?;
    let modes = ModeSet::explicit(grid, BasisAxes::default(), &triad.legs())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..modes.len()).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let s = SpectralState::from_amplitudes(modes, amps, 0.0)?;
    let du = triadic_rhs(&s)?;
    Ok((s, du))
}

/// Energy and helicity exchange of an increment, each divided by the sum of
/// the absolute per-mode contributions (0 for a zero increment).
pub fn detailed_conservation(state: &SpectralState, du: &SpectralState) -> (f64, f64) {
    let rel = |w: &dyn Fn(f64) -> f64| {
        let ex = state.weighted_exchange(du, w);
        let scale: f64 = state
            .amplitudes()
            .iter()
            .zip(du.amplitudes())
            .zip(state.modes().kmag())
            .map(|((a, d), &k)| 4.0 * w(k) * (a.conj() * d).norm())
            .sum();
        if scale > 0.0 {
            ex.abs() / scale
        } else {
            0.0
        }
    };
    (rel(&|_| 1.0), rel(&|k| k))
}

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, value: f64, tol: f64) -> CheckOutcome {
    CheckOutcome { name, passed: value <= tol, detail: format!("worst={value:.3e} tol={tol:.0e}") }
}

/// Runs the full invariant suite for a configuration.
pub fn run_suite(config: &SimConfig) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let n_basis = config.grid.n().min(8);
    out.push(outcome("basis_identities", basis_identity_errors(n_basis).worst(), BASIS_TOL));

    let p = projector_errors(200, config.seed);
    out.push(outcome("projector_algebra", p.idempotence.max(p.self_adjoint).max(p.completeness), BASIS_TOL));

    let mut worst = 0.0f64;
    for n in 2..=4 {
        for s in 0..3 {
            worst = worst.max(oracle_equivalence_error(n, config.seed.wrapping_add(s))?);
        }
    }
    out.push(outcome("oracle_equivalence", worst, ORACLE_TOL));

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut worst = 0.0f64;
    for i in 0..5 {
        let t = random_triad(&mut rng, 3);
        let (s, du) = triad_increment(&t, config.seed.wrapping_add(i))?;
        worst = worst.max(s.weighted_exchange(&du, |_| 1.0).abs()).max(s.weighted_exchange(&du, |k| k).abs());
    }
    out.push(outcome("triad_conservation", worst, TRIAD_TOL));

    let initial = config.initial_state()?;
    let forcing = config.forcing_for(initial.modes())?;
    let dynamics = Dynamics::new(initial.modes().clone(), config.nu, forcing)?;
    let nl = dynamics.evaluator().fast_rhs(&initial);
    let (ce, ch) = detailed_conservation(&initial, &nl);
    out.push(outcome("detailed_conservation", ce.max(ch), ORACLE_TOL));

    let rh = diagnostics::helicity_budget_residual(&dynamics, &initial)?.abs();
    let re = diagnostics::energy_budget_residual(&dynamics, &initial)?.abs();
    out.push(outcome("budget_identities", rh.max(re), BUDGET_TOL));

    let (fe, fh) = flux_closure(&spectra_and_fluxes_with(dynamics.evaluator(), &initial));
    out.push(outcome("flux_closure", fe.max(fh), BUDGET_TOL));

    let steps = config.steps().min(50);
    let mut structure = 0.0f64;
    let mut positive = true;
    let tr = integrate(&dynamics, initial, config.dt, steps, 5, |s, r| {
        positive &= r.helicity >= 0.0;
        let h = s.helicity();
        if h > 0.0 {
            structure = structure.max((h - s.norm_hs(0.5).powi(2)).abs() / h);
        }
    })?;
    out.push(CheckOutcome {
        name: "helicity_positivity",
        passed: positive && structure <= 1e-14,
        detail: format!("min_H={:.3e} structure={structure:.3e}", tr.records.iter().map(|r| r.helicity).fold(f64::INFINITY, f64::min)),
    });
    let worst_budget = tr.records.iter().map(|r| r.budget_residual_h.abs()).fold(0.0, f64::max);
    out.push(outcome("budget_along_run", worst_budget, BUDGET_TOL));
    if config.nu > 0.0 {
        let series = apriori_bound_series(&tr.records, config.nu, &tr.forcing)?;
        let worst = series.iter().map(|b| (-b.margin / b.rhs.abs().max(f64::MIN_POSITIVE)).max(0.0)).fold(0.0, f64::max);
        out.push(outcome("apriori_bound", worst, BOUND_SLACK));
    }
    Ok(out)
}
