//! Budgets, a-priori bounds, shell spectra and fluxes, and the empirical
//! continuity-in-initial-data probe.
//!
//! With `E = Σ|u+|²`, `H = Σ|k||u+|²` and `D = Σ|k|³|u+|²` (full-lattice
//! sums) the decimated system satisfies, exactly at the discrete level,
//!
//! ```text
//! dE/dt = -2ν Σ|k|²|u+|² + 2 Re Σ u+ conj(f+)
//! dH/dt = -2ν D          + 2 Re Σ |k| u+ conj(f+)
//! ```
//!
//! because the truncated nonlinearity exchanges both quantities without
//! creating or destroying them. Bounding the helicity injection with
//! Cauchy-Schwarz and Young gives `dH/dt + ν D <= F/ν`, `F = Σ|f+|²/|k|`,
//! whose integral form is the bound tracked by [`BoundTracker`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{random_state_on, SpectralState};
use crate::integrator::{Dynamics, SimConfig, Stepper};
use crate::nonlinear::{NonlinearEvaluator, RhsDecomposition};
use crate::transform::Fft3;

/// One sample of the verification time series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub helicity: f64,
    /// `Σ|k|³|u+|²`, the squared H^{3/2} norm.
    pub dissipation: f64,
    pub inj_e: f64,
    pub inj_h: f64,
    pub budget_residual_h: f64,
    pub bound_lhs: f64,
    pub bound_rhs: f64,
}

/// `Σ_full |f+|² / |k|`, the squared H^{-1/2} norm of the forcing.
pub fn forcing_h_minus_half(forcing: &SpectralState) -> f64 {
    forcing.weighted_sum(|k| 1.0 / k)
}

/// Running value of both sides of
/// `H(t) + ν ∫₀ᵗ D <= H(0) + (t/ν) Σ|f+|²/|k|`, with trapezoidal quadrature
/// over the pushed samples.
#[derive(Clone, Debug)]
pub struct BoundTracker {
    nu: f64,
    forcing_sum: f64,
    start: Option<(f64, f64)>,
    last: Option<(f64, f64)>,
    integral_d: f64,
}

impl BoundTracker {
    pub fn new(nu: f64, forcing: &SpectralState) -> Self {
        Self { nu, forcing_sum: forcing_h_minus_half(forcing), start: None, last: None, integral_d: 0.0 }
    }

    /// Adds a sample and returns `(lhs, rhs)`.
    pub fn push(&mut self, t: f64, helicity: f64, dissipation: f64) -> (f64, f64) {
        if let Some((t1, d1)) = self.last {
            self.integral_d += 0.5 * (t - t1) * (d1 + dissipation);
        }
        self.last = Some((t, dissipation));
        let (t0, h0) = *self.start.get_or_insert((t, helicity));
        let lhs = helicity + self.nu * self.integral_d;
        let rhs = if self.forcing_sum == 0.0 {
            h0
        } else if self.nu > 0.0 {
            h0 + (t - t0) * self.forcing_sum / self.nu
        } else {
            f64::INFINITY
        };
        (lhs, rhs)
    }

    /// `∫ D dt` accumulated so far.
    pub fn integral_d(&self) -> f64 {
        self.integral_d
    }
}

/// Energy and helicity injection by the forcing: `2 Re Σ w(k) u+ conj(f+)`.
pub fn injection(state: &SpectralState, forcing: &SpectralState) -> (f64, f64) {
    (state.weighted_exchange(forcing, |_| 1.0), state.weighted_exchange(forcing, |k| k))
}

fn budget_residual(
    state: &SpectralState,
    rhs: &RhsDecomposition,
    nu: f64,
    forcing: &SpectralState,
    weight: impl Fn(f64) -> f64 + Copy,
    viscous_weight: impl Fn(f64) -> f64,
) -> f64 {
    let total = rhs.total();
    let lhs = state.weighted_exchange(&total, weight);
    let dissipation = state.weighted_sum(viscous_weight);
    let inj = state.weighted_exchange(forcing, weight);
    let expected = -2.0 * nu * dissipation + inj;
    (lhs - expected) / (nu * dissipation + inj.abs()).max(1.0)
}

fn helicity_residual_from(state: &SpectralState, rhs: &RhsDecomposition, nu: f64, forcing: &SpectralState) -> f64 {
    budget_residual(state, rhs, nu, forcing, |k| k, |k| k * k * k)
}

/// Normalized residual of the instantaneous helicity budget
/// `dH/dt = -2νD + 2 Re Σ|k| u+ conj(f+)`.
pub fn helicity_budget_residual(dynamics: &Dynamics, state: &SpectralState) -> Result<f64> {
    let rhs = dynamics.full_rhs(state)?;
    Ok(helicity_residual_from(state, &rhs, dynamics.nu(), dynamics.forcing()))
}

/// Companion energy budget `dE/dt = -2ν Σ|k|²|u+|² + 2 Re Σ u+ conj(f+)`.
pub fn energy_budget_residual(dynamics: &Dynamics, state: &SpectralState) -> Result<f64> {
    let rhs = dynamics.full_rhs(state)?;
    Ok(budget_residual(state, &rhs, dynamics.nu(), dynamics.forcing(), |_| 1.0, |k| k * k))
}

/// Builds a record from a state and its evaluated right-hand side.
pub fn record(
    state: &SpectralState,
    rhs: &RhsDecomposition,
    nu: f64,
    forcing: &SpectralState,
    bound: &mut BoundTracker,
) -> DiagnosticsRecord {
    let helicity = state.helicity();
    let dissipation = state.dissipation_sum();
    let (inj_e, inj_h) = injection(state, forcing);
    let (bound_lhs, bound_rhs) = bound.push(state.time, helicity, dissipation);
    DiagnosticsRecord {
        t: state.time,
        energy: state.energy(),
        helicity,
        dissipation,
        inj_e,
        inj_h,
        budget_residual_h: helicity_residual_from(state, rhs, nu, forcing),
        bound_lhs,
        bound_rhs,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// Both sides of the integral a-priori bound at every sample of a series.
pub fn apriori_bound_series(records: &[DiagnosticsRecord], nu: f64, forcing: &SpectralState) -> Result<Vec<BoundCheck>> {
    if !(nu > 0.0) {
        return Err(Error::ViscosityZero);
    }
    let mut tracker = BoundTracker::new(nu, forcing);
    Ok(records
        .iter()
        .map(|r| {
            let (lhs, rhs) = tracker.push(r.t, r.helicity, r.dissipation);
            BoundCheck { t: r.t, lhs, rhs, margin: rhs - lhs }
        })
        .collect())
}

/// The bound evaluated at the last sample.
pub fn apriori_bound_check(records: &[DiagnosticsRecord], nu: f64, forcing: &SpectralState) -> Result<BoundCheck> {
    apriori_bound_series(records, nu, forcing)?
        .pop()
        .ok_or_else(|| Error::InvalidParameter("empty trajectory".into()))
}

pub fn max_velocity(fft: &Fft3, state: &SpectralState) -> f64 {
    let v = fft.velocity(state);
    (0..fft.len())
        .map(|p| (v[0][p].re.powi(2) + v[1][p].re.powi(2) + v[2][p].re.powi(2)).sqrt())
        .fold(0.0, f64::max)
}

/// Shell `n` collects `n - 1/2 <= |k| < n + 1/2`. Fluxes count the nonlinear
/// transfer out of all shells `<= n`; a negative energy flux means energy
/// moving to larger scales.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShellSpectrum {
    pub shell: usize,
    pub energy: f64,
    pub helicity: f64,
    pub pi_e: f64,
    pub pi_h: f64,
}

pub fn shell_of(kmag: f64) -> usize {
    (kmag + 0.5).floor() as usize
}

pub fn spectra_and_fluxes(state: &SpectralState) -> Vec<ShellSpectrum> {
    spectra_and_fluxes_with(&NonlinearEvaluator::new(state.modes().clone()), state)
}

pub fn spectra_and_fluxes_with(eval: &NonlinearEvaluator, state: &SpectralState) -> Vec<ShellSpectrum> {
    let nl = eval.fast_rhs(state);
    spectra_from_increment(state, &nl)
}

/// Shell spectra and cumulative fluxes for a given nonlinear increment.
pub fn spectra_from_increment(state: &SpectralState, nl: &SpectralState) -> Vec<ShellSpectrum> {
    let modes = state.modes();
    let nshells = modes.kmag().iter().map(|&k| shell_of(k)).max().unwrap_or(0);
    let mut e = vec![0.0; nshells + 1];
    let mut h = vec![0.0; nshells + 1];
    let mut te = vec![0.0; nshells + 1];
    let mut th = vec![0.0; nshells + 1];
    for ((u, d), &k) in state.amplitudes().iter().zip(nl.amplitudes()).zip(modes.kmag()) {
        let n = shell_of(k);
        let w = 2.0 * u.norm_sqr();
        let x = 4.0 * (u.conj() * d).re;
        e[n] += w;
        h[n] += k * w;
        te[n] += x;
        th[n] += k * x;
    }
    let (mut pe, mut ph) = (0.0, 0.0);
    (1..=nshells)
        .map(|n| {
            pe -= te[n];
            ph -= th[n];
            ShellSpectrum { shell: n, energy: e[n], helicity: h[n], pi_e: pe, pi_h: ph }
        })
        .collect()
}

/// `|Π(outermost)| / max_n |Π(n)|` for energy and helicity (0 when no flux).
pub fn flux_closure(spectra: &[ShellSpectrum]) -> (f64, f64) {
    let rel = |f: fn(&ShellSpectrum) -> f64| {
        let scale = spectra.iter().map(|s| f(s).abs()).fold(0.0, f64::max);
        match spectra.last() {
            Some(last) if scale > 0.0 => f(last).abs() / scale,
            _ => 0.0,
        }
    };
    (rel(|s| s.pi_e), rel(|s| s.pi_h))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeRow {
    pub epsilon: f64,
    /// `sup_t ‖w(t)‖ / ‖w(0)‖` (0 when `ε = 0`).
    pub sup_ratio: f64,
    pub sup_distance: f64,
    pub final_ratio: f64,
}

/// Lipschitz probe for a configuration: the base run and one perturbed run
/// per `ε` are advanced in lockstep.
pub fn lipschitz_probe(config: &SimConfig, epsilons: &[f64]) -> Result<Vec<ProbeRow>> {
    config.validate()?;
    let base = config.initial_state()?;
    let forcing = config.forcing_for(base.modes())?;
    let dynamics = Dynamics::new(base.modes().clone(), config.nu, forcing)?;
    lipschitz_probe_from(&dynamics, &base, config.dt, config.steps(), epsilons, config.seed.wrapping_add(1))
}

pub fn lipschitz_probe_from(
    dynamics: &Dynamics,
    base: &SpectralState,
    dt: f64,
    steps: u64,
    epsilons: &[f64],
    direction_seed: u64,
) -> Result<Vec<ProbeRow>> {
    if !(dynamics.nu() > 0.0) {
        return Err(Error::ViscosityZero);
    }
    if epsilons.len() < 2 || epsilons.windows(2).any(|w| !(w[0] > w[1])) || epsilons.iter().any(|e| !(*e >= 0.0)) {
        return Err(Error::InvalidParameter("epsilons must be >= 2 non-negative decreasing values".into()));
    }
    let n = base.grid().n() as f64;
    let mut direction = random_state_on(base.modes().clone(), -1.0, [1.0, n], direction_seed)?;
    direction.scale(1.0 / direction.norm_hs(0.0));

    let mut states: Vec<SpectralState> = std::iter::once(base.clone())
        .chain(epsilons.iter().map(|&eps| {
            let mut s = base.clone();
            s.axpy(eps, &direction);
            s
        }))
        .collect();
    let w0: Vec<f64> = states[1..].iter().map(|s| s.l2_distance(&states[0])).collect();
    let mut sup = w0.clone();

    let stepper = Stepper::new(dynamics, dt)?;
    for step in 1..=steps {
        let next: Vec<Result<SpectralState>> = states.par_iter().map(|s| stepper.step(s)).collect();
        for (s, n) in states.iter_mut().zip(next) {
            let n = n?;
            if !n.is_finite() {
                return Err(Error::NonFinite { step, time: n.time, last_finite: Box::new(s.clone()) });
            }
            *s = n;
        }
        for (i, s) in states[1..].iter().enumerate() {
            sup[i] = sup[i].max(s.l2_distance(&states[0]));
        }
    }
    Ok(epsilons
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let fin = states[i + 1].l2_distance(&states[0]);
            let ratio = |x: f64| if w0[i] > 0.0 { x / w0[i] } else { 0.0 };
            ProbeRow { epsilon: eps, sup_ratio: ratio(sup[i]), sup_distance: sup[i], final_ratio: ratio(fin) }
        })
        .collect())
}
