//! Time integration of the truncated decimated system with an
//! integrating-factor RK4 scheme. The viscous factor `exp(-ν|k|² t)` is
//! applied exactly; RK4 handles the nonlinear term plus the static forcing.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::basis::BasisAxes;
use crate::checkpoint;
use crate::diagnostics::{self, BoundTracker, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::field::{band_indices, random_state_on, SpectralState, DEFAULT_INIT_ENERGY};
use crate::lattice::{Grid, ModeSet};
use crate::nonlinear::{full_rhs, NonlinearEvaluator, RhsDecomposition, RhsMode, TriadSpec};

/// Static positive-helical forcing confined to a band of `|k|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ForcingSpec {
    pub band: [f64; 2],
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitSpec {
    Random { band: [f64; 2], exponent: f64, energy: f64 },
    Checkpoint(PathBuf),
    Triad(TriadSpec),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub grid: Grid,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub forcing: Option<ForcingSpec>,
    pub seed: u64,
    pub init: InitSpec,
    pub sample_every: u64,
    pub out_dir: PathBuf,
}

impl SimConfig {
    /// Random initial data on `[1, n]` with the library defaults.
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            nu: 0.01,
            dt: 1e-3,
            t_end: 1.0,
            forcing: None,
            seed: 0,
            init: InitSpec::Random { band: [1.0, grid.n() as f64], exponent: -2.0, energy: DEFAULT_INIT_ENERGY },
            sample_every: 10,
            out_dir: PathBuf::from("."),
        }
    }

    /// Number of steps needed to reach `t_end`.
    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Seed used for the forcing phases, decorrelated from the initial data.
    pub fn forcing_seed(&self) -> u64 {
        self.seed.wrapping_add(0x9E37_79B9_7F4A_7C15)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return bad(format!("nu = {}", self.nu));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {}", self.dt));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end = {}", self.t_end));
        }
        if self.sample_every == 0 {
            return bad("sample_every = 0".into());
        }
        if let Some(f) = &self.forcing {
            if !(f.amplitude >= 0.0 && f.amplitude.is_finite()) {
                return bad(format!("forcing amplitude {}", f.amplitude));
            }
        }
        Ok(())
    }

    /// Initial state and the mode table it lives on.
    pub fn initial_state(&self) -> Result<SpectralState> {
        match &self.init {
            InitSpec::Random { band, exponent, energy } => {
                let mut s = random_state_on(ModeSet::cube(self.grid), *exponent, *band, self.seed)?;
                s.scale((energy / s.energy()).sqrt());
                Ok(s)
            }
            InitSpec::Checkpoint(path) => {
                let ck = checkpoint::read_checkpoint(path)?;
                if ck.state.grid().n() != self.grid.n() {
                    return Err(checkpoint::CheckpointError::InconsistentGrid(format!(
                        "checkpoint cutoff {} but configured cutoff {}",
                        ck.state.grid().n(),
                        self.grid.n()
                    ))
                    .into());
                }
                Ok(ck.state)
            }
            InitSpec::Triad(t) => triad_state(self.grid, t, self.seed),
        }
    }

    pub fn forcing_for(&self, modes: &Arc<ModeSet>) -> Result<SpectralState> {
        match &self.forcing {
            Some(f) => make_forcing_on(modes.clone(), f.band, f.amplitude, self.forcing_seed()),
            None => Ok(SpectralState::zeros(modes.clone())),
        }
    }
}

/// State supported exactly on a triad (and conjugates), on a Galerkin set
/// made of those three modes only. Random phases, unit-magnitude amplitudes
/// rescaled to the default energy.
pub fn triad_state(grid: Grid, triad: &TriadSpec, seed: u64) -> Result<SpectralState> {
    if triad.max_abs() > grid.n() {
        return Err(Error::InvalidTriad(format!("triad exceeds cutoff {}", grid.n())));
    }
    let modes = ModeSet::explicit(grid, BasisAxes::default(), &triad.legs())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let amps = (0..modes.len())
        .map(|_| Complex64::from_polar(rng.gen_range(0.5..1.5), rng.gen_range(0.0..std::f64::consts::TAU)))
        .collect();
    let mut s = SpectralState::from_amplitudes(modes, amps, 0.0)?;
    s.scale((DEFAULT_INIT_ENERGY / s.energy()).sqrt());
    Ok(s)
}

/// Static forcing on the cube of `grid`; see [`make_forcing_on`].
pub fn make_forcing(grid: Grid, band: [f64; 2], amplitude: f64, seed: u64) -> Result<SpectralState> {
    make_forcing_on(ModeSet::cube(grid), band, amplitude, seed)
}

/// Equal-magnitude, random-phase forcing on `band[0] <= |k| <= band[1]`
/// with `Σ_full |f+|² = amplitude²`. No `k = 0` component exists.
pub fn make_forcing_on(modes: Arc<ModeSet>, band: [f64; 2], amplitude: f64, seed: u64) -> Result<SpectralState> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("forcing amplitude {amplitude}")));
    }
    let idx = band_indices(&modes, band[0], band[1])?;
    let mut f = SpectralState::zeros(modes);
    if amplitude == 0.0 {
        return Ok(f);
    }
    let mag = amplitude / (2.0 * idx.len() as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in idx {
        f.amplitudes_mut()[i] = Complex64::from_polar(mag, rng.gen_range(0.0..std::f64::consts::TAU));
    }
    Ok(f)
}

/// Right-hand side of the decimated system for fixed `ν` and forcing.
#[derive(Debug)]
pub struct Dynamics {
    eval: NonlinearEvaluator,
    mode: RhsMode,
    nu: f64,
    forcing: SpectralState,
}

impl Dynamics {
    pub fn new(modes: Arc<ModeSet>, nu: f64, forcing: SpectralState) -> Result<Self> {
        Self::with_mode(modes, nu, forcing, RhsMode::Fast)
    }

    pub fn with_mode(modes: Arc<ModeSet>, nu: f64, forcing: SpectralState, mode: RhsMode) -> Result<Self> {
        if !(nu >= 0.0 && nu.is_finite()) {
            return Err(Error::InvalidParameter(format!("nu = {nu}")));
        }
        let eval = NonlinearEvaluator::new(modes);
        crate::nonlinear::check_forcing(&SpectralState::zeros(eval.modes().clone()), &forcing)?;
        Ok(Self { eval, mode, nu, forcing })
    }

    pub fn unforced(modes: Arc<ModeSet>, nu: f64) -> Result<Self> {
        let f = SpectralState::zeros(modes.clone());
        Self::new(modes, nu, f)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn forcing(&self) -> &SpectralState {
        &self.forcing
    }

    pub fn evaluator(&self) -> &NonlinearEvaluator {
        &self.eval
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        self.eval.modes()
    }

    pub fn full_rhs(&self, state: &SpectralState) -> Result<RhsDecomposition> {
        full_rhs(&self.eval, self.mode, state, self.nu, &self.forcing)
    }

    /// Nonlinear term plus forcing (the part RK4 integrates explicitly).
    pub fn explicit_part(&self, state: &SpectralState) -> Result<SpectralState> {
        crate::nonlinear::check_forcing(state, &self.forcing)?;
        let mut n = match self.mode {
            RhsMode::Fast => self.eval.fast_rhs(state),
            RhsMode::Oracle => crate::nonlinear::triadic_rhs(state)?,
        };
        n.axpy(1.0, &self.forcing);
        Ok(n)
    }
}

/// Fixed-step integrating-factor RK4 stepper.
#[derive(Debug)]
pub struct Stepper<'a> {
    dynamics: &'a Dynamics,
    dt: f64,
    half: Vec<f64>,
    full: Vec<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(dynamics: &'a Dynamics, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt = {dt}")));
        }
        let nu = dynamics.nu;
        let half: Vec<f64> = dynamics.modes().ksq().iter().map(|k2| (-nu * k2 * dt * 0.5).exp()).collect();
        let full = half.iter().map(|e| e * e).collect();
        Ok(Self { dynamics, dt, half, full })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// One step from `u` at time `t` to `t + dt`:
    ///
    /// ```text
    /// a = N(u)
    /// b = N(E(u + dt/2 a))
    /// c = N(E u + dt/2 b)
    /// d = N(E² u + dt E c)
    /// u' = E² u + dt/6 (E² a + 2E(b + c) + d),   E = exp(-ν|k|² dt/2)
    /// ```
    pub fn step(&self, u: &SpectralState) -> Result<SpectralState> {
        let dt = self.dt;
        let (eh, ef) = (&self.half, &self.full);
        let combine = |f: &dyn Fn(usize, Complex64) -> Complex64| -> SpectralState {
            let mut s = u.clone();
            for (i, a) in s.amplitudes_mut().iter_mut().enumerate() {
                *a = f(i, *a);
            }
            s
        };
        let ka = self.dynamics.explicit_part(u)?;
        let a = ka.amplitudes();
        let s2 = combine(&|i, x| (x + a[i] * (0.5 * dt)) * eh[i]);
        let kb = self.dynamics.explicit_part(&s2)?;
        let b = kb.amplitudes();
        let s3 = combine(&|i, x| x * eh[i] + b[i] * (0.5 * dt));
        let kc = self.dynamics.explicit_part(&s3)?;
        let c = kc.amplitudes();
        let s4 = combine(&|i, x| x * ef[i] + c[i] * (dt * eh[i]));
        let kd = self.dynamics.explicit_part(&s4)?;
        let d = kd.amplitudes();
        let mut next = combine(&|i, x| {
            x * ef[i] + (a[i] * ef[i] + (b[i] + c[i]) * (2.0 * eh[i]) + d[i]) * (dt / 6.0)
        });
        next.time = u.time + dt;
        Ok(next)
    }
}

/// Single integrating-factor RK4 step, building the dynamics on the fly.
pub fn step_ifrk4(state: &SpectralState, nu: f64, forcing: &SpectralState, dt: f64) -> Result<SpectralState> {
    let dynamics = Dynamics::new(state.modes().clone(), nu, forcing.clone())?;
    Stepper::new(&dynamics, dt)?.step(state)
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SpectralState,
    pub forcing: SpectralState,
    pub nu: f64,
}

/// Integrates `steps` steps of size `dt` from `initial`, sampling every
/// `sample_every` steps and at the final step. `observer` sees each sampled
/// state with its record.
pub fn integrate(
    dynamics: &Dynamics,
    initial: SpectralState,
    dt: f64,
    steps: u64,
    sample_every: u64,
    mut observer: impl FnMut(&SpectralState, &DiagnosticsRecord),
) -> Result<Trajectory> {
    let stepper = Stepper::new(dynamics, dt)?;
    let sample_every = sample_every.max(1);
    let t0 = initial.time;
    let mut bound = BoundTracker::new(dynamics.nu(), dynamics.forcing());
    let mut records = Vec::new();
    let mut cfl_warned = false;
    let m = dynamics.modes().grid().m();
    let dx = std::f64::consts::TAU / m as f64;

    let mut sample = |state: &SpectralState, records: &mut Vec<DiagnosticsRecord>| -> Result<()> {
        let rhs = dynamics.full_rhs(state)?;
        let rec = diagnostics::record(state, &rhs, dynamics.nu(), dynamics.forcing(), &mut bound);
        debug_assert!(rec.helicity >= 0.0);
        if !cfl_warned {
            let vmax = diagnostics::max_velocity(dynamics.evaluator().fft(), state);
            if vmax > 0.0 && dt > 0.5 * dx / vmax {
                log::warn!("dt = {dt} exceeds CFL advisory 0.5*dx/max|v| = {:.3e} at t = {}", 0.5 * dx / vmax, state.time);
                cfl_warned = true;
            }
        }
        observer(state, &rec);
        records.push(rec);
        Ok(())
    };

    let mut state = initial;
    sample(&state, &mut records)?;
    for step in 1..=steps {
        let mut next = stepper.step(&state)?;
        next.time = t0 + step as f64 * dt;
        if !next.is_finite() {
            return Err(Error::NonFinite { step, time: next.time, last_finite: Box::new(state) });
        }
        state = next;
        if step % sample_every == 0 || step == steps {
            sample(&state, &mut records)?;
        }
    }
    Ok(Trajectory { records, final_state: state, forcing: dynamics.forcing().clone(), nu: dynamics.nu() })
}

/// Runs a full configuration.
pub fn run(config: &SimConfig) -> Result<Trajectory> {
    run_with_observer(config, |_, _| {})
}

pub fn run_with_observer(
    config: &SimConfig,
    observer: impl FnMut(&SpectralState, &DiagnosticsRecord),
) -> Result<Trajectory> {
    config.validate()?;
    let initial = config.initial_state()?;
    let forcing = config.forcing_for(initial.modes())?;
    let dynamics = Dynamics::new(initial.modes().clone(), config.nu, forcing)?;
    integrate(&dynamics, initial, config.dt, config.steps(), config.sample_every, observer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::WaveVector;

    #[test]
    fn exact_viscous_decay_of_single_mode() {
        let g = Grid::new(3).unwrap();
        let mut s = SpectralState::zeros(ModeSet::cube(g));
        let k = WaveVector::new(0, 2, 0);
        let u0 = Complex64::new(0.4, -0.9);
        s.set(&k, u0).unwrap();
        let f = s.zeros_like();
        let dt = 0.01;
        let next = step_ifrk4(&s, 1.0, &f, dt).unwrap();
        let expect = u0 * (-4.0 * dt).exp();
        assert!((next.get(&k).unwrap() - expect).norm() <= 1e-14);
        assert_eq!(next.time, dt);
    }

    #[test]
    fn forcing_respects_band_and_norm() {
        let g = Grid::new(8).unwrap();
        let f = make_forcing(g, [4.0, 6.0], 0.3, 1).unwrap();
        let modes = f.modes().clone();
        for (a, &k) in f.amplitudes().iter().zip(modes.kmag()) {
            if a.norm() > 0.0 {
                assert!((4.0..=6.0).contains(&k));
            }
        }
        assert!((f.energy() - 0.09).abs() < 1e-15);
        let h_minus_half: f64 = f.weighted_sum(|k| 1.0 / k);
        assert!(h_minus_half.is_finite() && h_minus_half > 0.0);
        assert_eq!(make_forcing(g, [4.0, 6.0], 0.0, 1).unwrap().energy(), 0.0);
        assert!(matches!(make_forcing(g, [9.0, 10.0], 1.0, 1), Err(Error::EmptyBand { .. })));
        assert_eq!(make_forcing(g, [4.0, 6.0], 0.3, 1).unwrap(), f);
    }

    #[test]
    fn zero_duration_run_has_only_initial_sample() {
        let mut cfg = SimConfig::new(Grid::new(2).unwrap());
        cfg.t_end = 0.0;
        let tr = run(&cfg).unwrap();
        assert_eq!(tr.records.len(), 1);
        assert_eq!(tr.records[0].t, 0.0);
    }

    #[test]
    fn runs_are_bit_reproducible_and_sampled_in_order() {
        let mut cfg = SimConfig::new(Grid::new(3).unwrap());
        cfg.t_end = 0.05;
        cfg.sample_every = 7;
        cfg.forcing = Some(ForcingSpec { band: [1.0, 2.0], amplitude: 0.5 });
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.final_state, b.final_state);
        assert_eq!(a.records, b.records);
        assert!(a.records.windows(2).all(|w| w[0].t < w[1].t));
        assert_eq!(a.records.last().unwrap().t, 0.05);
        assert!(a.records.iter().all(|r| r.helicity >= 0.0));
    }

    #[test]
    fn triad_run_stays_on_triad() {
        let g = Grid::new(2).unwrap();
        let tri = TriadSpec::new(WaveVector::new(1, 0, 0), WaveVector::new(0, 1, 1), WaveVector::new(-1, -1, -1)).unwrap();
        let mut cfg = SimConfig::new(g);
        cfg.init = InitSpec::Triad(tri);
        cfg.nu = 0.0;
        cfg.t_end = 0.2;
        let tr = run(&cfg).unwrap();
        assert_eq!(tr.final_state.modes().len(), 3);
        for k in tri.legs() {
            assert!(tr.final_state.get(&k).is_some());
        }
        let e0 = tr.records[0].energy;
        assert!((tr.final_state.energy() - e0).abs() <= 1e-10 * e0);
    }

    #[test]
    fn blow_up_is_reported_with_last_finite_state() {
        let g = Grid::new(2).unwrap();
        let mut s = crate::field::random_state(g, 0.0, [1.0, 2.0], 1).unwrap();
        s.scale(1e160);
        let dynamics = Dynamics::unforced(s.modes().clone(), 0.0).unwrap();
        match integrate(&dynamics, s, 1.0, 50, 1, |_, _| {}) {
            Err(Error::NonFinite { step, last_finite, .. }) => {
                assert!(step >= 1);
                assert!(last_finite.is_finite());
            }
            other => panic!("expected NonFinite, got {other:?}"),
        }
    }
}
