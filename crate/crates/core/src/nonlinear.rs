//! The decimated, Galerkin-truncated nonlinear term.
//!
//! Two independent evaluators are provided:
//!
//! * [`triadic_rhs`] sums the helical triad interactions directly,
//!   `conj(du+(k)) = -1/4 Σ_{k+p+q=0} (|p| - |q|) [h+(p) × h+(q) · h+(k)] u+(p) u+(q)`
//!   over ordered full-lattice pairs `(p, q)` retained in the mode set. It is
//!   `O(M²)` in the mode count and only meant for small grids.
//! * [`NonlinearEvaluator::fast_rhs`] builds `v` and `ω = |k| v` on the
//!   physical grid, forms `v × ω`, transforms back and projects onto `h+`.
//!   With `m >= 3n + 1` the product is alias-free on the cube, so both agree
//!   to round-off.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::basis::{ccross3, cdot_conj, CVec3};
use crate::error::{Error, Result};
use crate::field::SpectralState;
use crate::lattice::{ModeSet, WaveVector};
use crate::transform::Fft3;

/// Default mode-count limit for the triadic oracle.
pub const DEFAULT_ORACLE_BUDGET: usize = 4096;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Three wavevectors closing a triangle, `k + p + q = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriadSpec {
    pub k: WaveVector,
    pub p: WaveVector,
    pub q: WaveVector,
}

impl TriadSpec {
    pub fn new(k: WaveVector, p: WaveVector, q: WaveVector) -> Result<Self> {
        if k + p + q != WaveVector::new(0, 0, 0) {
            return Err(Error::InvalidTriad(format!("{k} + {p} + {q} != 0")));
        }
        if k.is_zero() || p.is_zero() || q.is_zero() {
            return Err(Error::InvalidTriad("zero leg".into()));
        }
        if k.cross(&p).is_zero() {
            return Err(Error::InvalidTriad("collinear legs do not interact".into()));
        }
        Ok(Self { k, p, q })
    }

    pub fn legs(&self) -> [WaveVector; 3] {
        [self.k, self.p, self.q]
    }

    /// Largest component over the three legs.
    pub fn max_abs(&self) -> usize {
        self.legs().iter().map(|k| k.max_abs()).max().unwrap_or(0)
    }
}

fn dot3(a: &CVec3, b: &CVec3) -> Complex64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Triadic oracle with the default budget.
pub fn triadic_rhs(state: &SpectralState) -> Result<SpectralState> {
    triadic_rhs_with_budget(state, DEFAULT_ORACLE_BUDGET)
}

pub fn triadic_rhs_with_budget(state: &SpectralState, budget: usize) -> Result<SpectralState> {
    let modes = state.modes().clone();
    if modes.len() > budget {
        return Err(Error::GridTooLarge { modes: modes.len(), budget });
    }
    let amps = state.amplitudes();
    let h = modes.hplus();
    let kmag = modes.kmag();
    // Full lattice as (wavevector, |k|, h, u).
    let full: Vec<(WaveVector, f64, CVec3, Complex64)> = modes
        .modes()
        .iter()
        .enumerate()
        .flat_map(|(j, p)| {
            [
                (*p, kmag[j], h[j], amps[j]),
                (-*p, kmag[j], h[j].map(|c| c.conj()), amps[j].conj()),
            ]
        })
        .collect();
    let out: Vec<Complex64> = modes
        .modes()
        .par_iter()
        .enumerate()
        .map(|(i, k)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (p, pmag, hp, up) in &full {
                let q = -(*k + *p);
                let Some((jq, conj)) = modes.locate(&q) else { continue };
                let (hq, uq) = if conj { (h[jq].map(|c| c.conj()), amps[jq].conj()) } else { (h[jq], amps[jq]) };
                let geom = dot3(&ccross3(hp, &hq), &h[i]);
                acc += geom * (pmag - kmag[jq]) * up * uq;
            }
            (acc * -0.25).conj()
        })
        .collect();
    SpectralState::from_amplitudes(modes, out, state.time)
}

/// Form of the quadratic term handed to the transform-based evaluator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NonlinearForm {
    /// `v × ω`.
    #[default]
    Rotational,
    /// `-(v·∇)v`; differs from `v × ω` by a gradient.
    Advective,
}

/// Transform-based evaluator, bound to one mode table.
#[derive(Debug)]
pub struct NonlinearEvaluator {
    modes: Arc<ModeSet>,
    fft: Fft3,
    form: NonlinearForm,
}

impl NonlinearEvaluator {
    pub fn new(modes: Arc<ModeSet>) -> Self {
        Self::with_form(modes, NonlinearForm::Rotational)
    }

    pub fn with_form(modes: Arc<ModeSet>, form: NonlinearForm) -> Self {
        let fft = Fft3::new(modes.grid());
        Self { modes, fft, form }
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// `du+(k) = conj(h+(k)) · N̂(k) / 2`, `N` the physical nonlinearity.
    pub fn fast_rhs(&self, state: &SpectralState) -> SpectralState {
        debug_assert!(state.modes().same_as(&self.modes));
        let (nx, ny, nz) = match self.form {
            NonlinearForm::Rotational => self.rotational(state),
            NonlinearForm::Advective => self.advective(state),
        };
        self.project(state, nx, ny, nz)
    }

    // Real fields `v` and `ω` packed as `v + iω` per component.
    fn rotational(&self, state: &SpectralState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let fft = &self.fft;
        let amps = state.amplitudes();
        let h = self.modes.hplus();
        let kmag = self.modes.kmag();
        let mut z = [fft.zeros(), fft.zeros(), fft.zeros()];
        fft.scatter(
            state,
            &mut z,
            |i| {
                let f = Complex64::new(1.0, kmag[i]);
                h[i].map(|c| c * amps[i] * f)
            },
            |i| {
                let f = Complex64::new(1.0, kmag[i]);
                h[i].map(|c| (c * amps[i]).conj() * f)
            },
        );
        z.par_iter_mut().for_each(|c| fft.synthesize(c));
        let len = fft.len();
        let mut nx = vec![0.0; len];
        let mut ny = vec![0.0; len];
        let mut nz = vec![0.0; len];
        nx.par_iter_mut()
            .zip(ny.par_iter_mut())
            .zip(nz.par_iter_mut())
            .enumerate()
            .with_min_len(4096)
            .for_each(|(p, ((a, b), c))| {
                let v = [z[0][p].re, z[1][p].re, z[2][p].re];
                let w = [z[0][p].im, z[1][p].im, z[2][p].im];
                *a = v[1] * w[2] - v[2] * w[1];
                *b = v[2] * w[0] - v[0] * w[2];
                *c = v[0] * w[1] - v[1] * w[0];
            });
        (nx, ny, nz)
    }

    fn advective(&self, state: &SpectralState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let fft = &self.fft;
        let amps = state.amplitudes();
        let h = self.modes.hplus();
        let modes = self.modes.modes();
        // Fields: v_i and ∂_j v_i, packed two real fields per complex array.
        // Slot s in 0..12: s < 3 → v_s; else (i, j) = ((s-3)/3, (s-3)%3).
        let coeff = |s: usize, i: usize| -> Complex64 {
            let u = amps[i];
            if s < 3 {
                h[i][s] * u
            } else {
                let (c, d) = ((s - 3) / 3, (s - 3) % 3);
                I * modes[i].to_f64()[d] * h[i][c] * u
            }
        };
        let mut packed: Vec<Vec<Complex64>> = (0..6).map(|_| fft.zeros()).collect();
        for (slot, arr) in packed.iter_mut().enumerate() {
            let (a, b) = (2 * slot, 2 * slot + 1);
            for (i, k) in modes.iter().enumerate() {
                let (ca, cb) = (coeff(a, i), coeff(b, i));
                arr[fft.index(k)] = ca + I * cb;
                arr[fft.index(&-*k)] = ca.conj() + I * cb.conj();
            }
        }
        packed.par_iter_mut().for_each(|c| fft.synthesize(c));
        let field = |s: usize, p: usize| -> f64 {
            let c = packed[s / 2][p];
            if s.is_multiple_of(2) {
                c.re
            } else {
                c.im
            }
        };
        let len = fft.len();
        let mut out = [vec![0.0; len], vec![0.0; len], vec![0.0; len]];
        for p in 0..len {
            let v = [field(0, p), field(1, p), field(2, p)];
            for (c, o) in out.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (d, vd) in v.iter().enumerate() {
                    acc += vd * field(3 + 3 * c + d, p);
                }
                o[p] = -acc;
            }
        }
        let [a, b, c] = out;
        (a, b, c)
    }

    fn project(&self, state: &SpectralState, nx: Vec<f64>, ny: Vec<f64>, nz: Vec<f64>) -> SpectralState {
        let fft = &self.fft;
        let mut a: Vec<Complex64> = nx.iter().zip(&ny).map(|(&x, &y)| Complex64::new(x, y)).collect();
        let mut b: Vec<Complex64> = nz.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        drop((nx, ny, nz));
        rayon::join(|| fft.analyze(&mut a), || fft.analyze(&mut b));
        let h = self.modes.hplus();
        let out: Vec<Complex64> = self
            .modes
            .modes()
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let (ip, im) = (fft.index(k), fft.index(&-*k));
                let (ap, am) = (a[ip], a[im].conj());
                let n = [(ap + am) * 0.5, (ap - am) * Complex64::new(0.0, -0.5), b[ip]];
                cdot_conj(&h[i], &n) * 0.5
            })
            .collect();
        SpectralState::from_amplitudes(self.modes.clone(), out, state.time).expect("mode count")
    }
}

/// Split time derivative `du+/dt = nonlinear + viscous + forcing`.
#[derive(Clone, Debug)]
pub struct RhsDecomposition {
    pub nonlinear: SpectralState,
    pub viscous: SpectralState,
    pub forcing: SpectralState,
}

impl RhsDecomposition {
    pub fn total(&self) -> SpectralState {
        let mut t = self.nonlinear.clone();
        t.axpy(1.0, &self.viscous);
        t.axpy(1.0, &self.forcing);
        t
    }
}

/// Which evaluator supplies the nonlinear term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RhsMode {
    #[default]
    Fast,
    Oracle,
}

/// Checks that `forcing` lives on the same mode table as `state`.
pub fn check_forcing(state: &SpectralState, forcing: &SpectralState) -> Result<()> {
    if !(Arc::ptr_eq(forcing.modes(), state.modes()) || forcing.modes().same_as(state.modes())) {
        return Err(Error::ForcingOutsideTruncation(format!(
            "forcing has {} modes at cutoff {}, state has {} at cutoff {}",
            forcing.modes().len(),
            forcing.grid().n(),
            state.modes().len(),
            state.grid().n()
        )));
    }
    Ok(())
}

/// Nonlinear, viscous `-ν|k|² u+` and forcing parts of the time derivative.
pub fn full_rhs(
    eval: &NonlinearEvaluator,
    mode: RhsMode,
    state: &SpectralState,
    nu: f64,
    forcing: &SpectralState,
) -> Result<RhsDecomposition> {
    check_forcing(state, forcing)?;
    let nonlinear = match mode {
        RhsMode::Fast => eval.fast_rhs(state),
        RhsMode::Oracle => triadic_rhs(state)?,
    };
    let mut viscous = state.clone();
    for (a, &k2) in viscous.amplitudes_mut().iter_mut().zip(state.modes().ksq()) {
        *a *= -nu * k2;
    }
    Ok(RhsDecomposition { nonlinear, viscous, forcing: forcing.clone() })
}
