//! The decimated spectral state: scalar positive-helical amplitudes `u+(k)`
//! on a half-lattice mode table, and its quadratic functionals.
//!
//! Only `u+` is stored, so the negative-helicity part is identically zero by
//! construction. All sums below run over the full lattice, i.e. each stored
//! mode counts twice (once for `k`, once for its conjugate at `-k`).

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{Grid, ModeSet, WaveVector};

/// Energy given to states produced by [`random_state`] unless rescaled:
/// half the mean square velocity equals one half.
pub const DEFAULT_INIT_ENERGY: f64 = 0.5;

#[derive(Clone, Debug)]
pub struct SpectralState {
    modes: Arc<ModeSet>,
    amps: Vec<Complex64>,
    pub time: f64,
}

impl PartialEq for SpectralState {
    fn eq(&self, other: &Self) -> bool {
        self.time.to_bits() == other.time.to_bits()
            && self.modes.same_as(&other.modes)
            && self.amps.len() == other.amps.len()
            && self
                .amps
                .iter()
                .zip(&other.amps)
                .all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits())
    }
}

impl SpectralState {
    pub fn zeros(modes: Arc<ModeSet>) -> Self {
        let amps = vec![Complex64::new(0.0, 0.0); modes.len()];
        Self { modes, amps, time: 0.0 }
    }

    pub fn from_amplitudes(modes: Arc<ModeSet>, amps: Vec<Complex64>, time: f64) -> Result<Self> {
        if amps.len() != modes.len() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes for {} modes",
                amps.len(),
                modes.len()
            )));
        }
        Ok(Self { modes, amps, time })
    }

    /// Zero state on the same mode table.
    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.modes.clone())
    }

    pub fn modes(&self) -> &Arc<ModeSet> {
        &self.modes
    }

    pub fn grid(&self) -> Grid {
        self.modes.grid()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    /// Full-lattice value `u+(k)`; conjugated for the unstored half, `None`
    /// outside the mode table.
    pub fn get(&self, k: &WaveVector) -> Option<Complex64> {
        self.modes.locate(k).map(|(i, conj)| if conj { self.amps[i].conj() } else { self.amps[i] })
    }

    /// Sets the value at `k` (or its conjugate at the stored `-k`).
    pub fn set(&mut self, k: &WaveVector, value: Complex64) -> Result<()> {
        match self.modes.locate(k) {
            Some((i, conj)) => {
                self.amps[i] = if conj { value.conj() } else { value };
                Ok(())
            }
            None => Err(Error::InvalidParameter(format!("{k} is not a retained mode"))),
        }
    }

    pub fn scale(&mut self, c: f64) {
        self.amps.iter_mut().for_each(|a| *a *= c);
    }

    pub fn is_finite(&self) -> bool {
        self.amps.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }

    /// `Σ_full w(|k|) |u+(k)|²`.
    pub fn weighted_sum(&self, weight: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self.amps.iter().zip(self.modes.kmag()).map(|(a, &k)| weight(k) * a.norm_sqr()).sum();
        2.0 * s
    }

    /// `E = Σ_full |u+|²`; equals half the mean square velocity.
    pub fn energy(&self) -> f64 {
        let s: f64 = self.amps.iter().map(|a| a.norm_sqr()).sum();
        2.0 * s
    }

    /// `H = Σ_full |k| |u+|²`; equals half the mean of `v·ω`.
    pub fn helicity(&self) -> f64 {
        self.weighted_sum(|k| k)
    }

    /// `D = Σ_full |k|³ |u+|²`, the squared H^{3/2} norm.
    pub fn dissipation_sum(&self) -> f64 {
        self.weighted_sum(|k| k * k * k)
    }

    /// `‖u‖_{H^s} = (Σ_full |k|^{2s} |u+|²)^{1/2}`.
    pub fn norm_hs(&self, s: f64) -> f64 {
        assert!(s >= 0.0, "Sobolev index must be non-negative");
        let s2 = 2.0 * s;
        self.weighted_sum(|k| k.powf(s2)).sqrt()
    }

    /// `Σ_full 2 w(|k|) Re(conj(u+) du+)`: rate of change of the weighted
    /// quadratic form along the increment `du`.
    pub fn weighted_exchange(&self, du: &SpectralState, weight: impl Fn(f64) -> f64) -> f64 {
        let s: f64 = self
            .amps
            .iter()
            .zip(&du.amps)
            .zip(self.modes.kmag())
            .map(|((a, d), &k)| weight(k) * (a.conj() * d).re)
            .sum();
        4.0 * s
    }

    /// `Σ_full |a - b|²` square-rooted: the L² distance between two states.
    pub fn l2_distance(&self, other: &SpectralState) -> f64 {
        let s: f64 = self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum();
        (2.0 * s).sqrt()
    }

    /// `self += c * other`, amplitude-wise.
    pub fn axpy(&mut self, c: f64, other: &SpectralState) {
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += b * c;
        }
    }
}

/// Modes of `modes` with `lo <= |k| <= hi`, further confined to the inscribed
/// sphere `|k| <= n` so bands are isotropic.
pub fn band_indices(modes: &ModeSet, lo: f64, hi: f64) -> Result<Vec<usize>> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi || lo < 0.0 {
        return Err(Error::InvalidParameter(format!("band [{lo}, {hi}]")));
    }
    let cap = modes.grid().n() as f64 + 1e-9;
    let idx: Vec<usize> = modes
        .kmag()
        .iter()
        .enumerate()
        .filter(|(_, &k)| k >= lo - 1e-9 && k <= hi + 1e-9 && k <= cap)
        .map(|(i, _)| i)
        .collect();
    if idx.is_empty() {
        return Err(Error::EmptyBand { lo, hi });
    }
    Ok(idx)
}

/// Random-phase state with `|u+(k)| ∝ |k|^exponent` on the band, normalized
/// to energy [`DEFAULT_INIT_ENERGY`]. Deterministic in `seed`.
pub fn random_state(grid: Grid, exponent: f64, band: [f64; 2], seed: u64) -> Result<SpectralState> {
    random_state_on(ModeSet::cube(grid), exponent, band, seed)
}

pub fn random_state_on(modes: Arc<ModeSet>, exponent: f64, band: [f64; 2], seed: u64) -> Result<SpectralState> {
    if !exponent.is_finite() {
        return Err(Error::InvalidParameter("spectrum exponent must be finite".into()));
    }
    let idx = band_indices(&modes, band[0], band[1])?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = SpectralState::zeros(modes);
    for i in idx {
        let k = state.modes.kmag()[i];
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        state.amps[i] = Complex64::from_polar(k.powf(exponent), phase);
    }
    let e = state.energy();
    state.scale((DEFAULT_INIT_ENERGY / e).sqrt());
    Ok(state)
}
