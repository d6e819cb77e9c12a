//! Pruned 3D FFTs between the retained spectral cube and the physical grid.
//!
//! Physical fields are stored as `data[(iz * m + iy) * m + ix]`. Synthesis
//! assumes the input is nonzero only on the retained cube `|k_i| <= n` and
//! skips the 1D passes that only touch zeros; analysis likewise skips passes
//! whose outputs lie outside the cube. The forward transform carries the
//! `1/m³` factor so that `v(x) = Σ_k û(k) e^{ik·x}`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::basis::CVec3;
use crate::field::SpectralState;
use crate::lattice::{Grid, WaveVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub struct Fft3 {
    n: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    retained: Vec<usize>,
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).field("m", &self.m).finish()
    }
}

#[derive(Clone, Copy)]
struct SharedPtr(*mut Complex64);
// SAFETY: every pass hands each worker a set of lines that are pairwise
// disjoint in memory, so no element is accessed by two workers.
unsafe impl Send for SharedPtr {}
unsafe impl Sync for SharedPtr {}

impl Fft3 {
    pub fn new(grid: Grid) -> Self {
        let (n, m) = (grid.n(), grid.m());
        let mut planner = FftPlanner::new();
        let retained = (0..m).filter(|&i| i <= n || i >= m - n).collect();
        Self { n, m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m), retained }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m * self.m * self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn zeros(&self) -> Vec<Complex64> {
        vec![ZERO; self.len()]
    }

    /// Flat index of a wavevector inside the cube.
    pub fn index(&self, k: &WaveVector) -> usize {
        let m = self.m as i64;
        let wrap = |c: i32| (c as i64).rem_euclid(m) as usize;
        (wrap(k.kz) * self.m + wrap(k.ky)) * self.m + wrap(k.kx)
    }

    /// Spectral → physical (unnormalized inverse DFT).
    pub fn synthesize(&self, data: &mut [Complex64]) {
        let m = self.m;
        let r = &self.retained;
        let x_lines: Vec<usize> = r.iter().flat_map(|&iz| r.iter().map(move |&iy| (iz * m + iy) * m)).collect();
        self.pass(data, &x_lines, 1, &self.inverse);
        let y_lines: Vec<usize> = r.iter().flat_map(|&iz| (0..m).map(move |ix| iz * m * m + ix)).collect();
        self.pass(data, &y_lines, m, &self.inverse);
        let z_lines: Vec<usize> = (0..m * m).collect();
        self.pass(data, &z_lines, m * m, &self.inverse);
    }

    /// Physical → spectral, scaled by `1/m³`. Only entries on the retained
    /// cube are meaningful afterwards.
    pub fn analyze(&self, data: &mut [Complex64]) {
        let m = self.m;
        let r = &self.retained;
        let z_lines: Vec<usize> = (0..m * m).collect();
        self.pass(data, &z_lines, m * m, &self.forward);
        let y_lines: Vec<usize> = r.iter().flat_map(|&iz| (0..m).map(move |ix| iz * m * m + ix)).collect();
        self.pass(data, &y_lines, m, &self.forward);
        let x_lines: Vec<usize> = r.iter().flat_map(|&iz| r.iter().map(move |&iy| (iz * m + iy) * m)).collect();
        self.pass(data, &x_lines, 1, &self.forward);
        let scale = 1.0 / (m * m * m) as f64;
        for &iz in r {
            for &iy in r {
                for &ix in r {
                    data[(iz * m + iy) * m + ix] *= scale;
                }
            }
        }
    }

    fn pass(&self, data: &mut [Complex64], starts: &[usize], stride: usize, fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        assert_eq!(data.len(), m * m * m);
        let ptr = SharedPtr(data.as_mut_ptr());
        let scratch_len = fft.get_inplace_scratch_len();
        starts.par_iter().with_min_len(32).for_each_init(
            || (vec![ZERO; m], vec![ZERO; scratch_len]),
            |(line, scratch), &start| {
                let p = ptr;
                // SAFETY: `start + j * stride` for j < m stays inside `data`
                // and distinct `start`s address disjoint lines.
                unsafe {
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = *p.0.add(start + j * stride);
                    }
                    fft.process_with_scratch(line, scratch);
                    for (j, v) in line.iter().enumerate() {
                        *p.0.add(start + j * stride) = *v;
                    }
                }
            },
        );
    }

    /// Writes per-mode vectors into three component arrays, with the
    /// conjugate at `-k`. `coeff(i)` gives the coefficient at stored mode `i`
    /// and `coeff_neg(i)` the one at `-k_i`.
    pub fn scatter(
        &self,
        state: &SpectralState,
        out: &mut [Vec<Complex64>; 3],
        coeff: impl Fn(usize) -> CVec3,
        coeff_neg: impl Fn(usize) -> CVec3,
    ) {
        for c in out.iter_mut() {
            c.iter_mut().for_each(|v| *v = ZERO);
        }
        for (i, k) in state.modes().modes().iter().enumerate() {
            let (ip, im) = (self.index(k), self.index(&-*k));
            let (a, b) = (coeff(i), coeff_neg(i));
            for c in 0..3 {
                out[c][ip] = a[c];
                out[c][im] = b[c];
            }
        }
    }

    /// Physical velocity `v = Σ u+ h+ e^{ik·x}`, one complex array per
    /// component (imaginary parts are round-off).
    pub fn velocity(&self, state: &SpectralState) -> [Vec<Complex64>; 3] {
        let mut out = [self.zeros(), self.zeros(), self.zeros()];
        let amps = state.amplitudes();
        let h = state.modes().hplus();
        self.scatter(
            state,
            &mut out,
            |i| h[i].map(|c| c * amps[i]),
            |i| h[i].map(|c| (c * amps[i]).conj()),
        );
        for c in out.iter_mut() {
            self.synthesize(c);
        }
        out
    }
}
