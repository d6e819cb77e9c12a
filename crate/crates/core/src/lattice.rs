//! Integer wavevectors, truncation grids and the half-lattice mode tables
//! that every spectral state is stored on.
//!
//! The box has period 2π, so wavevectors are integer triples. A state keeps
//! one representative of each `{k, -k}` pair (the half-lattice) and the value
//! at `-k` is the complex conjugate.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::basis::{self, BasisAxes};
use crate::error::{Error, Result};

/// Largest retained cutoff accepted anywhere (checkpoints, configs).
pub const MAX_GRID_N: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WaveVector {
    pub kx: i32,
    pub ky: i32,
    pub kz: i32,
}

impl WaveVector {
    pub const fn new(kx: i32, ky: i32, kz: i32) -> Self {
        Self { kx, ky, kz }
    }

    pub fn is_zero(&self) -> bool {
        self.kx == 0 && self.ky == 0 && self.kz == 0
    }

    pub fn norm_sq(&self) -> i64 {
        let (x, y, z) = (self.kx as i64, self.ky as i64, self.kz as i64);
        x * x + y * y + z * z
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq() as f64).sqrt()
    }

    pub fn to_f64(&self) -> [f64; 3] {
        [self.kx as f64, self.ky as f64, self.kz as f64]
    }

    /// Largest absolute component (the cube-truncation radius it needs).
    pub fn max_abs(&self) -> usize {
        self.kx.unsigned_abs().max(self.ky.unsigned_abs()).max(self.kz.unsigned_abs()) as usize
    }

    /// Stored half: `kz > 0`, or `kz = 0, ky > 0`, or `kz = ky = 0, kx > 0`.
    pub fn in_half_lattice(&self) -> bool {
        self.kz > 0 || (self.kz == 0 && (self.ky > 0 || (self.ky == 0 && self.kx > 0)))
    }

    /// Representative stored for this wavevector, and whether the value at
    /// `self` is the conjugate of the stored one.
    pub fn canonical(&self) -> (WaveVector, bool) {
        if self.in_half_lattice() {
            (*self, false)
        } else {
            (-*self, true)
        }
    }

    pub fn cross(&self, other: &WaveVector) -> WaveVector {
        WaveVector::new(
            self.ky * other.kz - self.kz * other.ky,
            self.kz * other.kx - self.kx * other.kz,
            self.kx * other.ky - self.ky * other.kx,
        )
    }

    /// Sort key giving lexicographic `(kz, ky, kx)` order.
    pub fn zyx_key(&self) -> (i32, i32, i32) {
        (self.kz, self.ky, self.kx)
    }
}

impl std::ops::Neg for WaveVector {
    type Output = WaveVector;
    fn neg(self) -> WaveVector {
        WaveVector::new(-self.kx, -self.ky, -self.kz)
    }
}

impl std::ops::Add for WaveVector {
    type Output = WaveVector;
    fn add(self, o: WaveVector) -> WaveVector {
        WaveVector::new(self.kx + o.kx, self.ky + o.ky, self.kz + o.kz)
    }
}

impl std::ops::Sub for WaveVector {
    type Output = WaveVector;
    fn sub(self, o: WaveVector) -> WaveVector {
        WaveVector::new(self.kx - o.kx, self.ky - o.ky, self.kz - o.kz)
    }
}

impl fmt::Display for WaveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.kx, self.ky, self.kz)
    }
}

/// Cube truncation `|k_i| <= n` together with the physical FFT resolution
/// `m` used by the transform-based evaluator.
///
/// `m >= 3n + 1` makes the quadratic product alias-free on the retained cube,
/// so the pseudo-spectral nonlinearity is the exact Galerkin truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    n: usize,
    m: usize,
}

impl Grid {
    /// Cutoff `n`, physical resolution chosen as the smallest 2^a 3^b 5^c
    /// at or above `3n + 1`.
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 || n > MAX_GRID_N {
            return Err(Error::InvalidGrid(format!("cutoff {n} outside 1..={MAX_GRID_N}")));
        }
        Ok(Self { n, m: smooth_size_at_least(3 * n + 1) })
    }

    /// Physical resolution `m` per dimension with the sharp two-thirds cutoff
    /// `n = (m - 1) / 3`.
    pub fn from_physical(m: usize) -> Result<Self> {
        if m < 4 {
            return Err(Error::InvalidGrid(format!("physical resolution {m} below 4")));
        }
        let n = (m - 1) / 3;
        if n > MAX_GRID_N {
            return Err(Error::InvalidGrid(format!("physical resolution {m} too large")));
        }
        Ok(Self { n, m })
    }

    pub fn with_physical(n: usize, m: usize) -> Result<Self> {
        if n == 0 || n > MAX_GRID_N || m < 3 * n + 1 {
            return Err(Error::InvalidGrid(format!(
                "cutoff {n} needs physical resolution >= {} (got {m})",
                3 * n + 1
            )));
        }
        Ok(Self { n, m })
    }

    /// Retained cutoff: `|k_i| <= n`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Physical grid points per dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn contains(&self, k: &WaveVector) -> bool {
        k.max_abs() <= self.n
    }

    /// Number of half-lattice modes in the full cube.
    pub fn cube_mode_count(&self) -> usize {
        let side = 2 * self.n + 1;
        (side * side * side - 1) / 2
    }

    /// Largest |k| in the cube.
    pub fn max_k(&self) -> f64 {
        (3.0 * (self.n * self.n) as f64).sqrt()
    }
}

fn smooth_size_at_least(target: usize) -> usize {
    let mut m = target.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r.is_multiple_of(p) {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Which modes a state is allowed to carry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support {
    /// Every nonzero wavevector of the cube.
    Cube,
    /// An explicit negation-closed subset, e.g. a single triad.
    Explicit,
}

/// Immutable table of the retained half-lattice modes, their magnitudes and
/// cached positive-helical basis vectors. Shared between states via `Arc`.
#[derive(Debug)]
pub struct ModeSet {
    grid: Grid,
    support: Support,
    axes: BasisAxes,
    modes: Vec<WaveVector>,
    kmag: Vec<f64>,
    ksq: Vec<f64>,
    hplus: Vec<[Complex64; 3]>,
    // Signed 1-based index over the (2n+1)^3 cube: +i stored directly,
    // -i stored as the conjugate of mode i-1, 0 when not retained.
    lookup: Vec<i32>,
}

impl ModeSet {
    /// All modes of the cube with the default basis axes.
    pub fn cube(grid: Grid) -> Arc<Self> {
        Self::cube_with_axes(grid, BasisAxes::default())
    }

    pub fn cube_with_axes(grid: Grid, axes: BasisAxes) -> Arc<Self> {
        let n = grid.n as i32;
        let mut modes = Vec::with_capacity(grid.cube_mode_count());
        for kz in 0..=n {
            for ky in -n..=n {
                for kx in -n..=n {
                    let k = WaveVector::new(kx, ky, kz);
                    if k.in_half_lattice() {
                        modes.push(k);
                    }
                }
            }
        }
        Arc::new(Self::build(grid, Support::Cube, axes, modes))
    }

    /// Galerkin set made of the given wavevectors and their negatives.
    pub fn explicit(grid: Grid, axes: BasisAxes, wavevectors: &[WaveVector]) -> Result<Arc<Self>> {
        let mut set = BTreeSet::new();
        for k in wavevectors {
            if k.is_zero() {
                return Err(Error::InvalidGrid("zero wavevector in mode set".into()));
            }
            if !grid.contains(k) {
                return Err(Error::InvalidGrid(format!("{k} outside cutoff {}", grid.n)));
            }
            let (c, _) = k.canonical();
            set.insert(c.zyx_key());
        }
        let modes: Vec<_> = set.into_iter().map(|(z, y, x)| WaveVector::new(x, y, z)).collect();
        if modes.len() == grid.cube_mode_count() {
            return Ok(Arc::new(Self::build(grid, Support::Cube, axes, modes)));
        }
        Ok(Arc::new(Self::build(grid, Support::Explicit, axes, modes)))
    }

    fn build(grid: Grid, support: Support, axes: BasisAxes, modes: Vec<WaveVector>) -> Self {
        let side = 2 * grid.n + 1;
        let mut lookup = vec![0i32; side * side * side];
        let mut kmag = Vec::with_capacity(modes.len());
        let mut ksq = Vec::with_capacity(modes.len());
        let mut hplus = Vec::with_capacity(modes.len());
        for (i, k) in modes.iter().enumerate() {
            let tag = i as i32 + 1;
            lookup[cube_index(grid.n, k)] = tag;
            lookup[cube_index(grid.n, &-*k)] = -tag;
            kmag.push(k.norm());
            ksq.push(k.norm_sq() as f64);
            hplus.push(basis::helical_plus(k, &axes));
        }
        Self { grid, support, axes, modes, kmag, ksq, hplus, lookup }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn axes(&self) -> &BasisAxes {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[WaveVector] {
        &self.modes
    }

    pub fn kmag(&self) -> &[f64] {
        &self.kmag
    }

    pub fn ksq(&self) -> &[f64] {
        &self.ksq
    }

    /// Cached h+(k) for the stored modes.
    pub fn hplus(&self) -> &[[Complex64; 3]] {
        &self.hplus
    }

    /// Position of a full-lattice wavevector: `(index, conjugated)`.
    pub fn locate(&self, k: &WaveVector) -> Option<(usize, bool)> {
        if !self.grid.contains(k) {
            return None;
        }
        match self.lookup[cube_index(self.grid.n, k)] {
            0 => None,
            t if t > 0 => Some((t as usize - 1, false)),
            t => Some(((-t) as usize - 1, true)),
        }
    }

    /// Same mode table (structurally) as `other`.
    pub fn same_as(&self, other: &ModeSet) -> bool {
        self.grid.n == other.grid.n && self.axes == other.axes && self.modes == other.modes
    }
}

fn cube_index(n: usize, k: &WaveVector) -> usize {
    let side = 2 * n as i64 + 1;
    let off = n as i64;
    (((k.kz as i64 + off) * side + (k.ky as i64 + off)) * side + (k.kx as i64 + off)) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_lattice_picks_one_of_each_pair() {
        let n = 3;
        let mut count = 0;
        for kz in -n..=n {
            for ky in -n..=n {
                for kx in -n..=n {
                    let k = WaveVector::new(kx, ky, kz);
                    if k.is_zero() {
                        assert!(!k.in_half_lattice());
                        continue;
                    }
                    assert_ne!(k.in_half_lattice(), (-k).in_half_lattice(), "{k}");
                    count += k.in_half_lattice() as usize;
                }
            }
        }
        assert_eq!(count, Grid::new(3).unwrap().cube_mode_count());
    }

    #[test]
    fn physical_sizes_follow_two_thirds_rule() {
        assert_eq!(Grid::from_physical(16).unwrap().n(), 5);
        assert_eq!(Grid::from_physical(32).unwrap().n(), 10);
        assert_eq!(Grid::from_physical(64).unwrap().n(), 21);
        assert_eq!(Grid::new(5).unwrap().m(), 16);
        assert_eq!(Grid::new(2).unwrap().m(), 8);
        assert_eq!(Grid::new(4).unwrap().m(), 15);
        assert!(Grid::from_physical(3).is_err());
        assert!(Grid::with_physical(4, 12).is_err());
        assert!(Grid::new(0).is_err());
    }

    #[test]
    fn cube_table_is_sorted_and_locatable() {
        let set = ModeSet::cube(Grid::new(2).unwrap());
        assert_eq!(set.len(), 62);
        assert!(set.modes().windows(2).all(|w| w[0].zyx_key() < w[1].zyx_key()));
        for (i, k) in set.modes().iter().enumerate() {
            assert_eq!(set.locate(k), Some((i, false)));
            assert_eq!(set.locate(&-*k), Some((i, true)));
        }
        assert_eq!(set.locate(&WaveVector::new(0, 0, 0)), None);
        assert_eq!(set.locate(&WaveVector::new(3, 0, 0)), None);
    }

    #[test]
    fn explicit_set_canonicalizes() {
        let g = Grid::new(2).unwrap();
        let tri = [WaveVector::new(1, 0, 0), WaveVector::new(0, 1, 0), WaveVector::new(-1, -1, 0)];
        let set = ModeSet::explicit(g, BasisAxes::default(), &tri).unwrap();
        assert_eq!(set.len(), 3);
        assert_eq!(*set.support(), Support::Explicit);
        assert_eq!(set.locate(&WaveVector::new(-1, -1, 0)).map(|x| x.1), Some(true));
        assert!(set.locate(&WaveVector::new(1, -1, 0)).is_none());
    }
}
