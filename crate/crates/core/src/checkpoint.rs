//! Binary checkpoints.
//!
//! Layout, all little-endian:
//!
//! | field           | type        |
//! |-----------------|-------------|
//! | magic `"DNSH"`  | 4 bytes     |
//! | version = 1     | u32         |
//! | cutoff N        | u32         |
//! | fallback axis   | u8          |
//! | viscosity       | f64         |
//! | time            | f64         |
//! | mode count      | u64         |
//! | per mode        | kx, ky, kz as i32; Re, Im of u+ as f64 |
//!
//! Modes are the stored half-lattice in lexicographic `(kz, ky, kx)` order.
//! A file listing every mode of the cube restores a cube state; a shorter
//! list restores a Galerkin set made of exactly those modes.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{BasisAxes, FallbackAxis};
use crate::error::{Error, Result};
use crate::field::SpectralState;
use crate::lattice::{Grid, ModeSet, WaveVector, MAX_GRID_N};

pub const MAGIC: &[u8; 4] = b"DNSH";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 1 + 8 + 8 + 8;
const MODE_LEN: usize = 3 * 4 + 2 * 8;

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("bad magic bytes")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    VersionMismatch(u32),
    #[error("file ends before the declared content")]
    TruncatedFile,
    #[error("inconsistent grid: {0}")]
    InconsistentGrid(String),
}

impl CheckpointError {
    pub fn kind(&self) -> &'static str {
        match self {
            CheckpointError::BadMagic => "BadMagic",
            CheckpointError::VersionMismatch(_) => "VersionMismatch",
            CheckpointError::TruncatedFile => "TruncatedFile",
            CheckpointError::InconsistentGrid(_) => "InconsistentGrid",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub state: SpectralState,
    pub nu: f64,
}

pub fn encode(state: &SpectralState, nu: f64) -> Vec<u8> {
    let modes = state.modes();
    let mut out = Vec::with_capacity(HEADER_LEN + MODE_LEN * modes.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(state.grid().n() as u32).to_le_bytes());
    out.push(modes.axes().fallback.flag());
    out.extend_from_slice(&nu.to_le_bytes());
    out.extend_from_slice(&state.time.to_le_bytes());
    out.extend_from_slice(&(modes.len() as u64).to_le_bytes());
    for (k, u) in modes.modes().iter().zip(state.amplitudes()) {
        for c in [k.kx, k.ky, k.kz] {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&u.re.to_le_bytes());
        out.extend_from_slice(&u.im.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const L: usize>(&mut self) -> Result<[u8; L], CheckpointError> {
        let end = self.pos.checked_add(L).ok_or(CheckpointError::TruncatedFile)?;
        let s = self.buf.get(self.pos..end).ok_or(CheckpointError::TruncatedFile)?;
        self.pos = end;
        Ok(s.try_into().expect("slice length"))
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take()?))
    }
    fn i32(&mut self) -> Result<i32, CheckpointError> {
        Ok(i32::from_le_bytes(self.take()?))
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take()?))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint, CheckpointError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::VersionMismatch(version));
    }
    let n = r.u32()? as usize;
    if n == 0 || n > MAX_GRID_N {
        return Err(CheckpointError::InconsistentGrid(format!("cutoff {n} outside 1..={MAX_GRID_N}")));
    }
    let grid = Grid::new(n).map_err(|e| CheckpointError::InconsistentGrid(e.to_string()))?;
    let [flag] = r.take::<1>()?;
    let fallback = FallbackAxis::from_flag(flag)
        .ok_or_else(|| CheckpointError::InconsistentGrid(format!("unknown fallback-axis flag {flag}")))?;
    let axes = BasisAxes { fallback };
    let nu = r.f64()?;
    let time = r.f64()?;
    let count = r.u64()?;
    if count as u128 > grid.cube_mode_count() as u128 {
        return Err(CheckpointError::InconsistentGrid(format!("{count} modes exceed cube of cutoff {n}")));
    }
    let count = count as usize;
    let mut ks = Vec::with_capacity(count);
    let mut amps = Vec::with_capacity(count);
    for _ in 0..count {
        let k = WaveVector::new(r.i32()?, r.i32()?, r.i32()?);
        let u = Complex64::new(r.f64()?, r.f64()?);
        if !k.in_half_lattice() || !grid.contains(&k) {
            return Err(CheckpointError::InconsistentGrid(format!("mode {k} not a stored mode at cutoff {n}")));
        }
        if let Some(prev) = ks.last() {
            if WaveVector::zyx_key(prev) >= k.zyx_key() {
                return Err(CheckpointError::InconsistentGrid(format!("mode {k} out of order")));
            }
        }
        ks.push(k);
        amps.push(u);
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::InconsistentGrid(format!("{} trailing bytes", bytes.len() - r.pos)));
    }
    let modes = if count == grid.cube_mode_count() {
        ModeSet::cube_with_axes(grid, axes)
    } else {
        ModeSet::explicit(grid, axes, &ks).map_err(|e| CheckpointError::InconsistentGrid(e.to_string()))?
    };
    let state = SpectralState::from_amplitudes(modes, amps, time)
        .map_err(|e| CheckpointError::InconsistentGrid(e.to_string()))?;
    Ok(Checkpoint { state, nu })
}

pub fn write_checkpoint(state: &SpectralState, nu: f64, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(state, nu)).map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(decode(&bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::random_state;
    use crate::integrator::triad_state;
    use crate::nonlinear::TriadSpec;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let s = random_state(Grid::new(1).unwrap(), 0.0, [1.0, 1.0], 0).unwrap();
        let b = encode(&s, 0.25);
        assert_eq!(&b[0..4], b"DNSH");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 1);
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 1);
        assert_eq!(b[12], 0);
        assert_eq!(f64::from_le_bytes(b[13..21].try_into().unwrap()), 0.25);
        assert_eq!(u64::from_le_bytes(b[29..37].try_into().unwrap()), 13);
        assert_eq!(b.len(), HEADER_LEN + 13 * MODE_LEN);
        // first mode in (kz, ky, kx) order is (1, 0, 0)
        assert_eq!(i32::from_le_bytes(b[37..41].try_into().unwrap()), 1);
    }

    #[test]
    fn truncation_and_corruption_are_detected() {
        let s = random_state(Grid::new(2).unwrap(), 0.0, [1.0, 2.0], 0).unwrap();
        let b = encode(&s, 0.1);
        assert_eq!(decode(&b[..b.len() - 5]).unwrap_err(), CheckpointError::TruncatedFile);
        assert_eq!(decode(&b[..10]).unwrap_err(), CheckpointError::TruncatedFile);
        let mut bad = b.clone();
        bad[0] = b'X';
        assert_eq!(decode(&bad).unwrap_err(), CheckpointError::BadMagic);
        let mut bad = b.clone();
        bad[4] = 2;
        assert_eq!(decode(&bad).unwrap_err(), CheckpointError::VersionMismatch(2));
        let mut bad = b.clone();
        bad[8..12].copy_from_slice(&(MAX_GRID_N as u32 + 1).to_le_bytes());
        assert!(matches!(decode(&bad).unwrap_err(), CheckpointError::InconsistentGrid(_)));
        let mut bad = b.clone();
        bad.push(0);
        assert!(matches!(decode(&bad).unwrap_err(), CheckpointError::InconsistentGrid(_)));
    }

    #[test]
    fn triad_state_round_trips_with_its_support() {
        let t = TriadSpec::new(WaveVector::new(1, 0, 0), WaveVector::new(0, 1, 0), WaveVector::new(-1, -1, 0)).unwrap();
        let s = triad_state(Grid::new(2).unwrap(), &t, 4).unwrap();
        let back = decode(&encode(&s, 0.0)).unwrap();
        assert_eq!(back.state, s);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("state.bin");
        let mut s = random_state(Grid::new(3).unwrap(), -1.0, [1.0, 3.0], 2).unwrap();
        s.time = 1.25;
        write_checkpoint(&s, 0.02, &p).unwrap();
        let ck = read_checkpoint(&p).unwrap();
        assert_eq!(ck.state, s);
        assert_eq!(ck.nu, 0.02);
        assert!(matches!(read_checkpoint(dir.path().join("missing")), Err(Error::Io { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_bit_exact(n in 1usize..4, seed in any::<u64>(), t in -1e6f64..1e6, nu in 0.0f64..1.0) {
            let mut s = random_state(Grid::new(n).unwrap(), -1.0, [1.0, n as f64], seed).unwrap();
            s.time = t;
            let ck = decode(&encode(&s, nu)).unwrap();
            prop_assert_eq!(ck.state, s);
            prop_assert_eq!(ck.nu.to_bits(), nu.to_bits());
        }
    }
}
