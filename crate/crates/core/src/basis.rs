//! Helical basis: complex curl eigenvectors `h±(k)` and the projectors onto
//! them.
//!
//! `h±(k) = μ̂(k) × k̂ ± i μ̂(k)` with `μ̂(k) = z × k / |z × k|`. Both vectors
//! have squared norm 2 and satisfy `i k × h± = ±|k| h±`. They are not
//! renormalized; amplitude formulas divide by `conj(h)·h = 2` explicitly.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::WaveVector;

/// Below this `|z × k|` the reference axis is treated as parallel to `k`.
pub const DEGENERATE_TOL: f64 = 1e-12;

pub type CVec3 = [Complex64; 3];

/// Real unit vector used to build `μ̂(k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceAxis([f64; 3]);

impl ReferenceAxis {
    pub const Z: ReferenceAxis = ReferenceAxis([0.0, 0.0, 1.0]);
    pub const X: ReferenceAxis = ReferenceAxis([1.0, 0.0, 0.0]);
    pub const Y: ReferenceAxis = ReferenceAxis([0.0, 1.0, 0.0]);

    /// Normalizes `v`; fails on a (near) zero vector.
    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = norm3(&v);
        if !(n > DEGENERATE_TOL) || !n.is_finite() {
            return Err(Error::InvalidAxis);
        }
        Ok(Self([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }
}

/// Axis substituted when `k` is parallel to the primary axis. Stored as a
/// single byte in checkpoints.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FallbackAxis {
    #[default]
    X,
    Y,
}

impl FallbackAxis {
    pub fn axis(self) -> ReferenceAxis {
        match self {
            FallbackAxis::X => ReferenceAxis::X,
            FallbackAxis::Y => ReferenceAxis::Y,
        }
    }

    pub fn flag(self) -> u8 {
        match self {
            FallbackAxis::X => 0,
            FallbackAxis::Y => 1,
        }
    }

    pub fn from_flag(flag: u8) -> Option<Self> {
        match flag {
            0 => Some(FallbackAxis::X),
            1 => Some(FallbackAxis::Y),
            _ => None,
        }
    }
}

/// Primary reference axis (fixed to ẑ) plus the fallback for `k ∥ ẑ`.
///
/// The branch taken depends only on whether `k ∥ ẑ`, which is invariant under
/// `k → -k`, so `h+(-k) = conj(h+(k))` holds bit for bit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BasisAxes {
    pub fallback: FallbackAxis,
}

impl BasisAxes {
    pub fn primary(&self) -> ReferenceAxis {
        ReferenceAxis::Z
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Helicity {
    Plus,
    Minus,
}

impl Helicity {
    pub fn sign(self) -> f64 {
        match self {
            Helicity::Plus => 1.0,
            Helicity::Minus => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HelicalBasisVector {
    pub h: CVec3,
    pub sign: Helicity,
}

/// `μ̂(k) = z × k / |z × k|`.
pub fn mu_hat(k: &WaveVector, z: &ReferenceAxis) -> Result<[f64; 3]> {
    if k.is_zero() {
        return Err(Error::ZeroWaveVector);
    }
    let c = cross3(&z.0, &k.to_f64());
    let n = norm3(&c);
    if n < DEGENERATE_TOL {
        return Err(Error::DegenerateAxis(*k));
    }
    Ok([c[0] / n, c[1] / n, c[2] / n])
}

fn mu_hat_with_fallback(k: &WaveVector, axes: &BasisAxes) -> Result<[f64; 3]> {
    match mu_hat(k, &axes.primary()) {
        Err(Error::DegenerateAxis(_)) => mu_hat(k, &axes.fallback.axis()),
        other => other,
    }
}

/// `(h+(k), h-(k))`, with `h- = conj(h+)`.
pub fn helical_vectors(k: &WaveVector, axes: &BasisAxes) -> Result<(HelicalBasisVector, HelicalBasisVector)> {
    let mu = mu_hat_with_fallback(k, axes)?;
    let kn = k.norm();
    let kf = k.to_f64();
    let khat = [kf[0] / kn, kf[1] / kn, kf[2] / kn];
    let a = cross3(&mu, &khat);
    let plus = [0, 1, 2].map(|i| Complex64::new(a[i], mu[i]));
    let minus = plus.map(|c| c.conj());
    Ok((
        HelicalBasisVector { h: plus, sign: Helicity::Plus },
        HelicalBasisVector { h: minus, sign: Helicity::Minus },
    ))
}

/// `h+(k)` for a nonzero wavevector.
///
/// # Panics
/// If `k` is zero.
pub fn helical_plus(k: &WaveVector, axes: &BasisAxes) -> CVec3 {
    helical_vectors(k, axes).expect("helical basis of a nonzero wavevector").0.h
}

/// `conj(h)·u`.
pub fn cdot_conj(h: &CVec3, u: &CVec3) -> Complex64 {
    h[0].conj() * u[0] + h[1].conj() * u[1] + h[2].conj() * u[2]
}

/// Scalar `u+(k)` with `P+(k) u = u+(k) h+(k)`.
pub fn amplitude_plus(u: &CVec3, k: &WaveVector, axes: &BasisAxes) -> Result<Complex64> {
    let (hp, _) = helical_vectors(k, axes)?;
    Ok(cdot_conj(&hp.h, u) * 0.5)
}

pub fn amplitude_minus(u: &CVec3, k: &WaveVector, axes: &BasisAxes) -> Result<Complex64> {
    let (_, hm) = helical_vectors(k, axes)?;
    Ok(cdot_conj(&hm.h, u) * 0.5)
}

/// `P+(k) u = [conj(h+)·u / 2] h+`.
pub fn project_plus(u: &CVec3, k: &WaveVector, axes: &BasisAxes) -> Result<CVec3> {
    let (hp, _) = helical_vectors(k, axes)?;
    let a = cdot_conj(&hp.h, u) * 0.5;
    Ok(hp.h.map(|c| c * a))
}

pub fn project_minus(u: &CVec3, k: &WaveVector, axes: &BasisAxes) -> Result<CVec3> {
    let (_, hm) = helical_vectors(k, axes)?;
    let a = cdot_conj(&hm.h, u) * 0.5;
    Ok(hm.h.map(|c| c * a))
}

pub(crate) fn cross3(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn ccross3(a: &CVec3, b: &CVec3) -> CVec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm3(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}
