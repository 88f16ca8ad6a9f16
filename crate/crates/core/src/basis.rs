//! Harmonic-oscillator basis with ω = 1.
//!
//! In one dimension `ell = -1` labels the even states and `ell = 0` the odd
//! ones; in three dimensions `ell` is the angular momentum. Both readings use
//! the same matrix elements of `x²`:
//! `⟨n|x²|n⟩ = 2n+ℓ+3/2` and `⟨n|x²|n+1⟩ = √((n+1)(n+ℓ+3/2))`.

use serde::{Deserialize, Serialize};

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};
use crate::precision::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisParams {
    pub ell: i32,
    pub omega: f64,
}

impl BasisParams {
    pub fn new(ell: i32) -> Result<Self> {
        check_ell(ell)?;
        Ok(BasisParams { ell, omega: 1.0 })
    }
}

pub fn check_ell(ell: i32) -> Result<()> {
    if ell < -1 {
        return Err(Error::InvalidParameter(format!("ell = {ell} < -1")));
    }
    Ok(())
}

/// `⟨n|x²|n⟩ = 2n + ℓ + 3/2`.
pub fn alpha<T: Real>(n: usize, ell: i32) -> T {
    T::of(2.0 * n as f64 + ell as f64 + 1.5)
}

/// `⟨n|x²|n+1⟩ = √((n+1)(n+ℓ+3/2))`.
pub fn beta_off<T: Real>(n: usize, ell: i32) -> T {
    (T::of(n as f64 + 1.0) * T::of(n as f64 + ell as f64 + 1.5)).sqrt()
}

/// Harmonic level `εₙ = 4n + 2ℓ + 3`.
pub fn eps(n: usize, ell: i32) -> Result<f64> {
    check_ell(ell)?;
    Ok(eps_unchecked(n, ell))
}

pub(crate) fn eps_unchecked(n: usize, ell: i32) -> f64 {
    4.0 * n as f64 + 2.0 * ell as f64 + 3.0
}

/// Tridiagonal band of `x²` on `size` states.
pub fn x2_band<T: Real>(ell: i32, size: usize) -> BandedMatrix<T> {
    let mut m = BandedMatrix::zeros(size, 1, 1);
    for n in 0..size {
        m.set(n, n, alpha(n, ell));
        if n + 1 < size {
            let b = beta_off(n, ell);
            m.set(n, n + 1, b);
            m.set(n + 1, n, b);
        }
    }
    m
}

/// `⟨m|x^{2t}|n⟩` on `size` states, half-bandwidth `t`.
pub fn power_band(t: usize, ell: i32, size: usize) -> Result<BandedMatrix> {
    if t == 0 || size <= t {
        return Err(Error::SizeTooSmall { size, min: t });
    }
    check_ell(ell)?;
    Ok(power_bands::<f64>(t, ell, size).pop().unwrap())
}

/// `x^{2d}` bands for `d = 0..=t`, all exact on `size` states.
///
/// The product is formed on `size + t` states and truncated afterwards, so
/// intermediate states beyond the cutoff are not lost.
pub fn power_bands<T: Real>(t: usize, ell: i32, size: usize) -> Vec<BandedMatrix<T>> {
    let padded = size + t;
    let x2 = x2_band::<T>(ell, padded);
    let mut out = Vec::with_capacity(t + 1);
    let mut acc = BandedMatrix::<T>::identity(padded);
    out.push(acc.truncate(size));
    for _ in 0..t {
        acc = acc.mul(&x2);
        out.push(acc.truncate(size));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels() {
        assert_eq!(eps(0, -1).unwrap(), 1.0);
        assert_eq!(eps(1, -1).unwrap(), 5.0);
        assert_eq!(eps(3, 0).unwrap(), 15.0);
        assert!(eps(0, -2).is_err());
    }

    #[test]
    fn x4_ground_element() {
        let b = power_band(2, 0, 6).unwrap();
        assert!((b.get(0, 0) - 3.75).abs() < 1e-15);
    }

    #[test]
    fn x2_band_matches_elements() {
        let b = power_band(1, -1, 5).unwrap();
        assert_eq!(b.get(2, 2), 4.0 + 0.5);
        assert!((b.get(1, 2) - (2.0f64 * 1.5).sqrt()).abs() < 1e-15);
        assert_eq!(b.get(0, 3), 0.0);
    }

    #[test]
    fn small_size_rejected() {
        assert!(power_band(2, 0, 2).is_err());
    }
}
