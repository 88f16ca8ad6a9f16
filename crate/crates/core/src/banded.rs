//! Banded matrices and the quasi-Hamiltonian `M(E) = H − E·D`.

use nalgebra::DMatrix;

use crate::basis::{self, BasisParams};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::potential::{CouplingPath, PadePotential};
use crate::precision::Real;
use crate::solvable::ExactSolution;

/// Square matrix with independent lower and upper half-bandwidths.
///
/// Stored row-major by diagonals; reads outside the band return zero.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix<T = f64> {
    size: usize,
    lower: usize,
    upper: usize,
    data: Vec<T>,
}

impl<T: Real> BandedMatrix<T> {
    pub fn zeros(size: usize, lower: usize, upper: usize) -> Self {
        let lower = lower.min(size.saturating_sub(1));
        let upper = upper.min(size.saturating_sub(1));
        BandedMatrix {
            size,
            lower,
            upper,
            data: vec![T::zero(); size * (lower + upper + 1)],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, 0, 0);
        for i in 0..size {
            m.set(i, i, T::one());
        }
        m
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn lower_bw(&self) -> usize {
        self.lower
    }

    pub fn upper_bw(&self) -> usize {
        self.upper
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        if i >= self.size || j >= self.size || j + self.lower < i || j > i + self.upper {
            return None;
        }
        Some(i * (self.lower + self.upper + 1) + (j + self.lower - i))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |k| self.data[k])
    }

    /// Signed-index read; negative or out-of-range indices give zero.
    #[inline]
    pub fn at(&self, i: isize, j: isize) -> T {
        if i < 0 || j < 0 {
            return T::zero();
        }
        self.get(i as usize, j as usize)
    }

    /// Panics when `(i, j)` lies outside the stored band.
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        let k = self
            .slot(i, j)
            .unwrap_or_else(|| panic!("({i}, {j}) outside band [-{}, +{}]", self.lower, self.upper));
        self.data[k] = v;
    }

    /// Column range `[lo, hi)` of the band in row `i`.
    #[inline]
    pub fn row_range(&self, i: usize) -> (usize, usize) {
        (i.saturating_sub(self.lower), (i + self.upper + 1).min(self.size))
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.size)
            .map(|i| {
                let (lo, hi) = self.row_range(i);
                (lo..hi).fold(T::zero(), |acc, j| acc + self.get(i, j) * x.get(j).copied().unwrap_or(T::zero()))
            })
            .collect()
    }

    /// Row vector times matrix, `yᵀ = xᵀ·A`.
    pub fn tmatvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.size];
        for i in 0..self.size.min(x.len()) {
            if x[i] == T::zero() {
                continue;
            }
            let (lo, hi) = self.row_range(i);
            for (j, yj) in y.iter_mut().enumerate().take(hi).skip(lo) {
                *yj = *yj + x[i] * self.get(i, j);
            }
        }
        y
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.size, other.size);
        let mut out = Self::zeros(self.size, self.lower + other.lower, self.upper + other.upper);
        for i in 0..self.size {
            let (lo, hi) = self.row_range(i);
            for k in lo..hi {
                let a = self.get(i, k);
                if a == T::zero() {
                    continue;
                }
                let (lo2, hi2) = other.row_range(k);
                for j in lo2..hi2 {
                    let s = out.slot(i, j).unwrap();
                    out.data[s] = out.data[s] + a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `self + s·other`, bandwidths widened as needed.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        assert_eq!(self.size, other.size);
        let mut out = Self::zeros(self.size, self.lower.max(other.lower), self.upper.max(other.upper));
        for i in 0..self.size {
            let (lo, hi) = out.row_range(i);
            for j in lo..hi {
                let v = self.get(i, j) + s * other.get(i, j);
                out.set(i, j, v);
            }
        }
        out
    }

    pub fn scale(&self, s: T) -> Self {
        BandedMatrix {
            data: self.data.iter().map(|&v| v * s).collect(),
            ..self.clone()
        }
    }

    /// Multiply row `i` by `w[i]`.
    pub fn scale_rows(&self, w: &[T]) -> Self {
        let mut out = self.clone();
        let width = self.lower + self.upper + 1;
        for i in 0..self.size {
            for v in &mut out.data[i * width..(i + 1) * width] {
                *v = *v * w[i];
            }
        }
        out
    }

    /// Leading `size × size` block.
    pub fn truncate(&self, size: usize) -> Self {
        assert!(size <= self.size);
        let mut out = Self::zeros(size, self.lower, self.upper);
        for i in 0..size {
            let (lo, hi) = out.row_range(i);
            for j in lo..hi {
                out.set(i, j, self.get(i, j));
            }
        }
        out
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    pub fn map<U: Real>(&self, f: impl Fn(T) -> U) -> BandedMatrix<U> {
        BandedMatrix {
            size: self.size,
            lower: self.lower,
            upper: self.upper,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl BandedMatrix<f64> {
    pub fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.size, self.size, |i, j| self.get(i, j))
    }

    pub fn from_dense(m: &DMatrix<f64>, lower: usize, upper: usize) -> Self {
        let mut out = Self::zeros(m.nrows(), lower, upper);
        for i in 0..m.nrows() {
            let (lo, hi) = out.row_range(i);
            for j in lo..hi {
                out.set(i, j, m[(i, j)]);
            }
        }
        out
    }

    pub fn lu(&self) -> BandLu {
        BandLu::factor(self)
    }
}

/// LU factorization with partial pivoting in LAPACK `gbtf2` layout.
///
/// Row interchanges widen the upper band to `kl + ku`, so each stored row
/// spans offsets `[-kl, kl + ku]`.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
    /// Sign of the determinant; 0 when singular.
    pub sign: f64,
    /// `ln |det|`, `-inf` when singular.
    pub log_abs_det: f64,
}

impl BandLu {
    fn width(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    pub fn factor(a: &BandedMatrix<f64>) -> Self {
        let (n, kl, ku) = (a.size, a.lower, a.upper);
        let mut lu = BandLu {
            n,
            kl,
            ku,
            ab: vec![0.0; n * (2 * kl + ku + 1)],
            piv: (0..n).collect(),
            sign: 1.0,
            log_abs_det: 0.0,
        };
        for i in 0..n {
            let (lo, hi) = a.row_range(i);
            for j in lo..hi {
                let k = lu.idx(i, j);
                lu.ab[k] = a.get(i, j);
            }
        }
        let kv = kl + ku;
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = lu.ab[lu.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = lu.ab[lu.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            lu.piv[k] = p;
            if best == 0.0 {
                lu.sign = 0.0;
                lu.log_abs_det = f64::NEG_INFINITY;
                continue;
            }
            let jmax = (k + kv).min(n - 1);
            if p != k {
                lu.sign = -lu.sign;
                for j in k..=jmax {
                    let (x, y) = (lu.idx(k, j), lu.idx(p, j));
                    lu.ab.swap(x, y);
                }
            }
            let pivot = lu.ab[lu.idx(k, k)];
            if pivot < 0.0 {
                lu.sign = -lu.sign;
            }
            lu.log_abs_det += pivot.abs().ln();
            for i in k + 1..=last {
                let ik = lu.idx(i, k);
                let f = lu.ab[ik] / pivot;
                lu.ab[ik] = f;
                if f == 0.0 {
                    continue;
                }
                for j in k + 1..=jmax {
                    let kj = lu.idx(k, j);
                    let ij = lu.idx(i, j);
                    lu.ab[ij] -= f * lu.ab[kj];
                }
            }
        }
        lu
    }

    pub fn is_singular(&self) -> bool {
        self.sign == 0.0
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if self.is_singular() {
            return Err(Error::Singular("banded LU has a zero pivot".into()));
        }
        let n = self.n;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let last = (k + self.kl).min(n - 1);
            for i in k + 1..=last {
                x[i] -= self.ab[self.idx(i, k)] * x[k];
            }
        }
        let kv = self.kl + self.ku;
        for k in (0..n).rev() {
            let jmax = (k + kv).min(n - 1);
            let mut s = x[k];
            for j in k + 1..=jmax {
                s -= self.ab[self.idx(k, j)] * x[j];
            }
            x[k] = s / self.ab[self.idx(k, k)];
        }
        Ok(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Lower,
    Upper,
}

/// Forward (lower, ascending rows) or back (upper, descending rows)
/// substitution using only the tagged triangle of `z`.
pub fn solve_triangular<T: Real>(z: &BandedMatrix<T>, tri: Triangle, rhs: &[T]) -> Result<Vec<T>> {
    let n = z.size();
    let mut x = vec![T::zero(); n];
    let step = |i: usize, x: &mut Vec<T>| -> Result<()> {
        let (lo, hi) = z.row_range(i);
        let mut s = rhs[i];
        let cols = match tri {
            Triangle::Lower => lo..i,
            Triangle::Upper => i + 1..hi,
        };
        for j in cols {
            s = s - z.get(i, j) * x[j];
        }
        let p = z.get(i, i);
        if p == T::zero() {
            return Err(Error::ZeroPivot { row: i });
        }
        x[i] = s.quot(p);
        Ok(())
    };
    match tri {
        Triangle::Lower => (0..n).try_for_each(|i| step(i, &mut x))?,
        Triangle::Upper => (0..n).rev().try_for_each(|i| step(i, &mut x))?,
    }
    Ok(x)
}

/// The E-independent part `H` and the coefficient `D` of `−E`.
#[derive(Debug, Clone)]
pub struct QuasiHamiltonian<T = f64> {
    pub t: usize,
    pub h: BandedMatrix<T>,
    pub d: BandedMatrix<T>,
}

impl<T: Real> QuasiHamiltonian<T> {
    pub fn size(&self) -> usize {
        self.h.size()
    }

    pub fn at(&self, e: T) -> BandedMatrix<T> {
        self.h.axpy(-e, &self.d)
    }
}

/// `H = Λ·Bband + β·Aband`, `D = Bband`, with `Λ = diag(εₙ)`.
pub fn assemble<T: Real>(beta: T, a: &[T], b: &[T], ell: i32, bands: &[BandedMatrix<T>]) -> QuasiHamiltonian<T> {
    let size = bands[0].size();
    let t = b.len() - 1;
    let mut bb = BandedMatrix::zeros(size, t, t);
    for (d, &c) in b.iter().enumerate() {
        if c != T::zero() {
            bb = bb.axpy(c, &bands[d]);
        }
    }
    let mut ab = BandedMatrix::zeros(size, t, t);
    for (k, &c) in a.iter().enumerate() {
        if c != T::zero() {
            ab = ab.axpy(c, &bands[k]);
        }
    }
    let lam: Vec<T> = (0..size).map(|n| T::of(basis::eps_unchecked(n, ell))).collect();
    let h = bb.scale_rows(&lam).axpy(beta, &ab);
    QuasiHamiltonian { t, h, d: bb }
}

pub fn build_quasi_hamiltonian(p: &PadePotential, basis: &BasisParams, size: usize) -> Result<QuasiHamiltonian> {
    let t = p.t();
    if size <= 2 * t {
        return Err(Error::SizeTooSmall { size, min: 2 * t });
    }
    let bands = basis::power_bands::<f64>(t, basis.ell, size);
    Ok(assemble(p.beta, &p.a, &p.b, basis.ell, &bands))
}

/// Matrices `H⁽ʲ⁾, D⁽ʲ⁾` with `H(λ) = Σ λʲ H⁽ʲ⁾`, `D(λ) = Σ λʲ D⁽ʲ⁾`, for
/// `j = 0..=max_order`. Orders beyond the path degree are exactly zero.
pub fn derivative_matrices(
    c: &CouplingPath,
    basis: &BasisParams,
    size: usize,
    max_order: usize,
) -> Result<Vec<QuasiHamiltonian>> {
    let t = c.t();
    if size <= 2 * t {
        return Err(Error::SizeTooSmall { size, min: 2 * t });
    }
    let bands = basis::power_bands::<f64>(t, basis.ell, size);
    let beta_a: Vec<Poly> = c.a.iter().map(|ak| c.beta.mul(ak)).collect();
    Ok((0..=max_order)
        .map(|j| {
            let a: Vec<f64> = beta_a.iter().map(|p| p.coeff(j)).collect();
            let b: Vec<f64> = c.b.iter().map(|p| p.coeff(j)).collect();
            assemble(1.0, &a, &b, basis.ell, &bands)
        })
        .collect())
}

/// Left null vector `ρ⁽⁰⁾ = D·h⁽⁰⁾`; zero beyond index `q + t`.
pub fn build_rho(s: &ExactSolution, size: usize) -> Result<Vec<f64>> {
    let qh = build_quasi_hamiltonian(&s.potential, &BasisParams::new(s.ell)?, size)?;
    let mut h = vec![0.0; size];
    h[..s.h0.len()].copy_from_slice(&s.h0);
    let mut rho = qh.d.matvec(&h);
    for r in rho.iter_mut().skip(s.q + s.t + 1) {
        *r = 0.0;
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> BandedMatrix {
        let mut m = BandedMatrix::zeros(6, 2, 1);
        for i in 0..6 {
            let (lo, hi) = m.row_range(i);
            for j in lo..hi {
                m.set(i, j, 1.0 + (i * 7 + j * 3) as f64 % 5.0 - if i == j { 0.0 } else { 2.5 });
            }
        }
        m
    }

    #[test]
    fn out_of_band_reads_zero() {
        let m = sample();
        assert_eq!(m.get(0, 3), 0.0);
        assert_eq!(m.get(5, 0), 0.0);
        assert_eq!(m.at(-1, 0), 0.0);
    }

    #[test]
    fn lu_matches_dense() {
        let m = sample();
        let lu = m.lu();
        let det = m.to_dense().determinant();
        assert!((lu.sign * lu.log_abs_det.exp() - det).abs() < 1e-10 * det.abs().max(1.0));
        let b: Vec<f64> = (0..6).map(|i| i as f64 - 2.0).collect();
        let x = lu.solve(&b).unwrap();
        let r = m.matvec(&x);
        for i in 0..6 {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn triangular_identity() {
        let id = BandedMatrix::<f64>::identity(4);
        let b = vec![1.0, 2.0, 3.0, 4.0];
        assert_eq!(solve_triangular(&id, Triangle::Lower, &b).unwrap(), b);
        assert_eq!(solve_triangular(&id, Triangle::Upper, &b).unwrap(), b);
    }

    #[test]
    fn triangular_zero_pivot_names_row() {
        let mut z = BandedMatrix::<f64>::identity(3);
        z.set(1, 1, 0.0);
        match solve_triangular(&z, Triangle::Lower, &[1.0, 1.0, 1.0]) {
            Err(Error::ZeroPivot { row }) => assert_eq!(row, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn harmonic_limit_is_diagonal() {
        let p = PadePotential::harmonic(-1).unwrap();
        let qh = build_quasi_hamiltonian(&p, &BasisParams::new(-1).unwrap(), 5).unwrap();
        let m = qh.at(2.0);
        for i in 0..5 {
            assert_eq!(m.get(i, i), 4.0 * i as f64 + 1.0 - 2.0);
            if i + 1 < 5 {
                assert_eq!(m.get(i, i + 1), 0.0);
            }
        }
    }
}
