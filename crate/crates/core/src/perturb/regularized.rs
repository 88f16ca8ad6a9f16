//! General `t`: shift the unknowns by `t` (`ξⱼ = h_{j+t}`) so that
//! `Z[n][j] = M₀[n][j+t]` is lower triangular. Its diagonal vanishes only at
//! `n₀ = q + t`, where the regularized propagator puts `D` instead.
//!
//! The leftmost coefficients `h_c` (`c < t`) and the exempted `h_{q+2t}` move
//! to the right-hand side. Each `ξ` is then `θ + Σ uⱼ ηⱼ`, where `θ` carries
//! the order-dependent input and the `η` columns do not depend on the order.
//! The `uⱼ` come from the truncation rows `h_{M+1} = … = h_{M+t} = 0`,
//! the normalization, and, when the energy is unknown too, `ξ_{n₀} = 0`.
//!
//! Forward substitution follows the growing solution of the recurrence, so
//! the `η` columns reach ~1e9 at `M = 80`; double-double arithmetic keeps
//! the final cancellation harmless.

use crate::banded::{solve_triangular, BandedMatrix, Triangle};
use crate::error::{Error, Result};
use crate::precision::Real;

/// Which rows and columns enter the triangular propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Pivot {
    Regularized(f64),
    Deleted,
}

/// Order-independent part of the triangular solve.
#[derive(Debug, Clone)]
pub struct TriangularPropagator<T: Real = f64> {
    pub t: usize,
    pub q: usize,
    pub norm: usize,
    pub size: usize,
    z: BandedMatrix<T>,
    wide: BandedMatrix<T>,
    rho: Vec<T>,
    pivot: Pivot,
    /// `h_c` for `c < t`, `c ≠ norm`, then `h_{q+2t}`.
    pub unknowns: Vec<usize>,
    /// `Z⁻¹` applied to each unknown's column, then to `ρ` (last).
    pub eta: Vec<Vec<T>>,
}

/// Result of one order on the triangular path.
#[derive(Debug, Clone)]
pub struct TriangularOrder {
    pub h: Vec<f64>,
    pub theta: Vec<f64>,
    /// Values of [`TriangularPropagator::unknowns`].
    pub zeta: Vec<f64>,
    /// `ξ_{n₀}`; zero by construction on the D-free path.
    pub z: f64,
    /// Energy from the model-space system including `ξ_{n₀} = 0`.
    pub energy_from_constraints: Option<f64>,
    /// `|(M₀h − τ̃)_{n₀}|`, the one row the propagator never enforces.
    pub pivot_row_residual: f64,
}

/// Gaussian elimination with partial pivoting on a small dense system.
fn dense_solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[p][col] == T::zero() {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col].quot(a[col][col]);
            for c in col..n {
                let v = a[col][c];
                a[r][c] = a[r][c] - f * v;
            }
            let v = b[col];
            b[r] = b[r] - f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for r in (0..n).rev() {
        let mut s = b[r];
        for c in r + 1..n {
            s = s - a[r][c] * x[c];
        }
        x[r] = s.quot(a[r][r]);
    }
    Some(x)
}

fn lossy<T: Real>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64_lossy()).collect()
}

impl<T: Real> TriangularPropagator<T> {
    /// Regularized propagator with pivot `D` at `n₀`. `wide` is `M(E⁽⁰⁾)` on
    /// at least `size + t` states, `rho` the left null vector.
    pub fn regularized(wide: &BandedMatrix, t: usize, q: usize, norm: usize, size: usize, d: f64, rho: &[f64]) -> Result<Self> {
        if d == 0.0 {
            return Err(Error::InvalidParameter("regularizer D must be nonzero".into()));
        }
        Self::build(wide, t, q, norm, size, Pivot::Regularized(d), rho)
    }

    /// Row and column `n₀` removed; no regularizer.
    pub fn direct(wide: &BandedMatrix, t: usize, q: usize, norm: usize, size: usize, rho: &[f64]) -> Result<Self> {
        Self::build(wide, t, q, norm, size, Pivot::Deleted, rho)
    }

    fn build(wide: &BandedMatrix, t: usize, q: usize, norm: usize, size: usize, pivot: Pivot, rho: &[f64]) -> Result<Self> {
        let n0 = q + t;
        if t == 0 || norm > q {
            return Err(Error::InvalidParameter(format!(
                "need t ≥ 1 and normalization index ≤ q, got t={t}, index {norm}"
            )));
        }
        if size < q + 3 * t + 2 {
            return Err(Error::SizeTooSmall { size, min: q + 3 * t + 1 });
        }
        if wide.size() < size + t {
            return Err(Error::SizeTooSmall { size: wide.size(), min: size + t - 1 });
        }
        let wide: BandedMatrix<T> = wide.map(T::of);
        let dim = match pivot {
            Pivot::Regularized(_) => size,
            Pivot::Deleted => size - 1,
        };
        let map = |j: usize| -> Option<usize> {
            match pivot {
                Pivot::Regularized(_) => Some(j),
                Pivot::Deleted if j == n0 => None,
                Pivot::Deleted => Some(if j < n0 { j } else { j - 1 }),
            }
        };
        let mut z = BandedMatrix::zeros(dim, 2 * t, 0);
        for n in 0..size {
            let Some(r) = map(n) else { continue };
            for j in n.saturating_sub(2 * t)..=n {
                let Some(c) = map(j) else { continue };
                z.set(r, c, wide.get(n, j + t));
            }
        }
        if let Pivot::Regularized(d) = pivot {
            z.set(n0, n0, T::of(d));
        }
        let mut unknowns: Vec<usize> = (0..t).filter(|&c| c != norm).collect();
        unknowns.push(q + 2 * t);
        let rho: Vec<T> = rho[..size].iter().map(|&r| T::of(r)).collect();
        let mut prop = TriangularPropagator { t, q, norm, size, z, wide, rho, pivot, unknowns, eta: vec![] };
        let mut eta = Vec::with_capacity(prop.unknowns.len() + 1);
        for &c in &prop.unknowns {
            let col: Vec<T> = (0..size)
                .map(|n| if n == n0 && c == q + 2 * t { T::zero() } else { -prop.wide.get(n, c) })
                .collect();
            eta.push(prop.propagate(&col)?);
        }
        eta.push(prop.propagate(&prop.rho)?);
        prop.eta = eta;
        Ok(prop)
    }

    fn n0(&self) -> usize {
        self.q + self.t
    }

    /// `Z⁻¹v` expanded back to `size` entries (`ξ_{n₀} = 0` on the D-free path).
    fn propagate(&self, v: &[T]) -> Result<Vec<T>> {
        let n0 = self.n0();
        let rhs: Vec<T> = match self.pivot {
            Pivot::Regularized(_) => v[..self.size].to_vec(),
            Pivot::Deleted => (0..self.size).filter(|&n| n != n0).map(|n| v[n]).collect(),
        };
        let x = solve_triangular(&self.z, Triangle::Lower, &rhs).map_err(|e| match e {
            Error::ZeroPivot { row } if self.pivot == Pivot::Deleted && row >= n0 => Error::ZeroPivot { row: row + 1 },
            other => other,
        })?;
        Ok(match self.pivot {
            Pivot::Regularized(_) => x,
            Pivot::Deleted => {
                let mut out = x;
                out.insert(n0, T::zero());
                out
            }
        })
    }

    /// Rows of `ξ` that must vanish: the truncation `h_{M+1..M+t}` and, when
    /// the normalized coefficient lies in `ξ`, `h_norm`.
    fn constraint_rows(&self) -> Vec<usize> {
        let mut rows: Vec<usize> = (self.size - self.t..self.size).collect();
        if self.norm >= self.t {
            rows.push(self.norm - self.t);
        }
        rows
    }

    pub fn eta_f64(&self) -> Vec<Vec<f64>> {
        self.eta.iter().map(|c| lossy(c)).collect()
    }

    /// Solve one order given `τ` and the energy correction `e`.
    pub fn solve(&self, tau: &[f64], e: f64) -> Result<TriangularOrder> {
        let n0 = self.n0();
        let nu = self.unknowns.len();
        let tau: Vec<T> = tau[..self.size].iter().map(|&x| T::of(x)).collect();
        let e = T::of(e);
        let theta = self.propagate(&tau)?;
        let rows = self.constraint_rows();
        let eta_rho = &self.eta[nu];

        let energy_from_constraints = match self.pivot {
            Pivot::Regularized(d) => {
                // Unknowns (E, u...); rows: D·ξ_{n₀} = 0 plus the constraints.
                let d = T::of(d);
                let scaled: Vec<(usize, T)> = std::iter::once((n0, d)).chain(rows.iter().map(|&r| (r, T::one()))).collect();
                let a = scaled
                    .iter()
                    .map(|&(r, s)| std::iter::once(s * eta_rho[r]).chain(self.eta[..nu].iter().map(|c| s * c[r])).collect())
                    .collect();
                let b = scaled.iter().map(|&(r, s)| -s * theta[r]).collect();
                dense_solve(a, b).map(|x| x[0].to_f64_lossy())
            }
            Pivot::Deleted => None,
        };

        let a = rows.iter().map(|&r| self.eta[..nu].iter().map(|c| c[r]).collect()).collect();
        let b = rows.iter().map(|&r| -(theta[r] + e * eta_rho[r])).collect();
        let zeta = dense_solve(a, b).ok_or_else(|| Error::Singular("model-space constraint system".into()))?;

        let xi: Vec<T> = (0..self.size)
            .map(|n| {
                zeta.iter()
                    .zip(&self.eta)
                    .fold(theta[n] + e * eta_rho[n], |s, (&u, col)| s + u * col[n])
            })
            .collect();
        let z = xi[n0];
        let mut h = vec![T::zero(); self.size];
        for (&c, &u) in self.unknowns.iter().zip(&zeta) {
            h[c] = u;
        }
        for j in 0..self.size - self.t {
            if j != n0 {
                h[j + self.t] = xi[j];
            }
        }
        h[n0 + self.t] = h[n0 + self.t] + z;
        h[self.norm] = T::zero();

        let pivot_row_residual = {
            let (lo, hi) = self.wide.row_range(n0);
            let s = (lo..hi.min(self.size)).fold(T::zero(), |s, j| s + self.wide.get(n0, j) * h[j]);
            (s - tau[n0] - e * self.rho[n0]).abs().to_f64_lossy()
        };
        Ok(TriangularOrder {
            h: lossy(&h),
            theta: lossy(&theta),
            zeta: lossy(&zeta),
            z: z.to_f64_lossy(),
            energy_from_constraints,
            pivot_row_residual,
        })
    }
}
