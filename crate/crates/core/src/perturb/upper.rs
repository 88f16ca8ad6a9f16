//! `t = 1`: the tridiagonal `M₀` with entries `cₙ = M[n][n−1]`,
//! `aₙ = M[n][n]`, `dₙ = M[n][n+1]`. Row `q+1` has `c = d = 0`, so it fixes
//! `h_{q+1}` on its own; rows above are solved upward, rows below by a
//! descending recurrence anchored at `h_M`.

use nalgebra::DMatrix;

use crate::banded::BandedMatrix;
use crate::error::{Error, Result};

/// Descending solution of rows `q+2..=M` written as `hₙ = μₙ + h_M·wₙ`.
#[derive(Debug, Clone)]
pub struct Tail {
    pub mu: Vec<f64>,
    pub weights: Vec<f64>,
}

fn pivot(m0: &BandedMatrix, row: usize, col: usize) -> Result<f64> {
    let v = m0.get(row, col);
    if v == 0.0 {
        return Err(Error::ZeroPivot { row });
    }
    Ok(v)
}

pub fn tail_columns(m0: &BandedMatrix, q: usize, tilde: &[f64]) -> Result<Tail> {
    let n = m0.size();
    let last = n - 1;
    let mut mu = vec![0.0; n + 1];
    let mut w = vec![0.0; n + 1];
    w[last] = 1.0;
    for r in (q + 2..=last).rev() {
        let c = pivot(m0, r, r - 1)?;
        let (a, d) = (m0.get(r, r), m0.get(r, r + 1));
        mu[r - 1] = (tilde[r] - a * mu[r] - d * mu[r + 1]) / c;
        w[r - 1] = (-a * w[r] - d * w[r + 1]) / c;
    }
    mu.truncate(n);
    w.truncate(n);
    Ok(Tail { mu, weights: w })
}

/// Order-`k` coefficients with `h_q = 0`, given `τ̃ = τ + E⁽ᵏ⁾ρ`.
pub fn solve_order_t1_upper(m0: &BandedMatrix, q: usize, tilde: &[f64]) -> Result<(Vec<f64>, Tail)> {
    let n = m0.size();
    if n < q + 4 {
        return Err(Error::SizeTooSmall { size: n, min: q + 3 });
    }
    if m0.lower_bw() != 1 || m0.upper_bw() != 1 {
        return Err(Error::InvalidParameter("upper-triangular path needs t = 1".into()));
    }
    let mut h = vec![0.0; n];
    h[q + 1] = tilde[q + 1] / pivot(m0, q + 1, q + 1)?;
    for r in (1..=q).rev() {
        let c = pivot(m0, r, r - 1)?;
        h[r - 1] = (tilde[r] - m0.get(r, r) * h[r] - m0.get(r, r + 1) * h[r + 1]) / c;
    }
    let tail = tail_columns(m0, q, tilde)?;
    let wq = tail.weights[q + 1];
    if wq == 0.0 {
        return Err(Error::Singular("terminal weight vanishes at q+1".into()));
    }
    let hm = (h[q + 1] - tail.mu[q + 1]) / wq;
    for r in q + 2..n {
        h[r] = tail.mu[r] + hm * tail.weights[r];
    }
    Ok((h, tail))
}

/// `μ_{M−m−1}` by Cramer's rule on rows `M−m..=M` with `h_M = 0`: the
/// coefficient matrix is triangular with diagonal `c_{M−m}..c_M`, and the
/// numerator is the determinant with its first column replaced by `τ̃`.
pub fn mu_closed_form(m: usize, m0: &BandedMatrix, tilde: &[f64]) -> f64 {
    let last = m0.size() - 1;
    let first = last - m;
    let dim = m + 1;
    let mut f = DMatrix::<f64>::zeros(dim, dim);
    let mut den = 1.0;
    for i in 0..dim {
        let r = first + i;
        f[(i, 0)] = tilde[r];
        for j in 1..dim {
            let col = first - 1 + j;
            f[(i, j)] = m0.get(r, col);
        }
        den *= m0.get(r, r - 1);
    }
    f.determinant() / den
}
