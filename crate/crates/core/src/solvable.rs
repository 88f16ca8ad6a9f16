//! Partially solvable states: terminating coefficient vectors
//! `h₀..h_q, 0, 0, …` at the quasi-harmonic energy `E = ε_{q+t}`.
//!
//! With `h_q = 1` the unknowns are `h₀..h_{q−1}` plus `t` couplings, fixed by
//! rows `0..q+t−1` of `M(E)h = 0`. Row `q+t` and everything below it vanish
//! identically once the pivot `M[q+t][q+2t]` hits zero.

use nalgebra::{Complex, DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banded::{assemble, build_quasi_hamiltonian, BandedMatrix};
use crate::basis::{self, check_ell, BasisParams};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::potential::PadePotential;
use crate::precision::{Extended, Real};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub t: usize,
    pub q: usize,
    pub ell: i32,
    pub potential: PadePotential,
    /// `h₀..h_q` with `h_q = 1`.
    pub h0: Vec<f64>,
    pub e0: f64,
    /// Max row residual of `M(E⁽⁰⁾)h⁽⁰⁾` over rows `0..q+t`.
    pub residual: f64,
    /// 0 for the ground state of its `(t, q, ℓ)` family (largest coupling).
    pub excitation: Option<usize>,
    /// Starting vector that produced this solution, when found by Newton.
    pub seed: Option<Vec<f64>>,
}

impl ExactSolution {
    /// `h⁽⁰⁾` zero-padded to `size`.
    pub fn padded_h(&self, size: usize) -> Vec<f64> {
        let mut h = vec![0.0; size];
        h[..self.h0.len()].copy_from_slice(&self.h0);
        h
    }

    /// Max `|M(E⁽⁰⁾)h⁽⁰⁾|` over every row of a `size`-state truncation.
    pub fn residual_in(&self, size: usize) -> Result<f64> {
        let qh = build_quasi_hamiltonian(&self.potential, &BasisParams::new(self.ell)?, size)?;
        let r = qh.at(self.e0).matvec(&self.padded_h(size));
        Ok(r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// Terminating state of degree `q` supported by a given potential, if any.
    /// `h₀..h_{q−1}` are fitted to rows `0..q+t−1` by least squares and the
    /// result is accepted when every row vanishes to `tol·(1 + max|coupling|)`.
    pub fn from_potential(p: &PadePotential, q: usize, tol: f64) -> Result<Self> {
        let t = p.t();
        let e0 = quasi_energy(t, q, p.ell)?;
        let size = q + 2 * t + 1;
        let m = build_quasi_hamiltonian(p, &BasisParams::new(p.ell)?, size)?.at(e0).to_dense();
        let rows = q + t;
        let mut h0 = vec![0.0; q + 1];
        h0[q] = 1.0;
        if q > 0 {
            let a = DMatrix::from_fn(rows, q, |r, c| m[(r, c)]);
            let b = DVector::from_fn(rows, |r, _| -m[(r, q)]);
            let x = a
                .svd(true, true)
                .solve(&b, 1e-14)
                .map_err(|e| Error::Singular(e.to_string()))?;
            h0[..q].copy_from_slice(x.as_slice());
        }
        let mut s = ExactSolution {
            t,
            q,
            ell: p.ell,
            potential: p.clone(),
            h0,
            e0,
            residual: 0.0,
            excitation: None,
            seed: None,
        };
        s.residual = s.residual_in(size)?;
        let scale = p.a.iter().fold(p.beta.abs(), |m, v| m.max((p.beta * v).abs()));
        if s.residual > tol * (1.0 + scale) {
            return Err(Error::NoSolution(format!(
                "potential has no terminating state with q = {q} (residual {:.3e})",
                s.residual
            )));
        }
        Ok(s)
    }

    /// Label used in tables: "ground state", "first excitation", ...
    pub fn excitation_label(&self) -> String {
        match self.excitation {
            Some(k) => excitation_name(k),
            None => "-".into(),
        }
    }
}

pub fn excitation_name(k: usize) -> String {
    const NAMES: [&str; 6] = ["ground state", "first", "second", "third", "fourth", "fifth"];
    match k {
        0 => NAMES[0].into(),
        1..=5 => format!("{} excitation", NAMES[k]),
        _ => format!("excitation {k}"),
    }
}

/// `E⁽⁰⁾ = 4t + 4q + 2ℓ + 3`.
pub fn quasi_energy(t: usize, q: usize, ell: i32) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be at least 1".into()));
    }
    check_ell(ell)?;
    Ok(basis::eps_unchecked(q + t, ell))
}

/// Determinant of the leading `(q+1)×(q+1)` block of `M(ε_{q+1})` for
/// `V = x² + β/(1 + B·x²)`, evaluated by the three-term recurrence.
/// Returns `(P, dP/dβ)`.
fn secular_value<T: Real>(q: usize, ell: i32, b1: T, beta: T) -> (T, T) {
    let e = T::of(basis::eps_unchecked(q + 1, ell));
    let lam = |n: usize| T::of(basis::eps_unchecked(n, ell)) - e;
    let (mut p2, mut dp2) = (T::one(), T::zero());
    let a0 = beta + (T::one() + b1 * basis::alpha::<T>(0, ell)) * lam(0);
    let (mut p1, mut dp1) = (a0, T::one());
    for n in 1..=q {
        let a = beta + (T::one() + b1 * basis::alpha::<T>(n, ell)) * lam(n);
        let bo = b1 * basis::beta_off::<T>(n - 1, ell);
        let cd = bo * lam(n) * bo * lam(n - 1);
        let p = a * p1 - cd * p2;
        let dp = p1 + a * dp1 - cd * dp2;
        p2 = p1;
        dp2 = dp1;
        p1 = p;
        dp1 = dp;
    }
    (p1, dp1)
}

/// Secular polynomial in `y = β` whose roots are the solvable couplings.
pub fn secular_polynomial_t1(q: usize, ell: i32, b1: f64) -> Result<Poly> {
    check_ell(ell)?;
    let e = basis::eps_unchecked(q + 1, ell);
    let lam = |n: usize| basis::eps_unchecked(n, ell) - e;
    let mut p2 = Poly::constant(1.0);
    let mut p1 = Poly::linear((1.0 + b1 * basis::alpha::<f64>(0, ell)) * lam(0), 1.0);
    for n in 1..=q {
        let a = Poly::linear((1.0 + b1 * basis::alpha::<f64>(n, ell)) * lam(n), 1.0);
        let bo = b1 * basis::beta_off::<f64>(n - 1, ell);
        let cd = bo * bo * lam(n) * lam(n - 1);
        let p = a.mul(&p1).sub(&p2.scale(cd));
        p2 = p1;
        p1 = p;
    }
    Ok(p1)
}

/// Roots of the secular polynomial: real ones as solutions, complex ones reported.
#[derive(Debug, Clone)]
pub struct T1Solutions {
    pub solutions: Vec<ExactSolution>,
    pub complex_roots: Vec<Complex<f64>>,
}

/// All solvable couplings of `x² + β/(1 + B·x²)` at fixed `q`, ascending in β.
pub fn solve_t1(q: usize, ell: i32, b1: f64) -> Result<T1Solutions> {
    if b1 <= 0.0 {
        return Err(Error::InvalidParameter(format!("denominator coefficient {b1} must be positive")));
    }
    let poly = secular_polynomial_t1(q, ell, b1)?;
    let roots = poly.roots();
    let complex_roots: Vec<Complex<f64>> = roots
        .iter()
        .filter(|z| z.im.abs() > 1e-8 * (1.0 + z.norm()))
        .copied()
        .collect();
    let mut betas: Vec<f64> = roots
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.norm()))
        .map(|z| {
            let mut x = Extended::of(z.re);
            let bx = Extended::of(b1);
            for _ in 0..8 {
                let (p, dp) = secular_value(q, ell, bx, x);
                let step = p / dp;
                x -= step;
                if step.abs() <= Extended::of(1e-30) * x.abs() {
                    break;
                }
            }
            x.hi()
        })
        .collect();
    betas.sort_by(f64::total_cmp);
    let count = betas.len();
    let e0 = quasi_energy(1, q, ell)?;
    let mut solutions = Vec::with_capacity(count);
    for (i, &beta) in betas.iter().enumerate() {
        let potential = PadePotential::new(1, beta, vec![1.0], vec![1.0, b1], ell)?;
        let h0 = t1_coefficients(q, ell, b1, beta);
        let mut s = ExactSolution {
            t: 1,
            q,
            ell,
            potential,
            h0,
            e0,
            residual: 0.0,
            excitation: Some(count - 1 - i),
            seed: None,
        };
        s.residual = s.residual_in(q + 3)?;
        solutions.push(s);
    }
    Ok(T1Solutions { solutions, complex_roots })
}

/// Back substitution from `h_q = 1`, `h_{q+1} = 0` through rows `q..1`.
fn t1_coefficients(q: usize, ell: i32, b1: f64, beta: f64) -> Vec<f64> {
    let e = basis::eps_unchecked(q + 1, ell);
    let lam = |n: usize| basis::eps_unchecked(n, ell) - e;
    let mut h = vec![0.0; q + 2];
    h[q] = 1.0;
    for n in (1..=q).rev() {
        let a = beta + (1.0 + b1 * basis::alpha::<f64>(n, ell)) * lam(n);
        let d = b1 * basis::beta_off::<f64>(n, ell) * lam(n);
        let c = b1 * basis::beta_off::<f64>(n - 1, ell) * lam(n);
        h[n - 1] = -(a * h[n] + d * h[n + 1]) / c;
    }
    h.truncate(q + 1);
    h
}

/// Solvability problem with the denominator and `β` frozen and the `t`
/// numerator coefficients `A₀..A_{t−1}` free.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralProblem {
    pub t: usize,
    pub q: usize,
    pub ell: i32,
    pub beta: f64,
    pub b: Vec<f64>,
}

impl GeneralProblem {
    pub fn new(q: usize, ell: i32, beta: f64, b: Vec<f64>) -> Result<Self> {
        check_ell(ell)?;
        let t = b.len().saturating_sub(1);
        if t == 0 || b[0] != 1.0 {
            return Err(Error::InvalidParameter("denominator must have degree >= 1 and B0 = 1".into()));
        }
        if !crate::potential::denominator_positive(&b) {
            return Err(Error::InvalidParameter("frozen denominator is not positive".into()));
        }
        Ok(GeneralProblem { t, q, ell, beta, b })
    }

    /// `V = x² + (μx² + ν)/((1 − g x²)² + f x²)`, unknowns `A = [ν, μ]`.
    pub fn two_parameter(q: usize, ell: i32, f: f64, g: f64) -> Result<Self> {
        GeneralProblem::new(q, ell, 1.0, vec![1.0, f - 2.0 * g, g * g])
    }

    /// `V = x² + (w x⁴ + v x² + u)/(1 + x⁶)`, unknowns `A = [u, v, w]`.
    pub fn quartic_over_sextic(q: usize, ell: i32) -> Result<Self> {
        GeneralProblem::new(q, ell, 1.0, vec![1.0, 0.0, 0.0, 1.0])
    }

    pub fn e0(&self) -> f64 {
        basis::eps_unchecked(self.q + self.t, self.ell)
    }

    pub fn unknowns(&self) -> usize {
        self.q + self.t
    }

    fn bands<T: Real>(&self) -> Vec<BandedMatrix<T>> {
        basis::power_bands::<T>(self.t, self.ell, self.q + self.t + 1)
    }

    fn split<'a, T: Real>(&self, x: &'a [T]) -> (Vec<T>, &'a [T]) {
        let mut h = x[..self.q].to_vec();
        h.push(T::one());
        (h, &x[self.q..])
    }

    /// Rows `0..q+t−1` of `M(E⁽⁰⁾)h` for unknowns `x = (h₀..h_{q−1}, A₀..A_{t−1})`.
    fn residual<T: Real>(&self, x: &[T], bands: &[BandedMatrix<T>]) -> Vec<T> {
        let (h, a) = self.split(x);
        let b: Vec<T> = self.b.iter().map(|&v| T::of(v)).collect();
        let qh = assemble(T::of(self.beta), a, &b, self.ell, bands);
        let mut hp = h.clone();
        hp.resize(qh.size(), T::zero());
        let r = qh.at(T::of(self.e0())).matvec(&hp);
        r[..self.unknowns()].to_vec()
    }

    fn jacobian(&self, x: &[f64], bands: &[BandedMatrix<f64>]) -> DMatrix<f64> {
        let n = self.unknowns();
        let (h, a) = self.split(x);
        let b = &self.b;
        let qh = assemble(self.beta, a, b, self.ell, bands);
        let m = qh.at(self.e0());
        let mut hp = h.clone();
        hp.resize(m.size(), 0.0);
        DMatrix::from_fn(n, n, |r, c| {
            if c < self.q {
                m.get(r, c)
            } else {
                self.beta * bands[c - self.q].matvec(&hp)[r]
            }
        })
    }

    /// Couplings solving the last `t` equations for given `h₀..h_{q−1}`.
    fn couplings_for(&self, hs: &[f64], bands: &[BandedMatrix<f64>]) -> Option<Vec<f64>> {
        let mut x = hs.to_vec();
        x.extend(std::iter::repeat_n(0.0, self.t));
        let r0 = self.residual(&x, bands);
        let j = self.jacobian(&x, bands);
        let rows: Vec<usize> = (self.q..self.q + self.t).collect();
        let sub = DMatrix::from_fn(self.t, self.t, |r, c| j[(rows[r], self.q + c)]);
        let rhs = DVector::from_fn(self.t, |r, _| -r0[rows[r]]);
        sub.lu().solve(&rhs).map(|v| v.iter().copied().collect())
    }

    fn scale(x: &[f64]) -> f64 {
        1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Damped Newton from `x0`; `None` after 200 iterations without convergence.
    fn newton(&self, x0: &[f64], bands: &[BandedMatrix<f64>]) -> Option<Vec<f64>> {
        let norm = |v: &[f64]| v.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let mut x = x0.to_vec();
        let mut r = self.residual(&x, bands);
        for _ in 0..200 {
            let j = self.jacobian(&x, bands);
            let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -v));
            let dx = j.lu().solve(&rhs)?;
            let mut lambda = 1.0;
            let r_norm = norm(&r);
            loop {
                let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + lambda * d).collect();
                let rt = self.residual(&trial, bands);
                if norm(&rt) < r_norm || lambda < 1e-4 {
                    x = trial;
                    r = rt;
                    break;
                }
                lambda *= 0.5;
            }
            if !x.iter().all(|v| v.is_finite()) || Self::scale(&x) > 1e8 {
                return None;
            }
            let step = lambda * dx.amax();
            if norm(&r) <= 1e-12 * Self::scale(&x) && step <= 1e-10 * Self::scale(&x) {
                return Some(x);
            }
            if step <= 1e-15 * Self::scale(&x) {
                return (norm(&r) <= 1e-9 * Self::scale(&x)).then_some(x);
            }
        }
        None
    }

    /// Residual in double-double, correction from the double Jacobian.
    fn polish(&self, x: &[f64], bands: &[BandedMatrix<f64>]) -> Vec<f64> {
        let ebands = self.bands::<Extended>();
        let mut xe: Vec<Extended> = x.iter().map(|&v| Extended::of(v)).collect();
        for _ in 0..4 {
            let xf: Vec<f64> = xe.iter().map(|v| v.hi()).collect();
            let j = self.jacobian(&xf, bands);
            let r = self.residual(&xe, &ebands);
            let rhs = DVector::from_iterator(r.len(), r.iter().map(|v| -(v.hi() + v.lo())));
            let Some(dx) = j.lu().solve(&rhs) else { break };
            for (a, d) in xe.iter_mut().zip(dx.iter()) {
                *a += Extended::of(*d);
            }
        }
        xe.iter().map(|v| v.hi() + v.lo()).collect()
    }

    fn to_solution(&self, x: &[f64], seed: Option<Vec<f64>>) -> Result<ExactSolution> {
        let (h0, a) = self.split(x);
        let (beta, a) = if self.t == 1 {
            (self.beta * a[0], vec![1.0])
        } else {
            (self.beta, a.to_vec())
        };
        let potential = PadePotential::new(self.t, beta, a, self.b.clone(), self.ell)?;
        let mut s = ExactSolution {
            t: self.t,
            q: self.q,
            ell: self.ell,
            potential,
            h0,
            e0: self.e0(),
            residual: 0.0,
            excitation: None,
            seed,
        };
        s.residual = s.residual_in(self.q + 2 * self.t + 1)?;
        Ok(s)
    }

    /// Default seeds: a geometric lattice in `h₀..h_{q−1}` with the couplings
    /// completed from the last `t` equations.
    pub fn default_seeds(&self) -> Vec<Vec<f64>> {
        let mut levels = vec![0.0];
        for k in -2..=5 {
            let v = 2f64.powi(k);
            levels.push(v);
            levels.push(-v);
        }
        let levels: Vec<f64> = if self.q >= 3 {
            levels.into_iter().filter(|v| v.abs() <= 16.0 && (v.abs() >= 0.5 || *v == 0.0)).collect()
        } else {
            levels
        };
        let mut seeds: Vec<Vec<f64>> = vec![vec![]];
        for _ in 0..self.q {
            seeds = seeds
                .into_iter()
                .flat_map(|s| {
                    levels.iter().map(move |&l| {
                        let mut v = s.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
        }
        seeds
    }
}

#[derive(Debug, Clone)]
pub struct GeneralOutcome {
    pub solutions: Vec<ExactSolution>,
    pub failed_seeds: Vec<Vec<f64>>,
}

/// Multi-start damped Newton. Seeds may give only `h₀..h_{q−1}` (couplings
/// are then completed linearly) or the full unknown vector.
pub fn solve_general(problem: &GeneralProblem, seeds: Option<Vec<Vec<f64>>>) -> Result<GeneralOutcome> {
    let bands = problem.bands::<f64>();
    let seeds = seeds.unwrap_or_else(|| problem.default_seeds());
    let n = problem.unknowns();
    let results: Vec<(Vec<f64>, Option<Vec<f64>>)> = seeds
        .par_iter()
        .map(|seed| {
            let x0 = if seed.len() == n {
                Some(seed.clone())
            } else if seed.len() == problem.q {
                problem.couplings_for(seed, &bands).map(|a| {
                    let mut v = seed.clone();
                    v.extend(a);
                    v
                })
            } else {
                None
            };
            let x = x0.and_then(|x0| problem.newton(&x0, &bands));
            (seed.clone(), x)
        })
        .collect();
    let mut found: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut failed_seeds = Vec::new();
    for (seed, x) in results {
        match x {
            None => failed_seeds.push(seed),
            Some(x) => {
                let dup = found.iter().any(|(y, _)| {
                    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) <= 1e-6 * GeneralProblem::scale(y)
                });
                if !dup {
                    found.push((x, seed));
                }
            }
        }
    }
    let mut solutions = Vec::new();
    for (x, seed) in found {
        let x = problem.polish(&x, &bands);
        let s = problem.to_solution(&x, Some(seed))?;
        let cmax = s.potential.a.iter().chain(&s.h0).fold(s.potential.beta.abs(), |m, v| m.max(v.abs()));
        if s.residual <= 1e-9 * (1.0 + cmax) && s.potential.denominator_positive() {
            solutions.push(s);
        }
    }
    let key = |s: &ExactSolution| s.potential.beta * s.potential.a.last().copied().unwrap_or(1.0);
    solutions.sort_by(|a, b| key(a).total_cmp(&key(b)));
    let count = solutions.len();
    for (i, s) in solutions.iter_mut().enumerate() {
        s.excitation = Some(count - 1 - i);
    }
    Ok(GeneralOutcome { solutions, failed_seeds })
}

/// One more Newton pass from a converged solution; returns the largest move.
pub fn newton_drift(problem: &GeneralProblem, s: &ExactSolution) -> f64 {
    let bands = problem.bands::<f64>();
    let x = unknowns_of(problem, s);
    let y = problem.newton(&x, &bands).unwrap_or_else(|| vec![f64::INFINITY; x.len()]);
    x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn unknowns_of(problem: &GeneralProblem, s: &ExactSolution) -> Vec<f64> {
    let mut x = s.h0[..problem.q].to_vec();
    if problem.t == 1 {
        x.push(s.potential.beta / problem.beta);
    } else {
        x.extend(&s.potential.a);
    }
    x
}

/// Rational function `num/den` in `s = h₁`.
#[derive(Clone)]
struct Ratio {
    num: Poly,
    den: Poly,
}

/// Eliminates `μ`, `ν`, `h₀` from the `t = 2`, `q = 2` system in favour of
/// `s = h₁`; the remaining row is a sextic in `y = s/β₁` with `β₁ = ⟨1|x²|2⟩`.
struct T2Q2 {
    mu: Poly,
    h0: Ratio,
    nu_h0: Poly,
    nu_rest: Poly,
    final_poly: Poly,
    beta1: f64,
}

fn eliminate_t2_q2(ell: i32, f: f64, g: f64) -> Result<T2Q2> {
    let p = GeneralProblem::two_parameter(2, ell, f, g)?;
    let bands = basis::power_bands::<f64>(2, ell, 5);
    let b: Vec<f64> = p.b.clone();
    let qh = assemble(0.0, &[0.0, 0.0], &b, ell, &bands);
    let dm = qh.at(p.e0());
    let x = &bands[1];
    let s = Poly::linear(0.0, 1.0);
    let c = Poly::constant;
    // Row r of the D-part with h₂ = 1: dm[r][0] h₀ + dm[r][1] s + dm[r][2].
    let drow = |r: usize| (dm.get(r, 0), Poly::linear(dm.get(r, 2), dm.get(r, 1)));
    // Row 3: dm31 s + dm32 + μ x32 = 0.
    let (_, d3) = drow(3);
    let mu = d3.scale(-1.0 / x.get(3, 2));
    // Row 2: dm20 h₀ + d2(s) + ν + μ (x21 s + x22) = 0.
    let (d20, d2) = drow(2);
    let nu_h0 = c(-d20);
    let nu_rest = d2.add(&mu.mul(&Poly::linear(x.get(2, 2), x.get(2, 1)))).scale(-1.0);
    // Row 1: dm10 h₀ + d1(s) + ν s + μ (x10 h₀ + x11 s + x12) = 0, linear in h₀.
    let (d10, d1) = drow(1);
    let h0_coef = c(d10).add(&nu_h0.mul(&s)).add(&mu.scale(x.get(1, 0)));
    let h0_rest = d1.add(&nu_rest.mul(&s)).add(&mu.mul(&Poly::linear(x.get(1, 2), x.get(1, 1))));
    let h0 = Ratio {
        num: h0_rest.scale(-1.0),
        den: h0_coef,
    };
    // Row 0: dm00 h₀ + d0(s) + ν h₀ + μ (x00 h₀ + x01 s) = 0, times den².
    let (d00, d0) = drow(0);
    let (n, dn) = (&h0.num, &h0.den);
    let lin = c(d00).add(&nu_rest).add(&mu.scale(x.get(0, 0)));
    let cst = d0.add(&mu.mul(&Poly::linear(0.0, x.get(0, 1))));
    let final_s = nu_h0
        .mul(n)
        .mul(n)
        .add(&lin.mul(n).mul(dn))
        .add(&cst.mul(dn).mul(dn));
    let beta1 = basis::beta_off::<f64>(1, ell);
    let final_poly = Poly::new(
        final_s
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &v)| v * beta1.powi(k as i32))
            .collect(),
    );
    Ok(T2Q2 {
        mu,
        h0,
        nu_h0,
        nu_rest,
        final_poly,
        beta1,
    })
}

/// Scale to a primitive integer polynomial when a multiplier up to 10⁴
/// makes the monic form integral; otherwise return the monic form.
fn integer_normalize(p: &Poly) -> Poly {
    let m = p.monic();
    for l in 1..=10_000u32 {
        let l = l as f64;
        let ok = m.coeffs.iter().all(|&c| {
            let v = c * l;
            (v - v.round()).abs() <= 1e-7 * v.abs().max(1.0)
        });
        if ok {
            return Poly::new(m.coeffs.iter().map(|&c| (c * l).round()).collect());
        }
    }
    m
}

/// Sextic in `y = h₁/β₁` for the two-parameter `t = 2`, `q = 2` model.
pub fn reduce_t2_q2(ell: i32, f: f64, g: f64) -> Result<Poly> {
    Ok(integer_normalize(&eliminate_t2_q2(ell, f, g)?.final_poly))
}

/// Lifts a sextic root back to `(h₀, h₁, ν, μ)`.
pub fn lift_t2_q2_root(ell: i32, f: f64, g: f64, y: f64) -> Result<[f64; 4]> {
    let e = eliminate_t2_q2(ell, f, g)?;
    let s = y * e.beta1;
    let h0 = e.h0.num.eval(s) / e.h0.den.eval(s);
    let nu = e.nu_h0.eval(s) * h0 + e.nu_rest.eval(s);
    Ok([h0, s, nu, e.mu.eval(s)])
}
