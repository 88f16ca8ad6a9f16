//! Reference spectra: roots of `det M(E)` on a truncated basis, and a
//! coordinate-space shooting solver used as an independent oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::banded::{build_quasi_hamiltonian, QuasiHamiltonian};
use crate::basis::{self, BasisParams};
use crate::error::{Error, Result};
use crate::potential::PadePotential;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub energies: Vec<f64>,
    pub cutoff: usize,
    /// `(M, energies at cutoff M)` for each intermediate cutoff.
    pub history: Vec<(usize, Vec<f64>)>,
    /// Fewer than the requested number of roots were found in range.
    pub partial: bool,
}

/// Sign and `ln|det|` of `M(E)`.
fn det(qh: &QuasiHamiltonian, e: f64) -> (f64, f64) {
    let lu = qh.at(e).lu();
    (lu.sign, lu.log_abs_det)
}

/// Root of `det M(E)` inside a sign-change bracket, to `tol` in `E`.
///
/// Regula falsi on `sign·exp(ln|det| − ref)` with the Illinois weight,
/// falling back to bisection whenever the secant point stalls.
fn refine(qh: &QuasiHamiltonian, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let (sa, la) = det(qh, a);
    let (sb, lb) = det(qh, b);
    if sa == 0.0 {
        return a;
    }
    if sb == 0.0 {
        return b;
    }
    let reference = la.max(lb);
    let val = |s: f64, l: f64| s * (l - reference).exp();
    let (mut fa, mut fb) = (val(sa, la), val(sb, lb));
    let mut side = 0i8;
    for it in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let mut c = if it % 3 == 2 || fa == fb {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let (sc, lc) = det(qh, c);
        if sc == 0.0 {
            return c;
        }
        let fc = val(sc, lc);
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `det M(E)` on a uniform grid, with local minima of
/// `|det|` rescanned at step `1e-4` to split close pairs.
fn scan(qh: &QuasiHamiltonian, lo: f64, hi: f64, step: f64) -> Vec<(f64, f64)> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals: Vec<(f64, f64)> = grid.par_iter().map(|&e| det(qh, e)).collect();
    let mut brackets = Vec::new();
    for i in 0..n {
        if vals[i].0 != vals[i + 1].0 {
            brackets.push((grid[i], grid[i + 1]));
        } else if step > 1e-3 && i > 0 && vals[i].1 < vals[i - 1].1 && vals[i].1 < vals[i + 1].1 && vals[i - 1].0 == vals[i].0 {
            brackets.extend(scan(qh, grid[i - 1], grid[i + 1], 1e-4));
        }
    }
    brackets.sort_by(|x, y| x.0.total_cmp(&y.0));
    brackets.dedup_by(|x, y| (x.0 - y.0).abs() < 1e-12 && (x.1 - y.1).abs() < 1e-12);
    brackets
}

/// Lowest real roots of `det M(E)`, at most `count`, scanning upward from
/// below the oscillator ground level. The window extends past `ε_M` by the
/// largest magnitude of the rational term, since truncated levels can sit
/// above the last basis level.
pub fn real_roots(qh: &QuasiHamiltonian, p: &PadePotential, ell: i32, count: usize) -> Vec<f64> {
    let m = qh.size() - 1;
    let bound = p.rational_bound();
    let min_v = if p.beta < 0.0 { -bound } else { -bound.min(0.0) };
    let lo = basis::eps_unchecked(0, ell) - 2.0 + min_v.min(0.0);
    let hi = basis::eps_unchecked(m, ell) + bound + 2.0;
    let mut roots = Vec::new();
    let chunk = 8.0;
    let mut a = lo;
    while a < hi && roots.len() < count {
        let b = (a + chunk).min(hi);
        for (x, y) in scan(qh, a, b, 0.5) {
            // A root on a grid point is bracketed from both sides.
            let r = refine(qh, x, y, 1e-10);
            if roots.iter().all(|&o: &f64| (o - r).abs() >= 1e-9 * (1.0 + r.abs())) {
                roots.push(r);
            }
            if roots.len() == count {
                break;
            }
        }
        a = b;
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// Lowest `count` roots of `det M(E)` on the `(M+1)`-state truncation.
pub fn matrix_spectrum(p: &PadePotential, ell: i32, m: usize, count: usize) -> Result<SpectrumResult> {
    let t = p.t();
    if m < count + 2 * t {
        return Err(Error::InvalidParameter(format!("cutoff {m} below count + 2t = {}", count + 2 * t)));
    }
    let qh = build_quasi_hamiltonian(p, &BasisParams::new(ell)?, m + 1)?;
    let energies = real_roots(&qh, p, ell, count);
    Ok(SpectrumResult {
        partial: energies.len() < count,
        history: vec![(m, energies.clone())],
        energies,
        cutoff: m,
    })
}

/// `matrix_spectrum` for every cutoff `M = 0..=m_max`; rows keep whatever
/// real roots the small truncations have.
pub fn convergence_table(p: &PadePotential, ell: i32, m_max: usize, count: usize) -> Result<SpectrumResult> {
    let basis = BasisParams::new(ell)?;
    let history: Vec<(usize, Vec<f64>)> = (0..=m_max)
        .into_par_iter()
        .map(|m| {
            let qh = build_quasi_hamiltonian_any(p, &basis, m + 1)?;
            Ok((m, real_roots(&qh, p, ell, count)))
        })
        .collect::<Result<_>>()?;
    let energies = history.last().map(|h| h.1.clone()).unwrap_or_default();
    Ok(SpectrumResult {
        partial: energies.len() < count,
        energies,
        cutoff: m_max,
        history,
    })
}

/// Quasi-Hamiltonian without the `size > 2t` guard, for tiny cutoffs.
fn build_quasi_hamiltonian_any(p: &PadePotential, basis: &BasisParams, size: usize) -> Result<QuasiHamiltonian> {
    let bands = basis::power_bands::<f64>(p.t(), basis.ell, size);
    Ok(crate::banded::assemble(p.beta, &p.a, &p.b, basis.ell, &bands))
}

/// Real eigenvalues of `D⁻¹H` (dense), a cross-check on the determinant scan.
pub fn generalized_spectrum(p: &PadePotential, ell: i32, m: usize) -> Result<Vec<f64>> {
    let qh = build_quasi_hamiltonian_any(p, &BasisParams::new(ell)?, m + 1)?;
    let d = qh.d.to_dense();
    let h = qh.h.to_dense();
    let dinv_h = d
        .lu()
        .solve(&h)
        .ok_or_else(|| Error::Singular("denominator matrix".into()))?;
    let mut ev: Vec<f64> = dinv_h
        .complex_eigenvalues()
        .iter()
        .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.norm()))
        .map(|z| z.re)
        .collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootOptions {
    pub x0: f64,
    pub x_max: f64,
    pub h: f64,
    pub tol: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            x0: 1e-6,
            x_max: 12.0,
            h: 1e-3,
            tol: 1e-9,
        }
    }
}

struct Shooter<'a> {
    p: &'a PadePotential,
    cent: f64,
    e: f64,
}

impl Shooter<'_> {
    fn q(&self, x: f64) -> f64 {
        let c = if self.cent == 0.0 { 0.0 } else { self.cent / (x * x) };
        c + self.p.eval(x) - self.e
    }

    /// Classic RK4 on `u″ = q(x)u` from `x_start` to `x_end` in `steps`
    /// steps; the state is rescaled by positive factors to stay finite.
    fn integrate(&self, mut u: f64, mut du: f64, x_start: f64, x_end: f64, steps: usize) -> (f64, f64) {
        let h = (x_end - x_start) / steps as f64;
        let mut x = x_start;
        for _ in 0..steps {
            let k1u = du;
            let k1v = self.q(x) * u;
            let k2u = du + 0.5 * h * k1v;
            let k2v = self.q(x + 0.5 * h) * (u + 0.5 * h * k1u);
            let k3u = du + 0.5 * h * k2v;
            let k3v = self.q(x + 0.5 * h) * (u + 0.5 * h * k2u);
            let k4u = du + h * k3v;
            let k4v = self.q(x + h) * (u + h * k3u);
            u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            du += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            x += h;
            let s = u.abs().max(du.abs());
            if s > 1e100 {
                u /= s;
                du /= s;
            }
        }
        (u, du)
    }
}

/// Outermost classical turning point of `ℓ(ℓ+1)/x² + V(x) = E`.
fn turning_point(p: &PadePotential, cent: f64, e: f64, x_lo: f64, x_hi: f64) -> f64 {
    let f = |x: f64| cent / (x * x) + p.eval(x) - e;
    let n = 4000;
    let mut last = None;
    for i in 0..n {
        let a = x_lo + (x_hi - x_lo) * i as f64 / n as f64;
        let b = x_lo + (x_hi - x_lo) * (i + 1) as f64 / n as f64;
        if f(a) <= 0.0 && f(b) > 0.0 {
            last = Some(b);
        }
    }
    last.unwrap_or(0.5 * (x_lo + x_hi))
}

/// Wronskian mismatch `u_out′·u_in − u_out·u_in′` at the matching point.
fn mismatch(p: &PadePotential, ell: i32, e: f64, xm: f64, opt: &ShootOptions) -> f64 {
    let cent = (ell * (ell + 1)) as f64;
    let s = Shooter { p, cent, e };
    let (x_start, u0, du0) = match ell {
        // No centrifugal term: start on the axis with exact data.
        -1 => (0.0, 1.0, 0.0),
        0 => (0.0, 0.0, 1.0),
        _ => {
            let x = opt.x0.max(10.0 * opt.h * ell as f64);
            let k = (ell + 1) as f64;
            (x, x.powf(k), k * x.powf(k - 1.0))
        }
    };
    let out_steps = ((xm - x_start) / opt.h).round().max(1.0) as usize;
    let in_steps = ((opt.x_max - xm) / opt.h).round().max(1.0) as usize;
    let (uo, duo) = s.integrate(u0, du0, x_start, xm, out_steps);
    let (ui, dui) = s.integrate(0.0, -1.0, opt.x_max, xm, in_steps);
    let (no, ni) = (uo.abs().max(duo.abs()), ui.abs().max(dui.abs()));
    (duo / no) * (ui / ni) - (uo / no) * (dui / ni)
}

/// Bound-state energy in `bracket`, which must hold exactly one sign change
/// of the mismatch (checked on 16 subintervals).
pub fn shoot_energy(p: &PadePotential, ell: i32, bracket: (f64, f64), opt: &ShootOptions) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Bracket(format!("empty bracket ({lo}, {hi})")));
    }
    let cent = (ell.max(0) * (ell + 1)) as f64;
    let xm = turning_point(p, cent, 0.5 * (lo + hi), opt.x0.max(1e-3), opt.x_max - 1.0);
    let xm = opt.x0 + ((xm - opt.x0) / opt.h).round() * opt.h;
    let f = |e: f64| mismatch(p, ell, e, xm, opt);
    let samples: Vec<f64> = (0..=16)
        .into_par_iter()
        .map(|i| f(lo + (hi - lo) * i as f64 / 16.0))
        .collect();
    let changes = samples.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    if changes != 1 {
        return Err(Error::Bracket(format!(
            "mismatch changes sign {changes} times in ({lo}, {hi})"
        )));
    }
    let k = samples.windows(2).position(|w| w[0].signum() != w[1].signum()).unwrap();
    let w = (hi - lo) / 16.0;
    lo += k as f64 * w;
    hi = lo + w;
    let mut flo = samples[k];
    while hi - lo > opt.tol {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Shooting refinement of each matrix level, bracketed at `±width`.
pub fn shoot_levels(p: &PadePotential, ell: i32, guesses: &[f64], width: f64, opt: &ShootOptions) -> Result<Vec<f64>> {
    guesses
        .iter()
        .map(|&g| shoot_energy(p, ell, (g - width, g + width), opt))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_rows_are_levels() {
        let p = PadePotential::harmonic(-1).unwrap();
        let r = convergence_table(&p, -1, 5, 4).unwrap();
        for (m, row) in &r.history {
            for (n, e) in row.iter().enumerate() {
                assert!((e - (4.0 * n as f64 + 1.0)).abs() < 1e-10, "M={m}");
            }
        }
    }

    #[test]
    fn exact_level_in_t1_model() {
        let p = PadePotential::new(1, 6.0, vec![1.0], vec![1.0, 1.0], -1).unwrap();
        let s = matrix_spectrum(&p, -1, 10, 3).unwrap();
        assert!(s.energies.iter().any(|e| (e - 5.0).abs() < 1e-10), "{:?}", s.energies);
    }

    #[test]
    fn shooting_exact_level() {
        let p = PadePotential::new(1, 6.0, vec![1.0], vec![1.0, 1.0], -1).unwrap();
        let e = shoot_energy(&p, -1, (4.5, 5.5), &ShootOptions::default()).unwrap();
        assert!((e - 5.0).abs() < 1e-8, "{e}");
    }

    #[test]
    fn bad_bracket_rejected() {
        let p = PadePotential::harmonic(-1).unwrap();
        assert!(shoot_energy(&p, -1, (1.5, 2.5), &ShootOptions::default()).is_err());
        assert!(shoot_energy(&p, -1, (0.5, 5.5), &ShootOptions::default()).is_err());
    }
}
