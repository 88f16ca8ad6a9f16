//! Point sets behind the coupling-energy figures of the `t = 1` model
//! `x² + β/(1 + x²)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::potential::PadePotential;
use crate::solvable::{solve_t1, ExactSolution};
use crate::tables::merged_spectrum;

pub const SWEEP_CUTOFF: usize = 60;
pub const FIT_MAX_Q: usize = 3;
pub const WIDE_MAX_Q: usize = 6;

/// A CSV destined for `name`.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureFile {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigureData {
    pub files: Vec<FigureFile>,
    pub notes: Vec<String>,
}

pub fn figure(which: u8) -> Result<FigureData> {
    match which {
        1 => figure1(&beta_grid(0.0, 100.0, 2.0), SWEEP_CUTOFF),
        4 => figure4(FIT_MAX_Q),
        5 => figure5(),
        6 => figure6(WIDE_MAX_Q),
        _ => Err(Error::Config(format!("no figure data for {which}; expected 1, 4, 5 or 6"))),
    }
}

pub fn beta_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|i| lo + step * i as f64).collect()
}

fn t1_potential(beta: f64) -> Result<PadePotential> {
    PadePotential::new(1, beta, vec![1.0], vec![1.0, 1.0], -1)
}

/// Lowest `count` merged-parity levels at each coupling.
pub fn sweep(betas: &[f64], m: usize, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    betas
        .par_iter()
        .map(|&b| Ok((b, merged_spectrum(&t1_potential(b)?, m, count)?)))
        .collect()
}

fn sweep_csv(rows: &[(f64, Vec<f64>)]) -> String {
    let mut s = String::from("beta,level,energy\n");
    for (b, levels) in rows {
        for (i, e) in levels.iter().enumerate() {
            let _ = writeln!(s, "{b},{i},{e}");
        }
    }
    s
}

/// Lowest four levels of both parities along a β grid.
pub fn figure1(betas: &[f64], m: usize) -> Result<FigureData> {
    let rows = sweep(betas, m, 4)?;
    Ok(FigureData {
        files: vec![FigureFile { name: "figure1.csv".into(), csv: sweep_csv(&rows) }],
        notes: vec![],
    })
}

/// Least-squares `β(E) = a + bE + cE²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// RMS of `(β_fit − β)/β`.
    pub rms_rel: f64,
    pub points: usize,
}

impl QuadraticFit {
    pub fn eval(&self, e: f64) -> f64 {
        self.a + e * (self.b + e * self.c)
    }
}

/// Fits `(E, β)` pairs; three distinct energies are the minimum.
pub fn fit_quadratic(points: &[(f64, f64)]) -> Result<QuadraticFit> {
    let mut es: Vec<f64> = points.iter().map(|p| p.0).collect();
    es.sort_by(f64::total_cmp);
    es.dedup();
    if es.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "quadratic fit needs at least 3 distinct energies, got {}",
            es.len()
        )));
    }
    let n = points.len();
    let x = DMatrix::from_fn(n, 3, |r, c| points[r].0.powi(c as i32));
    let y = DVector::from_iterator(n, points.iter().map(|p| p.1));
    let coef = x
        .svd(true, true)
        .solve(&y, 1e-12)
        .map_err(|e| Error::Singular(e.to_string()))?;
    let mut fit = QuadraticFit { a: coef[0], b: coef[1], c: coef[2], rms_rel: 0.0, points: n };
    let ss: f64 = points.iter().map(|&(e, b)| ((fit.eval(e) - b) / b).powi(2)).sum();
    fit.rms_rel = (ss / n as f64).sqrt();
    Ok(fit)
}

fn parity_name(ell: i32) -> &'static str {
    if ell == -1 {
        "even"
    } else {
        "odd"
    }
}

/// All `t = 1` solvable points with `q ≤ q_max`, both parities.
pub fn exact_points(q_max: usize) -> Result<Vec<ExactSolution>> {
    let mut out = vec![];
    for ell in [-1, 0] {
        for q in 0..=q_max {
            out.extend(solve_t1(q, ell, 1.0)?.solutions);
        }
    }
    Ok(out)
}

/// One quadratic per parity and excitation label, through the points with
/// `q ≤ q_max`. Families with fewer than three points are listed in `notes`.
pub fn figure4(q_max: usize) -> Result<FigureData> {
    let pts = exact_points(q_max)?;
    let mut csv = String::from("parity,excitation,a,b,c,rms_rel,points\n");
    let mut notes = vec![];
    for ell in [-1, 0] {
        for exc in 0..=q_max {
            let fam: Vec<(f64, f64)> = pts
                .iter()
                .filter(|s| s.ell == ell && s.excitation == Some(exc))
                .map(|s| (s.e0, s.potential.beta))
                .collect();
            let label = crate::solvable::excitation_name(exc);
            match fit_quadratic(&fam) {
                Ok(f) => {
                    let _ = writeln!(csv, "{},{label},{},{},{},{:e},{}", parity_name(ell), f.a, f.b, f.c, f.rms_rel, f.points);
                }
                Err(e) => notes.push(format!("{} {label}: {e}", parity_name(ell))),
            }
        }
    }
    Ok(FigureData {
        files: vec![FigureFile { name: "figure4.csv".into(), csv }],
        notes,
    })
}

/// A solvable point on a Gallas line. Line `r` joins, for growing `q`, the
/// point with the `r`-th smallest coupling (`r = q − excitation`).
#[derive(Debug, Clone, PartialEq)]
pub struct GallasPoint {
    pub parity: &'static str,
    pub line: usize,
    pub q: usize,
    pub beta: f64,
    pub energy: f64,
}

pub fn gallas_points(sols: &[ExactSolution]) -> Vec<GallasPoint> {
    let mut pts: Vec<GallasPoint> = sols
        .iter()
        .filter_map(|s| {
            Some(GallasPoint {
                parity: parity_name(s.ell),
                line: s.q - s.excitation?,
                q: s.q,
                beta: s.potential.beta,
                energy: s.e0,
            })
        })
        .collect();
    pts.sort_by(|a, b| (a.parity, a.line, a.q).cmp(&(b.parity, b.line, b.q)));
    pts
}

fn gallas_csv(pts: &[GallasPoint]) -> String {
    let mut s = String::from("parity,line,q,beta,energy\n");
    for p in pts {
        let _ = writeln!(s, "{},{},{},{},{}", p.parity, p.line, p.q, p.beta, p.energy);
    }
    s
}

/// The seven lowest barriers of the `q ≤ 3` list, their seven lowest
/// merged-parity levels, and the Gallas lines through them.
pub fn figure5() -> Result<FigureData> {
    let mut sols = exact_points(FIT_MAX_Q)?;
    sols.sort_by(|a, b| a.potential.beta.total_cmp(&b.potential.beta));
    sols.truncate(7);
    let betas: Vec<f64> = sols.iter().map(|s| s.potential.beta).collect();
    let rows = sweep(&betas, SWEEP_CUTOFF, 7)?;
    Ok(FigureData {
        files: vec![
            FigureFile { name: "figure5.csv".into(), csv: sweep_csv(&rows) },
            FigureFile { name: "figure5_lines.csv".into(), csv: gallas_csv(&gallas_points(&sols)) },
        ],
        notes: vec![],
    })
}

/// Every Gallas line through the solvable points with `q ≤ q_max`.
pub fn figure6(q_max: usize) -> Result<FigureData> {
    let sols = exact_points(q_max)?;
    Ok(FigureData {
        files: vec![FigureFile { name: "figure6.csv".into(), csv: gallas_csv(&gallas_points(&sols)) }],
        notes: vec![],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_quadratic_recovered() {
        let pts: Vec<(f64, f64)> = [1.0, 2.0, 4.0, 7.0].iter().map(|&e| (e, 3.0 - e + 0.5 * e * e)).collect();
        let f = fit_quadratic(&pts).unwrap();
        assert!((f.a - 3.0).abs() < 1e-10 && (f.b + 1.0).abs() < 1e-10 && (f.c - 0.5).abs() < 1e-10);
        assert!(f.rms_rel < 1e-12);
    }

    #[test]
    fn degenerate_fit_refused() {
        let e = fit_quadratic(&[(5.0, 6.0)]).unwrap_err();
        assert!(e.to_string().contains("at least 3"), "{e}");
        assert!(fit_quadratic(&[(5.0, 6.0), (5.0, 7.0), (9.0, 17.0)]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = beta_grid(0.0, 100.0, 2.0);
        assert_eq!(g.len(), 51);
        assert_eq!(*g.last().unwrap(), 100.0);
    }
}
