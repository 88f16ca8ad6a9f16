//! Dense real polynomials in ascending-power storage.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::precision::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    /// The polynomial `c0 + c1·x`.
    pub fn linear(c0: f64, c1: f64) -> Self {
        Poly::new(vec![c0, c1])
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && *self.coeffs.last().unwrap() == 0.0 {
            self.coeffs.pop();
        }
        if self.coeffs.is_empty() {
            self.coeffs.push(0.0);
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Coefficient of `x^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn eval_in<T: Real>(&self, x: T) -> T {
        self.coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + T::of(c))
    }

    pub fn eval_complex(&self, z: Complex<f64>) -> Complex<f64> {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn monic(&self) -> Poly {
        self.scale(1.0 / self.leading())
    }

    /// All complex roots, as eigenvalues of the companion matrix.
    pub fn roots(&self) -> Vec<Complex<f64>> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut c = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            c[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            c[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        let mut roots: Vec<Complex<f64>> = c.complex_eigenvalues().iter().copied().collect();
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        roots
    }

    /// Real roots (imaginary part below `1e-8·(1+|z|)`), Newton-polished and sorted.
    pub fn real_roots(&self) -> Vec<f64> {
        let d = self.derivative();
        let mut out: Vec<f64> = self
            .roots()
            .into_iter()
            .filter(|z| z.im.abs() <= 1e-8 * (1.0 + z.norm()))
            .map(|z| {
                let mut x = z.re;
                for _ in 0..4 {
                    let dp = d.eval(x);
                    if dp == 0.0 {
                        break;
                    }
                    let step = self.eval(x) / dp;
                    x -= step;
                    if step.abs() <= 1e-16 * x.abs().max(1.0) {
                        break;
                    }
                }
                x
            })
            .collect();
        out.sort_by(f64::total_cmp);
        out
    }

    /// Newton polish of a simple real root in the given arithmetic.
    pub fn polish_root<T: Real>(&self, x0: f64, max_iter: usize) -> T {
        let d = self.derivative();
        let mut x = T::of(x0);
        for _ in 0..max_iter {
            let dp = d.eval_in(x);
            if dp == T::zero() {
                break;
            }
            let step = self.eval_in(x) / dp;
            x = x - step;
            if step.abs() <= T::epsilon() * x.abs().max(T::one()) {
                break;
            }
        }
        x
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 && self.coeffs.len() > 1 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
            let a = c.abs();
            let body = match (k, a == 1.0) {
                (0, _) => format!("{a}"),
                (1, true) => "y".to_string(),
                (1, false) => format!("{a}y"),
                (_, true) => format!("y^{k}"),
                (_, false) => format!("{a}y^{k}"),
            };
            write!(f, "{sign}{body}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_quadratic() {
        let p = Poly::new(vec![152.0, -26.0, 1.0]);
        let r = p.real_roots();
        assert!((r[0] - (13.0 - 17f64.sqrt())).abs() < 1e-12);
        assert!((r[1] - (13.0 + 17f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn complex_pair_is_not_real() {
        let p = Poly::new(vec![1.0, -1.0, 1.0]);
        assert!(p.real_roots().is_empty());
        assert_eq!(p.roots().len(), 2);
    }

    #[test]
    fn product_and_derivative() {
        let p = Poly::linear(1.0, 1.0).mul(&Poly::linear(-1.0, 1.0));
        assert_eq!(p.coeffs, vec![-1.0, 0.0, 1.0]);
        assert_eq!(p.derivative().coeffs, vec![0.0, 2.0]);
    }

    #[test]
    fn display_integer_form() {
        assert_eq!(Poly::new(vec![152.0, -26.0, 1.0]).to_string(), "y^2-26y+152");
        assert_eq!(Poly::new(vec![-6.0, 1.0]).to_string(), "y-6");
    }
}
