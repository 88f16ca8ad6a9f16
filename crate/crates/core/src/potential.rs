//! Padé-rational potentials `V(x) = x² + β·A(x²)/B(x²)`.
//!
//! `A(s) = Σ_{k<t} A_k s^k`, `B(s) = Σ_{d≤t} B_d s^d` with `B₀ = 1` after
//! construction.

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::basis::check_ell;
use crate::error::{Error, Result};
use crate::poly::Poly;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PadePotential {
    pub beta: f64,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub ell: i32,
}

impl PadePotential {
    /// Validated constructor. `B` is rescaled to `B₀ = 1`, the factor going
    /// into `β`; the denominator must stay positive on the real line.
    pub fn new(t: usize, beta: f64, a: Vec<f64>, b: Vec<f64>, ell: i32) -> Result<Self> {
        let p = Self::new_unchecked(t, beta, a, b, ell)?;
        if !p.denominator_positive() {
            return Err(Error::InvalidParameter(format!(
                "denominator {:?} vanishes for some real x",
                p.b
            )));
        }
        Ok(p)
    }

    /// Shape checks and `B₀` normalization only; positivity is not enforced.
    pub fn new_unchecked(t: usize, beta: f64, a: Vec<f64>, mut b: Vec<f64>, ell: i32) -> Result<Self> {
        check_ell(ell)?;
        if t == 0 {
            return Err(Error::InvalidParameter("degree t must be positive".into()));
        }
        if a.len() != t || b.len() != t + 1 {
            return Err(Error::InvalidParameter(format!(
                "need {t} numerator and {} denominator coefficients, got {} and {}",
                t + 1,
                a.len(),
                b.len()
            )));
        }
        if b[t] == 0.0 {
            return Err(Error::InvalidParameter("leading denominator coefficient is zero".into()));
        }
        if b[0] == 0.0 {
            return Err(Error::InvalidParameter("denominator vanishes at x = 0".into()));
        }
        let b0 = b[0];
        let mut beta = beta;
        if b0 != 1.0 {
            for v in &mut b {
                *v /= b0;
            }
            beta /= b0;
        }
        Ok(PadePotential { beta, a, b, ell })
    }

    /// Pure oscillator `x²`, represented with `t = 0`.
    pub fn harmonic(ell: i32) -> Result<Self> {
        check_ell(ell)?;
        Ok(PadePotential {
            beta: 0.0,
            a: vec![],
            b: vec![1.0],
            ell,
        })
    }

    pub fn t(&self) -> usize {
        self.b.len() - 1
    }

    pub fn numerator(&self) -> Poly {
        Poly::new(if self.a.is_empty() { vec![0.0] } else { self.a.clone() })
    }

    pub fn denominator(&self) -> Poly {
        Poly::new(self.b.clone())
    }

    /// `β·A(x²)/B(x²)`.
    pub fn rational(&self, x: f64) -> f64 {
        let s = x * x;
        self.beta * self.numerator().eval(s) / self.denominator().eval(s)
    }

    pub fn eval(&self, x: f64) -> f64 {
        x * x + self.rational(x)
    }

    pub fn denominator_positive(&self) -> bool {
        denominator_positive(&self.b)
    }

    /// Upper bound of `|β·A/B|` over the real line, from a coarse grid in
    /// `s = x²` and the large-`s` limit. Used to size energy windows.
    pub fn rational_bound(&self) -> f64 {
        let (na, nb) = (self.numerator(), self.denominator());
        let mut m: f64 = 0.0;
        for i in 0..=2000 {
            let s = 1e-3 * (i as f64).powi(2);
            m = m.max((self.beta * na.eval(s) / nb.eval(s)).abs());
        }
        m
    }
}

/// True iff `Σ B_d s^d > 0` for every `s ≥ 0`.
pub fn denominator_positive(b: &[f64]) -> bool {
    if b.is_empty() || b[0] <= 0.0 {
        return false;
    }
    Poly::new(b.to_vec()).roots().iter().all(|z| {
        let real = z.im.abs() <= 1e-8 * (1.0 + z.norm());
        !(real && z.re >= 0.0)
    })
}

/// Factor `(1 + e·s)^j` of the denominator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimpleTerm {
    pub e: f64,
    /// `σ_j` for powers `j = 1..=J`.
    pub sigma: Vec<f64>,
}

/// Factor `((1 − g·s)² + f·s)^k` of the denominator, numerators `μ_k s + ν_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticTerm {
    pub f: f64,
    pub g: f64,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

impl QuadraticTerm {
    fn factor(&self) -> Poly {
        Poly::new(vec![1.0, self.f - 2.0 * self.g, self.g * self.g])
    }
}

impl SimpleTerm {
    fn factor(&self) -> Poly {
        Poly::linear(1.0, self.e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFractionForm {
    pub simple: Vec<SimpleTerm>,
    pub quadratic: Vec<QuadraticTerm>,
}

impl PartialFractionForm {
    /// Value of the rational part at `s = x²`.
    pub fn eval_s(&self, s: f64) -> f64 {
        let mut v = 0.0;
        for term in &self.simple {
            let f = term.factor().eval(s);
            for (j, sg) in term.sigma.iter().enumerate() {
                v += sg / f.powi(j as i32 + 1);
            }
        }
        for term in &self.quadratic {
            let f = term.factor().eval(s);
            for (k, (mu, nu)) in term.mu.iter().zip(&term.nu).enumerate() {
                v += (mu * s + nu) / f.powi(k as i32 + 1);
            }
        }
        v
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_s(x * x)
    }
}

enum Factor {
    Real { e: f64, mult: usize },
    Pair { f: f64, g: f64, mult: usize },
}

impl Factor {
    fn poly(&self) -> Poly {
        match *self {
            Factor::Real { e, .. } => Poly::linear(1.0, e),
            Factor::Pair { f, g, .. } => Poly::new(vec![1.0, f - 2.0 * g, g * g]),
        }
    }
    fn mult(&self) -> usize {
        match *self {
            Factor::Real { mult, .. } | Factor::Pair { mult, .. } => mult,
        }
    }
}

/// Group companion-matrix roots into distinct roots with multiplicity.
fn cluster_roots(b: &Poly) -> Result<Vec<(Complex<f64>, usize)>> {
    let roots = b.roots();
    let mut used = vec![false; roots.len()];
    let mut out = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let mut members = vec![roots[i]];
        used[i] = true;
        for j in i + 1..roots.len() {
            if !used[j] && (roots[j] - roots[i]).norm() < 1e-6 * (1.0 + roots[i].norm()) {
                members.push(roots[j]);
                used[j] = true;
            }
        }
        let m = members.len();
        let mean = members.iter().sum::<Complex<f64>>() / m as f64;
        if m > 1 {
            // A genuine multiple root makes B and its first m−1 derivatives vanish together.
            let mut d = b.clone();
            let scale: f64 = b.coeffs.iter().enumerate().map(|(k, c)| c.abs() * mean.norm().powi(k as i32)).sum();
            let mut ok = true;
            for _ in 0..m {
                if d.eval_complex(mean).norm() > 1e-14 * scale {
                    ok = false;
                }
                d = d.derivative();
            }
            if !ok {
                let mut cluster: Vec<f64> = members.iter().map(|z| z.re).collect();
                cluster.sort_by(f64::total_cmp);
                return Err(Error::IllConditioned { cluster });
            }
        }
        out.push((mean, m));
    }
    Ok(out)
}

fn factorize(b: &Poly) -> Result<Vec<Factor>> {
    let mut factors = Vec::new();
    for (r, mult) in cluster_roots(b)? {
        if r.im.abs() <= 1e-8 * (1.0 + r.norm()) {
            factors.push(Factor::Real { e: -1.0 / r.re, mult });
        } else if r.im > 0.0 {
            let w = r.inv();
            let g = w.norm();
            factors.push(Factor::Pair {
                f: 2.0 * (g - w.re),
                g,
                mult: mult.min(b.degree() / 2),
            });
        }
    }
    Ok(factors)
}

/// Decompose `β·A(s)/B(s)` into simple and quadratic partial fractions.
pub fn to_partial_fractions(p: &PadePotential) -> Result<PartialFractionForm> {
    if !p.denominator_positive() {
        return Err(Error::InvalidParameter("denominator is not positive".into()));
    }
    let t = p.t();
    let b = p.denominator();
    let factors = factorize(&b)?;
    let total: usize = factors
        .iter()
        .map(|f| match f {
            Factor::Real { mult, .. } => *mult,
            Factor::Pair { mult, .. } => 2 * mult,
        })
        .sum();
    if total != t {
        return Err(Error::IllConditioned {
            cluster: b.roots().iter().map(|z| z.re).collect(),
        });
    }
    // Each unknown multiplies B / factor^j (times s for quadratic μ terms).
    let mut columns: Vec<Poly> = Vec::with_capacity(t);
    for (i, fac) in factors.iter().enumerate() {
        let mut others = Poly::constant(1.0);
        for (k, other) in factors.iter().enumerate() {
            if k != i {
                for _ in 0..other.mult() {
                    others = others.mul(&other.poly());
                }
            }
        }
        for j in 1..=fac.mult() {
            let mut base = others.clone();
            for _ in 0..fac.mult() - j {
                base = base.mul(&fac.poly());
            }
            match fac {
                Factor::Real { .. } => columns.push(base),
                Factor::Pair { .. } => {
                    columns.push(base.mul(&Poly::linear(0.0, 1.0)));
                    columns.push(base);
                }
            }
        }
    }
    // The factors have unit constant term, so B = ratio · Π factors.
    let mut prod = Poly::constant(1.0);
    for fac in &factors {
        for _ in 0..fac.mult() {
            prod = prod.mul(&fac.poly());
        }
    }
    let ratio = p.b[t] / prod.leading();
    let m = DMatrix::from_fn(t, t, |r, c| columns[c].coeff(r) * ratio);
    let rhs = DVector::from_fn(t, |r, _| p.beta * p.a[r]);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Singular("partial-fraction system".into()))?;
    let mut simple = Vec::new();
    let mut quadratic = Vec::new();
    let mut idx = 0;
    for fac in &factors {
        match *fac {
            Factor::Real { e, mult } => {
                let mut sigma = vec![0.0; mult];
                for j in 0..mult {
                    sigma[j] = sol[idx];
                    idx += 1;
                }
                simple.push(SimpleTerm { e, sigma });
            }
            Factor::Pair { f, g, mult } => {
                let (mut mu, mut nu) = (vec![0.0; mult], vec![0.0; mult]);
                for j in 0..mult {
                    mu[j] = sol[idx];
                    nu[j] = sol[idx + 1];
                    idx += 2;
                }
                quadratic.push(QuadraticTerm { f, g, mu, nu });
            }
        }
    }
    Ok(PartialFractionForm { simple, quadratic })
}

/// Coefficient given as a constant or a polynomial in λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefSpec {
    Num(f64),
    Poly {
        coeffs: Vec<f64>,
    },
}

impl CoefSpec {
    pub fn to_poly(&self) -> Poly {
        match self {
            CoefSpec::Num(c) => Poly::constant(*c),
            CoefSpec::Poly { coeffs } => Poly::new(coeffs.clone()),
        }
    }
}

/// JSON form `{ "t", "ell", "beta", "A", "B" }`, optional `lambda_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub t: usize,
    pub ell: i32,
    pub beta: CoefSpec,
    #[serde(rename = "A")]
    pub a: Vec<CoefSpec>,
    #[serde(rename = "B")]
    pub b: Vec<CoefSpec>,
    #[serde(default)]
    pub lambda_range: Option<(f64, f64)>,
}

/// Couplings as polynomials in λ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingPath {
    pub beta: Poly,
    pub a: Vec<Poly>,
    pub b: Vec<Poly>,
    pub ell: i32,
    pub lambda_range: (f64, f64),
}

impl CouplingPath {
    /// Requires `B₀(λ) ≡ 1`, so that `H(λ)` and `D(λ)` stay polynomial, and a
    /// positive denominator on a 101-point grid across the range.
    pub fn new(beta: Poly, a: Vec<Poly>, b: Vec<Poly>, ell: i32, lambda_range: (f64, f64)) -> Result<Self> {
        check_ell(ell)?;
        let t = b.len().saturating_sub(1);
        if t == 0 || a.len() != t {
            return Err(Error::InvalidParameter("path needs t numerator and t+1 denominator polynomials".into()));
        }
        if b[0] != Poly::constant(1.0) {
            return Err(Error::InvalidParameter("path denominator must have B0 = 1 identically".into()));
        }
        if !(lambda_range.0 <= 0.0 && 0.0 <= lambda_range.1) {
            return Err(Error::InvalidParameter("lambda range must contain 0".into()));
        }
        let path = CouplingPath { beta, a, b, ell, lambda_range };
        let (lo, hi) = lambda_range;
        for i in 0..=100 {
            let lam = lo + (hi - lo) * i as f64 / 100.0;
            path.eval_at(lam)?;
        }
        Ok(path)
    }

    /// `β⁽⁰⁾ + λ` with numerator and denominator held fixed.
    pub fn beta_shift(base: &PadePotential, lambda_range: (f64, f64)) -> Result<Self> {
        CouplingPath::new(
            Poly::linear(base.beta, 1.0),
            base.a.iter().map(|&c| Poly::constant(c)).collect(),
            base.b.iter().map(|&c| Poly::constant(c)).collect(),
            base.ell,
            lambda_range,
        )
    }

    /// Straight line from `from` (λ = 0) to `to` (λ = 1) in the numerator;
    /// both potentials must share β and the denominator.
    pub fn interpolation(from: &PadePotential, to: &PadePotential) -> Result<Self> {
        if from.b != to.b || from.beta != to.beta || from.ell != to.ell {
            return Err(Error::InvalidParameter("interpolated potentials must share beta, B and ell".into()));
        }
        CouplingPath::new(
            Poly::constant(from.beta),
            from.a.iter().zip(&to.a).map(|(&x, &y)| Poly::linear(x, y - x)).collect(),
            from.b.iter().map(|&c| Poly::constant(c)).collect(),
            from.ell,
            (0.0, 1.0),
        )
    }

    pub fn from_spec(spec: &PotentialSpec) -> Result<Self> {
        if spec.a.len() != spec.t || spec.b.len() != spec.t + 1 {
            return Err(Error::Config(format!("t = {} needs {} A and {} B entries", spec.t, spec.t, spec.t + 1)));
        }
        CouplingPath::new(
            spec.beta.to_poly(),
            spec.a.iter().map(CoefSpec::to_poly).collect(),
            spec.b.iter().map(CoefSpec::to_poly).collect(),
            spec.ell,
            spec.lambda_range.unwrap_or((0.0, 1.0)),
        )
    }

    pub fn t(&self) -> usize {
        self.b.len() - 1
    }

    /// Highest λ power appearing in `H(λ)` or `D(λ)`.
    pub fn degree(&self) -> usize {
        let ba = self.a.iter().map(|a| self.beta.mul(a).degree()).max().unwrap_or(0);
        let bd = self.b.iter().map(Poly::degree).max().unwrap_or(0);
        ba.max(bd)
    }

    fn eval_at(&self, lambda: f64) -> Result<PadePotential> {
        PadePotential::new(
            self.t(),
            self.beta.eval(lambda),
            self.a.iter().map(|p| p.eval(lambda)).collect(),
            self.b.iter().map(|p| p.eval(lambda)).collect(),
            self.ell,
        )
    }

    pub fn base(&self) -> PadePotential {
        self.eval_at(0.0).expect("validated at construction")
    }
}

pub fn path_eval(c: &CouplingPath, lambda: f64) -> Result<PadePotential> {
    let (min, max) = c.lambda_range;
    if !(min..=max).contains(&lambda) {
        return Err(Error::OutOfRange { lambda, min, max });
    }
    c.eval_at(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t1(beta: f64, b1: f64) -> PadePotential {
        PadePotential::new(1, beta, vec![1.0], vec![1.0, b1], -1).unwrap()
    }

    #[test]
    fn eval_at_origin_and_tail() {
        assert_eq!(t1(6.0, 1.0).eval(0.0), 6.0);
        let v = t1(6.0, 1.0).eval(10.0) - 100.0;
        assert!((v - 6.0 / 101.0).abs() < 1e-12);
        let p = PadePotential::new(2, 1.0, vec![2.0, 16.0], vec![1.0, -1.0, 1.0], 0).unwrap();
        assert_eq!(p.eval(0.0), 2.0);
    }

    #[test]
    fn positivity() {
        assert!(denominator_positive(&[1.0, -1.0, 1.0]));
        assert!(!denominator_positive(&[1.0, -1.0]));
        assert!(denominator_positive(&[1.0, 0.0, 0.0, 1.0]));
        assert!(!denominator_positive(&[1.0, -2.0, 1.0]));
    }

    #[test]
    fn normalization_folds_into_beta() {
        let p = PadePotential::new(1, 6.0, vec![1.0], vec![2.0, 2.0], -1).unwrap();
        assert_eq!(p.b, vec![1.0, 1.0]);
        assert_eq!(p.beta, 3.0);
    }

    #[test]
    fn quadratic_factor_of_imple_form() {
        let p = PadePotential::new(2, 1.0, vec![2.0, 16.0], vec![1.0, -1.0, 1.0], 0).unwrap();
        let pf = to_partial_fractions(&p).unwrap();
        assert!(pf.simple.is_empty());
        let q = &pf.quadratic[0];
        assert!((q.f - 1.0).abs() < 1e-12 && (q.g - 1.0).abs() < 1e-12);
        assert!((q.mu[0] - 16.0).abs() < 1e-10 && (q.nu[0] - 2.0).abs() < 1e-10);
    }

    #[test]
    fn one_term_case() {
        let pf = to_partial_fractions(&t1(6.0, 2.0)).unwrap();
        assert_eq!(pf.simple.len(), 1);
        assert!((pf.simple[0].e - 2.0).abs() < 1e-12);
        assert!((pf.simple[0].sigma[0] - 6.0).abs() < 1e-12);
    }

    #[test]
    fn double_root_and_near_degenerate() {
        let p = PadePotential::new(2, 1.0, vec![1.0, 3.0], vec![1.0, 2.0, 1.0], -1).unwrap();
        let pf = to_partial_fractions(&p).unwrap();
        assert_eq!(pf.simple[0].sigma.len(), 2);
        for i in 0..50 {
            let x = 0.2 * i as f64;
            assert!((pf.eval(x) - p.rational(x)).abs() < 1e-10 * (1.0 + p.rational(x).abs()));
        }
        let e2 = 1.0 + 9e-7;
        let near = PadePotential::new(2, 1.0, vec![1.0, 3.0], vec![1.0, 1.0 + e2, e2], -1).unwrap();
        assert!(matches!(to_partial_fractions(&near), Err(Error::IllConditioned { .. })));
    }

    #[test]
    fn path_range_and_base() {
        let base = t1(6.0, 1.0);
        let c = CouplingPath::beta_shift(&base, (-1.0, 1.0)).unwrap();
        assert_eq!(path_eval(&c, 0.0).unwrap(), base);
        assert!(matches!(path_eval(&c, 2.0), Err(Error::OutOfRange { .. })));
        assert_eq!(path_eval(&c, 0.5).unwrap().beta, 6.5);
    }

    #[test]
    fn spec_json_roundtrip() {
        let s = r#"{"t":1,"ell":-1,"beta":{"coeffs":[6,1]},"A":[1],"B":[1,1]}"#;
        let spec: PotentialSpec = serde_json::from_str(s).unwrap();
        let c = CouplingPath::from_spec(&spec).unwrap();
        assert_eq!(c.beta.coeffs, vec![6.0, 1.0]);
        let bad = r#"{"t":1,"ell":-1,"beta":6,"A":[1],"B":[1,1],"omega":2}"#;
        assert!(serde_json::from_str::<PotentialSpec>(bad).is_err());
    }
}
