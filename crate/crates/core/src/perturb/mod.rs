//! Rayleigh–Schrödinger series `E(λ) = Σ λᵏE⁽ᵏ⁾`, `h(λ) = Σ λᵏh⁽ᵏ⁾` around
//! a partially solvable state, along a polynomial coupling path.
//!
//! Every order solves `M₀h⁽ᵏ⁾ = E⁽ᵏ⁾ρ + τ⁽ᵏ⁻¹⁾` with the singular
//! `M₀ = M(E⁽⁰⁾)`. The energy comes from the left null vector `ρ = D⁽⁰⁾h⁽⁰⁾`;
//! the coefficients come from a triangular propagator instead of a resolvent.

mod regularized;
mod tau;
mod upper;

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::banded::{build_quasi_hamiltonian, derivative_matrices, BandedMatrix, QuasiHamiltonian};
use crate::basis::BasisParams;
use crate::error::{Error, Result};
use crate::potential::{path_eval, CouplingPath};
use crate::precision::{Extended, Precision};
use crate::solvable::ExactSolution;

pub use regularized::{TriangularOrder, TriangularPropagator};
pub use tau::{compute_tau, energy_correction};
pub use upper::{mu_closed_form, solve_order_t1_upper, tail_columns, Tail};

pub const DEFAULT_CUTOFF: usize = 100;
pub const DEFAULT_REGULARIZER: f64 = 1e6;
pub const DEFAULT_TAIL_LIMIT: f64 = 1e-8;
const LEAKAGE_LIMIT: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Propagator {
    /// `t = 1` only: explicit `h_{q+1}`, upward back substitution and a
    /// descending tail recurrence.
    Upper,
    /// Lower-triangular propagator with the regularized pivot `D`.
    Regularized,
    /// Lower-triangular propagator with the singular row and column deleted.
    Direct,
}

/// Which coefficient is held at zero in every order `k ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    /// `h_q⁽ᵏ⁾ = 0`.
    #[default]
    Top,
    /// `h₀⁽ᵏ⁾ = 0`.
    Bottom,
}

impl Gauge {
    pub fn index(self, q: usize) -> usize {
        match self {
            Gauge::Top => q,
            Gauge::Bottom => 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbOptions {
    pub order: usize,
    pub cutoff: usize,
    pub d_reg: f64,
    pub gauge: Gauge,
    /// Defaults to `Upper` for `t = 1` and `Regularized` otherwise.
    pub propagator: Option<Propagator>,
    /// Arithmetic of the triangular propagators.
    pub precision: Precision,
    /// Largest `|h_M|/max|h|` accepted without a warning.
    pub tail_limit: f64,
}

impl Default for PerturbOptions {
    fn default() -> Self {
        PerturbOptions {
            order: 4,
            cutoff: DEFAULT_CUTOFF,
            d_reg: DEFAULT_REGULARIZER,
            gauge: Gauge::Top,
            propagator: None,
            precision: Precision::default(),
            tail_limit: DEFAULT_TAIL_LIMIT,
        }
    }
}

/// Everything computed for a single order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Order {
    pub k: usize,
    pub energy: f64,
    pub h: Vec<f64>,
    /// Realized `ξ_{n₀}` on the regularized path, 0 elsewhere.
    pub z: f64,
    /// `|h_M| / max|h|`.
    pub tail_norm: f64,
    /// Energy re-derived from the model-space constraints (regularized path).
    pub energy_check: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PerturbationSeries {
    pub base: ExactSolution,
    pub path: CouplingPath,
    pub cutoff: usize,
    pub d_reg: f64,
    pub gauge: Gauge,
    pub propagator: Propagator,
    pub orders: Vec<Order>,
    pub warnings: Vec<String>,
}

/// Matrices shared by all orders.
pub struct Setup {
    pub mats: Vec<QuasiHamiltonian>,
    /// `M₀` on `M+1` states.
    pub m0: BandedMatrix,
    /// `M₀` on `M+1+t` states, for the shifted triangular propagator.
    pub wide: BandedMatrix,
    pub rho: Vec<f64>,
    pub h0: Vec<f64>,
}

impl Setup {
    pub fn new(base: &ExactSolution, path: &CouplingPath, cutoff: usize, max_order: usize) -> Result<Self> {
        if path.t() != base.t || path.ell != base.ell {
            return Err(Error::InvalidParameter("path and solution differ in t or parity".into()));
        }
        let basis = BasisParams::new(base.ell)?;
        let size = cutoff + 1;
        let mats = derivative_matrices(path, &basis, size, max_order)?;
        let m0 = mats[0].at(base.e0);
        let wide = derivative_matrices(path, &basis, size + base.t, 0)?[0].at(base.e0);
        let h0 = base.padded_h(size);
        let r = m0.matvec(&h0);
        let res = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if res > 1e-8 * (1.0 + m0.max_abs()) {
            return Err(Error::InvalidParameter(format!("path does not start at the solvable point (residual {res:e})")));
        }
        let rho = mats[0].d.matvec(&h0);
        Ok(Setup { mats, m0, wide, rho, h0 })
    }
}

/// Per-order intermediate vectors; exposed for diagnostics and tests.
#[derive(Debug, Clone, Default)]
pub struct OrderWorkspace {
    pub tau: Vec<f64>,
    pub tau_tilde: Vec<f64>,
    pub theta: Vec<f64>,
    pub eta: Vec<Vec<f64>>,
    pub zeta: Vec<f64>,
    pub mu: Vec<f64>,
    pub terminal_weights: Vec<f64>,
}

fn default_propagator(t: usize) -> Propagator {
    if t == 1 {
        Propagator::Upper
    } else {
        Propagator::Regularized
    }
}

/// Runs orders `1..=opts.order` and returns the series with order 0 included.
pub fn run(base: &ExactSolution, path: &CouplingPath, opts: &PerturbOptions) -> Result<PerturbationSeries> {
    run_with_workspaces(base, path, opts).map(|(s, _)| s)
}

pub fn run_with_workspaces(
    base: &ExactSolution,
    path: &CouplingPath,
    opts: &PerturbOptions,
) -> Result<(PerturbationSeries, Vec<OrderWorkspace>)> {
    let t = base.t;
    let q = base.q;
    let propagator = opts.propagator.unwrap_or_else(|| default_propagator(t));
    let norm = opts.gauge.index(q);
    if propagator == Propagator::Upper && (t != 1 || opts.gauge != Gauge::Top) {
        return Err(Error::InvalidParameter("the upper-triangular path needs t = 1 and h_q = 0".into()));
    }
    if base.h0[norm] == 0.0 {
        return Err(Error::InvalidParameter(format!("h⁽⁰⁾ vanishes at the normalization index {norm}")));
    }
    let setup = Setup::new(base, path, opts.cutoff, opts.order)?;
    let size = opts.cutoff + 1;
    let mut warnings = vec![];

    let tri = match propagator {
        Propagator::Upper => None,
        _ => Some(Triangular::new(&setup, propagator, opts, t, q, norm, size)?),
    };
    if let Some(w) = tri.as_ref().and_then(|_| dominance_sign_warning(&setup.wide, t, q, size)) {
        warnings.push(w);
    }

    let mut energies = vec![base.e0];
    let mut hs = vec![setup.h0.clone()];
    let mut orders = vec![Order {
        k: 0,
        energy: base.e0,
        h: setup.h0.clone(),
        z: 0.0,
        tail_norm: tail_norm(&setup.h0),
        energy_check: None,
    }];
    let mut workspaces = vec![];
    for k in 1..=opts.order {
        let tau = compute_tau(k, &energies, &hs, &setup.mats);
        let e = energy_correction(&tau, &setup.rho)?;
        let tilde: Vec<f64> = tau.iter().zip(&setup.rho).map(|(t, r)| t + e * r).collect();
        let mut ws = OrderWorkspace { tau: tau.clone(), tau_tilde: tilde.clone(), ..Default::default() };
        let (h, z, check) = match &tri {
            None => {
                let (h, tail) = solve_order_t1_upper(&setup.m0, q, &tilde)?;
                ws.mu = tail.mu;
                ws.terminal_weights = tail.weights;
                (h, 0.0, None)
            }
            Some(p) => {
                let out = p.solve(&tau, e)?;
                ws.theta = out.theta;
                ws.eta = p.eta();
                ws.zeta = std::iter::once(e).chain(out.zeta).collect();
                (out.h, out.z, out.energy_from_constraints)
            }
        };
        let tn = tail_norm(&h);
        if tn > opts.tail_limit {
            warnings.push(format!(
                "order {k}: tail |h_M|/max|h| = {tn:.3e} exceeds {:e}; raise the cutoff",
                opts.tail_limit
            ));
        }
        if propagator == Propagator::Regularized && z.abs() * opts.d_reg > LEAKAGE_LIMIT {
            warnings.push(format!("order {k}: regularization leakage |z|·D = {:.3e}", z.abs() * opts.d_reg));
        }
        if let Some(c) = check {
            if (c - e).abs() > 1e-8 * (1.0 + e.abs()) {
                warnings.push(format!("order {k}: constraint energy {c} differs from {e}"));
            }
        }
        energies.push(e);
        hs.push(h.clone());
        orders.push(Order { k, energy: e, h, z, tail_norm: tn, energy_check: check });
        workspaces.push(ws);
    }
    Ok((
        PerturbationSeries {
            base: base.clone(),
            path: path.clone(),
            cutoff: opts.cutoff,
            d_reg: opts.d_reg,
            gauge: opts.gauge,
            propagator,
            orders,
            warnings,
        },
        workspaces,
    ))
}

enum Triangular {
    Double(TriangularPropagator<f64>),
    Extended(TriangularPropagator<Extended>),
}

impl Triangular {
    fn new(setup: &Setup, kind: Propagator, opts: &PerturbOptions, t: usize, q: usize, norm: usize, size: usize) -> Result<Self> {
        fn build<T: crate::precision::Real>(
            setup: &Setup,
            kind: Propagator,
            d: f64,
            t: usize,
            q: usize,
            norm: usize,
            size: usize,
        ) -> Result<TriangularPropagator<T>> {
            match kind {
                Propagator::Direct => TriangularPropagator::direct(&setup.wide, t, q, norm, size, &setup.rho),
                _ => TriangularPropagator::regularized(&setup.wide, t, q, norm, size, d, &setup.rho),
            }
        }
        Ok(match opts.precision {
            Precision::Double => Triangular::Double(build(setup, kind, opts.d_reg, t, q, norm, size)?),
            Precision::Extended => Triangular::Extended(build(setup, kind, opts.d_reg, t, q, norm, size)?),
        })
    }

    fn solve(&self, tau: &[f64], e: f64) -> Result<TriangularOrder> {
        match self {
            Triangular::Double(p) => p.solve(tau, e),
            Triangular::Extended(p) => p.solve(tau, e),
        }
    }

    fn eta(&self) -> Vec<Vec<f64>> {
        match self {
            Triangular::Double(p) => p.eta_f64(),
            Triangular::Extended(p) => p.eta_f64(),
        }
    }
}

fn tail_norm(h: &[f64]) -> f64 {
    let max = h.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        0.0
    } else {
        h[h.len() - 1].abs() / max
    }
}

/// The pivots `M₀[n][n+t]` away from `n₀` are only required to be nonzero;
/// report when they do not share one sign.
fn dominance_sign_warning(wide: &BandedMatrix, t: usize, q: usize, size: usize) -> Option<String> {
    let n0 = q + t;
    let (mut pos, mut neg) = (0, 0);
    for n in (0..size).filter(|&n| n != n0) {
        let v = wide.get(n, n + t);
        if v > 0.0 {
            pos += 1;
        } else if v < 0.0 {
            neg += 1;
        }
    }
    (pos > 0 && neg > 0).then(|| format!("propagator pivots change sign ({pos} positive, {neg} negative)"))
}

impl PerturbationSeries {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn energies(&self) -> Vec<f64> {
        self.orders.iter().map(|o| o.energy).collect()
    }

    pub fn z_diag(&self) -> Vec<f64> {
        self.orders.iter().skip(1).map(|o| o.z).collect()
    }

    pub fn normalization_index(&self) -> usize {
        self.gauge.index(self.base.q)
    }

    /// Rows `k,E_k,z_k,tail_norm`.
    pub fn orders_csv(&self) -> String {
        let mut s = String::from("k,E_k,z_k,tail_norm\n");
        for o in &self.orders {
            let _ = writeln!(s, "{},{},{:e},{:e}", o.k, o.energy, o.z, o.tail_norm);
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Same series with the other coefficient held at zero. The rescaling
    /// `h(λ) → h(λ)·h⁽⁰⁾ₚ/hₚ(λ)` leaves `E(λ)` unchanged.
    pub fn regauge(&self, gauge: Gauge) -> Result<PerturbationSeries> {
        let p = gauge.index(self.base.q);
        let h0p = self.orders[0].h[p];
        if h0p == 0.0 {
            return Err(Error::InvalidParameter(format!("h⁽⁰⁾ vanishes at index {p}")));
        }
        // n(λ) = hₚ(λ)/h⁽⁰⁾ₚ = 1 + …, s(λ) = 1/n(λ).
        let n: Vec<f64> = self.orders.iter().map(|o| o.h[p] / h0p).collect();
        let mut s = vec![0.0; n.len()];
        s[0] = 1.0;
        for k in 1..n.len() {
            s[k] = -(1..=k).map(|j| n[j] * s[k - j]).sum::<f64>();
        }
        let mut out = self.clone();
        for k in 0..n.len() {
            let mut h = vec![0.0; self.orders[k].h.len()];
            for j in 0..=k {
                for (x, y) in h.iter_mut().zip(&self.orders[k - j].h) {
                    *x += s[j] * y;
                }
            }
            if k > 0 {
                h[p] = 0.0;
            }
            out.orders[k].tail_norm = tail_norm(&h);
            out.orders[k].h = h;
        }
        out.gauge = gauge;
        Ok(out)
    }
}

/// Partial sums `Σ_{k≤K} λᵏE⁽ᵏ⁾` and `Σ_{k≤K} λᵏh⁽ᵏ⁾`.
pub fn sum_series(series: &PerturbationSeries, lambda: f64, k_use: usize) -> Result<(f64, Vec<f64>)> {
    if k_use > series.max_order() {
        return Err(Error::InvalidParameter(format!(
            "requested {k_use} orders, series has {}",
            series.max_order()
        )));
    }
    let mut e = 0.0;
    let mut h = vec![0.0; series.orders[0].h.len()];
    let mut w = 1.0;
    for o in &series.orders[..=k_use] {
        e += w * o.energy;
        for (x, y) in h.iter_mut().zip(&o.h) {
            *x += w * y;
        }
        w *= lambda;
    }
    Ok((e, h))
}

/// `‖[H(λ) − E_K D(λ)] h_K‖∞` for the `K`-th partial sums.
pub fn residual_at(series: &PerturbationSeries, lambda: f64, k_use: usize) -> Result<f64> {
    let (e, h) = sum_series(series, lambda, k_use)?;
    let p = path_eval(&series.path, lambda)?;
    let qh = build_quasi_hamiltonian(&p, &BasisParams::new(series.base.ell)?, h.len())?;
    let r = qh.at(e).matvec(&h);
    Ok(r.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvable::solve_t1;

    fn t1_ground() -> ExactSolution {
        solve_t1(0, -1, 1.0).unwrap().solutions.remove(0)
    }

    #[test]
    fn first_order_is_six_elevenths() {
        let s = t1_ground();
        let path = CouplingPath::beta_shift(&s.potential, (-1.0, 1.0)).unwrap();
        let series = run(&s, &path, &PerturbOptions { order: 1, ..Default::default() }).unwrap();
        assert!((series.orders[1].energy - 6.0 / 11.0).abs() < 1e-12);
        let want = 1.0 / (11.0 * 2f64.sqrt());
        assert!((series.orders[1].h[1] - want).abs() < 1e-12, "{}", series.orders[1].h[1]);
    }

    #[test]
    fn zero_order_series_is_the_base() {
        let s = t1_ground();
        let path = CouplingPath::beta_shift(&s.potential, (-1.0, 1.0)).unwrap();
        let series = run(&s, &path, &PerturbOptions { order: 0, ..Default::default() }).unwrap();
        assert_eq!(series.orders.len(), 1);
        let (e, h) = sum_series(&series, 0.3, 0).unwrap();
        assert_eq!(e, s.e0);
        assert_eq!(h[..s.h0.len()], s.h0[..]);
    }

    #[test]
    fn vanishing_tau_gives_zero_correction() {
        assert_eq!(energy_correction(&[0.0; 5], &[1.0, 2.0, 0.0, 0.0, 0.0]).unwrap(), 0.0);
        assert!(energy_correction(&[1.0; 3], &[0.0; 3]).is_err());
    }

    #[test]
    fn upper_solution_satisfies_order_equation() {
        let s = solve_t1(1, 0, 1.0).unwrap().solutions.remove(1);
        let path = CouplingPath::beta_shift(&s.potential, (-1.0, 1.0)).unwrap();
        let opts = PerturbOptions { order: 1, cutoff: 40, ..Default::default() };
        let (series, ws) = run_with_workspaces(&s, &path, &opts).unwrap();
        let setup = Setup::new(&s, &path, 40, 1).unwrap();
        let r = setup.m0.matvec(&series.orders[1].h);
        for (a, b) in r.iter().zip(&ws[0].tau_tilde) {
            assert!((a - b).abs() <= 1e-9);
        }
    }
}
