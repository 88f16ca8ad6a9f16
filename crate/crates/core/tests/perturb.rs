use nalgebra::DVector;
use proptest::prelude::*;

use pade_spect::banded::{derivative_matrices, BandedMatrix};
use pade_spect::basis::BasisParams;
use pade_spect::perturb::{
    compute_tau, mu_closed_form, residual_at, run, run_with_workspaces, solve_order_t1_upper, sum_series, tail_columns,
    Gauge, PerturbOptions, Propagator, Setup,
};
use pade_spect::poly::Poly;
use pade_spect::solvable::{solve_general, solve_t1, ExactSolution, GeneralProblem};
use pade_spect::spectrum::{matrix_spectrum, shoot_energy, ShootOptions};
use pade_spect::{CouplingPath, PadePotential};

fn t1(q: usize, ell: i32, i: usize) -> ExactSolution {
    solve_t1(q, ell, 1.0).unwrap().solutions.remove(i)
}

fn shift(s: &ExactSolution) -> CouplingPath {
    CouplingPath::beta_shift(&s.potential, (-1.0, 1.0)).unwrap()
}

fn opts(order: usize, cutoff: usize) -> PerturbOptions {
    PerturbOptions { order, cutoff, ..Default::default() }
}

fn two_parameter(q: usize) -> ExactSolution {
    let p = GeneralProblem::two_parameter(q, 0, 1.0, 1.0).unwrap();
    solve_general(&p, None).unwrap().solutions.remove(0)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn first_order_energy_is_six_elevenths() {
    let s = t1(0, -1, 0);
    assert_eq!(s.potential.beta, 6.0);
    let series = run(&s, &shift(&s), &opts(1, 100)).unwrap();
    assert!((series.orders[1].energy - 6.0 / 11.0).abs() < 1e-12);
    // β⁽⁰⁾h₁⁽¹⁾ = E⁽¹⁾/√2
    let h1 = series.orders[1].h[1];
    assert!((6.0 * h1 - (6.0 / 11.0) / 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn first_tau_is_the_first_derivative_acting_on_h0() {
    let s = t1(1, 0, 0);
    let path = shift(&s);
    let setup = Setup::new(&s, &path, 30, 1).unwrap();
    let tau = compute_tau(1, &[s.e0], std::slice::from_ref(&setup.h0), &setup.mats);
    let direct = setup.mats[1].d.scale(s.e0).axpy(-1.0, &setup.mats[1].h).matvec(&setup.h0);
    assert!(max_diff(&tau, &direct) < 1e-13);
}

#[test]
fn constant_path_has_no_corrections() {
    let s = t1(2, -1, 1);
    let path = CouplingPath::new(
        Poly::constant(s.potential.beta),
        vec![Poly::constant(1.0)],
        vec![Poly::constant(1.0), Poly::constant(1.0)],
        -1,
        (0.0, 1.0),
    )
    .unwrap();
    let series = run(&s, &path, &opts(4, 40)).unwrap();
    for o in &series.orders[1..] {
        assert_eq!(o.energy, 0.0);
        assert!(o.h.iter().all(|&v| v == 0.0));
    }
}

/// Second-order energy from the dense left singular vector of `M₀` and a
/// pseudo-inverse for `h⁽¹⁾`; shares nothing with the triangular solvers.
fn dense_second_order(s: &ExactSolution, path: &CouplingPath, size: usize) -> (f64, f64) {
    let mats = derivative_matrices(path, &BasisParams::new(s.ell).unwrap(), size, 2).unwrap();
    let dense = |m: &BandedMatrix| m.to_dense();
    let (h0m, h1m, h2m) = (dense(&mats[0].h), dense(&mats[1].h), dense(&mats[2].h));
    let (d0, d1, d2) = (dense(&mats[0].d), dense(&mats[1].d), dense(&mats[2].d));
    let e0 = s.e0;
    let m0 = &h0m - &d0 * e0;
    let svd = m0.clone().svd(true, true);
    let imin = svd.singular_values.imin();
    let u = svd.u.as_ref().unwrap().column(imin).into_owned();
    let h0 = DVector::from_vec(s.padded_h(size));
    let a1 = &h1m - &d1 * e0;
    let e1 = u.dot(&(&a1 * &h0)) / u.dot(&(&d0 * &h0));
    let rhs = -(&a1 - &d0 * e1) * &h0;
    let h1 = svd.solve(&rhs, 1e-12).unwrap();
    let b2 = (&h2m - &d2 * e0 - &d1 * e1) * &h0 + (&a1 - &d0 * e1) * &h1;
    let e2 = u.dot(&b2) / u.dot(&(&d0 * &h0));
    (e1, e2)
}

#[test]
fn second_order_matches_dense_oracle() {
    let s = t1(0, -1, 0);
    let size = 40;
    let paths = [
        shift(&s),
        CouplingPath::new(
            Poly::linear(6.0, 1.0),
            vec![Poly::constant(1.0)],
            vec![Poly::constant(1.0), Poly::new(vec![1.0, 0.5, 0.25])],
            -1,
            (-0.5, 0.5),
        )
        .unwrap(),
    ];
    for path in paths {
        let series = run(&s, &path, &opts(2, size - 1)).unwrap();
        let (e1, e2) = dense_second_order(&s, &path, size);
        assert!((series.orders[1].energy - e1).abs() < 1e-12);
        assert!((series.orders[2].energy - e2).abs() < 1e-12, "{} vs {e2}", series.orders[2].energy);
    }
}

#[test]
fn upper_path_solves_the_order_equation() {
    let s = t1(1, 0, 1);
    let path = shift(&s);
    let (series, ws) = run_with_workspaces(&s, &path, &opts(1, 40)).unwrap();
    let setup = Setup::new(&s, &path, 40, 1).unwrap();
    let r = setup.m0.matvec(&series.orders[1].h);
    assert!(max_diff(&r, &ws[0].tau_tilde) <= 1e-9);
}

#[test]
fn zero_input_gives_zero_coefficients() {
    let s = t1(2, 0, 0);
    let setup = Setup::new(&s, &shift(&s), 30, 0).unwrap();
    let (h, _) = solve_order_t1_upper(&setup.m0, 2, &[0.0; 31]).unwrap();
    assert!(h.iter().all(|&v| v == 0.0));
    assert_eq!(mu_closed_form(3, &setup.m0, &[0.0; 31]), 0.0);
}

#[test]
fn closed_form_mu_matches_recurrence() {
    let s = t1(1, -1, 0);
    let path = shift(&s);
    let (_, ws) = run_with_workspaces(&s, &path, &opts(2, 30)).unwrap();
    let setup = Setup::new(&s, &path, 30, 0).unwrap();
    let last = 30;
    for w in &ws {
        let tilde = &w.tau_tilde;
        let base = mu_closed_form(0, &setup.m0, tilde);
        assert!((base - tilde[last] / setup.m0.get(last, last - 1)).abs() <= 1e-15 * base.abs().max(1e-300));
        for m in 0..=6 {
            let cf = mu_closed_form(m, &setup.m0, tilde);
            let rec = w.mu[last - m - 1];
            assert!((cf - rec).abs() <= 1e-11 * rec.abs().max(1e-300), "m={m}: {cf} vs {rec}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn closed_form_mu_matches_recurrence_on_random_input(
        tilde in proptest::collection::vec(-1.0f64..1.0, 31),
        m in 0usize..5,
    ) {
        let s = t1(2, 0, 1);
        let setup = Setup::new(&s, &shift(&s), 30, 0).unwrap();
        let tail = tail_columns(&setup.m0, 2, &tilde).unwrap();
        let cf = mu_closed_form(m, &setup.m0, &tilde);
        let rec = tail.mu[30 - m - 1];
        prop_assert!((cf - rec).abs() <= 1e-11 * rec.abs().max(1e-12), "{} vs {}", cf, rec);
    }

    #[test]
    fn normalized_coefficient_stays_zero(q in 0usize..4, pick in 0usize..4, odd in any::<bool>(), bottom in any::<bool>()) {
        let ell = if odd { 0 } else { -1 };
        let sols = solve_t1(q, ell, 1.0).unwrap().solutions;
        let s = sols[pick % sols.len()].clone();
        let gauge = if bottom { Gauge::Bottom } else { Gauge::Top };
        let o = PerturbOptions { order: 3, cutoff: 40, gauge, propagator: Some(Propagator::Regularized), ..Default::default() };
        let series = run(&s, &shift(&s), &o).unwrap();
        let p = gauge.index(q);
        for ord in &series.orders[1..] {
            prop_assert_eq!(ord.h[p], 0.0);
        }
    }
}

#[test]
fn upper_and_regularized_paths_agree() {
    for ell in [-1, 0] {
        for q in 0..=3 {
            for s in solve_t1(q, ell, 1.0).unwrap().solutions {
                let path = shift(&s);
                for m in [20, 50, 80] {
                    let up = run(&s, &path, &opts(4, m)).unwrap();
                    let o = PerturbOptions { propagator: Some(Propagator::Regularized), ..opts(4, m) };
                    let rg = run(&s, &path, &o).unwrap();
                    for k in 1..=4 {
                        let d = max_diff(&up.orders[k].h, &rg.orders[k].h);
                        assert!(d <= 1e-9, "q={q} ell={ell} M={m} k={k}: {d:e}");
                        assert!((up.orders[k].energy - rg.orders[k].energy).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

fn cardano_interpolation() -> (ExactSolution, CouplingPath) {
    let card = two_parameter(1);
    let other = two_parameter(0);
    let path = CouplingPath::interpolation(&card.potential, &other.potential).unwrap();
    (card, path)
}

#[test]
fn constraint_energy_matches_left_vector_energy() {
    let (card, path) = cardano_interpolation();
    let ground = two_parameter(0);
    let back = CouplingPath::interpolation(&ground.potential, &card.potential).unwrap();
    for (base, path) in [(&card, &path), (&ground, &back)] {
        for gauge in [Gauge::Top, Gauge::Bottom] {
            let series = run(base, path, &PerturbOptions { gauge, ..opts(4, 60) }).unwrap();
            for o in &series.orders[1..] {
                let c = o.energy_check.unwrap();
                assert!((c - o.energy).abs() < 1e-11, "q={} k={}: {c} vs {}", base.q, o.k, o.energy);
                assert!(o.z.abs() < 1e-12, "q={} k={}: z={:e}", base.q, o.k, o.z);
            }
        }
    }
}

#[test]
fn direct_path_matches_regularized_path() {
    let (card, path) = cardano_interpolation();
    let rg = run(&card, &path, &PerturbOptions { d_reg: 1e8, ..opts(4, 60) }).unwrap();
    let di = run(&card, &path, &PerturbOptions { propagator: Some(Propagator::Direct), ..opts(4, 60) }).unwrap();
    for k in 1..=4 {
        assert!(max_diff(&rg.orders[k].h, &di.orders[k].h) <= 1e-9);
        assert_eq!(di.orders[k].z, 0.0);
    }
}

#[test]
fn eta_columns_do_not_depend_on_order() {
    let (card, path) = cardano_interpolation();
    let (_, ws) = run_with_workspaces(&card, &path, &opts(3, 60)).unwrap();
    assert_eq!(ws[0].eta, ws[2].eta);
    assert_eq!(ws[0].eta.len(), 3);
}

#[test]
fn spuriosity_scales_inversely_with_regularizer() {
    let (card, path) = cardano_interpolation();
    let mut products = vec![];
    for d in [1e4, 1e5, 1e6, 1e7] {
        let series = run(&card, &path, &PerturbOptions { d_reg: d, ..opts(4, 60) }).unwrap();
        for z in series.z_diag() {
            assert!(z.abs() <= 10.0 / d);
        }
        products.push(series.z_diag()[0].abs() * d);
    }
    let (lo, hi) = products.iter().fold((f64::MAX, 0.0f64), |(l, h), &p| (l.min(p), h.max(p)));
    assert!(lo > 0.0 && hi / lo <= 10.0, "{products:?}");
}

fn slope(ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let xm = (n - 1.0) / 2.0;
    let ym = ys.iter().sum::<f64>() / n;
    let sxy: f64 = ys.iter().enumerate().map(|(i, y)| (i as f64 - xm) * (y - ym)).sum();
    let sxx: f64 = (0..ys.len()).map(|i| (i as f64 - xm).powi(2)).sum();
    sxy / sxx
}

/// `R(K) ≈ C(λ/r)^{K+1}`: log R falls linearly in K, at least as fast as
/// `log λ`, and halving λ steepens the slope by `log 2`.
#[test]
fn residual_falls_geometrically_with_order() {
    let s = t1(0, -1, 0);
    let series = run(&s, &shift(&s), &opts(6, 100)).unwrap();
    let logs = |lam: f64| -> Vec<f64> { (1..=5).map(|k| residual_at(&series, lam, k).unwrap().ln()).collect() };
    let l1 = logs(0.1);
    let l2 = logs(0.05);
    for w in l1.windows(2) {
        assert!(w[1] < w[0]);
    }
    let (s1, s2) = (slope(&l1), slope(&l2));
    assert!(s1 <= 0.1f64.ln(), "slope {s1}");
    for (i, y) in l1.iter().enumerate() {
        let fit = l1.iter().sum::<f64>() / 5.0 + s1 * (i as f64 - 2.0);
        assert!((y - fit).abs() < 0.5, "K={} off the line by {}", i + 1, y - fit);
    }
    assert!(((s1 - s2) - 2f64.ln()).abs() < 0.35, "slopes {s1} {s2}");
}

#[test]
fn zero_coupling_sum_is_the_base() {
    let s = t1(1, 0, 0);
    let series = run(&s, &shift(&s), &opts(3, 40)).unwrap();
    let (e, h) = sum_series(&series, 0.0, 3).unwrap();
    assert_eq!(e, s.e0);
    assert_eq!(h, s.padded_h(41));
    assert!(sum_series(&series, 0.1, 4).is_err());
}

/// At λ = 0.5 the partial sums approach the matrix eigenvalue, but not
/// monotonically: E⁽³⁾ overshoots, so K = 3 is worse than K = 2.
#[test]
fn partial_sums_approach_matrix_level() {
    let s = t1(0, -1, 0);
    let series = run(&s, &shift(&s), &opts(6, 100)).unwrap();
    let p = PadePotential::new(1, 6.5, vec![1.0], vec![1.0, 1.0], -1).unwrap();
    let exact = matrix_spectrum(&p, -1, 80, 1).unwrap().energies[0];
    let err: Vec<f64> = (1..=6).map(|k| (sum_series(&series, 0.5, k).unwrap().0 - exact).abs()).collect();
    for k in 0..4 {
        assert!(err[k + 2] < err[k], "{err:?}");
    }
    assert!(err[5] < 1e-8 && err[0] > 1e-3, "{err:?}");
    assert!(err[2] > err[1], "{err:?}");
}

#[test]
fn interpolation_first_order_matches_table() {
    let ground = two_parameter(0);
    let card = two_parameter(1);
    let shoot = ShootOptions::default();
    let cases = [
        (&ground, &card, -0.0449, 10.9551, 10.9434, (10.5, 11.3)),
        (&card, &ground, -0.0985, 14.9015, 14.6332, (14.2, 15.0)),
    ];
    for (from, to, e1, sum1, rk, bracket) in cases {
        let path = CouplingPath::interpolation(&from.potential, &to.potential).unwrap();
        let series = run(from, &path, &opts(1, 80)).unwrap();
        assert!((series.orders[1].energy - e1).abs() < 1e-3, "{}", series.orders[1].energy);
        let (e, _) = sum_series(&series, 1.0, 1).unwrap();
        assert!((e - sum1).abs() < 1e-3);
        let numeric = shoot_energy(&to.potential, 0, bracket, &shoot).unwrap();
        assert!((numeric - rk).abs() < 1e-3, "{numeric}");
        assert!((e - numeric).abs() <= 0.3);
    }
}

#[test]
fn regauged_series_keeps_energies() {
    let s = t1(2, -1, 2);
    let series = run(&s, &shift(&s), &opts(4, 60)).unwrap();
    let bottom = series.regauge(Gauge::Bottom).unwrap();
    assert_eq!(bottom.energies(), series.energies());
    let direct = run(&s, &shift(&s), &PerturbOptions { gauge: Gauge::Bottom, propagator: Some(Propagator::Regularized), ..opts(4, 60) }).unwrap();
    for k in 1..=4 {
        assert_eq!(bottom.orders[k].h[0], 0.0);
        assert!(max_diff(&bottom.orders[k].h, &direct.orders[k].h) < 1e-10);
        assert!((direct.orders[k].energy - series.orders[k].energy).abs() < 1e-12);
    }
}

#[test]
fn csv_and_json_output() {
    let s = t1(0, -1, 0);
    let series = run(&s, &shift(&s), &opts(1, 100)).unwrap();
    let csv = series.orders_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "k,E_k,z_k,tail_norm");
    assert!(lines[2].starts_with("1,0.545454545454545"));
    let back: pade_spect::perturb::PerturbationSeries = serde_json::from_str(&series.to_json().unwrap()).unwrap();
    assert_eq!(back.energies(), series.energies());
    let zero = run(&s, &shift(&s), &opts(0, 100)).unwrap();
    assert_eq!(zero.orders_csv().lines().count(), 2);
}

#[test]
fn path_must_start_at_the_solution() {
    let s = t1(0, -1, 0);
    let other = PadePotential::new(1, 7.0, vec![1.0], vec![1.0, 1.0], -1).unwrap();
    let path = CouplingPath::beta_shift(&other, (-1.0, 1.0)).unwrap();
    assert!(run(&s, &path, &opts(1, 40)).is_err());
}
