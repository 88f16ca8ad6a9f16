use proptest::prelude::*;

use pade_spect::solvable::solve_t1;
use pade_spect::spectrum::{generalized_spectrum, matrix_spectrum, shoot_energy, shoot_levels, ShootOptions};
use pade_spect::tables::cardano;
use pade_spect::PadePotential;

#[test]
fn cardano_ground_state_by_shooting() {
    let card = cardano().unwrap();
    let shot = shoot_energy(&card.potential, 0, (10.5, 11.3), &ShootOptions::default()).unwrap();
    assert!((shot - 10.943408413).abs() < 1e-6, "{shot}");
    let m = matrix_spectrum(&card.potential, 0, 80, 1).unwrap().energies[0];
    assert!((m - shot).abs() < 1e-6, "{m} vs {shot}");
}

#[test]
fn solvable_levels_found_exactly() {
    for ell in [-1, 0] {
        for s in solve_t1(2, ell, 1.0).unwrap().solutions {
            let levels = matrix_spectrum(&s.potential, ell, 40, 4).unwrap().energies;
            let hit = levels.iter().map(|e| (e - s.e0).abs()).fold(f64::MAX, f64::min);
            assert!(hit < 1e-9, "beta={} E0={} levels {levels:?}", s.potential.beta, s.e0);
        }
    }
}

#[test]
fn determinant_scan_agrees_with_dense_eigenvalues() {
    let card = cardano().unwrap();
    let scan = matrix_spectrum(&card.potential, 0, 30, 5).unwrap().energies;
    let dense = generalized_spectrum(&card.potential, 0, 30).unwrap();
    for e in scan {
        let d = dense.iter().map(|x| (x - e).abs()).fold(f64::MAX, f64::min);
        assert!(d < 1e-8, "{e}");
    }
}

#[test]
fn levels_stabilize_with_cutoff() {
    let card = cardano().unwrap();
    let at = |m: usize| matrix_spectrum(&card.potential, 0, m, 3).unwrap().energies;
    let fine = at(80);
    let err = |m: usize| -> Vec<f64> { at(m).iter().zip(&fine).map(|(a, b)| (a - b).abs()).collect() };
    let (e20, e40, e60) = (err(20), err(40), err(60));
    for i in 0..3 {
        assert!(e60[i] <= e40[i] && e40[i] <= e20[i], "level {i}: {} {} {}", e20[i], e40[i], e60[i]);
        assert!(e60[i] < 1e-5);
    }
    assert!((fine[1] - 15.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 5, ..ProptestConfig::default() })]

    /// Matrix levels at M = 80 against shooting, for random `t = 1` couplings.
    #[test]
    fn matrix_levels_match_shooting(beta in -3.0f64..40.0, b1 in 0.3f64..3.0, odd in any::<bool>()) {
        let ell = if odd { 0 } else { -1 };
        let p = PadePotential::new(1, beta, vec![1.0], vec![1.0, b1], ell).unwrap();
        let levels = matrix_spectrum(&p, ell, 80, 3).unwrap().energies;
        prop_assert_eq!(levels.len(), 3);
        let gap = levels.windows(2).map(|w| w[1] - w[0]).fold(f64::MAX, f64::min);
        let shot = shoot_levels(&p, ell, &levels, 0.25 * gap.min(1.0), &ShootOptions::default()).unwrap();
        for (m, s) in levels.iter().zip(&shot) {
            prop_assert!((m - s).abs() < 1e-6, "{} vs {}", m, s);
        }
    }
}
