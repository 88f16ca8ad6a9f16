use crate::banded::QuasiHamiltonian;
use crate::error::{Error, Result};

/// Inhomogeneity of order `k`: with `M₀ = H⁽⁰⁾ − E⁽⁰⁾D⁽⁰⁾` the order-`k`
/// equation reads `M₀h⁽ᵏ⁾ = E⁽ᵏ⁾ρ + τ⁽ᵏ⁻¹⁾`, where
///
/// `τ⁽ᵏ⁻¹⁾ = −Σ_{c<k} [H⁽ᵏ⁻ᶜ⁾ − Σ_{a+b=k−c} E⁽ᵃ⁾D⁽ᵇ⁾] h⁽ᶜ⁾`
///
/// and the single term `E⁽ᵏ⁾D⁽⁰⁾h⁽⁰⁾ = E⁽ᵏ⁾ρ` is left out of the sum.
/// `energies` and `hs` hold orders `0..k`; `mats[j]` is `(H⁽ʲ⁾, D⁽ʲ⁾)`.
pub fn compute_tau(k: usize, energies: &[f64], hs: &[Vec<f64>], mats: &[QuasiHamiltonian]) -> Vec<f64> {
    assert!(k >= 1 && energies.len() >= k && hs.len() >= k && mats.len() > k);
    let size = mats[0].size();
    let mut tau = vec![0.0; size];
    for c in 0..k {
        let h = &hs[c];
        let j = k - c;
        let hv = mats[j].h.matvec(h);
        for (t, v) in tau.iter_mut().zip(&hv) {
            *t -= v;
        }
        for a in 0..=j {
            if c == 0 && a == k {
                continue;
            }
            let e = energies[a];
            if e == 0.0 {
                continue;
            }
            let dv = mats[j - a].d.matvec(h);
            for (t, v) in tau.iter_mut().zip(&dv) {
                *t += e * v;
            }
        }
    }
    tau
}

/// `E⁽ᵏ⁾ = −ρ·τ / ρ·ρ`, the solvability condition of the order-`k` equation.
pub fn energy_correction(tau: &[f64], rho: &[f64]) -> Result<f64> {
    let rr: f64 = rho.iter().map(|r| r * r).sum();
    if rr == 0.0 {
        return Err(Error::Singular("left null vector vanishes".into()));
    }
    let rt: f64 = rho.iter().zip(tau).map(|(r, t)| r * t).sum();
    Ok(-rt / rr)
}
