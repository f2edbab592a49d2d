//! Weak-drive amplitudes in the two-photon truncation, the interference
//! condition for vanishing two-photon amplitude, and the optimal-G relation.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::ComplexMatrix;
use crate::linalg::LuFactors;
use crate::model::SystemParams;

const DEGENERACY_FLOOR: f64 = 1e-14;
const EXCITATION_FLOOR: f64 = 1e-24;

/// Amplitudes of `C₀|0⟩ + C₁|1⟩ + C₂|2⟩`, normalized to `C₀ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSet {
    pub c0: Complex64,
    pub c1: Complex64,
    pub c2: Complex64,
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// `4F² − (2Δ − iκ)(2Δ − iκ + 2U)`, shared by both closed-form amplitudes.
fn denominator(p: &SystemParams) -> Complex64 {
    let a = Complex64::new(2.0 * p.delta, -p.kappa);
    let w = Complex64::new(2.0 * p.delta + 2.0 * p.u, -p.kappa);
    4.0 * p.f * p.f - a * w
}

/// Closed-form `C₁`, `C₂` from the steady amplitude equations with `C₀ = 1`.
pub fn amplitudes_closed_form(p: &SystemParams) -> Result<AmplitudeSet> {
    let den = denominator(p);
    if !(den.norm() > DEGENERACY_FLOOR) {
        return Err(Error::Degenerate(format!(
            "closed-form denominator vanishes ({:.3e})",
            den.norm()
        )));
    }
    let w = Complex64::new(2.0 * p.delta + 2.0 * p.u, -p.kappa);
    let e_phi = Complex64::from_polar(1.0, p.phi);
    let e_mphi = e_phi.conj();
    let c1 = 2.0 * p.f * (w * e_phi - 2.0 * i() * e_mphi * p.g) / den;
    let c2 = -std::f64::consts::SQRT_2 * interference_residual(p) / den;
    Ok(AmplitudeSet {
        c0: Complex64::new(1.0, 0.0),
        c1,
        c2,
    })
}

/// Solves the `|1⟩` and `|2⟩` stationarity rows for `(C₁, C₂)` at `C₀ = 1`
/// by pivoted elimination, independent of the closed form.
pub fn amplitudes_linear_solve(p: &SystemParams) -> Result<AmplitudeSet> {
    let s2 = std::f64::consts::SQRT_2;
    let drive = p.drive();
    let m = ComplexMatrix::new(
        2,
        2,
        vec![
            Complex64::new(p.delta, -p.kappa / 2.0),
            s2 * drive.conj(),
            s2 * drive,
            Complex64::new(2.0 * p.delta + 2.0 * p.u, -p.kappa),
        ],
    )
    .map_err(|e| Error::Degenerate(e.to_string()))?;
    let scale = m.norm_inf();
    let rhs = [-drive, -i() * s2 * p.g];

    let singular = || Error::Degenerate("amplitude equations are singular".into());
    let lu = LuFactors::factor(m).map_err(|_| singular())?;
    if !(lu.condition_estimate() < 1.0 / DEGENERACY_FLOOR) || scale == 0.0 {
        return Err(singular());
    }
    let x = lu.solve(&rhs).map_err(|_| singular())?;
    Ok(AmplitudeSet {
        c0: Complex64::new(1.0, 0.0),
        c1: x[0],
        c2: x[1],
    })
}

/// `2F²e^{2iφ} − Gκ − 2iΔG`; zero exactly when the direct and sequential
/// two-photon paths cancel.
pub fn interference_residual(p: &SystemParams) -> Complex64 {
    2.0 * p.f * p.f * Complex64::from_polar(1.0, 2.0 * p.phi)
        - p.g * p.kappa
        - 2.0 * i() * p.delta * p.g
}

/// Real and imaginary vanishing conditions, `(2F²cos2φ − Gκ, 2F²sin2φ − 2ΔG)`.
pub fn blockade_conditions(p: &SystemParams) -> (f64, f64) {
    let two_f2 = 2.0 * p.f * p.f;
    let (s, c) = (2.0 * p.phi).sin_cos();
    (two_f2 * c - p.g * p.kappa, two_f2 * s - 2.0 * p.delta * p.g)
}

/// `G* = 2F²(cos2φ + sin2φ) / (κ + 2Δ)`.
pub fn optimal_g(f: f64, phi: f64, delta: f64, kappa: f64) -> Result<f64> {
    let den = kappa + 2.0 * delta;
    if !(den.abs() > DEGENERACY_FLOOR) {
        return Err(Error::Singularity(format!(
            "optimal G is undefined at kappa + 2*delta = {den:e}"
        )));
    }
    let (s, c) = (2.0 * phi).sin_cos();
    Ok(2.0 * f * f * (c + s) / den)
}

/// `2|C₂|² / (|C₁|² + 2|C₂|²)²`; `None` when there is no excitation.
pub fn g2_analytic(a: &AmplitudeSet) -> Option<f64> {
    let p1 = a.c1.norm_sqr();
    let p2 = a.c2.norm_sqr();
    let n = p1 + 2.0 * p2;
    (n > EXCITATION_FLOOR).then(|| 2.0 * p2 / (n * n))
}
