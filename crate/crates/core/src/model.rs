//! Physical parameters, Hamiltonians and the bare Kerr spectrum.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{
    annihilation, creation, number_operator, pair_number_operator, ComplexMatrix, FockSpace,
};

/// Cavity, Kerr, parametric and drive parameters, all in units of `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Cavity-drive detuning.
    pub delta: f64,
    /// Kerr strength.
    pub u: f64,
    /// Parametric (two-photon) coefficient. May be negative.
    pub g: f64,
    /// Drive amplitude, non-negative.
    pub f: f64,
    /// Drive phase in radians, stored as given.
    pub phi: f64,
    /// Cavity decay rate.
    pub kappa: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            delta: 0.0,
            u: 0.0,
            g: 0.0,
            f: 0.0,
            phi: 0.0,
            kappa: 1.0,
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("delta", self.delta),
            ("u", self.u),
            ("g", self.g),
            ("f", self.f),
            ("phi", self.phi),
            ("kappa", self.kappa),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be finite")));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if self.f < 0.0 {
            return Err(Error::InvalidParams(format!(
                "f must be non-negative, got {} (the phase carries the sign)",
                self.f
            )));
        }
        Ok(())
    }

    /// `F e^{iφ}`.
    pub fn drive(&self) -> Complex64 {
        Complex64::from_polar(self.f, self.phi)
    }
}

/// `Δ a†a + U a†a†aa + iG(a†a† − aa) + F(a† e^{iφ} + a e^{−iφ})`.
pub fn build_h_eff(p: &SystemParams, space: FockSpace) -> Result<ComplexMatrix> {
    p.validate()?;
    let a = annihilation(space);
    let ad = creation(space);
    let a2 = &a * &a;
    let ad2 = &ad * &ad;

    let diag = &number_operator(space).scale(Complex64::new(p.delta, 0.0))
        + &pair_number_operator(space).scale(Complex64::new(p.u, 0.0));
    let squeeze = (&ad2 - &a2).scale(Complex64::new(0.0, p.g));
    let drive = p.drive();
    let pump = &ad.scale(drive) + &a.scale(drive.conj());
    Ok(&(&diag + &squeeze) + &pump)
}

/// Effective Hamiltonian with the decay folded in as `−i(κ/2) a†a`.
pub fn build_h_non(p: &SystemParams, space: FockSpace) -> Result<ComplexMatrix> {
    let h = build_h_eff(p, space)?;
    let damping = number_operator(space).scale(Complex64::new(0.0, -p.kappa / 2.0));
    Ok(&h + &damping)
}

/// A bare level `E_n = n ω_a + n(n−1) U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLevel {
    pub n: usize,
    pub energy: f64,
}

pub fn energy_levels(omega_a: f64, u: f64, n_max: usize) -> Vec<EnergyLevel> {
    (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            EnergyLevel {
                n,
                energy: nf * omega_a + nf * (nf - 1.0) * u,
            }
        })
        .collect()
}
