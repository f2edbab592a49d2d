//! Liouvillian construction, steady-state solve and photon statistics.
//!
//! Vectorization is column-stacking, `vec(AXB) = (Bᵀ ⊗ A) vec(X)`, and the
//! generator is `dρ/dt = −i[H, ρ] + (κ/2)(2aρa† − a†aρ − ρa†a)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{adjoint, annihilation, expectation, number_operator, ComplexMatrix, FockSpace};
use crate::linalg::LuFactors;
use crate::model::{build_h_eff, SystemParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Below this mean photon number `g²(0)` and the log observables are undefined.
pub const PHOTON_FLOOR: f64 = 1e-12;
/// Largest accepted 1-norm condition estimate for the constrained Liouvillian.
pub const MAX_CONDITION: f64 = 1e14;
/// Stationarity requirement `‖L vec ρ‖∞ ≤ RESIDUAL_TOL · ‖L‖∞`.
pub const RESIDUAL_TOL: f64 = 1e-9;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-8;

/// Accumulates `coef · (A ⊗ B)` into a dense row-major buffer of width `width`.
fn add_kron(
    buf: &mut [Complex64],
    width: usize,
    coef: Complex64,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) {
    let nz = |m: &ComplexMatrix| -> Vec<(usize, usize, Complex64)> {
        (0..m.rows())
            .flat_map(|r| (0..m.cols()).map(move |c| (r, c)))
            .map(|(r, c)| (r, c, m.get(r, c)))
            .filter(|&(_, _, z)| z != ZERO)
            .collect()
    };
    let (bn_r, bn_c) = (b.rows(), b.cols());
    let b_nz = nz(b);
    for (ar, ac, x) in nz(a) {
        let x = coef * x;
        for &(br, bc, y) in &b_nz {
            buf[(ar * bn_r + br) * width + ac * bn_c + bc] += x * y;
        }
    }
}

/// Superoperator `L` with `vec(dρ/dt) = L vec(ρ)`.
pub fn liouvillian(p: &SystemParams, space: FockSpace) -> Result<ComplexMatrix> {
    let h = build_h_eff(p, space)?;
    Ok(assemble_liouvillian(&h, space, p.kappa))
}

fn assemble_liouvillian(h: &ComplexMatrix, space: FockSpace, kappa: f64) -> ComplexMatrix {
    let d = space.dim();
    let n2 = d * d;
    let id = ComplexMatrix::identity(d);
    let a = annihilation(space);
    let num = number_operator(space);
    let minus_i = Complex64::new(0.0, -1.0);
    let half_k = Complex64::new(kappa / 2.0, 0.0);

    let mut buf = vec![ZERO; n2 * n2];
    add_kron(&mut buf, n2, minus_i, &id, h);
    add_kron(&mut buf, n2, -minus_i, &h.transpose(), &id);
    add_kron(&mut buf, n2, half_k * 2.0, &a.conj(), &a);
    add_kron(&mut buf, n2, -half_k, &id, &num);
    add_kron(&mut buf, n2, -half_k, &num.transpose(), &id);
    ComplexMatrix::new(n2, n2, buf).expect("finite Liouvillian")
}

/// `−i[H, ρ] + (κ/2)(2aρa† − a†aρ − ρa†a)` evaluated directly on the matrix.
pub fn lindblad_rhs(
    h: &ComplexMatrix,
    a: &ComplexMatrix,
    kappa: f64,
    rho: &ComplexMatrix,
) -> ComplexMatrix {
    let ad = adjoint(a);
    let num = &ad * a;
    let comm = &(h * rho) - &(rho * h);
    let jump =
        &(&(a * rho) * &ad).scale(Complex64::new(2.0, 0.0)) - &(&(&num * rho) + &(rho * &num));
    &comm.scale(Complex64::new(0.0, -1.0)) + &jump.scale(Complex64::new(kappa / 2.0, 0.0))
}

/// Steady-state density matrix satisfying Hermiticity, unit trace and
/// positivity within the module tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        if !rho.is_square() {
            return Err(Error::DimensionMismatch(format!(
                "density matrix must be square, got {}x{}",
                rho.rows(),
                rho.cols()
            )));
        }
        let herm = rho.max_abs_diff(&adjoint(&rho));
        if herm > HERMITIAN_TOL {
            return Err(Error::Unphysical(format!("Hermiticity error {herm:.3e}")));
        }
        let trace_err = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
        if trace_err > TRACE_TOL {
            return Err(Error::Unphysical(format!("trace error {trace_err:.3e}")));
        }
        let dm = Self { rho };
        let min_eig = dm.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return Err(Error::Unphysical(format!(
                "negative eigenvalue {min_eig:.3e}"
            )));
        }
        Ok(dm)
    }

    pub fn dim(&self) -> usize {
        self.rho.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.dim();
        let herm = (&self.rho + &adjoint(&self.rho)).scale(Complex64::new(0.5, 0.0));
        let m = DMatrix::from_row_slice(n, n, herm.as_slice());
        m.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.rho.get(n, n).re).collect()
    }
}

/// Photon statistics of a steady state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observables {
    pub mean_photon: f64,
    /// `None` when the mean photon number is below [`PHOTON_FLOOR`].
    pub g2: Option<f64>,
    pub lg_n: Option<f64>,
    pub lg_g2: Option<f64>,
    pub populations: Vec<f64>,
}

/// Solves `L vec(ρ) = 0` with `Tr ρ = 1` by swapping one row of `L` for the
/// trace functional and running a pivoted LU.
pub fn steady_state(p: &SystemParams, space: FockSpace) -> Result<DensityMatrix> {
    let h = build_h_eff(p, space)?;
    let d = space.dim();
    let n2 = d * d;
    let l = assemble_liouvillian(&h, space, p.kappa);
    let l_norm = l.norm_inf();

    let replace = (0..n2)
        .map(|r| (r, l.row(r).iter().map(|z| z.norm()).fold(0.0, f64::max)))
        .fold(
            (0, f64::INFINITY),
            |best, cur| if cur.1 < best.1 { cur } else { best },
        )
        .0;

    let mut data = l.into_vec();
    let row = &mut data[replace * n2..(replace + 1) * n2];
    row.fill(ZERO);
    for i in 0..d {
        row[i + d * i] = Complex64::new(1.0, 0.0);
    }
    let constrained = ComplexMatrix::new(n2, n2, data)?;

    let lu = LuFactors::factor(constrained)?;
    let condition = lu.condition_estimate();
    if !(condition <= MAX_CONDITION) {
        return Err(Error::SolverFailure { condition });
    }
    let mut rhs = vec![ZERO; n2];
    rhs[replace] = Complex64::new(1.0, 0.0);
    let x = lu.solve(&rhs)?;
    let rho = ComplexMatrix::unvectorize(d, &x).map_err(|_| Error::SolverFailure { condition })?;

    let residual = lindblad_rhs(&h, &annihilation(space), p.kappa, &rho)
        .as_slice()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if residual > RESIDUAL_TOL * l_norm {
        return Err(Error::SolverFailure { condition });
    }
    DensityMatrix::new(rho)
}

/// `N = Tr(ρ a†a)` and `g²(0) = Tr(ρ a†a†aa) / N²`.
pub fn observables(rho: &DensityMatrix) -> Observables {
    let diag = |f: fn(usize) -> usize| {
        ComplexMatrix::diagonal(
            &(0..rho.dim())
                .map(|n| Complex64::new(f(n) as f64, 0.0))
                .collect::<Vec<_>>(),
        )
    };
    let num = diag(|n| n);
    let pair = diag(|n| n * n.saturating_sub(1));
    let mean_photon = expectation(&num, rho.matrix()).expect("square operands").re;
    let pairs = expectation(&pair, rho.matrix())
        .expect("square operands")
        .re;

    let (g2, lg_n) = if mean_photon >= PHOTON_FLOOR {
        (
            Some(pairs / (mean_photon * mean_photon)),
            Some(mean_photon.log10()),
        )
    } else {
        (None, None)
    };
    let lg_g2 = g2.filter(|&v| v > 0.0).map(f64::log10);
    Observables {
        mean_photon,
        g2,
        lg_n,
        lg_g2,
        populations: rho.populations(),
    }
}

/// Truncation schedule for [`converged_steady_state_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub tol: f64,
    pub start_dim: usize,
    pub step: usize,
    pub max_dim: usize,
}

impl Default for Convergence {
    fn default() -> Self {
        Self {
            tol: 1e-3,
            start_dim: 12,
            step: 6,
            max_dim: 60,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergedState {
    pub rho: DensityMatrix,
    pub observables: Observables,
    pub dim: usize,
}

fn log_change(a: Option<f64>, b: Option<f64>) -> f64 {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs(),
        (None, None) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Grows the truncation until `lg N` and `lg g²` each move by less than `tol`.
pub fn converged_steady_state(p: &SystemParams, tol: f64) -> Result<ConvergedState> {
    converged_steady_state_with(
        p,
        Convergence {
            tol,
            ..Default::default()
        },
    )
}

pub fn converged_steady_state_with(p: &SystemParams, conv: Convergence) -> Result<ConvergedState> {
    if !(conv.tol >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "tolerance must be non-negative, got {}",
            conv.tol
        )));
    }
    if conv.step == 0 {
        return Err(Error::InvalidParams(
            "truncation step must be positive".into(),
        ));
    }
    let mut dim = conv.start_dim;
    let mut previous: Option<ConvergedState> = None;
    while dim <= conv.max_dim {
        let rho = steady_state(p, FockSpace::new(dim)?)?;
        let obs = observables(&rho);
        let current = ConvergedState {
            rho,
            observables: obs,
            dim,
        };
        // Vacuum to working precision: nothing left to truncate.
        if current.observables.lg_n.is_none() && current.observables.mean_photon < PHOTON_FLOOR {
            return Ok(current);
        }
        if let Some(prev) = &previous {
            let dn = log_change(prev.observables.lg_n, current.observables.lg_n);
            let dg = log_change(prev.observables.lg_g2, current.observables.lg_g2);
            if dn < conv.tol && dg < conv.tol {
                return Ok(current);
            }
        }
        previous = Some(current);
        dim += conv.step;
    }
    match previous {
        Some(last) => {
            let before = steady_state(p, FockSpace::new(last.dim - conv.step)?)
                .map(|r| observables(&r))
                .unwrap_or_else(|_| last.observables.clone());
            Err(Error::NotConverged {
                max_dim: conv.max_dim,
                previous: Box::new(before),
                last: Box::new(last.observables),
            })
        }
        None => Err(Error::InvalidParams(format!(
            "start dimension {} exceeds maximum {}",
            conv.start_dim, conv.max_dim
        ))),
    }
}
