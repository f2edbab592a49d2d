//! Independent reference implementation on nalgebra matrices: explicit
//! Lindblad time evolution with classic RK4.

#![allow(dead_code)]

use blockade::SystemParams;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub type CMat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn lowering(d: usize) -> CMat {
    CMat::from_fn(d, d, |i, j| {
        if j == i + 1 {
            c((j as f64).sqrt(), 0.0)
        } else {
            c(0.0, 0.0)
        }
    })
}

pub fn hamiltonian(p: &SystemParams, d: usize) -> CMat {
    let a = lowering(d);
    let ad = a.adjoint();
    let n = &ad * &a;
    let drive = c(p.f * p.phi.cos(), p.f * p.phi.sin());
    &n * c(p.delta, 0.0)
        + &ad * &ad * &a * &a * c(p.u, 0.0)
        + (&ad * &ad - &a * &a) * c(0.0, p.g)
        + &ad * drive
        + &a * drive.conj()
}

fn rhs(h: &CMat, a: &CMat, kappa: f64, rho: &CMat) -> CMat {
    let ad = a.adjoint();
    let n = &ad * a;
    (h * rho - rho * h) * c(0.0, -1.0)
        + (a * rho * &ad * c(2.0, 0.0) - &n * rho - rho * &n) * c(kappa / 2.0, 0.0)
}

/// Evolves from the vacuum to time `t` with step `dt`.
pub fn evolve_from_vacuum(p: &SystemParams, d: usize, t: f64, dt: f64) -> CMat {
    let h = hamiltonian(p, d);
    let a = lowering(d);
    let mut rho = CMat::zeros(d, d);
    rho[(0, 0)] = c(1.0, 0.0);
    let steps = (t / dt).round() as usize;
    let half = c(dt / 2.0, 0.0);
    let full = c(dt, 0.0);
    for _ in 0..steps {
        let k1 = rhs(&h, &a, p.kappa, &rho);
        let k2 = rhs(&h, &a, p.kappa, &(&rho + &k1 * half));
        let k3 = rhs(&h, &a, p.kappa, &(&rho + &k2 * half));
        let k4 = rhs(&h, &a, p.kappa, &(&rho + &k3 * full));
        rho += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
    }
    rho
}

/// `(N, g²)` read off the diagonal.
pub fn photon_stats(rho: &CMat) -> (f64, f64) {
    let (mut n, mut pairs) = (0.0, 0.0);
    for k in 0..rho.nrows() {
        let p = rho[(k, k)].re;
        n += k as f64 * p;
        pairs += (k * k.saturating_sub(1)) as f64 * p;
    }
    (n, pairs / (n * n))
}

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Weak-drive draw: small F and G, moderate detuning and Kerr.
pub fn weak_drive(rng: &mut StdRng) -> SystemParams {
    SystemParams {
        delta: rng.gen_range(-1.0..1.0),
        u: rng.gen_range(0.0..1.0),
        g: rng.gen_range(-0.05..0.05),
        f: rng.gen_range(0.01..0.1),
        phi: rng.gen_range(0.0..std::f64::consts::TAU),
        kappa: 1.0,
    }
}

/// Broad draw over the physically interesting region.
pub fn broad(rng: &mut StdRng) -> SystemParams {
    SystemParams {
        delta: rng.gen_range(-5.0..5.0),
        u: rng.gen_range(0.0..5.0),
        g: rng.gen_range(-0.5..0.5),
        f: rng.gen_range(0.0..0.5),
        phi: rng.gen_range(0.0..std::f64::consts::TAU),
        kappa: 1.0,
    }
}

/// Index of the largest finite value.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        })
        .0
}

pub fn argmin(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |best, (i, &v)| if v < best.1 { (i, v) } else { best },
        )
        .0
}
