//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use blockade::analytic::{
    amplitudes_closed_form, amplitudes_linear_solve, blockade_conditions, interference_residual,
    optimal_g,
};
use blockade::fock::ComplexMatrix;
use blockade::steady::{
    converged_steady_state, observables, steady_state, Convergence, HERMITIAN_TOL, PSD_TOL,
    TRACE_TOL,
};
use blockade::sweep::{
    preset, run_sweep, GridAxis, PresetId, SweepOptions, SweepParam, SweepResult,
};
use blockade::{FockSpace, SystemParams};
use num_complex::Complex64;

/// Name, runtime budget and check.
type Criterion = (&'static str, Duration, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

fn blockade_params() -> SystemParams {
    SystemParams {
        u: 0.5,
        f: 0.1,
        phi: PI / 12.0,
        ..Default::default()
    }
}

/// Fails an outcome that overran its runtime budget and stamps the timing.
fn within(budget: Duration, elapsed: Duration, out: Outcome) -> Outcome {
    if elapsed <= budget {
        Outcome::new(out.pass, format!("{} [{elapsed:.2?}]", out.detail))
    } else {
        Outcome::new(
            false,
            format!("{} [took {elapsed:.2?}, budget {budget:?}]", out.detail),
        )
    }
}

fn coherent_limit() -> Outcome {
    let p = SystemParams {
        f: 0.1,
        ..Default::default()
    };
    let obs = converged_steady_state(&p, 1e-3).unwrap().observables;
    let g2 = obs.g2.unwrap();
    Outcome::new(
        (obs.mean_photon - 0.04).abs() <= 1e-6 && (g2 - 1.0).abs() <= 1e-3,
        format!("N = {:.9}, g2 = {g2:.6}", obs.mean_photon),
    )
}

fn vacuum_fixed_point() -> Outcome {
    let state = converged_steady_state(&SystemParams::default(), 1e-3).unwrap();
    let vacuum = ComplexMatrix::basis_projector(state.dim, 0, 0);
    let dev = state.rho.matrix().max_abs_diff(&vacuum);
    let n = state.observables.mean_photon;
    Outcome::new(
        dev <= 1e-12 && n < 1e-14,
        format!("max |rho - |0><0|| = {dev:.1e}, N = {n:.1e}"),
    )
}

fn blockade_existence() -> Outcome {
    let g = optimal_g(0.1, PI / 12.0, 0.0, 1.0).unwrap();
    let p = SystemParams {
        g,
        ..blockade_params()
    };
    let g2 = converged_steady_state(&p, 1e-3)
        .unwrap()
        .observables
        .g2
        .unwrap();
    Outcome::new(
        g2 < 1.0 && (g - 0.0273205).abs() < 1e-7,
        format!("G* = {g:.7}, g2 = {g2:.4}"),
    )
}

fn analytic_numeric_agreement() -> Outcome {
    let f_axis = GridAxis::linear(SweepParam::F, 0.005, 0.05, 10).unwrap();
    let g_axis = GridAxis::linear(SweepParam::G, -0.02, 0.02, 10).unwrap();
    let opts = SweepOptions {
        with_analytic: true,
        ..Default::default()
    };
    let result = run_sweep(&blockade_params(), &[f_axis, g_axis], &opts).unwrap();
    let mut worst = (0.0, 0.0, 0.0);
    let mut compared = 0;
    for row in &result.rows {
        let (Some(numeric), Some(analytic)) = (row.lg_g2, row.g2_analytic.filter(|&v| v > 0.0))
        else {
            continue;
        };
        compared += 1;
        let diff = (analytic.log10() - numeric).abs();
        if diff > worst.0 {
            worst = (diff, row.params.f, row.params.g);
        }
    }
    Outcome::new(
        compared > 0 && worst.0 <= 0.2,
        format!(
            "{compared} points, max |lg g2 analytic - numeric| = {:.3} at F = {}, G = {}",
            worst.0, worst.1, worst.2
        ),
    )
}

fn closed_form_matches_linear_solve() -> Outcome {
    let mut rng = common::rng(5);
    let mut worst = 0.0f64;
    let mut skipped = 0;
    for _ in 0..1000 {
        let p = common::broad(&mut rng);
        let (Ok(a), Ok(b)) = (amplitudes_closed_form(&p), amplitudes_linear_solve(&p)) else {
            skipped += 1;
            continue;
        };
        let rel = |x: Complex64, y: Complex64| {
            if x == y {
                0.0
            } else {
                (x - y).norm() / x.norm().max(y.norm())
            }
        };
        worst = worst.max(rel(a.c1, b.c1)).max(rel(a.c2, b.c2));
    }
    Outcome::new(
        worst <= 1e-12 && skipped == 0,
        format!("max relative difference {worst:.1e} over 1000 draws"),
    )
}

fn exact_cancellation() -> Outcome {
    let p = SystemParams {
        delta: 0.5,
        u: 0.5,
        f: 0.1,
        g: 2f64.sqrt() * 0.01,
        phi: PI / 8.0,
        kappa: 1.0,
    };
    let c2 = amplitudes_closed_form(&p).unwrap().c2.norm();
    let (re, im) = blockade_conditions(&p);
    let r = interference_residual(&p).norm();
    Outcome::new(
        c2 <= 1e-15 && re.abs() <= 1e-16 && im.abs() <= 1e-16,
        format!("|C2| = {c2:.1e}, residuals = ({re:.1e}, {im:.1e}), |R| = {r:.1e}"),
    )
}

/// Scan coordinates and photon numbers of one curve of a series preset.
fn curve(result: &SweepResult, series: f64) -> (Vec<f64>, Vec<f64>) {
    result
        .rows
        .iter()
        .filter(|r| r.axis_values[0] == series)
        .map(|r| (r.axis_values[1], r.n_mean.unwrap_or(f64::NAN)))
        .unzip()
}

fn run_preset(id: PresetId) -> SweepResult {
    let p = preset(id);
    run_sweep(&p.base, &p.axes, &SweepOptions::default()).unwrap()
}

fn resonance_peak() -> Outcome {
    let result = run_preset(PresetId::Fig2a);
    let step = result.axes[1].step();
    let mut pass = true;
    let mut peaks = Vec::new();
    for f in [0.1, 0.2, 0.3] {
        let (delta, n) = curve(&result, f);
        let k = common::argmax(&n);
        pass &= delta[k].abs() <= step * (1.0 + 1e-9);
        peaks.push((f, delta[k], n[k]));
    }
    pass &= peaks.windows(2).all(|w| w[1].2 > w[0].2);
    let text: Vec<String> = peaks
        .iter()
        .map(|(f, d, n)| format!("F = {f}: peak at {d:+.2} (N = {n:.4})"))
        .collect();
    Outcome::new(pass, format!("{}; step {step:.2}", text.join(", ")))
}

fn phase_modulation() -> Outcome {
    let result = run_preset(PresetId::Fig2b);
    let step = result.axes[1].step();
    let mut pass = true;
    let mut notes = Vec::new();
    for g in [0.05, 0.1, 0.2] {
        let (phi, n) = curve(&result, g);
        let half = (phi.len() - 1) / 2;
        let dev = (0..=half)
            .map(|i| (n[i] - n[i + half]).abs() / n[i].abs().max(n[i + half].abs()))
            .fold(0.0, f64::max);
        let neg = common::argmax(&n[..=half]);
        let pos = half + common::argmax(&n[half..]);
        let near = |x: f64, target: f64| (x - target).abs() <= step * (1.0 + 1e-9);
        pass &= dev <= 1e-6 && near(phi[neg], -FRAC_PI_2) && near(phi[pos], FRAC_PI_2);
        notes.push(format!(
            "G = {g}: period dev {dev:.1e}, maxima {:+.3} {:+.3}",
            phi[neg], phi[pos]
        ));
    }
    Outcome::new(pass, notes.join(", "))
}

fn peak_drift() -> Outcome {
    let result = run_preset(PresetId::Fig2c);
    let step = result.axes[1].step();
    let (delta, n) = curve(&result, 0.4);
    let peak = delta[common::argmax(&n)];
    Outcome::new(
        peak <= -step * (1.0 - 1e-9),
        format!("G = 0.4: peak at {peak:+.2}, step {step:.2}"),
    )
}

fn kerr_robustness() -> Outcome {
    let us = vec![0.1, 1.0, 2.0, 5.0];
    let axes = [
        GridAxis::list(SweepParam::U, us.clone()).unwrap(),
        GridAxis::linear(SweepParam::G, -0.05, 0.2, 101).unwrap(),
    ];
    let result = run_sweep(&blockade_params(), &axes, &SweepOptions::default()).unwrap();
    let mut idx = Vec::new();
    let mut notes = Vec::new();
    for &u in &us {
        let (g, lg): (Vec<f64>, Vec<f64>) = result
            .rows
            .iter()
            .filter(|r| r.axis_values[0] == u)
            .map(|r| (r.axis_values[1], r.lg_g2.unwrap_or(f64::INFINITY)))
            .unzip();
        let k = common::argmin(&lg);
        idx.push(k);
        notes.push(format!("U = {u}: G = {:.4}", g[k]));
    }
    let spread = idx.iter().max().unwrap() - idx.iter().min().unwrap();
    Outcome::new(
        spread <= 1,
        format!("argmin {}; spread {spread} steps", notes.join(", ")),
    )
}

fn physicality() -> Outcome {
    let mut rng = common::rng(11);
    let mut failures = Vec::new();
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for draw in 0..200 {
        let p = common::broad(&mut rng);
        let state = match converged_steady_state(&p, 1e-3) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("draw {draw} {p:?}: {e}"));
                continue;
            }
        };
        let rho = state.rho.matrix();
        let d = state.dim;
        let mut herm = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                herm = herm.max((rho[(i, j)] - rho[(j, i)].conj()).norm());
            }
        }
        let trace = (rho.trace() - Complex64::new(1.0, 0.0)).norm();
        let min_eig = state.rho.min_eigenvalue();
        // Convergence between the accepted and the preceding truncation.
        let conv = if d > Convergence::default().start_dim {
            let prev = observables(&steady_state(&p, FockSpace::new(d - 6).unwrap()).unwrap());
            match (prev.lg_g2, state.observables.lg_g2) {
                (Some(a), Some(b)) => (a - b).abs(),
                (None, None) => 0.0,
                _ => f64::INFINITY,
            }
        } else {
            0.0
        };
        worst = (
            worst.0.max(herm),
            worst.1.max(trace),
            worst.2.min(min_eig),
            worst.3.max(conv),
        );
        if herm > HERMITIAN_TOL
            || trace > TRACE_TOL
            || min_eig < -PSD_TOL
            || conv.is_nan()
            || conv >= 1e-3
        {
            failures.push(format!("draw {draw} {p:?}"));
        }
    }
    let detail = format!(
        "hermiticity {:.1e}, trace {:.1e}, min eigenvalue {:.1e}, truncation change {:.1e}",
        worst.0, worst.1, worst.2, worst.3
    );
    if failures.is_empty() {
        Outcome::new(true, format!("200 draws: {detail}"))
    } else {
        Outcome::new(
            false,
            format!(
                "{} failing draws ({}); {detail}",
                failures.len(),
                failures[0]
            ),
        )
    }
}

fn oracle_equivalence() -> Outcome {
    const DIM: usize = 10;
    let mut rng = common::rng(3);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let p = common::weak_drive(&mut rng);
        let obs = observables(&steady_state(&p, FockSpace::new(DIM).unwrap()).unwrap());
        let (n, g2) = common::photon_stats(&common::evolve_from_vacuum(&p, DIM, 50.0, 0.01));
        worst = worst
            .max((obs.mean_photon - n).abs())
            .max((obs.g2.unwrap() - g2).abs());
    }
    Outcome::new(
        worst <= 1e-6,
        format!("max observable difference {worst:.1e} over 20 draws"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            "coherent-state limit",
            Duration::from_secs(1),
            coherent_limit,
        ),
        (
            "vacuum fixed point",
            Duration::from_secs(1),
            vacuum_fixed_point,
        ),
        (
            "blockade at the optimal G",
            Duration::from_secs(5),
            blockade_existence,
        ),
        (
            "analytic vs numeric lg g2",
            Duration::from_secs(120),
            analytic_numeric_agreement,
        ),
        (
            "closed-form amplitudes vs linear solve",
            Duration::from_secs(1),
            closed_form_matches_linear_solve,
        ),
        (
            "exact two-path cancellation",
            Duration::MAX,
            exact_cancellation,
        ),
        (
            "resonance peak at zero detuning",
            Duration::from_secs(120),
            resonance_peak,
        ),
        (
            "phase modulation with period pi",
            Duration::MAX,
            phase_modulation,
        ),
        ("peak drift to negative detuning", Duration::MAX, peak_drift),
        (
            "Kerr robustness of the valley",
            Duration::from_secs(600),
            kerr_robustness,
        ),
        ("physicality of steady states", Duration::MAX, physicality),
        ("time-evolution oracle", Duration::MAX, oracle_equivalence),
    ];
    let mut failed = Vec::new();
    for (k, (name, budget, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let out = within(budget, start.elapsed(), out);
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {verdict} {name}: {}", k + 1, out.detail);
        if !out.pass {
            failed.push(k + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 12 criteria pass");
    } else {
        println!("acceptance: failing criteria {failed:?}");
        std::process::exit(1);
    }
}
