//! Parameter grids, named presets and the parallel sweep engine.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{amplitudes_closed_form, g2_analytic, optimal_g};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::steady::{converged_steady_state_with, Convergence, Observables};

/// Sweepable parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParam {
    Delta,
    U,
    G,
    F,
    Phi,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [Self::Delta, Self::U, Self::G, Self::F, Self::Phi];

    pub fn name(self) -> &'static str {
        match self {
            Self::Delta => "delta",
            Self::U => "u",
            Self::G => "g",
            Self::F => "f",
            Self::Phi => "phi",
        }
    }

    pub fn apply(self, p: &mut SystemParams, value: f64) {
        match self {
            Self::Delta => p.delta = value,
            Self::U => p.u = value,
            Self::G => p.g = value,
            Self::F => p.f = value,
            Self::Phi => p.phi = value,
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidAxis(format!("unknown parameter '{s}'")))
    }
}

/// One grid axis. Linear axes hold `count` evenly spaced points from `min`
/// to `max`; list axes hold explicit, strictly increasing values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub param: SweepParam,
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub values: Vec<f64>,
}

impl GridAxis {
    pub fn linear(param: SweepParam, min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidAxis(format!(
                "{param} axis needs at least 2 points, got {count}"
            )));
        }
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(Error::InvalidAxis(format!(
                "{param} axis needs finite min < max, got [{min}, {max}]"
            )));
        }
        let step = (max - min) / (count - 1) as f64;
        let values = (0..count)
            .map(|k| {
                if k + 1 == count {
                    max
                } else {
                    min + step * k as f64
                }
            })
            .collect();
        Ok(Self {
            param,
            min,
            max,
            count,
            values,
        })
    }

    pub fn list(param: SweepParam, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidAxis(format!(
                "{param} axis needs at least 2 points, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidAxis(format!(
                "{param} axis values must be finite and strictly increasing"
            )));
        }
        Ok(Self {
            param,
            min: values[0],
            max: values[values.len() - 1],
            count: values.len(),
            values,
        })
    }

    /// Spacing of a linear axis; the smallest gap for a list axis.
    pub fn step(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Parses `param:min:max:count`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidAxis(format!(
                "expected param:min:max:count, got '{spec}'"
            )));
        }
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidAxis(format!("malformed number '{s}' in '{spec}'")))
        };
        let count = parts[3].trim().parse::<usize>().map_err(|_| {
            Error::InvalidAxis(format!("malformed count '{}' in '{spec}'", parts[3]))
        })?;
        Self::linear(
            parts[0].trim().parse()?,
            num(parts[1])?,
            num(parts[2])?,
            count,
        )
    }
}

/// Named sweep presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PresetId {
    Fig1a,
    Fig1b,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig3e,
    Fig3f,
    Fig4a,
    Fig4b,
    Fig4c,
    Fig4d,
}

impl PresetId {
    pub const ALL: [PresetId; 16] = [
        Self::Fig1a,
        Self::Fig1b,
        Self::Fig2a,
        Self::Fig2b,
        Self::Fig2c,
        Self::Fig2d,
        Self::Fig3a,
        Self::Fig3b,
        Self::Fig3c,
        Self::Fig3d,
        Self::Fig3e,
        Self::Fig3f,
        Self::Fig4a,
        Self::Fig4b,
        Self::Fig4c,
        Self::Fig4d,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Fig1a => "fig1a",
            Self::Fig1b => "fig1b",
            Self::Fig2a => "fig2a",
            Self::Fig2b => "fig2b",
            Self::Fig2c => "fig2c",
            Self::Fig2d => "fig2d",
            Self::Fig3a => "fig3a",
            Self::Fig3b => "fig3b",
            Self::Fig3c => "fig3c",
            Self::Fig3d => "fig3d",
            Self::Fig3e => "fig3e",
            Self::Fig3f => "fig3f",
            Self::Fig4a => "fig4a",
            Self::Fig4b => "fig4b",
            Self::Fig4c => "fig4c",
            Self::Fig4d => "fig4d",
        }
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::UnknownPreset {
                name: s.to_string(),
                valid: Self::ALL.map(PresetId::name).join(", "),
            })
    }
}

pub const GRID_2D: usize = 101;
pub const GRID_1D: usize = 201;

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub base: SystemParams,
    pub axes: Vec<GridAxis>,
}

/// Fixed parameters shared by every preset unless it overrides them:
/// resonance, `U = 0.5`, `F = 0.1`, `φ = π/12`, no parametric drive.
fn reference_params() -> SystemParams {
    SystemParams {
        delta: 0.0,
        u: 0.5,
        g: 0.0,
        f: 0.1,
        phi: PI / 12.0,
        kappa: 1.0,
    }
}

fn fg_plane(base: SystemParams) -> Result<Preset> {
    Ok(Preset {
        base,
        axes: vec![
            GridAxis::linear(SweepParam::F, 0.01, 0.3, GRID_2D)?,
            GridAxis::linear(SweepParam::G, -0.05, 0.2, GRID_2D)?,
        ],
    })
}

fn curves(series: SweepParam, values: Vec<f64>, scan: GridAxis) -> Result<Preset> {
    Ok(Preset {
        base: reference_params(),
        axes: vec![GridAxis::list(series, values)?, scan],
    })
}

pub fn preset(id: PresetId) -> Preset {
    use PresetId::*;
    let detuning = || GridAxis::linear(SweepParam::Delta, -3.0, 3.0, GRID_1D);
    let with = |phi: f64, u: f64| {
        fg_plane(SystemParams {
            phi,
            u,
            ..reference_params()
        })
    };
    let built = match id {
        Fig1a => with(PI / 12.0, 0.5),
        Fig1b => Ok(Preset {
            base: reference_params(),
            axes: vec![
                GridAxis::linear(SweepParam::G, -0.05, 0.05, GRID_2D).unwrap(),
                GridAxis::linear(SweepParam::Phi, 0.0, 2.0 * PI, GRID_2D).unwrap(),
            ],
        }),
        Fig2a => detuning().and_then(|d| curves(SweepParam::F, vec![0.1, 0.2, 0.3], d)),
        Fig2b => GridAxis::linear(SweepParam::Phi, -PI, PI, GRID_1D)
            .and_then(|phi| curves(SweepParam::G, vec![0.05, 0.1, 0.2], phi)),
        Fig2c => detuning().and_then(|d| curves(SweepParam::G, vec![0.05, 0.2, 0.4], d)),
        Fig2d => detuning().and_then(|d| curves(SweepParam::U, vec![0.1, 0.5, 1.0, 2.0], d)),
        Fig3a => with(PI / 12.0, 0.5),
        Fig3b => with(PI / 6.0, 0.5),
        Fig3c => with(PI / 4.0, 0.5),
        Fig3d => with(PI / 3.0, 0.5),
        Fig3e => with(5.0 * PI / 12.0, 0.5),
        Fig3f => with(PI / 2.0, 0.5),
        Fig4a => with(PI / 12.0, 0.1),
        Fig4b => with(PI / 12.0, 1.0),
        Fig4c => with(PI / 12.0, 2.0),
        Fig4d => with(PI / 12.0, 5.0),
    };
    built.expect("preset axes are valid")
}

pub fn preset_by_name(name: &str) -> Result<Preset> {
    Ok(preset(name.parse()?))
}

/// Samples `G*(F)` along an F axis.
pub fn optimal_curve(
    f_axis: &GridAxis,
    phi: f64,
    delta: f64,
    kappa: f64,
) -> Result<Vec<(f64, f64)>> {
    f_axis
        .values
        .iter()
        .map(|&f| optimal_g(f, phi, delta, kappa).map(|g| (f, g)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointStatus {
    #[serde(rename = "ok")]
    Ok,
    #[serde(rename = "FAIL")]
    Fail,
}

/// One evaluated grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis_values: Vec<f64>,
    pub params: SystemParams,
    pub dim: Option<usize>,
    pub n_mean: Option<f64>,
    pub g2: Option<f64>,
    pub lg_n: Option<f64>,
    pub lg_g2: Option<f64>,
    pub g2_analytic: Option<f64>,
    pub status: PointStatus,
    pub message: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub preset: Option<String>,
    pub base: SystemParams,
    pub tol: f64,
    pub max_dim: usize,
    /// Distinct truncation dimensions used, ascending.
    pub dims_used: Vec<usize>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axes: Vec<GridAxis>,
    pub metadata: SweepMetadata,
    pub rows: Vec<SweepRow>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOptions {
    pub convergence: Convergence,
    /// Worker threads; `None` uses the machine's parallelism.
    pub threads: Option<usize>,
    pub with_analytic: bool,
    pub preset: Option<String>,
}

fn evaluate(params: SystemParams, axis_values: Vec<f64>, opts: &SweepOptions) -> SweepRow {
    let g2_analytic = opts
        .with_analytic
        .then(|| {
            amplitudes_closed_form(&params)
                .ok()
                .and_then(|a| g2_analytic(&a))
        })
        .flatten();
    match converged_steady_state_with(&params, opts.convergence) {
        Ok(state) => {
            let Observables {
                mean_photon,
                g2,
                lg_n,
                lg_g2,
                ..
            } = state.observables;
            SweepRow {
                axis_values,
                params,
                dim: Some(state.dim),
                n_mean: Some(mean_photon),
                g2,
                lg_n,
                lg_g2,
                g2_analytic,
                status: PointStatus::Ok,
                message: None,
            }
        }
        Err(e) => SweepRow {
            axis_values,
            params,
            dim: None,
            n_mean: None,
            g2: None,
            lg_n: None,
            lg_g2: None,
            g2_analytic,
            status: PointStatus::Fail,
            message: Some(e.to_string()),
        },
    }
}

/// Evaluates every grid point, row-major over `(axes[0], axes[1])`.
/// Per-point failures are recorded in the row, never propagated.
pub fn run_sweep(
    base: &SystemParams,
    axes: &[GridAxis],
    opts: &SweepOptions,
) -> Result<SweepResult> {
    base.validate()?;
    if axes.is_empty() || axes.len() > 2 {
        return Err(Error::InvalidAxis(format!(
            "a sweep takes one or two axes, got {}",
            axes.len()
        )));
    }
    if axes.len() == 2 && axes[0].param == axes[1].param {
        return Err(Error::InvalidAxis(format!(
            "both axes sweep '{}'",
            axes[0].param
        )));
    }
    for axis in axes {
        if axis.values.len() < 2 {
            return Err(Error::InvalidAxis(format!(
                "{} axis needs at least 2 points",
                axis.param
            )));
        }
    }

    let points: Vec<Vec<f64>> = match axes {
        [a] => a.values.iter().map(|&v| vec![v]).collect(),
        [a, b] => a
            .values
            .iter()
            .flat_map(|&x| b.values.iter().map(move |&y| vec![x, y]))
            .collect(),
        _ => unreachable!(),
    };

    let eval_all = || -> Vec<SweepRow> {
        points
            .par_iter()
            .map(|vals| {
                let mut p = *base;
                for (axis, &v) in axes.iter().zip(vals) {
                    axis.param.apply(&mut p, v);
                }
                evaluate(p, vals.clone(), opts)
            })
            .collect()
    };
    let rows = match opts.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?
            .install(eval_all),
        None => eval_all(),
    };

    let mut dims_used: Vec<usize> = rows.iter().filter_map(|r| r.dim).collect();
    dims_used.sort_unstable();
    dims_used.dedup();
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    Ok(SweepResult {
        axes: axes.to_vec(),
        metadata: SweepMetadata {
            preset: opts.preset.clone(),
            base: *base,
            tol: opts.convergence.tol,
            max_dim: opts.convergence.max_dim,
            dims_used,
            timestamp,
        },
        rows,
    })
}
