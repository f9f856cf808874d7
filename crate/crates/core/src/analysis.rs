//! Parameter sweeps over (Π, K), the maximum concurrence over a box and the
//! smallest nonlinearity η at which that maximum turns positive.
//!
//! All rates here are absolute: they share the unit of `gamma`.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{concurrence_margin, ConcurrenceMethod};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::solver::{NullSpace, SteadyStateSolver};

/// Concurrence above this counts as nonzero.
pub const POSITIVITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Log,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub spacing: Spacing,
}

impl Axis {
    pub fn new(min: f64, max: f64, count: usize, spacing: Spacing) -> Result<Self> {
        let axis = Self {
            min,
            max,
            count,
            spacing,
        };
        axis.validate()?;
        Ok(axis)
    }

    pub fn log(min: f64, max: f64, count: usize) -> Result<Self> {
        Self::new(min, max, count, Spacing::Log)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min > 0.0 && self.min.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "axis min",
                value: self.min,
                reason: "must be positive",
            });
        }
        if !(self.max > self.min && self.max.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "axis max",
                value: self.max,
                reason: "must exceed the axis min",
            });
        }
        if self.count < 2 {
            return Err(Error::InvalidParameter {
                name: "axis count",
                value: self.count as f64,
                reason: "need at least 2 samples",
            });
        }
        Ok(())
    }

    /// Sample points, endpoints included exactly.
    pub fn values(&self) -> Vec<f64> {
        let last = self.count - 1;
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    return self.min;
                }
                if i == last {
                    return self.max;
                }
                let t = i as f64 / last as f64;
                match self.spacing {
                    Spacing::Linear => self.min + t * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub pump: Axis,
    pub k: Axis,
    pub eta: f64,
    pub gamma: f64,
}

impl Default for SweepSpec {
    /// Π, K ∈ [0.05, 20]Γ, 200 × 200 log-spaced, η = 10.
    fn default() -> Self {
        let axis = Axis {
            min: 0.05,
            max: 20.0,
            count: 200,
            spacing: Spacing::Log,
        };
        Self {
            pump: axis,
            k: axis,
            eta: 10.0,
            gamma: 1.0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        self.pump.validate()?;
        self.k.validate()?;
        SystemParams::new(self.gamma, self.pump.min, self.k.min, self.eta)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub pump_values: Vec<f64>,
    pub k_values: Vec<f64>,
    /// `grid[i][j]` is the concurrence at `pump_values[i]`, `k_values[j]`.
    pub grid: Vec<Vec<f64>>,
    pub max_value: f64,
    pub argmax: (f64, f64),
}

/// Concurrence over the grid with the reference solver and the closed-form
/// concurrence.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    sweep_with(spec, &NullSpace, &crate::entanglement::ClosedFormRoute)
}

pub fn sweep_with(
    spec: &SweepSpec,
    solver: &dyn SteadyStateSolver,
    method: &dyn ConcurrenceMethod,
) -> Result<SweepResult> {
    spec.validate()?;
    let pump_values = spec.pump.values();
    let k_values = spec.k.values();
    let nk = k_values.len();

    let flat: Vec<f64> = (0..pump_values.len() * nk)
        .into_par_iter()
        .map(|idx| {
            let (pump, k) = (pump_values[idx / nk], k_values[idx % nk]);
            let eval = || -> Result<f64> {
                let params = SystemParams::new(spec.gamma, pump, k, spec.eta)?;
                let pops = solver.solve(&params, true)?;
                Ok(method.concurrence(&pops)?.value)
            };
            eval().map_err(|e| e.at_grid_point(pump, k))
        })
        .collect::<Result<_>>()?;

    let (best, max_value) = flat
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &c)| if c > acc.1 { (i, c) } else { acc });
    let grid = flat.chunks(nk).map(<[f64]>::to_vec).collect();
    Ok(SweepResult {
        spec: *spec,
        argmax: (pump_values[best / nk], k_values[best % nk]),
        pump_values,
        k_values,
        grid,
        max_value,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            _ => Err(Error::UnsupportedFormat(s.to_owned())),
        }
    }
}

/// 12 significant digits; negative zero prints as zero.
pub fn format_number(x: f64) -> String {
    format!("{:.11e}", x + 0.0)
}

#[derive(Serialize)]
struct JsonTable<'a> {
    spec: &'a SweepSpec,
    pump: &'a [f64],
    k: &'a [f64],
    concurrence: &'a [Vec<f64>],
    max_value: f64,
    argmax: JsonPoint,
}

#[derive(Serialize)]
struct JsonPoint {
    pump: f64,
    k: f64,
}

/// CSV rows `pi,k,concurrence` (pump-major) or a JSON document echoing the spec.
pub fn emit_table(result: &SweepResult, format: TableFormat) -> Result<Vec<u8>> {
    match format {
        TableFormat::Csv => {
            let mut out = String::from("pi,k,concurrence\n");
            for (pump, row) in result.pump_values.iter().zip(&result.grid) {
                for (k, c) in result.k_values.iter().zip(row) {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        format_number(*pump),
                        format_number(*k),
                        format_number(*c)
                    );
                }
            }
            Ok(out.into_bytes())
        }
        TableFormat::Json => {
            let doc = JsonTable {
                spec: &result.spec,
                pump: &result.pump_values,
                k: &result.k_values,
                concurrence: &result.grid,
                max_value: result.max_value,
                argmax: JsonPoint {
                    pump: result.argmax.0,
                    k: result.argmax.1,
                },
            };
            let mut bytes = serde_json::to_vec_pretty(&doc).expect("serializable");
            bytes.push(b'\n');
            Ok(bytes)
        }
    }
}

/// Box of (Π, K) searched for the maximum concurrence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub pump_min: f64,
    pub pump_max: f64,
    pub k_min: f64,
    pub k_max: f64,
}

impl Default for SearchBounds {
    /// Π, K ∈ [0.05, 10] in units of Γ.
    fn default() -> Self {
        Self {
            pump_min: 0.05,
            pump_max: 10.0,
            k_min: 0.05,
            k_max: 10.0,
        }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, lo, hi) in [
            ("pump bounds", self.pump_min, self.pump_max),
            ("k bounds", self.k_min, self.k_max),
        ] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    value: lo,
                    reason: "need 0 < min <= max",
                });
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            pump_min: self.pump_min * factor,
            pump_max: self.pump_max * factor,
            k_min: self.k_min * factor,
            k_max: self.k_max * factor,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    /// Points per axis of the initial log grid.
    pub coarse: usize,
    /// Points per axis of each refinement window.
    pub refine: usize,
    /// Stop once the window half-width in ln Π and ln K is below this.
    pub rel_tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            coarse: 41,
            refine: 9,
            rel_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxConcurrence {
    /// Largest concurrence found (≥ 0).
    pub value: f64,
    /// Signed margin at the argmax; negative when the surface is flat zero.
    pub margin: f64,
    pub pump: f64,
    pub k: f64,
    /// The argmax sits on an edge of the search box.
    pub on_boundary: bool,
}

impl MaxConcurrence {
    pub fn is_positive(&self) -> bool {
        self.value > POSITIVITY_TOL
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if hi <= lo || n < 2 {
        return vec![lo];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Maximum of the signed concurrence margin over the box: a coarse log grid,
/// then repeated halving of a window around the incumbent. Derivative-free;
/// the clamped surface has a kink at C = 0.
pub fn max_concurrence(eta: f64, gamma: f64, bounds: &SearchBounds) -> Result<MaxConcurrence> {
    max_concurrence_with(eta, gamma, bounds, &SearchOptions::default(), &NullSpace)
}

pub fn max_concurrence_with(
    eta: f64,
    gamma: f64,
    bounds: &SearchBounds,
    options: &SearchOptions,
    solver: &dyn SteadyStateSolver,
) -> Result<MaxConcurrence> {
    bounds.validate()?;
    SystemParams::new(gamma, bounds.pump_min, bounds.k_min, eta)?;
    let margin_at = |ln_pump: f64, ln_k: f64| -> Result<f64> {
        let pump = ln_pump.exp().clamp(bounds.pump_min, bounds.pump_max);
        let k = ln_k.exp().clamp(bounds.k_min, bounds.k_max);
        let params = SystemParams::new(gamma, pump, k, eta)?;
        solver
            .solve(&params, true)
            .map(|p| concurrence_margin(&p))
            .map_err(|e| e.at_grid_point(pump, k))
    };
    let best_of = |us: &[f64], vs: &[f64], incumbent: (f64, f64, f64)| -> Result<(f64, f64, f64)> {
        let points: Vec<(f64, f64)> = us.iter().flat_map(|&u| vs.iter().map(move |&v| (u, v))).collect();
        let values = points
            .par_iter()
            .map(|&(u, v)| margin_at(u, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(points
            .iter()
            .zip(values)
            .fold(incumbent, |acc, (&(u, v), m)| if m > acc.2 { (u, v, m) } else { acc }))
    };

    let (u_lo, u_hi) = (bounds.pump_min.ln(), bounds.pump_max.ln());
    let (v_lo, v_hi) = (bounds.k_min.ln(), bounds.k_max.ln());
    let n = options.coarse.max(2);
    let mut best = best_of(
        &log_grid(u_lo, u_hi, n),
        &log_grid(v_lo, v_hi, n),
        (u_lo, v_lo, f64::NEG_INFINITY),
    )?;

    let mut hu = (u_hi - u_lo) / (n - 1) as f64;
    let mut hv = (v_hi - v_lo) / (n - 1) as f64;
    let m = options.refine.max(3);
    while hu.max(hv) > options.rel_tol {
        let us = log_grid((best.0 - hu).max(u_lo), (best.0 + hu).min(u_hi), m);
        let vs = log_grid((best.1 - hv).max(v_lo), (best.1 + hv).min(v_hi), m);
        best = best_of(&us, &vs, best)?;
        hu *= 0.5;
        hv *= 0.5;
    }

    let pump = best.0.exp().clamp(bounds.pump_min, bounds.pump_max);
    let k = best.1.exp().clamp(bounds.k_min, bounds.k_max);
    let edge = |x: f64, lo: f64, hi: f64| (x - lo).abs() <= 1e-9 * lo || (hi - x).abs() <= 1e-9 * hi;
    Ok(MaxConcurrence {
        value: best.2.max(0.0),
        margin: best.2,
        pump,
        k,
        on_boundary: edge(pump, bounds.pump_min, bounds.pump_max)
            || edge(k, bounds.k_min, bounds.k_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdOptions {
    /// Lower bracket end; must show no entanglement.
    pub eta_lo: f64,
    /// Upper bracket end; must show entanglement.
    pub eta_hi: f64,
    pub search: SearchOptions,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        Self {
            eta_lo: 1.0,
            eta_hi: 20.0,
            search: SearchOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    /// Midpoint of the final bracket.
    pub eta: f64,
    pub bracket: (f64, f64),
    /// Where the maximum sits at the upper end of the final bracket.
    pub pump: f64,
    pub k: f64,
    pub value_at_upper: f64,
    pub iterations: usize,
}

/// Smallest η with a positive maximum concurrence over `bounds`, by bisection.
pub fn eta_threshold(gamma: f64, bounds: &SearchBounds, tol: f64) -> Result<Threshold> {
    eta_threshold_with(gamma, bounds, tol, &ThresholdOptions::default(), &NullSpace)
}

pub fn eta_threshold_with(
    gamma: f64,
    bounds: &SearchBounds,
    tol: f64,
    options: &ThresholdOptions,
    solver: &dyn SteadyStateSolver,
) -> Result<Threshold> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            reason: "must be > 0",
        });
    }
    let search = |eta: f64| max_concurrence_with(eta, gamma, bounds, &options.search, solver);
    let (mut lo, mut hi) = (options.eta_lo, options.eta_hi);
    let at_lo = search(lo)?;
    let mut at_hi = search(hi)?;
    if at_lo.is_positive() || !at_hi.is_positive() {
        return Err(Error::Bracket {
            eta_lo: lo,
            c_lo: at_lo.value,
            eta_hi: hi,
            c_hi: at_hi.value,
        });
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let at_mid = search(mid)?;
        if at_mid.is_positive() {
            hi = mid;
            at_hi = at_mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(Threshold {
        eta: 0.5 * (lo + hi),
        bracket: (lo, hi),
        pump: at_hi.pump,
        k: at_hi.k,
        value_at_upper: at_hi.value,
        iterations,
    })
}
