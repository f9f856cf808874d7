//! Rate equations between dressed-state manifolds.
//!
//! The kinetic state is the population vector (P_g, P_s1, P_s2, P_o'2):
//! the ground state, the symmetric n=1 pair χ±, the symmetric n=2 pair φ±
//! and φ_o'. The dark states χ_o and φ_o are decoupled and carried along as
//! frozen values.
//!
//! Population that the pump pushes into n=3 is accounted for by the factors
//! α and β, the fractions of the n>=2 symmetric and o' ladders that remain in
//! n=2. The corrected generator scales the decay out of P_s2 and P_o'2 by
//! these factors; the uncorrected one is the same matrix with α = β = 1.

use nalgebra::{Matrix4, Vector4, SVD};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{rk4_step, step_sizes};
use crate::params::SystemParams;

pub const POPULATION_TOL: f64 = 1e-12;
const COLUMN_SUM_TOL: f64 = 1e-13;
const RESIDUAL_TOL: f64 = 1e-12;
const NULL_SINGULAR_TOL: f64 = 1e-12;
const EXCURSION_TOL: f64 = 1e-6;
/// Relaxation is declared converged when |dP/dt| drops below this.
pub const RELAXED_RATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldPopulations {
    p_g: f64,
    p_s1: f64,
    p_s2: f64,
    p_oprime2: f64,
    p_dark1: f64,
    p_dark2: f64,
}

fn validate(values: &[f64], tol: f64) -> Result<()> {
    for &v in values {
        if !v.is_finite() || v < -tol || v > 1.0 + tol {
            return Err(Error::InvalidPopulations(format!("entry {v} outside [0, 1]")));
        }
    }
    let total: f64 = values.iter().sum();
    if (total - 1.0).abs() > tol.max(POPULATION_TOL) {
        return Err(Error::InvalidPopulations(format!("total {total} differs from 1")));
    }
    Ok(())
}

impl ManifoldPopulations {
    /// Populations with the dark states empty.
    pub fn new(p_g: f64, p_s1: f64, p_s2: f64, p_oprime2: f64) -> Result<Self> {
        Self::with_dark(p_g, p_s1, p_s2, p_oprime2, 0.0, 0.0)
    }

    pub fn with_dark(
        p_g: f64,
        p_s1: f64,
        p_s2: f64,
        p_oprime2: f64,
        p_dark1: f64,
        p_dark2: f64,
    ) -> Result<Self> {
        validate(&[p_g, p_s1, p_s2, p_oprime2, p_dark1, p_dark2], POPULATION_TOL)?;
        Ok(Self {
            p_g,
            p_s1,
            p_s2,
            p_oprime2,
            p_dark1,
            p_dark2,
        })
    }

    pub fn ground() -> Self {
        Self {
            p_g: 1.0,
            p_s1: 0.0,
            p_s2: 0.0,
            p_oprime2: 0.0,
            p_dark1: 0.0,
            p_dark2: 0.0,
        }
    }

    fn from_kinetic(v: &Vector4<f64>, dark: (f64, f64)) -> Self {
        Self {
            p_g: v[0],
            p_s1: v[1],
            p_s2: v[2],
            p_oprime2: v[3],
            p_dark1: dark.0,
            p_dark2: dark.1,
        }
    }

    pub fn p_g(&self) -> f64 {
        self.p_g
    }
    pub fn p_s1(&self) -> f64 {
        self.p_s1
    }
    pub fn p_s2(&self) -> f64 {
        self.p_s2
    }
    pub fn p_oprime2(&self) -> f64 {
        self.p_oprime2
    }
    pub fn p_dark1(&self) -> f64 {
        self.p_dark1
    }
    pub fn p_dark2(&self) -> f64 {
        self.p_dark2
    }

    /// (P_g, P_s1, P_s2, P_o'2)
    pub fn kinetic(&self) -> Vector4<f64> {
        Vector4::new(self.p_g, self.p_s1, self.p_s2, self.p_oprime2)
    }

    pub fn dark(&self) -> (f64, f64) {
        (self.p_dark1, self.p_dark2)
    }

    pub fn total(&self) -> f64 {
        self.kinetic().sum() + self.p_dark1 + self.p_dark2
    }

    pub fn has_dark_population(&self) -> bool {
        self.p_dark1 != 0.0 || self.p_dark2 != 0.0
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.kinetic() - other.kinetic())
            .amax()
            .max((self.p_dark1 - other.p_dark1).abs())
            .max((self.p_dark2 - other.p_dark2).abs())
    }
}

/// Fractions of the n>=2 populations that reside in n=2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrectionFactors {
    pub alpha: f64,
    pub beta: f64,
}

impl CorrectionFactors {
    pub const NONE: Self = Self {
        alpha: 1.0,
        beta: 1.0,
    };
}

pub fn correction_factors(params: &SystemParams) -> CorrectionFactors {
    let (g, p, k, eta) = (params.gamma(), params.pump(), params.k1(), params.eta());
    if p == 0.0 {
        return CorrectionFactors::NONE;
    }
    let sym = 6.0 * g + k * (3.0 * eta + 1.0);
    let opr = 2.0 * g + k * (eta + 1.0);
    CorrectionFactors {
        alpha: sym / (sym + 4.0 * p),
        beta: opr / (opr + 2.0 * p),
    }
}

/// Generator of dP/dt = M P on (P_g, P_s1, P_s2, P_o'2).
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    generator: Matrix4<f64>,
    params: Option<SystemParams>,
    factors: CorrectionFactors,
}

impl RateMatrix {
    /// Wraps a user-supplied generator after checking that columns sum to
    /// zero and off-diagonal rates are non-negative.
    pub fn from_generator(generator: Matrix4<f64>) -> Result<Self> {
        let scale = generator.amax().max(1.0);
        for (j, col) in generator.column_iter().enumerate() {
            let s = col.sum();
            if s.abs() > COLUMN_SUM_TOL * scale {
                return Err(Error::InvalidGenerator(format!("column {j} sums to {s:e}")));
            }
        }
        for i in 0..4 {
            for j in 0..4 {
                if i != j && generator[(i, j)] < 0.0 {
                    return Err(Error::InvalidGenerator(format!(
                        "negative rate {} at ({i}, {j})",
                        generator[(i, j)]
                    )));
                }
            }
        }
        Ok(Self {
            generator,
            params: None,
            factors: CorrectionFactors::NONE,
        })
    }

    pub fn generator(&self) -> &Matrix4<f64> {
        &self.generator
    }

    pub fn params(&self) -> Option<&SystemParams> {
        self.params.as_ref()
    }

    pub fn factors(&self) -> CorrectionFactors {
        self.factors
    }

    pub fn derivative(&self, p: &Vector4<f64>) -> Vector4<f64> {
        self.generator * p
    }
}

/// Generator with explicit truncation factors.
pub fn rate_matrix_with_factors(params: &SystemParams, factors: CorrectionFactors) -> RateMatrix {
    let (g, p, k, eta) = (params.gamma(), params.pump(), params.k1(), params.eta());
    let CorrectionFactors { alpha, beta } = factors;

    let s1_out = g + k / 2.0;
    let s2_out = alpha * (1.5 * g + 0.25 * (eta + 2.0) * k);
    let o2_out = beta * (g + 0.5 * eta * k);

    #[rustfmt::skip]
    let generator = Matrix4::new(
        -p,  s1_out,              0.0,     0.0,
         p, -s1_out - p,          s2_out,  o2_out,
        0.0, 0.75 * p,           -s2_out,  0.0,
        0.0, 0.25 * p,            0.0,    -o2_out,
    );
    RateMatrix {
        generator,
        params: Some(*params),
        factors,
    }
}

/// Corrected (with α, β) or uncorrected (α = β = 1) generator.
pub fn build_rate_matrix(params: &SystemParams, corrected: bool) -> RateMatrix {
    let factors = if corrected {
        correction_factors(params)
    } else {
        CorrectionFactors::NONE
    };
    rate_matrix_with_factors(params, factors)
}

/// Dimension of the numerical null space of the generator.
pub fn null_space_dimension(m: &RateMatrix) -> Result<usize> {
    if m.generator.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidGenerator("non-finite entry".into()));
    }
    let sv = SVD::try_new(m.generator, false, false, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::InvalidGenerator("singular value decomposition did not converge".into()))?
        .singular_values;
    let scale = sv.max();
    if scale == 0.0 {
        return Ok(4);
    }
    Ok(sv.iter().filter(|&&s| s <= NULL_SINGULAR_TOL * scale).count())
}

/// Normalized null vector of the generator.
pub fn steady_state_numeric(m: &RateMatrix) -> Result<ManifoldPopulations> {
    let dim = null_space_dimension(m)?;
    if dim != 1 {
        return Err(Error::DegenerateSteadyState { dimension: dim });
    }
    let mut a = m.generator;
    a.row_mut(0).fill(1.0);
    let rhs = Vector4::new(1.0, 0.0, 0.0, 0.0);
    let v = a
        .lu()
        .solve(&rhs)
        .ok_or(Error::DegenerateSteadyState { dimension: 2 })?;
    let v = v.map(|x| if x < 0.0 && x > -POPULATION_TOL { 0.0 } else { x });

    let residual = (m.generator * v).norm();
    let tolerance = RESIDUAL_TOL * m.generator.amax().max(1.0);
    if residual > tolerance {
        return Err(Error::Residual {
            residual,
            tolerance,
        });
    }
    let pops = ManifoldPopulations::from_kinetic(&v, (0.0, 0.0));
    validate(&[v[0], v[1], v[2], v[3]], POPULATION_TOL)?;
    Ok(pops)
}

/// Unnormalized steady-state weights and their normalizing polynomial.
fn closed_form_terms(params: &SystemParams, f: CorrectionFactors) -> (Vector4<f64>, f64) {
    let (g, p, k, eta) = (params.gamma(), params.pump(), params.k1(), params.eta());
    let CorrectionFactors { alpha: a, beta: b } = f;
    let two_g_eta_k = 2.0 * g + eta * k;
    let six_g = 6.0 * g + (2.0 + eta) * k;

    let weights = Vector4::new(
        b * a * (2.0 * g + k) * two_g_eta_k * six_g,
        2.0 * p * b * a * two_g_eta_k * six_g,
        6.0 * p * p * b * two_g_eta_k,
        p * p * a * six_g,
    );

    let (p2, k2, k3, g2, g3, e2) = (p * p, k * k, k * k * k, g * g, g * g * g, eta * eta);
    let polynomial = 6.0 * b * eta * p2 * k
        + 12.0 * b * g * p2
        + 6.0 * p2 * g * a
        + p2 * a * eta * k
        + 2.0 * p2 * a * k
        + 24.0 * a * b * g3
        + 16.0 * a * b * eta * g2 * k
        + 20.0 * a * b * g2 * k
        + 2.0 * a * b * g * e2 * k2
        + 12.0 * a * b * g * eta * k2
        + 4.0 * a * b * g * k2
        + a * b * e2 * k3
        + 2.0 * a * b * eta * k3
        + 24.0 * a * b * p * g2
        + 16.0 * a * b * eta * g * p * k
        + 8.0 * a * b * g * p * k
        + 2.0 * a * b * p * e2 * k2
        + 4.0 * a * b * eta * p * k2;
    (weights, polynomial)
}

/// Analytic steady state of the corrected rate equations.
pub fn steady_state_closed_form(params: &SystemParams) -> Result<ManifoldPopulations> {
    closed_form_with_factors(params, correction_factors(params))
}

pub(crate) fn closed_form_with_factors(
    params: &SystemParams,
    factors: CorrectionFactors,
) -> Result<ManifoldPopulations> {
    let (weights, polynomial) = closed_form_terms(params, factors);
    if !(polynomial > 0.0 && polynomial.is_finite()) {
        return Err(Error::ZeroNormalization);
    }
    let normalization = 1.0 / polynomial;
    Ok(ManifoldPopulations::from_kinetic(
        &(weights * normalization),
        (0.0, 0.0),
    ))
}

/// The normalizing polynomial minus the sum of the unnormalized weights;
/// zero when the two agree.
pub fn closed_form_normalization_defect(params: &SystemParams) -> f64 {
    let (w, poly) = closed_form_terms(params, correction_factors(params));
    (poly - w.sum()) / poly
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub time: f64,
    pub populations: ManifoldPopulations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has the initial sample")
    }
}

fn check_time_step(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "must be > 0",
        });
    }
    Ok(())
}

fn guarded_step(m: &RateMatrix, p: &Vector4<f64>, dt: f64, time: f64) -> Result<Vector4<f64>> {
    let rhs = |y: &Vector4<f64>| m.generator * y;
    let next = rk4_step(&rhs, p, dt);
    if let Some(&bad) = next
        .iter()
        .find(|&&x| !(-EXCURSION_TOL..=1.0 + EXCURSION_TOL).contains(&x))
    {
        return Err(Error::StepTooLarge {
            dt,
            time,
            value: bad,
        });
    }
    Ok(next)
}

/// Integrates the rate equations from `initial` up to `t_final`, recording
/// every step. Dark-state populations are copied through unchanged.
pub fn evolve(
    m: &RateMatrix,
    initial: &ManifoldPopulations,
    t_final: f64,
    dt: f64,
) -> Result<Trajectory> {
    check_time_step(dt)?;
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_final",
            value: t_final,
            reason: "must be >= 0",
        });
    }
    let dark = initial.dark();
    let mut p = initial.kinetic();
    let mut time = 0.0;
    let mut samples = vec![Sample {
        time,
        populations: *initial,
    }];
    for h in step_sizes(t_final, dt) {
        p = guarded_step(m, &p, h, time)?;
        time += h;
        samples.push(Sample {
            time,
            populations: ManifoldPopulations::from_kinetic(&p, dark),
        });
    }
    Ok(Trajectory { samples })
}

/// Integrates until |dP/dt| < [`RELAXED_RATE`] or `t_max` is reached.
pub fn relax(
    m: &RateMatrix,
    initial: &ManifoldPopulations,
    dt: f64,
    t_max: f64,
) -> Result<ManifoldPopulations> {
    check_time_step(dt)?;
    let mut p = initial.kinetic();
    let mut time = 0.0;
    loop {
        let rate = m.derivative(&p).norm();
        if rate < RELAXED_RATE {
            return Ok(ManifoldPopulations::from_kinetic(&p, initial.dark()));
        }
        if time >= t_max {
            return Err(Error::NoRelaxation { t_max, rate });
        }
        p = guarded_step(m, &p, dt, time)?;
        time += dt;
    }
}
