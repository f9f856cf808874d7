//! Interchangeable routes to the kinetic steady state.

use std::sync::Arc;

use crate::error::Result;
use crate::kinetics::{
    build_rate_matrix, closed_form_with_factors, correction_factors, relax, steady_state_numeric,
    CorrectionFactors, ManifoldPopulations,
};
use crate::params::SystemParams;
use crate::registry::{Named, Registry};

pub trait SteadyStateSolver: Named + Send + Sync {
    fn solve(&self, params: &SystemParams, corrected: bool) -> Result<ManifoldPopulations>;
}

/// Normalized null vector of the generator. The reference route.
#[derive(Debug, Default, Clone, Copy)]
pub struct NullSpace;

impl Named for NullSpace {
    fn name(&self) -> &'static str {
        "null-space"
    }
}

impl SteadyStateSolver for NullSpace {
    fn solve(&self, params: &SystemParams, corrected: bool) -> Result<ManifoldPopulations> {
        steady_state_numeric(&build_rate_matrix(params, corrected))
    }
}

/// Analytic populations; the uncorrected model is the α = β = 1 case.
#[derive(Debug, Default, Clone, Copy)]
pub struct ClosedForm;

impl Named for ClosedForm {
    fn name(&self) -> &'static str {
        "closed-form"
    }
}

impl SteadyStateSolver for ClosedForm {
    fn solve(&self, params: &SystemParams, corrected: bool) -> Result<ManifoldPopulations> {
        let factors = if corrected {
            correction_factors(params)
        } else {
            CorrectionFactors::NONE
        };
        closed_form_with_factors(params, factors)
    }
}

/// Runge-Kutta relaxation from the ground state.
#[derive(Debug, Clone, Copy)]
pub struct Evolution {
    /// Step in units of 1/Γ.
    pub dt: f64,
    /// Give-up time in units of 1/Γ.
    pub t_max: f64,
}

impl Default for Evolution {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 1e5,
        }
    }
}

impl Named for Evolution {
    fn name(&self) -> &'static str {
        "evolution"
    }
}

impl SteadyStateSolver for Evolution {
    fn solve(&self, params: &SystemParams, corrected: bool) -> Result<ManifoldPopulations> {
        let m = build_rate_matrix(params, corrected);
        // RK4 is stable for |λ| dt < 2.78; keep well inside on the fastest rate.
        let fastest = m.generator().diagonal().amax().max(params.gamma());
        let dt = (self.dt / params.gamma()).min(1.0 / fastest);
        relax(
            &m,
            &ManifoldPopulations::ground(),
            dt,
            self.t_max / params.gamma(),
        )
    }
}

pub fn steady_state_solvers() -> Registry<dyn SteadyStateSolver> {
    let mut reg: Registry<dyn SteadyStateSolver> = Registry::new("steady-state solver");
    reg.register(Arc::new(NullSpace))
        .register(Arc::new(ClosedForm))
        .register(Arc::new(Evolution::default()));
    reg
}
