//! Two-atom steady-state density matrix and Wootters concurrence.

use std::sync::{Arc, OnceLock};

use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::density::{TwoQubitDensity, PSD_TOL};
use crate::error::{Error, Result};
use crate::kinetics::{ManifoldPopulations, POPULATION_TOL};
use crate::model::{dressed_state, manifold_mixture, trace_out_field, DressedLabel};
use crate::registry::{Named, Registry};

/// Imaginary parts and negative values of the spectrum of ρρ̃ beyond this are errors.
pub const SPECTRUM_TOL: f64 = 1e-10;
/// Eigenvalues of ρρ̃ below this are set to zero before the square root,
/// where roundoff on an exact zero would otherwise grow to ~1e-8.
pub const EIGENVALUE_FLOOR: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    General,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// Square roots of the eigenvalues of ρρ̃, descending.
    pub lambdas: [f64; 4],
    pub method: Method,
}

/// Reduced density matrices of the four kinetic components.
pub struct ManifoldDensities {
    pub ground: TwoQubitDensity,
    pub s1: TwoQubitDensity,
    pub s2: TwoQubitDensity,
    pub oprime2: TwoQubitDensity,
    pub dark1: TwoQubitDensity,
    pub dark2: TwoQubitDensity,
}

pub fn manifold_densities() -> &'static ManifoldDensities {
    static CELL: OnceLock<ManifoldDensities> = OnceLock::new();
    CELL.get_or_init(|| {
        use DressedLabel::*;
        let pure = |n, l| trace_out_field(&dressed_state(n, l).expect("label exists"));
        ManifoldDensities {
            ground: pure(0, Ground),
            s1: manifold_mixture(1, &[(ChiPlus, 0.5), (ChiMinus, 0.5)]).expect("valid mixture"),
            s2: manifold_mixture(2, &[(PhiPlus, 0.5), (PhiMinus, 0.5)]).expect("valid mixture"),
            oprime2: pure(2, PhiOPrime),
            dark1: pure(1, ChiO),
            dark2: pure(2, PhiO),
        }
    })
}

/// ρ = P_g ρ_g + P_s1 ρ_s1 + P_s2 ρ_s2 + P_o'2 ρ_o'2.
///
/// Nonzero dark-state populations are rejected; see
/// [`assemble_rho_atoms_with_dark`].
pub fn assemble_rho_atoms(pops: &ManifoldPopulations) -> Result<TwoQubitDensity> {
    if pops.has_dark_population() {
        let (dark1, dark2) = pops.dark();
        return Err(Error::DarkPopulation { dark1, dark2 });
    }
    assemble(pops)
}

/// Like [`assemble_rho_atoms`], but folds dark-state populations in with the
/// reduced matrices of χ_o and φ_o (both the atomic singlet). The rate model
/// never populates these states; this is an extension for injected initial
/// conditions.
pub fn assemble_rho_atoms_with_dark(pops: &ManifoldPopulations) -> Result<TwoQubitDensity> {
    assemble(pops)
}

fn assemble(pops: &ManifoldPopulations) -> Result<TwoQubitDensity> {
    let total = pops.total();
    if (total - 1.0).abs() > POPULATION_TOL {
        return Err(Error::InvalidPopulations(format!("total {total} differs from 1")));
    }
    let d = manifold_densities();
    TwoQubitDensity::mixture([
        (pops.p_g(), &d.ground),
        (pops.p_s1(), &d.s1),
        (pops.p_s2(), &d.s2),
        (pops.p_oprime2(), &d.oprime2),
        (pops.p_dark1(), &d.dark1),
        (pops.p_dark2(), &d.dark2),
    ])
}

fn concurrence_from_sqrt_spectrum(lambdas: [f64; 4]) -> f64 {
    (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0)
}

/// Wootters concurrence from the spectrum of ρρ̃.
pub fn concurrence_general(rho: &TwoQubitDensity) -> Result<ConcurrenceResult> {
    let min = rho.min_eigenvalue();
    if min < -PSD_TOL {
        return Err(Error::InvalidDensity {
            invariant: "positive semidefinite",
            deviation: -min,
        });
    }
    let product: Matrix4<Complex64> = rho.elements() * rho.spin_flip();
    let (_, t) = Schur::new(product).unpack();

    let mut sqrt_ev = [0.0; 4];
    for (i, slot) in sqrt_ev.iter_mut().enumerate() {
        let ev = t[(i, i)];
        if ev.im.abs() > SPECTRUM_TOL || ev.re < -SPECTRUM_TOL {
            return Err(Error::SpinFlipSpectrum {
                re: ev.re,
                im: ev.im,
            });
        }
        *slot = if ev.re < EIGENVALUE_FLOOR {
            0.0
        } else {
            ev.re.sqrt()
        };
    }
    sqrt_ev.sort_by(|a, b| b.total_cmp(a));
    Ok(ConcurrenceResult {
        value: concurrence_from_sqrt_spectrum(sqrt_ev),
        lambdas: sqrt_ev,
        method: Method::General,
    })
}

/// Signed concurrence margin ½(P_s1+P_s2) − ½√((P_s2+2P_o'2)(2P_o'2+P_s2+4P_g+2P_s1)).
/// The concurrence is this value clamped at zero.
pub fn concurrence_margin(pops: &ManifoldPopulations) -> f64 {
    let (g, s1, s2, o2) = (pops.p_g(), pops.p_s1(), pops.p_s2(), pops.p_oprime2());
    0.5 * (s1 + s2) - 0.5 * ((s2 + 2.0 * o2) * (2.0 * o2 + s2 + 4.0 * g + 2.0 * s1)).sqrt()
}

/// Concurrence straight from the kinetic populations.
///
/// ρ is an X state with ρ_22 = ρ_33 = ρ_23 = (P_s1+P_s2)/4 and ρ_14 = 0, so
/// the square roots of the eigenvalues of ρρ̃ are {2ρ_23, √(ρ_11ρ_44),
/// √(ρ_11ρ_44), 0}. Those are reported as `lambdas`.
pub fn concurrence_closed_form(pops: &ManifoldPopulations) -> ConcurrenceResult {
    let (g, s1, s2, o2) = (pops.p_g(), pops.p_s1(), pops.p_s2(), pops.p_oprime2());
    let coherence = 0.5 * (s1 + s2);
    let corner = 0.25 * ((4.0 * g + 2.0 * s1 + s2 + 2.0 * o2) * (s2 + 2.0 * o2)).sqrt();
    let mut lambdas = [coherence, corner, corner, 0.0];
    lambdas.sort_by(|a, b| b.total_cmp(a));
    ConcurrenceResult {
        value: concurrence_margin(pops).max(0.0),
        lambdas,
        method: Method::ClosedForm,
    }
}

/// A route from kinetic populations to the two-atom concurrence.
pub trait ConcurrenceMethod: Named + Send + Sync {
    fn concurrence(&self, pops: &ManifoldPopulations) -> Result<ConcurrenceResult>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct GeneralRoute;

impl Named for GeneralRoute {
    fn name(&self) -> &'static str {
        "general"
    }
}

impl ConcurrenceMethod for GeneralRoute {
    fn concurrence(&self, pops: &ManifoldPopulations) -> Result<ConcurrenceResult> {
        concurrence_general(&assemble_rho_atoms(pops)?)
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct ClosedFormRoute;

impl Named for ClosedFormRoute {
    fn name(&self) -> &'static str {
        "closed-form"
    }
}

impl ConcurrenceMethod for ClosedFormRoute {
    fn concurrence(&self, pops: &ManifoldPopulations) -> Result<ConcurrenceResult> {
        Ok(concurrence_closed_form(pops))
    }
}

pub fn concurrence_methods() -> Registry<dyn ConcurrenceMethod> {
    let mut reg: Registry<dyn ConcurrenceMethod> = Registry::new("concurrence method");
    reg.register(Arc::new(ClosedFormRoute))
        .register(Arc::new(GeneralRoute));
    reg
}
