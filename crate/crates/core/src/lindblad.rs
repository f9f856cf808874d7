//! Full master-equation model of two atoms and a Fock-truncated cavity mode.
//!
//! Used as an independent check on the rate-equation picture. Composite
//! basis index is `atom_index * (N + 1) + n` with `atom_index` from
//! [`basis_index`](crate::density::basis_index) and `n` the photon number.
//! Superoperators act on column-stacked density matrices, so
//! vec(A X B) = (Bᵀ ⊗ A) vec(X).

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::density::{max_modulus, TwoQubitDensity, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
use crate::entanglement::{assemble_rho_atoms, concurrence_closed_form, concurrence_general};
use crate::error::{Error, Result};
use crate::kinetics::ManifoldPopulations;
use crate::model::DressedState;
use crate::ode::{rk4_step, step_sizes};
use crate::params::SystemParams;
use crate::registry::{Named, Registry};
use crate::solver::{ClosedForm, SteadyStateSolver};

pub const DEFAULT_FOCK_CUTOFF: usize = 6;
pub const MIN_FOCK_CUTOFF: usize = 3;
/// Below this g / max rate the strong-coupling picture is not trusted.
pub const VALIDITY_RATIO_WARN: f64 = 10.0;
pub const STEADY_RESIDUAL_TOL: f64 = 1e-9;
/// Relative size under which an LU pivot counts as zero.
const PIVOT_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleParams {
    pub g: f64,
    pub fock_cutoff: usize,
    pub system: SystemParams,
}

impl OracleParams {
    pub fn new(g: f64, fock_cutoff: usize, system: SystemParams) -> Result<Self> {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "g",
                value: g,
                reason: "coupling must be positive and finite",
            });
        }
        if fock_cutoff < MIN_FOCK_CUTOFF {
            return Err(Error::FockCutoff(fock_cutoff));
        }
        Ok(Self {
            g,
            fock_cutoff,
            system,
        })
    }

    pub fn with_cutoff(&self, fock_cutoff: usize) -> Result<Self> {
        Self::new(self.g, fock_cutoff, self.system)
    }

    /// Hilbert-space dimension 4 (N + 1).
    pub fn dim(&self) -> usize {
        4 * (self.fock_cutoff + 1)
    }

    pub fn validity_ratio(&self) -> f64 {
        self.g / self.system.max_rate()
    }

    pub fn validity_warning(&self) -> Option<String> {
        let ratio = self.validity_ratio();
        (ratio < VALIDITY_RATIO_WARN).then(|| {
            format!(
                "g / max(gamma, pump, k, eta*k) = {ratio:.3} is below {VALIDITY_RATIO_WARN}; \
                 the rate-equation picture assumes strong coupling"
            )
        })
    }
}

/// Photon-loss channel of the output mirror, acting on the field alone.
pub trait MirrorLoss: Named + Send + Sync {
    /// (N+1) × (N+1) jump operator.
    fn field_operator(&self, system: &SystemParams, cutoff: usize) -> DMatrix<Complex64>;
}

/// √K(n) |n−1⟩⟨n|: an n-photon state leaks at exactly K(n).
#[derive(Debug, Default, Clone, Copy)]
pub struct PerStateLoss;

impl Named for PerStateLoss {
    fn name(&self) -> &'static str {
        "per-state"
    }
}

impl MirrorLoss for PerStateLoss {
    fn field_operator(&self, system: &SystemParams, cutoff: usize) -> DMatrix<Complex64> {
        lowering(cutoff, |n| system.k_of(n).sqrt())
    }
}

/// √K(n) a: the ordinary cavity loss with an n-dependent rate, n K(n) out of |n⟩.
#[derive(Debug, Default, Clone, Copy)]
pub struct LinearLoss;

impl Named for LinearLoss {
    fn name(&self) -> &'static str {
        "linear"
    }
}

impl MirrorLoss for LinearLoss {
    fn field_operator(&self, system: &SystemParams, cutoff: usize) -> DMatrix<Complex64> {
        lowering(cutoff, |n| (n as f64 * system.k_of(n)).sqrt())
    }
}

pub fn mirror_models() -> Registry<dyn MirrorLoss> {
    let mut reg: Registry<dyn MirrorLoss> = Registry::new("mirror model");
    reg.register(Arc::new(PerStateLoss)).register(Arc::new(LinearLoss));
    reg
}

fn lowering(cutoff: usize, amp: impl Fn(usize) -> f64) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(cutoff + 1, cutoff + 1);
    for n in 1..=cutoff {
        m[(n - 1, n)] = Complex64::new(amp(n), 0.0);
    }
    m
}

/// Embeds a field operator as 1_atoms ⊗ f.
fn on_field(f: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    DMatrix::<Complex64>::identity(4, 4).kronecker(f)
}

/// σ⁻ = |1⟩⟨2| on `atom` (0 or 1) ⊗ 1_field.
fn atom_lowering(atom: usize, cutoff: usize) -> DMatrix<Complex64> {
    let mut two = DMatrix::<Complex64>::zeros(2, 2);
    two[(0, 1)] = ONE;
    let id2 = DMatrix::<Complex64>::identity(2, 2);
    let atoms = if atom == 0 {
        two.kronecker(&id2)
    } else {
        id2.kronecker(&two)
    };
    atoms.kronecker(&DMatrix::identity(cutoff + 1, cutoff + 1))
}

/// g Σ_i (σ_i⁻ a† + σ_i⁺ a), with |1⟩ the lower atomic level.
pub fn hamiltonian(g: f64, cutoff: usize) -> DMatrix<Complex64> {
    let a = lowering(cutoff, |n| (n as f64).sqrt());
    let a_dag = on_field(&a.adjoint());
    let mut h = DMatrix::zeros(4 * (cutoff + 1), 4 * (cutoff + 1));
    for atom in 0..2 {
        let term = atom_lowering(atom, cutoff) * &a_dag;
        h += &term + term.adjoint();
    }
    h * Complex64::new(g, 0.0)
}

/// Spontaneous emission on each atom, cavity pumping, mirror loss.
pub fn jump_operators(params: &OracleParams, mirror: &dyn MirrorLoss) -> Vec<DMatrix<Complex64>> {
    let n = params.fock_cutoff;
    let sys = &params.system;
    let mut ops = Vec::with_capacity(4);
    for atom in 0..2 {
        ops.push(atom_lowering(atom, n) * Complex64::new(sys.gamma().sqrt(), 0.0));
    }
    let pump = lowering(n, |_| sys.pump().sqrt()).transpose();
    ops.push(on_field(&pump));
    ops.push(on_field(&mirror.field_operator(sys, n)));
    ops.retain(|c| max_modulus(c.iter()) > 0.0);
    ops
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    matrix: DMatrix<Complex64>,
    dim: usize,
}

impl Liouvillian {
    pub fn from_parts(h: &DMatrix<Complex64>, jumps: &[DMatrix<Complex64>]) -> Self {
        let dim = h.nrows();
        let id = DMatrix::<Complex64>::identity(dim, dim);
        let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * Complex64::new(0.0, -1.0);
        for c in jumps {
            let cdc = c.adjoint() * c;
            l += c.conjugate().kronecker(c);
            l -= (id.kronecker(&cdc) + cdc.transpose().kronecker(&id)) * Complex64::new(0.5, 0.0);
        }
        Self { matrix: l, dim }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Hilbert-space dimension; the superoperator is dim² × dim².
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn apply(&self, rho: &DVector<Complex64>) -> DVector<Complex64> {
        &self.matrix * rho
    }

    /// max |L†(1)|, zero for a trace-preserving generator.
    pub fn adjoint_identity_residual(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|col| (0..d).map(|i| self.matrix[(i * d + i, col)]).sum::<Complex64>().norm())
            .fold(0.0, f64::max)
    }
}

pub fn build_liouvillian(params: &OracleParams, mirror: &dyn MirrorLoss) -> Result<Liouvillian> {
    if params.fock_cutoff < MIN_FOCK_CUTOFF {
        return Err(Error::FockCutoff(params.fock_cutoff));
    }
    let h = hamiltonian(params.g, params.fock_cutoff);
    Ok(Liouvillian::from_parts(&h, &jump_operators(params, mirror)))
}

/// Density matrix of the atoms plus the truncated field.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDensity {
    matrix: DMatrix<Complex64>,
    cutoff: usize,
}

impl FullDensity {
    pub fn new(matrix: DMatrix<Complex64>, cutoff: usize) -> Result<Self> {
        let dim = 4 * (cutoff + 1);
        if matrix.shape() != (dim, dim) {
            return Err(Error::InvalidDensity {
                invariant: "dimension 4(N+1)",
                deviation: (matrix.nrows() as f64 - dim as f64).abs(),
            });
        }
        let herm = max_modulus((&matrix - matrix.adjoint()).iter());
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity {
                invariant: "hermitian",
                deviation: herm,
            });
        }
        let matrix = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let trace_dev = (matrix.trace() - ONE).norm();
        if trace_dev > TRACE_TOL {
            return Err(Error::InvalidDensity {
                invariant: "unit trace",
                deviation: trace_dev,
            });
        }
        let rho = Self { matrix, cutoff };
        let min = rho.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity {
                invariant: "positive semidefinite",
                deviation: -min,
            });
        }
        Ok(rho)
    }

    /// |ψ⟩⟨ψ| for a dressed state; every component must fit under the cutoff.
    pub fn from_pure(state: &DressedState, cutoff: usize) -> Result<Self> {
        let psi = embed(state, cutoff)?;
        let norm = psi.norm_squared();
        Self::new(&psi * psi.adjoint() / Complex64::new(norm, 0.0), cutoff)
    }

    pub fn maximally_mixed(cutoff: usize) -> Self {
        let dim = 4 * (cutoff + 1);
        Self {
            matrix: DMatrix::identity(dim, dim) / Complex64::new(dim as f64, 0.0),
            cutoff,
        }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_vector(&self) -> DVector<Complex64> {
        DVector::from_column_slice(self.matrix.as_slice())
    }

    /// Partial trace over the field.
    pub fn reduce_to_atoms(&self) -> Result<TwoQubitDensity> {
        let f = self.cutoff + 1;
        let m = nalgebra::Matrix4::from_fn(|i, j| (0..f).map(|n| self.matrix[(i * f + n, j * f + n)]).sum());
        TwoQubitDensity::new(m)
    }

    /// Probability of each photon number.
    pub fn photon_distribution(&self) -> Vec<f64> {
        let f = self.cutoff + 1;
        (0..f)
            .map(|n| (0..4).map(|a| self.matrix[(a * f + n, a * f + n)].re).sum())
            .collect()
    }

    /// ⟨ψ|ρ|ψ⟩.
    pub fn population(&self, state: &DressedState) -> Result<f64> {
        let psi = embed(state, self.cutoff)?;
        Ok((psi.adjoint() * &self.matrix * &psi)[(0, 0)].re)
    }
}

fn embed(state: &DressedState, cutoff: usize) -> Result<DVector<Complex64>> {
    let f = cutoff + 1;
    let mut psi = DVector::zeros(4 * f);
    for (ket, amp) in &state.amplitudes {
        if ket.photons > cutoff {
            return Err(Error::FockCutoff(cutoff));
        }
        psi[ket.atom_index() * f + ket.photons] = Complex64::new(*amp, 0.0);
    }
    Ok(psi)
}

fn unvec(v: &DVector<Complex64>, dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(dim, dim, v.as_slice())
}

#[derive(Debug, Clone)]
pub struct OracleSteadyState {
    pub density: FullDensity,
    /// max |L vec(ρ)| relative to max |L|.
    pub residual: f64,
}

/// Unique null vector of the Liouvillian with unit trace.
///
/// The first equation is replaced by the trace condition and the system is
/// solved by full-pivot LU; a vanishing pivot means the null space is larger
/// than one.
pub fn oracle_steady_state(params: &OracleParams, mirror: &dyn MirrorLoss) -> Result<OracleSteadyState> {
    let l = build_liouvillian(params, mirror)?;
    let d = l.dim();
    let mut bordered = l.matrix().clone();
    bordered.row_mut(0).fill(ZERO);
    for i in 0..d {
        bordered[(0, i * d + i)] = ONE;
    }
    let lu = bordered.full_piv_lu();
    let u = lu.u();
    let diag: Vec<f64> = (0..d * d).map(|i| u[(i, i)].norm()).collect();
    let scale = diag.iter().copied().fold(0.0, f64::max);
    let tiny = diag.iter().filter(|&&p| p <= PIVOT_TOL * scale).count();
    if tiny > 0 {
        return Err(Error::DegenerateSteadyState { dimension: tiny + 1 });
    }
    let mut rhs = DVector::zeros(d * d);
    rhs[0] = ONE;
    let x = lu.solve(&rhs).ok_or(Error::DegenerateSteadyState { dimension: 2 })?;

    let l_scale = max_modulus(l.matrix().iter()).max(1.0);
    let residual = max_modulus(l.apply(&x).iter()) / l_scale;
    if residual > STEADY_RESIDUAL_TOL {
        return Err(Error::Residual {
            residual,
            tolerance: STEADY_RESIDUAL_TOL,
        });
    }
    let density = FullDensity::new(unvec(&x, d), params.fock_cutoff)?;
    Ok(OracleSteadyState { density, residual })
}

/// Fixed-step RK4 of dρ/dt = L ρ. `observer` sees every accepted state,
/// including the initial one at t = 0.
pub fn evolve_oracle(
    params: &OracleParams,
    mirror: &dyn MirrorLoss,
    initial: &FullDensity,
    t_final: f64,
    dt: f64,
    mut observer: impl FnMut(f64, &FullDensity),
) -> Result<FullDensity> {
    if initial.cutoff != params.fock_cutoff {
        return Err(Error::FockCutoff(initial.cutoff));
    }
    if !(dt > 0.0 && t_final >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "dt",
            value: dt,
            reason: "need dt > 0 and t_final >= 0",
        });
    }
    let l = build_liouvillian(params, mirror)?;
    let rhs = |v: &DVector<Complex64>| l.apply(v);
    let mut v = initial.to_vector();
    let mut t = 0.0;
    observer(t, initial);
    let d = l.dim();
    for h in step_sizes(t_final, dt) {
        v = rk4_step(&rhs, &v, h);
        t += h;
        let trace: Complex64 = (0..d).map(|i| v[i * d + i]).sum();
        let drift = (trace - ONE).norm();
        if !drift.is_finite() || drift > 1e-6 {
            return Err(Error::StepTooLarge { dt, time: t, value: trace.re });
        }
        let rho = FullDensity {
            matrix: unvec(&v, d),
            cutoff: initial.cutoff,
        };
        observer(t, &rho);
    }
    FullDensity::new(unvec(&v, d), initial.cutoff)
}

/// Side-by-side oracle and rate-model results at one parameter point.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub params: OracleParams,
    pub mirror: &'static str,
    pub validity_ratio: f64,
    pub warning: Option<String>,
    pub oracle_diagonal: [f64; 4],
    pub rate_diagonal: [f64; 4],
    pub oracle_concurrence: f64,
    pub rate_concurrence: f64,
    pub photon_distribution: Vec<f64>,
    /// Largest reduced-state change between cutoffs N and N + 1.
    pub cutoff_difference: f64,
    pub rate_populations: ManifoldPopulations,
}

impl OracleComparison {
    pub fn ensure_converged(&self, tol: f64) -> Result<()> {
        if self.cutoff_difference > tol {
            return Err(Error::CutoffConvergence {
                lower: self.params.fock_cutoff,
                upper: self.params.fock_cutoff + 1,
                difference: self.cutoff_difference,
            });
        }
        Ok(())
    }
}

/// Reduced two-atom state of the oracle steady state.
pub fn oracle_reduced_state(params: &OracleParams, mirror: &dyn MirrorLoss) -> Result<TwoQubitDensity> {
    oracle_steady_state(params, mirror)?.density.reduce_to_atoms()
}

/// Largest elementwise difference of the reduced states at two cutoffs.
pub fn cutoff_difference(params: &OracleParams, mirror: &dyn MirrorLoss, lower: usize, upper: usize) -> Result<f64> {
    let a = oracle_reduced_state(&params.with_cutoff(lower)?, mirror)?;
    let b = oracle_reduced_state(&params.with_cutoff(upper)?, mirror)?;
    Ok(a.max_abs_diff(&b))
}

pub fn compare(params: &OracleParams, mirror: &dyn MirrorLoss) -> Result<OracleComparison> {
    let steady = oracle_steady_state(params, mirror)?;
    let reduced = steady.density.reduce_to_atoms()?;
    let next = oracle_reduced_state(&params.with_cutoff(params.fock_cutoff + 1)?, mirror)?;
    let pops = ClosedForm.solve(&params.system, true)?;
    Ok(OracleComparison {
        params: *params,
        mirror: mirror.name(),
        validity_ratio: params.validity_ratio(),
        warning: params.validity_warning(),
        oracle_diagonal: reduced.diagonal(),
        rate_diagonal: assemble_rho_atoms(&pops)?.diagonal(),
        oracle_concurrence: concurrence_general(&reduced)?.value,
        rate_concurrence: concurrence_closed_form(&pops).value,
        photon_distribution: steady.density.photon_distribution(),
        cutoff_difference: reduced.max_abs_diff(&next),
        rate_populations: pops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{dressed_state, trace_out_field, DressedLabel, ProductKet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle(g: f64, cutoff: usize, system: SystemParams) -> OracleParams {
        OracleParams::new(g, cutoff, system).unwrap()
    }

    fn pure_ket(ket: ProductKet, cutoff: usize) -> FullDensity {
        let f = cutoff + 1;
        let i = ket.atom_index() * f + ket.photons;
        let mut m = DMatrix::zeros(4 * f, 4 * f);
        m[(i, i)] = ONE;
        FullDensity::new(m, cutoff).unwrap()
    }

    #[test]
    fn parameter_validation() {
        let sys = SystemParams::in_gamma_units(1.0, 1.0, 10.0).unwrap();
        assert!(matches!(OracleParams::new(100.0, 2, sys), Err(Error::FockCutoff(2))));
        assert!(OracleParams::new(0.0, 6, sys).is_err());
        assert!(oracle(100.0, 6, sys).validity_warning().is_none());
        assert!(oracle(2.0, 6, sys).validity_warning().is_some());
    }

    #[test]
    fn trace_preserving() {
        let sys = SystemParams::in_gamma_units(1.0, 1.0, 10.0).unwrap();
        for mirror in mirror_models().names() {
            let m = mirror_models().get(mirror).unwrap();
            let l = build_liouvillian(&oracle(100.0, 4, sys), m.as_ref()).unwrap();
            assert!(l.adjoint_identity_residual() < 1e-10);
        }
    }

    #[test]
    fn coherent_generator_conserves_dressed_populations() {
        let sys = SystemParams::raw(0.0, 0.0, 0.0, 1.0);
        let p = oracle(1.0, 4, sys);
        assert!(jump_operators(&p, &PerStateLoss).is_empty());
        let l = build_liouvillian(&p, &PerStateLoss).unwrap();
        let f = 5;
        let excitations = |i: usize| [0, 1, 1, 2][i / f] + i % f;
        for n in 1..=3 {
            for state in crate::model::build_dressed_states(n) {
                let rho = FullDensity::from_pure(&state, 4).unwrap();
                let flow = unvec(&l.apply(&rho.to_vector()), p.dim());
                if n == 1 || state.label.is_dark() {
                    assert!(max_modulus(flow.iter()) < 1e-12, "{:?} n={n}", state.label);
                }
                // Excitation number is conserved for every state.
                for m in 0..=6 {
                    let rate: f64 = (0..p.dim())
                        .filter(|&i| excitations(i) == m)
                        .map(|i| flow[(i, i)].re)
                        .sum();
                    assert!(rate.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn dark_state_never_feeds_the_field() {
        let sys = SystemParams::in_gamma_units(0.0, 0.0, 10.0).unwrap();
        let p = oracle(100.0, 3, sys);
        let start = FullDensity::from_pure(&dressed_state(1, DressedLabel::ChiO).unwrap(), 3).unwrap();
        let mut worst: f64 = 0.0;
        evolve_oracle(&p, &PerStateLoss, &start, 2.0, 1e-3, |_, rho| {
            worst = worst.max(rho.photon_distribution()[1..].iter().sum());
        })
        .unwrap();
        assert!(worst < 1e-10, "photon population {worst}");
    }

    #[test]
    fn evolution_keeps_trace_and_hermiticity() {
        let sys = SystemParams::in_gamma_units(2.0, 1.0, 10.0).unwrap();
        let p = oracle(5.0, 3, sys);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let dim = p.dim();
            let a = DMatrix::<Complex64>::from_fn(dim, dim, |_, _| {
                Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            });
            let mut m = &a * a.adjoint();
            m /= m.trace();
            let start = FullDensity::new(m, 3).unwrap();
            let mut checks = 0;
            evolve_oracle(&p, &PerStateLoss, &start, 0.2, 2e-3, |_, rho| {
                let herm = max_modulus((rho.matrix() - rho.matrix().adjoint()).iter());
                assert!(herm < 1e-12);
                assert!((rho.matrix().trace() - ONE).norm() < 1e-12);
                checks += 1;
            })
            .unwrap();
            assert_eq!(checks, 101);
        }
    }

    #[test]
    fn no_pump_relaxes_to_ground() {
        let sys = SystemParams::in_gamma_units(0.0, 1.0, 10.0).unwrap();
        let ss = oracle_steady_state(&oracle(100.0, 4, sys), &PerStateLoss).unwrap();
        let ground = pure_ket(ProductKet::new(1, 1, 0), 4);
        assert!(max_modulus((ss.density.matrix() - ground.matrix()).iter()) < 1e-10);
    }

    #[test]
    fn degenerate_steady_state_reports_dimension() {
        let sys = SystemParams::raw(0.0, 0.0, 0.0, 1.0);
        let err = oracle_steady_state(&oracle(1.0, 3, sys), &PerStateLoss).unwrap_err();
        match err {
            Error::DegenerateSteadyState { dimension } => assert!(dimension > 1),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn partial_trace_examples() {
        let ground = pure_ket(ProductKet::new(1, 1, 0), 3).reduce_to_atoms().unwrap();
        assert_eq!(ground.diagonal(), [1.0, 0.0, 0.0, 0.0]);

        let mixed = FullDensity::maximally_mixed(3).reduce_to_atoms().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.25 } else { 0.0 };
                assert!((mixed.get(i, j).re - expected).abs() < 1e-15);
            }
        }

        for label in [DressedLabel::ChiPlus, DressedLabel::PhiPlus] {
            let n = if label == DressedLabel::ChiPlus { 1 } else { 2 };
            let state = dressed_state(n, label).unwrap();
            let reduced = FullDensity::from_pure(&state, 3).unwrap().reduce_to_atoms().unwrap();
            assert!(reduced.max_abs_diff(&trace_out_field(&state)) < 1e-15);
        }
    }

    #[test]
    fn dressed_state_beyond_cutoff_is_rejected() {
        let state = dressed_state(5, DressedLabel::PhiPlus).unwrap();
        assert!(matches!(FullDensity::from_pure(&state, 3), Err(Error::FockCutoff(3))));
    }

    #[test]
    fn population_of_embedded_state_is_one() {
        let state = dressed_state(2, DressedLabel::PhiOPrime).unwrap();
        let rho = FullDensity::from_pure(&state, 4).unwrap();
        assert!((rho.population(&state).unwrap() - 1.0).abs() < 1e-14);
        let other = dressed_state(2, DressedLabel::PhiPlus).unwrap();
        assert!(rho.population(&other).unwrap().abs() < 1e-14);
    }

    #[test]
    fn strong_coupling_steady_state() {
        let sys = SystemParams::in_gamma_units(1.0, 1.0, 10.0).unwrap();
        let ss = oracle_steady_state(&oracle(100.0, 6, sys), &PerStateLoss).unwrap();
        assert!(ss.residual <= STEADY_RESIDUAL_TOL);
        let reduced = ss.density.reduce_to_atoms().unwrap();
        assert!(reduced.min_eigenvalue() > -PSD_TOL);
        let c = concurrence_general(&reduced).unwrap().value;
        assert!((0.0..=1.0).contains(&c));
    }

    #[test]
    fn mirror_registry() {
        let reg = mirror_models();
        assert_eq!(reg.default_strategy().unwrap().name(), "per-state");
        assert!(reg.get("linear").is_ok());
        assert!(reg.get("quadratic").is_err());
    }
}
