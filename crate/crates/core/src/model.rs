//! Dressed states of two identical two-level atoms resonantly coupled to one
//! cavity mode, and their reduced two-atom density matrices.
//!
//! Product kets are written |ab;c> with atom states a, b in {1, 2} (1 is the
//! ground state) and photon number c. Within the manifold of total excitation
//! n the atom-field coupling mixes the kets
//!
//! * n = 1: |11;1>, |12;0>, |21;0>
//! * n >= 2: |11;n>, |12;n-1>, |21;n-1>, |22;n-2>
//!
//! The dressed-state coefficients are the same for every n >= 2; only the
//! photon labels move with n.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use nalgebra::Matrix4;

use crate::density::{basis_index, TwoQubitDensity};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductKet {
    pub atom1: u8,
    pub atom2: u8,
    pub photons: usize,
}

impl ProductKet {
    pub const fn new(atom1: u8, atom2: u8, photons: usize) -> Self {
        Self {
            atom1,
            atom2,
            photons,
        }
    }

    /// Number of excited atoms plus photons.
    pub fn excitations(&self) -> usize {
        (self.atom1 as usize - 1) + (self.atom2 as usize - 1) + self.photons
    }

    pub fn atom_index(&self) -> usize {
        basis_index(self.atom1, self.atom2)
    }
}

impl fmt::Display for ProductKet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{}{};{}>", self.atom1, self.atom2, self.photons)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DressedLabel {
    Ground,
    ChiO,
    ChiPlus,
    ChiMinus,
    PhiO,
    PhiOPrime,
    PhiPlus,
    PhiMinus,
}

impl DressedLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            DressedLabel::Ground => "ground",
            DressedLabel::ChiO => "chi_o",
            DressedLabel::ChiPlus => "chi_plus",
            DressedLabel::ChiMinus => "chi_minus",
            DressedLabel::PhiO => "phi_o",
            DressedLabel::PhiOPrime => "phi_oprime",
            DressedLabel::PhiPlus => "phi_plus",
            DressedLabel::PhiMinus => "phi_minus",
        }
    }

    /// Dark states carry no |11;.> or |22;.> weight and do not couple to the
    /// rest of the ladder.
    pub fn is_dark(&self) -> bool {
        matches!(self, DressedLabel::ChiO | DressedLabel::PhiO)
    }
}

impl fmt::Display for DressedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DressedLabel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        use DressedLabel::*;
        [Ground, ChiO, ChiPlus, ChiMinus, PhiO, PhiOPrime, PhiPlus, PhiMinus]
            .into_iter()
            .find(|l| l.as_str() == s)
            .ok_or_else(|| format!("unknown dressed-state label `{s}`"))
    }
}

/// Real amplitudes over product kets.
pub type Amplitudes = BTreeMap<ProductKet, f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct DressedState {
    pub manifold: usize,
    pub label: DressedLabel,
    pub amplitudes: Amplitudes,
}

impl DressedState {
    pub fn amplitude(&self, ket: &ProductKet) -> f64 {
        self.amplitudes.get(ket).copied().unwrap_or(0.0)
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.values().map(|a| a * a).sum()
    }

    pub fn inner(&self, other: &DressedState) -> f64 {
        inner(&self.amplitudes, &other.amplitudes)
    }
}

pub fn inner(a: &Amplitudes, b: &Amplitudes) -> f64 {
    a.iter()
        .filter_map(|(k, x)| b.get(k).map(|y| x * y))
        .sum()
}

fn state(manifold: usize, label: DressedLabel, terms: &[(ProductKet, f64)]) -> DressedState {
    DressedState {
        manifold,
        label,
        amplitudes: terms.iter().copied().collect(),
    }
}

/// Dressed states of the manifold with `n` total excitations.
pub fn build_dressed_states(n: usize) -> Vec<DressedState> {
    use DressedLabel::*;
    let k = ProductKet::new;
    let r = FRAC_1_SQRT_2;
    match n {
        0 => vec![state(0, Ground, &[(k(1, 1, 0), 1.0)])],
        1 => vec![
            state(1, ChiO, &[(k(1, 2, 0), r), (k(2, 1, 0), -r)]),
            state(1, ChiPlus, &[(k(1, 1, 1), r), (k(1, 2, 0), 0.5), (k(2, 1, 0), 0.5)]),
            state(1, ChiMinus, &[(k(1, 1, 1), r), (k(1, 2, 0), -0.5), (k(2, 1, 0), -0.5)]),
        ],
        _ => {
            let (top, mid, low) = (k(1, 1, n), (k(1, 2, n - 1), k(2, 1, n - 1)), k(2, 2, n - 2));
            vec![
                state(n, PhiO, &[(mid.0, r), (mid.1, -r)]),
                state(n, PhiOPrime, &[(top, r), (low, -r)]),
                state(n, PhiPlus, &[(top, 0.5), (mid.0, 0.5), (mid.1, 0.5), (low, 0.5)]),
                state(n, PhiMinus, &[(top, 0.5), (mid.0, -0.5), (mid.1, -0.5), (low, 0.5)]),
            ]
        }
    }
}

pub fn dressed_state(n: usize, label: DressedLabel) -> Result<DressedState> {
    build_dressed_states(n)
        .into_iter()
        .find(|s| s.label == label)
        .ok_or_else(|| Error::UnknownDressedState {
            manifold: n,
            label: label.to_string(),
        })
}

/// Reduced two-atom density matrix of a pure atom-field state: ρ_ij = Σ_c ψ(i,c) ψ(j,c).
pub fn trace_out_field(state: &DressedState) -> TwoQubitDensity {
    let mut by_photon: BTreeMap<usize, [f64; 4]> = BTreeMap::new();
    for (ket, amp) in &state.amplitudes {
        by_photon.entry(ket.photons).or_insert([0.0; 4])[ket.atom_index()] += amp;
    }
    let mut m = Matrix4::<f64>::zeros();
    for v in by_photon.values() {
        for i in 0..4 {
            for j in 0..4 {
                m[(i, j)] += v[i] * v[j];
            }
        }
    }
    TwoQubitDensity::from_real(m).expect("dressed states are normalized")
}

/// Convex mixture of reduced dressed-state density matrices within one manifold.
pub fn manifold_mixture(n: usize, parts: &[(DressedLabel, f64)]) -> Result<TwoQubitDensity> {
    if parts.is_empty() {
        return Err(Error::InvalidWeights("empty mixture".into()));
    }
    if let Some((_, w)) = parts.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = parts.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    let reduced = parts
        .iter()
        .map(|(label, w)| dressed_state(n, *label).map(|s| (*w, trace_out_field(&s))))
        .collect::<Result<Vec<_>>>()?;
    TwoQubitDensity::mixture(reduced.iter().map(|(w, r)| (*w, r)))
}

/// Action of the resonant interaction Hamiltonian with equal couplings (g = 1):
/// Σ_i (|1><2|_i a† + |2><1|_i a).
pub fn interaction_action(psi: &Amplitudes) -> Amplitudes {
    let mut out = Amplitudes::new();
    let mut add = |ket: ProductKet, amp: f64| {
        *out.entry(ket).or_insert(0.0) += amp;
    };
    for (ket, &amp) in psi {
        let n = ket.photons;
        for atom in 0..2 {
            let s = if atom == 0 { ket.atom1 } else { ket.atom2 };
            let flip = |to: u8, photons: usize| {
                if atom == 0 {
                    ProductKet::new(to, ket.atom2, photons)
                } else {
                    ProductKet::new(ket.atom1, to, photons)
                }
            };
            if s == 2 {
                add(flip(1, n + 1), amp * ((n + 1) as f64).sqrt());
            } else if n > 0 {
                add(flip(2, n - 1), amp * (n as f64).sqrt());
            }
        }
    }
    out
}
