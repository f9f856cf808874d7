use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rates of the pumped two-atom cavity.
///
/// All rates share one time unit; the usual convention is `gamma = 1`.
/// The mirror transmits at `k1` with one photon in the cavity and at
/// `eta * k1` with two or more.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct SystemParams {
    gamma: f64,
    pump: f64,
    k1: f64,
    eta: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    gamma: f64,
    pump: f64,
    k: f64,
    eta: f64,
}

impl TryFrom<RawParams> for SystemParams {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        SystemParams::new(r.gamma, r.pump, r.k, r.eta)
    }
}

impl From<SystemParams> for RawParams {
    fn from(p: SystemParams) -> Self {
        RawParams {
            gamma: p.gamma,
            pump: p.pump,
            k: p.k1,
            eta: p.eta,
        }
    }
}

fn check(name: &'static str, value: f64, strictly_positive: bool) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        });
    }
    if strictly_positive && value <= 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be > 0",
        });
    }
    if value < 0.0 {
        return Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be >= 0",
        });
    }
    Ok(())
}

impl SystemParams {
    pub fn new(gamma: f64, pump: f64, k1: f64, eta: f64) -> Result<Self> {
        check("gamma", gamma, true)?;
        check("pump", pump, false)?;
        check("k", k1, false)?;
        check("eta", eta, false)?;
        Ok(Self {
            gamma,
            pump,
            k1,
            eta,
        })
    }

    /// Parameters in units of the spontaneous-emission rate.
    pub fn in_gamma_units(pump: f64, k1: f64, eta: f64) -> Result<Self> {
        Self::new(1.0, pump, k1, eta)
    }

    /// Bypasses validation. Only for degenerate corner cases (e.g. `gamma = 0`)
    /// that the public constructor rejects.
    #[cfg(test)]
    pub(crate) fn raw(gamma: f64, pump: f64, k1: f64, eta: f64) -> Self {
        Self {
            gamma,
            pump,
            k1,
            eta,
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn pump(&self) -> f64 {
        self.pump
    }

    pub fn k1(&self) -> f64 {
        self.k1
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Mirror transmission with `photons` photons in the cavity.
    pub fn k_of(&self, photons: usize) -> f64 {
        match photons {
            0 => 0.0,
            1 => self.k1,
            _ => self.eta * self.k1,
        }
    }

    pub fn with_pump(self, pump: f64) -> Result<Self> {
        Self::new(self.gamma, pump, self.k1, self.eta)
    }

    pub fn with_k(self, k1: f64) -> Result<Self> {
        Self::new(self.gamma, self.pump, k1, self.eta)
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        Self::new(self.gamma, self.pump, self.k1, eta)
    }

    /// Largest rate in the problem, used for validity ratios.
    pub fn max_rate(&self) -> f64 {
        self.gamma
            .max(self.pump)
            .max(self.k1)
            .max(self.eta * self.k1)
    }
}
