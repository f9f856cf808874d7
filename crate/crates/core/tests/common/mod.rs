#![allow(dead_code)]

use cavity_entangle::{ManifoldPopulations, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the probability simplex over the four kinetic components.
pub fn random_populations(rng: &mut impl Rng) -> ManifoldPopulations {
    let w: [f64; 4] = std::array::from_fn(|_| -rng.random::<f64>().max(1e-300).ln());
    let total: f64 = w.iter().sum();
    let (g, s1, s2) = (w[0] / total, w[1] / total, w[2] / total);
    ManifoldPopulations::new(g, s1, s2, 1.0 - g - s1 - s2).expect("valid draw")
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

/// Π, K log-uniform in [1e-2, 1e2]Γ, η uniform in [0.1, 50].
pub fn random_params(rng: &mut impl Rng) -> SystemParams {
    let pump = log_uniform(rng, 1e-2, 1e2);
    let k = log_uniform(rng, 1e-2, 1e2);
    let eta = rng.random_range(0.1..50.0);
    SystemParams::in_gamma_units(pump, k, eta).expect("valid draw")
}
