//! Classical fixed-step fourth-order Runge-Kutta.

use nalgebra::{DVector, Vector4};
use num_complex::Complex64;

/// A vector space element the integrator can combine.
pub trait OdeState: Clone {
    /// `self + a * x`
    fn add_scaled(&self, a: f64, x: &Self) -> Self;
}

impl OdeState for Vector4<f64> {
    fn add_scaled(&self, a: f64, x: &Self) -> Self {
        self + x * a
    }
}

impl OdeState for DVector<Complex64> {
    fn add_scaled(&self, a: f64, x: &Self) -> Self {
        let mut out = self.clone();
        out.axpy(Complex64::new(a, 0.0), x, Complex64::new(1.0, 0.0));
        out
    }
}

pub fn rk4_step<S, F>(rhs: &F, y: &S, dt: f64) -> S
where
    S: OdeState,
    F: Fn(&S) -> S,
{
    let k1 = rhs(y);
    let k2 = rhs(&y.add_scaled(0.5 * dt, &k1));
    let k3 = rhs(&y.add_scaled(0.5 * dt, &k2));
    let k4 = rhs(&y.add_scaled(dt, &k3));
    y.add_scaled(dt / 6.0, &k1)
        .add_scaled(dt / 3.0, &k2)
        .add_scaled(dt / 3.0, &k3)
        .add_scaled(dt / 6.0, &k4)
}

/// Step times covering [0, t_final]: uniform `dt` with a shorter final step
/// landing exactly on `t_final`.
pub fn step_sizes(t_final: f64, dt: f64) -> impl Iterator<Item = f64> {
    let full = (t_final / dt).floor() as usize;
    let rem = t_final - full as f64 * dt;
    let last = (rem > dt * 1e-9).then_some(rem);
    std::iter::repeat_n(dt, full).chain(last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_fourth_order() {
        // y' = -y on the first component, y' = 0 elsewhere.
        let rhs = |y: &Vector4<f64>| Vector4::new(-y[0], 0.0, 0.0, 0.0);
        let err = |dt: f64| {
            let mut y = Vector4::new(1.0, 1.0, 0.0, 0.0);
            for h in step_sizes(1.0, dt) {
                y = rk4_step(&rhs, &y, h);
            }
            (y[0] - (-1.0f64).exp()).abs()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn steps_land_on_final_time() {
        let total: f64 = step_sizes(1.05, 0.1).sum();
        assert!((total - 1.05).abs() < 1e-12);
        assert_eq!(step_sizes(1.0, 0.25).count(), 4);
    }

    #[test]
    fn complex_rotation() {
        // y' = -i y  =>  y(t) = e^{-it}
        let rhs = |y: &DVector<Complex64>| y.map(|z| -Complex64::i() * z);
        let mut y = DVector::from_element(1, Complex64::new(1.0, 0.0));
        for h in step_sizes(std::f64::consts::PI, 1e-3) {
            y = rk4_step(&rhs, &y, h);
        }
        assert!((y[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-10);
    }
}
