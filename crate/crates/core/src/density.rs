//! Two-atom density matrices in the ordered basis |11>, |12>, |21>, |22>.

use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub const TRACE_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;

/// Index of the product ket |ab> (a, b in {1, 2}) in the ordered basis.
pub fn basis_index(a: u8, b: u8) -> usize {
    debug_assert!((1..=2).contains(&a) && (1..=2).contains(&b));
    2 * (a as usize - 1) + (b as usize - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoQubitDensity {
    elements: Matrix4<Complex64>,
}

impl TwoQubitDensity {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(elements: Matrix4<Complex64>) -> Result<Self> {
        let herm = max_modulus(&(elements - elements.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidDensity {
                invariant: "hermitian",
                deviation: herm,
            });
        }
        let elements = (elements + elements.adjoint()) * Complex64::new(0.5, 0.0);
        let trace = elements.trace();
        let dev = (trace - Complex64::new(1.0, 0.0)).norm();
        if dev > TRACE_TOL {
            return Err(Error::InvalidDensity {
                invariant: "unit trace",
                deviation: dev,
            });
        }
        let rho = Self { elements };
        let min = rho.min_eigenvalue();
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity {
                invariant: "positive semidefinite",
                deviation: -min,
            });
        }
        Ok(rho)
    }

    pub fn from_real(elements: Matrix4<f64>) -> Result<Self> {
        Self::new(elements.map(|x| Complex64::new(x, 0.0)))
    }

    /// Convex combination of density matrices. Weights must be non-negative
    /// and sum to one.
    pub fn mixture<'a>(terms: impl IntoIterator<Item = (f64, &'a TwoQubitDensity)>) -> Result<Self> {
        let mut acc = Matrix4::<Complex64>::zeros();
        for (w, rho) in terms {
            acc += rho.elements * Complex64::new(w, 0.0);
        }
        Self::new(acc)
    }

    pub fn elements(&self) -> &Matrix4<Complex64> {
        &self.elements
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.elements[(row, col)]
    }

    /// Real diagonal: populations of |11>, |12>, |21>, |22>.
    pub fn diagonal(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.elements[(i, i)].re)
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.elements);
        let mut ev: [f64; 4] = std::array::from_fn(|i| eig.eigenvalues[i]);
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// (σy ⊗ σy) ρ* (σy ⊗ σy).
    pub fn spin_flip(&self) -> Matrix4<Complex64> {
        let yy = sigma_y_sigma_y();
        yy * self.elements.conjugate() * yy
    }

    /// The same state with the two atoms exchanged.
    pub fn swap_atoms(&self) -> Self {
        let swap = Matrix4::<Complex64>::from_fn(|i, j| {
            let perm = [0, 2, 1, 3];
            if perm[i] == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self {
            elements: swap * self.elements * swap,
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_modulus(&(self.elements - other.elements))
    }
}

/// Largest |z| over the entries.
pub fn max_modulus<'a>(m: impl IntoIterator<Item = &'a Complex64>) -> f64 {
    m.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// σy ⊗ σy. Real: the two factors of i cancel.
pub fn sigma_y_sigma_y() -> Matrix4<Complex64> {
    let c = |x: f64| Complex64::new(x, 0.0);
    Matrix4::new(
        c(0.0), c(0.0), c(0.0), c(-1.0),
        c(0.0), c(0.0), c(1.0), c(0.0),
        c(0.0), c(1.0), c(0.0), c(0.0),
        c(-1.0), c(0.0), c(0.0), c(0.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basis_order() {
        assert_eq!(basis_index(1, 1), 0);
        assert_eq!(basis_index(1, 2), 1);
        assert_eq!(basis_index(2, 1), 2);
        assert_eq!(basis_index(2, 2), 3);
    }

    #[test]
    fn sigma_y_tensor_matches_kron() {
        let i = Complex64::i();
        let z = Complex64::new(0.0, 0.0);
        let sy = nalgebra::Matrix2::new(z, -i, i, z);
        let kron = sy.kronecker(&sy);
        assert!(max_modulus(&(kron - sigma_y_sigma_y())) < 1e-15);
    }

    #[test]
    fn rejects_bad_matrices() {
        let mut m = Matrix4::<f64>::zeros();
        m[(0, 0)] = 0.5;
        assert!(matches!(
            TwoQubitDensity::from_real(m),
            Err(Error::InvalidDensity { invariant: "unit trace", .. })
        ));
        m[(0, 0)] = 1.5;
        m[(3, 3)] = -0.5;
        assert!(matches!(
            TwoQubitDensity::from_real(m),
            Err(Error::InvalidDensity { invariant: "positive semidefinite", .. })
        ));
        let mut h = Matrix4::<f64>::identity() * 0.25;
        h[(0, 1)] = 0.1;
        assert!(matches!(
            TwoQubitDensity::from_real(h),
            Err(Error::InvalidDensity { invariant: "hermitian", .. })
        ));
    }

    #[test]
    fn spin_flip_is_involution() {
        let m = Matrix4::<Complex64>::from_fn(|i, j| {
            if i == j {
                Complex64::new(0.25, 0.0)
            } else if i < j {
                Complex64::new(0.01 * (i + 2 * j) as f64, 0.02 * (j as f64 - i as f64))
            } else {
                Complex64::new(0.01 * (j + 2 * i) as f64, -0.02 * (i as f64 - j as f64))
            }
        });
        let rho = TwoQubitDensity::new(m).unwrap();
        let flipped = TwoQubitDensity {
            elements: rho.spin_flip(),
        };
        assert_eq!(flipped.spin_flip(), *rho.elements());
    }
}
