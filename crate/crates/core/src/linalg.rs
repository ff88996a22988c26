//! Dense symmetric solves shared by the RBF and GPR interpolants.

use nalgebra::{DMatrix, LU};

use crate::error::{Error, Result};

/// Largest accepted 1-norm condition estimate.
pub const CONDITION_LIMIT: f64 = 1e14;

/// LU factorization of a symmetric matrix with a condition-number gate.
#[derive(Debug, Clone)]
pub struct SymmetricSolver {
    matrix: DMatrix<f64>,
    lu: LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    condition: f64,
}

impl SymmetricSolver {
    /// Verifies symmetry to 1e-12 relative, factorizes and estimates the
    /// condition number. Fails with [`Error::SingularSystem`] when the
    /// estimate exceeds [`CONDITION_LIMIT`] or a pivot vanishes.
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        let n = matrix.nrows();
        if n == 0 || matrix.ncols() != n {
            return Err(Error::InvalidInput(
                "system matrix must be square and non-empty".into(),
            ));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        for j in 0..n {
            for i in 0..j {
                if (matrix[(i, j)] - matrix[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "system matrix not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem(
                "system matrix has non-finite entries".into(),
            ));
        }
        let lu = matrix.clone().lu();
        let u = lu.u();
        let umax = u.diagonal().amax();
        if u.diagonal()
            .iter()
            .any(|d| d.abs() <= f64::EPSILON * umax * n as f64)
        {
            return Err(Error::SingularSystem("zero pivot in factorization".into()));
        }
        let mut solver = Self {
            matrix,
            lu,
            condition: f64::INFINITY,
        };
        solver.condition = solver.estimate_condition();
        if !(solver.condition <= CONDITION_LIMIT) {
            return Err(Error::SingularSystem(format!(
                "condition estimate {:.3e} exceeds {CONDITION_LIMIT:.0e}",
                solver.condition
            )));
        }
        Ok(solver)
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn raw_solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        self.lu
            .solve(rhs)
            .expect("factorization checked for zero pivots")
    }

    /// Solves `A X = B` with two steps of iterative refinement.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> DMatrix<f64> {
        let mut x = self.raw_solve(rhs);
        for _ in 0..2 {
            let r = rhs - &self.matrix * &x;
            x += self.raw_solve(&r);
        }
        x
    }

    // Hager's 1-norm estimator; A⁻ᵀ = A⁻¹ for symmetric A.
    fn estimate_condition(&self) -> f64 {
        let n = self.dim();
        let norm_a = (0..n)
            .map(|j| self.matrix.column(j).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let mut x = DMatrix::from_element(n, 1, 1.0 / n as f64);
        let mut est = 0.0;
        for _ in 0..5 {
            let y = self.raw_solve(&x);
            est = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.raw_solve(&xi);
            let (jmax, zmax) = z.iter().enumerate().fold((0, 0.0), |acc, (i, v)| {
                if v.abs() > acc.1 {
                    (i, v.abs())
                } else {
                    acc
                }
            });
            let ztx: f64 = z.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
            if zmax <= ztx {
                break;
            }
            x.fill(0.0);
            x[(jmax, 0)] = 1.0;
        }
        if !est.is_finite() {
            return f64::INFINITY;
        }
        norm_a * est
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0]);
        let b = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 2.0, 1.0, 3.0, -1.0]);
        let s = SymmetricSolver::new(a.clone()).unwrap();
        let x = s.solve(&b);
        assert!((&a * &x - &b).amax() < 1e-14);
        let exact_cond = {
            let inv = a.clone().try_inverse().unwrap();
            let n1 = |m: &DMatrix<f64>| (0..3).map(|j| m.column(j).abs().sum()).fold(0.0, f64::max);
            n1(&a) * n1(&inv)
        };
        // Hager's estimate is a lower bound, usually exact for small n.
        assert!(s.condition() <= exact_cond * (1.0 + 1e-12));
        assert!(s.condition() >= 0.3 * exact_cond);
    }

    #[test]
    fn rejects_asymmetric_and_singular() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(matches!(
            SymmetricSolver::new(a),
            Err(Error::InvalidInput(_))
        ));
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(
            SymmetricSolver::new(s),
            Err(Error::SingularSystem(_))
        ));
        let near = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-15]);
        assert!(matches!(
            SymmetricSolver::new(near),
            Err(Error::SingularSystem(_))
        ));
    }
}
