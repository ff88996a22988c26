//! Regression of POD coefficients over the (normalized) parameter space.
//!
//! Parameters are mapped affinely onto `[0, 1]^4` using the parameter box.
//! The RBF and GPR variants fit the deviation of the coefficients from
//! their training mean, so constant data is reproduced exactly everywhere.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{DeformationParams, ParameterBox};
use crate::linalg::SymmetricSolver;

/// Approximation method and its hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Method {
    /// Multiquadric `√(1 + (εr)²)` interpolation.
    Rbf { epsilon: f64 },
    /// Squared-exponential Gaussian process mean.
    Gpr { length_scale: f64, jitter: f64 },
    /// Uniform-weight k-nearest-neighbour average.
    Knr { k: usize },
}

impl Method {
    pub const RBF: Method = Method::Rbf { epsilon: 1.0 };
    pub const GPR: Method = Method::Gpr {
        length_scale: 0.5,
        jitter: 1e-10,
    };
    pub const KNR: Method = Method::Knr { k: 5 };

    pub fn name(&self) -> &'static str {
        match self {
            Method::Rbf { .. } => "rbf",
            Method::Gpr { .. } => "gpr",
            Method::Knr { .. } => "knr",
        }
    }

    /// Default hyper-parameters for a method name.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "rbf" => Ok(Self::RBF),
            "gpr" => Ok(Self::GPR),
            "knr" => Ok(Self::KNR),
            other => Err(Error::InvalidInput(format!(
                "unknown approximation method '{other}' (expected rbf, gpr or knr)"
            ))),
        }
    }

    fn min_samples(&self) -> usize {
        match *self {
            Method::Knr { k } => k,
            _ => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Method::Rbf { epsilon } => epsilon.is_finite() && epsilon > 0.0,
            Method::Gpr {
                length_scale,
                jitter,
            } => {
                length_scale.is_finite()
                    && length_scale > 0.0
                    && jitter.is_finite()
                    && jitter >= 0.0
            }
            Method::Knr { k } => k >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid hyper-parameters {self:?}"
            )))
        }
    }
}

impl Default for Method {
    fn default() -> Self {
        Self::RBF
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Fitted internals.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Fitted {
    /// `M × L` weights over the centered targets, plus the mean.
    Kernel {
        weights: DMatrix<f64>,
        mean: DVector<f64>,
    },
    /// `M × L` training targets.
    Neighbours { targets: DMatrix<f64> },
}

/// Fitted coefficient regressor.
#[derive(Debug, Clone, PartialEq)]
pub struct Approximant {
    pub(crate) method: Method,
    pub(crate) bounds: ParameterBox,
    pub(crate) centers: Vec<[f64; 4]>,
    pub(crate) fitted: Fitted,
}

fn dist2(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn kernel(method: &Method, d2: f64) -> f64 {
    match *method {
        Method::Rbf { epsilon } => (1.0 + epsilon * epsilon * d2).sqrt(),
        Method::Gpr { length_scale, .. } => (-0.5 * d2 / (length_scale * length_scale)).exp(),
        Method::Knr { .. } => unreachable!("nearest neighbours have no kernel"),
    }
}

impl Approximant {
    /// Fits `coeffs` (`L × M`, one column per design) at `params`.
    pub fn fit(
        params: &[DeformationParams],
        coeffs: &DMatrix<f64>,
        method: Method,
        bounds: &ParameterBox,
    ) -> Result<Self> {
        method.validate()?;
        let m = params.len();
        if coeffs.ncols() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: coeffs.ncols(),
            });
        }
        if m < method.min_samples() {
            return Err(Error::InvalidInput(format!(
                "{method} needs at least {} samples, got {m}",
                method.min_samples()
            )));
        }
        let centers: Vec<[f64; 4]> = params.iter().map(|p| bounds.normalize(p)).collect();
        let targets = coeffs.transpose();
        let fitted = match method {
            Method::Knr { .. } => Fitted::Neighbours { targets },
            _ => {
                let mean = DVector::from_fn(targets.ncols(), |j, _| targets.column(j).mean());
                let centered =
                    DMatrix::from_fn(m, targets.ncols(), |i, j| targets[(i, j)] - mean[j]);
                let mut k = DMatrix::from_fn(m, m, |i, j| {
                    kernel(&method, dist2(&centers[i], &centers[j]))
                });
                if let Method::Gpr { jitter, .. } = method {
                    for i in 0..m {
                        k[(i, i)] += jitter;
                    }
                }
                let weights = match method {
                    Method::Gpr { .. } => k
                        .cholesky()
                        .ok_or_else(|| {
                            Error::SingularSystem("GPR covariance is not positive definite".into())
                        })?
                        .solve(&centered),
                    _ => SymmetricSolver::new(k)?.solve(&centered),
                };
                Fitted::Kernel { weights, mean }
            }
        };
        Ok(Self {
            method,
            bounds: *bounds,
            centers,
            fitted,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn n_samples(&self) -> usize {
        self.centers.len()
    }

    pub fn n_outputs(&self) -> usize {
        match &self.fitted {
            Fitted::Kernel { mean, .. } => mean.len(),
            Fitted::Neighbours { targets } => targets.ncols(),
        }
    }

    /// Coefficient vector at `mu`. Out-of-box parameters are extrapolated.
    pub fn predict(&self, mu: &DeformationParams) -> DVector<f64> {
        let z = self.bounds.normalize(mu);
        match &self.fitted {
            Fitted::Kernel { weights, mean } => {
                let phi = DVector::from_iterator(
                    self.centers.len(),
                    self.centers
                        .iter()
                        .map(|c| kernel(&self.method, dist2(&z, c))),
                );
                weights.tr_mul(&phi) + mean
            }
            Fitted::Neighbours { targets } => {
                let k = match self.method {
                    Method::Knr { k } => k,
                    _ => unreachable!(),
                };
                let mut order: Vec<(f64, usize)> = self
                    .centers
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (dist2(&z, c), i))
                    .collect();
                order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut out = DVector::zeros(targets.ncols());
                for &(_, i) in &order[..k] {
                    out += targets.row(i).transpose();
                }
                out / k as f64
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(m: usize, l: usize, seed: u64) -> (Vec<DeformationParams>, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b = ParameterBox::default();
        let params: Vec<_> = (0..m)
            .map(|_| b.denormalize(&[rng.random(), rng.random(), rng.random(), rng.random()]))
            .collect();
        let coeffs = DMatrix::from_fn(l, m, |i, j| {
            let z = b.normalize(&params[j]);
            (i as f64 + 1.0) * (z[0] + 2.0 * z[1] * z[2]).sin() + z[3] * z[3]
        });
        (params, coeffs)
    }

    #[test]
    fn rbf_interpolates_training_data() {
        let (p, c) = data(150, 5, 1);
        let a = Approximant::fit(&p, &c, Method::RBF, &ParameterBox::default()).unwrap();
        for (j, mu) in p.iter().enumerate() {
            let y = a.predict(mu);
            let t = c.column(j);
            assert!(
                (&y - t).norm() <= 1e-8 * t.norm(),
                "{}",
                (&y - t).norm() / t.norm()
            );
        }
    }

    #[test]
    fn rbf_two_points() {
        let p = [
            DeformationParams::IDENTITY,
            DeformationParams::new(1.1, 0.8, 1.3, 0.7),
        ];
        let c = DMatrix::from_row_slice(1, 2, &[2.0, -1.0]);
        let a = Approximant::fit(&p, &c, Method::RBF, &ParameterBox::default()).unwrap();
        assert!((a.predict(&p[0])[0] - 2.0).abs() < 1e-12);
        assert!((a.predict(&p[1])[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn gpr_reproduces_training_data() {
        let (p, c) = data(100, 3, 2);
        for jitter in [1e-10, 0.0] {
            let method = Method::Gpr {
                length_scale: 0.5,
                jitter,
            };
            match Approximant::fit(&p, &c, method, &ParameterBox::default()) {
                Ok(a) => {
                    for (j, mu) in p.iter().enumerate() {
                        let t = c.column(j);
                        assert!((a.predict(mu) - t).norm() <= 1e-6 * t.norm());
                    }
                }
                // Without jitter the covariance may be numerically
                // indefinite; that must surface as a singular system.
                Err(e) => assert!(jitter == 0.0 && matches!(e, Error::SingularSystem(_))),
            }
        }
    }

    #[test]
    fn knr_means_of_neighbours() {
        let (p, c) = data(20, 2, 3);
        let a = Approximant::fit(&p, &c, Method::KNR, &ParameterBox::default()).unwrap();
        let b = ParameterBox::default();
        let z0 = b.normalize(&p[4]);
        let mut order: Vec<usize> = (0..20).collect();
        order.sort_by(|&i, &j| {
            dist2(&z0, &b.normalize(&p[i])).total_cmp(&dist2(&z0, &b.normalize(&p[j])))
        });
        assert_eq!(order[0], 4);
        let expect: DVector<f64> = order[..5]
            .iter()
            .map(|&i| c.column(i).into_owned())
            .sum::<DVector<f64>>()
            / 5.0;
        assert!((a.predict(&p[4]) - expect).norm() < 1e-14);
        let one = Approximant::fit(&p, &c, Method::Knr { k: 1 }, &ParameterBox::default()).unwrap();
        for (j, mu) in p.iter().enumerate() {
            assert_eq!(one.predict(mu), c.column(j).into_owned());
        }
    }

    #[test]
    fn constant_targets_are_constant_everywhere() {
        let (p, _) = data(30, 1, 4);
        let c = DMatrix::from_element(2, 30, 3.5);
        for method in [Method::RBF, Method::GPR, Method::KNR] {
            let a = Approximant::fit(&p, &c, method, &ParameterBox::default()).unwrap();
            let y = a.predict(&DeformationParams::new(1.03, 0.91, 1.2, 0.8));
            assert!(
                (y - DVector::from_element(2, 3.5)).amax() < 1e-12,
                "{method}"
            );
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let (p, c) = data(4, 2, 5);
        let b = ParameterBox::default();
        assert!(Approximant::fit(&p[..1], &c.columns(0, 1).into_owned(), Method::RBF, &b).is_err());
        assert!(Approximant::fit(&p, &c, Method::KNR, &b).is_err());
        assert!(Approximant::fit(&p, &c, Method::Rbf { epsilon: 0.0 }, &b).is_err());
        assert!(Approximant::fit(&p[..3], &c, Method::RBF, &b).is_err());
        let dup = [p[0], p[0], p[1]];
        assert!(matches!(
            Approximant::fit(&dup, &c.columns(0, 3).into_owned(), Method::RBF, &b),
            Err(Error::SingularSystem(_))
        ));
        assert!(Method::from_name("svm").is_err());
    }
}
