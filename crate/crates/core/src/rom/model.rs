use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::approx::{Approximant, Method};
use super::pod::{compute_pod, project, PodBasis, Truncation};
use crate::error::{Error, Result};
use crate::geometry::{DeformationParams, GridSpec, ParameterBox};
use crate::oracle::SnapshotDataset;

/// Training options: one method for every field unless overridden.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct RomConfig {
    pub method: Method,
    pub per_field: BTreeMap<String, Method>,
    pub truncation: Truncation,
}

impl RomConfig {
    pub fn with_method(method: Method) -> Self {
        Self {
            method,
            ..Default::default()
        }
    }

    pub fn method_for(&self, field: &str) -> Method {
        self.per_field.get(field).copied().unwrap_or(self.method)
    }
}

/// POD basis and coefficient regressor for one field.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRom {
    pub name: String,
    pub basis: PodBasis,
    pub approximant: Approximant,
}

impl FieldRom {
    pub fn train(
        name: &str,
        snapshots: &DMatrix<f64>,
        params: &[DeformationParams],
        bounds: &ParameterBox,
        method: Method,
        truncation: Truncation,
    ) -> Result<Self> {
        let basis = compute_pod(snapshots, truncation)?;
        let coeffs = project(snapshots, &basis)?;
        let approximant = Approximant::fit(params, &coeffs, method, bounds)?;
        Ok(Self {
            name: name.to_string(),
            basis,
            approximant,
        })
    }

    pub fn predict(&self, mu: &DeformationParams) -> DVector<f64> {
        &self.basis.modes * self.approximant.predict(mu)
    }
}

/// Per-field reduced-order models sharing one parameter set.
#[derive(Debug, Clone, PartialEq)]
pub struct RomModel {
    pub grid: GridSpec,
    pub n_blades: usize,
    pub bounds: ParameterBox,
    pub fields: Vec<FieldRom>,
}

/// Fields predicted at one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RomPrediction {
    pub fields: Vec<(String, DVector<f64>)>,
    /// Set when the parameters lie outside the training box.
    pub out_of_box: bool,
}

impl RomPrediction {
    pub fn field(&self, name: &str) -> Option<&DVector<f64>> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

impl RomModel {
    /// Trains every field of `ds`; fields are independent and run in
    /// parallel.
    pub fn train(ds: &SnapshotDataset, config: &RomConfig) -> Result<Self> {
        ds.validate()?;
        let fields = ds
            .fields
            .par_iter()
            .map(|(name, s)| {
                FieldRom::train(
                    name,
                    s,
                    &ds.params,
                    &ds.bounds,
                    config.method_for(name),
                    config.truncation,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: ds.grid,
            n_blades: ds.n_blades,
            bounds: ds.bounds,
            fields,
        })
    }

    pub fn field(&self, name: &str) -> Option<&FieldRom> {
        self.fields.iter().find(|f| f.name == name)
    }

    pub fn n_dof(&self) -> usize {
        self.fields.first().map_or(0, |f| f.basis.n_dof())
    }

    pub fn predict(&self, mu: &DeformationParams) -> RomPrediction {
        RomPrediction {
            fields: self
                .fields
                .iter()
                .map(|f| (f.name.clone(), f.predict(mu)))
                .collect(),
            out_of_box: !self.bounds.contains(mu),
        }
    }

    /// Prediction of one field, or an error naming the missing field.
    pub fn predict_field(&self, name: &str, mu: &DeformationParams) -> Result<DVector<f64>> {
        self.field(name)
            .map(|f| f.predict(mu))
            .ok_or_else(|| Error::InvalidInput(format!("ROM has no field '{name}'")))
    }
}
