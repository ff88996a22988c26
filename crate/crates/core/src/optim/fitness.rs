use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{DeformationParams, ParameterBox};
use crate::hydro::ForceResult;
use crate::pipeline::EfficiencyPipeline;

/// One constraint turned into a non-negative hinge penalty.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Penalty {
    /// `max(0, min − μ_thickness)`.
    MinThickness { min: f64, weight: f64 },
    /// `max(0, |kT − kT_ref|/kT_ref − tolerance)`.
    ThrustBand {
        kt_ref: f64,
        tolerance: f64,
        weight: f64,
    },
}

impl Penalty {
    pub fn weight(&self) -> f64 {
        match *self {
            Penalty::MinThickness { weight, .. } | Penalty::ThrustBand { weight, .. } => weight,
        }
    }

    /// Unweighted constraint violation.
    pub fn value(&self, mu: &DeformationParams, forces: &ForceResult) -> f64 {
        match *self {
            Penalty::MinThickness { min, .. } => (min - mu.thickness).max(0.0),
            Penalty::ThrustBand {
                kt_ref, tolerance, ..
            } => ((forces.kt - kt_ref).abs() / kt_ref.abs() - tolerance).max(0.0),
        }
    }
}

/// Weighted penalties subtracted from the efficiency.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub terms: Vec<Penalty>,
}

impl PenaltySpec {
    pub fn none() -> Self {
        Self::default()
    }

    /// Shipped example constraints: thickness factor at least 0.9 (weight
    /// 10) and kT within 5 % of the baseline value (weight 5).
    pub fn example(kt_baseline: f64) -> Self {
        Self {
            terms: vec![
                Penalty::MinThickness {
                    min: 0.9,
                    weight: 10.0,
                },
                Penalty::ThrustBand {
                    kt_ref: kt_baseline,
                    tolerance: 0.05,
                    weight: 5.0,
                },
            ],
        }
    }

    pub fn total(&self, mu: &DeformationParams, forces: &ForceResult) -> f64 {
        self.terms
            .iter()
            .map(|p| p.weight() * p.value(mu, forces))
            .sum()
    }
}

/// `η − Σ wⱼ·penaltyⱼ` at the box-clipped parameters.
pub fn evaluate_fitness(
    mu: &DeformationParams,
    bounds: &ParameterBox,
    pipeline: &EfficiencyPipeline,
    penalties: &PenaltySpec,
) -> Result<f64> {
    let mu = bounds.clip(mu);
    let forces = pipeline.evaluate(&mu)?;
    Ok(forces.eta - penalties.total(&mu, &forces))
}
