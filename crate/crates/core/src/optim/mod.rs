//! Genetic (μ+λ) optimization and gradient-based baselines over the four
//! deformation factors, plus the penalized-efficiency fitness.

mod fitness;
mod ga;
mod grad;
mod report;

pub use fitness::{evaluate_fitness, Penalty, PenaltySpec};
pub use ga::{ga_optimize, gaussian_mutation, one_point_crossover, GaConfig, GaPreset};
pub use grad::{fd_gradient, grad_optimize, GradConfig, GradMethod};
pub use report::{history_csv, GenerationStats, Individual, OptResult};
