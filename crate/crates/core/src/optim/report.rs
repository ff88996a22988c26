use serde::{Deserialize, Serialize};

use crate::geometry::DeformationParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Individual {
    pub genes: DeformationParams,
    pub fitness: f64,
}

/// Population statistics after selection (generation 0 is the initial
/// population).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

/// Outcome of a genetic or gradient run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best: Individual,
    pub initial: Individual,
    /// One entry per generation (GA) or per accepted iterate (gradient).
    pub history: Vec<GenerationStats>,
    /// Fitness calls, finite-difference probes included.
    pub func_evals: usize,
    /// Gradient evaluations (zero for the GA).
    pub grad_evals: usize,
    pub iterations: usize,
    pub message: String,
}

pub fn history_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best_fitness,mean_fitness\n");
    for h in history {
        out.push_str(&format!(
            "{},{:.12e},{:.12e}\n",
            h.generation, h.best_fitness, h.mean_fitness
        ));
    }
    out
}
