//! (μ+λ) evolution strategy in the style of DEAP's `eaMuPlusLambda` with
//! `varOr` variation: each offspring comes from exactly one of crossover,
//! mutation or plain reproduction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{GenerationStats, Individual, OptResult};
use crate::error::{Error, Result};
use crate::geometry::{DeformationParams, ParameterBox};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaPreset {
    Standard,
    Fast,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    pub population: usize,
    /// Survivors per generation (μ).
    pub mu: usize,
    /// Offspring per generation (λ).
    pub lambda: usize,
    pub cxpb: f64,
    pub mutpb: f64,
    pub indpb: f64,
    pub sigma: f64,
    pub generations: usize,
    pub seed: u64,
}

impl GaConfig {
    pub fn preset(preset: GaPreset, seed: u64) -> Self {
        let (population, mu, lambda, indpb, generations) = match preset {
            GaPreset::Standard => (30, 5, 10, 0.5, 10),
            GaPreset::Fast => (150, 50, 80, 0.8, 20),
        };
        Self {
            population,
            mu,
            lambda,
            cxpb: 0.4,
            mutpb: 0.5,
            indpb,
            sigma: 0.1,
            generations,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if self.population == 0 || self.mu == 0 || self.lambda == 0 {
            return Err(Error::InvalidParameter(
                "population, μ and λ must be positive".into(),
            ));
        }
        if !(prob(self.cxpb) && prob(self.mutpb) && self.cxpb + self.mutpb <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "need cxpb, mutpb ≥ 0 and cxpb + mutpb ≤ 1, got {} and {}",
                self.cxpb, self.mutpb
            )));
        }
        if !prob(self.indpb) || !(self.sigma > 0.0) {
            return Err(Error::InvalidParameter(
                "need indpb in [0, 1] and σ > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Swaps the gene tails after a cut drawn uniformly from {1, 2, 3}.
pub fn one_point_crossover<R: Rng>(
    a: &DeformationParams,
    b: &DeformationParams,
    bounds: &ParameterBox,
    rng: &mut R,
) -> (DeformationParams, DeformationParams) {
    let cut = rng.random_range(1..4);
    let (mut x, mut y) = (a.to_array(), b.to_array());
    for k in cut..4 {
        std::mem::swap(&mut x[k], &mut y[k]);
    }
    (
        bounds.clip(&DeformationParams::from_array(x)),
        bounds.clip(&DeformationParams::from_array(y)),
    )
}

/// Multiplies each gene, with probability `indpb`, by a draw from
/// Normal(1, σ²), then clips to the box.
pub fn gaussian_mutation<R: Rng>(
    ind: &DeformationParams,
    sigma: f64,
    indpb: f64,
    bounds: &ParameterBox,
    rng: &mut R,
) -> DeformationParams {
    let normal = Normal::new(1.0, sigma).expect("σ validated positive");
    let mut g = ind.to_array();
    for v in &mut g {
        if rng.random::<f64>() < indpb {
            *v *= normal.sample(rng);
        }
    }
    bounds.clip(&DeformationParams::from_array(g))
}

// Independent stream per (generation, individual) so results do not depend
// on evaluation scheduling.
fn stream(seed: u64, generation: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | index as u64);
    rng
}

fn evaluate_all<F>(genes: &[DeformationParams], fitness: &F) -> Result<Vec<f64>>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    genes.par_iter().map(fitness).collect()
}

fn stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    GenerationStats {
        generation,
        best_fitness: pop
            .iter()
            .map(|i| i.fitness)
            .fold(f64::NEG_INFINITY, f64::max),
        mean_fitness: pop.iter().map(|i| i.fitness).sum::<f64>() / pop.len() as f64,
    }
}

fn select_best(mut pool: Vec<Individual>, mu: usize) -> Vec<Individual> {
    // Stable: ties keep parents ahead of offspring.
    pool.sort_by(|a, b| b.fitness.total_cmp(&a.fitness));
    pool.truncate(mu);
    pool
}

/// Maximizes `fitness` over the box. Offspring produced by reproduction keep
/// their parent's fitness and are not re-evaluated.
pub fn ga_optimize<F>(config: &GaConfig, bounds: &ParameterBox, fitness: &F) -> Result<OptResult>
where
    F: Fn(&DeformationParams) -> Result<f64> + Sync,
{
    config.validate()?;
    let mut init_rng = stream(config.seed, 0, u32::MAX as usize);
    let genes: Vec<DeformationParams> = (0..config.population)
        .map(|_| {
            let mut z = [0.0; 4];
            for v in &mut z {
                *v = init_rng.random::<f64>();
            }
            bounds.denormalize(&z)
        })
        .collect();
    let fit = evaluate_all(&genes, fitness)?;
    let mut func_evals = genes.len();
    let mut pop: Vec<Individual> = genes
        .into_iter()
        .zip(fit)
        .map(|(genes, fitness)| Individual { genes, fitness })
        .collect();
    let initial = *pop
        .iter()
        .max_by(|a, b| a.fitness.total_cmp(&b.fitness))
        .expect("non-empty population");
    let mut history = vec![stats(0, &pop)];
    for generation in 1..=config.generations {
        // Variation: (genes, inherited fitness if reproduced).
        let offspring: Vec<(DeformationParams, Option<f64>)> = (0..config.lambda)
            .map(|k| {
                let mut rng = stream(config.seed, generation, k);
                let choice = rng.random::<f64>();
                if choice < config.cxpb {
                    let i = rng.random_range(0..pop.len());
                    let mut j = rng.random_range(0..pop.len().max(2) - 1);
                    if pop.len() > 1 && j >= i {
                        j += 1;
                    }
                    let j = j.min(pop.len() - 1);
                    let (c, _) =
                        one_point_crossover(&pop[i].genes, &pop[j].genes, bounds, &mut rng);
                    (c, None)
                } else if choice < config.cxpb + config.mutpb {
                    let i = rng.random_range(0..pop.len());
                    (
                        gaussian_mutation(
                            &pop[i].genes,
                            config.sigma,
                            config.indpb,
                            bounds,
                            &mut rng,
                        ),
                        None,
                    )
                } else {
                    let i = rng.random_range(0..pop.len());
                    (pop[i].genes, Some(pop[i].fitness))
                }
            })
            .collect();
        let fresh: Vec<DeformationParams> = offspring
            .iter()
            .filter(|o| o.1.is_none())
            .map(|o| o.0)
            .collect();
        let mut fresh_fit = evaluate_all(&fresh, fitness)?.into_iter();
        func_evals += fresh.len();
        let mut pool = pop;
        pool.extend(offspring.into_iter().map(|(genes, inherited)| {
            Individual {
                genes,
                fitness: inherited
                    .unwrap_or_else(|| fresh_fit.next().expect("one fitness per fresh offspring")),
            }
        }));
        pop = select_best(pool, config.mu);
        history.push(stats(generation, &pop));
    }
    Ok(OptResult {
        best: pop[0],
        initial,
        history,
        func_evals,
        grad_evals: 0,
        iterations: config.generations,
        message: format!("{} generations", config.generations),
    })
}
