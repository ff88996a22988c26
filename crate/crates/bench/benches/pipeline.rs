use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use nalgebra::{DMatrix, Vector3};
use propopt::geometry::{
    deform_blade, gauss_quadrature_grid, loft_surface, sample_surface, GridSpec,
};
use propopt::morph::{train, RbfKernel};
use propopt::optim::{ga_optimize, GaConfig, GaPreset};
use propopt::oracle::{build_dataset, OperatingPoint, SamplingPlan, SnapshotOracle};
use propopt::pipeline::EfficiencyPipeline;
use propopt::rom::{compute_pod, RomConfig, RomModel, Truncation};
use propopt::{BladeDefinition, DeformationParams, ParameterBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MU: DeformationParams = DeformationParams::new(1.05, 0.9, 1.2, 0.8);

fn geometry(c: &mut Criterion) {
    let blade = BladeDefinition::synthetic_baseline();
    c.bench_function("deform_and_loft", |b| {
        b.iter(|| loft_surface(&deform_blade(black_box(&blade), &MU).unwrap()).unwrap())
    });
    let surface = loft_surface(&blade).unwrap();
    c.bench_function("quadrature_grid_30x30", |b| {
        b.iter(|| gauss_quadrature_grid(black_box(&surface), 30, 30).unwrap())
    });
    c.bench_function("lattice_100x100", |b| {
        b.iter(|| sample_surface(black_box(&surface), 100, 100).unwrap())
    });
}

fn morphing(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut cloud = |n: usize| -> Vec<Vector3<f64>> {
        (0..n)
            .map(|_| Vector3::new(rng.random(), rng.random(), rng.random()))
            .collect()
    };
    let undef = cloud(200);
    let def: Vec<_> = undef
        .iter()
        .map(|p| p * 1.05 + Vector3::new(0.01, 0.0, -0.02))
        .collect();
    let targets = cloud(10_000);
    c.bench_function("rbf_train_200", |b| {
        b.iter(|| train(black_box(&undef), &def, RbfKernel::ThinPlateSpline).unwrap())
    });
    let deformer = train(&undef, &def, RbfKernel::ThinPlateSpline).unwrap();
    c.bench_function("rbf_apply_200x10k", |b| {
        b.iter(|| deformer.apply(black_box(&targets)))
    });
}

fn reduced_order(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let s = DMatrix::from_fn(19_200, 216, |_, _| rng.random::<f64>());
    c.bench_function("pod_19200x216", |b| {
        b.iter(|| compute_pod(black_box(&s), Truncation::Rank(20)).unwrap())
    });

    let blade = BladeDefinition::synthetic_baseline();
    let op = OperatingPoint::default();
    let oracle = SnapshotOracle::new(&blade, op).unwrap();
    let grid = GridSpec::Quadrature { n_u: 30, n_v: 30 };
    let (points, _) = grid.samples(&loft_surface(&blade).unwrap()).unwrap();
    c.bench_function("oracle_eval_10800", |b| {
        b.iter(|| oracle.eval(black_box(&points), &MU).unwrap())
    });

    let plan = SamplingPlan {
        n_random: 48,
        corners: true,
        seed: 0,
    };
    let ds = build_dataset(&blade, &plan, &ParameterBox::default(), grid, &op).unwrap();
    let rom = Arc::new(RomModel::train(&ds, &RomConfig::default()).unwrap());
    c.bench_function("rom_predict_fast_grid", |b| {
        b.iter(|| rom.predict(black_box(&MU)))
    });

    let fast = EfficiencyPipeline::with_rom(&blade, op, rom).unwrap();
    c.bench_function("eta_fast_rom", |b| {
        b.iter(|| fast.evaluate(black_box(&MU)).unwrap())
    });
    let standard =
        EfficiencyPipeline::with_oracle(&blade, op, GridSpec::Lattice { n_u: 100, n_v: 100 })
            .unwrap();
    c.bench_function("eta_standard_oracle_100x100", |b| {
        b.iter(|| standard.evaluate(black_box(&MU)).unwrap())
    });
}

fn optimizer(c: &mut Criterion) {
    let bounds = ParameterBox::default();
    let f = |mu: &DeformationParams| -> propopt::Result<f64> {
        Ok(-mu
            .to_array()
            .iter()
            .map(|x| (x - 1.02) * (x - 1.02))
            .sum::<f64>())
    };
    c.bench_function("ga_fast_preset_quadratic", |b| {
        b.iter_batched(
            || GaConfig::preset(GaPreset::Fast, 3),
            |cfg| ga_optimize(&cfg, &bounds, &f).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = geometry, morphing, reduced_order, optimizer
}
criterion_main!(benches);
