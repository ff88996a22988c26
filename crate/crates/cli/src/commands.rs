use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::Context as _;
use propopt::geometry::io::format_blade;
use propopt::geometry::{deform_blade, gauss_quadrature_grid, loft_surface};
use propopt::hydro::{force_csv_row, FORCE_CSV_HEADER};
use propopt::optim::{
    evaluate_fitness, ga_optimize, grad_optimize, history_csv, GaConfig, GaPreset, GradConfig,
    OptResult, PenaltySpec,
};
use propopt::oracle::{
    build_dataset, export_dataset_csv, load_dataset, save_dataset, SamplingPlan, SnapshotDataset,
};
use propopt::pipeline::{EfficiencyPipeline, EvalPath};
use propopt::rom::{cv_report_csv, kfold_cv, load_rom, save_rom, Method, RomModel};
use propopt::{BladeDefinition, DeformationParams, Side};
use serde::Serialize;

use crate::config::PipelineConfig;
use crate::error::{usage, CliResult};

fn write_out(path: &Path, contents: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Writes data to stdout; a closed pipe (e.g. `| head`) is not an error.
fn out(text: &str) -> CliResult<()> {
    use std::io::Write as _;
    let mut stdout = std::io::stdout().lock();
    match stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush())
    {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn require(path: &Path, what: &str, hint: &str) -> CliResult<()> {
    if path.exists() {
        Ok(())
    } else {
        Err(usage(format!(
            "{what} not found: {} ({hint})",
            path.display()
        )))
    }
}

fn sections_csv(blade: &BladeDefinition) -> String {
    let mut out = String::from("section,radius_fraction,radius,pitch,chord,max_thickness\n");
    for (i, s) in blade.sections.iter().enumerate() {
        let _ = writeln!(
            out,
            "{i},{},{},{},{},{}",
            s.radius_fraction,
            s.radius_fraction * blade.tip_radius,
            s.pitch,
            s.chord,
            s.max_thickness()
        );
    }
    out
}

fn areas_csv(cfg: &PipelineConfig, blade: &BladeDefinition) -> CliResult<String> {
    let surface = loft_surface(blade)?;
    let grid = gauss_quadrature_grid(&surface, cfg.quadrature[0], cfg.quadrature[1])?;
    let (face, back) = (grid.area(Side::Face), grid.area(Side::Back));
    Ok(format!(
        "side,area\nface,{face}\nback,{back}\ntotal,{}\n",
        face + back
    ))
}

fn blade_summary(cfg: &PipelineConfig, blade: &BladeDefinition) -> CliResult<()> {
    let sections = sections_csv(blade);
    let areas = areas_csv(cfg, blade)?;
    write_out(&cfg.out_dir.join("blade_sections.csv"), &sections)?;
    write_out(&cfg.out_dir.join("blade_areas.csv"), &areas)?;
    eprint!("{areas}");
    out(&sections)
}

pub fn blade_show(cfg: &PipelineConfig) -> CliResult<()> {
    let blade = cfg.load_blade()?;
    blade_summary(cfg, &blade)
}

pub fn blade_deform(
    cfg: &PipelineConfig,
    mu: &DeformationParams,
    output: Option<PathBuf>,
) -> CliResult<()> {
    let blade = cfg.load_blade()?;
    let deformed = deform_blade(&blade, mu)?;
    let path = output.unwrap_or_else(|| cfg.out_dir.join("blade_deformed.def"));
    write_out(&path, format_blade(&deformed))?;
    eprintln!("wrote {}", path.display());
    blade_summary(cfg, &deformed)
}

fn parse_plan(spec: &str, seed: u64) -> CliResult<SamplingPlan> {
    let bad = || {
        usage(format!(
            "plan '{spec}': expected '<n>+corners', '<n>' or 'corners'"
        ))
    };
    let (n_random, corners) = match spec.trim() {
        "corners" => (0, true),
        s => match s.strip_suffix("+corners") {
            Some(n) => (n.parse().map_err(|_| bad())?, true),
            None => (s.parse().map_err(|_| bad())?, false),
        },
    };
    if n_random == 0 && !corners {
        return Err(usage("plan has no designs"));
    }
    Ok(SamplingPlan {
        n_random,
        corners,
        seed,
    })
}

pub fn dataset_generate(
    cfg: &PipelineConfig,
    plan: Option<&str>,
    path: EvalPath,
    csv: bool,
) -> CliResult<()> {
    let blade = cfg.load_blade()?;
    let plan = match plan {
        Some(s) => parse_plan(s, cfg.seed)?,
        None => cfg.sampling_plan(),
    };
    let grid = cfg.grid(path);
    let start = Instant::now();
    let ds = build_dataset(&blade, &plan, &cfg.bounds, grid, &cfg.operating_point)?;
    let secs = start.elapsed().as_secs_f64();
    let file = cfg.dataset_path(path);
    if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_dataset(&ds, &file)?;
    if csv {
        let dir = cfg.out_dir.join(format!("dataset_{}_csv", path.name()));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        export_dataset_csv(&ds, &dir)?;
    }
    eprintln!("wrote {} in {secs:.2} s", file.display());
    out(&format!(
        "n_snapshots,n_dof,n_fields,grid\n{},{},{},{}\n",
        ds.n_snapshots(),
        ds.n_dof(),
        ds.fields.len(),
        grid
    ))
}

fn load_matching_dataset(cfg: &PipelineConfig, path: EvalPath) -> CliResult<SnapshotDataset> {
    let file = cfg.dataset_path(path);
    require(
        &file,
        "dataset",
        &format!("run `propopt dataset generate --path {}`", path.name()),
    )?;
    let ds = load_dataset(&file)?;
    let kind_matches = std::mem::discriminant(&ds.grid) == std::mem::discriminant(&cfg.grid(path));
    if !kind_matches {
        return Err(usage(format!(
            "{} holds a {} dataset, not a {} one",
            file.display(),
            ds.grid,
            path.name()
        )));
    }
    Ok(ds)
}

pub fn rom_train(cfg: &PipelineConfig, path: EvalPath, method: Option<&str>) -> CliResult<()> {
    let ds = load_matching_dataset(cfg, path)?;
    let mut rom_config = cfg.rom_config.clone();
    if let Some(name) = method {
        rom_config.method = Method::from_name(name)?;
        rom_config.per_field.clear();
    }
    let start = Instant::now();
    let rom = RomModel::train(&ds, &rom_config)?;
    let secs = start.elapsed().as_secs_f64();
    let file = cfg.rom_path(path);
    if let Some(dir) = file.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_rom(&rom, &file)?;
    eprintln!("wrote {} in {secs:.2} s", file.display());
    let mut table = String::from("field,method,rank,n_dof\n");
    for f in &rom.fields {
        let _ = writeln!(
            table,
            "{},{},{},{}",
            f.name,
            f.approximant.method().name(),
            f.basis.modes.ncols(),
            f.basis.modes.nrows()
        );
    }
    out(&table)
}

pub fn rom_validate(cfg: &PipelineConfig, path: EvalPath, folds: Option<usize>) -> CliResult<()> {
    let ds = load_matching_dataset(cfg, path)?;
    let k = folds.unwrap_or(cfg.cv_folds);
    let start = Instant::now();
    let mut results = Vec::new();
    for method in [Method::RBF, Method::GPR, Method::KNR] {
        results.extend(kfold_cv(&ds, method, k, cfg.rom_config.truncation)?);
    }
    let report = cv_report_csv(&results);
    let file = cfg.out_dir.join(format!("cv_{}.csv", path.name()));
    write_out(&file, &report)?;
    eprintln!(
        "wrote {} in {:.2} s",
        file.display(),
        start.elapsed().as_secs_f64()
    );
    out(&report)
}

fn build_pipeline(
    cfg: &PipelineConfig,
    blade: &BladeDefinition,
    path: EvalPath,
    oracle: bool,
) -> CliResult<EfficiencyPipeline> {
    if oracle {
        return Ok(EfficiencyPipeline::with_oracle(
            blade,
            cfg.operating_point,
            cfg.grid(path),
        )?);
    }
    let file = cfg.rom_path(path);
    require(
        &file,
        "ROM",
        &format!("run `propopt rom train --path {}`", path.name()),
    )?;
    let rom = load_rom(&file)?;
    let pipeline = EfficiencyPipeline::with_rom(blade, cfg.operating_point, Arc::new(rom))?;
    if pipeline.path() != path {
        return Err(usage(format!(
            "{} was trained on a {} grid, which drives the {} path",
            file.display(),
            pipeline.grid(),
            pipeline.path().name()
        )));
    }
    Ok(pipeline)
}

pub fn predict(
    cfg: &PipelineConfig,
    mu: &DeformationParams,
    path: EvalPath,
    oracle: bool,
) -> CliResult<()> {
    let blade = cfg.load_blade()?;
    let pipeline = build_pipeline(cfg, &blade, path, oracle)?;
    if !cfg.bounds.contains(mu) {
        eprintln!("warning: {mu} lies outside the parameter box");
    }
    let start = Instant::now();
    let r = pipeline.evaluate(mu)?;
    let secs = start.elapsed().as_secs_f64();
    out(&format!(
        "{FORCE_CSV_HEADER},seconds\n{},{secs:.6}\n",
        force_csv_row(mu, &r, path.name())
    ))
}

pub struct RunOptions {
    pub path: EvalPath,
    pub oracle: bool,
    pub constrained: bool,
}

#[derive(Debug, Serialize)]
struct RunSummary {
    optimizer: String,
    path: &'static str,
    source: &'static str,
    constrained: bool,
    seed: Option<u64>,
    initial_mu: [f64; 4],
    best_mu: [f64; 4],
    best_fitness: f64,
    eta_start: f64,
    eta_best: f64,
    /// Efficiency gain over μ = [1, 1, 1, 1], in percentage points.
    delta: f64,
    /// The same gain re-evaluated with oracle fields on the same grid.
    delta_oracle: Option<f64>,
    func_evals: usize,
    grad_evals: usize,
    iterations: usize,
    message: String,
}

struct Study {
    pipeline: EfficiencyPipeline,
    penalties: PenaltySpec,
    eta_start: f64,
}

impl Study {
    fn new(cfg: &PipelineConfig, opts: &RunOptions) -> CliResult<Self> {
        let blade = cfg.load_blade()?;
        let pipeline = build_pipeline(cfg, &blade, opts.path, opts.oracle)?;
        let start = pipeline.evaluate(&DeformationParams::IDENTITY)?;
        let penalties = if opts.constrained {
            PenaltySpec::example(start.kt)
        } else {
            PenaltySpec::none()
        };
        Ok(Self {
            pipeline,
            penalties,
            eta_start: start.eta,
        })
    }

    fn fitness<'a>(
        &'a self,
        cfg: &'a PipelineConfig,
    ) -> impl Fn(&DeformationParams) -> propopt::Result<f64> + Sync + 'a {
        move |mu| evaluate_fitness(mu, &cfg.bounds, &self.pipeline, &self.penalties)
    }

    fn summarize(
        &self,
        cfg: &PipelineConfig,
        opts: &RunOptions,
        optimizer: String,
        seed: Option<u64>,
        r: &OptResult,
    ) -> CliResult<RunSummary> {
        let eta_best = self.pipeline.evaluate(&r.best.genes)?.eta;
        let delta_oracle = if self.pipeline.is_rom() {
            let oracle = EfficiencyPipeline::with_oracle(
                self.pipeline.blade(),
                cfg.operating_point,
                self.pipeline.grid(),
            )?;
            let e0 = oracle.evaluate(&DeformationParams::IDENTITY)?.eta;
            let e1 = oracle.evaluate(&r.best.genes)?.eta;
            Some(100.0 * (e1 - e0))
        } else {
            None
        };
        Ok(RunSummary {
            optimizer,
            path: opts.path.name(),
            source: if self.pipeline.is_rom() {
                "rom"
            } else {
                "oracle"
            },
            constrained: opts.constrained,
            seed,
            initial_mu: r.initial.genes.to_array(),
            best_mu: r.best.genes.to_array(),
            best_fitness: r.best.fitness,
            eta_start: self.eta_start,
            eta_best,
            delta: 100.0 * (eta_best - self.eta_start),
            delta_oracle,
            func_evals: r.func_evals,
            grad_evals: r.grad_evals,
            iterations: r.iterations,
            message: r.message.clone(),
        })
    }
}

fn run_stem(opts: &RunOptions, head: &str) -> String {
    let source = if opts.oracle { "_oracle" } else { "" };
    let constrained = if opts.constrained { "_constrained" } else { "" };
    format!("{head}_{}{source}{constrained}", opts.path.name())
}

fn emit(cfg: &PipelineConfig, stem: &str, summary: &RunSummary, r: &OptResult) -> CliResult<()> {
    let json = serde_json::to_string_pretty(summary)? + "\n";
    write_out(
        &cfg.out_dir.join(format!("{stem}_history.csv")),
        history_csv(&r.history),
    )?;
    write_out(&cfg.out_dir.join(format!("{stem}_summary.json")), &json)?;
    out(&json)
}

pub fn optimize_ga(
    cfg: &PipelineConfig,
    ga: &GaConfig,
    preset: GaPreset,
    opts: &RunOptions,
) -> CliResult<()> {
    let study = Study::new(cfg, opts)?;
    let start = Instant::now();
    let r = ga_optimize(ga, &cfg.bounds, &study.fitness(cfg))?;
    let secs = start.elapsed().as_secs_f64();
    let name = match preset {
        GaPreset::Standard => "standard",
        GaPreset::Fast => "fast",
    };
    let summary = study.summarize(cfg, opts, format!("ga-{name}"), Some(ga.seed), &r)?;
    emit(cfg, &run_stem(opts, &format!("ga_{name}")), &summary, &r)?;
    eprintln!("{} evaluations in {secs:.2} s", r.func_evals);
    Ok(())
}

fn bracketed(mu: &DeformationParams) -> String {
    let a = mu.to_array();
    format!("\"[{}, {}, {}, {}]\"", a[0], a[1], a[2], a[3])
}

pub fn optimize_grad(
    cfg: &PipelineConfig,
    grad: &GradConfig,
    x0: &DeformationParams,
    test: &str,
    opts: &RunOptions,
) -> CliResult<()> {
    if !cfg.bounds.contains(x0) {
        return Err(usage(format!(
            "start point {x0} lies outside the parameter box"
        )));
    }
    if test.contains([',', '"', '\n']) {
        return Err(usage(
            "test label may not contain commas, quotes or newlines",
        ));
    }
    let study = Study::new(cfg, opts)?;
    let start = Instant::now();
    let r = grad_optimize(grad, &cfg.bounds, &study.fitness(cfg), x0)?;
    let secs = start.elapsed().as_secs_f64();
    let method = grad.method.name();
    let summary = study.summarize(cfg, opts, method.to_string(), None, &r)?;
    let stem = run_stem(opts, &format!("grad_{method}_test{test}"));
    emit(cfg, &stem, &summary, &r)?;
    let table = format!(
        "test,method,initial_guess,func_evals,grad_evals,delta,final_point\n{test},{method},{},{},{},{:.6},{}\n",
        bracketed(x0),
        r.func_evals,
        r.grad_evals,
        summary.delta,
        bracketed(&r.best.genes)
    );
    write_out(&cfg.out_dir.join(format!("{stem}_table.csv")), table)?;
    eprintln!(
        "{} function and {} gradient evaluations in {secs:.2} s",
        r.func_evals, r.grad_evals
    );
    Ok(())
}
