use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use wrom::artifact::{load_model, save_model};
use wrom::evaluation::{compare_curves, error_curve, expectation_field, TestSet};
use wrom::experiments::{build_pod_training, build_reduced_model, greedy_pool_size, pod_from_training, Figure, Recipe};
use wrom::fem::{Field, Mesh};
use wrom::greedy::{run_greedy, GreedyOptions};
use wrom::online::{reduced_solve, ReducedModel};
use wrom::pod::PodOptions;
use wrom::quadrature::{full_tensor, smolyak, RuleFamily, DEFAULT_NODE_BUDGET};
use wrom::stochastics::{BetaBox, Seed};
use wrom::thermal_block::{AffineModel, ParameterPoint};
use wrom::training::build_greedy_pool;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::manifest::{Manifest, Seeds};

pub const COMMANDS: [&str; 7] =
    ["offline-pod", "offline-greedy", "evaluate", "expectation", "solve", "quadrature-dump", "reproduce"];

/// State accumulated while a command runs.
struct Run {
    config: RunConfig,
    dir: PathBuf,
    outputs: Vec<String>,
    timings: BTreeMap<String, f64>,
    results: BTreeMap<String, String>,
}

impl Run {
    fn file(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        self.outputs.push(name.to_string());
        Ok(BufWriter::new(File::create(self.dir.join(name))?))
    }

    fn timed<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_default() += t.elapsed().as_secs_f64();
        out
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.results.insert(key.to_string(), value.to_string());
    }
}

fn truth_model(k: usize, mesh: usize) -> Result<AffineModel, CliError> {
    Ok(AffineModel::new(Mesh::new(mesh)?, k)?)
}

/// Runs `command` with `config`, writing its outputs and a manifest into the
/// configured output directory.
pub fn execute(command: &str, config: RunConfig, threads: usize) -> Result<Manifest, CliError> {
    if !COMMANDS.contains(&command) {
        return Err(CliError::Config(format!("unknown command '{command}'")));
    }
    let dir = config.out_dir();
    std::fs::create_dir_all(&dir)?;
    let mut run = Run { config, dir, outputs: Vec::new(), timings: BTreeMap::new(), results: BTreeMap::new() };
    let start = Instant::now();
    match command {
        "offline-pod" => offline_pod(&mut run)?,
        "offline-greedy" => offline_greedy(&mut run)?,
        "evaluate" => evaluate(&mut run)?,
        "expectation" => expectation(&mut run)?,
        "solve" => solve(&mut run)?,
        "quadrature-dump" => quadrature_dump(&mut run)?,
        "reproduce" => reproduce(&mut run)?,
        _ => unreachable!(),
    }
    run.timings.insert("total".into(), start.elapsed().as_secs_f64());
    let manifest = Manifest {
        tool: "wrom".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        threads,
        outputs: run.outputs,
        seeds: Seeds::new(run.config.seed),
        timings: run.timings,
        results: run.results,
        config: run.config,
    };
    manifest.write(&run.dir)?;
    Ok(manifest)
}

fn offline_pod(run: &mut Run) -> Result<(), CliError> {
    let c = run.config.clone();
    let dist = c.distribution()?;
    let k = dist.dim();
    let variant = c.variant.ok_or_else(|| CliError::Config("offline-pod needs a variant".into()))?;
    let size = c.training_size(variant, k)?;
    let model = run.timed("assembly", || truth_model(k, c.mesh_for(k)))?;
    let ts = run.timed("training", || build_pod_training(variant, k, &dist, size, Seed(c.seed)))?;
    ts.write_csv(run.file("training.csv")?)?;
    let label = format!("pod-{variant}");
    let (rm, report) = run.timed("offline", || pod_from_training(&model, &dist, &ts, &label, run_pod_opts(&c)))?;
    save_model(&rm, None, &run.dir.join("model.json"))?;
    run.outputs.push("model.json".into());
    let mut w = csv::Writer::from_writer(run.file("eigenvalues.csv")?);
    w.write_record(["i", "lambda"])?;
    for (i, l) in rm.basis.eigenvalues.iter().enumerate() {
        w.write_record([(i + 1).to_string(), l.to_string()])?;
    }
    w.flush()?;
    run.note("n_training", report.n_training);
    run.note("n_snapshots", report.n_snapshots);
    run.note("pruned", report.pruned);
    run.note("clamped_negative", report.clamped_negative);
    run.note("clamped_mass", report.clamped_mass);
    run.note("basis_dim", report.basis_dim);
    println!("{label}: n_t = {}, {} truth solves, N = {}", report.n_training, report.n_snapshots, report.basis_dim);
    Ok(())
}

fn run_pod_opts(c: &RunConfig) -> PodOptions {
    PodOptions { n_max: c.n_max, tol_rel: c.tol_rel }
}

fn offline_greedy(run: &mut Run) -> Result<(), CliError> {
    let c = run.config.clone();
    let dist = c.distribution()?;
    let k = dist.dim();
    let n_t = c.n_t.unwrap_or_else(|| greedy_pool_size(k));
    let model = run.timed("assembly", || truth_model(k, c.mesh_for(k)))?;
    let pool = run.timed("training", || build_greedy_pool(c.pool, k, &dist, n_t, Seed(c.seed)))?;
    pool.write_csv(run.file("pool.csv")?)?;
    let opts = GreedyOptions { n_max: c.n_max, weight: c.weight, tolerance: c.greedy_tolerance };
    let state = run.timed("offline", || run_greedy(&model, &dist, &pool, opts))?;
    let termination = state.termination;
    let estimates = state.max_estimates.clone();
    let mut rm = state.into_reduced_model();
    let label = Recipe::Greedy { pool: c.pool, weight: c.weight, n_t }.label();
    rm.metadata.variant = Some(label.clone());
    save_model(&rm, termination, &run.dir.join("model.json"))?;
    run.outputs.push("model.json".into());

    let mut w = csv::Writer::from_writer(run.file("chosen.csv")?);
    let mut header = vec!["n".to_string()];
    header.extend((1..=k).map(|i| format!("y_{i}")));
    header.push("max_estimate".into());
    w.write_record(&header)?;
    for (n, y) in rm.metadata.chosen_parameters.iter().enumerate() {
        let mut row = vec![(n + 1).to_string()];
        row.extend(y.coords().iter().map(|v| v.to_string()));
        row.push(if n == 0 { String::new() } else { estimates[n - 1].to_string() });
        w.write_record(&row)?;
    }
    w.flush()?;
    run.note("n_training", pool.len());
    run.note("basis_dim", rm.len());
    run.note("termination", format!("{termination:?}"));
    println!("{label}: pool {}, N = {}, stopped by {termination:?}", pool.len(), rm.len());
    Ok(())
}

/// Reduced model from `--model` and the distribution stored with it.
fn load(run: &Run) -> Result<(ReducedModel, BetaBox), CliError> {
    let path = run.config.model.as_ref().ok_or_else(|| CliError::Config("this command needs --model".into()))?;
    let rm = load_model(path)?;
    let dist = match (&rm.metadata.alpha, &rm.metadata.beta) {
        (Some(a), Some(b)) => BetaBox::new(a.clone(), b.clone())?,
        _ => run.config.distribution()?,
    };
    if dist.dim() != rm.k() {
        return Err(wrom::Error::DimensionMismatch { expected: rm.k(), actual: dist.dim() }.into());
    }
    Ok((rm, dist))
}

fn evaluate(run: &mut Run) -> Result<(), CliError> {
    let c = run.config.clone();
    let (rm, dist) = load(run)?;
    let model = run.timed("assembly", || truth_model(rm.k(), rm.metadata.mesh_n))?;
    let test = run.timed("truth", || TestSet::draw(&model, &dist, c.m, Seed(c.seed)))?;
    let variant = rm.metadata.variant.clone().unwrap_or_else(|| "unknown".into());
    let curve = run.timed("online", || error_curve(&model, &rm, &test, &c.n_values(), &variant, &c.case))?;
    curve.write_csv(run.file("curve.csv")?)?;
    run.note("basis_dim", curve.basis_dim);
    run.note("singular", format!("{:?}", curve.singular));
    for (n, mse) in curve.n_values.iter().zip(&curve.mse) {
        println!("N = {n:3}  mse = {mse:.6e}");
    }
    Ok(())
}

fn write_field(run: &mut Run, name: &str, mesh: &Mesh, u: &Field) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(run.file(name)?);
    w.write_record(["x", "y", "u"])?;
    for (v, p) in mesh.vertices().iter().enumerate() {
        let value = mesh.interior_index(v).map_or(0.0, |i| u[i]);
        w.write_record([p[0].to_string(), p[1].to_string(), value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn expectation(run: &mut Run) -> Result<(), CliError> {
    let c = run.config.clone();
    let (rm, dist) = load(run)?;
    let n = c.n.unwrap_or(rm.len());
    let e = run.timed("online", || expectation_field(&rm, &dist, c.m, n, Seed(c.seed)))?;
    let mesh = Mesh::new(rm.metadata.mesh_n)?;
    write_field(run, "expectation.csv", &mesh, &e.field)?;
    run.note("N", n.min(rm.len()));
    run.note("mean_output", e.output);
    run.note("output_std_error", e.output_std_error);
    println!("E[s(u_N)] = {:.10e} ± {:.3e} (M = {}, N = {})", e.output, e.output_std_error, e.m, n.min(rm.len()));
    Ok(())
}

fn solve(run: &mut Run) -> Result<(), CliError> {
    let c = run.config.clone();
    let (rm, _) = load(run)?;
    let y = ParameterPoint::new(c.y.clone().ok_or_else(|| CliError::Config("solve needs --y".into()))?);
    let n = c.n.unwrap_or(rm.len());
    let sol = run.timed("online", || reduced_solve(&rm, &y, n))?;
    let mesh = Mesh::new(rm.metadata.mesh_n)?;
    write_field(run, "field.csv", &mesh, &rm.lift(&sol.coefficients))?;
    let s = rm.output(&sol.coefficients);
    run.note("output", s);
    run.note("condition", sol.condition);
    println!("s(u_N({y})) = {s:.12e}  (N = {n}, condition {:.3e})", sol.condition);
    Ok(())
}

fn family(c: &RunConfig) -> Result<RuleFamily, CliError> {
    let name = c.family.as_deref().ok_or_else(|| CliError::Config("quadrature-dump needs --family".into()))?;
    Ok(match name {
        "cc" | "clenshaw-curtis" => RuleFamily::ClenshawCurtis,
        "cc-linear" => RuleFamily::ClenshawCurtisLinear,
        "gl" | "gauss-legendre" => RuleFamily::GaussLegendre,
        "gj" | "gauss-jacobi" => RuleFamily::GaussJacobi {
            alpha: c.alpha.ok_or_else(|| CliError::Config("gauss-jacobi needs --alpha".into()))?,
            beta: c.beta.ok_or_else(|| CliError::Config("gauss-jacobi needs --beta".into()))?,
        },
        other => return Err(CliError::Config(format!("unknown quadrature family '{other}'"))),
    })
}

/// Writes `y_1..y_K,w` rows for a multivariate rule.
pub fn dump_rule(c: &RunConfig, out: impl Write) -> Result<usize, CliError> {
    let fam = family(c)?;
    let k = match c.k {
        Some(k) => k,
        None => c.preset()?.map(|p| p.k()).ok_or_else(|| CliError::Config("quadrature-dump needs --K".into()))?,
    };
    let q = c.q.ok_or_else(|| CliError::Config("quadrature-dump needs --q".into()))?;
    let rule = if c.smolyak {
        smolyak(fam, k, q, DEFAULT_NODE_BUDGET)?
    } else {
        full_tensor(fam, k, q, DEFAULT_NODE_BUDGET)?
    };
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = (1..=k).map(|i| format!("y_{i}")).collect();
    header.push("w".into());
    w.write_record(&header)?;
    for (y, wt) in rule.nodes.iter().zip(&rule.weights) {
        let mut row: Vec<String> = y.coords().iter().map(|v| v.to_string()).collect();
        row.push(wt.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(rule.len())
}

fn quadrature_dump(run: &mut Run) -> Result<(), CliError> {
    let c = run.config.clone();
    let n = dump_rule(&c, run.file("quadrature.csv")?)?;
    run.note("nodes", n);
    println!("{n} nodes");
    Ok(())
}

fn reproduce(run: &mut Run) -> Result<(), CliError> {
    let c = run.config.clone();
    let fig: Figure = c.figure.ok_or_else(|| CliError::Config("reproduce needs a figure id".into()))?;
    let (preset, recipes) = fig.panel(c.panel)?;
    let dist = preset.distribution();
    let k = preset.k();
    let model = run.timed("assembly", || truth_model(k, c.mesh_for(k)))?;
    let test = run.timed("truth", || TestSet::draw(&model, &dist, c.m, Seed(c.seed)))?;
    let n_values = c.n_values();
    let stem = format!("{fig}_{}", c.panel);
    let mut curves = Vec::new();
    for recipe in &recipes {
        let label = recipe.label();
        let (rm, report) = run.timed("offline", || build_reduced_model(&model, &dist, recipe, Seed(c.seed), run_pod_opts(&c)))?;
        let curve = run.timed("online", || error_curve(&model, &rm, &test, &n_values, &label, preset.name()))?;
        curve.write_csv(run.file(&format!("{stem}_{label}.csv"))?)?;
        run.note(&format!("{label}.n_training"), report.n_training);
        run.note(&format!("{label}.basis_dim"), report.basis_dim);
        if report.clamped_negative > 0 {
            run.note(&format!("{label}.clamped_negative"), report.clamped_negative);
        }
        if let Some(t) = report.termination {
            run.note(&format!("{label}.termination"), format!("{t:?}"));
        }
        if !curve.singular.is_empty() {
            run.note(&format!("{label}.singular"), format!("{:?}", curve.singular));
        }
        curves.push(curve);
    }
    let cmp = compare_curves(&curves)?;
    cmp.write_csv(run.file(&format!("{stem}_comparison.csv"))?)?;
    let summary = cmp.summary();
    run.file(&format!("{stem}_summary.txt"))?.write_all(summary.as_bytes())?;
    run.note("case", preset.name());
    print!("{fig} ({} panel, case {preset}, mesh {}, M = {})\n{summary}", c.panel, c.mesh_for(k), c.m);
    Ok(())
}
