//! `jcid` command-line front end.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::IdeParams;
use crate::error::{Error, Result};
use crate::numfmt::format_number;
use crate::presets;
use crate::qmath::{ComplexMatrix, DensityOperator, ProbVec};
use crate::regions::{self, Frontier, GridConfig, TwoValueDist};
use crate::sim::{self, DetectionReport, SimConfig};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "JCID_OUT_DIR";
pub const MANIFEST_NAME: &str = "manifest.json";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "jcid", version, about = "Rate / detection-error regions for IDE channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute the achievable frontier for a parameter file.
    Region(RegionArgs),
    /// Write the curve bundle of a built-in example (1, 2 or 3).
    Example(ExampleArgs),
    /// Monte Carlo detection run with a mutual-information estimate.
    Simulate(SimulateArgs),
    /// Outer-bound point for an input ensemble.
    Converse(ConverseArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
struct RegionArgs {
    config: PathBuf,
    /// Use superdense coding over d^2 symbols.
    #[arg(long)]
    entangled: bool,
    /// p1 samples per support size.
    #[arg(long, default_value_t = regions::DEFAULT_P1_SAMPLES)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExampleArgs {
    id: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = regions::DEFAULT_P1_SAMPLES)]
    grid: usize,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    config: PathBuf,
    /// uniform | e<k> | list:p1,p2,... | two-value:n,p1
    #[arg(long, default_value = "uniform")]
    dist: String,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    entangled: bool,
    /// Also write the report CSV and a manifest here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConverseArgs {
    config: PathBuf,
    /// computational-basis | maximally-mixed[:M] | path to a JSON file
    #[arg(long, default_value = "computational-basis")]
    ensemble: String,
}

#[derive(Debug, Args)]
struct RerunArgs {
    manifest: PathBuf,
}

/// Record written next to every CSV output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments that reproduce the run, output paths resolved.
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub outputs: Vec<ManifestOutput>,
    pub version: String,
    pub duration_secs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestOutput {
    pub path: String,
    pub label: String,
    /// Parameter file contents that produced this output.
    pub params: String,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("manifest {}: {e}", path.display())))
    }

    fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text + "\n")?;
        Ok(())
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Region(a) => cmd_region(a),
        Command::Example(a) => cmd_example(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Converse(a) => cmd_converse(a),
        Command::Rerun(a) => cmd_rerun(a),
    }
}

fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."))
}

fn absolute(path: &Path) -> Result<PathBuf> {
    Ok(std::path::absolute(path)?)
}

fn path_arg(path: &Path) -> String {
    path.to_string_lossy().into_owned()
}

fn manifest_path_for(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest.json");
    csv.with_file_name(name)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(())
}

fn cmd_region(a: RegionArgs) -> Result<()> {
    let start = Instant::now();
    let params = IdeParams::load(&a.config)?;
    check_grid(a.grid)?;
    let d = params.d();
    let dim = if a.entangled { d * d } else { d };
    let out = absolute(&a.out.unwrap_or_else(|| default_out_dir().join("region.csv")))?;

    let frontier = regions::frontier_r1(dim, &params, &GridConfig::with_samples(a.grid));
    ensure_parent(&out)?;
    frontier.write_csv(&out)?;

    let mut args = vec!["region".to_string(), path_arg(&absolute(&a.config)?)];
    if a.entangled {
        args.push("--entangled".into());
    }
    args.extend(["--grid".into(), a.grid.to_string(), "--out".into(), path_arg(&out)]);
    let manifest = RunManifest {
        command: "region".into(),
        args,
        seed: None,
        outputs: vec![ManifestOutput { path: path_arg(&out), label: frontier.meta.label.clone(), params: params.to_config_string() }],
        version: env!("CARGO_PKG_VERSION").into(),
        duration_secs: start.elapsed().as_secs_f64(),
    };
    manifest.write(&manifest_path_for(&out))?;
    println!("{}", out.display());
    Ok(())
}

fn check_grid(grid: usize) -> Result<()> {
    if grid < 2 {
        return Err(Error::InvalidParams(format!("--grid {grid} must be at least 2")));
    }
    Ok(())
}

/// One named curve of an example bundle.
pub struct Curve {
    pub file: String,
    pub frontier: Frontier,
    pub params: IdeParams,
}

fn theta_tag(theta1: f64) -> String {
    format!("theta1_{}", format_number(theta1))
}

/// Curves of example `id` at the given grid resolution.
pub fn example_curves(id: u32, grid: &GridConfig) -> Result<Vec<Curve>> {
    let mut curves = Vec::new();
    match id {
        1 => {
            for theta1 in presets::EXAMPLE1_THETAS {
                let p = presets::example1(theta1);
                push_pair(&mut curves, &theta_tag(theta1), &p, grid);
            }
        }
        2 => {
            for t in presets::EXAMPLE2_STATE2 {
                let p = presets::example2(t);
                let tag = format!("alpha2_{}", format_number(t.alpha));
                push_pair(&mut curves, &tag, &p, grid);
            }
        }
        3 => {
            for theta1 in presets::EXAMPLE3_THETAS {
                let p = presets::example3(theta1);
                let tag = theta_tag(theta1);
                let d = p.d();
                curves.push(Curve {
                    file: format!("{tag}_entangled.csv"),
                    frontier: regions::frontier_r1(d * d, &p, grid),
                    params: p.clone(),
                });
                for at in presets::EXAMPLE3_ALPHA_TILDES {
                    curves.push(Curve {
                        file: format!("{tag}_alpha_tilde_{}.csv", format_number(at)),
                        frontier: regions::unreliable_frontier(&p, at, grid)?,
                        params: crate::channels::compose_unreliable(&p, at)?,
                    });
                }
                curves.push(Curve {
                    file: format!("{tag}_unentangled.csv"),
                    frontier: regions::frontier_r1(d, &p, grid),
                    params: p,
                });
            }
        }
        _ => return Err(Error::InvalidParams(format!("unknown example id {id} (expected 1, 2 or 3)"))),
    }
    Ok(curves)
}

fn push_pair(curves: &mut Vec<Curve>, tag: &str, p: &IdeParams, grid: &GridConfig) {
    let d = p.d();
    curves.push(Curve {
        file: format!("{tag}_unentangled.csv"),
        frontier: regions::frontier_r1(d, p, grid),
        params: p.clone(),
    });
    curves.push(Curve {
        file: format!("{tag}_entangled.csv"),
        frontier: regions::frontier_r1(d * d, p, grid),
        params: p.clone(),
    });
}

fn cmd_example(a: ExampleArgs) -> Result<()> {
    let start = Instant::now();
    check_grid(a.grid)?;
    let curves = example_curves(a.id, &GridConfig::with_samples(a.grid))?;
    let dir = absolute(&a.out.unwrap_or_else(|| default_out_dir().join(format!("example{}", a.id))))?;
    std::fs::create_dir_all(&dir)?;

    let mut outputs = Vec::with_capacity(curves.len());
    for c in &curves {
        let path = dir.join(&c.file);
        c.frontier.write_csv(&path)?;
        outputs.push(ManifestOutput { path: path_arg(&path), label: c.frontier.meta.label.clone(), params: c.params.to_config_string() });
    }
    let manifest = RunManifest {
        command: "example".into(),
        args: vec!["example".into(), a.id.to_string(), "--out".into(), path_arg(&dir), "--grid".into(), a.grid.to_string()],
        seed: None,
        outputs,
        version: env!("CARGO_PKG_VERSION").into(),
        duration_secs: start.elapsed().as_secs_f64(),
    };
    manifest.write(&dir.join(MANIFEST_NAME))?;
    println!("{}", dir.display());
    Ok(())
}

/// Parses an input distribution spec over `dim` symbols.
pub fn parse_dist(spec: &str, dim: usize) -> Result<ProbVec> {
    let bad = |why: &str| Error::ProbVec(format!("distribution '{spec}': {why}"));
    let parse_f = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("'{s}' is not a number")));
    if spec == "uniform" {
        return Ok(ProbVec::uniform(dim));
    }
    if let Some(rest) = spec.strip_prefix("list:") {
        let values = rest.split(',').map(parse_f).collect::<Result<Vec<_>>>()?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: values.len() });
        }
        return ProbVec::new(values);
    }
    if let Some(rest) = spec.strip_prefix("two-value:") {
        let (n, p1) = rest.split_once(',').ok_or_else(|| bad("expected two-value:n,p1"))?;
        let n = n.trim().parse::<usize>().map_err(|_| bad("n must be a positive integer"))?;
        return Ok(TwoValueDist::new(dim, n, parse_f(p1)?)?.to_prob_vec());
    }
    if let Some(k) = spec.strip_prefix('e') {
        let k = k.parse::<usize>().map_err(|_| bad("unknown form"))?;
        if k == 0 || k > dim {
            return Err(Error::IndexOutOfRange(format!("e{k} outside [1, {dim}]")));
        }
        return Ok(ProbVec::unit(dim, k - 1));
    }
    Err(bad("unknown form"))
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let start = Instant::now();
    let params = IdeParams::load(&a.config)?;
    let d = params.d();
    let dim = if a.entangled { d * d } else { d };
    let p_x = parse_dist(&a.dist, dim)?;
    let cfg = SimConfig::new(params.clone(), dim, p_x.clone(), a.trials, a.seed)?;
    let report = sim::run_detection_trials(&cfg)?;
    let mi = sim::empirical_mutual_information(&params, dim, &p_x, a.trials, a.seed)?;
    let bound = regions::rate_bound(dim, &crate::channels::average_params(&params), &p_x)?;

    let csv = format!("{}\n{}\n", DetectionReport::CSV_HEADER, report.csv_row());
    print!("{csv}");
    eprintln!(
        "mutual_information={} rate_bound={} z={}",
        format_number(mi),
        format_number(bound),
        format_number(report.z_score())
    );

    if let Some(out) = a.out {
        let out = absolute(&out)?;
        ensure_parent(&out)?;
        std::fs::write(&out, &csv)?;
        let mut args = vec!["simulate".to_string(), path_arg(&absolute(&a.config)?), "--dist".into(), a.dist.clone()];
        args.extend(["--trials".into(), a.trials.to_string(), "--seed".into(), a.seed.to_string()]);
        if a.entangled {
            args.push("--entangled".into());
        }
        args.extend(["--out".into(), path_arg(&out)]);
        let manifest = RunManifest {
            command: "simulate".into(),
            args,
            seed: Some(a.seed),
            outputs: vec![ManifestOutput { path: path_arg(&out), label: "detection".into(), params: params.to_config_string() }],
            version: env!("CARGO_PKG_VERSION").into(),
            duration_secs: start.elapsed().as_secs_f64(),
        };
        manifest.write(&manifest_path_for(&out))?;
    }
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnsembleFile {
    states: Vec<Vec<Vec<Entry>>>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

/// Builds an input ensemble from a built-in name or a JSON file with
/// `{"states": [[[row], ...], ...], "weights": [...]}`. Entries are numbers
/// or `[re, im]` pairs; weights, when present, must be uniform.
pub fn parse_ensemble(spec: &str, d: usize) -> Result<Vec<DensityOperator>> {
    if spec == "computational-basis" {
        return Ok((0..d).map(|k| DensityOperator::basis_projector(d, k)).collect());
    }
    if let Some(rest) = spec.strip_prefix("maximally-mixed") {
        let m = match rest.strip_prefix(':') {
            Some(m) => m.parse::<usize>().map_err(|_| Error::Ensemble(format!("bad copy count in '{spec}'")))?,
            None if rest.is_empty() => d,
            None => return Err(Error::Ensemble(format!("unknown ensemble '{spec}'"))),
        };
        if m == 0 {
            return Err(Error::Ensemble("ensemble needs at least one state".into()));
        }
        return Ok(vec![DensityOperator::maximally_mixed(d); m]);
    }
    let text = std::fs::read_to_string(spec)?;
    let file: EnsembleFile = serde_json::from_str(&text).map_err(|e| Error::Ensemble(format!("{spec}: {e}")))?;
    if let Some(w) = &file.weights {
        if w.len() != file.states.len() {
            return Err(Error::Ensemble(format!("{} weights for {} states", w.len(), file.states.len())));
        }
        if w.iter().any(|&x| (x - w[0]).abs() > 1e-12) {
            return Err(Error::Ensemble("only uniformly weighted ensembles are supported".into()));
        }
    }
    file.states
        .into_iter()
        .enumerate()
        .map(|(k, rows)| {
            if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                return Err(Error::Ensemble(format!("state {k} is not {d} x {d}")));
            }
            let entries = rows
                .into_iter()
                .flatten()
                .map(|e| match e {
                    Entry::Real(re) => Complex64::new(re, 0.0),
                    Entry::Complex([re, im]) => Complex64::new(re, im),
                })
                .collect();
            DensityOperator::new(ComplexMatrix::from_row_major(d, d, entries)?)
                .map_err(|e| Error::Ensemble(format!("state {k}: {e}")))
        })
        .collect()
}

fn cmd_converse(a: ConverseArgs) -> Result<()> {
    let params = IdeParams::load(&a.config)?;
    let ensemble = parse_ensemble(&a.ensemble, params.d())?;
    let pt = regions::converse_outer_point(&params, &ensemble)?;
    println!("rate_upper,pe_lower");
    println!("{},{}", format_number(pt.rate), format_number(pt.pe));
    Ok(())
}

fn cmd_rerun(a: RerunArgs) -> Result<()> {
    let manifest = RunManifest::load(&a.manifest)?;
    if manifest.args.first().map(String::as_str) == Some("rerun") {
        return Err(Error::Config("manifest records a rerun".into()));
    }
    let argv = std::iter::once("jcid".to_string()).chain(manifest.args);
    let cli = Cli::try_parse_from(argv).map_err(|e| Error::Config(format!("manifest arguments: {e}")))?;
    dispatch(cli.command)
}
