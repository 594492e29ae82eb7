//! `latslice` command-line workbench.
//!
//! Exit codes: 0 success, 2 configuration error, 3 failed assertion,
//! 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use latslice::dimension::{
    counting_dim_profile, find_levels, mass_dim_profile, parse_scales, BoxFamily, EstimateMethod, LevelSearchConfig,
};
use latslice::finitefield::{ff_chebyshev_fraction, ff_double_count, FiniteFieldSet, KRule};
use latslice::generators::{generate, GeneratorSpec, Generated, ImplicitSet, Mode};
use latslice::geometry::{FloorLine, Tube};
use latslice::io::{format_points, read_to_string, write_atomic, write_points};
use latslice::par::{configure_threads, Execution};
use latslice::pointset::{PlanarSet, PointSet};
use latslice::report::{emit_profile_csv, Report};
use latslice::repro::{self, Criterion, CriterionResult};
use latslice::survey::{survey_floor_lines, Sampling, SurveyConfig};
use latslice::Error;

#[derive(Parser)]
#[command(name = "latslice", version, about = "Slicing and dimension experiments on 1-separated planar sets")]
struct Cli {
    /// Run every kernel on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an example set: a point file, or a JSON descriptor in implicit mode.
    Generate(GenerateArgs),
    /// Check 1-separation of a point file.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mass or counting dimension profile, written as CSV.
    Dim(DimArgs),
    /// Points of a set inside a tube or on a floor line.
    Slice(SliceArgs),
    /// Floor-line survey over the parameter box (0, M]^2.
    Survey(SurveyArgs),
    /// Finite-field line identities for one prime.
    Ff(FfArgs),
    /// Heights along a tube whose annulus counts beat (m/2)^(alpha + psi/2).
    Levels(LevelsArgs),
    /// Run acceptance recipes: a check name, `example2`, `ff`, or `all`.
    Repro(ReproArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    UnitLine,
    ParabolicStaircase,
    Zigzag,
    ConeAnnuli,
    ConeStaircase,
    ConeFixedWidth,
    Cartesian,
    RandomDim,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long, default_value = "materialize")]
    mode: Mode,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    slope: Option<f64>,
    #[arg(long)]
    count: Option<u64>,
    #[arg(long)]
    columns: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    k_min: Option<u32>,
    #[arg(long)]
    k_max: Option<u32>,
    #[arg(long)]
    k0: Option<u32>,
    /// Comma-separated integers.
    #[arg(long, value_delimiter = ',')]
    a: Option<Vec<u64>>,
    /// Comma-separated integers.
    #[arg(long, value_delimiter = ',')]
    b: Option<Vec<u64>>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    l_max: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    RatioMaxTail,
    RegressionTail,
}

impl From<MethodArg> for EstimateMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::RatioMaxTail => EstimateMethod::RatioMaxTail,
            MethodArg::RegressionTail => EstimateMethod::RegressionTail,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    FirstQuadrant,
    Centered,
    /// Largest count over searched windows of each size.
    Counting,
}

#[derive(Args)]
struct DimArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// `dyadic:<max>`, `dyadic:<min>:<max>` or a comma-separated list.
    #[arg(long, default_value = "dyadic:1024")]
    scales: String,
    #[arg(long, value_enum, default_value = "ratio-max-tail")]
    method: MethodArg,
    #[arg(long, value_enum, default_value = "first-quadrant")]
    family: FamilyArg,
    /// Window placements searched per size in counting mode.
    #[arg(long, default_value_t = 4096)]
    max_windows: usize,
    #[arg(long)]
    out: PathBuf,
    /// Optional JSON report beside the CSV.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct SliceArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Tube `t_{u,v}` as `u,v`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair, conflicts_with_all = ["horizontal", "slope", "floor"])]
    tube: Option<(f64, f64)>,
    /// Horizontal tube `v < y <= v + 1`.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["slope", "floor"])]
    horizontal: Option<f64>,
    /// Tube along slope `m` as `m,v`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair, conflicts_with = "floor")]
    slope: Option<(f64, f64)>,
    /// Floor line `y = floor(u x + v)` as `u,v`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    floor: Option<(f64, f64)>,
    #[arg(long)]
    x_max: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SurveyArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long = "N")]
    n: u64,
    #[arg(long = "M")]
    m: f64,
    /// Grid cells as `<gu>x<gv>`.
    #[arg(long, value_parser = parse_grid, default_value = "64x64")]
    grid: (u32, u32),
    /// Uniform samples instead of the grid.
    #[arg(long)]
    mc: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Exception threshold multiplier; defaults to sqrt(ln M ln N).
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    /// Optional per-cell CSV `u,v,count`.
    #[arg(long)]
    cells: Option<PathBuf>,
}

#[derive(Args)]
struct FfArgs {
    #[arg(long)]
    p: u64,
    /// A point file, `random:<rho>:<seed>`, or `full`.
    #[arg(long)]
    set: String,
    /// Checks: `identity`, `chebyshev:<k>` or `chebyshev:log`.
    #[arg(long, value_delimiter = ',', default_value = "identity,chebyshev:log")]
    verify: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LevelsArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Tube along slope `m` as `m,v`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair, conflicts_with = "tube")]
    slope: Option<(f64, f64)>,
    /// Tube `t_{u,v}` as `u,v`.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_pair)]
    tube: Option<(f64, f64)>,
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    #[arg(long)]
    psi: f64,
    #[arg(long)]
    bound: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproArgs {
    name: String,
    /// Prime for `repro ff`.
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number {t:?}"));
    Ok((num(a)?, num(b)?))
}

fn parse_grid(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected <gu>x<gv>, got {s:?}"))?;
    let num = |t: &str| t.parse::<u32>().map_err(|_| format!("bad cell count {t:?}"));
    Ok((num(a)?, num(b)?))
}

enum Failure {
    Config(String),
    Assertion(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io { .. } => Failure::Io(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn missing(field: &str) -> Failure {
    Failure::Config(format!("missing --{field}"))
}

fn spec_from_args(a: &GenerateArgs) -> Result<GeneratorSpec, Failure> {
    let need = |v: Option<f64>, f: &str| v.ok_or_else(|| missing(f));
    Ok(match a.kind {
        Kind::UnitLine => GeneratorSpec::UnitLine {
            slope: need(a.slope, "slope")?,
            count: a.count.ok_or_else(|| missing("count"))?,
        },
        Kind::ParabolicStaircase => GeneratorSpec::ParabolicStaircase {
            columns: a.columns.ok_or_else(|| missing("columns"))?,
        },
        Kind::Zigzag => GeneratorSpec::Zigzag {
            delta: need(a.delta, "delta")?,
            levels: a.levels.ok_or_else(|| missing("levels"))?,
        },
        Kind::ConeAnnuli => GeneratorSpec::ConeAnnuli {
            theta: need(a.theta, "theta")?,
            k_min: a.k_min.unwrap_or(0),
            k_max: a.k_max.ok_or_else(|| missing("k-max"))?,
        },
        Kind::ConeStaircase => GeneratorSpec::ConeStaircase {
            theta: need(a.theta, "theta")?,
            k_max: a.k_max.ok_or_else(|| missing("k-max"))?,
        },
        Kind::ConeFixedWidth => GeneratorSpec::ConeFixedWidth {
            theta: need(a.theta, "theta")?,
            k0: a.k0.ok_or_else(|| missing("k0"))?,
            levels: a.levels,
        },
        Kind::Cartesian => GeneratorSpec::Cartesian {
            a: a.a.clone().ok_or_else(|| missing("a"))?,
            b: a.b.clone().ok_or_else(|| missing("b"))?,
        },
        Kind::RandomDim => GeneratorSpec::RandomDim {
            alpha: need(a.alpha, "alpha")?,
            l_max: a.l_max.ok_or_else(|| missing("l-max"))?,
            seed: a.seed,
        },
    })
}

enum Loaded {
    Points(PointSet),
    Implicit(ImplicitSet),
}

impl Loaded {
    fn planar(&self) -> &dyn PlanarSet {
        match self {
            Loaded::Points(s) => s,
            Loaded::Implicit(s) => s,
        }
    }

    fn points(self, path: &Path) -> Result<PointSet, Failure> {
        match self {
            Loaded::Points(s) => Ok(s),
            Loaded::Implicit(_) => Err(Failure::Config(format!(
                "{}: this command needs a point file, not an implicit descriptor",
                path.display()
            ))),
        }
    }
}

/// Point file, or JSON descriptor written by `generate --mode implicit`.
fn load(path: &Path) -> Result<Loaded, Failure> {
    let text = read_to_string(path)?;
    if text.trim_start().starts_with('{') {
        let value: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
        return Ok(Loaded::Implicit(ImplicitSet::from_descriptor(&value)?));
    }
    Ok(Loaded::Points(latslice::io::parse_points(&text, path)?))
}

fn write_report(path: Option<&Path>, command: &str, config: &impl Serialize, results: &impl Serialize, seed: Option<u64>) -> CmdResult {
    if let Some(path) = path {
        Report::new(command, config, results, seed)?.write(path)?;
    }
    Ok(())
}

fn cmd_generate(a: &GenerateArgs) -> CmdResult {
    let spec = spec_from_args(a)?;
    let header = serde_json::to_string(&spec).map_err(Error::from)?;
    match generate(&spec, a.mode)? {
        Generated::Materialized(set) => {
            write_points(&a.out, &set, Some(&format!("latslice generate {header}")))?;
            println!("{} points -> {}", set.len(), a.out.display());
        }
        Generated::Implicit(set) => {
            let mut text = serde_json::to_string_pretty(&set.descriptor()).map_err(Error::from)?;
            text.push('\n');
            write_atomic(&a.out, text.as_bytes())?;
            println!("implicit descriptor -> {}", a.out.display());
        }
    }
    Ok(())
}

fn cmd_validate(input: &Path, out: Option<&Path>) -> CmdResult {
    let set = load(input)?.points(input)?;
    let report = set.validate_separation()?;
    println!(
        "{} points, min distance {}, {}",
        set.len(),
        report.min_distance.map_or("n/a".to_string(), |d| format!("{d}")),
        if report.valid { "1-separated" } else { "NOT 1-separated" }
    );
    write_report(out, "validate", &json!({"in": input}), &report, None)?;
    if report.valid {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("violating pair {:?}", report.violating_pair)))
    }
}

fn cmd_dim(a: &DimArgs, exec: Execution) -> CmdResult {
    let scales = parse_scales(&a.scales)?;
    let loaded = load(&a.input)?;
    let set = loaded.planar();
    let method = a.method.into();
    let profile = match a.family {
        FamilyArg::FirstQuadrant => mass_dim_profile(set, &scales, BoxFamily::FirstQuadrant, method, exec)?,
        FamilyArg::Centered => mass_dim_profile(set, &scales, BoxFamily::Centered, method, exec)?,
        FamilyArg::Counting => counting_dim_profile(set, &scales, a.max_windows, method, exec)?,
    };
    emit_profile_csv(&profile, &a.out)?;
    println!(
        "estimate {:.6} (ratio_max_tail {:.6}, regression_tail {:.6}) -> {}",
        profile.estimate,
        profile.ratio_max_tail,
        profile.regression_tail,
        a.out.display()
    );
    let config = json!({"in": a.input, "scales": a.scales, "method": method, "max_windows": a.max_windows});
    write_report(a.report.as_deref(), "dim", &config, &profile, None)
}

fn cmd_slice(a: &SliceArgs) -> CmdResult {
    let set = load(&a.input)?.points(&a.input)?;
    let tube = match (a.tube, a.horizontal, a.slope) {
        (Some((u, v)), _, _) => Some(Tube::standard(u, v)?),
        (_, Some(v), _) => Some(Tube::horizontal(v)?),
        (_, _, Some((m, v))) => Some(Tube::along_slope(m, v)?),
        _ => None,
    };
    let (slice, summary) = if let Some(tube) = tube {
        let s = set.slice_tube(&tube);
        let n = s.len();
        (s, json!({"tube": tube, "count": n}))
    } else if let Some((u, v)) = a.floor {
        let line = FloorLine::new(u, v)?;
        let x_max = a.x_max.unwrap_or(f64::INFINITY);
        let heights = set.slice_floor_line(&line, x_max);
        let hits = set.filter(|p| p.x <= x_max && line.contains(p));
        (hits, json!({"floor_line": line, "distinct_heights": heights.len()}))
    } else {
        return Err(Failure::Config("one of --tube, --horizontal, --slope, --floor is required".into()));
    };
    println!("{summary}");
    if let Some(out) = &a.out {
        write_points(out, &slice, Some(&summary.to_string()))?;
    } else {
        print!("{}", format_points(&slice, None));
    }
    Ok(())
}

fn cmd_survey(a: &SurveyArgs, exec: Execution) -> CmdResult {
    let set = load(&a.input)?.points(&a.input)?;
    let sampling = match a.mc {
        Some(samples) => Sampling::MonteCarlo { samples, seed: a.seed },
        None => Sampling::Grid { gu: a.grid.0, gv: a.grid.1 },
    };
    let config = SurveyConfig {
        n: a.n,
        m: a.m,
        sampling,
        k_threshold: a.k,
    };
    let r = survey_floor_lines(&set, &config, exec)?;
    println!(
        "|E_N| = {}, mean {:.6}, bound {} (+{:.3e}), good fraction {:.6} at k = {:.4}",
        r.set_size, r.mean, r.bound, r.resolution_term, r.good_fraction, r.k
    );
    if let Some(path) = &a.cells {
        let mut csv = String::from("u,v,count\n");
        for ((u, v), c) in r.parameters.iter().zip(&r.counts) {
            csv.push_str(&format!("{u},{v},{c}\n"));
        }
        write_atomic(path, csv.as_bytes())?;
    }
    let results = json!({
        "set_size": r.set_size, "mean": r.mean, "bound": r.bound,
        "resolution_term": r.resolution_term, "standard_error": r.standard_error,
        "k": r.k, "threshold": r.threshold, "alpha_ratio": config.alpha_ratio(),
        "exception_fraction": r.exception_fraction, "good_fraction": r.good_fraction,
        "mean_within_bound": r.mean_within_bound(), "good_fraction_holds": r.good_fraction_holds(),
    });
    let seed = a.mc.map(|_| a.seed);
    write_report(Some(&a.out), "survey", &json!({"in": a.input, "survey": config}), &results, seed)?;
    if r.mean_within_bound() && r.good_fraction_holds() {
        Ok(())
    } else {
        Err(Failure::Assertion("survey bound violated".into()))
    }
}

fn ff_set(p: u64, spec: &str) -> Result<FiniteFieldSet, Failure> {
    if spec == "full" {
        return Ok(FiniteFieldSet::full(p)?);
    }
    if let Some(rest) = spec.strip_prefix("random:") {
        let (rho, seed) = rest
            .split_once(':')
            .ok_or_else(|| Failure::Config(format!("set: expected random:<rho>:<seed>, got {spec:?}")))?;
        let rho = rho.parse().map_err(|_| Failure::Config(format!("set: bad density {rho:?}")))?;
        let seed = seed.parse().map_err(|_| Failure::Config(format!("set: bad seed {seed:?}")))?;
        return Ok(FiniteFieldSet::random(p, rho, seed)?);
    }
    let path = Path::new(spec);
    let pairs = latslice::io::parse_pairs(&read_to_string(path)?, path)?;
    let pts = pairs
        .into_iter()
        .map(|(x, y)| {
            if x.fract() != 0.0 || y.fract() != 0.0 || x < 0.0 || y < 0.0 {
                Err(Failure::Config(format!("set: ({x}, {y}) is not a pair of field elements")))
            } else {
                Ok((x as u64, y as u64))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(FiniteFieldSet::from_points(p, pts)?)
}

fn cmd_ff(a: &FfArgs, exec: Execution) -> CmdResult {
    let set = ff_set(a.p, &a.set)?;
    let mut results = serde_json::Map::new();
    results.insert("size".into(), json!(set.len()));
    results.insert("dimension".into(), json!(latslice::dimension::ff_dim(&set)));
    let mut failed = Vec::new();
    for check in &a.verify {
        if check == "identity" {
            let dc = ff_double_count(&set, exec);
            println!("identity: sum {} vs |B| p = {}", dc.total, dc.expected);
            if !dc.holds() {
                failed.push("identity");
            }
            results.insert("identity".into(), json!({"total": dc.total, "expected": dc.expected, "holds": dc.holds()}));
        } else if let Some(k) = check.strip_prefix("chebyshev:") {
            let k = match k {
                "log" => KRule::LogP.k(a.p),
                other => other.parse().map_err(|_| Failure::Config(format!("verify: bad k {other:?}")))?,
            };
            let r = ff_chebyshev_fraction(&set, k, exec)?;
            println!("chebyshev: good fraction {:.6} vs 1 - 1/k = {:.6}", r.fraction, r.bound);
            if !r.holds() {
                failed.push("chebyshev");
            }
            results.insert("chebyshev".into(), json!({"report": r, "holds": r.holds()}));
        } else {
            return Err(Failure::Config(format!("verify: unknown check {check:?}")));
        }
    }
    let config = json!({"p": a.p, "set": a.set, "verify": a.verify});
    write_report(a.out.as_deref(), "ff", &config, &results, None)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("failed checks: {}", failed.join(", "))))
    }
}

fn cmd_levels(a: &LevelsArgs, exec: Execution) -> CmdResult {
    let set = load(&a.input)?.points(&a.input)?;
    let tube = match (a.slope, a.tube) {
        (Some((m, v)), _) => Tube::along_slope(m, v)?,
        (_, Some((u, v))) => Tube::standard(u, v)?,
        _ => return Err(Failure::Config("one of --slope, --tube is required".into())),
    };
    let config = LevelSearchConfig {
        alpha: a.alpha,
        psi: a.psi,
        search_bound: a.bound,
    };
    let prof = find_levels(&set, &tube, &config, exec)?;
    println!("{} levels up to {}", prof.levels.len(), a.bound);
    write_report(a.out.as_deref(), "levels", &json!({"in": a.input, "tube": tube, "search": config}), &prof, None)
}

fn cmd_repro(a: &ReproArgs, exec: Execution) -> CmdResult {
    let results: Vec<CriterionResult> = match a.name.as_str() {
        "all" => Criterion::ALL.iter().map(|c| c.run(exec)).collect(),
        "example2" => vec![Criterion::Example2Counts.run(exec), Criterion::Example2Dims.run(exec)],
        "ff" => match a.p {
            None => vec![Criterion::FfIdentity.run(exec), Criterion::FfChebyshev.run(exec)],
            Some(p) => {
                let primes = [p];
                let wrap = |c: Criterion, r: latslice::Result<repro::Check>| CriterionResult {
                    id: c.id(),
                    name: c.name().into(),
                    passed: r.as_ref().map(|k| k.passed).unwrap_or(false),
                    summary: match &r {
                        Ok(k) => k.summary.clone(),
                        Err(e) => format!("error: {e}"),
                    },
                    details: r.map(|k| k.details).unwrap_or_default(),
                    seconds: 0.0,
                };
                if let Err(e) = FiniteFieldSet::empty(p) {
                    return Err(e.into());
                }
                vec![
                    wrap(Criterion::FfIdentity, repro::ff_identity(&primes, repro::FF_SUBSETS, exec)),
                    wrap(Criterion::FfChebyshev, repro::ff_chebyshev(&primes, repro::FF_SUBSETS, exec)),
                ]
            }
        },
        name => match Criterion::from_name(name) {
            Some(c) => vec![c.run(exec)],
            None => {
                let names: Vec<&str> = Criterion::ALL.iter().map(|c| c.name()).collect();
                return Err(Failure::Config(format!(
                    "unknown recipe {name:?}; expected all, example2, ff, or one of {}",
                    names.join(", ")
                )));
            }
        },
    };
    for r in &results {
        println!("{}", r.line());
    }
    write_report(a.out.as_deref(), "repro", &json!({"name": a.name, "p": a.p}), &results, None)?;
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::Assertion(format!("{failed} of {} checks failed", results.len())))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(n) = std::env::var("LATSLICE_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = configure_threads(n) {
                    eprintln!("error: LATSLICE_THREADS: {e}");
                    return ExitCode::from(2);
                }
            }
            _ => {
                eprintln!("error: LATSLICE_THREADS: expected a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let outcome = match &cli.command {
        Command::Generate(a) => cmd_generate(a),
        Command::Validate { input, out } => cmd_validate(input, out.as_deref()),
        Command::Dim(a) => cmd_dim(a, exec),
        Command::Slice(a) => cmd_slice(a),
        Command::Survey(a) => cmd_survey(a, exec),
        Command::Ff(a) => cmd_ff(a, exec),
        Command::Levels(a) => cmd_levels(a, exec),
        Command::Repro(a) => cmd_repro(a, exec),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(4)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs_and_grids() {
        assert_eq!(parse_pair("2,-0.5"), Ok((2.0, -0.5)));
        assert!(parse_pair("2").is_err());
        assert_eq!(parse_grid("512x256"), Ok((512, 256)));
        assert!(parse_grid("512").is_err());
    }

    #[test]
    fn generate_flags_build_specs() {
        let cli = Cli::try_parse_from(["latslice", "generate", "cone-fixed-width", "--theta", "0.1", "--k0", "2", "--out", "x"]).unwrap();
        let Command::Generate(a) = cli.command else { panic!() };
        assert_eq!(
            spec_from_args(&a).ok(),
            Some(GeneratorSpec::ConeFixedWidth { theta: 0.1, k0: 2, levels: None })
        );
        let cli = Cli::try_parse_from(["latslice", "generate", "cartesian", "--a", "1,2", "--out", "x"]).unwrap();
        let Command::Generate(a) = cli.command else { panic!() };
        assert!(matches!(spec_from_args(&a), Err(Failure::Config(m)) if m == "missing --b"));
    }
}
