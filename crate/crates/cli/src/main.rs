//! Workbench command line: run scenario check suites, reconstruct single
//! wavefunction values, sample classical trajectories, scan convergence, and
//! print transition-zone launch tables.
//!
//! Exit codes: 0 success, 2 invalid input or scenario, 3 numerical failure
//! (caustic, lost probability, failed root search) with the failing check
//! named on standard error.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use itw_core::classical::{integrate, suggested_dt, Monodromy};
use itw_core::grid::SpatialGrid;
use itw_core::harness::{
    builtin, builtin_names, convergence_scan_with, run_scenario, transition_zone_table,
    MetricRow, Scenario,
};
use itw_core::imaging::{it_wavefunction, DEFAULT_F_MIN};
use itw_core::potential::PotentialSpec;
use itw_core::units::Units;
use itw_core::wavefunction::{gaussian_packet, to_momentum};
use itw_core::ItwError;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "itw", version, about = "Trajectory-based wavefunction imaging workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario's checks and write metric tables
    Run(RunArgs),
    /// Reconstruct the wavefunction at one spacetime point from a launch packet
    ItEval(ItEvalArgs),
    /// Integrate one classical trajectory and export sampled points
    Trajectory(TrajectoryArgs),
    /// Fit the reconstruction-error slope against the spread ratio
    Scan(ScanArgs),
    /// Launch time and distance for each (mass, spread ratio) pair
    ZoneTable(ZoneTableArgs),
    /// List packaged scenarios
    ListBuiltins,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Scenario source: exactly one of a packaged name or a JSON file, plus
/// dotted-key overrides applied to the JSON before validation.
#[derive(Args)]
struct SourceArgs {
    /// packaged scenario name (see list-builtins)
    #[arg(long, group = "source", required_unless_present = "scenario")]
    builtin: Option<String>,
    /// scenario JSON file
    #[arg(long, group = "source", value_name = "PATH")]
    scenario: Option<PathBuf>,
    /// override a scenario field, e.g. --set initial.p0=2 --set schedule='[1,5,25]'
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// directory receiving every written artifact
    #[arg(long, default_value = "out")]
    output_dir: PathBuf,
    /// table format for written artifacts
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ItEvalArgs {
    /// free | linear:f=V | harmonic:omega=V | poly:c0,c1,...
    #[arg(long)]
    potential: String,
    /// final position
    #[arg(long)]
    x: f64,
    /// final time
    #[arg(long)]
    t: f64,
    /// launch position (packet center)
    #[arg(long, default_value_t = 0.0)]
    x_i: f64,
    /// launch time
    #[arg(long, default_value_t = 0.0)]
    t_i: f64,
    /// launch packet width
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// launch packet mean momentum
    #[arg(long, default_value_t = 0.0)]
    p0: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// classical integrator step (default: chosen from the potential)
    #[arg(long)]
    dt: Option<f64>,
    /// half-width of the launch grid (default: |x_i| + 40 sigma)
    #[arg(long)]
    grid_half: Option<f64>,
    #[arg(long, default_value_t = 2048)]
    grid_n: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct TrajectoryArgs {
    /// free | linear:f=V | harmonic:omega=V | poly:c0,c1,...
    #[arg(long)]
    potential: String,
    #[arg(long)]
    x0: f64,
    #[arg(long)]
    p0: f64,
    /// final time
    #[arg(long)]
    t: f64,
    /// start time
    #[arg(long, default_value_t = 0.0)]
    t_i: f64,
    #[arg(long, default_value_t = 1.0)]
    mass: f64,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    /// classical integrator step (default: chosen from the potential)
    #[arg(long)]
    dt: Option<f64>,
    /// number of sampled points after the start
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ScanArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// first scan time
    #[arg(long)]
    t_min: f64,
    /// last scan time (at least 10x t-min)
    #[arg(long)]
    t_max: f64,
    /// geometric grid size
    #[arg(long, default_value_t = 5)]
    points: usize,
    /// zone threshold the scan times must clear
    #[arg(long, default_value_t = DEFAULT_F_MIN)]
    f_min: f64,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct ZoneTableArgs {
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// particle mass (repeatable)
    #[arg(long = "mass", default_values_t = [1.0])]
    masses: Vec<f64>,
    /// spread ratio f (repeatable)
    #[arg(long = "f", default_values_t = [100.0])]
    fs: Vec<f64>,
    #[arg(long, default_value_t = 1.0)]
    hbar: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = match err.downcast_ref::<ItwError>() {
                Some(e) if e.is_numerical() => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn dispatch() -> anyhow::Result<()> {
    configure_threads()?;
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::ItEval(args) => cmd_it_eval(args),
        Command::Trajectory(args) => cmd_trajectory(args),
        Command::Scan(args) => cmd_scan(args),
        Command::ZoneTable(args) => cmd_zone_table(args),
        Command::ListBuiltins => cmd_list_builtins(),
    }
}

/// IT_THREADS caps internal parallelism; unset means machine parallelism.
fn configure_threads() -> anyhow::Result<()> {
    if let Ok(raw) = std::env::var("IT_THREADS") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .with_context(|| format!("IT_THREADS must be a positive integer, got '{raw}'"))?;
        // a second initialization (tests, repeated calls) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Set `key=value` pairs on the scenario JSON; values parse as JSON when they
/// can and fall back to strings, keys walk objects by name and arrays by index.
fn apply_overrides(mut root: Value, sets: &[String]) -> anyhow::Result<Value> {
    for entry in sets {
        let (key, raw) = entry
            .split_once('=')
            .with_context(|| format!("override '{entry}' is not KEY=VALUE"))?;
        let parsed: Value =
            serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut cursor = &mut root;
        for part in key.split('.') {
            cursor = match cursor {
                Value::Object(map) => map.entry(part.to_string()).or_insert(Value::Null),
                Value::Array(items) => {
                    let idx: usize = part
                        .parse()
                        .with_context(|| format!("'{part}' is not an array index in '{key}'"))?;
                    items
                        .get_mut(idx)
                        .with_context(|| format!("index {idx} out of bounds in '{key}'"))?
                }
                _ => bail!("'{key}' descends into a non-container value"),
            };
        }
        *cursor = parsed;
    }
    Ok(root)
}

fn load_scenario(source: &SourceArgs) -> anyhow::Result<Scenario> {
    let base: Value = match (&source.builtin, &source.scenario) {
        (Some(name), None) => serde_json::to_value(builtin(name)?)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading scenario file {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing scenario file {}", path.display()))?
        }
        _ => unreachable!("clap enforces exactly one source"),
    };
    let merged = apply_overrides(base, &source.set)?;
    let scenario: Scenario =
        serde_json::from_value(merged).context("scenario does not match the schema")?;
    scenario.validate()?;
    Ok(scenario)
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt_cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn metrics_csv(rows: &[MetricRow]) -> String {
    let mut out = MetricRow::FIELDS.join(",");
    out.push('\n');
    for r in rows {
        let cells = [
            csv_cell(&r.scenario),
            r.t.to_string(),
            r.validity_ratio.to_string(),
            opt_cell(r.l2_error),
            opt_cell(r.sup_density_error_at_classical_points),
            opt_cell(r.fidelity),
            opt_cell(r.det_identity_deviation),
            opt_cell(r.transport_deviation),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

fn write_metrics(
    rows: &[MetricRow],
    dir: &std::path::Path,
    stem: &str,
    format: Format,
) -> anyhow::Result<PathBuf> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(format!("{stem}.{}", format.ext()));
    let body = match format {
        Format::Csv => metrics_csv(rows),
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows)?;
            s.push('\n');
            s
        }
    };
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let scenario = load_scenario(&args.source)?;
    let rows = run_scenario(&scenario)?;

    let dir = args.out.output_dir.join(&scenario.name);
    let metrics_path = write_metrics(&rows, &dir, "metrics", args.out.format)?;
    let resolved_path = dir.join("scenario_resolved.json");
    let mut resolved = serde_json::to_string_pretty(&scenario)?;
    resolved.push('\n');
    fs::write(&resolved_path, resolved)
        .with_context(|| format!("writing {}", resolved_path.display()))?;

    for r in &rows {
        let mut line = format!("t={:<8} ratio={:<10.4}", r.t, r.validity_ratio);
        if let Some(v) = r.l2_error {
            line.push_str(&format!(" l2={v:.3e}"));
        }
        if let Some(v) = r.sup_density_error_at_classical_points {
            line.push_str(&format!(" density_sup={v:.3e}"));
        }
        if let Some(v) = r.fidelity {
            line.push_str(&format!(" fidelity={v:.9}"));
        }
        if let Some(v) = r.det_identity_deviation {
            line.push_str(&format!(" det_dev={v:.3e}"));
        }
        if let Some(v) = r.transport_deviation {
            line.push_str(&format!(" transport={v:.3e}"));
        }
        println!("{line}");
    }
    println!("wrote {}", metrics_path.display());
    println!("wrote {}", resolved_path.display());
    Ok(())
}

fn cmd_it_eval(args: ItEvalArgs) -> anyhow::Result<()> {
    let v: PotentialSpec = args.potential.parse()?;
    let units = Units::new(args.hbar, args.mass);
    let half = args.grid_half.unwrap_or(args.x_i.abs() + 40.0 * args.sigma);
    let grid = SpatialGrid::symmetric(half, args.grid_n)?;
    let psi0 = gaussian_packet(&grid, &units, args.sigma, args.x_i, args.p0)?;
    let phi = to_momentum(&psi0, &units)?;
    let span = args.t - args.t_i;
    if !(span > 0.0) {
        bail!(ItwError::InvalidInput(format!(
            "need t > t_i, got t={}, t_i={}",
            args.t, args.t_i
        )));
    }
    let dt = args
        .dt
        .unwrap_or_else(|| suggested_dt(&v, &units, args.x.abs().max(half), span));
    let sample = it_wavefunction(args.x, args.t, &phi, &v, args.x_i, args.t_i, &units, dt)?;

    match args.format {
        Format::Csv => {
            println!("x_f,t_f,p_i,action,van_vleck,amp_re,amp_im,density");
            println!(
                "{},{},{},{},{},{},{},{}",
                sample.x_f,
                sample.t_f,
                sample.p_i,
                sample.action,
                sample.van_vleck,
                sample.amp.re,
                sample.amp.im,
                sample.amp.norm_sqr()
            );
        }
        Format::Json => {
            let obj = json!({
                "x_f": sample.x_f,
                "t_f": sample.t_f,
                "p_i": sample.p_i,
                "action": sample.action,
                "van_vleck": sample.van_vleck,
                "amp_re": sample.amp.re,
                "amp_im": sample.amp.im,
                "density": sample.amp.norm_sqr(),
            });
            println!("{}", serde_json::to_string_pretty(&obj)?);
        }
    }
    Ok(())
}

fn compose(next: &Monodromy, prev: &Monodromy) -> Monodromy {
    Monodromy {
        m11: next.m11 * prev.m11 + next.m12 * prev.m21,
        m12: next.m11 * prev.m12 + next.m12 * prev.m22,
        m21: next.m21 * prev.m11 + next.m22 * prev.m21,
        m22: next.m21 * prev.m12 + next.m22 * prev.m22,
    }
}

fn cmd_trajectory(args: TrajectoryArgs) -> anyhow::Result<()> {
    let v: PotentialSpec = args.potential.parse()?;
    let units = Units::new(args.hbar, args.mass);
    if args.samples == 0 {
        bail!(ItwError::InvalidInput("need at least one sample".into()));
    }
    let span = args.t - args.t_i;
    if !(span > 0.0) {
        bail!(ItwError::InvalidInput(format!(
            "need t > t_i, got t={}, t_i={}",
            args.t, args.t_i
        )));
    }
    let x_scale = args.x0.abs() + (args.p0.abs() / units.mass + 1.0) * span;
    let dt = args.dt.unwrap_or_else(|| suggested_dt(&v, &units, x_scale, span));

    // march segment by segment, accumulating action and composing tangent maps
    let mut rows = Vec::with_capacity(args.samples + 1);
    let identity = Monodromy { m11: 1.0, m12: 0.0, m21: 0.0, m22: 1.0 };
    let mut state = (args.x0, args.p0, args.t_i, 0.0, identity);
    rows.push(state);
    for k in 1..=args.samples {
        let t_next = args.t_i + span * k as f64 / args.samples as f64;
        let (x, p, t_prev, action, mono) = state;
        let seg = integrate(x, p, t_prev, t_next, &v, dt, &units)?;
        state = (
            seg.end.x,
            seg.end.p,
            t_next,
            action + seg.action,
            compose(&seg.monodromy, &mono),
        );
        rows.push(state);
    }

    fs::create_dir_all(&args.out.output_dir)
        .with_context(|| format!("creating {}", args.out.output_dir.display()))?;
    let path = args.out.output_dir.join(format!("trajectory.{}", args.out.format.ext()));
    let body = match args.out.format {
        Format::Csv => {
            let mut out = String::from("t,x,p,action,m11,m12,m21,m22,det\n");
            for (x, p, t, action, m) in &rows {
                out.push_str(&format!(
                    "{t},{x},{p},{action},{},{},{},{},{}\n",
                    m.m11,
                    m.m12,
                    m.m21,
                    m.m22,
                    m.det()
                ));
            }
            out
        }
        Format::Json => {
            let items: Vec<Value> = rows
                .iter()
                .map(|(x, p, t, action, m)| {
                    json!({
                        "t": t, "x": x, "p": p, "action": action,
                        "m11": m.m11, "m12": m.m12, "m21": m.m21, "m22": m.m22,
                        "det": m.det(),
                    })
                })
                .collect();
            let mut s = serde_json::to_string_pretty(&items)?;
            s.push('\n');
            s
        }
    };
    fs::write(&path, body).with_context(|| format!("writing {}", path.display()))?;

    let (x, p, _, action, m) = &rows[rows.len() - 1];
    println!(
        "endpoint: x={x}, p={p}, action={action}, det M={:.12}, {} samples",
        m.det(),
        rows.len()
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_scan(args: ScanArgs) -> anyhow::Result<()> {
    let scenario = load_scenario(&args.source)?;
    if args.points < 5 {
        bail!(ItwError::InvalidInput(format!(
            "scan needs at least 5 points, got {}",
            args.points
        )));
    }
    if !(args.t_min > 0.0 && args.t_max > args.t_min) {
        bail!(ItwError::InvalidInput(format!(
            "need 0 < t_min < t_max, got {} and {}",
            args.t_min, args.t_max
        )));
    }
    let ratio = args.t_max / args.t_min;
    let t_grid: Vec<f64> = (0..args.points)
        .map(|k| args.t_min * ratio.powf(k as f64 / (args.points - 1) as f64))
        .collect();
    let scan = convergence_scan_with(&scenario, &t_grid, args.f_min)?;

    let dir = args.out.output_dir.join(&scenario.name);
    let path = write_metrics(&scan.rows, &dir, "scan", args.out.format)?;
    for r in &scan.rows {
        println!(
            "t={:<12.6} ratio={:<12.4} l2={:.6e}",
            r.t,
            r.validity_ratio,
            r.l2_error.expect("convergence scan emits l2")
        );
    }
    println!("slope = {:.6}", scan.slope);
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_zone_table(args: ZoneTableArgs) -> anyhow::Result<()> {
    let rows = transition_zone_table(&args.masses, args.sigma, &args.fs, args.hbar)?;
    match args.format {
        Format::Csv => {
            println!("mass,f,t_i,x_i");
            for r in &rows {
                println!("{},{},{},{}", r.mass, r.f, r.t_i, r.x_i);
            }
        }
        Format::Json => println!("{}", serde_json::to_string_pretty(&rows)?),
    }
    Ok(())
}

fn cmd_list_builtins() -> anyhow::Result<()> {
    for name in builtin_names() {
        let s = builtin(name)?;
        println!("{name:<20} {}", s.description);
    }
    Ok(())
}
