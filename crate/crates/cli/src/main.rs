//! `tfwave`: time-domain scattering from the command line.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tfwave_core::geometry::{build_scatterer, ScattererParams, GALLERY};
use tfwave_core::io::{probe_rows, render_ppm, write_probes, ColorMap, GridFile};
use tfwave_core::pipeline::{run_simulation, PipelineError, SimConfig, SolverFlag};
use tfwave_core::validation::{run_suite, SUITES};

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_IO: u8 = 4;

/// Environment variable overriding the configured worker count.
const WORKERS_ENV: &str = "TFWAVE_WORKERS";

#[derive(Parser)]
#[command(name = "tfwave", version, about = "Time-domain wave scattering by frequency-domain solves and sinc synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML file.
    Solve {
        config: PathBuf,
        /// Worker threads; overrides the config and TFWAVE_WORKERS.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Render every time slice of a grid file as a PPM image.
    Render {
        grid: PathBuf,
        #[arg(long, value_enum, default_value = "linear")]
        colormap: Map,
        /// Output image; slices after the first get a `_NNN` suffix.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run a validation suite and print a pass/fail table.
    Validate {
        /// One of specfun, helmholtz, synthesis, contour, pipeline, or all.
        suite: String,
    },
    /// Write a dense polyline of a gallery scatterer.
    Gallery {
        name: String,
        /// Total number of points, split across components by arclength.
        #[arg(long, default_value_t = 2048)]
        points: usize,
        /// Output file (`x y` per line); standard output when omitted.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Shape parameters as `--key value` or `key=value`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Map {
    Linear,
    Log,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure { code, message: message.into() }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve { config, workers } => solve(&config, workers),
        Command::Render { grid, colormap, out } => render(&grid, colormap, &out),
        Command::Validate { suite } => validate(&suite),
        Command::Gallery { name, points, out, params } => gallery(&name, points, out.as_deref(), &params),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn pipeline_failure(e: PipelineError) -> Failure {
    let code = match e {
        PipelineError::Solve { .. } | PipelineError::Synthesis(_) => EXIT_SOLVER,
        _ => EXIT_CONFIG,
    };
    fail(code, e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path).map(BufWriter::new).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))
}

fn solve(path: &Path, workers: Option<usize>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| fail(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    let mut cfg = SimConfig::from_toml(&text).map_err(pipeline_failure)?;
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n = v.parse().map_err(|_| fail(EXIT_CONFIG, format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))?;
        cfg.run.workers = Some(n);
    }
    if workers.is_some() {
        cfg.run.workers = workers;
    }
    let sol = run_simulation(&cfg).map_err(pipeline_failure)?;

    println!("band       [{:.6}, {:.6}]", sol.band.w1, sol.band.w2);
    println!("m          {}", sol.m);
    println!("delta      {:.6e}", sol.delta);
    println!("n_c        {}", sol.n_c);
    println!("nodes      {}", sol.boundary_nodes);
    println!("solves     {}", sol.residuals.len());
    println!("residual   {:.3e} (max)", sol.max_residual());
    let masked = sol.mask.iter().filter(|m| m.is_some()).count();
    if masked > 0 {
        eprintln!("warning: {masked} of {} targets masked (inside the scatterer or too close to it)", sol.targets.len());
    }
    println!("time       setup {:.2} s, solves {:.2} s, synthesis {:.2} s", sol.timings.setup, sol.timings.solves, sol.timings.synthesis);

    if let Some(p) = &cfg.output.probe_file {
        let p = Path::new(p);
        let mut w = create(p)?;
        write_probes(&probe_rows(&sol), &mut w).map_err(|e| fail(EXIT_IO, format!("{}: {e}", p.display())))?;
        w.flush().map_err(|e| fail(EXIT_IO, format!("{}: {e}", p.display())))?;
    }
    if let Some(g) = &cfg.output.grid_file {
        let g = Path::new(g);
        let grid = GridFile::from_solution(&sol, cfg.output.field).ok_or_else(|| fail(EXIT_CONFIG, "grid_file requires a [snapshot] section"))?;
        let mut w = create(g)?;
        grid.write_to(&mut w).map_err(|e| fail(EXIT_IO, format!("{}: {e}", g.display())))?;
        w.flush().map_err(|e| fail(EXIT_IO, format!("{}: {e}", g.display())))?;
    }

    if !sol.flags.is_empty() {
        for f in &sol.flags {
            match f {
                SolverFlag::UnresolvedM { m, tail } => eprintln!("flag: coefficient tail {tail:.2e} not resolved at m = {m}"),
                SolverFlag::Residual { omega, residual } => eprintln!("flag: residual {residual:.2e} at omega = {omega}"),
            }
        }
        return Err(fail(EXIT_SOLVER, format!("{} solver flag(s) raised", sol.flags.len())));
    }
    Ok(())
}

fn slice_path(out: &Path, index: usize, count: usize) -> PathBuf {
    if count <= 1 || index == 0 {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{index:03}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{index:03}"),
    };
    out.with_file_name(name)
}

fn render(path: &Path, map: Map, out: &Path) -> Result<(), Failure> {
    let file = File::open(path).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
    let grid = GridFile::read_from(BufReader::new(file)).map_err(|e| fail(EXIT_IO, format!("{}: {e}", path.display())))?;
    let map = match map {
        Map::Linear => ColorMap::Linear,
        Map::Log => ColorMap::Log,
    };
    let n = grid.times.len();
    for f in 0..n {
        let p = slice_path(out, f, n);
        let mut w = create(&p)?;
        render_ppm(&grid, f, map, &mut w).map_err(|e| fail(EXIT_IO, format!("{}: {e}", p.display())))?;
        w.flush().map_err(|e| fail(EXIT_IO, format!("{}: {e}", p.display())))?;
        println!("t = {:<10} -> {}", grid.times[f], p.display());
    }
    Ok(())
}

fn validate(suite: &str) -> Result<(), Failure> {
    let names: Vec<&str> = if suite == "all" { SUITES.to_vec() } else { vec![suite] };
    let mut failed = 0;
    for name in names {
        let checks = run_suite(name).ok_or_else(|| fail(EXIT_CONFIG, format!("unknown suite {name:?}; expected one of {SUITES:?} or all")))?;
        for c in &checks {
            println!("{}", c.line());
            failed += usize::from(!c.passed());
        }
    }
    if failed > 0 {
        return Err(fail(EXIT_VALIDATION, format!("{failed} check(s) failed")));
    }
    Ok(())
}

/// Shape parameters, plus any `--out`/`--points` that clap left in the
/// trailing arguments because they followed a parameter.
struct GalleryArgs {
    params: ScattererParams,
    points: Option<usize>,
    out: Option<PathBuf>,
}

fn parse_params(args: &[String]) -> Result<GalleryArgs, Failure> {
    let mut parsed = GalleryArgs { params: ScattererParams::new(), points: None, out: None };
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if matches!(a.as_str(), "-o" | "--out" | "--points") {
            let v = it.next().ok_or_else(|| fail(EXIT_CONFIG, format!("missing value for {a}")))?;
            if a == "--points" {
                parsed.points = Some(v.parse().map_err(|_| fail(EXIT_CONFIG, format!("--points: {v:?} is not a count")))?);
            } else {
                parsed.out = Some(PathBuf::from(v));
            }
            continue;
        }
        let (key, value) = if let Some((k, v)) = a.trim_start_matches("--").split_once('=') {
            (k.to_string(), v.to_string())
        } else if let Some(k) = a.strip_prefix("--") {
            let v = it.next().ok_or_else(|| fail(EXIT_CONFIG, format!("missing value for --{k}")))?;
            (k.to_string(), v.clone())
        } else {
            return Err(fail(EXIT_CONFIG, format!("unexpected argument {a:?}; use --key value or key=value")));
        };
        let v: f64 = value.parse().map_err(|_| fail(EXIT_CONFIG, format!("parameter {key}: {value:?} is not a number")))?;
        parsed.params.insert(key, v);
    }
    Ok(parsed)
}

fn gallery(name: &str, points: usize, out: Option<&Path>, args: &[String]) -> Result<(), Failure> {
    if !GALLERY.iter().any(|(n, _)| *n == name) {
        let known: Vec<&str> = GALLERY.iter().map(|(n, _)| *n).collect();
        return Err(fail(EXIT_CONFIG, format!("unknown scatterer {name:?}; known: {}", known.join(", "))));
    }
    let extra = parse_params(args)?;
    let points = extra.points.unwrap_or(points);
    let out = extra.out.as_deref().or(out);
    let curve = build_scatterer(name, &extra.params).map_err(|e| fail(EXIT_CONFIG, e.to_string()))?;
    let mut text = String::new();
    for (k, comp) in curve.polyline(points).iter().enumerate() {
        if k > 0 {
            text.push('\n');
        }
        for z in comp {
            text.push_str(&format!("{:.17e} {:.17e}\n", z.re, z.im));
        }
    }
    match out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes()).and_then(|_| w.flush()).map_err(|e| fail(EXIT_IO, format!("{}: {e}", p.display())))?;
        }
        None => print!("{text}"),
    }
    let report = format!(
        "{name}: {} component(s), {} corner(s), arclength {:.12}",
        curve.components.len(),
        curve.corner_count(),
        curve.arclength()
    );
    if out.is_some() {
        println!("{report}");
    } else {
        eprintln!("{report}");
    }
    Ok(())
}
