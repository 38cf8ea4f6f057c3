use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use ultrafrac::config::{GridSection, RunConfig};
use ultrafrac::geometry::{cone_level_set, deformed_distance, density_ratio, drift_field, MediumConfig, Polyline};
use ultrafrac::grid::GridSpec;
use ultrafrac::solution::{fundamental_solution, oracle_propagator_many, overlap_check, propagator_h_spec, Propagator};
use ultrafrac::specfun::foxh::{convergence_params, plan_contour};
use ultrafrac::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_TOLERANCE: u8 = 4;

/// Fundamental solutions of weighted space-time fractional ultrahyperbolic
/// equations on deformed domains.
#[derive(Parser)]
#[command(name = "ultrafrac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate G(x, t) over a grid and write CSV.
    Propagator {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Level sets of P(phi(x)) in 2-D, as CSV polylines plus an SVG.
    Cone {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
        levels: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// SVG path; defaults to the CSV path with an .svg extension.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Density ratio and drift field over a grid.
    Drift {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridFlags,
        #[arg(long)]
        out: PathBuf,
    },
    /// Convergence parameters, contour plan and the series/contour overlap test.
    Check {
        #[command(flatten)]
        common: Common,
    },
    /// Closed form against the inverse-transform oracle (n = 1).
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        points: Vec<f64>,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        xi_max: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Worker threads; output does not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct GridFlags {
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    lo: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    hi: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    samples: Option<Vec<usize>>,
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InvalidParameter(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn fail<T>(code: u8, message: impl Into<String>) -> Result<T, Failure> {
    Err(Failure {
        code,
        message: message.into(),
    })
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Outcome {
    let threads = match &command {
        Command::Propagator { common, .. }
        | Command::Cone { common, .. }
        | Command::Drift { common, .. }
        | Command::Check { common }
        | Command::Oracle { common, .. } => common.threads,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return fail(EXIT_CONFIG, "--threads must be at least 1");
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Failure {
        code: EXIT_CONFIG,
        message: e.to_string(),
    })?;
    pool.install(|| match command {
        Command::Propagator { common, grid, time, out } => cmd_propagator(&common.config, &grid, time, &out),
        Command::Cone {
            common,
            grid,
            levels,
            out,
            svg,
        } => {
            let svg = svg.unwrap_or_else(|| out.with_extension("svg"));
            cmd_cone(&common.config, &grid, &levels, &out, &svg)
        }
        Command::Drift { common, grid, out } => cmd_drift(&common.config, &grid, &out),
        Command::Check { common } => cmd_check(&common.config),
        Command::Oracle {
            common,
            points,
            time,
            xi_max,
            samples,
            tolerance,
        } => cmd_oracle(&common.config, &points, time, xi_max, samples, tolerance),
    })
}

/// Grid from the flags, falling back to the `[grid]` table entry by entry.
fn resolve_grid(run: &RunConfig, flags: &GridFlags) -> Result<GridSpec, Failure> {
    let base = run.grid.clone();
    let pick = |flag: &Option<Vec<f64>>, from: Option<&Vec<f64>>, name: &str| -> Result<Vec<f64>, Failure> {
        match (flag, from) {
            (Some(v), _) => Ok(v.clone()),
            (None, Some(v)) => Ok(v.clone()),
            (None, None) => fail(EXIT_CONFIG, format!("grid bound {name} given neither by flag nor in [grid]")),
        }
    };
    let lo = pick(&flags.lo, base.as_ref().map(|g| &g.lo), "lo")?;
    let hi = pick(&flags.hi, base.as_ref().map(|g| &g.hi), "hi")?;
    let samples = match (&flags.samples, base.as_ref()) {
        (Some(s), _) => s.clone(),
        (None, Some(g)) => g.samples.clone(),
        (None, None) => return fail(EXIT_CONFIG, "grid samples given neither by flag nor in [grid]"),
    };
    let n = run.medium.dim();
    let widen = |v: Vec<f64>| if v.len() == 1 && n > 1 { vec![v[0]; n] } else { v };
    let samples = if samples.len() == 1 && n > 1 { vec![samples[0]; n] } else { samples };
    let section = GridSection {
        lo: widen(lo),
        hi: widen(hi),
        samples,
    };
    if section.lo.len() != n || section.samples.len() != n || section.hi.len() != n {
        return fail(EXIT_CONFIG, format!("grid needs {n} entries per bound"));
    }
    if section.samples.iter().any(|&s| s == 0) {
        return fail(EXIT_CONFIG, "empty grid");
    }
    Ok(section.to_grid()?)
}

/// Fixed 17-significant-digit formatting.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| Failure {
        code: EXIT_CONFIG,
        message: format!("{}: {e}", path.display()),
    })
}

fn coordinate_header(n: usize, prefix: &str) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}{k}")).collect()
}

fn cmd_propagator(config: &Path, flags: &GridFlags, t: f64, out: &Path) -> Outcome {
    let run = RunConfig::load(config)?;
    let grid = resolve_grid(&run, flags)?;
    if !(t > 0.0 && t.is_finite()) {
        return fail(EXIT_CONFIG, format!("--time {t} must be positive"));
    }
    let cfg = &run.medium;
    let propagator = Propagator::new(cfg)?;
    let rows: Vec<Result<String, Failure>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let mut row: Vec<String> = x.iter().map(|&v| num(v)).collect();
            row.push(num(t));
            row.push(num(deformed_distance(cfg, &x)));
            match propagator.sample(&x, t) {
                Ok(s) => {
                    row.extend([s.argument.re, s.argument.im, s.value.re, s.value.im].map(num));
                    row.push(s.method.to_string());
                    row.push(num(s.error));
                }
                Err(Error::OnCone { .. }) => {
                    row.extend(std::iter::repeat_n(String::new(), 4));
                    row.push("on-cone".into());
                    row.push(String::new());
                }
                Err(e) => {
                    return fail(EXIT_NUMERICAL, format!("cell {i} at x = {x:?}: {e}"));
                }
            }
            Ok(row.join(","))
        })
        .collect();
    let mut text = coordinate_header(cfg.dim(), "x").join(",");
    text.push_str(",t,P,re_Z,im_Z,re_G,im_G,method,err_est\n");
    for row in rows {
        text.push_str(&row?);
        text.push('\n');
    }
    write_file(out, &text)
}

fn cmd_cone(config: &Path, flags: &GridFlags, levels: &[f64], out: &Path, svg: &Path) -> Outcome {
    let run = RunConfig::load(config)?;
    let cfg = &run.medium;
    if cfg.dim() != 2 {
        return fail(EXIT_CONFIG, format!("cone needs a 2-D configuration, got n = {}", cfg.dim()));
    }
    let grid = resolve_grid(&run, flags)?;
    let sets: Vec<Result<Vec<Polyline>, Error>> = levels.par_iter().map(|&l| cone_level_set(cfg, &grid, l)).collect();
    let mut csv = String::from("level,segment,x1,x2\n");
    let mut drawn = Vec::new();
    for (&level, set) in levels.iter().zip(sets) {
        let lines = match set {
            Ok(lines) => lines,
            Err(e @ Error::EmptyLevelSet { .. }) => {
                eprintln!("warning: {e}");
                Vec::new()
            }
            Err(e) => return Err(e.into()),
        };
        for (id, line) in lines.iter().enumerate() {
            for p in line {
                writeln!(csv, "{},{id},{},{}", num(level), num(p[0]), num(p[1])).expect("string write");
            }
        }
        drawn.push((level, lines));
    }
    write_file(out, &csv)?;
    write_file(svg, &render_svg(&grid, &drawn))
}

/// Standalone SVG with the viewBox on the grid bounds and y pointing up.
fn render_svg(grid: &GridSpec, sets: &[(f64, Vec<Polyline>)]) -> String {
    const PALETTE: [&str; 6] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#34495e"];
    let (x0, y0) = (grid.lo()[0], grid.lo()[1]);
    let (x1, y1) = (grid.hi()[0], grid.hi()[1]);
    let (w, h) = (x1 - x0, y1 - y0);
    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8" standalone="yes"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="600" height="{}" viewBox="{} {} {} {}">"#,
        (600.0 * h / w).round(),
        num(x0),
        num(-y1),
        num(w),
        num(h)
    )
    .unwrap();
    writeln!(s, r#"<g transform="scale(1,-1)" fill="none" stroke-width="1.5">"#).unwrap();
    writeln!(
        s,
        r##"<rect x="{}" y="{}" width="{}" height="{}" stroke="#999999" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
        num(x0),
        num(y0),
        num(w),
        num(h)
    )
    .unwrap();
    if x0 < 0.0 && x1 > 0.0 {
        writeln!(
            s,
            r##"<line x1="0" y1="{}" x2="0" y2="{}" stroke="#bbbbbb" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
            num(y0),
            num(y1)
        )
        .unwrap();
    }
    if y0 < 0.0 && y1 > 0.0 {
        writeln!(
            s,
            r##"<line x1="{}" y1="0" x2="{}" y2="0" stroke="#bbbbbb" stroke-width="1" vector-effect="non-scaling-stroke"/>"##,
            num(x0),
            num(x1)
        )
        .unwrap();
    }
    for (k, (level, lines)) in sets.iter().enumerate() {
        let colour = PALETTE[k % PALETTE.len()];
        writeln!(s, r#"<g stroke="{colour}" vector-effect="non-scaling-stroke"><title>level {level}</title>"#).unwrap();
        for line in lines {
            let pts: Vec<String> = line.iter().map(|p| format!("{},{}", num(p[0]), num(p[1]))).collect();
            writeln!(
                s,
                r#"<polyline points="{}" vector-effect="non-scaling-stroke"/>"#,
                pts.join(" ")
            )
            .unwrap();
        }
        writeln!(s, "</g>").unwrap();
    }
    writeln!(s, "</g>\n</svg>").unwrap();
    s
}

fn cmd_drift(config: &Path, flags: &GridFlags, out: &Path) -> Outcome {
    let run = RunConfig::load(config)?;
    let grid = resolve_grid(&run, flags)?;
    let cfg = &run.medium;
    let n = cfg.dim();
    let rows: Vec<Result<String, Failure>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.point(i);
            let mut row: Vec<String> = x.iter().map(|&v| num(v)).collect();
            match density_ratio(cfg, &x).and_then(|s| Ok((s, drift_field(cfg, &x)?))) {
                Ok((sigma, v)) => {
                    row.push(num(sigma));
                    row.extend(v.iter().map(|&c| num(c)));
                    row.push("ok".into());
                }
                Err(Error::SingularJacobian(_)) => {
                    row.extend(std::iter::repeat_n(String::new(), n + 1));
                    row.push("singular-jacobian".into());
                }
                Err(e) => return fail(EXIT_NUMERICAL, format!("cell {i} at x = {x:?}: {e}")),
            }
            Ok(row.join(","))
        })
        .collect();
    let mut text = coordinate_header(n, "x").join(",");
    text.push_str(",sigma,");
    text.push_str(&coordinate_header(n, "V").join(","));
    text.push_str(",status\n");
    for row in rows {
        text.push_str(&row?);
        text.push('\n');
    }
    write_file(out, &text)
}

/// Below this `a*` the contour integrand decays slowly in `Im s`.
const SLOW_A_STAR: f64 = 0.25;

fn cmd_check(config: &Path) -> Outcome {
    let run = RunConfig::load(config)?;
    let cfg: &MediumConfig = &run.medium;
    let spec = propagator_h_spec(cfg)?;
    let (a_star, mu_star) = convergence_params(&spec);
    println!("a* = {a_star}");
    println!("mu* = {mu_star}");
    let verdict = |pass: bool| if pass { "PASS" } else { "FAIL" };
    if !(a_star > 0.0) {
        println!("sector of analyticity vanishes: a* must be positive (mu < 2)");
        println!("a* = {a_star}, mu* = {mu_star}, {}", verdict(false));
        return fail(EXIT_NUMERICAL, format!("a* = {a_star}: the contour gate requires a* > 0"));
    }
    let plan = match plan_contour(&spec) {
        Ok(plan) => plan,
        Err(e) => {
            println!("pole separation: {e}");
            println!("a* = {a_star}, mu* = {mu_star}, {}", verdict(false));
            return Err(e.into());
        }
    };
    println!(
        "pole separation: ok, left poles up to {}, right poles from {}",
        plan.strip.0 + 0.0,
        plan.strip.1 + 0.0
    );
    println!(
        "contour: Re s = {}, |Im s| <= {}, {} initial nodes",
        plan.c, plan.half_height, plan.node_count
    );
    if cfg.sig.q() > 0 {
        // P < 0 puts Z on the ray arg Z = -/+ beta pi.
        let inside = cfg.beta * std::f64::consts::PI < 0.5 * a_star * std::f64::consts::PI;
        println!(
            "timelike region: |arg Z| = beta pi {} the sector a* pi / 2",
            if inside { "lies inside" } else { "reaches or leaves" }
        );
    }
    if a_star < SLOW_A_STAR {
        println!("warning: a* = {a_star} is small; the contour converges slowly");
    }
    let report = overlap_check(&spec, &plan)?;
    println!(
        "overlap: {} vs contour on |Z| in [{}, {}], max relative difference {:e}",
        report.series_method, report.window.0, report.window.1, report.max_relative
    );
    println!("a* = {a_star}, mu* = {mu_star}, {}", verdict(report.passed()));
    if report.passed() {
        Ok(())
    } else {
        fail(EXIT_NUMERICAL, "series and contour disagree on the overlap window")
    }
}

fn cmd_oracle(
    config: &Path,
    points: &[f64],
    t: f64,
    xi_max: Option<f64>,
    samples: Option<usize>,
    tolerance: Option<f64>,
) -> Outcome {
    let run = RunConfig::load(config)?;
    let cfg = &run.medium;
    let mut settings = run.oracle;
    if let Some(v) = xi_max {
        settings.xi_max = v;
    }
    if let Some(v) = samples {
        settings.samples = v;
    }
    if let Some(v) = tolerance {
        settings.tolerance = v;
    }
    let grid = settings.frequency_grid()?;
    let oracle = oracle_propagator_many(cfg, &grid, points, t)?;
    let closed: Vec<_> = points
        .par_iter()
        .map(|&x| fundamental_solution(cfg, &[x], t).map(|s| s.value))
        .collect::<Result<_, _>>()?;
    println!("x,closed_re,closed_im,oracle_re,oracle_im,relative");
    let mut worst: f64 = 0.0;
    for ((x, c), o) in points.iter().zip(&closed).zip(&oracle) {
        let rel = (c - o).norm() / c.norm();
        worst = worst.max(rel);
        println!("{},{},{},{},{},{}", num(*x), num(c.re), num(c.im), num(o.re), num(o.im), num(rel));
    }
    if worst > settings.tolerance || worst.is_nan() {
        return fail(
            EXIT_TOLERANCE,
            format!("oracle disagrees by {worst:e}, above the tolerance {:e}", settings.tolerance),
        );
    }
    Ok(())
}
