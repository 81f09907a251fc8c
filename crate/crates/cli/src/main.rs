//! `ballmetric` command-line front end.
//!
//! Exit codes: 0 success / suite passed, 1 suite found violations,
//! 2 usage, input, or geometry errors.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use ballmetric::ball::convergence_study;
use ballmetric::boundary::{nm_scan, Domain, ScanConfig, WitnessRecord};
use ballmetric::function::parse_point;
use ballmetric::geometry::{Point3, SpherePose};
use ballmetric::shortcut::alpha;
use ballmetric::verify::{run_suite, SuiteOptions, SUITES};
use ballmetric::{
    estimate_distance, shortcut_distance, BoundaryFunction, DiscretizationConfig, ShortcutParam,
    SphereFamily,
};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "ballmetric",
    version,
    about = "Shortcut metrics on spheres and the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Shortcut distance between two points of one sphere.
    SphereDist {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        p: Point3,
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        q: Point3,
        /// Sphere center (default: origin).
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        center: Option<Point3>,
    },
    /// Upper and lower bounds on the ball distance, with a witness chain.
    BallDist {
        /// A family JSON file, `segment-cover:t=..,s0=..`, or `boundary:f=<function>`.
        #[arg(long)]
        family: String,
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        p: Point3,
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        q: Point3,
        #[arg(long, default_value_t = 400)]
        nodes: usize,
        /// Samples per intersection circle (default: nodes / 4).
        #[arg(long)]
        intersection_nodes: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a verification suite and print its report.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        tol: Option<f64>,
        /// Nodes per sphere for suites that run the estimator.
        #[arg(long)]
        nodes: Option<usize>,
    },
    /// Scan for points where f drops faster than n times the distance.
    NmScan {
        #[arg(long)]
        function: String,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 2000)]
        candidates: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `sphere` or `great-circle:normal=x,y,z`.
        #[arg(long, default_value = "sphere")]
        domain: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Upper bounds over nested discretizations.
    Converge {
        #[arg(long)]
        family: String,
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        p: Point3,
        #[arg(long, value_parser = point_arg, allow_hyphen_values = true)]
        q: Point3,
        #[arg(long, value_delimiter = ',', default_value = "100,400,1600")]
        nodes: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn point_arg(s: &str) -> std::result::Result<Point3, String> {
    parse_point(s).map_err(|e| e.to_string())
}

fn parse_family(spec: &str) -> Result<SphereFamily> {
    if let Some(rest) = spec.strip_prefix("segment-cover:") {
        let (mut t, mut s0) = (None, None);
        for part in rest.split(',') {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| anyhow!("expected key=value in {part:?}"))?;
            let value: f64 = value
                .trim()
                .parse()
                .with_context(|| format!("bad number {value:?}"))?;
            match key.trim() {
                "t" => t = Some(value),
                "s0" => s0 = Some(value),
                other => bail!("unknown segment-cover parameter {other:?}"),
            }
        }
        let t = t.ok_or_else(|| anyhow!("segment-cover needs t="))?;
        return Ok(SphereFamily::segment_cover(t, s0.unwrap_or(1.0))?);
    }
    if let Some(f) = spec.strip_prefix("boundary:f=") {
        return Ok(SphereFamily::boundary_shortcut(BoundaryFunction::parse(
            f,
        )?)?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading family file {spec}"))?;
    Ok(SphereFamily::from_json(&text)?)
}

fn parse_domain(spec: &str) -> Result<Domain> {
    if spec == "sphere" {
        return Ok(Domain::Sphere);
    }
    if let Some(n) = spec.strip_prefix("great-circle:normal=") {
        return Ok(Domain::great_circle(parse_point(n)?)?);
    }
    bail!("unknown domain {spec:?}; use `sphere` or `great-circle:normal=x,y,z`")
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(
            fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    })
}

fn print_json(v: &serde_json::Value) -> Result<()> {
    let mut stdout = io::stdout().lock();
    serde_json::to_writer(&mut stdout, v)?;
    writeln!(stdout)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::SphereDist { r, s, p, q, center } => {
            let sphere = SpherePose::new(center.unwrap_or_default(), r)?;
            let s = ShortcutParam::new(s)?;
            let d = shortcut_distance(&sphere, s, p, q)?;
            print_json(&json!({
                "distance": d.value,
                "branch": d.branch,
                "alpha": alpha(s).radians(),
            }))?;
        }
        Command::BallDist {
            family,
            p,
            q,
            nodes,
            intersection_nodes,
            seed,
        } => {
            let family = parse_family(&family)?;
            let mut cfg = DiscretizationConfig::new(nodes, seed)?;
            if let Some(m) = intersection_nodes {
                cfg = cfg.with_intersection_nodes(m);
            }
            let est = estimate_distance(&family, p, q, &cfg)?;
            print_json(&serde_json::to_value(&est)?)?;
        }
        Command::Verify {
            suite,
            samples,
            seed,
            tol,
            nodes,
        } => {
            if !SUITES.contains(&suite.as_str()) {
                bail!("unknown suite {suite:?}; available: {}", SUITES.join(", "));
            }
            let opts = SuiteOptions {
                samples,
                seed,
                tolerance: tol,
                nodes,
            };
            let report = run_suite(&suite, &opts)?;
            print_json(&serde_json::to_value(&report)?)?;
            if !report.pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::NmScan {
            function,
            n,
            samples,
            candidates,
            seed,
            domain,
            out,
        } => {
            let f = BoundaryFunction::parse(&function)?;
            let mut cfg = ScanConfig::new(n, samples, seed);
            cfg.candidate_count = candidates;
            cfg.domain = parse_domain(&domain)?;
            let result = nm_scan(&f, &cfg)?;
            let mut w = csv::Writer::from_writer(output(&out)?);
            w.write_record(WitnessRecord::CSV_HEADER)?;
            for rec in &result.witnesses {
                w.write_record(rec.csv_row().iter().map(|v| v.to_string()))?;
            }
            w.flush()?;
            eprintln!("{}", serde_json::to_string(&result.summary)?);
        }
        Command::Converge {
            family,
            p,
            q,
            nodes,
            seed,
            out,
        } => {
            let family = parse_family(&family)?;
            let cfgs = nodes
                .iter()
                .map(|&n| DiscretizationConfig::new(n, seed))
                .collect::<ballmetric::Result<Vec<_>>>()?;
            let rows = convergence_study(&family, p, q, &cfgs)?;
            let mut w = csv::Writer::from_writer(output(&out)?);
            w.write_record(["nodes_per_sphere", "intersection_nodes", "upper", "lower"])?;
            for row in rows {
                w.write_record([
                    row.nodes_per_sphere.to_string(),
                    row.intersection_nodes.to_string(),
                    row.upper.to_string(),
                    row.lower.to_string(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
