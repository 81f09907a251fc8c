//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::process::{Command, ExitCode, Output};
use std::time::{Duration, Instant};

use ballmetric::verify::{run_suite, SuiteOptions};

const SEED: u64 = 0;

struct Criterion {
    id: usize,
    title: &'static str,
    suite: &'static str,
    budget: Option<Duration>,
}

const CRITERIA: [Criterion; 10] = [
    Criterion {
        id: 1,
        title: "sphere metric axioms",
        suite: "sphere-axioms",
        budget: Some(Duration::from_secs(60)),
    },
    Criterion {
        id: 2,
        title: "scale bounds and antipodal identity",
        suite: "eq1-bounds",
        budget: None,
    },
    Criterion {
        id: 3,
        title: "isometry invariance",
        suite: "isometry",
        budget: None,
    },
    Criterion {
        id: 4,
        title: "locally Euclidean",
        suite: "locally-euclidean",
        budget: None,
    },
    Criterion {
        id: 5,
        title: "antipodal normalization",
        suite: "normalize-cost",
        budget: None,
    },
    Criterion {
        id: 6,
        title: "segment-cover sandwich",
        suite: "sandwich",
        budget: None,
    },
    Criterion {
        id: 7,
        title: "short boundary pairs are Euclidean",
        suite: "lemma-haf",
        budget: Some(Duration::from_secs(300)),
    },
    Criterion {
        id: 8,
        title: "reduction oracle",
        suite: "reduction-oracle",
        budget: None,
    },
    Criterion {
        id: 9,
        title: "gap implies verified witness",
        suite: "prop-nlf",
        budget: None,
    },
    Criterion {
        id: 10,
        title: "worked scan examples",
        suite: "nm-examples",
        budget: None,
    },
];

fn run_criterion(c: &Criterion) -> (bool, String) {
    let start = Instant::now();
    let report = match run_suite(c.suite, &SuiteOptions::new(SEED)) {
        Ok(r) => r,
        Err(e) => return (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    let in_budget = c.budget.map_or(true, |b| elapsed < b);
    let mut detail = format!(
        "cases={} violations={} worst={:.3e} tol={:e} time={:.1}s",
        report.cases,
        report.violations,
        report.worst,
        report.tolerance,
        elapsed.as_secs_f64()
    );
    if let Some(b) = c.budget {
        detail.push_str(&format!(" budget={}s", b.as_secs()));
    }
    (report.pass && in_budget, detail)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ballmetric"))
        .args(args)
        .output()
        .expect("spawn ballmetric")
}

/// Every subcommand, run twice with a fixed seed, must produce identical bytes
/// on stdout, stderr, and any output file.
fn determinism() -> (bool, String) {
    let dir = tempfile::tempdir().expect("tempdir");
    let family = dir.path().join("family.json");
    std::fs::write(
        &family,
        r#"{"spheres":[{"center":[-0.2,0,0],"radius":0.35,"scale":0.5},{"center":[0.25,0.05,0],"radius":0.3,"scale":0.8}]}"#,
    )
    .expect("write family");
    let family = family.to_str().unwrap().to_string();
    let scan_out = dir.path().join("scan.csv");
    let conv_out = dir.path().join("conv.csv");
    let scan_out_s = scan_out.to_str().unwrap().to_string();
    let conv_out_s = conv_out.to_str().unwrap().to_string();

    let commands: Vec<(Vec<&str>, Option<&std::path::Path>)> = vec![
        (
            vec![
                "sphere-dist",
                "--r",
                "0.5",
                "--s",
                "0.3",
                "--p",
                "0,0,0.5",
                "--q",
                "0.1,0,-0.4898979485566356",
            ],
            None,
        ),
        (
            vec![
                "ball-dist",
                "--family",
                &family,
                "--p",
                "-0.55,0,0",
                "--q",
                "0.55,0.05,0",
                "--nodes",
                "200",
                "--seed",
                "3",
            ],
            None,
        ),
        (
            vec![
                "ball-dist",
                "--family",
                "segment-cover:t=0.25,s0=0.5",
                "--p",
                "0.9,0,0",
                "--q",
                "-0.5,0.3,0.1",
                "--nodes",
                "64",
                "--seed",
                "3",
            ],
            None,
        ),
        (
            vec![
                "ball-dist",
                "--family",
                "boundary:f=spike:x0=0,0,1:h=1:r=0.05",
                "--p",
                "0,0,0",
                "--q",
                "0,0,1",
                "--nodes",
                "400",
                "--seed",
                "3",
            ],
            None,
        ),
        (
            vec![
                "verify",
                "--suite",
                "sandwich",
                "--samples",
                "50",
                "--seed",
                "3",
            ],
            None,
        ),
        (
            vec![
                "verify",
                "--suite",
                "reduction-oracle",
                "--samples",
                "3",
                "--seed",
                "3",
                "--nodes",
                "1600",
            ],
            None,
        ),
        (
            vec![
                "nm-scan",
                "--function",
                "dense-indicator:k=100",
                "--n",
                "2",
                "--samples",
                "500",
                "--seed",
                "3",
            ],
            None,
        ),
        (
            vec![
                "nm-scan",
                "--function",
                "spike:x0=0,0,1:h=1:r=0.3",
                "--n",
                "1",
                "--samples",
                "500",
                "--seed",
                "3",
                "--out",
                &scan_out_s,
            ],
            Some(scan_out.as_path()),
        ),
        (
            vec![
                "nm-scan",
                "--function",
                "distance-to:x0=1,0,0:scale=0.5",
                "--n",
                "1",
                "--samples",
                "300",
                "--domain",
                "great-circle:normal=0,0,1",
            ],
            None,
        ),
        (
            vec![
                "converge",
                "--family",
                &family,
                "--p",
                "-0.55,0,0",
                "--q",
                "0.55,0.05,0",
                "--nodes",
                "50,100,200",
                "--seed",
                "3",
                "--out",
                &conv_out_s,
            ],
            Some(conv_out.as_path()),
        ),
        (
            vec![
                "converge",
                "--family",
                "boundary:f=constant:c=0.3",
                "--p",
                "0,0,0",
                "--q",
                "0,0.6,0.8",
                "--nodes",
                "25,100",
            ],
            None,
        ),
    ];

    let mut failures = Vec::new();
    for (args, file) in &commands {
        let run = || {
            let out = cli(args);
            let bytes = file.map(|f| std::fs::read(f).unwrap_or_default());
            (out, bytes)
        };
        let (a, fa) = run();
        let (b, fb) = run();
        let ok = a.status.success()
            && a.status == b.status
            && a.stdout == b.stdout
            && a.stderr == b.stderr
            && fa == fb
            && (file.is_some() || !a.stdout.is_empty());
        if !ok {
            failures.push(format!("{} (status {:?})", args[0], a.status.code()));
        }
    }
    let detail = format!("commands={} mismatches={}", commands.len(), failures.len());
    if failures.is_empty() {
        (true, detail)
    } else {
        (false, format!("{detail} [{}]", failures.join(", ")))
    }
}

fn main() -> ExitCode {
    let mut all = true;
    let mut line = |id: usize, title: &str, (pass, detail): (bool, String)| {
        all &= pass;
        println!(
            "criterion {id:>2} {}: {title} — {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    };
    for c in &CRITERIA {
        line(c.id, c.title, run_criterion(c));
    }
    line(11, "CLI determinism", determinism());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
