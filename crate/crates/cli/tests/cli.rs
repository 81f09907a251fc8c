use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ballmetric"))
        .args(args)
        .output()
        .expect("spawn ballmetric")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn antipodal_unit_sphere_takes_the_shortcut() {
    let out = run(&[
        "sphere-dist",
        "--r",
        "1",
        "--s",
        "0.5",
        "--p",
        "0,0,1",
        "--q",
        "0,0,-1",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["branch"], "shortcut");
    assert!((v["distance"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let alpha = v["alpha"].as_f64().unwrap();
    let expect = ((2.0f64 - 0.25).sqrt() - 0.5) / 2.0;
    assert!((alpha - expect.asin()).abs() < 1e-15);
}

#[test]
fn nearby_points_are_euclidean() {
    let out = run(&[
        "sphere-dist",
        "--r",
        "1",
        "--s",
        "0.5",
        "--p",
        "1,0,0",
        "--q",
        "0,1,0",
    ]);
    let v = json(&out);
    assert_eq!(v["branch"], "euclid");
    assert!((v["distance"].as_f64().unwrap() - 2f64.sqrt()).abs() < 1e-12);
}

#[test]
fn geometry_errors_exit_two() {
    for args in [
        &[
            "sphere-dist",
            "--r",
            "1",
            "--s",
            "0.5",
            "--p",
            "0,0,2",
            "--q",
            "0,0,-1",
        ][..],
        &[
            "sphere-dist",
            "--r",
            "1",
            "--s",
            "1.5",
            "--p",
            "0,0,1",
            "--q",
            "0,0,-1",
        ],
        &[
            "sphere-dist",
            "--r",
            "1",
            "--s",
            "0.5",
            "--p",
            "0,0",
            "--q",
            "0,0,-1",
        ],
        &[
            "ball-dist",
            "--family",
            "segment-cover:t=0.25",
            "--p",
            "2,0,0",
            "--q",
            "0,0,0",
        ],
        &[
            "ball-dist",
            "--family",
            "segment-cover:t=7",
            "--p",
            "0,0,0",
            "--q",
            "0.1,0,0",
        ],
        &[
            "ball-dist",
            "--family",
            "boundary:f=constant:c=3",
            "--p",
            "0,0,0",
            "--q",
            "0.1,0,0",
        ],
        &["nm-scan", "--function", "nonsense", "--n", "1"],
        &[
            "converge",
            "--family",
            "segment-cover:t=0.25",
            "--p",
            "0,0,0",
            "--q",
            "0.5,0,0",
            "--nodes",
            "64,16",
        ],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn unknown_suite_exits_two() {
    assert_eq!(run(&["verify", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn failing_suite_exits_one() {
    // 200 nodes per sphere is too coarse for the reduction oracle's tolerance.
    let out = run(&[
        "verify",
        "--suite",
        "reduction-oracle",
        "--samples",
        "5",
        "--seed",
        "3",
        "--nodes",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["pass"], false);
    assert!(v["violations"].as_u64().unwrap() > 0);
    let ok = run(&["verify", "--suite", "isometry", "--samples", "200"]);
    assert_eq!(ok.status.code(), Some(0));
}

#[test]
fn disconnected_explicit_family_has_no_chain() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.json");
    std::fs::write(
        &path,
        r#"{"spheres":[{"center":[-0.5,0,0],"radius":0.2,"scale":0.5},{"center":[0.5,0,0],"radius":0.2,"scale":0.5}]}"#,
    )
    .unwrap();
    let out = run(&[
        "ball-dist",
        "--family",
        path.to_str().unwrap(),
        "--p",
        "-0.7,0,0",
        "--q",
        "0.7,0,0",
        "--nodes",
        "16",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn ball_dist_reports_a_witness() {
    let out = run(&[
        "ball-dist",
        "--family",
        "segment-cover:t=0.25,s0=1",
        "--p",
        "0.5,0,0",
        "--q",
        "-0.5,0,0",
        "--nodes",
        "16",
    ]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["upper"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    let pts = v["witness"]["points"].as_array().unwrap();
    assert_eq!(pts.first().unwrap(), &serde_json::json!([0.5, 0.0, 0.0]));
    assert_eq!(pts.last().unwrap(), &serde_json::json!([-0.5, 0.0, 0.0]));
}

#[test]
fn scan_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("w.csv");
    let out = run(&[
        "nm-scan",
        "--function",
        "dense-indicator:k=20",
        "--n",
        "1",
        "--samples",
        "100",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "x1,x2,x3,y1,y2,y3,f_x,f_y,dE,margin"
    );
    assert_eq!(text.lines().count(), 21);
    let summary: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(summary["hits"], 20);
    assert!(summary["note"].as_str().unwrap().contains("uncountab"));
}

#[test]
fn converge_rows_are_monotone() {
    let out = run(&[
        "converge",
        "--family",
        "boundary:f=spike:x0=0,0,1:h=1:r=0.05",
        "--p",
        "0,0,0",
        "--q",
        "0,0,1",
        "--nodes",
        "25,100,400",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let uppers: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(uppers.len(), 3);
    assert!(uppers.windows(2).all(|w| w[1] <= w[0]));
}
