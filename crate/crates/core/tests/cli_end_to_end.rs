use std::fs;
use std::process::{Command, Output};

use tempfile::tempdir;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nesterov-cert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    bin(args).status.code().expect("exit code")
}

#[test]
fn exit_code_matrix() {
    let cases: &[(&[&str], i32)] = &[
        (
            &["rates", "--kappa-min", "10", "--kappa-max", "1000", "--points", "5"],
            0,
        ),
        (&["rates", "--kappa-min", "10", "--kappa-max", "10", "--points", "5"], 1),
        (&["certify", "--m", "1", "--L", "4"], 0),
        (&["certify", "--m", "1", "--L", "1"], 0),
        (&["certify", "--m", "2", "--L", "1"], 1),
        (&["certify", "--m", "1", "--L", "4", "--beta", "0.4", "--tau", "0.5"], 2),
        (&["search", "--kappa", "4", "--tol", "1e-3"], 0),
        (&["search", "--kappa", "1"], 1),
        (
            &[
                "simulate",
                "--function",
                "quadratic",
                "--m",
                "1",
                "--L",
                "100",
                "--iters",
                "200",
            ],
            0,
        ),
        (&["simulate", "--function", "logcosh", "--m", "1", "--L", "1"], 1),
        (&["frobnicate"], 1),
        (&["--help"], 0),
    ];
    for (args, expected) in cases {
        assert_eq!(code(args), *expected, "{args:?}");
    }
}

#[test]
fn rates_file_shape() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("rates.csv");
    let out = bin(&[
        "rates",
        "--kappa-min",
        "10",
        "--kappa-max",
        "1000",
        "--points",
        "50",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n') && !text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 51);
    assert_eq!(
        lines[0],
        "kappa,tau_bp,tau_lq,tau_nq,tau_ours,tau_ng,beta_classic,beta_opt"
    );
    let kappas: Vec<f64> = lines[1..]
        .iter()
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert!(kappas.windows(2).all(|w| w[0] < w[1]));
    for line in &lines[1..] {
        for cell in line.split(',') {
            let (mantissa, exp) = cell.split_once('e').unwrap();
            assert_eq!(mantissa.len(), 10, "{cell}");
            assert_eq!(exp.len(), 3, "{cell}");
        }
    }
}

#[test]
fn rates_unwritable_path() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("missing").join("rates.csv");
    let out = bin(&[
        "rates",
        "--kappa-min",
        "1",
        "--kappa-max",
        "10",
        "--points",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_ne!(out.status.code(), Some(0));
    assert!(!out.stderr.is_empty());
}

#[test]
fn search_trace_and_nesterov_rule() {
    let dir = tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = bin(&[
        "search",
        "--kappa",
        "100",
        "--beta-rule",
        "nesterov",
        "--tol",
        "1e-4",
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    let tau: f64 = stdout
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("tau_star="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(tau <= 0.948_684);

    let text = fs::read_to_string(&trace).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,tau,feasible,residual"));
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "5.00000000e-01");
    assert!(["1", "0", "-1"].contains(&first[2]));
}

#[test]
fn simulate_is_byte_identical_for_a_seed() {
    let dir = tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let path = dir.path().join(name);
        let out = bin(&[
            "simulate",
            "--function",
            "logcosh",
            "--m",
            "1",
            "--L",
            "100",
            "--dim",
            "3",
            "--iters",
            "2000",
            "--seed",
            seed,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8(out.stdout).unwrap().contains("violations=0"));
        fs::read(path).unwrap()
    };
    let a = run("a.csv", "5");
    let b = run("b.csv", "5");
    let c = run("c.csv", "6");
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 2002);
}

#[test]
fn simulate_zero_iterations_keeps_initial_pair() {
    let out = bin(&[
        "simulate",
        "--function",
        "quadratic",
        "--m",
        "1",
        "--L",
        "100",
        "--iters",
        "0",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let ts: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ts, ["0", "1"]);
}

#[test]
fn simulate_divergence_and_uncertified_momentum() {
    // The closed form cannot certify this momentum.
    assert_eq!(
        code(&[
            "simulate",
            "--function",
            "quadratic",
            "--m",
            "1",
            "--L",
            "4",
            "--beta",
            "0.3"
        ]),
        2
    );
    // β near 1 makes the iteration blow up before the run ends.
    assert_eq!(
        code(&[
            "simulate",
            "--function",
            "quadratic",
            "--m",
            "1",
            "--L",
            "100",
            "--beta",
            "5"
        ]),
        4
    );
}
