//! End-to-end runs of the `quasilin` binary.

use std::path::{Path, PathBuf};
use std::process::Command;

use quasilin_core::discretization::io::{read_field_csv, write_field_csv};
use tempfile::TempDir;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
    out: PathBuf,
}

fn run(dir: &TempDir, cmd: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = dir.path().join(format!("{cmd}.toml"));
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join(format!("out-{cmd}"));
    let o = Command::new(env!("CARGO_BIN_EXE_quasilin"))
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    Run {
        code: o.status.code().unwrap(),
        stdout: String::from_utf8(o.stdout).unwrap(),
        stderr: String::from_utf8(o.stderr).unwrap(),
        out,
    }
}

fn summary_value(out: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(out.join("summary.txt")).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from\n{text}"))
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|rec| rec.unwrap().iter().map(str::to_string).collect()).collect()
}

const POISSON_1D: &str = r#"
[problem]
dimension = 1
cells = 64
f = { kind = "constant", value = 1.0 }
"#;

#[test]
fn solve_writes_solution_trace_and_estimates() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "solve", POISSON_1D, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("solution.csv"));
    assert_eq!(rows.len(), 65);
    let mid: f64 = rows[32][1].parse().unwrap();
    assert!((mid - 0.125).abs() < 1e-12, "{mid}");
    let trace = csv_rows(&r.out.join("trace.csv"));
    assert_eq!(trace.len(), 2);
    assert_eq!(summary_value(&r.out, "converged"), "true");
    assert!(csv_rows(&r.out.join("estimates.csv")).iter().any(|row| row[0] == "energy"));
    assert!(r.stdout.contains("iterations = 1"));
}

#[test]
fn manufactured_solve_reports_error() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[problem]
cells = 64
h = { family = "power", theta = 1.0 }
e = { kind = "constant", value = [1.0] }
f = { kind = "manufactured", exact = [[0.0, 1.0, -1.0]] }
"#;
    let r = run(&dir, "solve", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let err: f64 = summary_value(&r.out, "error_l2").parse().unwrap();
    assert!(err < 1e-4, "{err}");
}

#[test]
fn threshold_of_the_reference_triple() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[problem]
dimension = 3
p = 2.0
[exponents]
m = 1.2
r = 6.0
[scenario]
alpha = 1.0
sobolev = 1.0
"#;
    let r = run(&dir, "threshold", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(summary_value(&r.out, "threshold"), "0.25");
    assert_eq!(summary_value(&r.out, "s"), "6");
    assert_eq!(summary_value(&r.out, "theta"), "1");
}

#[test]
fn classify_log_is_divergent() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "classify", "[problem]\np = 2.0\nh = { family = \"log\" }\n", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(summary_value(&r.out, "class"), "Divergent");
    let r = run(&dir, "classify", "[problem]\np = 2.0\nh = { family = \"power\", theta = 0.5 }\n", &[]);
    assert_eq!(summary_value(&r.out, "class"), "Bounded");
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let r = run(&dir, "solve", "[problem]\ncells = \"many\"\n", &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("line 2"), "{}", r.stderr);

    let r = run(&dir, "solve", "[problem]\np = 1.5\n", &[]);
    assert_eq!(r.code, 2);

    let r = run(&dir, "fixed-point", POISSON_1D, &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);

    let cfg = "[problem]\ncells = 8\nh = { family = \"power-mu\", theta = 1.5 }\n";
    let r = run(&dir, "solve", cfg, &[]);
    assert_eq!(r.code, 2, "{}", r.stderr);

    let cfg = "[problem]\np = 4.0\ncells = 64\nf = { kind = \"constant\", value = 1.0 }\n[solver]\nmax_iter = 1\n";
    let r = run(&dir, "solve", cfg, &[]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    assert_eq!(summary_value(&r.out, "converged"), "false");
    assert!(r.out.join("solution.csv").exists());

    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let cfg_path = dir.path().join("ok.toml");
    std::fs::write(&cfg_path, POISSON_1D).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_quasilin"))
        .args(["solve", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn sweep_writes_one_row_per_level() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[problem]
cells = 16
h = { family = "log" }
e = { kind = "constant", value = [1.0] }
f = { kind = "constant", value = 2.0 }
[scenario]
levels = [1.0, 2.0, 4.0, 8.0]
"#;
    let r = run(&dir, "sweep", cfg, &["--threads", "2"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let rows = csv_rows(&r.out.join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    assert_eq!(summary_value(&r.out, "stabilized"), "true");
    assert_eq!(summary_value(&r.out, "stabilization_level"), "2");
}

#[test]
fn uniqueness_writes_one_trace_per_seed() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[problem]
cells = 32
p = 3.0
h = { family = "power", theta = 1.0 }
e = { kind = "constant", value = [0.5] }
f = { kind = "constant", value = 1.0 }
[scenario]
seeds = 5
seed = 7
"#;
    let r = run(&dir, "uniqueness", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    for i in 0..5 {
        assert!(r.out.join(format!("trace_seed_{i}.csv")).exists());
    }
    let d: f64 = summary_value(&r.out, "max_distance").parse().unwrap();
    assert!(d <= 1e-8, "{d}");
}

#[test]
fn fixed_point_scenario() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"
[problem]
dimension = 3
cells = 4
h = { family = "power", theta = 1.0 }
e = { kind = "constant", value = [0.5, 0.5, 0.5] }
f = { kind = "constant", value = 0.5 }
[exponents]
m = 1.2
r = 6.0
[scenario]
sobolev = 0.4
"#;
    let r = run(&dir, "fixed-point", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(summary_value(&r.out, "inside_ball"), "true");
    assert!(csv_rows(&r.out.join("fixed_point.csv")).len() >= 2);
}

#[test]
fn csv_input_round_trips_bitwise() {
    let dir = TempDir::new().unwrap();
    let first = run(&dir, "solve", POISSON_1D, &[]);
    assert_eq!(first.code, 0);
    let solution = first.out.join("solution.csv");
    let bytes = std::fs::read(&solution).unwrap();
    let field = read_field_csv(bytes.as_slice(), 1).unwrap();
    let mut again = Vec::new();
    write_field_csv(&field, &mut again).unwrap();
    assert_eq!(again, bytes);

    let cfg = format!("[problem]\ncells = 64\nf = {{ kind = \"csv\", path = \"{}\" }}\n", solution.display());
    let second = run(&dir, "verify", &cfg, &[]);
    assert_eq!(second.code, 0, "{}", second.stderr);
    let wrong = format!("[problem]\ncells = 32\nf = {{ kind = \"csv\", path = \"{}\" }}\n", solution.display());
    assert_eq!(run(&dir, "solve", &wrong, &[]).code, 2);
}

#[test]
fn runs_are_deterministic() {
    let cfg = r#"
[problem]
dimension = 2
cells = 8
p = 3.0
h = { family = "power", theta = 0.5 }
e = { kind = "constant", value = [1.0, 0.0] }
f = { kind = "constant", value = 1.0 }
[scenario]
seeds = 3
"#;
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    let ra = run(&a, "uniqueness", cfg, &["--threads", "1"]);
    let rb = run(&b, "uniqueness", cfg, &["--threads", "4"]);
    assert_eq!(ra.code, 0, "{}", ra.stderr);
    for name in ["summary.txt", "solution.csv", "trace_seed_0.csv", "trace_seed_2.csv"] {
        assert_eq!(
            std::fs::read(ra.out.join(name)).unwrap(),
            std::fs::read(rb.out.join(name)).unwrap(),
            "{name}"
        );
    }
}
