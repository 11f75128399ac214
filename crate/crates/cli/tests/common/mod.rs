use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use qsylv::io;
use qsylv::QuatMatrix;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_qsylv")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(dir: &Path, args: &[&str]) -> Run {
    let out = Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exited normally"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

/// One CLI invocation: arguments, expected exit code, and the file its
/// stdout is saved to (compared against the golden copy when `golden`).
pub struct Step {
    pub args: &'static [&'static str],
    pub code: i32,
    pub stdout_to: Option<&'static str>,
    pub golden: bool,
}

const fn step(args: &'static [&'static str], code: i32, stdout_to: Option<&'static str>, golden: bool) -> Step {
    Step {
        args,
        code,
        stdout_to,
        golden,
    }
}

pub const SCENARIO: &[Step] = &[
    step(
        &[
            "gen",
            "--k",
            "2",
            "--seed",
            "0",
            "--out",
            "instance.json",
            "--solution-out",
            "planted.json",
        ],
        0,
        None,
        false,
    ),
    step(&["check", "instance.json"], 0, Some("check.json"), true),
    step(&["solve", "instance.json"], 0, Some("solution.json"), true),
    step(
        &["verify", "instance.json", "solution.json"],
        0,
        Some("verify.json"),
        true,
    ),
    step(&["verify", "instance.json", "planted.json"], 0, None, false),
    step(&["verify", "instance.json", "zero_z.json"], 1, None, false),
    step(
        &["solve", "instance.json", "--random-params", "--seed", "7"],
        0,
        Some("solution_random.json"),
        true,
    ),
    step(
        &[
            "gen",
            "--k",
            "2",
            "--seed",
            "0",
            "--mode",
            "inconsistent",
            "--deficient",
            "1",
        ],
        0,
        Some("inconsistent.json"),
        true,
    ),
    step(
        &["check", "inconsistent.json"],
        1,
        Some("check_inconsistent.json"),
        true,
    ),
    step(&["solve", "inconsistent.json"], 1, None, false),
    step(
        &["gen", "--k", "2", "--seed", "0", "--phi", "0,0.6,0.8"],
        0,
        Some("phi_instance.json"),
        true,
    ),
    step(&["check", "phi_instance.json"], 0, Some("phi_check.json"), true),
    step(&["solve", "phi_instance.json"], 0, Some("phi_solution.json"), true),
    step(&["verify", "phi_instance.json", "phi_solution.json"], 0, None, false),
    step(&["check", "zero.json"], 0, None, false),
    step(&["solve", "zero.json"], 0, Some("zero_solution.json"), true),
    step(&["verify", "zero.json", "zero_solution.json"], 0, None, false),
    step(&["check", "ragged.json"], 2, None, false),
    step(&["verify", "instance.json", "phi_solution.json"], 2, None, false),
    step(&["verify", "instance.json", "zero_solution.json"], 2, None, false),
    step(&["gen", "--k", "0"], 2, None, false),
    step(&["gen", "--k", "2", "--mode", "inconsistent"], 3, None, false),
    step(&["rank", "matrix.json"], 0, Some("rank.json"), true),
    step(&["pinv", "matrix.json"], 0, Some("pinv.json"), true),
];

/// Files the scenario expects beside the generated ones.
fn write_inputs(dir: &Path) {
    let zero = r#"{"k": 1, "equations": [{"A": Z, "B": Z, "C": Z, "D": Z, "F": Z, "G": Z, "E": Z}]}"#
        .replace('Z', r#"{"rows": 1, "cols": 1, "data": [[[0, 0, 0, 0]]]}"#);
    fs::write(dir.join("zero.json"), zero).unwrap();
    let ragged =
        r#"{"k": 1, "equations": [{"A": {"rows": 2, "cols": 2, "data": [[[1,0,0,0],[0,1,0,0]],[[0,0,1,0]]]}}]}"#;
    fs::write(dir.join("ragged.json"), ragged).unwrap();
    let m = QuatMatrix::from_rows(&[
        vec![
            qsylv::Quaternion::new(1.0, 0.0, 0.0, 0.0),
            qsylv::Quaternion::new(0.0, 1.0, 0.0, 0.0),
        ],
        vec![
            qsylv::Quaternion::new(0.0, 0.0, 1.0, 0.0),
            qsylv::Quaternion::new(0.0, 0.0, 0.0, 1.0),
        ],
    ])
    .unwrap();
    fs::write(dir.join("matrix.json"), io::to_pretty(&io::matrix_to_json(&m))).unwrap();
}

fn zero_z(dir: &Path) {
    let text = fs::read_to_string(dir.join("planted.json")).unwrap();
    let mut sol = io::solution_from_json(&serde_json::from_str(&text).unwrap()).unwrap();
    for z in &mut sol.z {
        *z = QuatMatrix::zeros(z.rows(), z.cols());
    }
    fs::write(dir.join("zero_z.json"), io::to_pretty(&io::solution_to_json(&sol))).unwrap();
}

/// Problems found while running the scenario in `dir`.
pub fn run_scenario(dir: &Path) -> Vec<String> {
    write_inputs(dir);
    let mut problems = Vec::new();
    for s in SCENARIO {
        if s.args.contains(&"zero_z.json") {
            zero_z(dir);
        }
        let r = run(dir, s.args);
        if r.code != s.code {
            problems.push(format!(
                "{:?}: exit {} (expected {}): {}",
                s.args,
                r.code,
                s.code,
                r.stderr.trim()
            ));
        }
        if let Some(name) = s.stdout_to {
            fs::write(dir.join(name), &r.stdout).unwrap();
        }
    }
    problems
}

pub fn golden_files() -> impl Iterator<Item = &'static str> {
    ["instance.json", "planted.json"]
        .into_iter()
        .chain(SCENARIO.iter().filter(|s| s.golden).filter_map(|s| s.stdout_to))
}

/// Compares (or with `QSYLV_BLESS` set, rewrites) the golden copies.
pub fn compare_golden(dir: &Path) -> Vec<String> {
    let bless = std::env::var_os("QSYLV_BLESS").is_some();
    let mut problems = Vec::new();
    for name in golden_files() {
        let got = fs::read(dir.join(name)).unwrap_or_default();
        let path = golden_dir().join(name);
        if bless {
            fs::write(&path, &got).unwrap();
            continue;
        }
        match fs::read(&path) {
            Ok(want) if want == got => {}
            Ok(_) => problems.push(format!("{name} differs from its golden copy")),
            Err(e) => problems.push(format!("{name}: {e}")),
        }
    }
    problems
}

/// Every golden file, byte-identical between two runs in fresh directories.
pub fn compare_runs(a: &Path, b: &Path) -> Vec<String> {
    golden_files()
        .filter(|name| fs::read(a.join(name)).ok() != fs::read(b.join(name)).ok())
        .map(|name| format!("{name} differs between runs"))
        .collect()
}
