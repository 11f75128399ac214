//! `qsylv`: check, solve, verify and generate coupled quaternion Sylvester
//! systems. All output is pretty JSON with sorted keys.
//!
//! Exit codes: 0 success or consistent, 1 negative verdict, 2 input error,
//! 3 generator failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use qsylv::gen::{planted_phi_system, planted_system, PhiDims, SystemDims};
use qsylv::io::{self, Instance};
use qsylv::linalg::{self, QuatSvd};
use qsylv::phi::{self, PhiSystem};
use qsylv::sylvester::{self, ConsistencyReport, ParamPolicy, SolveOptions, SylvesterSystem};
use qsylv::{Error, Involution};
use qsylv_oracle as oracle;

const MAX_ATTEMPTS: usize = 100;

#[derive(Parser)]
#[command(name = "qsylv", version, about = "Coupled quaternion Sylvester systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    cfg: Config,
}

#[derive(Args)]
struct Config {
    /// Absolute rank tolerance (default: relative to the largest singular value).
    #[arg(long, global = true, value_parser = positive)]
    tol_rank: Option<f64>,
    /// Relative residual tolerance.
    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    tol_res: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Add the realification oracle's verdict to the output.
    #[arg(long, global = true)]
    oracle: bool,
    /// Evaluate all eight rank families on φ-systems.
    #[arg(long, global = true)]
    strict_phi: bool,
    /// Draw the free parameters of the general solution from the seed.
    #[arg(long, global = true)]
    random_params: bool,
    /// Generate coefficients of rank at most this.
    #[arg(long, global = true)]
    deficient: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide consistency by the rank conditions.
    Check {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Construct a solution.
    Solve {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute residuals of a proposed solution.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Generate a random instance.
    Gen(GenArgs),
    /// Rank and singular values of a matrix.
    Rank { matrix: PathBuf },
    /// Moore–Penrose inverse of a matrix.
    Pinv {
        matrix: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Consistent,
    Inconsistent,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    k: usize,
    /// Every dimension.
    #[arg(long, default_value_t = 3, conflicts_with = "max_dim")]
    dim: usize,
    /// Draw every dimension from 1..=max-dim instead.
    #[arg(long)]
    max_dim: Option<usize>,
    #[arg(long, value_enum, default_value = "consistent")]
    mode: Mode,
    /// Involution axis `x,y,z`; produces a φ-system.
    #[arg(long, value_parser = axis, allow_hyphen_values = true)]
    phi: Option<Involution>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the planted solution (consistent mode only).
    #[arg(long)]
    solution_out: Option<PathBuf>,
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        Ok(_) => Err("must be a positive number".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn axis(s: &str) -> Result<Involution, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let n: [f64; 3] = parts.try_into().map_err(|_| "expected x,y,z".to_string())?;
    Involution::from_axis(n).map_err(|e| e.to_string())
}

enum Failure {
    Input(String),
    Generator(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_json(path: &Path) -> Result<Value, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: invalid JSON: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    io::instance_from_json(&parse_json(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(v: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = io::to_pretty(v);
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verdict(ok: bool) -> ExitCode {
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn oracle_json(rls: &oracle::RealLinearSystem) -> Value {
    let v = oracle::oracle_verdict(rls, None);
    let (_, residual) = oracle::oracle_solve(rls);
    json!({
        "consistent": v.consistent,
        "rank_m": v.rank_m,
        "rank_augmented": v.rank_augmented,
        "tol": v.tol,
        "reference_residual": residual,
    })
}

fn instance_oracle(inst: &Instance) -> Value {
    match inst {
        Instance::General(s) => oracle_json(&oracle::realify(s)),
        Instance::Phi(p) => oracle_json(&oracle::realify_phi(p)),
    }
}

fn check(inst: &Instance, cfg: &Config) -> Result<(ConsistencyReport, Value), Failure> {
    let (report, mut v) = match inst {
        Instance::General(s) => {
            let r = sylvester::check_system(s, cfg.tol_rank)?;
            let v = io::report_to_json(&r);
            (r, v)
        }
        Instance::Phi(p) if cfg.strict_phi => {
            let strict = phi::check_phi_system_strict(p, cfg.tol_rank)?;
            let mut v = io::report_to_json(&strict.full);
            v["listed_consistent"] = json!(strict.listed.consistent);
            (strict.full, v)
        }
        Instance::Phi(p) => {
            let r = phi::check_phi_system(p, cfg.tol_rank)?;
            let v = io::report_to_json(&r);
            (r, v)
        }
    };
    if cfg.oracle {
        v["oracle"] = instance_oracle(inst);
    }
    Ok((report, v))
}

fn cmd_check(path: &Path, out: Option<&Path>, cfg: &Config) -> Outcome {
    let inst = load_instance(path)?;
    let (report, v) = check(&inst, cfg)?;
    emit(&v, out)?;
    if let Some(c) = report.first_failure() {
        eprintln!(
            "inconsistent: {} (m={}, n={}): {} != {}",
            c.family, c.m, c.n, c.lhs_rank, c.rhs_rank
        );
    }
    Ok(verdict(report.consistent))
}

fn cmd_solve(path: &Path, out: Option<&Path>, cfg: &Config) -> Outcome {
    let inst = load_instance(path)?;
    let opts = SolveOptions {
        tol_res: cfg.tol_res,
        tol_rank: cfg.tol_rank,
        params: if cfg.random_params {
            ParamPolicy::Seeded(cfg.seed)
        } else {
            ParamPolicy::Zero
        },
        ..SolveOptions::default()
    };
    let solved = match &inst {
        Instance::General(s) => sylvester::solve_system_with(s, &opts).map(|sol| io::solution_to_json(&sol)),
        Instance::Phi(p) => phi::solve_phi_system_with(p, &opts).map(|sol| io::phi_solution_to_json(&sol)),
    };
    match solved {
        Ok(mut v) => {
            if cfg.oracle {
                v["oracle"] = instance_oracle(&inst);
            }
            emit(&v, out)?;
            Ok(ExitCode::SUCCESS)
        }
        Err(Error::InconsistentSystem(inc)) => {
            let mut v = io::report_to_json(&inc.report);
            if cfg.oracle {
                v["oracle"] = instance_oracle(&inst);
            }
            emit(&v, out)?;
            eprintln!("{inc}");
            Ok(ExitCode::from(1))
        }
        Err(e @ Error::Verification { .. }) => {
            eprintln!("{e}");
            Ok(ExitCode::from(1))
        }
        Err(e) => Err(e.into()),
    }
}

fn within(values: &[f64], scales: &[f64], tol: f64) -> bool {
    values.iter().zip(scales).all(|(v, s)| *v <= tol * (1.0 + s))
}

fn cmd_verify(instance: &Path, solution: &Path, cfg: &Config) -> Outcome {
    let inst = load_instance(instance)?;
    let sol = parse_json(solution)?;
    let bad_solution = |e: io::FormatError| Failure::Input(format!("{}: {e}", solution.display()));
    let (ok, v) = match &inst {
        Instance::General(s) => {
            let sol = io::solution_from_json(&sol).map_err(bad_solution)?;
            let res = sylvester::residuals(s, &sol)?;
            let scales: Vec<f64> = s.equations().iter().map(|eq| eq.e().fro_norm()).collect();
            let ok = within(&res, &scales, cfg.tol_res);
            (ok, json!({"ok": ok, "residuals": res, "tol_res": cfg.tol_res}))
        }
        Instance::Phi(p) => {
            let sol = io::phi_solution_from_json(&sol).map_err(bad_solution)?;
            let res = phi::phi_residuals(p, &sol)?;
            let scales: Vec<f64> = p.equations().iter().map(|eq| eq.e().fro_norm()).collect();
            let phi = p.involution();
            let defects: Vec<f64> = sol.z.iter().map(|z| (z - &z.phi_transpose(phi)).fro_norm()).collect();
            let z_scales: Vec<f64> = sol.z.iter().map(|z| z.fro_norm()).collect();
            let ok = within(&res, &scales, cfg.tol_res) && within(&defects, &z_scales, cfg.tol_res);
            (
                ok,
                json!({"ok": ok, "residuals": res, "phi_defects": defects, "tol_res": cfg.tol_res}),
            )
        }
    };
    emit(&v, None)?;
    Ok(verdict(ok))
}

fn gen_general(
    rng: &mut ChaCha8Rng,
    args: &GenArgs,
    cfg: &Config,
) -> Result<(SylvesterSystem, Option<Value>), Failure> {
    let dims = match args.max_dim {
        Some(hi) => SystemDims::random(rng, args.k, 1, hi.max(1)),
        None => SystemDims::uniform(args.k, args.dim),
    };
    match args.mode {
        Mode::Consistent => {
            let (sys, mut plant) = planted_system(rng, &dims, cfg.deficient);
            plant.residuals = sylvester::residuals(&sys, &plant)?;
            Ok((sys, Some(io::solution_to_json(&plant))))
        }
        Mode::Inconsistent => oracle::certified_inconsistent(rng, &dims, cfg.deficient, MAX_ATTEMPTS)
            .map(|(sys, _)| (sys, None))
            .ok_or_else(|| Failure::Generator(certify_failure())),
    }
}

fn gen_phi(
    rng: &mut ChaCha8Rng,
    phi: Involution,
    args: &GenArgs,
    cfg: &Config,
) -> Result<(PhiSystem, Option<Value>), Failure> {
    let dims = match args.max_dim {
        Some(hi) => PhiDims::random(rng, args.k, 1, hi.max(1)),
        None => PhiDims::uniform(args.k, args.dim),
    };
    match args.mode {
        Mode::Consistent => {
            let (ps, mut plant) = planted_phi_system(rng, phi, &dims, cfg.deficient);
            plant.residuals = phi::phi_residuals(&ps, &plant)?;
            plant.phi_defects = plant
                .z
                .iter()
                .map(|z| (z - &z.phi_transpose(&phi)).fro_norm())
                .collect();
            Ok((ps, Some(io::phi_solution_to_json(&plant))))
        }
        Mode::Inconsistent => oracle::certified_inconsistent_phi(rng, phi, &dims, cfg.deficient, MAX_ATTEMPTS)
            .map(|(ps, _)| (ps, None))
            .ok_or_else(|| Failure::Generator(certify_failure())),
    }
}

fn certify_failure() -> String {
    format!("no oracle-certified inconsistent instance in {MAX_ATTEMPTS} attempts; try --deficient or smaller unknowns")
}

fn cmd_gen(args: &GenArgs, cfg: &Config) -> Outcome {
    if args.k == 0 {
        return Err(Failure::Input("--k must be at least 1".into()));
    }
    if matches!(args.mode, Mode::Inconsistent) && args.solution_out.is_some() {
        return Err(Failure::Input("--solution-out needs --mode consistent".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (instance, solution) = match args.phi {
        Some(phi) => {
            let (ps, sol) = gen_phi(&mut rng, phi, args, cfg)?;
            (io::phi_system_to_json(&ps), sol)
        }
        None => {
            let (sys, sol) = gen_general(&mut rng, args, cfg)?;
            (io::system_to_json(&sys), sol)
        }
    };
    emit(&instance, args.out.as_deref())?;
    if let (Some(path), Some(sol)) = (&args.solution_out, solution) {
        emit(&sol, Some(path))?;
    }
    Ok(ExitCode::SUCCESS)
}

fn load_matrix(path: &Path) -> Result<qsylv::QuatMatrix, Failure> {
    io::matrix_from_json(&parse_json(path)?, "").map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn cmd_rank(path: &Path, cfg: &Config) -> Outcome {
    let r = linalg::rank(&load_matrix(path)?, cfg.tol_rank);
    let v = json!({
        "rank": r.rank,
        "singular_values": r.singular_values,
        "tol": r.tol_used,
        "margin": r.margin(),
    });
    emit(&v, None)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_pinv(path: &Path, out: Option<&Path>, cfg: &Config) -> Outcome {
    let p = QuatSvd::new(&load_matrix(path)?, cfg.tol_rank).pinv();
    emit(&io::matrix_to_json(&p), out)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = &cli.cfg;
    let outcome = match &cli.command {
        Command::Check { instance, out } => cmd_check(instance, out.as_deref(), cfg),
        Command::Solve { instance, out } => cmd_solve(instance, out.as_deref(), cfg),
        Command::Verify { instance, solution } => cmd_verify(instance, solution, cfg),
        Command::Gen(args) => cmd_gen(args, cfg),
        Command::Rank { matrix } => cmd_rank(matrix, cfg),
        Command::Pinv { matrix, out } => cmd_pinv(matrix, out.as_deref(), cfg),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Generator(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
