//! `optrec` command-line driver.
//!
//! Every subcommand prints a provenance header (the resolved configuration as
//! `#` lines) followed by `key = value` report lines. CSV files are written to
//! `--out DIR` when given. Exit status: 0 when every check in scope passes,
//! 1 when a check fails, 2 on a usage, configuration or numerical failure, in
//! which case a single `failure = <reason>` line is printed.

pub mod config;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use optrec_core::corpus;
use optrec_core::multipliers::certificate_rows;
use optrec_core::recovery::build_bump_with;
use optrec_core::{
    build_multipliers, check_interpolation, check_norm_condition, envelope_oracle, simulate_trial,
    solve_envelope, verify_inequality, BumpConfig, EtaGrid, FrequencyGrid, Levels, NodeKind,
    SpectralFunction,
};

use config::{noise_label, parse_problem_config, variation_label, ProblemConfig};

#[derive(Debug, Parser)]
#[command(
    name = "optrec",
    version,
    about = "Optimal recovery of weighted multiplication operators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Envelope value, recovery error, support hyperplane and active set.
    Solve(Flags),
    /// Cross-check the solver against the brute-force oracle.
    Oracle(Flags),
    /// Multiplier weights; with --out, multipliers over the level grid as CSV.
    Method(Flags),
    /// Check interpolation and the norm condition over the eta grid.
    Certify(Flags),
    /// Seeded L2 recovery trials against the error bound.
    Simulate(Flags),
    /// Near-extremal bump and its constraint slacks.
    Bump(Flags),
    /// Evaluate the sharp inequality on a spectral function read from --input.
    VerifyInequality(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Problem configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Directory for CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Half-width of the symmetric eta grid.
    #[arg(long)]
    eta_range: Option<f64>,
    /// Eta grid points per axis.
    #[arg(long)]
    eta_points: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Spectral function CSV (columns xi1..xid, re, im).
    #[arg(long)]
    input: Option<PathBuf>,
}

/// Failure reported as a single line.
#[derive(Debug)]
struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;
type Handler = fn(&ProblemConfig, &Flags, &mut Report) -> Outcome;

struct Report<'a> {
    out: &'a mut dyn Write,
}

impl Report<'_> {
    fn line(&mut self, key: &str, value: impl std::fmt::Display) -> Result<(), Failure> {
        writeln!(self.out, "{key} = {value}")?;
        Ok(())
    }
}

/// Shortest round-trip form, switching to exponent notation outside `[1e-4, 1e6)`.
fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-4..1e6).contains(&a) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn nums(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| num(x)).collect();
    format!("[{}]", parts.join(", "))
}

fn vec_str<T: std::fmt::Display>(v: &[T]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let first = e.to_string().lines().next().unwrap_or("").to_string();
            let _ = writeln!(
                out,
                "failure = usage: {}",
                first.trim_start_matches("error: ")
            );
            return 2;
        }
    };
    match dispatch(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure(reason)) => {
            let _ = writeln!(out, "failure = {}", reason.replace('\n', " "));
            2
        }
    }
}

fn load(flags: &Flags) -> Result<ProblemConfig, Failure> {
    let text = fs::read_to_string(&flags.config)
        .map_err(|e| Failure(format!("cannot read {}: {e}", flags.config.display())))?;
    let base = flags.config.parent().unwrap_or(Path::new("."));
    let mut cfg = parse_problem_config(&text, base)?;
    let o = &mut cfg.options;
    if let Some(v) = flags.seed {
        o.seed = v;
    }
    if let Some(v) = flags.trials {
        o.trials = v;
    }
    if let Some(v) = flags.eta_range {
        o.eta_range = v;
    }
    if let Some(v) = flags.eta_points {
        o.eta_points = v;
    }
    if let Some(v) = flags.epsilon {
        o.epsilon = v;
    }
    o.validate()
        .map_err(|e| Failure(format!("validation error: {e}")))?;
    Ok(cfg)
}

fn csv_path(flags: &Flags, name: &str) -> Result<Option<PathBuf>, Failure> {
    match &flags.out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Ok(Some(dir.join(name)))
        }
        None => Ok(None),
    }
}

fn write_rows(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> Outcome {
    let (flags, handler): (&Flags, Handler) = match &command {
        Command::Solve(f) => (f, cmd_solve),
        Command::Oracle(f) => (f, cmd_oracle),
        Command::Method(f) => (f, cmd_method),
        Command::Certify(f) => (f, cmd_certify),
        Command::Simulate(f) => (f, cmd_simulate),
        Command::Bump(f) => (f, cmd_bump),
        Command::VerifyInequality(f) => (f, cmd_verify),
    };
    let cfg = load(flags)?;
    // Compute before printing so that failures stay on a single line.
    let mut buffer = Vec::new();
    let ok = handler(&cfg, flags, &mut Report { out: &mut buffer })?;
    writeln!(out, "{cfg}")?;
    out.write_all(&buffer)?;
    Ok(ok)
}

fn cmd_solve(cfg: &ProblemConfig, _flags: &Flags, r: &mut Report) -> Outcome {
    let problem = &cfg.problem;
    let sol = solve_envelope(problem)?;
    let product = sol.weighted_product();
    let observed: Vec<usize> = sol
        .active
        .iter()
        .filter(|a| problem.nodes()[a.index].kind == NodeKind::Observed)
        .map(|a| a.index)
        .collect();
    r.line("s_value", num(sol.s_value))?;
    r.line("error", num(sol.error))?;
    r.line("eta_hat", nums(&sol.eta_hat))?;
    r.line("a_hat", num(sol.a_hat))?;
    r.line("active", vec_str(&sol.active_indices()))?;
    r.line("theta", nums(&sol.thetas()))?;
    r.line("observed_active", vec_str(&observed))?;
    r.line("weighted_product", num(product))?;
    r.line(
        "product_rel_gap",
        num((product - sol.error).abs() / sol.error),
    )?;
    r.line("degenerate_hyperplane", sol.degenerate_hyperplane)?;
    Ok(true)
}

fn cmd_oracle(cfg: &ProblemConfig, _flags: &Flags, r: &mut Report) -> Outcome {
    let sol = solve_envelope(&cfg.problem)?;
    let orc = envelope_oracle(&cfg.problem)?;
    let gap = (sol.s_value - orc.s_value).abs() / sol.s_value.abs().max(f64::MIN_POSITIVE);
    let agree = gap <= 1e-9 || (sol.s_value - orc.s_value).abs() <= 1e-12;
    r.line("solver_s_value", num(sol.s_value))?;
    r.line("oracle_s_value", num(orc.s_value))?;
    r.line("rel_gap", num(gap))?;
    r.line("solver_active", vec_str(&sol.active_indices()))?;
    r.line("oracle_active", vec_str(&orc.active_indices()))?;
    r.line("agree", agree)?;
    Ok(agree)
}

fn eta_grid(cfg: &ProblemConfig) -> EtaGrid {
    EtaGrid::symmetric(
        cfg.problem.k(),
        cfg.options.eta_range,
        cfg.options.eta_points,
    )
}

fn cmd_method(cfg: &ProblemConfig, flags: &Flags, r: &mut Report) -> Outcome {
    let sol = solve_envelope(&cfg.problem)?;
    let fam = build_multipliers(&cfg.problem, &sol);
    r.line("active", vec_str(&fam.active_indices))?;
    r.line("observed_active", vec_str(&fam.observed_indices()))?;
    r.line("lambda_hats", nums(&fam.lambda_hats))?;
    r.line("bound", num(fam.bound()))?;
    if let Some(path) = csv_path(flags, "multipliers.csv")? {
        let grid = eta_grid(cfg);
        let mut header: Vec<String> = (1..=grid.k).map(|i| format!("eta{i}")).collect();
        for j in &fam.active_indices {
            header.push(format!("a{j}_re"));
            header.push(format!("a{j}_im"));
        }
        let rows: Vec<Vec<String>> = grid
            .iter()
            .map(|eta| {
                let a = fam.eval_levels(&Levels::from_eta(&eta));
                let mut row: Vec<String> = eta.iter().map(|&e| num(e)).collect();
                for v in a {
                    row.push(num(v.re));
                    row.push(num(v.im));
                }
                row
            })
            .collect();
        write_rows(&path, &header, &rows)?;
        r.line("csv", "multipliers.csv")?;
        r.line("csv_rows", rows.len())?;
    }
    Ok(true)
}

fn cmd_certify(cfg: &ProblemConfig, flags: &Flags, r: &mut Report) -> Outcome {
    let sol = solve_envelope(&cfg.problem)?;
    let fam = build_multipliers(&cfg.problem, &sol);
    let mut rng = corpus::rng(cfg.options.seed);
    let mut samples =
        corpus::frequency_samples(&mut rng, cfg.problem.d(), cfg.options.interpolation_samples);
    let levels: Vec<f64> = sol.eta_hat.iter().map(|e| (-e).exp()).collect();
    if let Ok(xi) = cfg.problem.weight().xi_for_levels(&levels, cfg.problem.d()) {
        samples.push(xi);
    }
    let interpolation = check_interpolation(&fam, &samples);
    let grid = eta_grid(cfg);
    let cert = check_norm_condition(&fam, &grid);
    let pass = interpolation <= 1e-10
        && cert.max_normalized <= 1.0 + 1e-10
        && cert.touch_value >= 1.0 - 1e-6;
    r.line("interpolation_samples", samples.len())?;
    r.line("interpolation_residual", num(interpolation))?;
    r.line("eta_points_checked", cert.points_checked)?;
    r.line("certificate_max", num(cert.max_normalized))?;
    r.line("certificate_argmax", nums(&cert.argmax))?;
    r.line("touch_value", num(cert.touch_value))?;
    r.line("pass", pass)?;
    if let Some(path) = csv_path(flags, "certificate.csv")? {
        let mut header: Vec<String> = (1..=grid.k).map(|i| format!("eta{i}")).collect();
        header.extend(["lhs", "rhs", "normalized"].map(String::from));
        let rows: Vec<Vec<String>> = certificate_rows(&fam, &grid)
            .into_iter()
            .map(|row| {
                let mut v: Vec<String> = row.eta.iter().map(|&e| num(e)).collect();
                v.extend([row.lhs, row.rhs, row.normalized].map(num));
                v
            })
            .collect();
        write_rows(&path, &header, &rows)?;
        r.line("csv", "certificate.csv")?;
    }
    Ok(pass)
}

fn cmd_simulate(cfg: &ProblemConfig, flags: &Flags, r: &mut Report) -> Outcome {
    let problem = &cfg.problem;
    let o = &cfg.options;
    let sol = solve_envelope(problem)?;
    let fam = build_multipliers(problem, &sol);
    let grid = FrequencyGrid::cube(&vec![0.0; problem.d()], o.grid_half_width, o.grid_points)?;
    let mut rng = corpus::rng(o.seed);
    let mut rows = Vec::with_capacity(o.trials);
    let (mut max_error, mut max_ratio, mut sum) = (0.0f64, 0.0f64, 0.0);
    let (mut within, mut admissible) = (true, true);
    for t in 0..o.trials {
        let x = corpus::random_spectrum_on(&mut rng, grid.clone());
        let trial = simulate_trial(
            problem,
            &sol,
            &fam,
            &x,
            o.noise,
            o.seed.wrapping_add(t as u64),
        )?;
        let ratio = trial.achieved_error / trial.bound;
        max_error = max_error.max(trial.achieved_error);
        max_ratio = max_ratio.max(ratio);
        sum += trial.achieved_error;
        within &= trial.within_bound;
        admissible &= trial.admissible;
        rows.push(vec![
            t.to_string(),
            num(trial.achieved_error),
            num(ratio),
            num(trial.scale),
            trial.admissible.to_string(),
        ]);
    }
    r.line("trials", o.trials)?;
    r.line("noise", noise_label(o.noise))?;
    r.line("bound", num(sol.error))?;
    r.line("max_error", num(max_error))?;
    r.line("mean_error", num(sum / o.trials as f64))?;
    r.line("max_ratio", num(max_ratio))?;
    r.line("all_admissible", admissible)?;
    r.line("all_within_bound", within)?;
    if let Some(path) = csv_path(flags, "trials.csv")? {
        let header = ["trial", "error", "ratio", "scale", "admissible"].map(String::from);
        write_rows(&path, &header, &rows)?;
        r.line("csv", "trials.csv")?;
    }
    Ok(within)
}

fn cmd_bump(cfg: &ProblemConfig, flags: &Flags, r: &mut Report) -> Outcome {
    let sol = solve_envelope(&cfg.problem)?;
    let bump_cfg = BumpConfig {
        epsilon: cfg.options.epsilon,
        points_per_axis: cfg.options.bump_points,
        variation: cfg.options.bump_variation,
    };
    let out = build_bump_with(&cfg.problem, &sol, &bump_cfg)?;
    let b = &out.bump;
    r.line("epsilon", num(b.epsilon))?;
    r.line("variation", variation_label(b.variation))?;
    r.line("center", nums(&b.center))?;
    r.line("radius", num(b.radius))?;
    r.line("amplitude", num(b.amplitude))?;
    r.line("gamma_eps", num(b.gamma_eps))?;
    r.line("a_cap", num(b.a_cap))?;
    r.line(
        "a_cap_convention",
        "exp(-p * a_hat), exp(-a_hat) for p = inf",
    )?;
    r.line("node_norms", nums(&out.node_norms))?;
    r.line("slacks", nums(&out.slacks))?;
    r.line("target_norm", num(out.target_norm))?;
    r.line("bound", num(out.bound))?;
    r.line("ratio", num(out.ratio))?;
    r.line("loss_constant", num(out.loss_constant))?;
    r.line("admissible", out.admissible)?;
    if let Some(path) = csv_path(flags, "bump.csv")? {
        out.function.write_csv(fs::File::create(&path)?)?;
        r.line("csv", "bump.csv")?;
    }
    Ok(out.admissible)
}

fn cmd_verify(cfg: &ProblemConfig, flags: &Flags, r: &mut Report) -> Outcome {
    let input = flags
        .input
        .as_ref()
        .ok_or_else(|| Failure("verify-inequality needs --input PATH".into()))?;
    let file = fs::File::open(input)
        .map_err(|e| Failure(format!("cannot read {}: {e}", input.display())))?;
    let x = SpectralFunction::read_csv(file)?;
    let rep = verify_inequality(&cfg.problem, &x)?;
    let id = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    r.line("function", &id)?;
    r.line("grid_shape", vec_str(&x.grid().shape()))?;
    r.line("lhs", num(rep.lhs))?;
    r.line("node_norms", nums(&rep.node_norms))?;
    r.line("theta", nums(&rep.theta))?;
    r.line("rhs", num(rep.rhs))?;
    r.line("ratio", num(rep.ratio))?;
    r.line("holds", rep.holds)?;
    if let Some(path) = csv_path(flags, "inequality.csv")? {
        let mut header = ["function_id", "lhs", "rhs", "ratio"]
            .map(String::from)
            .to_vec();
        header.extend((0..rep.theta.len()).map(|j| format!("theta{j}")));
        let mut row = vec![id, num(rep.lhs), num(rep.rhs), num(rep.ratio)];
        row.extend(rep.theta.iter().map(|&t| num(t)));
        write_rows(&path, &header, &[row])?;
        r.line("csv", "inequality.csv")?;
    }
    Ok(rep.holds)
}
