//! `pot`: equilibrium, quantizer design, price of transparency, sweeps,
//! Monte Carlo checks and best-response scans from the command line.

mod svg;

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pot_core::grid::{inclusive_range, parse_range};
use pot_core::numfmt::sig;
use pot_core::{
    analytic_expectations, best_response_scan, compute_pot, lloyd_max_run, simulate_with_pot, solve_equilibrium,
    sweep_pot, write_sweep_csv, Error, Estimate, Model, SimulationConfig,
};

#[derive(Parser, Debug)]
#[command(name = "pot", version, about = "Price of transparency in strategic scalar classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Closed-form equilibrium (α, κ, D_S, D_R).
    Equilibrium {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        json: bool,
    },
    /// Lloyd-Max quantizer for N(0, variance).
    Quantizer {
        #[arg(long, allow_negative_numbers = true)]
        variance: f64,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = pot_core::quantizer::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = pot_core::quantizer::DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long)]
        json: bool,
    },
    /// Price of transparency J_R*/J_R** at k levels.
    Pot {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        json: bool,
    },
    /// PoT over a (rho, r, k) grid, written as CSV.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        sigma2: f64,
        /// A:B:STEP or a single value
        #[arg(long, allow_hyphen_values = true)]
        rho: String,
        /// A:B:STEP or a single value
        #[arg(long, allow_hyphen_values = true)]
        r: String,
        #[arg(long, value_delimiter = ',', required = true)]
        levels: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Monte Carlo estimates against the closed forms.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Worker threads; the report does not depend on this.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Sender cost over a grid of report gains α′.
    Bestresponse {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        levels: usize,
        #[arg(long, allow_negative_numbers = true)]
        alpha_min: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha_max: f64,
        #[arg(long, allow_negative_numbers = true)]
        alpha_step: f64,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long, allow_negative_numbers = true)]
    sigma2: f64,
    #[arg(long, allow_negative_numbers = true)]
    rho: f64,
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
}

impl ModelArgs {
    fn model(&self) -> pot_core::Result<Model> {
        Model::new(self.sigma2, self.rho, self.r)
    }
}

#[derive(Debug)]
enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::InvalidModel { .. }) => 2,
            Failure::Core(Error::NoConvergence { .. } | Error::DegenerateCell { .. }) => 3,
            Failure::Core(_) | Failure::Io(_) => 1,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(e) => e.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(text) => {
            let mut out = io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.exit_code())
        }
    }
}

fn to_json(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn line(out: &mut String, label: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{label:<16}{value}");
}

fn run(cmd: Command) -> Result<String, Failure> {
    match cmd {
        Command::Equilibrium { model, json } => equilibrium(&model.model()?, json),
        Command::Quantizer {
            variance,
            levels,
            tol,
            max_iter,
            json,
        } => quantizer(variance, levels, tol, max_iter, json),
        Command::Pot { model, levels, json } => pot(&model.model()?, levels, json),
        Command::Sweep {
            sigma2,
            rho,
            r,
            levels,
            out,
            svg,
        } => sweep(sigma2, &rho, &r, &levels, &out, svg.as_deref()),
        Command::Simulate {
            model,
            levels,
            samples,
            seed,
            workers,
            json,
        } => {
            let config = SimulationConfig {
                n: samples,
                seed,
                model: model.model()?,
                k: levels,
            };
            match workers {
                Some(0) => Err(Error::InvalidArgument("--workers must be at least 1".into()).into()),
                Some(w) => rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| Failure::Io(e.to_string()))?
                    .install(|| simulate(&config, json)),
                None => simulate(&config, json),
            }
        }
        Command::Bestresponse {
            model,
            levels,
            alpha_min,
            alpha_max,
            alpha_step,
            json,
        } => bestresponse(&model.model()?, levels, alpha_min, alpha_max, alpha_step, json),
    }
}

fn model_json(m: &Model) -> serde_json::Value {
    json!({ "sigma2": m.sigma2(), "rho": m.rho(), "r": m.r() })
}

fn equilibrium(m: &Model, as_json: bool) -> Result<String, Failure> {
    let eq = solve_equilibrium(m)?;
    if as_json {
        return Ok(to_json(&json!({ "model": model_json(m), "equilibrium": eq })));
    }
    let mut out = String::new();
    line(&mut out, "A", sig(eq.a_const, 12));
    line(&mut out, "alpha", sig(eq.alpha, 12));
    line(&mut out, "kappa", sig(eq.kappa, 12));
    line(&mut out, "D_S", sig(eq.d_s, 12));
    line(&mut out, "D_R", sig(eq.d_r, 12));
    line(&mut out, "est_variance", sig(eq.est_variance, 12));
    Ok(out)
}

fn quantizer(variance: f64, k: usize, tol: f64, max_iter: usize, as_json: bool) -> Result<String, Failure> {
    let run = lloyd_max_run(variance, k, tol, max_iter)?;
    if as_json {
        return Ok(to_json(&json!({
            "variance": variance,
            "k": k,
            "iterations": run.iterations,
            "distortion": run.distortion,
            "normalized_distortion": run.distortion / variance,
            "quantizer": run.quantizer,
        })));
    }
    let join = |v: &[f64]| v.iter().map(|x| sig(*x, 10)).collect::<Vec<_>>().join(" ");
    let mut out = String::new();
    line(&mut out, "k", k);
    line(&mut out, "iterations", run.iterations);
    line(&mut out, "distortion", sig(run.distortion, 12));
    line(&mut out, "d_k", sig(run.distortion / variance, 12));
    line(&mut out, "boundaries", join(run.quantizer.boundaries()));
    line(&mut out, "levels", join(run.quantizer.levels()));
    Ok(out)
}

fn pot(m: &Model, k: usize, as_json: bool) -> Result<String, Failure> {
    let rep = compute_pot(m, k)?;
    if as_json {
        return Ok(to_json(&json!({ "model": model_json(m), "report": rep })));
    }
    let mut out = String::new();
    line(&mut out, "k", k);
    line(&mut out, "D_R", sig(rep.d_r, 12));
    line(&mut out, "D_Q(estimate)", sig(rep.d_q_est, 12));
    line(&mut out, "D_Q(source)", sig(rep.d_q_src, 12));
    line(&mut out, "J_R*", sig(rep.j_r_star, 12));
    line(&mut out, "J_R**", sig(rep.j_r_starstar, 12));
    line(&mut out, "PoT", format!("{:.6}", rep.pot));
    Ok(out)
}

fn sweep(
    sigma2: f64,
    rho: &str,
    r: &str,
    levels: &[usize],
    out: &std::path::Path,
    svg_path: Option<&std::path::Path>,
) -> Result<String, Failure> {
    let rho_grid = parse_range::<f64>(rho)?;
    let r_grid = parse_range::<f64>(r)?;
    if levels.contains(&0) {
        return Err(Error::InvalidArgument("level counts must be at least 1".into()).into());
    }
    let rows = sweep_pot(sigma2, &rho_grid, &r_grid, levels)?;
    let file = File::create(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    write_sweep_csv(&rows, BufWriter::new(file)).map_err(|e| Failure::Io(e.to_string()))?;

    let ok = rows.iter().filter(|r| r.status == pot_core::SweepStatus::Ok).count();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "wrote {} rows ({} ok, {} skipped) to {}",
        rows.len(),
        ok,
        rows.len() - ok,
        out.display()
    );
    if let Some(path) = svg_path {
        let chart = svg::pot_chart(&rows, &rho_grid, &r_grid, levels);
        std::fs::write(path, chart).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        let _ = writeln!(text, "wrote chart to {}", path.display());
    }
    Ok(text)
}

fn simulate(config: &SimulationConfig<f64>, as_json: bool) -> Result<String, Failure> {
    let analytic = analytic_expectations(&config.model, config.k)?;
    let (report, pot_hat) = simulate_with_pot(config)?;
    let rows: [(&str, f64, Estimate<f64>); 6] = [
        ("J_R", analytic.j_r, report.j_r_hat),
        ("J_S", analytic.j_s, report.j_s_hat),
        ("D_S", analytic.d_est, report.d_est_hat),
        ("cross1", analytic.cross1, report.cross1_hat),
        ("cross2", analytic.cross2, report.cross2_hat),
        ("PoT", analytic.pot, pot_hat),
    ];
    if as_json {
        let table: Vec<_> = rows
            .iter()
            .map(|(name, a, e)| {
                json!({
                    "quantity": name,
                    "analytic": a,
                    "empirical": e.mean,
                    "std_error": e.std_error,
                    "z": e.z_score(*a),
                })
            })
            .collect();
        return Ok(to_json(&json!({
            "model": model_json(&config.model),
            "k": config.k,
            "samples": config.n,
            "seed": config.seed,
            "rows": table,
        })));
    }
    let mut out = String::new();
    let m = &config.model;
    let _ = writeln!(
        out,
        "sigma2={} rho={} r={} k={} samples={} seed={}",
        m.sigma2(),
        m.rho(),
        m.r(),
        config.k,
        config.n,
        config.seed
    );
    let _ = writeln!(
        out,
        "{:<10}{:>16}{:>16}{:>14}{:>10}",
        "quantity", "analytic", "empirical", "std_error", "z"
    );
    for (name, a, e) in rows {
        let _ = writeln!(
            out,
            "{:<10}{:>16}{:>16}{:>14}{:>10}",
            name,
            sig(a, 9),
            sig(e.mean, 9),
            sig(e.std_error, 4),
            format!("{:.2}", e.z_score(a)),
        );
    }
    Ok(out)
}

fn bestresponse(
    m: &Model,
    k: usize,
    alpha_min: f64,
    alpha_max: f64,
    alpha_step: f64,
    as_json: bool,
) -> Result<String, Failure> {
    let grid = inclusive_range(alpha_min, alpha_max, alpha_step)?;
    let scan = best_response_scan(m, k, &grid)?;
    if as_json {
        return Ok(to_json(&json!({ "model": model_json(m), "k": k, "scan": scan })));
    }
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>10}{:>16}{:>16}{:>16}",
        "alpha", "J_S", "D_S+D_Q", "E[theta*e_q]"
    );
    for row in &scan.rows {
        let _ = writeln!(
            out,
            "{:>10}{:>16}{:>16}{:>16}",
            sig(row.alpha, 6),
            sig(row.j_s, 10),
            sig(row.j_s_decomposed, 10),
            sig(row.bias_cross, 8)
        );
    }
    let within = |a: f64| if (a - scan.equilibrium_alpha).abs() <= alpha_step { "yes" } else { "no" };
    let _ = writeln!(out);
    line(&mut out, "equilibrium", sig(scan.equilibrium_alpha, 12));
    let _ = writeln!(
        out,
        "{:<16}{}  (within one step: {})",
        "argmin J_S",
        sig(scan.argmin, 12),
        within(scan.argmin)
    );
    let _ = writeln!(
        out,
        "{:<16}{}  (within one step: {})",
        "argmin D_S+D_Q",
        sig(scan.argmin_decomposed, 12),
        within(scan.argmin_decomposed)
    );
    Ok(out)
}
