mod config;
mod experiments;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use vnlw_core::verify::exponents::critical_exponents;
use vnlw_core::verify::report::write_csv;

const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "vnlw", version, about = "Stochastic viscous nonlinear wave simulator and verification experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured simulation into its output directory.
    Simulate { config: PathBuf },
    /// Run a verification experiment; options are passed as `--key value`.
    Verify {
        experiment: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        options: Vec<String>,
    },
    /// Print the exponent table for `p`, `δ` and `s`.
    Exponents {
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Print JSON only.
        #[arg(long)]
        json: bool,
    },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn simulate(path: &PathBuf) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return usage(format!("{}: {e}", path.display())),
    };
    let cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => return usage(format!("{}: {e}", path.display())),
    };
    let raw: serde_json::Value = serde_json::from_str(&text).expect("parsed above");
    match simulate::run(&cfg, raw) {
        Ok(status) => {
            println!("{} -> {:?}", cfg.output.directory, status);
            ExitCode::from(simulate::exit_code(status))
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn verify(name: &str, options: &[String]) -> ExitCode {
    let o = match experiments::Overrides::parse(options) {
        Ok(o) => o,
        Err(e) => return usage(e),
    };
    let dir = match o.output(name) {
        Ok(d) => PathBuf::from(d),
        Err(e) => return usage(e),
    };
    let out = match experiments::run(name, &o) {
        Ok(out) => out,
        Err(e) => return usage(e),
    };
    let written = std::fs::create_dir_all(&dir)
        .map_err(vnlw_core::Error::from)
        .and_then(|_| out.report.to_json())
        .and_then(|j| Ok(std::fs::write(dir.join("report.json"), j + "\n")?))
        .and_then(|_| write_csv(&dir.join(format!("{name}.csv")), &out.header, &out.rows));
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return ExitCode::FAILURE;
    }
    let verdict = if out.report.pass { "PASS" } else { "FAIL" };
    println!("{name}: {verdict}");
    for (k, v) in &out.report.estimates {
        match out.report.intervals.get(k) {
            Some((lo, hi)) => println!("  {k} = {v} (accept [{lo}, {hi}])"),
            None => println!("  {k} = {v}"),
        }
    }
    println!("  report: {}", dir.join("report.json").display());
    if out.report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn exponents(p: f64, delta: f64, s: f64, json: bool) -> ExitCode {
    let e = match critical_exponents(p, delta, s) {
        Ok(e) => e,
        Err(e) => return usage(e),
    };
    let text = serde_json::to_string_pretty(&e).expect("plain data");
    if json {
        println!("{text}");
        return ExitCode::SUCCESS;
    }
    println!("p = {p}, δ = {delta}, s = {s}");
    println!("  s_crit        {}", e.s_crit);
    println!("  (q, r, σ)     ({}, {}, {})", e.q, e.r, e.sigma);
    println!("  β_p           {}", e.beta_p);
    println!("  s_p           {}", e.s_p);
    println!("  γ             {}{}", e.gamma, if e.gamma_in_range { "" } else { " (s outside (−1/p, 1])" });
    println!("  α bound       {}", e.alpha_bound);
    if let Some(((q, r), (qt, rt))) = e.subcritical {
        println!("  pairs         (q, r) = ({q}, {r}), dual (q̃, r̃) = ({qt}, {rt})");
    }
    println!("{text}");
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Ok(v) = std::env::var("VNLW_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => return usage(format!("VNLW_THREADS must be a positive integer, got {v:?}")),
        }
    }
    match cli.command {
        Command::Simulate { config } => simulate(&config),
        Command::Verify { experiment, options } => verify(&experiment, &options),
        Command::Exponents { p, delta, s, json } => exponents(p, delta, s, json),
    }
}
