mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

const AFTER_HELP: &str = "\
Rates share the unit of --gamma (default 1, so rates are in units of Γ).

Settings come from built-in defaults, then the --config TOML file
(sections [system], [sweep], [search], [evolve], [oracle], [output]),
then command-line flags. --dump-config prints the effective configuration.

Exit status:
  0  success
  1  usage error (bad flags, invalid parameters, unreadable or unwritable files)
  2  numerical failure (degenerate steady state, threshold bracket failure,
     cutoff non-convergence, unstable time step)";

#[derive(Debug, Parser)]
#[command(name = "cavity-entangle", version, about = "Steady-state entanglement of two atoms in a pumped cavity with a nonlinear mirror", after_help = AFTER_HELP)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long, global = true)]
    dump_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steady-state populations and concurrence at one parameter point.
    #[command(allow_negative_numbers = true)]
    Steady {
        #[command(flatten)]
        system: SystemArgs,
        /// Emit JSON instead of key = value lines.
        #[arg(long)]
        json: bool,
    },
    /// Concurrence over a (pump, k) grid, written as CSV or JSON.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        grid: SweepArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Smallest eta with nonzero maximum concurrence.
    #[command(allow_negative_numbers = true)]
    Threshold {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Time evolution of the rate equations.
    #[command(allow_negative_numbers = true)]
    Evolve {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        evolve: EvolveArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Rate model against the full master-equation oracle.
    #[command(allow_negative_numbers = true)]
    Compare {
        #[command(flatten)]
        system: SystemArgs,
        #[command(flatten)]
        oracle: OracleArgs,
        /// Emit JSON instead of a text report.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// Spontaneous emission rate.
    #[arg(long)]
    gamma: Option<f64>,
    /// Photon pumping rate.
    #[arg(long)]
    pump: Option<f64>,
    /// Mirror transmission rate with one photon.
    #[arg(long)]
    k: Option<f64>,
    /// Ratio of the two-photon to the one-photon mirror rate.
    #[arg(long)]
    eta: Option<f64>,
    /// Drop the leakage correction into the three-excitation manifold.
    #[arg(long)]
    uncorrected: bool,
    /// Steady-state solver: null-space, closed-form or evolution.
    #[arg(long)]
    solver: Option<String>,
    /// Concurrence method: closed-form or general.
    #[arg(long)]
    method: Option<String>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long)]
    pump_min: Option<f64>,
    #[arg(long)]
    pump_max: Option<f64>,
    #[arg(long)]
    pump_count: Option<usize>,
    #[arg(long)]
    k_min: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long)]
    k_count: Option<usize>,
    /// Grid spacing: log or linear.
    #[arg(long)]
    spacing: Option<String>,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Bisection tolerance on eta.
    #[arg(long)]
    tol: Option<f64>,
    /// Search box as pump_min,pump_max,k_min,k_max.
    #[arg(long, value_delimiter = ',', value_name = "PMIN,PMAX,KMIN,KMAX")]
    bounds: Option<Vec<f64>>,
    /// Points per axis of the coarse search grid.
    #[arg(long)]
    coarse: Option<usize>,
}

#[derive(Debug, Args)]
struct EvolveArgs {
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    /// Print every n-th step (the final step is always printed).
    #[arg(long)]
    every: Option<usize>,
    /// Initial populations g,s1,s2,o2[,dark1,dark2].
    #[arg(long, value_delimiter = ',', value_name = "P,...")]
    initial: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    /// Atom-cavity coupling.
    #[arg(long)]
    g: Option<f64>,
    /// Largest photon number kept.
    #[arg(long)]
    fock_cutoff: Option<usize>,
    /// Mirror loss model: per-state or linear.
    #[arg(long)]
    mirror: Option<String>,
    /// Largest allowed reduced-state change between cutoffs N and N+1.
    #[arg(long)]
    convergence_tol: Option<f64>,
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl SystemArgs {
    fn apply(self, c: &mut RunConfig) {
        let s = &mut c.system;
        set(&mut s.gamma, self.gamma);
        set(&mut s.pump, self.pump);
        set(&mut s.k, self.k);
        set(&mut s.eta, self.eta);
        if self.uncorrected {
            s.corrected = false;
        }
        set(&mut s.solver, self.solver);
        set(&mut s.method, self.method);
    }
}

impl SweepArgs {
    fn apply(self, c: &mut RunConfig) -> anyhow::Result<()> {
        let s = &mut c.sweep;
        set(&mut s.pump_min, self.pump_min);
        set(&mut s.pump_max, self.pump_max);
        set(&mut s.pump_count, self.pump_count);
        set(&mut s.k_min, self.k_min);
        set(&mut s.k_max, self.k_max);
        set(&mut s.k_count, self.k_count);
        if let Some(sp) = self.spacing {
            s.spacing = match sp.as_str() {
                "log" => cavity_entangle::analysis::Spacing::Log,
                "linear" => cavity_entangle::analysis::Spacing::Linear,
                other => anyhow::bail!("unknown spacing `{other}` (expected log or linear)"),
            };
        }
        Ok(())
    }
}

impl SearchArgs {
    fn apply(self, c: &mut RunConfig) -> anyhow::Result<()> {
        let s = &mut c.search;
        set(&mut s.tol, self.tol);
        set(&mut s.coarse, self.coarse);
        if let Some(b) = self.bounds {
            let [pmin, pmax, kmin, kmax] = b[..] else {
                anyhow::bail!("--bounds needs 4 comma-separated values, got {}", b.len());
            };
            (s.pump_min, s.pump_max, s.k_min, s.k_max) = (pmin, pmax, kmin, kmax);
        }
        Ok(())
    }
}

impl EvolveArgs {
    fn apply(self, c: &mut RunConfig) {
        let e = &mut c.evolve;
        set(&mut e.t_final, self.t_final);
        set(&mut e.dt, self.dt);
        set(&mut e.every, self.every);
        set(&mut e.initial, self.initial);
    }
}

impl OracleArgs {
    fn apply(self, c: &mut RunConfig) {
        let o = &mut c.oracle;
        set(&mut o.g, self.g);
        set(&mut o.fock_cutoff, self.fock_cutoff);
        set(&mut o.mirror, self.mirror);
        set(&mut o.convergence_tol, self.convergence_tol);
    }
}

impl OutArgs {
    fn apply(self, c: &mut RunConfig) {
        if self.out.is_some() {
            c.output.path = self.out;
        }
        if self.format.is_some() {
            c.output.format = self.format;
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Steady,
    Sweep,
    Threshold,
    Evolve,
    Compare,
}

fn resolve(cli: Cli) -> anyhow::Result<(Task, RunConfig)> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    let task = match cli.command {
        Command::Steady { system, json } => {
            system.apply(&mut cfg);
            cfg.output.json |= json;
            Task::Steady
        }
        Command::Sweep { system, grid, out } => {
            system.apply(&mut cfg);
            grid.apply(&mut cfg)?;
            out.apply(&mut cfg);
            Task::Sweep
        }
        Command::Threshold { system, search } => {
            system.apply(&mut cfg);
            search.apply(&mut cfg)?;
            Task::Threshold
        }
        Command::Evolve { system, evolve, out } => {
            system.apply(&mut cfg);
            evolve.apply(&mut cfg);
            out.apply(&mut cfg);
            Task::Evolve
        }
        Command::Compare { system, oracle, json } => {
            system.apply(&mut cfg);
            oracle.apply(&mut cfg);
            cfg.output.json |= json;
            Task::Compare
        }
    };
    Ok((task, cfg))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<cavity_entangle::Error>() {
        Some(e) if e.is_numerical() => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let dump = cli.dump_config;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = resolve(cli).and_then(|(task, cfg)| {
        if dump {
            return Ok(write!(out, "{}", cfg.to_toml()?)?);
        }
        match task {
            Task::Steady => commands::steady(&cfg, &mut out),
            Task::Sweep => commands::sweep(&cfg, &mut out),
            Task::Threshold => commands::threshold(&cfg, &mut out),
            Task::Evolve => commands::evolve(&cfg, &mut out),
            Task::Compare => commands::compare(&cfg, &mut out),
        }
    });
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
