mod config;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use config::{parse_angle, Command, Format, LevelSource, OscMode, RunConfig};

/// Complexified classical orbits, semiclassical actions and shooting spectra
/// for -g(iz)^(2n+1), optionally plus z^2/2.
///
/// Exit status: 0 on success, 2 on usage errors, 3 when the numerics report
/// a failure (missed level, boundary-indeterminate ray, no convergence).
/// CRYPTOSPEC_THREADS caps the number of worker threads.
#[derive(Parser, Debug)]
#[command(name = "cryptospec", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    /// Power index: the potential is -g (iz)^(2n+1) [default: 1]
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Coupling g [default: 1]
    #[arg(long, global = true)]
    g: Option<f64>,
    /// Add the harmonic term z^2/2
    #[arg(long, global = true)]
    oscillator: bool,
    /// Ray angle in radians or as a multiple of pi, e.g. -3/14pi [default: 0]
    #[arg(long, global = true, allow_hyphen_values = true, value_parser = angle_arg)]
    alpha: Option<f64>,
    /// Output format [default: json]
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Integrator tolerance [default: 1e-12 for orbits, 1e-10 for shooting]
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// JSON file with any of the configuration keys; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
struct ShootArgs {
    /// Half-line truncation [default: from the WKB decay]
    #[arg(long)]
    s_max: Option<f64>,
    /// Largest energy grid step of the root scan [default: 0.1]
    #[arg(long)]
    e_step: Option<f64>,
    /// Root refinement tolerance [default: 1e-10]
    #[arg(long)]
    refine_tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Stem orbit of a family, an orbit from an explicit start, or the reduced
    /// gauge-fixed dynamics
    Orbits {
        /// Energy of the stem orbit [default: 1]
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<f64>,
        /// Orbit family, e.g. pos-0 or neg-1 [default: pos-0, or neg-0 for E < 0]
        #[arg(long)]
        family: Option<String>,
        /// Initial point x y p q
        #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["X", "Y", "P", "Q"])]
        start: Option<Vec<f64>>,
        /// Reduced dynamics from x p (cubic potential, gauge y = 0)
        #[arg(long, num_args = 2, allow_hyphen_values = true, value_names = ["X", "P"], conflicts_with = "start")]
        reduced: Option<Vec<f64>>,
        /// Time horizon for explicit and reduced starts [default: 100]
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Actions, periods and Bohr-Sommerfeld levels of the orbit families
    Actions {
        /// |E| at which actions are evaluated [default: 1]
        #[arg(long, allow_hyphen_values = true)]
        energy: Option<f64>,
        /// Restrict to one family [default: all]
        #[arg(long)]
        family: Option<String>,
        /// Highest level index [default: 3]
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Eigenvalues along a ray
    Levels {
        /// Energy ceiling [default: 10]
        #[arg(long)]
        emax: Option<f64>,
        /// Shooting or Bohr-Sommerfeld [default: shooting]
        #[arg(long, value_enum)]
        method: Option<LevelSource>,
        /// Highest level index for the semiclassical method [default: 3]
        #[arg(long)]
        k_max: Option<usize>,
        #[command(flatten)]
        shoot: ShootArgs,
    },
    /// Sector classification of one ray, or of a grid of rays
    Sectors {
        /// Classify this many equally spaced rays instead of --alpha
        #[arg(long)]
        points: Option<usize>,
        /// Also classify from the shooting mismatch
        #[arg(long)]
        numeric: bool,
        #[command(flatten)]
        shoot: ShootArgs,
    },
    /// Levels of the mixed potential as the coupling decreases
    Flow {
        /// Largest coupling [default: 0.1]
        #[arg(long)]
        g_from: Option<f64>,
        /// Smallest coupling [default: 0.01]
        #[arg(long)]
        g_to: Option<f64>,
        /// Levels tracked from g_from [default: 4]
        #[arg(long)]
        n_levels: Option<usize>,
        #[command(flatten)]
        shoot: ShootArgs,
    },
    /// Coupling where two levels of the mixed potential coalesce
    Ep {
        /// Level indices at g_hi [default: 0 1]
        #[arg(long, num_args = 2, value_names = ["LOWER", "UPPER"])]
        pair: Option<Vec<usize>>,
        /// Upper end of the coupling bracket [default: 0.06]
        #[arg(long)]
        g_hi: Option<f64>,
        /// Lower end of the coupling bracket [default: 0.02]
        #[arg(long)]
        g_lo: Option<f64>,
        #[command(flatten)]
        shoot: ShootArgs,
    },
    /// Exact spectra and G-kernel states of the complexified oscillator
    Oscillator {
        /// Quantization [default: real]
        #[arg(long, value_enum)]
        mode: Option<OscMode>,
        /// Level index [default: 0]
        #[arg(long, allow_hyphen_values = true)]
        k: Option<i64>,
        /// Print the kernel state of this block instead
        #[arg(long, allow_hyphen_values = true)]
        kernel: Option<i64>,
        /// Last coefficient index of the kernel state [default: 20]
        #[arg(long)]
        j_max: Option<usize>,
    },
}

fn angle_arg(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn apply_shoot(cfg: &mut RunConfig, s: ShootArgs) {
    if s.s_max.is_some() {
        cfg.s_max = s.s_max;
    }
    set(&mut cfg.e_step, s.e_step);
    set(&mut cfg.refine_tol, s.refine_tol);
}

fn resolve(cli: Cli) -> anyhow::Result<RunConfig> {
    let c = cli.common;
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.n, c.n);
    set(&mut cfg.g, c.g);
    cfg.oscillator |= c.oscillator;
    set(&mut cfg.alpha, c.alpha);
    set(&mut cfg.format, c.format);
    if c.out.is_some() {
        cfg.out = c.out;
    }
    if c.tol.is_some() {
        cfg.tol = c.tol;
    }
    let command = match cli.cmd {
        Cmd::Orbits { energy, family, start, reduced, t_max } => {
            set(&mut cfg.energy, energy);
            if family.is_some() {
                cfg.family = family;
            }
            if let Some(s) = start {
                cfg.start = Some([s[0], s[1], s[2], s[3]]);
                cfg.reduced = None;
            }
            if let Some(r) = reduced {
                cfg.reduced = Some([r[0], r[1]]);
                cfg.start = None;
            }
            set(&mut cfg.t_max, t_max);
            Command::Orbits
        }
        Cmd::Actions { energy, family, k_max } => {
            set(&mut cfg.energy, energy);
            if family.is_some() {
                cfg.family = family;
            }
            set(&mut cfg.k_max, k_max);
            Command::Actions
        }
        Cmd::Levels { emax, method, k_max, shoot } => {
            set(&mut cfg.emax, emax);
            set(&mut cfg.method, method);
            set(&mut cfg.k_max, k_max);
            apply_shoot(&mut cfg, shoot);
            Command::Levels
        }
        Cmd::Sectors { points, numeric, shoot } => {
            if points.is_some() {
                cfg.points = points;
            }
            cfg.numeric |= numeric;
            apply_shoot(&mut cfg, shoot);
            Command::Sectors
        }
        Cmd::Flow { g_from, g_to, n_levels, shoot } => {
            set(&mut cfg.g_from, g_from);
            set(&mut cfg.g_to, g_to);
            set(&mut cfg.n_levels, n_levels);
            apply_shoot(&mut cfg, shoot);
            Command::Flow
        }
        Cmd::Ep { pair, g_hi, g_lo, shoot } => {
            if let Some(p) = pair {
                cfg.pair = [p[0], p[1]];
            }
            set(&mut cfg.g_hi, g_hi);
            set(&mut cfg.g_lo, g_lo);
            apply_shoot(&mut cfg, shoot);
            Command::Ep
        }
        Cmd::Oscillator { mode, k, kernel, j_max } => {
            set(&mut cfg.mode, mode);
            set(&mut cfg.k, k);
            if kernel.is_some() {
                cfg.kernel = kernel;
            }
            set(&mut cfg.j_max, j_max);
            Command::Oscillator
        }
    };
    if cfg.command.is_some_and(|c| c != command) {
        bail!("config file is for '{:?}' but '{:?}' was requested", cfg.command.unwrap(), command);
    }
    cfg.command = Some(command);
    Ok(cfg)
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("CRYPTOSPEC_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .with_context(|| format!("CRYPTOSPEC_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    Ok(())
}

fn emit(cfg: &RunConfig, text: &str) -> anyhow::Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let cfg = match resolve(cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let (text, code) = match run::execute(&cfg) {
        Ok(report) => {
            for d in &report.diagnostics {
                eprintln!("warning: {d}");
            }
            (run::render(&cfg, &report), if report.failure { 3 } else { 0 })
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = run::exit_code(&e);
            if code != 3 {
                return ExitCode::from(code);
            }
            (run::render_failure(&cfg, &e), code)
        }
    };
    if let Err(e) = emit(&cfg, &text) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::from(code)
}
