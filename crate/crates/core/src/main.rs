use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use relay_aloha::analytic::{check_consistency, consistency_grid, optimal_load, DEFAULT_TAIL_TOL};
use relay_aloha::config::ModelConfig;
use relay_aloha::sim::{compare_modes, write_trace_csv};
use relay_aloha::sweep::{
    emit_csv, evaluate, linspace, reference_trends, report_trends, run_sweep, write_csv, Engines, SweepParam,
    SweepSpec, TrendReport,
};
use relay_aloha::{Error, Result};

/// Throughput of relay-aided slotted ALOHA with an optical first hop and a
/// Nakagami-faded RF second hop.
#[derive(Debug, Parser)]
#[command(name = "relay-aloha", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one config key, e.g. `--set traffic.num_relays=4`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    set: Vec<String>,
    /// Output file (CSV for analyze and sweep).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Simulated slots per point.
    #[arg(long, global = true)]
    slots: Option<u64>,
    /// Comma-separated subset of closed_form, series, simulation (or all).
    #[arg(long, global = true)]
    engines: Option<String>,
    /// Poisson tail mass the series may leave out.
    #[arg(long, global = true)]
    tail_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate one operating point with every selected engine.
    Analyze {
        /// Upper end of the load range searched for the optimum.
        #[arg(long, default_value_t = 10.0)]
        g_max: f64,
        /// Write a per-slot CSV trace of the simulation.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Sweep one parameter, optionally once per value of a second one.
    Sweep {
        /// Swept axis (load_g, num_relays, height_L, m1, eps_vlc, eps_rf, delta,
        /// gamma_th, gamma_th_vlc_db, gamma_th_rf_db, mu_rf_db).
        #[arg(long)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        values: Option<String>,
        /// `lo:hi:steps`, evenly spaced.
        #[arg(long)]
        range: Option<String>,
        /// Second axis as `param=v1,v2,...`.
        #[arg(long)]
        group: Option<String>,
        /// Print trend verdicts for the rows.
        #[arg(long)]
        report: bool,
    },
    /// Check the series and closed-form engines against each other on a
    /// fixed grid.
    Validate,
    /// Compare the independent-erasure and geometric simulation modes.
    CompareModes {
        /// User positions drawn to calibrate the geometric threshold.
        #[arg(long, default_value_t = 200_000)]
        calibration_draws: u64,
    },
    /// Run the reference load sweeps and print trend verdicts.
    Trends,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // bad arguments are configuration errors, not clap's usual 2
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_config(c: &Common) -> Result<ModelConfig> {
    let mut cfg = ModelConfig::load(c.config.as_deref(), &c.set)?;
    if let Some(seed) = c.seed {
        cfg.sim.seed = seed;
    }
    if let Some(slots) = c.slots {
        cfg.sim.slots = slots;
    }
    if let Some(tol) = c.tail_tol {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Config(format!("tail tolerance must lie in (0, 1), got {tol}")));
        }
        cfg.sim.tail_tol = tol;
    }
    Ok(cfg)
}

fn engines(c: &Common, default: Engines) -> Result<Engines> {
    c.engines.as_deref().map_or(Ok(default), str::parse)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common)?;
    let out = cli.common.out.as_deref();
    match cli.command {
        Command::Analyze { g_max, trace } => analyze(&cfg, engines(&cli.common, Engines::ALL)?, g_max, trace, out),
        Command::Sweep {
            param,
            values,
            range,
            group,
            report,
        } => {
            let values = match (values, range) {
                (Some(v), _) => parse_list(&v)?,
                (None, Some(r)) => parse_range(&r)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            let group = group.as_deref().map(parse_group).transpose()?;
            let spec = SweepSpec {
                param,
                values,
                group,
                base: cfg,
                engines: engines(&cli.common, Engines::ANALYTIC)?,
            };
            sweep(&spec, report, out)
        }
        Command::Validate => validate(cfg.sim.tail_tol),
        Command::CompareModes { calibration_draws } => {
            let point = cfg.resolve()?;
            let cc = cfg.compare_config(&point, cfg.sim.seed, calibration_draws)?;
            let cmp = compare_modes(&cc)?;
            println!("{cmp}");
            Ok(())
        }
        Command::Trends => {
            let report = reference_trends(&cfg)?;
            print_trends(&report)
        }
    }
}

fn analyze(cfg: &ModelConfig, engines: Engines, g_max: f64, trace: Option<PathBuf>, out: Option<&Path>) -> Result<()> {
    let row = evaluate(cfg, engines)?;
    let point = cfg.resolve()?;
    let opt = optimal_load(&point.system, 0.0, g_max)?;
    let mut stdout = std::io::stdout().lock();
    let show = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.9}"));
    let lines = [
        format!("load G          {}", cfg.traffic.load_g),
        format!("relays K        {}", cfg.traffic.num_relays),
        format!("forward delta   {}", cfg.traffic.forward_prob),
        format!("eps_vlc         {:.9}", row.eps_vlc),
        format!("eps_rf          {:.9}", row.eps_rf),
        format!("S closed form   {}", show(row.s_closed)),
        format!("S series        {}", show(row.s_series)),
        format!(
            "S simulation    {}",
            row.sim
                .map_or("-".to_string(), |s| format!("{:.9} ± {:.9} (seed {})", s.mean, s.stderr, s.seed))
        ),
        format!("method          {}", row.method.map_or("-", |m| m.as_str())),
        format!(
            "G_opt           {:.6} (S_max {:.9}{})",
            opt.g_opt,
            opt.s_max,
            if opt.unimodal { "" } else { ", dense scan" }
        ),
    ];
    for l in lines {
        writeln!(stdout, "{l}").map_err(io_err(Path::new("-")))?;
    }
    if let Some(path) = trace {
        write_trace_csv(&cfg.sim_config(&point, cfg.sim.seed)?, &path)?;
    }
    if let Some(path) = out {
        emit_csv(std::slice::from_ref(&row), path)?;
    }
    Ok(())
}

fn sweep(spec: &SweepSpec, report: bool, out: Option<&Path>) -> Result<()> {
    let rows = run_sweep(spec)?;
    match out {
        Some(path) => emit_csv(&rows, path)?,
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("warning: {failed} of {} points failed; see the error column", rows.len());
    }
    if report {
        let trends = report_trends(&rows)?;
        // keep stdout clean when it carries the CSV
        if out.is_some() {
            println!("{trends}");
        } else {
            eprintln!("{trends}");
        }
    }
    Ok(())
}

fn validate(tail_tol: f64) -> Result<()> {
    const TOL: f64 = 1e-9;
    let r = check_consistency(&consistency_grid(), tail_tol.min(DEFAULT_TAIL_TOL))?;
    let pass = r.max_abs_diff <= TOL;
    println!(
        "{} series vs closed form: {} points, {} fallbacks, max |diff| = {:.3e} (tol {TOL:e})",
        if pass { "PASS" } else { "FAIL" },
        r.points,
        r.fallbacks,
        r.max_abs_diff
    );
    if let (false, Some(w)) = (pass, r.worst) {
        println!(
            "worst point: G={} K={} delta={} eps_vlc={} eps_rf={}",
            w.load_g, w.num_relays, w.forward_prob, w.eps_vlc, w.eps_rf
        );
        return Err(Error::CheckFailed("series and closed form disagree".into()));
    }
    Ok(())
}

fn print_trends(report: &TrendReport) -> Result<()> {
    println!("{report}");
    if report.all_pass() {
        Ok(())
    } else {
        Err(Error::CheckFailed("trend verdicts failed".into()))
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("'{s}' is not a number")))
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|p| !p.trim().is_empty()).map(parse_f64).collect()
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, steps] = parts[..] else {
        return Err(Error::Config(format!("range '{s}' is not lo:hi:steps")));
    };
    let steps: usize = steps
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("'{steps}' is not a step count")))?;
    Ok(linspace(parse_f64(lo)?, parse_f64(hi)?, steps))
}

fn parse_group(s: &str) -> Result<(SweepParam, Vec<f64>)> {
    let (name, values) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("group '{s}' is not param=v1,v2,...")))?;
    Ok((name.trim().parse()?, parse_list(values)?))
}
