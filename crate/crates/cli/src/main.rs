//! `popchaos`: certify, simulate and scan revision-protocol dynamics from a JSON config.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use popchaos_core::chaos::find_periodic_orbits;
use popchaos_core::config::{ConfigError, RunConfig};
use popchaos_core::dynamics::{
    build_update_map, iterate, range_check, DynamicsError, RangeReport, UpdateMap,
    DEFAULT_RANGE_GRID,
};
use popchaos_core::scan::{
    bifurcation_scan, certify_report, cobweb_export, periods_csv, threshold_table,
    threshold_table_csv, BifurcationScanConfig,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "popchaos",
    version,
    about = "Chaos in revision-protocol dynamics of anti-coordination games"
)]
struct Cli {
    /// JSON run configuration (`-` reads stdin).
    #[arg(long, global = true, value_name = "JSON")]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Grid size for range checks; also the graph sampling of `cobweb`.
    #[arg(long, global = true, value_name = "N")]
    grid: Option<usize>,
    /// Strictness margin for the chaos inequalities.
    #[arg(long, global = true, value_name = "EPS", default_value_t = 1e-9)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the chaos conditions and report stability at the equilibrium (always JSON).
    Certify {
        /// Probe points z_l z_r; defaults to the config's `probes` or the family's critical points.
        #[arg(long, num_args = 2, value_names = ["Z_L", "Z_R"])]
        probes: Option<Vec<f64>>,
    },
    /// Iterate one orbit.
    Simulate {
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Sweep the step size and record long-run states.
    Bifurcate(ScanArgs),
    /// Staircase of one orbit plus the graph of the map.
    Cobweb {
        #[arg(long)]
        x0: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Sufficient step-size thresholds for a list of equilibria.
    Thresholds {
        /// Comma-separated equilibria, e.g. `0.25,0.4,0.6`.
        #[arg(long, value_delimiter = ',')]
        p: Option<Vec<f64>>,
    },
    /// Periodic orbits of minimal period up to `n_max`.
    Periods {
        #[arg(long)]
        n_max: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct ScanArgs {
    #[arg(long)]
    delta_min: Option<f64>,
    #[arg(long)]
    delta_max: Option<f64>,
    #[arg(long)]
    delta_steps: Option<usize>,
    #[arg(long)]
    transient: Option<usize>,
    #[arg(long)]
    keep: Option<usize>,
    /// Comma-separated initial states; defaults to the outer critical points.
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<f64>>,
    /// Comma-separated plotting order of the seeds, e.g. `1,0`.
    #[arg(long, value_delimiter = ',')]
    seed_order: Option<Vec<usize>>,
}

#[derive(Debug)]
enum Failure {
    NoCertificate,
    InvalidConfig(String),
    RangeCheck(String),
    Io(io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::NoCertificate => 3,
            Failure::InvalidConfig(_) => 4,
            Failure::RangeCheck(_) => 5,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Dynamics(
                DynamicsError::RangeViolation { .. } | DynamicsError::Excursion { .. },
            ) => Failure::RangeCheck(e.to_string()),
            _ => Failure::InvalidConfig(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::NoCertificate => eprintln!("no certificate"),
                Failure::InvalidConfig(m) => eprintln!("invalid configuration: {m}"),
                Failure::RangeCheck(m) => eprintln!("range check failed: {m}"),
                Failure::Io(e) => eprintln!("i/o error: {e}"),
            }
            ExitCode::from(f.code())
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let text = match cli.config.as_deref() {
        None => return Ok(RunConfig::default()),
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s)?;
            s
        }
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Failure::InvalidConfig(format!("cannot read {}: {e}", p.display())))?,
    };
    Ok(RunConfig::from_json(&text)?)
}

fn emit(cli: &Cli, text: &str) -> Result<(), Failure> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Range report at the requested grid, or the one computed when the map was built.
fn checked_range(cli: &Cli, map: &UpdateMap) -> RangeReport {
    match cli.grid {
        Some(n) if n != DEFAULT_RANGE_GRID => range_check(map, n),
        _ => map.range().clone(),
    }
}

fn require_interval_map(cli: &Cli, map: &UpdateMap) -> Result<(), Failure> {
    let r = checked_range(cli, map);
    if r.passed {
        Ok(())
    } else {
        Err(Failure::RangeCheck(format!(
            "map leaves [0, 1] by {:e} (min {} at {}, max {} at {})",
            r.excursion, r.min_value, r.min_at, r.max_value, r.max_at
        )))
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_config(cli)?;
    log::debug!("running {:?}", cli.command);
    match &cli.command {
        Command::Certify { probes } => certify(cli, &cfg, probes.as_deref()),
        Command::Simulate { x0, steps } => simulate(cli, &cfg, *x0, *steps),
        Command::Bifurcate(args) => bifurcate(cli, &cfg, args),
        Command::Cobweb { x0, steps } => cobweb(cli, &cfg, *x0, *steps),
        Command::Thresholds { p } => thresholds(cli, &cfg, p.as_deref()),
        Command::Periods { n_max } => periods(cli, &cfg, *n_max),
    }
}

fn certify(cli: &Cli, cfg: &RunConfig, probes: Option<&[f64]>) -> Result<(), Failure> {
    let map = cfg.build_map()?;
    let probes = probes.map(|v| (v[0], v[1])).or_else(|| cfg.probes());
    if let Some((l, r)) = probes {
        if !(0.0 <= l && l < r && r <= 1.0) {
            return Err(Failure::InvalidConfig(format!(
                "probes must satisfy 0 <= z_l < z_r <= 1, got {l}, {r}"
            )));
        }
    }
    let mut report = certify_report(&map, probes, cli.tolerance);
    report.range = checked_range(cli, &map);
    emit(cli, &to_json(&report))?;
    if !report.range.passed {
        require_interval_map(cli, &map)?;
    }
    match report.certificate {
        Some(_) => Ok(()),
        None => Err(Failure::NoCertificate),
    }
}

fn simulate(
    cli: &Cli,
    cfg: &RunConfig,
    x0: Option<f64>,
    steps: Option<usize>,
) -> Result<(), Failure> {
    let map = cfg.build_map()?;
    let x0 = x0.or(cfg.x0).ok_or(ConfigError::Missing("x0"))?;
    if !(0.0..=1.0).contains(&x0) {
        return Err(Failure::InvalidConfig(format!("x0 = {x0} outside [0, 1]")));
    }
    let steps = steps.or(cfg.steps).unwrap_or(100);
    require_interval_map(cli, &map)?;
    let orbit = iterate(&map, x0, steps).map_err(|e| Failure::RangeCheck(e.to_string()))?;
    let text = match cli.format {
        Format::Csv => orbit.to_csv(),
        Format::Json => to_json(&orbit),
    };
    emit(cli, &text)
}

fn bifurcate(cli: &Cli, cfg: &RunConfig, args: &ScanArgs) -> Result<(), Failure> {
    let protocol = cfg.protocol()?;
    let base = cfg.scan.clone().unwrap_or_default();
    let scan_cfg = BifurcationScanConfig {
        delta_min: args.delta_min.unwrap_or(base.delta_min),
        delta_max: args.delta_max.unwrap_or(base.delta_max),
        delta_steps: args.delta_steps.unwrap_or(base.delta_steps),
        transient: args.transient.unwrap_or(base.transient),
        keep: args.keep.unwrap_or(base.keep),
        seeds: args.seeds.clone().or(base.seeds),
        seed_order: args.seed_order.clone().or(base.seed_order),
    };
    let grid = cli.grid;
    log::info!(
        "scanning {} step sizes in [{}, {}]",
        scan_cfg.delta_steps,
        scan_cfg.delta_min,
        scan_cfg.delta_max
    );
    let result = bifurcation_scan(&scan_cfg, |delta| {
        let map = build_update_map(&protocol, delta)?;
        match grid {
            Some(n) if n != DEFAULT_RANGE_GRID => {
                let r = range_check(&map, n);
                if r.passed {
                    Ok(map)
                } else if r.min_value < 0.0 {
                    Err(DynamicsError::RangeViolation {
                        at: r.min_at,
                        value: r.min_value,
                    })
                } else {
                    Err(DynamicsError::RangeViolation {
                        at: r.max_at,
                        value: r.max_value,
                    })
                }
            }
            _ => Ok(map),
        }
    })
    .map_err(|e| Failure::InvalidConfig(e.to_string()))?;
    let text = match cli.format {
        Format::Csv => result.to_csv(),
        Format::Json => to_json(&json!({ "config": scan_cfg, "result": result })),
    };
    emit(cli, &text)?;
    if result.rows.is_empty() && !result.skipped.is_empty() {
        return Err(Failure::RangeCheck("every step size was skipped".into()));
    }
    Ok(())
}

fn cobweb(
    cli: &Cli,
    cfg: &RunConfig,
    x0: Option<f64>,
    steps: Option<usize>,
) -> Result<(), Failure> {
    let map = cfg.build_map()?;
    let x0 = x0.or(cfg.x0).ok_or(ConfigError::Missing("x0"))?;
    if !(0.0..=1.0).contains(&x0) {
        return Err(Failure::InvalidConfig(format!("x0 = {x0} outside [0, 1]")));
    }
    require_interval_map(cli, &map)?;
    let steps = steps.or(cfg.steps).unwrap_or(50);
    let c = cobweb_export(&map, x0, steps, cli.grid.unwrap_or(1001))
        .map_err(|e| Failure::RangeCheck(e.to_string()))?;
    let text = match cli.format {
        Format::Csv => c.to_csv(),
        Format::Json => to_json(&c),
    };
    emit(cli, &text)
}

fn thresholds(cli: &Cli, cfg: &RunConfig, p: Option<&[f64]>) -> Result<(), Failure> {
    let ps = p
        .map(<[f64]>::to_vec)
        .or_else(|| cfg.p_grid.clone())
        .ok_or(ConfigError::Missing("p_grid"))?;
    let rows = threshold_table(&ps).map_err(|e| Failure::InvalidConfig(e.to_string()))?;
    let text = match cli.format {
        Format::Csv => threshold_table_csv(&rows),
        Format::Json => to_json(&rows),
    };
    emit(cli, &text)
}

fn periods(cli: &Cli, cfg: &RunConfig, n_max: Option<usize>) -> Result<(), Failure> {
    let map = cfg.build_map()?;
    require_interval_map(cli, &map)?;
    let n_max = n_max.or(cfg.n_max).unwrap_or(7);
    if n_max == 0 {
        return Err(Failure::InvalidConfig("n_max must be at least 1".into()));
    }
    let search = find_periodic_orbits(&map, n_max);
    let text = match cli.format {
        Format::Csv => periods_csv(&search),
        Format::Json => to_json(&search),
    };
    emit(cli, &text)
}
