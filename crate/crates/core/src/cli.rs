//! Subcommand orchestration behind the `hhess` binary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::config::{key_help, parse_config, ConfigDocument, ConfigErrors, ConfigIssue, Location};
use crate::csv;
use crate::design::{aggregate, expand, synthesize, DesignTargets, XI_ADVISORY_LIMIT};
use crate::error::Error;
use crate::freq::{bode, crossover_report, DEFAULT_OMEGA_MAX, DEFAULT_OMEGA_MIN, DEFAULT_POINTS};
use crate::model::{characteristic, sharing_indices, DroopBank};
use crate::mpt::{is_stable, sweep, MptCircuit, PlaneSpec, SweepPlane};
use crate::report::{Derived, RunReport};
use crate::sim::{metrics, simulate, SeriesChannel, SimWarning};

pub const OUT_DIR_ENV: &str = "HHESS_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "hhess",
    version,
    about = "Droop-bank design, analysis and stability lab for hybrid electrolyzer/supercapacitor DC buses"
)]
pub struct Cli {
    /// INI config file; omitted sections use the built-in defaults.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory (overrides HHESS_OUT_DIR; default: current directory).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel evaluation.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Synthesize droop gains from response targets; writes design.ini.
    Design(DesignArgs),
    /// Branch frequency responses; writes bode.csv.
    Bode(BodeArgs),
    /// Closed-loop time-domain run; writes timeseries.csv.
    Sim(SimArgs),
    /// Stability criterion at one operating point; writes mpt.csv.
    Mpt(MptArgs),
    /// Stability over a (p_grid, c_dc2) plane; writes sweep.csv and boundary.csv.
    Sweep(SweepArgs),
    /// Collapse a multi-unit fleet to one bank; writes aggregate.ini.
    Aggregate(AggregateArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DesignArgs {
    /// Response time constant [s].
    #[arg(long)]
    pub tau: Option<f64>,
    /// Damping target.
    #[arg(long)]
    pub xi: Option<f64>,
    /// AEL/PEMEL steady-state sharing index.
    #[arg(long)]
    pub k1: Option<f64>,
    /// SC/PEMEL transient sharing index.
    #[arg(long)]
    pub k2: Option<f64>,
    /// AEL droop [V/W].
    #[arg(long, conflicts_with = "dv_max")]
    pub alpha: Option<f64>,
    /// Admissible bus deviation [V]; with --p-a-max sets alpha.
    #[arg(long, requires = "p_a_max")]
    pub dv_max: Option<f64>,
    /// AEL rated power [W].
    #[arg(long, requires = "dv_max")]
    pub p_a_max: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BodeArgs {
    /// Lowest angular frequency [rad/s].
    #[arg(long)]
    pub omega_min: Option<f64>,
    /// Highest angular frequency [rad/s].
    #[arg(long)]
    pub omega_max: Option<f64>,
    /// Log-spaced samples.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Settling band [% of the net step].
    #[arg(long, default_value_t = 2.0)]
    pub band: f64,
}

impl Default for SimArgs {
    fn default() -> Self {
        Self { band: 2.0 }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct MptArgs {
    /// Grid power [W]; sets i_drref.
    #[arg(long)]
    pub p_grid: Option<f64>,
    /// AEL capacitance [F].
    #[arg(long)]
    pub c_dc2: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SweepArgs {
    /// Grid-power samples.
    #[arg(long)]
    pub p_grid_n: Option<usize>,
    /// AEL capacitance samples.
    #[arg(long)]
    pub c_dc2_n: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct AggregateArgs {
    /// Equivalent AEL droop after expansion [V/W].
    #[arg(long)]
    pub alpha_new: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error:\n{0}")]
    Config(ConfigErrors),
    #[error("{0}")]
    Domain(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Domain(_) | CliError::Io { .. } => 1,
        }
    }
}

/// `--out`, then `HHESS_OUT_DIR`, then the working directory.
pub fn resolve_out_dir(flag: Option<&Path>, env: Option<OsString>) -> PathBuf {
    match (flag, env) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(e)) if !e.is_empty() => PathBuf::from(e),
        _ => PathBuf::from("."),
    }
}

pub fn command() -> clap::Command {
    Cli::command().after_long_help(key_help())
}

/// Parses `args` (including the program name), runs, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{}", report.summary());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ConfigDocument, CliError> {
    let text = match path {
        None => String::new(),
        Some(p) => std::fs::read_to_string(p).map_err(|e| {
            CliError::Config(ConfigErrors(vec![ConfigIssue {
                location: Location::Flag("config".into()),
                message: format!("cannot read {}: {e}", p.display()),
            }]))
        })?,
    };
    parse_config(&text).map_err(CliError::Config)
}

pub fn execute(cli: &Cli) -> Result<RunReport, CliError> {
    let doc = load_config(cli.config.as_deref())?;
    let out = resolve_out_dir(cli.out.as_deref(), std::env::var_os(OUT_DIR_ENV));
    std::fs::create_dir_all(&out).map_err(|source| CliError::Io {
        path: out.clone(),
        source,
    })?;
    match cli.threads {
        None => run_subcommand(&cli.command, &doc, &out),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("thread pool");
            pool.install(|| run_subcommand(&cli.command, &doc, &out))
        }
    }
}

fn write_file(out: &Path, name: &str, contents: &str, report: &mut RunReport) -> Result<(), CliError> {
    let path = out.join(name);
    std::fs::write(&path, contents).map_err(|source| CliError::Io { path, source })?;
    report.files.push(name.to_string());
    Ok(())
}

fn describe_bank(report: &mut RunReport, bank: &DroopBank, xi_location: Location) {
    let ch = characteristic(bank);
    report.derived = Some(Derived::new(&ch, &sharing_indices(bank)));
    if ch.xi > XI_ADVISORY_LIMIT {
        report.warn(
            xi_location,
            format!(
                "xi = {:.4} exceeds {XI_ADVISORY_LIMIT}; the cutoff relation is unverified there",
                ch.xi
            ),
        );
    }
}

/// First `[droop]` line, used for warnings derived from the whole bank.
fn droop_location(doc: &ConfigDocument) -> Location {
    ["alpha", "beta", "gamma", "zeta", "k"]
        .iter()
        .filter_map(|k| doc.lines.get(&format!("droop.{k}")).copied())
        .min()
        .map_or(Location::Default, Location::Line)
}

fn bank_ini(bank: &DroopBank, note: &str) -> String {
    format!(
        "# {note}\n[droop]\nalpha = {}\nbeta = {}\ngamma = {}\nzeta = {}\nk = {}\nv_ref = {}\n",
        bank.alpha, bank.beta, bank.gamma, bank.zeta, bank.k, bank.v_ref
    )
}

pub fn run_subcommand(command: &Command, doc: &ConfigDocument, out: &Path) -> Result<RunReport, CliError> {
    match command {
        Command::Design(a) => run_design(a, doc, out),
        Command::Bode(a) => run_bode(a, doc, out),
        Command::Sim(a) => run_sim(a, doc, out),
        Command::Mpt(a) => run_mpt(a, doc, out),
        Command::Sweep(a) => run_sweep(a, doc, out),
        Command::Aggregate(a) => run_aggregate(a, doc, out),
    }
}

fn pick(flag: Option<f64>, name: &str, fallback: f64, doc: &ConfigDocument, key: &str) -> (f64, Location) {
    match flag {
        Some(v) => (v, Location::Flag(name.into())),
        None => (fallback, doc.location("design", key)),
    }
}

fn run_design(a: &DesignArgs, doc: &ConfigDocument, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("design");
    let d = &doc.design;
    let (tau, _) = pick(a.tau, "tau", d.tau, doc, "tau");
    let (xi, xi_loc) = pick(a.xi, "xi", d.xi, doc, "xi");
    let (k1, _) = pick(a.k1, "k1", d.k1, doc, "k1");
    let (k2, _) = pick(a.k2, "k2", d.k2, doc, "k2");
    let targets = match (a.dv_max, a.p_a_max) {
        (Some(dv), Some(p)) => DesignTargets::with_rating(tau, xi, k1, k2, dv, p)?,
        _ => DesignTargets {
            tau,
            xi,
            k1,
            k2,
            alpha: a.alpha.unwrap_or(d.alpha),
        },
    };
    report.param("design", targets);
    let synth = synthesize(&targets)?;
    let bank = synth.bank(doc.bank.v_ref)?;
    report.derived = Some(Derived::new(&synth.characteristic, &sharing_indices(&bank)));
    if xi > XI_ADVISORY_LIMIT {
        report.warn(
            xi_loc,
            format!("xi = {xi} exceeds {XI_ADVISORY_LIMIT}; the cutoff relation is unverified there"),
        );
    }
    report.result("bank", bank);
    report.result("characteristic", synth.characteristic);
    let note = format!(
        "synthesized for tau = {tau} s, xi = {xi}, k1 = {k1}, k2 = {k2}; omega0 = {} rad/s",
        synth.characteristic.omega0
    );
    write_file(out, "design.ini", &bank_ini(&bank, &note), &mut report)?;
    finish(report, out)
}

fn run_bode(a: &BodeArgs, doc: &ConfigDocument, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("bode");
    report.param("droop", doc.bank);
    describe_bank(&mut report, &doc.bank, droop_location(doc));
    let lo = a.omega_min.unwrap_or(DEFAULT_OMEGA_MIN);
    let hi = a.omega_max.unwrap_or(DEFAULT_OMEGA_MAX);
    let n = a.points.unwrap_or(DEFAULT_POINTS);
    report.param(
        "bode",
        BTreeMap::from([("omega_min", lo), ("omega_max", hi), ("points", n as f64)]),
    );
    let table = bode(&doc.bank, lo, hi, n)?;
    report.result("crossover", crossover_report(&doc.bank));
    write_file(out, "bode.csv", &csv::bode_csv(&table), &mut report)?;
    finish(report, out)
}

fn run_sim(a: &SimArgs, doc: &ConfigDocument, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("sim");
    report.param("droop", doc.bank);
    report.param("inertia", doc.inertia);
    report.param("grid", doc.grid);
    report.param("scenario", &doc.scenario);
    describe_bank(&mut report, &doc.bank, droop_location(doc));
    let omega0 = characteristic(&doc.bank).omega0;
    if doc.scenario.t_end < 10.0 / omega0 {
        report.warn(
            doc.location("scenario", "t_end"),
            format!(
                "t_end = {} s is shorter than 10/omega0 = {:.4} s",
                doc.scenario.t_end,
                10.0 / omega0
            ),
        );
    }
    let run = simulate(&doc.scenario, &doc.bank, &doc.inertia, &doc.grid)?;
    for w in &run.warnings {
        let SimWarning::SocOutOfBounds { t, soc } = *w;
        report.warn(Location::Time(t), format!("SOC = {soc:.6} left [0, 1]"));
    }
    let mut table = BTreeMap::new();
    for ch in [
        SeriesChannel::Total,
        SeriesChannel::Ael,
        SeriesChannel::Pemel,
        SeriesChannel::Sc,
        SeriesChannel::Frequency,
    ] {
        match metrics(&run.series, ch, a.band, &doc.scenario.load) {
            Ok(m) => {
                table.insert(ch.name(), m);
            }
            Err(Error::NoEvent) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if !table.is_empty() {
        report.result("metrics", table);
    }
    if let Some(last) = run.series.rows.last() {
        report.result(
            "final",
            BTreeMap::from([("delta_q", last.delta_q), ("soc", last.soc), ("f", last.f)]),
        );
    }
    write_file(out, "timeseries.csv", &csv::series_csv(&run.series), &mut report)?;
    finish(report, out)
}

fn run_mpt(a: &MptArgs, doc: &ConfigDocument, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("mpt");
    let circuit = MptCircuit {
        c_dc2: a.c_dc2.unwrap_or(doc.circuit.c_dc2),
        ..doc.circuit
    };
    let (op, p_grid) = match a.p_grid.or(doc.p_grid) {
        Some(p) => (doc.convention.apply(&doc.op, p), p),
        None => (doc.op, doc.convention.scale * doc.op.v_gdr * doc.op.i_drref),
    };
    report.param("mpt_fixture", doc.mpt_fixture.name());
    report.param("mpt_circuit", circuit);
    report.param("mpt_operating_point", op);
    let r = is_stable(&circuit, &op)?;
    report.result("p_grid", p_grid);
    report.result("stability", r);
    let plane = SweepPlane {
        p_grid: vec![p_grid],
        c_dc2: vec![circuit.c_dc2],
        results: vec![r],
    };
    write_file(out, "mpt.csv", &csv::sweep_csv(&plane), &mut report)?;
    finish(report, out)
}

fn run_sweep(a: &SweepArgs, doc: &ConfigDocument, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("sweep");
    let spec = PlaneSpec {
        p_grid_n: a.p_grid_n.unwrap_or(doc.plane.p_grid_n),
        c_dc2_n: a.c_dc2_n.unwrap_or(doc.plane.c_dc2_n),
        ..doc.plane
    };
    report.param("mpt_fixture", doc.mpt_fixture.name());
    report.param("mpt_circuit", doc.circuit);
    report.param("mpt_operating_point", doc.op);
    report.param("sweep", spec);
    let plane = sweep(&doc.circuit, &doc.op, &spec, doc.convention)?;
    let boundary = plane.boundary();
    let stable = plane.results.iter().filter(|r| r.stable).count();
    report.result(
        "summary",
        BTreeMap::from([
            ("points", plane.results.len()),
            ("stable", stable),
            ("boundary_points", boundary.len()),
        ]),
    );
    write_file(out, "sweep.csv", &csv::sweep_csv(&plane), &mut report)?;
    write_file(out, "boundary.csv", &csv::boundary_csv(&boundary), &mut report)?;
    finish(report, out)
}

fn run_aggregate(a: &AggregateArgs, doc: &ConfigDocument, out: &Path) -> Result<RunReport, CliError> {
    let mut report = RunReport::new("aggregate");
    report.param("fleet", &doc.fleet);
    let eq = aggregate(&doc.fleet)?;
    report.result("equivalent", eq);
    let mut bank = eq.bank(doc.bank.v_ref)?;
    let mut note = String::from("equivalent bank of the configured fleet");
    if let Some(alpha_new) = a.alpha_new.or(doc.alpha_new) {
        let x = expand(&eq, alpha_new)?;
        report.result("expansion", x);
        bank = x.updated.bank(doc.bank.v_ref)?;
        note = format!("equivalent bank after expansion to alpha = {alpha_new}");
    }
    let xi_loc = doc
        .lines
        .iter()
        .filter(|(k, _)| k.starts_with("fleet."))
        .map(|(_, &l)| l)
        .min()
        .map_or(Location::Default, Location::Line);
    describe_bank(&mut report, &bank, xi_loc);
    report.result("bank", bank);
    write_file(out, "aggregate.ini", &bank_ini(&bank, &note), &mut report)?;
    finish(report, out)
}

fn finish(mut report: RunReport, out: &Path) -> Result<RunReport, CliError> {
    report.files.push("report.json".into());
    let path = out.join("report.json");
    std::fs::write(&path, report.to_json()).map_err(|source| CliError::Io { path, source })?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_dir_precedence() {
        let flag = PathBuf::from("/flag");
        assert_eq!(resolve_out_dir(Some(&flag), Some("/env".into())), flag);
        assert_eq!(resolve_out_dir(None, Some("/env".into())), PathBuf::from("/env"));
        assert_eq!(resolve_out_dir(None, Some("".into())), PathBuf::from("."));
        assert_eq!(resolve_out_dir(None, None), PathBuf::from("."));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(ConfigErrors(vec![])).exit_code(), 2);
        assert_eq!(CliError::Domain(Error::NoEvent).exit_code(), 1);
    }

    #[test]
    fn help_carries_key_reference() {
        let help = command().render_long_help().to_string();
        assert!(help.contains("fixture: aggregate grid inertia"));
        assert!(help.contains("HHESS_OUT_DIR"));
    }
}
