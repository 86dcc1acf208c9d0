//! The `magtrap` command-line front end.
//!
//! ```text
//! magtrap <stability-map|trajectory|escape-rate|table1> --config <path>
//!         [--output <path>] [--format csv|json] [--resolution N] [--seed N]
//! ```
//!
//! Exit codes: 0 success, 2 configuration or domain error, 3 I/O error,
//! 4 numerical failure.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::dynamics::{integrate_with, standard_perturbation, ClassicalState, IntegratorOptions};
use crate::error::{Error, Result};
use crate::field::{derive_frequencies, ConfigFile, DerivedFrequencies, ParticleSpec, TrapConfig};
use crate::quantum::{
    asymptotic_rate, escape_rate, golden_rule_log_rate, log10_t_esc, rate_sweep, Regime,
};
use crate::stability::{
    boundary_curve, is_stable, plot_script, write_boundary_csv, AdiabaticityPoint, MapCell, MapGrid, StabilityMap,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        Error::Stiffness { .. } | Error::Quadrature(_) => EXIT_NUMERICAL,
    }
}

#[derive(Debug, Parser)]
#[command(name = "magtrap", version, about = "Stability and spin-flip escape of a particle in a magnetic trap")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON configuration file
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when omitted (stability-map defaults to stability_map.csv)
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Grid resolution per axis
    #[arg(long)]
    pub resolution: Option<usize>,
    /// Seed for any randomised input; recorded in the output header
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// Moment antiparallel to the bias field (the trapped state)
    Antiparallel,
    /// Moment along the bias field
    Parallel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify the (K_r^2, K_z^2) plane and write the raster, boundary curve and a plot script
    StabilityMap(CommonArgs),
    /// Integrate the classical equations of motion from a perturbed equilibrium
    Trajectory {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value = "antiparallel")]
        preset: Preset,
        /// Initial displacement in oscillator lengths sqrt(S/(m omega)) per axis
        #[arg(long, default_value_t = 1e-4)]
        perturbation: f64,
        /// Lateral periods for the antiparallel preset, axial e-folding times for the parallel one
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Keep every N-th accepted step
        #[arg(long, default_value_t = 10)]
        stride: usize,
    },
    /// Spin-flip escape rate at the configured trap, or a sweep over (K_r, K_z)
    EscapeRate {
        #[command(flatten)]
        common: CommonArgs,
        /// Sweep a logarithmic resolution x resolution grid at the configured omega_p
        #[arg(long)]
        sweep: bool,
        #[arg(long, default_value_t = 1e-3)]
        k_min: f64,
        #[arg(long, default_value_t = 0.3)]
        k_max: f64,
    },
    /// Time scales for the configured CGS trap next to the expected orders of magnitude
    Table1(CommonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Cgs,
    Dimensionless,
}

impl Units {
    pub fn describe(self) -> &'static str {
        match self {
            Units::Cgs => "cgs (Oe, cm, g, emu, erg s; times in s)",
            Units::Dimensionless => "dimensionless (m = mu = S = B0 = 1; lengths in sqrt(B0/B''), times in 1/omega_p)",
        }
    }
}

/// Dimensionless configuration document: the trap is fixed by `K_r`, `K_z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DimensionlessFile {
    units: Units,
    #[serde(rename = "K_r")]
    k_r: f64,
    #[serde(rename = "K_z")]
    k_z: f64,
}

/// A validated configuration with the canonical text used for hashing.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trap: TrapConfig,
    pub particle: ParticleSpec,
    pub units: Units,
    canonical: String,
}

impl RunConfig {
    /// Parses a CGS document (the [`ConfigFile`] keys, optionally with
    /// `"units": "cgs"`) or a dimensionless one,
    /// `{"units": "dimensionless", "K_r": .., "K_z": ..}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut value: Value =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let units = match obj.get("units") {
            None => Units::Cgs,
            Some(u) => serde_json::from_value(u.clone())
                .map_err(|_| Error::Config(format!("units must be \"cgs\" or \"dimensionless\", got {u}")))?,
        };
        match units {
            Units::Cgs => {
                obj.remove("units");
                let file: ConfigFile = serde_json::from_value(value)
                    .map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
                let (trap, particle) = file.split()?;
                let canonical = serde_json::to_string(&file).expect("config serialises");
                Ok(RunConfig {
                    trap,
                    particle,
                    units,
                    canonical,
                })
            }
            Units::Dimensionless => {
                let file: DimensionlessFile = serde_json::from_value(value)
                    .map_err(|e| Error::Config(format!("cannot parse config: {e}")))?;
                let particle = ParticleSpec::dimensionless();
                let trap = TrapConfig::from_frequencies(&particle, 1.0, file.k_r, file.k_z)
                    .map_err(|e| Error::Config(e.to_string()))?;
                let canonical = serde_json::to_string(&file).expect("config serialises");
                Ok(RunConfig {
                    trap,
                    particle,
                    units,
                    canonical,
                })
            }
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn frequencies(&self) -> Result<DerivedFrequencies> {
        derive_frequencies(&self.trap, &self.particle)
    }

    /// SHA-256 of the canonical configuration.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical.as_bytes()))
    }
}

/// Provenance carried at the top of every output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_sha256: String,
    pub units: &'static str,
    pub seed: Option<u64>,
}

impl Header {
    fn new(command: &'static str, cfg: &RunConfig, seed: Option<u64>) -> Self {
        Header {
            tool: "magtrap",
            version: env!("CARGO_PKG_VERSION"),
            command,
            config_sha256: cfg.hash(),
            units: cfg.units.describe(),
            seed,
        }
    }

    pub fn write_comments<W: Write + ?Sized>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# {} {} {}", self.tool, self.version, self.command)?;
        writeln!(w, "# config_sha256: {}", self.config_sha256)?;
        writeln!(w, "# units: {}", self.units)?;
        match self.seed {
            Some(s) => writeln!(w, "# seed: {s}"),
            None => writeln!(w, "# seed: none"),
        }
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn write_json<W: Write + ?Sized>(w: &mut W, v: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, v).map_err(io::Error::from)?;
    writeln!(w)?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn stability_map(args: &CommonArgs, cfg: &RunConfig) -> Result<()> {
    let header = Header::new("stability-map", cfg, args.seed);
    let res = args.resolution.unwrap_or(200);
    let map = StabilityMap::compute(MapGrid::standard(res))?;
    let curve = boundary_curve(res.max(2) + 1);
    let point = AdiabaticityPoint::from_frequencies(&cfg.frequencies()?);
    let stable = is_stable(&point);
    let first = curve.samples.first().expect("curve has samples");
    let last = curve.samples.last().expect("curve has samples");

    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let raster = args.output.clone().unwrap_or_else(|| PathBuf::from("stability_map.csv"));
            let edge = sibling(&raster, "_boundary.csv");
            let script = sibling(&raster, "_plot.py");
            let figure = sibling(&raster, ".png");

            let mut w = open_output(Some(&raster))?;
            header.write_comments(&mut w)?;
            writeln!(w, "# config point: K_r2={:e} K_z2={:e} stable={stable}", point.k_r2, point.k_z2)?;
            writeln!(w, "# stable: 1, unstable: 0, marginal: 2")?;
            map.write_csv(&mut w)?;
            w.flush()?;

            let mut w = open_output(Some(&edge))?;
            header.write_comments(&mut w)?;
            writeln!(
                w,
                "# endpoints: ({:.15}, {:.15}) ({:.15}, {:.15})",
                first.k_r2, first.k_z2, last.k_r2, last.k_z2
            )?;
            write_boundary_csv(&curve, &mut w)?;
            w.flush()?;

            let name = |p: &Path| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            std::fs::write(&script, plot_script(&name(&raster), &name(&edge), &name(&figure)))?;
        }
        Format::Json => {
            let doc = json!({
                "header": header,
                "grid": map.grid,
                "cells": map.cells.iter().map(|c| c.code()).collect::<Vec<_>>(),
                "boundary": curve.samples,
                "config_point": { "K_r2": point.k_r2, "K_z2": point.k_z2, "stable": stable },
            });
            let mut w = open_output(args.output.as_deref())?;
            write_json(&mut w, &doc)?;
            w.flush()?;
        }
    }
    eprintln!(
        "stable fraction {:.4}, marginal {:.4}; config point stable = {stable}",
        map.fraction(MapCell::Stable),
        map.fraction(MapCell::Marginal)
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn trajectory(
    args: &CommonArgs,
    cfg: &RunConfig,
    preset: Preset,
    perturbation: f64,
    duration: Option<f64>,
    tol: f64,
    stride: usize,
) -> Result<()> {
    let header = Header::new("trajectory", cfg, args.seed);
    let f = cfg.frequencies()?;
    if !(perturbation >= 0.0 && perturbation.is_finite()) {
        return Err(Error::Domain(format!("perturbation must be non-negative, got {perturbation}")));
    }
    let mut dpos = standard_perturbation(&cfg.trap, &cfg.particle, perturbation)?;
    if let Some(seed) = args.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in dpos.iter_mut() {
            *c *= rng.random_range(-1.0..1.0);
        }
    }
    let (s0, t_end) = match preset {
        Preset::Antiparallel => (
            ClassicalState::antiparallel_equilibrium().displaced(dpos),
            duration.unwrap_or(100.0) * 2.0 * std::f64::consts::PI / f.omega_r,
        ),
        Preset::Parallel => (
            ClassicalState::parallel_equilibrium().displaced(dpos),
            duration.unwrap_or(5.0) / f.omega_z,
        ),
    };
    let opts = IntegratorOptions {
        tol,
        stride: stride.max(1),
        ..Default::default()
    };
    let traj = integrate_with(&cfg.trap, &cfg.particle, &s0, t_end, &opts)?;
    let summary = traj.summary();

    let mut w = open_output(args.output.as_deref())?;
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            header.write_comments(&mut w)?;
            writeln!(w, "# preset: {preset:?}, t_end: {t_end:e}, tol: {tol:e}")?;
            traj.write_csv(&mut w)?;
            writeln!(
                w,
                "# summary: energy_drift={:e} max_excursion={:e} initial_displacement={:e} unbounded={}",
                summary.energy_drift, summary.max_excursion, summary.initial_displacement, summary.unbounded
            )?;
        }
        Format::Json => {
            let doc = json!({ "header": header, "summary": summary, "samples": traj.samples, "energy": traj.energy });
            write_json(&mut w, &doc)?;
        }
    }
    w.flush()?;
    eprintln!(
        "energy drift {:.3e}, max excursion {:.3e} ({:.2}x initial), unbounded = {}",
        summary.energy_drift,
        summary.max_excursion,
        summary.max_excursion / summary.initial_displacement.max(f64::MIN_POSITIVE),
        summary.unbounded
    );
    Ok(())
}

fn escape(args: &CommonArgs, cfg: &RunConfig, sweep: bool, k_min: f64, k_max: f64) -> Result<()> {
    let header = Header::new("escape-rate", cfg, args.seed);
    let f = cfg.frequencies()?;
    let mut w = open_output(args.output.as_deref())?;
    let csv_header = "K_r,K_z,omega_p,log10_Tesc,regime";
    if sweep {
        let n = args.resolution.unwrap_or(20);
        let rows = rate_sweep(f.omega_p, (k_min, k_max), (k_min, k_max), n)?;
        match args.format.unwrap_or(Format::Csv) {
            Format::Csv => {
                header.write_comments(&mut w)?;
                writeln!(w, "{csv_header}")?;
                for r in &rows {
                    writeln!(w, "{:.10e},{:.10e},{:.10e},{:.12e},{}", r.k_r, r.k_z, r.omega_p, r.log10_t_esc, r.regime.as_str())?;
                }
            }
            Format::Json => write_json(&mut w, &json!({ "header": header, "rows": rows }))?,
        }
    } else {
        let result = escape_rate(&f)?;
        match args.format.unwrap_or(Format::Json) {
            Format::Csv => {
                header.write_comments(&mut w)?;
                writeln!(w, "{csv_header}")?;
                writeln!(
                    w,
                    "{:.10e},{:.10e},{:.10e},{:.12e},{}",
                    f.k_r,
                    f.k_z,
                    f.omega_p,
                    result.log10_t_esc,
                    result.regime.as_str()
                )?;
            }
            Format::Json => {
                let asymptotic = match result.regime {
                    Regime::General => None,
                    r => Some(asymptotic_rate(&f, r)?),
                };
                let golden = golden_rule_log_rate(&cfg.trap, &cfg.particle).ok();
                let doc = json!({
                    "header": header,
                    "frequencies": f,
                    "result": result,
                    "ln_rate_over_omega_r": result.log_rate - f.omega_r.ln(),
                    "ln_rate_over_omega_z": result.log_rate - f.omega_z.ln(),
                    "asymptotic": asymptotic.map(|a| json!({
                        "log_rate": a.log_rate,
                        "log10_t_esc": log10_t_esc(a.log_rate),
                        "regime": a.regime,
                        "regime_mismatch": a.regime_mismatch,
                    })),
                    "golden_rule_check": golden.map(|g| json!({
                        "log_rate": g.log_rate,
                        "relative_difference": ((g.log_rate - result.log_rate) / result.log_rate).abs(),
                        "quadrature_error": g.quadrature_error,
                    })),
                });
                write_json(&mut w, &doc)?;
            }
        }
        eprintln!("log10 T_esc = {:.6e} ({})", result.log10_t_esc, result.regime.as_str());
    }
    w.flush()?;
    Ok(())
}

/// One line of the time-scale table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub quantity: &'static str,
    pub unit: &'static str,
    pub value: f64,
    /// Expected order of magnitude.
    pub expected: f64,
    /// `|log10(value/expected)| <= 1`.
    pub matches: bool,
}

/// Rows of the time-scale table for a CGS trap.
pub fn table_rows(trap: &TrapConfig, p: &ParticleSpec) -> Result<Vec<TableRow>> {
    let f = derive_frequencies(trap, p)?;
    let rate = escape_rate(&f)?;
    let row = |quantity, unit, value: f64, expected: f64| TableRow {
        quantity,
        unit,
        value,
        expected,
        matches: (value / expected).log10().abs() <= 1.0,
    };
    Ok(vec![
        row("m", "g", p.mass, 1e-22),
        row("mu", "emu", p.mu, 1e-20),
        row("K_z", "", f.k_z, 1e-8),
        row("K_r", "", f.k_r, 1e-8),
        row("1/omega_p", "s", 1.0 / f.omega_p, 1e-9),
        row("1/omega_r", "s", 1.0 / f.omega_r, 1e-1),
        row("1/omega_z", "s", 1.0 / f.omega_z, 1e-1),
        row("log10 T_esc", "log10 s", rate.log10_t_esc, 1e8),
    ])
}

fn table1(args: &CommonArgs, cfg: &RunConfig) -> Result<()> {
    if cfg.units != Units::Cgs {
        return Err(Error::Config("table1 needs a CGS configuration".into()));
    }
    let header = Header::new("table1", cfg, args.seed);
    let rows = table_rows(&cfg.trap, &cfg.particle)?;
    let mut w = open_output(args.output.as_deref())?;
    match args.format {
        None => {
            header.write_comments(&mut w)?;
            writeln!(w, "{:<12} {:<8} {:>14} {:>10}  match", "quantity", "unit", "value", "expected")?;
            for r in &rows {
                writeln!(w, "{:<12} {:<8} {:>14.4e} {:>10.0e}  {}", r.quantity, r.unit, r.value, r.expected, r.matches)?;
            }
        }
        Some(Format::Csv) => {
            header.write_comments(&mut w)?;
            writeln!(w, "quantity,unit,value,expected,match")?;
            for r in &rows {
                writeln!(w, "{},{},{:.10e},{:e},{}", r.quantity, r.unit, r.value, r.expected, r.matches)?;
            }
        }
        Some(Format::Json) => write_json(&mut w, &json!({ "header": header, "rows": rows }))?,
    }
    w.flush()?;
    Ok(())
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let common = match &cli.command {
        Command::StabilityMap(c) | Command::Table1(c) => c,
        Command::Trajectory { common, .. } | Command::EscapeRate { common, .. } => common,
    };
    let cfg = RunConfig::load(&common.config)?;
    log::info!("loaded {} config {}", format!("{:?}", cfg.units).to_lowercase(), cfg.hash());
    match &cli.command {
        Command::StabilityMap(c) => stability_map(c, &cfg),
        Command::Trajectory {
            common,
            preset,
            perturbation,
            duration,
            tol,
            stride,
        } => trajectory(common, &cfg, *preset, *perturbation, *duration, *tol, *stride),
        Command::EscapeRate {
            common,
            sweep,
            k_min,
            k_max,
        } => escape(common, &cfg, *sweep, *k_min, *k_max),
        Command::Table1(c) => table1(c, &cfg),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("magtrap: {e}");
            exit_code(&e)
        }
    }
}
