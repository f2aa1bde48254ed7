//! Command-line front end.
//!
//! Exit codes: 0 success, 1 domain or physics error, 2 usage or config error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bound::{
    default_beta_grid, eval_bound, log_grid, BoundCurve, BoundInputs, ChiPolicy, PreferredFrame,
};
use crate::budget::{coherence_length, OpticalBudget};
use crate::config::{ScheduleSpec, SimulationFile};
use crate::consts::{CMB_CHI_DEG, EARTH_OMEGA};
use crate::error::Error;
use crate::kinematics::{
    alpha_for_fraction, inaccessible_fraction, inaccessible_fraction_mc, FrameDirection, SiteGeometry,
};
use crate::scan::{cmb_report, custom_preset, figure1, preset, worst_case_frame, write_curves_csv, PresetName};
use crate::schedule::{effective_dt, validate_campaign, MeasurementSchedule};
use crate::sim::tally::{sci, write_estimates_csv};
use crate::units::{Angle, Length, Seconds};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Lower bounds on the speed of hidden superluminal influences.
#[derive(Debug, Parser)]
#[command(name = "tachyon-bound", version, about, propagate_version = true)]
pub struct RunConfig {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,

    /// Seed for every randomized step. Required by `coverage --mc` and `simulate`
    /// (unless the config file carries one).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound curves β ↦ β_t,max for presets or explicit parameters.
    Curve(CurveArgs),
    /// Coherence length and the combined path-equalization budget.
    Coherence(CoherenceArgs),
    /// Fraction of frame directions a baseline can never test.
    Coverage(CoverageArgs),
    /// Check a measurement schedule against the campaign rules.
    Schedule(ScheduleArgs),
    /// Run an event-level simulation from a JSON config.
    Simulate(SimulateArgs),
}

/// Parses a duration; a bare number is read as seconds.
fn duration_arg(s: &str) -> Result<Seconds, Error> {
    match s.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(Seconds(v)),
        _ => s.parse(),
    }
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Comma-separated presets: ego_red, ego_green, tabletop_blue.
    #[arg(long, value_delimiter = ',', conflicts_with_all = ["rho", "dt", "chi"])]
    pub presets: Vec<PresetName>,

    /// Path-mismatch ratio ρ for a custom curve.
    #[arg(long)]
    pub rho: Option<f64>,

    /// Measurement duration δt for a custom curve (e.g. 0.492s, 200s, 0).
    #[arg(long, value_parser = duration_arg, requires = "rho")]
    pub dt: Option<Seconds>,

    /// Orientation angle χ for a custom curve; defaults to sinχ = 1.
    #[arg(long, requires = "rho")]
    pub chi: Option<Angle>,

    /// Rotation rate ω in rad/s.
    #[arg(long, default_value_t = EARTH_OMEGA)]
    pub omega: f64,

    /// Evaluate a single point at this β instead of a grid.
    #[arg(long, conflicts_with_all = ["cmb_report", "worst_case"])]
    pub beta: Option<f64>,

    /// Number of log-spaced grid points.
    #[arg(long, default_value_t = 200)]
    pub points: usize,

    /// Smallest β on the grid.
    #[arg(long, default_value_t = 1e-6)]
    pub beta_min: f64,

    /// Largest β on the grid.
    #[arg(long, default_value_t = 0.999)]
    pub beta_max: f64,

    /// Report the bound at the CMB frame instead of a curve.
    #[arg(long, conflicts_with = "worst_case")]
    pub cmb_report: bool,

    /// Report the weakest bound over frames with β up to this value.
    #[arg(long, value_name = "BETA_MAX")]
    pub worst_case: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CoherenceArgs {
    /// Down-converted wavelength (e.g. 813nm).
    #[arg(long, required_unless_present = "budget")]
    pub lambda: Option<Length>,

    /// Interference-filter bandwidth (e.g. 40nm).
    #[arg(long, required_unless_present = "budget")]
    pub filter: Option<Length>,

    /// Natural bandwidth of the source; defaults to the filter bandwidth.
    #[arg(long)]
    pub source_bandwidth: Option<Length>,

    /// JSON error budget; command-line values override its fields.
    #[arg(long, value_name = "PATH")]
    pub budget: Option<PathBuf>,

    /// Path-equalization uncertainty Δd (e.g. 215um).
    #[arg(long, requires = "distance")]
    pub delta_d: Option<Length>,

    /// Detector separation d (e.g. 1.175km).
    #[arg(long)]
    pub distance: Option<Length>,

    /// Leave the coherence length out of the quadrature sum.
    #[arg(long)]
    pub no_coherence: bool,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["alpha", "fraction"]))]
pub struct CoverageArgs {
    /// Angle between the baseline and the rotation axis (e.g. 90deg).
    #[arg(long)]
    pub alpha: Option<Angle>,

    /// Inaccessible fraction to invert for α.
    #[arg(long)]
    pub fraction: Option<f64>,

    /// Cross-check with this many Monte Carlo directions (needs --seed).
    #[arg(long, value_name = "SAMPLES")]
    pub mc: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Standard,
    SplitDays,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    /// Start from a named preset.
    #[arg(long, conflicts_with_all = ["kind", "load"])]
    pub preset: Option<PresetName>,

    /// Build a schedule of this kind from the flags below.
    #[arg(long, value_enum, conflicts_with = "load")]
    pub kind: Option<KindArg>,

    /// Read the schedule from a JSON file written by --save.
    #[arg(long, value_name = "PATH")]
    pub load: Option<PathBuf>,

    /// Acquisition time per setting (standard).
    #[arg(long, value_parser = duration_arg)]
    pub per_setting: Option<Seconds>,

    /// Polarizer rotation overhead per setting (standard).
    #[arg(long, value_parser = duration_arg)]
    pub overhead: Option<Seconds>,

    /// Total campaign span (standard).
    #[arg(long, value_parser = duration_arg)]
    pub span: Option<Seconds>,

    /// Number of days (split-days).
    #[arg(long)]
    pub days: Option<u32>,

    /// Acquisition window per day (split-days).
    #[arg(long, value_parser = duration_arg)]
    pub window: Option<Seconds>,

    /// Guard bins recorded on each side of the central window (split-days).
    #[arg(long)]
    pub guard_bins: Option<u32>,

    /// Path-mismatch ratio ρ; defaults to the preset value.
    #[arg(long)]
    pub rho: Option<f64>,

    /// Angle between the baseline and the rotation axis.
    #[arg(long)]
    pub alpha: Option<Angle>,

    /// Polar angle of the frame velocity (default 83.6deg).
    #[arg(long)]
    pub theta: Option<Angle>,

    /// Azimuth of the frame velocity.
    #[arg(long)]
    pub phi: Option<Angle>,

    /// Save the resulting schedule as JSON.
    #[arg(long, value_name = "PATH")]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation config.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,

    /// Directory for tally.csv, estimates.csv, drop_report.json and summary.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub output_dir: PathBuf,
}

/// A failed command with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DOMAIN,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_usage() { EXIT_USAGE } else { EXIT_DOMAIN },
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<Report, Failure>;

/// Rendered output plus the exit code to report after writing it.
struct Report {
    body: String,
    code: i32,
}

impl Report {
    fn ok(body: String) -> Self {
        Report { body, code: EXIT_OK }
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Reports go to `out`, diagnostics to `err`; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            let text = e.render().ansi().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{text}");
            return e.exit_code();
        }
    };
    let result = match &cfg.command {
        Command::Curve(a) => cmd_curve(&cfg, a),
        Command::Coherence(a) => cmd_coherence(&cfg, a),
        Command::Coverage(a) => cmd_coverage(&cfg, a),
        Command::Schedule(a) => cmd_schedule(&cfg, a),
        Command::Simulate(a) => cmd_simulate(&cfg, a),
    };
    match result {
        Ok(report) => {
            let written = match &cfg.output {
                Some(path) => fs::write(path, &report.body)
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => out.write_all(report.body.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => report.code,
                Err(msg) => {
                    let _ = writeln!(err, "error: {msg}");
                    EXIT_DOMAIN
                }
            }
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

/// Two-column `quantity,value` CSV.
fn kv_csv(rows: &[(&str, String)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}

fn cmd_curve(cfg: &RunConfig, a: &CurveArgs) -> CmdResult {
    let presets = match a.rho {
        Some(rho) => {
            let dt = a.dt.map_or(0.0, Seconds::si);
            let policy = match a.chi {
                Some(chi) => ChiPolicy::Fixed { chi: chi.si() },
                None => ChiPolicy::WorstCase,
            };
            let inputs = BoundInputs::new(rho, dt)?.with_omega(a.omega)?;
            let mut p = custom_preset(rho, dt, policy)?;
            p.site.omega = a.omega;
            vec![(p, inputs)]
        }
        None => {
            let names = if a.presets.is_empty() {
                PresetName::NAMED.to_vec()
            } else {
                a.presets.clone()
            };
            names
                .iter()
                .map(|n| {
                    let mut p = preset(n.as_str())?;
                    p.site.omega = a.omega;
                    let inputs = p.inputs()?;
                    Ok((p, inputs))
                })
                .collect::<crate::error::Result<Vec<_>>>()?
        }
    };

    if let Some(beta) = a.beta {
        let mut rows = Vec::new();
        for (p, inputs) in &presets {
            let frame = PreferredFrame::new(beta, p.chi_policy.chi())?;
            rows.push((p.name, eval_bound(inputs, &frame)?));
        }
        return Ok(Report::ok(match cfg.format {
            Format::Csv => {
                let mut s = String::from("beta");
                for (n, _) in &rows {
                    let _ = write!(s, ",{n}");
                }
                let _ = write!(s, "\n{}", sci(beta));
                for (_, v) in &rows {
                    let _ = write!(s, ",{}", sci(*v));
                }
                s.push('\n');
                s
            }
            Format::Json => {
                #[derive(Serialize)]
                struct Point {
                    preset: PresetName,
                    beta: f64,
                    beta_t_max: f64,
                }
                to_json(&rows.iter().map(|&(preset, beta_t_max)| Point { preset, beta, beta_t_max }).collect::<Vec<_>>())
            }
        }));
    }

    if a.cmb_report {
        let reports = presets
            .iter()
            .map(|(p, _)| cmb_report(p))
            .collect::<crate::error::Result<Vec<_>>>()?;
        return Ok(Report::ok(match cfg.format {
            Format::Json => to_json(&reports),
            Format::Csv => {
                let mut s = String::from(
                    "preset,rho,delta_t,beta,chi_deg,beta_t_max,fast_limit,fast_limit_ratio,drift_ratio,regime,threshold_dt\n",
                );
                for r in &reports {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{},{},{},{}",
                        r.preset,
                        sci(r.rho),
                        sci(r.delta_t),
                        sci(r.frame.beta),
                        sci(r.frame.chi.to_degrees()),
                        sci(r.beta_t_max),
                        sci(r.fast_limit),
                        sci(r.fast_limit_ratio),
                        sci(r.drift_ratio),
                        serde_json::to_value(r.regime).expect("regime").as_str().unwrap_or_default(),
                        sci(r.threshold_dt)
                    );
                }
                s
            }
        }));
    }

    if let Some(beta_max) = a.worst_case {
        #[derive(Serialize)]
        struct WorstCase {
            preset: PresetName,
            beta: f64,
            chi: f64,
            beta_t_max: f64,
        }
        let rows = presets
            .iter()
            .map(|(p, _)| {
                let (frame, v) = worst_case_frame(p, beta_max)?;
                Ok(WorstCase {
                    preset: p.name,
                    beta: frame.beta,
                    chi: frame.chi,
                    beta_t_max: v,
                })
            })
            .collect::<crate::error::Result<Vec<_>>>()?;
        return Ok(Report::ok(match cfg.format {
            Format::Json => to_json(&rows),
            Format::Csv => {
                let mut s = String::from("preset,beta,chi_deg,beta_t_max\n");
                for r in &rows {
                    let _ = writeln!(s, "{},{},{},{}", r.preset, sci(r.beta), sci(r.chi.to_degrees()), sci(r.beta_t_max));
                }
                s
            }
        }));
    }

    let grid = if a.beta_min == 1e-6 && a.beta_max == 0.999 && a.points == 200 {
        default_beta_grid()
    } else {
        log_grid(a.beta_min, a.beta_max, a.points)?
    };
    let curves: Vec<(PresetName, BoundCurve)> = if a.rho.is_some() {
        let (p, inputs) = &presets[0];
        vec![(p.name, crate::bound::sample_curve(inputs, p.chi_policy, &grid)?)]
    } else {
        figure1(&presets.iter().map(|(p, _)| p.clone()).collect::<Vec<_>>(), &grid)?
    };
    Ok(Report::ok(match cfg.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_curves_csv(&curves, &mut buf).expect("writing to memory");
            String::from_utf8(buf).expect("ascii csv")
        }
        Format::Json => {
            #[derive(Serialize)]
            struct Named<'a> {
                preset: PresetName,
                curve: &'a BoundCurve,
            }
            to_json(&curves.iter().map(|(preset, curve)| Named { preset: *preset, curve }).collect::<Vec<_>>())
        }
    }))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_coherence(cfg: &RunConfig, a: &CoherenceArgs) -> CmdResult {
    let file: Option<OpticalBudget> = a.budget.as_deref().map(read_json).transpose()?;
    let lambda = a.lambda.or(file.as_ref().map(|b| b.lambda_d)).expect("clap requires lambda");
    let filter = a.filter.or(file.as_ref().map(|b| b.dlambda_f)).expect("clap requires filter");
    let lc = coherence_length(lambda.si(), filter.si())?;

    #[derive(Serialize)]
    struct CoherenceReport {
        lambda: f64,
        filter_bandwidth: f64,
        coherence_length: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        filter_limited: Option<bool>,
        #[serde(skip_serializing_if = "Option::is_none")]
        terms: Option<Vec<(String, f64)>>,
        #[serde(skip_serializing_if = "Option::is_none")]
        combined_delta_d: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        effective_rho: Option<f64>,
    }
    let mut report = CoherenceReport {
        lambda: lambda.si(),
        filter_bandwidth: filter.si(),
        coherence_length: lc,
        filter_limited: None,
        terms: None,
        combined_delta_d: None,
        effective_rho: None,
    };

    let budget = match (file, a.delta_d, a.distance) {
        (Some(mut b), _, _) => {
            b.lambda_d = lambda;
            b.dlambda_f = filter;
            if let Some(v) = a.source_bandwidth {
                b.dlambda_d = v;
            }
            if let Some(v) = a.delta_d {
                b.delta_d = v;
            }
            if let Some(v) = a.distance {
                b.d = v;
            }
            if a.no_coherence {
                b.include_coherence = false;
            }
            Some(b)
        }
        (None, Some(delta_d), Some(d)) => Some(OpticalBudget {
            delta_d,
            d,
            lambda_d: lambda,
            dlambda_d: a.source_bandwidth.unwrap_or(filter),
            dlambda_f: filter,
            extra_terms: Vec::new(),
            include_coherence: !a.no_coherence,
        }),
        (None, None, Some(_)) => return Err(Failure::usage("--distance needs --delta-d")),
        (None, _, None) => None,
    };
    if let Some(b) = &budget {
        report.filter_limited = Some(b.filter_limited());
        report.terms = Some(b.terms()?);
        report.combined_delta_d = Some(b.combined_delta_d()?);
        report.effective_rho = Some(crate::budget::effective_rho(b)?);
    }

    Ok(Report::ok(match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut rows = vec![
                ("lambda_m", sci(report.lambda)),
                ("filter_bandwidth_m", sci(report.filter_bandwidth)),
                ("coherence_length_m", sci(report.coherence_length)),
            ];
            if let Some(v) = report.filter_limited {
                rows.push(("filter_limited", v.to_string()));
            }
            if let Some(v) = report.combined_delta_d {
                rows.push(("combined_delta_d_m", sci(v)));
            }
            if let Some(v) = report.effective_rho {
                rows.push(("effective_rho", sci(v)));
            }
            kv_csv(&rows)
        }
    }))
}

fn cmd_coverage(cfg: &RunConfig, a: &CoverageArgs) -> CmdResult {
    let alpha = match (a.alpha, a.fraction) {
        (Some(alpha), _) => alpha.si(),
        (None, Some(f)) => alpha_for_fraction(f)?,
        (None, None) => unreachable!("clap enforces the input group"),
    };
    let fraction = inaccessible_fraction(alpha)?;
    let mc = match a.mc {
        Some(samples) => {
            let seed = cfg
                .seed
                .ok_or_else(|| Failure::usage("--mc needs an explicit --seed"))?;
            Some(inaccessible_fraction_mc(alpha, samples, seed)?)
        }
        None => None,
    };

    #[derive(Serialize)]
    struct CoverageReport {
        alpha_deg: f64,
        inaccessible_fraction: f64,
        #[serde(skip_serializing_if = "Option::is_none")]
        monte_carlo: Option<crate::kinematics::CoverageEstimate>,
        #[serde(skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    }
    let report = CoverageReport {
        alpha_deg: alpha.to_degrees(),
        inaccessible_fraction: fraction,
        monte_carlo: mc,
        seed: mc.and(cfg.seed),
    };
    Ok(Report::ok(match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut rows = vec![
                ("alpha_deg", sci(report.alpha_deg)),
                ("inaccessible_fraction", sci(fraction)),
            ];
            if let Some(m) = mc {
                rows.push(("mc_fraction", sci(m.fraction)));
                rows.push(("mc_stderr", sci(m.stderr)));
                rows.push(("mc_samples", m.samples.to_string()));
                rows.push(("seed", cfg.seed.unwrap_or_default().to_string()));
            }
            kv_csv(&rows)
        }
    }))
}

fn cmd_schedule(cfg: &RunConfig, a: &ScheduleArgs) -> CmdResult {
    let base = a.preset.map(|n| preset(n.as_str())).transpose()?;
    let mut schedule: MeasurementSchedule = if let Some(path) = &a.load {
        read_json(path)?
    } else if let Some(kind) = a.kind {
        let spec = match kind {
            KindArg::Standard => ScheduleSpec::Standard {
                per_setting: a
                    .per_setting
                    .ok_or_else(|| Failure::usage("--kind standard needs --per-setting"))?,
                rotation_overhead: a.overhead.unwrap_or_default(),
                total_span: a.span,
            },
            KindArg::SplitDays => ScheduleSpec::SplitDays {
                days: a.days.ok_or_else(|| Failure::usage("--kind split-days needs --days"))?,
                window_per_day: a
                    .window
                    .ok_or_else(|| Failure::usage("--kind split-days needs --window"))?,
                guard_bins: a.guard_bins.unwrap_or(0),
            },
        };
        spec.build()?
    } else if let Some(p) = &base {
        p.schedule.clone()
    } else {
        return Err(Failure::usage("give one of --preset, --kind or --load"));
    };
    if a.kind.is_none() {
        if let Some(span) = a.span {
            schedule = schedule.with_total_span(span.si());
        }
        if let Some(g) = a.guard_bins {
            schedule = schedule.with_guard_bins(g);
        }
    }

    let rho = a
        .rho
        .or(base.as_ref().map(|p| p.rho))
        .ok_or_else(|| Failure::usage("--rho is required without --preset"))?;
    let mut geo = base.as_ref().map_or(SiteGeometry::east_west(1.0), |p| p.site);
    if let Some(alpha) = a.alpha {
        geo = SiteGeometry::new(alpha.si(), geo.d, geo.phase0)?;
    }
    let dir = FrameDirection::new(
        a.theta.map_or(CMB_CHI_DEG.to_radians(), Angle::si),
        a.phi.map_or(0.0, Angle::si),
    )?;
    let report = validate_campaign(&schedule, &geo, &dir, rho)?;

    if let Some(path) = &a.save {
        fs::write(path, to_json(&schedule))
            .map_err(|e| Failure::domain(format!("cannot write {}: {e}", path.display())))?;
    }

    let body = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("item,value,detail\n");
            let _ = writeln!(s, "effective_dt,{},s", sci(effective_dt(&schedule)));
            let _ = writeln!(s, "threshold_dt,{},s", sci(report.threshold_dt));
            let _ = writeln!(s, "regime,{},", serde_json::to_value(report.regime).expect("regime").as_str().unwrap_or_default());
            for c in &report.checks {
                let _ = writeln!(s, "{},{},\"{}\"", c.name, if c.passed { "PASS" } else { "FAIL" }, c.detail.replace('"', "'"));
            }
            let _ = writeln!(s, "overall,{},", if report.passed() { "PASS" } else { "FAIL" });
            s
        }
    };
    Ok(Report {
        body,
        code: if report.passed() { EXIT_OK } else { EXIT_DOMAIN },
    })
}

fn cmd_simulate(cfg: &RunConfig, a: &SimulateArgs) -> CmdResult {
    let file = SimulationFile::load(&a.config)?;
    let seed = cfg
        .seed
        .or(file.seed)
        .ok_or_else(|| Failure::usage("simulation needs a seed: pass --seed or set `seed` in the config"))?;
    let setup = file.resolve(seed)?;
    let run = setup.run()?;

    fs::create_dir_all(&a.output_dir)
        .map_err(|e| Failure::usage(format!("cannot create {}: {e}", a.output_dir.display())))?;
    let write = |name: &str, bytes: &[u8]| -> Result<(), Failure> {
        let path = a.output_dir.join(name);
        fs::write(&path, bytes).map_err(|e| Failure::domain(format!("cannot write {}: {e}", path.display())))
    };
    let mut tally_csv = Vec::new();
    run.tally.write_csv(&mut tally_csv).expect("writing to memory");
    write("tally.csv", &tally_csv)?;
    let mut est_csv = Vec::new();
    write_estimates_csv(&run.series, &mut est_csv).expect("writing to memory");
    write("estimates.csv", &est_csv)?;
    write("drop_report.json", to_json(&run.drops).as_bytes())?;

    #[derive(Serialize)]
    struct Summary<'a> {
        seed: u64,
        rng: &'a str,
        pairs: u64,
        disconnected: u64,
        s: Option<f64>,
        s_stderr: Option<f64>,
        ideal_s: f64,
        estimated_bins: usize,
        drop_bins: &'a [usize],
        bound_requested: bool,
        bound: Option<f64>,
        bound_bin: Option<usize>,
        closed_form: Option<f64>,
        relative_gap: Option<f64>,
        config: &'a SimulationFile,
    }
    let summary = Summary {
        seed,
        rng: &run.tally.rng,
        pairs: run.tally.pairs,
        disconnected: run.tally.disconnected,
        s: run.aggregate.as_ref().map(|e| e.s),
        s_stderr: run.aggregate.as_ref().map(|e| e.stderr),
        ideal_s: setup.source.ideal_s(),
        estimated_bins: run.drops.estimated_bins,
        drop_bins: &run.drops.bins,
        bound_requested: setup.request_bound,
        bound: run.bound.map(|b| b.bound),
        bound_bin: run.bound.map(|b| b.bin),
        closed_form: run.bound.and_then(|b| b.closed_form),
        relative_gap: run.bound.and_then(|b| b.relative_gap()),
        config: &file,
    };
    write("summary.json", to_json(&summary).as_bytes())?;

    let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), sci);
    let body = match cfg.format {
        Format::Json => to_json(&summary),
        Format::Csv => kv_csv(&[
            ("seed", seed.to_string()),
            ("pairs", summary.pairs.to_string()),
            ("disconnected", summary.disconnected.to_string()),
            ("s", opt(summary.s)),
            ("s_stderr", opt(summary.s_stderr)),
            ("ideal_s", sci(summary.ideal_s)),
            ("estimated_bins", summary.estimated_bins.to_string()),
            ("drop_bins", summary.drop_bins.len().to_string()),
            ("bound", opt(summary.bound)),
            ("closed_form", opt(summary.closed_form)),
            ("relative_gap", opt(summary.relative_gap)),
        ]),
    };
    let conflict = setup.request_bound && run.drops.dropped();
    Ok(Report {
        body,
        code: if conflict { EXIT_DOMAIN } else { EXIT_OK },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("tachyon-bound").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn single_point_at_rest() {
        let (code, out, _) = run_args(&["curve", "--rho", "0.5", "--dt", "0", "--beta", "0"]);
        assert_eq!(code, 0);
        assert_eq!(out, "beta,custom\n0.00000000e0,2.00000000e0\n");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run_args(&["curve", "--rho", "2"]).0, EXIT_DOMAIN);
        assert_eq!(run_args(&["coherence", "--lambda", "813nm", "--filter", "0nm"]).0, EXIT_DOMAIN);
        assert_eq!(run_args(&["coherence", "--lambda", "813", "--filter", "40nm"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["curve", "--presets", "ego_purple"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["coverage", "--alpha", "90deg", "--mc", "10"]).0, EXIT_USAGE);
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        let (code, out, _) = run_args(&["curve", "--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("--worst-case"));
    }

    #[test]
    fn duration_args() {
        assert_eq!(duration_arg("0").unwrap(), Seconds(0.0));
        assert_eq!(duration_arg("2min").unwrap(), Seconds(120.0));
        assert!(duration_arg("2parsecs").is_err());
    }
}
