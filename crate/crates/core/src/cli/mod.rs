//! Command-line front end. Every command writes one table (CSV or JSON).

mod verify;

use std::f64::consts::PI;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};

use crate::damping::phase_decay_curve;
use crate::error::{Error, Result};
use crate::husimi::q_repr;
use crate::phasedist::{
    phase_single_grid, phase_two_sweep, width_about, SinglePhase, DEFAULT_POINTS, DEFAULT_POINTS_TWO,
};
use crate::states::{NgOp, Preset, StateSpec, PRESET_NAMES};

pub use verify::{run_verify, CheckResult, CheckStatus, VerifyConfig, VerifyReport};

#[derive(Debug, Parser)]
#[command(name = "husimi-phase", version, about = "Husimi Q-functions and phase distributions of heralded squeezed states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Q-function on a square grid (two-mode: a (q1, q2) slice at fixed p1, p2).
    Qfunc(QfuncArgs),
    /// Phase distribution over θ (two-mode: over θ₊ with θ₁ = θ₂ = θ₊/2).
    Phase(PhaseArgs),
    /// Phase distribution at fixed angles as a function of γt.
    Evolve(EvolveArgs),
    /// Width about θ = π/2 while sweeping λ or τ.
    Width(WidthArgs),
    /// Cross-check the analytic results against the Fock-space oracle.
    Verify(VerifyArgs),
    /// List the named state presets.
    Presets(OutputArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Output file (standard output when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Clone, Debug, Args)]
pub struct StateArgs {
    /// Named preset, e.g. `sym-ps:2` or "pc 1".
    #[arg(long)]
    pub preset: Option<Preset>,
    /// Squeezing λ = tanh r.
    #[arg(long, default_value_t = 0.9)]
    pub lambda: f64,
    /// Beam-splitter transmissivity (both modes unless overridden).
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub tau1: Option<f64>,
    #[arg(long)]
    pub tau2: Option<f64>,
    /// Photons injected into the ancilla.
    #[arg(long)]
    pub k: Option<u32>,
    /// Photons detected at the ancilla.
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long)]
    pub k1: Option<u32>,
    #[arg(long)]
    pub l1: Option<u32>,
    #[arg(long)]
    pub k2: Option<u32>,
    #[arg(long)]
    pub l2: Option<u32>,
    /// Two-mode squeezed vacuum input even without per-mode flags.
    #[arg(long)]
    pub two_mode: bool,
}

impl StateArgs {
    pub fn spec(&self) -> Result<StateSpec> {
        self.spec_with(self.lambda, None)
    }

    /// Spec with `λ` replaced and, when given, every τ replaced.
    pub fn spec_with(&self, lambda: f64, tau_override: Option<f64>) -> Result<StateSpec> {
        let per_mode = [self.k1, self.l1, self.k2, self.l2].iter().any(Option::is_some)
            || self.tau1.is_some()
            || self.tau2.is_some();
        let single_flags = self.k.is_some() || self.l.is_some();
        if let Some(preset) = self.preset {
            let ladder_flags = [self.k1, self.l1, self.k2, self.l2].iter().any(Option::is_some);
            if single_flags || ladder_flags || self.two_mode {
                return Err(Error::Usage("--preset fixes the photon numbers; drop --k/--l/--k1/--l1/--k2/--l2/--two-mode".into()));
            }
            return self.preset_spec(preset, lambda, tau_override);
        }
        if per_mode || self.two_mode {
            if single_flags {
                return Err(Error::Usage("use --k1/--l1/--k2/--l2 for two-mode states, not --k/--l".into()));
            }
            let t1 = tau_override.or(self.tau1).or(self.tau).unwrap_or(1.0);
            let t2 = tau_override.or(self.tau2).or(self.tau).unwrap_or(1.0);
            let first = NgOp::new(self.k1.unwrap_or(0), self.l1.unwrap_or(0), t1)?;
            let second = NgOp::new(self.k2.unwrap_or(0), self.l2.unwrap_or(0), t2)?;
            return StateSpec::two(lambda, first, second);
        }
        let tau = tau_override.or(self.tau).unwrap_or(1.0);
        StateSpec::single(lambda, NgOp::new(self.k.unwrap_or(0), self.l.unwrap_or(0), tau)?)
    }

    fn preset_spec(&self, preset: Preset, lambda: f64, tau_override: Option<f64>) -> Result<StateSpec> {
        let t1 = tau_override.or(self.tau1).or(self.tau).unwrap_or(0.9);
        let t2 = tau_override.or(self.tau2).or(self.tau).unwrap_or(t1);
        preset.spec(lambda, t1, t2)
    }
}

#[derive(Clone, Debug, Args)]
pub struct QfuncArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Samples per axis.
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
    /// Half-width of the square grid.
    #[arg(long, default_value_t = 5.0)]
    pub range: f64,
    /// Fixed p₁ of the two-mode slice.
    #[arg(long, default_value_t = 0.0)]
    pub p1: f64,
    /// Fixed p₂ of the two-mode slice.
    #[arg(long, default_value_t = 0.0)]
    pub p2: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct PhaseArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// θ samples over [−π, π] (default 2001, or 201 for two modes).
    #[arg(long)]
    pub points: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Decay rate of every mode.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub gamma1: Option<f64>,
    #[arg(long)]
    pub gamma2: Option<f64>,
    /// Times: `start:stop:count` or a comma-separated list.
    #[arg(long, default_value = "0:3:31")]
    pub t: String,
    /// Single-mode angle in units of π (default 0.5).
    #[arg(long)]
    pub theta_over_pi: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub theta1_over_pi: f64,
    #[arg(long, default_value_t = 0.0)]
    pub theta2_over_pi: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sweep {
    Lambda,
    Tau,
}

#[derive(Clone, Debug, Args)]
pub struct WidthArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum, default_value_t = Sweep::Lambda)]
    pub sweep: Sweep,
    /// Sweep start (default 0.1 for λ, 0.5 for τ).
    #[arg(long)]
    pub from: Option<f64>,
    /// Sweep end (default 0.95 for λ, 1.0 for τ).
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 18)]
    pub steps: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    /// Check a single λ instead of {0, 0.3, 0.6, 0.9}.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Single-mode Fock cutoff.
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Per-mode Fock cutoff for two-mode states.
    #[arg(long)]
    pub cutoff_two: Option<usize>,
    /// Relative tolerance applied to every check.
    #[arg(long, default_value_t = 1e-6)]
    pub tolerance: f64,
    /// Report file (standard output when absent). The report is JSON.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Rows of numbers with named columns and optional summary values.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Vec<(&'static str, f64)>,
}

impl Table {
    fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
            summary: Vec::new(),
        }
    }

    pub fn write_csv(&self, w: &mut dyn Write) -> io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        for (name, v) in &self.summary {
            writeln!(w, "# {name}={v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        let summary: Map<String, Value> = self.summary.iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        json!({ "columns": self.columns, "rows": self.rows, "summary": summary })
    }

    fn write(&self, out: &OutputArgs) -> Result<()> {
        with_output(out.output.as_ref(), |w| match out.format {
            Format::Csv => Ok(self.write_csv(w)?),
            Format::Json => {
                serde_json::to_writer_pretty(&mut *w, &self.to_json())?;
                Ok(writeln!(w)?)
            }
        })
    }
}

fn with_output(path: Option<&PathBuf>, f: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            f(&mut w)?;
            Ok(w.flush()?)
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            f(&mut w)?;
            Ok(w.flush()?)
        }
    }
}

/// Process exit status for a finished command.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerificationFailed,
    /// The verify suite could not run some checks (for example an inadequate
    /// Fock cutoff).
    VerificationError,
}

/// 1 for bad input, 2 for failures during computation or output.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Domain(_) | Error::Invalid { .. } | Error::Usage(_) | Error::Dimension { .. } | Error::Index { .. } => 1,
        Error::Consistency(_) | Error::CutoffInadequate { .. } | Error::HeraldFailure { .. } | Error::Io(_) | Error::Json(_) => 2,
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Qfunc(a) => cmd_qfunc(a)?.write(&a.out)?,
        Command::Phase(a) => cmd_phase(a)?.write(&a.out)?,
        Command::Evolve(a) => cmd_evolve(a)?.write(&a.out)?,
        Command::Width(a) => cmd_width(a)?.write(&a.out)?,
        Command::Presets(out) => cmd_presets(out)?,
        Command::Verify(a) => {
            let report = run_verify(&VerifyConfig::from_args(a)?);
            with_output(a.output.as_ref(), |w| {
                serde_json::to_writer_pretty(&mut *w, &report)?;
                Ok(writeln!(w)?)
            })?;
            return Ok(report.outcome());
        }
    }
    Ok(Outcome::Success)
}

fn check_points(points: usize) -> Result<()> {
    if points < 3 {
        return Err(Error::invalid("points", format!("{points} is fewer than 3")));
    }
    Ok(())
}

pub fn cmd_qfunc(a: &QfuncArgs) -> Result<Table> {
    if a.grid < 2 {
        return Err(Error::invalid("grid", format!("{} is fewer than 2 samples per axis", a.grid)));
    }
    if !(a.range.is_finite() && a.range > 0.0) {
        return Err(Error::invalid("range", format!("{} is not a positive finite half-width", a.range)));
    }
    if !(a.p1.is_finite() && a.p2.is_finite()) {
        return Err(Error::invalid("p1/p2", "slice momenta must be finite"));
    }
    let spec = a.state.spec()?;
    let repr = q_repr(&spec)?;
    let axis: Vec<f64> = (0..a.grid)
        .map(|i| -a.range + 2.0 * a.range * i as f64 / (a.grid - 1) as f64)
        .collect();
    let points: Vec<(f64, f64)> = axis.iter().flat_map(|&x| axis.iter().map(move |&y| (x, y))).collect();
    let two = spec.is_two_mode();
    let rows = points
        .par_iter()
        .map(|&(x, y)| {
            if two {
                let xi = [x, a.p1, y, a.p2];
                Ok(vec![x, a.p1, y, a.p2, repr.eval(&xi)?])
            } else {
                Ok(vec![x, y, repr.eval(&[x, y])?])
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(if two { vec!["q1", "p1", "q2", "p2", "Q"] } else { vec!["q", "p", "Q"] });
    t.rows = rows;
    Ok(t)
}

pub fn cmd_phase(a: &PhaseArgs) -> Result<Table> {
    let spec = a.state.spec()?;
    let repr = q_repr(&spec)?;
    let two = spec.is_two_mode();
    let points = a.points.unwrap_or(if two { DEFAULT_POINTS_TWO } else { DEFAULT_POINTS });
    check_points(points)?;
    let dist = if two { phase_two_sweep(&repr, points)? } else { phase_single_grid(&repr, points)? };
    let mut t = Table::new(vec![if two { "theta_plus_over_pi" } else { "theta_over_pi" }, "PQ"]);
    t.rows = dist.thetas.iter().zip(&dist.values).map(|(&x, &v)| vec![x / PI, v]).collect();
    t.summary = vec![
        ("peak_theta_over_pi", dist.peak_theta / PI),
        ("peak_value", dist.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)),
        ("width", dist.width),
        ("norm_residual", dist.norm_residual),
    ];
    Ok(t)
}

/// Parses `start:stop:count` or `a,b,c`.
pub fn parse_times(s: &str) -> Result<Vec<f64>> {
    let bad = |why: &str| Error::invalid("t", format!("{s:?}: {why}"));
    let times: Vec<f64> = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:count"));
        }
        let start: f64 = parts[0].trim().parse().map_err(|_| bad("start is not a number"))?;
        let stop: f64 = parts[1].trim().parse().map_err(|_| bad("stop is not a number"))?;
        let count: usize = parts[2].trim().parse().map_err(|_| bad("count is not an integer"))?;
        match count {
            0 => return Err(bad("count must be positive")),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        s.split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| bad("not a number list")))
            .collect::<Result<_>>()?
    };
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(bad("times must be finite and nonnegative"));
    }
    Ok(times)
}

pub fn cmd_evolve(a: &EvolveArgs) -> Result<Table> {
    let spec = a.state.spec()?;
    let repr = q_repr(&spec)?;
    let times = parse_times(&a.t)?;
    let (gammas, angles) = if spec.is_two_mode() {
        (
            vec![a.gamma1.unwrap_or(a.gamma), a.gamma2.unwrap_or(a.gamma)],
            vec![a.theta1_over_pi * PI, a.theta2_over_pi * PI],
        )
    } else {
        if a.gamma1.is_some() || a.gamma2.is_some() {
            return Err(Error::Usage("--gamma1/--gamma2 apply to two-mode states".into()));
        }
        (vec![a.gamma], vec![a.theta_over_pi.unwrap_or(0.5) * PI])
    };
    if angles.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("theta", "angles must be finite"));
    }
    if gammas.iter().any(|&g| !(g.is_finite() && g > 0.0)) {
        return Err(Error::invalid("gamma", "decay rates must be positive and finite"));
    }
    let curve = phase_decay_curve(&repr, &gammas, &times, &angles)?;
    let mut t = Table::new(vec!["gamma_t", "PQ_at_theta"]);
    t.rows = curve.iter().map(|p| vec![p.gamma_t, p.value]).collect();
    Ok(t)
}

pub fn cmd_width(a: &WidthArgs) -> Result<Table> {
    let (lo, hi) = match a.sweep {
        Sweep::Lambda => (a.from.unwrap_or(0.1), a.to.unwrap_or(0.95)),
        Sweep::Tau => (a.from.unwrap_or(0.5), a.to.unwrap_or(1.0)),
    };
    if a.steps < 2 {
        return Err(Error::invalid("steps", format!("{} is fewer than 2", a.steps)));
    }
    let values: Vec<f64> = (0..a.steps).map(|i| lo + (hi - lo) * i as f64 / (a.steps - 1) as f64).collect();
    let specs = values
        .iter()
        .map(|&x| match a.sweep {
            Sweep::Lambda => a.state.spec_with(x, None),
            Sweep::Tau => a.state.spec_with(a.state.lambda, Some(x)),
        })
        .collect::<Result<Vec<_>>>()?;
    if specs.iter().any(StateSpec::is_two_mode) {
        return Err(Error::Usage("width sweeps are defined for single-mode states".into()));
    }
    let mut t = Table::new(vec!["lambda_or_tau", "width"]);
    for (x, spec) in values.iter().zip(&specs) {
        let kernel = SinglePhase::new(&q_repr(spec)?)?;
        t.rows.push(vec![*x, width_about(|th| kernel.at(th), PI / 2.0)?]);
    }
    Ok(t)
}

fn describe(p: Preset) -> String {
    match p {
        Preset::AsymPs(n) => format!("{n}-photon subtraction on mode 1 of a two-mode squeezed vacuum"),
        Preset::AsymPa(n) => format!("{n}-photon addition on mode 1 of a two-mode squeezed vacuum"),
        Preset::SymPs(n) => format!("{n}-photon subtraction on both modes of a two-mode squeezed vacuum"),
        Preset::SymPa(n) => format!("{n}-photon addition on both modes of a two-mode squeezed vacuum"),
        Preset::Pc(n) => format!("{n}-photon catalysis of a single-mode squeezed vacuum"),
        Preset::Ssv => "single-mode squeezed vacuum".into(),
        Preset::Tmsv => "two-mode squeezed vacuum".into(),
    }
}

/// `(name, modes, description)` for every preset at its default order.
pub fn presets_listing() -> Vec<(String, usize, String)> {
    PRESET_NAMES
        .iter()
        .map(|n| {
            let p: Preset = n.parse().expect("preset names parse");
            (n.to_string(), if p.is_two_mode() { 2 } else { 1 }, describe(p))
        })
        .collect()
}

fn cmd_presets(out: &OutputArgs) -> Result<()> {
    let list = presets_listing();
    with_output(out.output.as_ref(), |w| match out.format {
        Format::Csv => {
            writeln!(w, "name,modes,description")?;
            for (name, modes, desc) in &list {
                writeln!(w, "{name},{modes},{desc}")?;
            }
            Ok(())
        }
        Format::Json => {
            let v: Vec<Value> = list
                .iter()
                .map(|(name, modes, desc)| json!({ "name": name, "modes": modes, "description": desc }))
                .collect();
            serde_json::to_writer_pretty(&mut *w, &v)?;
            Ok(writeln!(w)?)
        }
    })
}
