//! Oracle cross-check suite behind the `verify` command.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use super::{Outcome, VerifyArgs};
use crate::damping::apply_loss;
use crate::error::{Error, Result};
use crate::fock_oracle::{
    kraus_damp, phase_numeric_values, phase_two_numeric, prepare, q_numeric_pure, FockDensity, FockEnsemble,
    FockState, DEFAULT_CUTOFF_SINGLE, DEFAULT_CUTOFF_TWO,
};
use crate::husimi::q_repr;
use crate::phasedist::{
    phase_single_closed, phase_single_grid, phase_two_sweep, phase_two_tmsv_closed, theta_grid, ClosedForm,
    SinglePhase, TwoPhase,
};
use crate::states::{NgOp, Preset, StateSpec, PRESET_NAMES};

const TAUS: [f64; 3] = [0.8, 0.9, 1.0];
const ORDERS: [(u32, u32); 7] = [(0, 0), (0, 1), (1, 0), (0, 2), (2, 0), (1, 1), (2, 2)];
const PAIRS: [((u32, u32), (u32, u32)); 4] = [((0, 1), (0, 1)), ((1, 0), (0, 0)), ((1, 1), (1, 1)), ((0, 2), (2, 0))];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub lambdas: Vec<f64>,
    pub cutoff: usize,
    pub cutoff_two: usize,
    pub tolerance: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            lambdas: vec![0.0, 0.3, 0.6, 0.9],
            cutoff: DEFAULT_CUTOFF_SINGLE,
            cutoff_two: DEFAULT_CUTOFF_TWO,
            tolerance: 1e-6,
        }
    }
}

impl VerifyConfig {
    pub fn from_args(a: &VerifyArgs) -> Result<Self> {
        let mut c = Self::default();
        if let Some(l) = a.lambda {
            if !(0.0..1.0).contains(&l) {
                return Err(Error::invalid("lambda", format!("{l} is outside [0, 1)")));
            }
            c.lambdas = vec![l];
        }
        if !(a.tolerance.is_finite() && a.tolerance > 0.0) {
            return Err(Error::invalid("tolerance", format!("{} is not a positive number", a.tolerance)));
        }
        c.tolerance = a.tolerance;
        for (field, v) in [("cutoff", a.cutoff), ("cutoff-two", a.cutoff_two)] {
            if let Some(n) = v {
                if n < 10 {
                    return Err(Error::invalid(field, format!("{n} is below 10")));
                }
            }
        }
        c.cutoff = a.cutoff.unwrap_or(c.cutoff);
        c.cutoff_two = a.cutoff_two.unwrap_or(c.cutoff_two);
        Ok(c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub status: CheckStatus,
    /// Largest relative error (or infidelity / normalization residual).
    pub max_rel_err: Option<f64>,
    pub tolerance: f64,
    pub cases: usize,
    /// `cutoff_inadequate` or `computation` when the check could not run.
    pub error_class: Option<&'static str>,
    pub message: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn outcome(&self) -> Outcome {
        if self.checks.iter().any(|c| c.status == CheckStatus::Error) {
            Outcome::VerificationError
        } else if self.checks.iter().any(|c| c.status == CheckStatus::Fail) {
            Outcome::VerificationFailed
        } else {
            Outcome::Success
        }
    }
}

/// Running maximum of errors over cases.
#[derive(Default)]
struct Tally {
    worst: f64,
    cases: usize,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        self.worst = self.worst.max(other.worst);
        self.cases += other.cases;
        self
    }

    fn push(&mut self, err: f64) {
        // NaN counts as the worst possible error.
        self.worst = if err.is_nan() { f64::INFINITY } else { self.worst.max(err) };
        self.cases += 1;
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn sum_tallies(parts: Vec<Result<Tally>>) -> Result<Tally> {
    parts.into_iter().try_fold(Tally::default(), |acc, t| Ok(acc.merge(t?)))
}

fn finish(name: &'static str, tolerance: f64, outcome: Result<Tally>) -> CheckResult {
    match outcome {
        Ok(t) => CheckResult {
            name,
            status: if t.worst <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail },
            max_rel_err: Some(t.worst),
            tolerance,
            cases: t.cases,
            error_class: None,
            message: None,
        },
        Err(e) => CheckResult {
            name,
            status: CheckStatus::Error,
            max_rel_err: None,
            tolerance,
            cases: 0,
            error_class: Some(match e {
                Error::CutoffInadequate { .. } => "cutoff_inadequate",
                _ => "computation",
            }),
            message: Some(e.to_string()),
        },
    }
}

fn single_spec(lambda: f64, k: u32, l: u32, tau: f64) -> Result<StateSpec> {
    StateSpec::single(lambda, NgOp::new(k, l, tau)?)
}

/// Subtraction from vacuum never succeeds; such cases are skipped.
fn heralds_vacuum_subtraction(lambda: f64, ops: &[(u32, u32)]) -> bool {
    lambda == 0.0 && ops.iter().any(|&(k, l)| l > k)
}

fn check_ssv_closed(c: &VerifyConfig) -> Result<Tally> {
    let thetas = theta_grid(2001)?;
    let mut t = Tally::default();
    for &lambda in &c.lambdas {
        let kernel = SinglePhase::new(&q_repr(&single_spec(lambda, 0, 0, 1.0)?)?)?;
        for &th in &thetas {
            t.push(rel(kernel.at(th)?, phase_single_closed(ClosedForm::SqueezedVacuum, lambda, 1.0, th)));
        }
    }
    Ok(t)
}

fn check_one_photon_closed(c: &VerifyConfig) -> Result<Tally> {
    let thetas = theta_grid(2001)?;
    let mut t = Tally::default();
    for &lambda in &c.lambdas {
        for tau in TAUS {
            let pa = SinglePhase::new(&q_repr(&single_spec(lambda, 1, 0, tau)?)?)?;
            let ps = if lambda > 0.0 { Some(SinglePhase::new(&q_repr(&single_spec(lambda, 0, 1, tau)?)?)?) } else { None };
            for &th in &thetas {
                let closed = phase_single_closed(ClosedForm::OnePhoton, lambda, tau, th);
                let a = pa.at(th)?;
                t.push(rel(a, closed));
                if let Some(ps) = &ps {
                    let s = ps.at(th)?;
                    t.push(rel(s, closed));
                    t.push(rel(s, a));
                }
            }
        }
    }
    Ok(t)
}

fn check_tmsv_closed(c: &VerifyConfig) -> Result<Tally> {
    let mut t = Tally::default();
    for &lambda in &c.lambdas {
        let spec = StateSpec::two(lambda, NgOp::identity(), NgOp::identity())?;
        let dist = phase_two_sweep(&q_repr(&spec)?, 201)?;
        for (&tp, &v) in dist.thetas.iter().zip(&dist.values) {
            t.push(rel(v, phase_two_tmsv_closed(lambda, tp / 2.0, tp / 2.0)));
        }
    }
    Ok(t)
}

/// Q and phase of every single-mode case against the oracle.
fn check_single_oracle(c: &VerifyConfig) -> (Result<Tally>, Result<Tally>) {
    let points = [[1.0, 0.0], [0.3, -0.8], [-1.5, 1.1], [0.0, 2.5]];
    let thetas = [0.0, 0.4, PI / 2.0, -2.2];
    let cases: Vec<(f64, f64, (u32, u32))> = c
        .lambdas
        .iter()
        .flat_map(|&l| TAUS.iter().flat_map(move |&t| ORDERS.iter().map(move |&o| (l, t, o))))
        .filter(|&(l, _, o)| !heralds_vacuum_subtraction(l, &[o]))
        .collect();
    let results: Vec<Result<(Tally, Tally)>> = cases
        .par_iter()
        .map(|&(lambda, tau, (k, l))| {
            let spec = single_spec(lambda, k, l, tau)?;
            let repr = q_repr(&spec)?;
            let state = prepare(&spec, c.cutoff)?.state;
            let mut q = Tally::default();
            for xi in points {
                q.push(rel(repr.eval(&xi)?, q_numeric_pure(&state, &xi)?));
            }
            let kernel = SinglePhase::new(&repr)?;
            let numeric = phase_numeric_values(&FockEnsemble::pure(&state), &thetas);
            let mut p = Tally::default();
            for (&th, &b) in thetas.iter().zip(&numeric) {
                p.push(rel(kernel.at(th)?, b));
            }
            Ok((q, p))
        })
        .collect();
    split(results)
}

fn check_two_oracle(c: &VerifyConfig) -> (Result<Tally>, Result<Tally>) {
    let points = [[0.5, 0.0, 0.5, 0.0], [0.3, -0.4, -0.2, 0.9], [-1.0, 0.5, 0.7, 0.2]];
    let angles = [(0.0, 0.0), (0.3, -0.9)];
    let cases: Vec<(f64, f64, ((u32, u32), (u32, u32)))> = c
        .lambdas
        .iter()
        .flat_map(|&l| TAUS.iter().flat_map(move |&t| PAIRS.iter().map(move |&p| (l, t, p))))
        .filter(|&(l, _, (a, b))| !heralds_vacuum_subtraction(l, &[a, b]))
        .collect();
    let results: Vec<Result<(Tally, Tally)>> = cases
        .par_iter()
        .map(|&(lambda, tau, (a, b))| {
            let t2 = if b == (0, 0) { 1.0 } else { tau };
            let spec = StateSpec::two(lambda, NgOp::new(a.0, a.1, tau)?, NgOp::new(b.0, b.1, t2)?)?;
            let repr = q_repr(&spec)?;
            let state = prepare(&spec, c.cutoff_two)?.state;
            let mut q = Tally::default();
            for xi in points {
                q.push(rel(repr.eval(&xi)?, q_numeric_pure(&state, &xi)?));
            }
            let mut p = Tally::default();
            if tau == 0.9 {
                let kernel = TwoPhase::new(&repr)?;
                for (t1, t2) in angles {
                    p.push(rel(kernel.at(t1, t2)?, phase_two_numeric(&state, t1, t2)?));
                }
            }
            Ok((q, p))
        })
        .collect();
    split(results)
}

fn split(results: Vec<Result<(Tally, Tally)>>) -> (Result<Tally>, Result<Tally>) {
    let mut first = Vec::new();
    let mut second = Vec::new();
    for r in results {
        match r {
            Ok((a, b)) => {
                first.push(Ok(a));
                second.push(Ok(b));
            }
            Err(e) => {
                let msg = e.to_string();
                let again = match &e {
                    Error::CutoffInadequate { cutoff, tail } => Error::CutoffInadequate { cutoff: *cutoff, tail: *tail },
                    _ => Error::Consistency(msg),
                };
                first.push(Err(e));
                second.push(Err(again));
            }
        }
    }
    (sum_tallies(first), sum_tallies(second))
}

fn check_damped_oracle(c: &VerifyConfig) -> Result<Tally> {
    let thetas = [0.0, PI / 2.0];
    let cases: Vec<(f64, (u32, u32), f64)> = c
        .lambdas
        .iter()
        .filter(|&&l| l > 0.0)
        .flat_map(|&l| [(0, 0), (0, 1), (1, 1)].into_iter().flat_map(move |o| [0.5, 2.0].into_iter().map(move |gt| (l, o, gt))))
        .collect();
    let parts = cases
        .par_iter()
        .map(|&(lambda, (k, l), gt)| {
            let spec = single_spec(lambda, k, l, 0.9)?;
            let repr = q_repr(&spec)?;
            let rho = FockDensity::from_pure(&prepare(&spec, c.cutoff)?.state);
            let damped = SinglePhase::new(&apply_loss(&repr, &[(-gt).exp()])?)?;
            let ens = FockEnsemble::from_density(&kraus_damp(&rho, 1.0, gt)?)?;
            let mut t = Tally::default();
            for (&th, &b) in thetas.iter().zip(&phase_numeric_values(&ens, &thetas)) {
                t.push(rel(damped.at(th)?, b));
            }
            Ok(t)
        })
        .collect();
    sum_tallies(parts)
}

fn check_normalization(c: &VerifyConfig) -> Result<Tally> {
    let mut specs = Vec::new();
    for &lambda in &c.lambdas {
        for name in PRESET_NAMES {
            let p: Preset = name.parse()?;
            if lambda == 0.0 && matches!(p, Preset::AsymPs(_) | Preset::SymPs(_)) {
                continue;
            }
            specs.push(p.spec(lambda, 0.9, 0.9)?);
        }
    }
    let parts = specs
        .par_iter()
        .flat_map(|spec| [1.0, (-1.0f64).exp()].into_par_iter().map(move |eta| (spec, eta)))
        .map(|(spec, eta)| {
            let repr = apply_loss(&q_repr(spec)?, &vec![eta; spec.modes()])?;
            let residual = if spec.is_two_mode() {
                phase_two_sweep(&repr, 201)?.norm_residual
            } else {
                phase_single_grid(&repr, 2001)?.norm_residual
            };
            let mut t = Tally::default();
            t.push(residual);
            Ok(t)
        })
        .collect();
    sum_tallies(parts)
}

fn check_coherent_damping() -> Result<Tally> {
    let mut t = Tally::default();
    for alpha in [0.5, 1.0, 2.0] {
        for gt in [0.1, 1.0, 5.0] {
            let start = FockDensity::from_pure(&FockState::coherent(C64::new(alpha, 0.0), 80));
            let target = FockState::coherent(C64::new(alpha * (-gt / 2.0f64).exp(), 0.0), 80);
            t.push(1.0 - kraus_damp(&start, 1.0, gt)?.fidelity_with(&target));
        }
    }
    Ok(t)
}

pub fn run_verify(c: &VerifyConfig) -> VerifyReport {
    let tol = c.tolerance;
    let (q1, p1) = check_single_oracle(c);
    let (q2, p2) = check_two_oracle(c);
    let checks = vec![
        finish("ssv_phase_closed_form", tol, check_ssv_closed(c)),
        finish("one_photon_phase_closed_form", tol, check_one_photon_closed(c)),
        finish("tmsv_phase_closed_form", tol, check_tmsv_closed(c)),
        finish("single_mode_q_oracle", tol, q1),
        finish("single_mode_phase_oracle", tol, p1),
        finish("two_mode_q_oracle", tol, q2),
        finish("two_mode_phase_oracle", tol, p2),
        finish("damped_phase_oracle", tol, check_damped_oracle(c)),
        finish("normalization", tol, check_normalization(c)),
        finish("coherent_damping_infidelity", tol, check_coherent_damping()),
    ];
    VerifyReport {
        passed: checks.iter().all(|c| c.status == CheckStatus::Pass),
        config: c.clone(),
        checks,
    }
}
