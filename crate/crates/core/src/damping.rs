//! Amplitude damping of Q-functions.
//!
//! Loss with energy transmission `η` maps a Q-function to
//! `Q'(ξ) = ∫ dξ' K(ξ − √η ξ') Q(ξ')` with the Gaussian kernel
//! `K(x) = exp(−|x|² / (2(1−η))) / (2π(1−η))` per mode. The kernel is applied
//! to the generator before the auxiliary derivatives are taken, so the old
//! quadratures integrate out in closed form and the result is again a
//! [`QFormRepr`].

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::husimi::QFormRepr;
use crate::phasedist::{SinglePhase, TwoPhase};
use crate::polyform::GaussPoly;

/// Per-mode decay rates and an elapsed time.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DampingParams {
    gammas: Vec<f64>,
    t: f64,
}

impl DampingParams {
    /// `t = ∞` is allowed and means full decay on every mode with `γ > 0`.
    pub fn new(gammas: Vec<f64>, t: f64) -> Result<Self> {
        if gammas.is_empty() || gammas.len() > 2 {
            return Err(Error::invalid("gamma", format!("{} rates given, expected 1 or 2", gammas.len())));
        }
        for &g in &gammas {
            if !(g.is_finite() && g >= 0.0) {
                return Err(Error::invalid("gamma", format!("{g} is not a finite nonnegative rate")));
            }
        }
        if t.is_nan() || t < 0.0 {
            return Err(Error::invalid("t", format!("{t} is not a nonnegative time")));
        }
        Ok(Self { gammas, t })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn modes(&self) -> usize {
        self.gammas.len()
    }

    /// `exp(−γᵢ t)`.
    pub fn eta(&self, mode: usize) -> f64 {
        let g = self.gammas[mode];
        if g == 0.0 {
            1.0
        } else {
            (-g * self.t).exp()
        }
    }

    pub fn etas(&self) -> Vec<f64> {
        (0..self.modes()).map(|i| self.eta(i)).collect()
    }
}

/// Applies loss with transmissions `etas` (one per mode).
pub fn apply_loss(repr: &QFormRepr, etas: &[f64]) -> Result<QFormRepr> {
    if etas.len() != repr.modes() {
        return Err(Error::Dimension {
            expected: repr.modes(),
            got: etas.len(),
        });
    }
    for &eta in etas {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid("eta", format!("{eta} is outside [0, 1]")));
        }
    }
    if etas.iter().all(|&e| e == 1.0) {
        return Ok(repr.clone());
    }
    if etas.iter().all(|&e| e == 0.0) {
        return Ok(QFormRepr::vacuum(repr.modes()));
    }
    let aux = repr.orders().len();
    let mut generator = repr.generator().clone();
    for (mode, &eta) in etas.iter().enumerate() {
        if eta < 1.0 {
            generator = convolve_mode(&generator, aux + 2 * mode, eta)?;
        }
    }
    QFormRepr::from_generator(repr.modes(), generator, repr.orders().to_vec(), repr.norm_const())
}

/// Convolves the quadratures at `(first, first + 1)` with the loss kernel.
fn convolve_mode(g: &GaussPoly, first: usize, eta: f64) -> Result<GaussPoly> {
    if g.prefactor().max_var().is_some() {
        return Err(Error::Consistency("loss needs a Gaussian generator without polynomial prefactor".into()));
    }
    let n = g.dim();
    let identity: Vec<usize> = (0..n).collect();
    let mut form = g.exponent().embed(n + 2, &identity);
    let w = 1.0 / (2.0 * (1.0 - eta));
    let mut kernel = nalgebra::DMatrix::<C64>::zeros(n + 2, n + 2);
    for c in 0..2 {
        let (old, new) = (first + c, n + c);
        kernel[(new, new)] = C64::new(-w, 0.0);
        kernel[(old, old)] = C64::new(-w * eta, 0.0);
        kernel[(new, old)] = C64::new(w * eta.sqrt(), 0.0);
        kernel[(old, new)] = C64::new(w * eta.sqrt(), 0.0);
    }
    form = form.add(&crate::polyform::QuadraticForm::from_matrix(kernel)?)?;
    let (reduced, factor) = form.integrate_out(&[first, first + 1])?;
    let map: Vec<usize> = (0..n + 2)
        .filter(|&i| i != first && i != first + 1)
        .map(|i| if i >= n { first + (i - n) } else { i })
        .collect();
    let exponent = reduced.embed(n, &map);
    let overall = g.overall() * factor / (2.0 * PI * (1.0 - eta));
    GaussPoly::new(g.prefactor().clone(), exponent, overall)
}

pub fn evolve_q_single(repr: &QFormRepr, d: &DampingParams) -> Result<QFormRepr> {
    if repr.modes() != 1 || d.modes() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: if repr.modes() != 1 { repr.modes() } else { d.modes() },
        });
    }
    apply_loss(repr, &d.etas())
}

pub fn evolve_q_two(repr: &QFormRepr, d: &DampingParams) -> Result<QFormRepr> {
    if repr.modes() != 2 || d.modes() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: if repr.modes() != 2 { repr.modes() } else { d.modes() },
        });
    }
    apply_loss(repr, &d.etas())
}

pub use crate::phasedist::ClosedForm;

/// Printed closed forms of the damped single-mode distributions, evaluated
/// literally in `η`. The square-root ratio of the photon form is merged into
/// one root so that `η = 1` is finite.
pub fn phase_single_damped_closed(variant: ClosedForm, lambda: f64, tau: f64, eta: f64, theta: f64) -> f64 {
    let c2 = (2.0 * theta).cos();
    let (p, m) = (1.0 + eta, 1.0 - eta);
    match variant {
        ClosedForm::SqueezedVacuum => {
            let l2 = lambda * lambda;
            ((1.0 - l2) * (p * p - m * m * l2)).sqrt() / (2.0 * PI * (p - m * l2 + 2.0 * eta * lambda * c2))
        }
        ClosedForm::OnePhoton => {
            let x = lambda * tau;
            let x2 = x * x;
            let ratio = ((p + x * m) / (p - x * m)).sqrt();
            let num = ratio * (1.0 - x2).powf(1.5) * (p.powi(3) - m.powi(3) * x2 - 2.0 * eta * (1.0 - eta * eta) * x * c2);
            let den = 2.0 * PI * (p + m * x) * (p - m * x2 + 2.0 * eta * x * c2).powi(2);
            num / den
        }
    }
}

/// One sample of a decay curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DecayPoint {
    /// `γ₁ t`.
    pub gamma_t: f64,
    pub value: f64,
}

/// `P_Q` at fixed angles as a function of time. `angles` holds one angle per
/// mode.
pub fn phase_decay_curve(repr: &QFormRepr, gammas: &[f64], times: &[f64], angles: &[f64]) -> Result<Vec<DecayPoint>> {
    if gammas.len() != repr.modes() || angles.len() != repr.modes() {
        return Err(Error::Dimension {
            expected: repr.modes(),
            got: if gammas.len() != repr.modes() { gammas.len() } else { angles.len() },
        });
    }
    times
        .par_iter()
        .map(|&t| {
            let d = DampingParams::new(gammas.to_vec(), t)?;
            let damped = apply_loss(repr, &d.etas())?;
            let value = match repr.modes() {
                1 => SinglePhase::new(&damped)?.at(angles[0])?,
                _ => TwoPhase::new(&damped)?.at(angles[0], angles[1])?,
            };
            Ok(DecayPoint {
                gamma_t: gammas[0] * t,
                value,
            })
        })
        .collect()
}
