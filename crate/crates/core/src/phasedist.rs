//! Husimi phase distributions: radial integrals of Q in polar coordinates.
//!
//! Single mode: substituting `(q, p) = a(cos θ, sin θ)` turns the Q-function
//! into `Σₙ cₙ(θ) aⁿ e^{−κ(θ)a²}`, and each radial moment is a Γ-function.
//! Two modes: with `a₁ = R cos φ`, `a₂ = R sin φ` the radial integral is again
//! a Γ-moment; the remaining `φ ∈ [0, π/2]` integral is done by
//! double-exponential quadrature.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::husimi::{real_part, QFormRepr};

/// Default number of θ samples for single-mode distributions.
pub const DEFAULT_POINTS: usize = 2001;
/// Default number of samples per angle for two-mode grids.
pub const DEFAULT_POINTS_TWO: usize = 201;

/// `Γ(n/2 + 1)`.
pub fn gamma_half(n: usize) -> f64 {
    let mut g = if n.is_multiple_of(2) { 1.0 } else { PI.sqrt() / 2.0 };
    let mut x = if n.is_multiple_of(2) { 1.0 } else { 1.5 };
    let target = n as f64 / 2.0 + 1.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Sampled phase distribution on the closed grid `θᵢ = −π + 2πi/(n−1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDistribution {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    /// `|∫ P dθ − 1|` (times the mass scale given at construction).
    pub norm_residual: f64,
    pub peak_theta: f64,
    pub width: f64,
}

/// Closed uniform grid over `[−π, π]`.
pub fn theta_grid(points: usize) -> Result<Vec<f64>> {
    if points < 3 {
        return Err(Error::invalid("points", format!("{points} is fewer than 3")));
    }
    let last = (points - 1) as f64;
    Ok((0..points).map(|i| PI * ((2 * i) as f64 - last) / last).collect())
}

impl PhaseDistribution {
    /// Builds the distribution and its summary. `mass_scale` multiplies the
    /// θ-integral before comparing with 1 (it is `2π` for a θ₊ sweep of a
    /// two-mode distribution).
    pub fn from_samples(thetas: Vec<f64>, values: Vec<f64>, mass_scale: f64) -> Result<Self> {
        if thetas.len() != values.len() {
            return Err(Error::Dimension {
                expected: thetas.len(),
                got: values.len(),
            });
        }
        if thetas.len() < 3 {
            return Err(Error::invalid("grid", "a phase distribution needs at least 3 samples"));
        }
        let h = (thetas[thetas.len() - 1] - thetas[0]) / (thetas.len() - 1) as f64;
        let uniform = thetas
            .windows(2)
            .all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1e-300));
        if !(uniform && h > 0.0) {
            return Err(Error::invalid("grid", "θ samples must be sorted and uniformly spaced"));
        }
        let mass = trapezoid(&values, h);
        let (peak_theta, width) = summary_of(&thetas, &values)?;
        Ok(Self {
            thetas,
            values,
            norm_residual: (mass * mass_scale - 1.0).abs(),
            peak_theta,
            width,
        })
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }
}

/// `(peak_theta, width, norm_residual)`.
pub fn summarize(dist: &PhaseDistribution) -> (f64, f64, f64) {
    (dist.peak_theta, dist.width, dist.norm_residual)
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// Peak by argmax (ties: smallest `|θ|`, then positive θ) and the windowed
/// second moment about it.
fn summary_of(thetas: &[f64], values: &[f64]) -> Result<(f64, f64)> {
    if thetas.is_empty() {
        return Err(Error::invalid("grid", "empty phase distribution"));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let tie = 1e-12 * max.abs();
    let mut best: Option<usize> = None;
    for (i, (&t, &v)) in thetas.iter().zip(values).enumerate() {
        if v < max - tie {
            continue;
        }
        best = match best {
            None => Some(i),
            Some(b) => {
                let (tb, ta) = (thetas[b], t);
                let closer = ta.abs() < tb.abs() - 1e-12
                    || ((ta.abs() - tb.abs()).abs() <= 1e-12 && ta > tb);
                Some(if closer { i } else { b })
            }
        };
    }
    let peak = thetas[best.expect("nonempty")];
    let width = windowed_width_on_grid(thetas, values, peak);
    Ok((peak, width))
}

/// Width on a grid that covers one full period: the grid is treated as
/// periodic (the duplicated endpoint is dropped when present).
fn windowed_width_on_grid(thetas: &[f64], values: &[f64], center: f64) -> f64 {
    let n = thetas.len();
    let h = (thetas[n - 1] - thetas[0]) / (n - 1) as f64;
    let closed = ((thetas[n - 1] - thetas[0]) - 2.0 * PI).abs() < 1e-9;
    let period_len = if closed { n - 1 } else { n };
    let start = thetas[0];
    let sample = |x: f64| {
        // Linear interpolation on the periodic grid.
        let pos = (x - start).rem_euclid(2.0 * PI) / h;
        let i = pos.floor() as usize % period_len;
        let frac = pos - pos.floor();
        let j = (i + 1) % period_len;
        values[i] * (1.0 - frac) + values[j] * frac
    };
    let half = PI / 2.0;
    let steps = (half / h).round().max(1.0) as i64;
    let dh = half / steps as f64;
    let mut mass = 0.0;
    let mut second = 0.0;
    for k in -steps..=steps {
        let w = if k.abs() == steps { 0.5 } else { 1.0 };
        let d = k as f64 * dh;
        let v = sample(center + d);
        mass += w * v;
        second += w * v * d * d;
    }
    (second / mass).sqrt()
}

/// Width about `center` for a distribution given as a function, with
/// Gauss–Legendre quadrature on the window `center ± π/2`.
pub fn width_about(f: impl Fn(f64) -> Result<f64> + Sync, center: f64) -> Result<f64> {
    let rule = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(64).unwrap());
    let panels = 8;
    let h = PI / panels as f64;
    let nodes: Vec<(f64, f64)> = (0..panels)
        .flat_map(|p| {
            let lo = -PI / 2.0 + p as f64 * h;
            rule.nodes()
                .zip(rule.weights())
                .map(move |(x, w)| (lo + 0.5 * h * (x + 1.0), 0.5 * h * w))
                .collect::<Vec<_>>()
        })
        .collect();
    let vals: Vec<f64> = nodes
        .par_iter()
        .map(|&(d, _)| f(center + d))
        .collect::<Result<_>>()?;
    let mut mass = 0.0;
    let mut second = 0.0;
    for ((d, w), v) in nodes.iter().zip(vals) {
        mass += w * v;
        second += w * v * d * d;
    }
    Ok((second / mass).sqrt())
}

/// Radial moments of a single-mode representation.
#[derive(Clone, Debug)]
pub struct SinglePhase {
    /// `(power of cos θ, power of sin θ, coefficient)` grouped by total degree.
    by_degree: Vec<Vec<(u32, u32, f64)>>,
    quad: [[C64; 2]; 2],
    scale: C64,
}

impl SinglePhase {
    pub fn new(repr: &QFormRepr) -> Result<Self> {
        if repr.modes() != 1 {
            return Err(Error::Dimension {
                expected: 1,
                got: repr.modes(),
            });
        }
        let num = repr.numerator();
        let exp = num.exponent();
        ensure_no_linear(exp.linear().iter())?;
        let by_degree = real_terms(num.prefactor(), |m| {
            let e = [m.power(0), m.power(1)];
            (e[0] + e[1], e)
        })?
        .into_iter()
        .map(|terms| terms.into_iter().map(|(e, c)| (e[0], e[1], c)).collect())
        .collect();
        let m = exp.matrix();
        Ok(Self {
            by_degree,
            quad: [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]],
            scale: num.overall() * exp.constant().exp() / repr.norm_const(),
        })
    }

    pub fn at(&self, theta: f64) -> Result<f64> {
        let (s, c) = theta.sin_cos();
        let kappa = -(self.quad[0][0] * c * c + (self.quad[0][1] + self.quad[1][0]) * c * s + self.quad[1][1] * s * s);
        if !(kappa.re > 0.0) {
            return Err(Error::domain(format!("radial exponent {kappa} is not decaying at θ = {theta}")));
        }
        let cos_pows = powers(c, self.by_degree.len());
        let sin_pows = powers(s, self.by_degree.len());
        let root = kappa.sqrt();
        let mut total = C64::default();
        let mut k_pow = kappa; // κ^{n/2 + 1}
        for (n, terms) in self.by_degree.iter().enumerate() {
            if !terms.is_empty() {
                let cn: f64 = terms
                    .iter()
                    .map(|&(i, j, coef)| coef * cos_pows[i as usize] * sin_pows[j as usize])
                    .sum();
                total += cn * gamma_half(n) / (2.0 * k_pow);
            }
            k_pow *= root;
        }
        real_part(total * self.scale, "phase distribution")
    }
}

fn powers(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 1.0;
    for _ in 0..=n {
        out.push(acc);
        acc *= x;
    }
    out
}

fn ensure_no_linear<'a>(linear: impl Iterator<Item = &'a C64>) -> Result<()> {
    for l in linear {
        if l.norm() > 1e-300 {
            return Err(Error::Consistency(
                "Q-function exponent has a linear term; parity is broken".into(),
            ));
        }
    }
    Ok(())
}

/// Prefactor coefficients as reals, grouped by a degree key. The polynomial
/// is real on real arguments, so imaginary parts must vanish up to rounding.
fn real_terms<K>(
    poly: &crate::polyform::Poly,
    key: impl Fn(&crate::polyform::Monomial) -> (u32, K),
) -> Result<Vec<Vec<(K, f64)>>> {
    let max = poly.terms().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let mut out: Vec<Vec<(K, f64)>> = Vec::new();
    for (m, c) in poly.terms() {
        if c.im.abs() > 1e-9 * max {
            return Err(Error::Consistency(format!(
                "Q-function polynomial has a complex coefficient {c} (largest {max:.3e})"
            )));
        }
        let (d, k) = key(m);
        let d = d as usize;
        if out.len() <= d {
            out.resize_with(d + 1, Vec::new);
        }
        out[d].push((k, c.re));
    }
    Ok(out)
}

/// `P_Q(θ)` of a single-mode representation.
pub fn phase_single(repr: &QFormRepr, theta: f64) -> Result<f64> {
    SinglePhase::new(repr)?.at(theta)
}

/// `P_Q` sampled on the closed grid over `[−π, π]`.
pub fn phase_single_grid(repr: &QFormRepr, points: usize) -> Result<PhaseDistribution> {
    let kernel = SinglePhase::new(repr)?;
    let thetas = theta_grid(points)?;
    let values = thetas.par_iter().map(|&t| kernel.at(t)).collect::<Result<Vec<_>>>()?;
    PhaseDistribution::from_samples(thetas, values, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClosedForm {
    SqueezedVacuum,
    /// One subtracted or one added photon (identical distributions).
    OnePhoton,
}

/// Printed closed forms of the single-mode distributions.
pub fn phase_single_closed(variant: ClosedForm, lambda: f64, tau: f64, theta: f64) -> f64 {
    let c2 = (2.0 * theta).cos();
    match variant {
        ClosedForm::SqueezedVacuum => (1.0 - lambda * lambda).sqrt() / (2.0 * PI * (lambda * c2 + 1.0)),
        ClosedForm::OnePhoton => {
            let x = lambda * tau;
            (1.0 - x * x).powf(1.5) / (2.0 * PI * (x * c2 + 1.0).powi(2))
        }
    }
}

/// Printed closed form of the two-mode squeezed vacuum distribution.
pub fn phase_two_tmsv_closed(lambda: f64, theta1: f64, theta2: f64) -> f64 {
    let c1 = (theta1 + theta2).cos();
    let c0 = 1.0 - lambda * lambda * c1 * c1;
    let root = c0.sqrt();
    (1.0 - lambda * lambda) * (c1 * lambda * (2.0 * (c1 * lambda / root).atan() + PI) + 2.0 * root)
        / (8.0 * PI * PI * c0.powf(1.5))
}

/// Two-mode radial integration kernel.
#[derive(Clone, Debug)]
pub struct TwoPhase {
    /// `([q₁, p₁, q₂, p₂] powers, coefficient)` grouped by total degree.
    by_degree: Vec<Vec<([u32; 4], f64)>>,
    quad: [[f64; 4]; 4],
    scale: f64,
}

impl TwoPhase {
    pub fn new(repr: &QFormRepr) -> Result<Self> {
        if repr.modes() != 2 {
            return Err(Error::Dimension {
                expected: 2,
                got: repr.modes(),
            });
        }
        let num = repr.numerator();
        let exp = num.exponent();
        ensure_no_linear(exp.linear().iter())?;
        let by_degree = real_terms(num.prefactor(), |m| {
            let e = [m.power(0), m.power(1), m.power(2), m.power(3)];
            (e.iter().sum(), e)
        })?;
        let m = exp.matrix();
        let mut quad = [[0.0; 4]; 4];
        for (i, row) in quad.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = real_part(m[(i, j)], "Q-function exponent")?;
            }
        }
        let scale = real_part(num.overall() * exp.constant().exp(), "Q-function scale")? / repr.norm_const();
        Ok(Self { by_degree, quad, scale })
    }

    pub fn at(&self, theta1: f64, theta2: f64) -> Result<f64> {
        let (s1, c1) = theta1.sin_cos();
        let (s2, c2) = theta2.sin_cos();
        let d1 = [c1, s1];
        let d2 = [c2, s2];
        let form = |a: &[f64; 2], b: &[f64; 2], oa: usize, ob: usize| {
            let mut acc = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    acc += a[i] * self.quad[oa + i][ob + j] * b[j];
                }
            }
            acc
        };
        let k1 = -form(&d1, &d1, 0, 0);
        let k2 = -form(&d2, &d2, 2, 2);
        let chi = 2.0 * form(&d1, &d2, 0, 2);
        // Positive definiteness of [[k1, −χ/2], [−χ/2, k2]].
        if !(k1 > 0.0 && k2 > 0.0 && 4.0 * k1 * k2 > chi * chi) {
            return Err(Error::domain(format!(
                "radial exponent is not negative definite at (θ₁, θ₂) = ({theta1}, {theta2})"
            )));
        }

        // c_{mn}: coefficient of a₁^m a₂^n.
        let max_deg = self.by_degree.len();
        let pc1 = powers(c1, max_deg);
        let ps1 = powers(s1, max_deg);
        let pc2 = powers(c2, max_deg);
        let ps2 = powers(s2, max_deg);
        let mut cmn = vec![vec![0.0; max_deg + 1]; max_deg + 1];
        for terms in &self.by_degree {
            for &(e, coef) in terms {
                let m = (e[0] + e[1]) as usize;
                let n = (e[2] + e[3]) as usize;
                cmn[m][n] += coef * pc1[e[0] as usize] * ps1[e[1] as usize] * pc2[e[2] as usize] * ps2[e[3] as usize];
            }
        }
        let gammas: Vec<f64> = (0..=2 * max_deg + 2).map(gamma_half).collect();
        let integrand = |phi: f64| {
            let (sp, cp) = phi.sin_cos();
            let g = k1 * cp * cp + k2 * sp * sp - chi * cp * sp;
            let inv_root = 1.0 / g.sqrt();
            let pc = powers(cp, max_deg + 1);
            let ps = powers(sp, max_deg + 1);
            let mut total = 0.0;
            let mut g_pow = inv_root.powi(4); // g^{−(d/2 + 2)} for d = 0
            for d in 0..max_deg.max(1) {
                let mut acc = 0.0;
                for m in 0..=d {
                    let n = d - m;
                    let c = cmn[m][n];
                    if c != 0.0 {
                        acc += c * pc[m + 1] * ps[n + 1];
                    }
                }
                // ∫₀^∞ R^{d+3} e^{−gR²} dR = Γ(d/2 + 2) / (2 g^{d/2+2})
                total += acc * gammas[d + 2] * 0.5 * g_pow;
                g_pow *= inv_root;
            }
            total
        };
        let out = quadrature::integrate(integrand, 0.0, PI / 2.0, 1e-14 / self.scale.abs().max(1e-300));
        Ok(out.integral * self.scale)
    }
}

/// `P_Q(θ₁, θ₂)` of a two-mode representation.
pub fn phase_two(repr: &QFormRepr, theta1: f64, theta2: f64) -> Result<f64> {
    TwoPhase::new(repr)?.at(theta1, theta2)
}

/// Sweep of `θ₊` over `[−π, π]` with `θ₁ = θ₂ = θ₊/2`. Since the two-mode
/// distribution depends on `θ₊` only, `2π ∫ P dθ₊ = 1`.
pub fn phase_two_sweep(repr: &QFormRepr, points: usize) -> Result<PhaseDistribution> {
    let kernel = TwoPhase::new(repr)?;
    let thetas = theta_grid(points)?;
    let values = thetas
        .par_iter()
        .map(|&t| kernel.at(t / 2.0, t / 2.0))
        .collect::<Result<Vec<_>>>()?;
    PhaseDistribution::from_samples(thetas, values, 2.0 * PI)
}

/// Two-mode distribution on a `points × points` closed grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseDistribution2D {
    pub thetas: Vec<f64>,
    /// Row-major: `values[i * n + j] = P(θᵢ, θⱼ)`.
    pub values: Vec<f64>,
    pub norm_residual: f64,
}

pub fn phase_two_grid(repr: &QFormRepr, points: usize) -> Result<PhaseDistribution2D> {
    let kernel = TwoPhase::new(repr)?;
    let thetas = theta_grid(points)?;
    let n = thetas.len();
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| kernel.at(thetas[idx / n], thetas[idx % n]))
        .collect::<Result<Vec<_>>>()?;
    let h = 2.0 * PI / (n - 1) as f64;
    let weight = |i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
    let mass: f64 = (0..n * n)
        .map(|idx| weight(idx / n) * weight(idx % n) * values[idx])
        .sum::<f64>()
        * h
        * h;
    Ok(PhaseDistribution2D {
        thetas,
        values,
        norm_residual: (mass - 1.0).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::husimi::q_repr;
    use crate::states::{NgOp, StateSpec};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn single(lambda: f64, k: u32, l: u32, tau: f64) -> QFormRepr {
        q_repr(&StateSpec::single(lambda, NgOp::new(k, l, tau).unwrap()).unwrap()).unwrap()
    }

    fn two(lambda: f64, a: (u32, u32, f64), b: (u32, u32, f64)) -> QFormRepr {
        q_repr(
            &StateSpec::two(
                lambda,
                NgOp::new(a.0, a.1, a.2).unwrap(),
                NgOp::new(b.0, b.1, b.2).unwrap(),
            )
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gamma_half_values() {
        assert_eq!(gamma_half(0), 1.0);
        assert_relative_eq!(gamma_half(1), PI.sqrt() / 2.0);
        assert_eq!(gamma_half(4), 2.0);
        assert_relative_eq!(gamma_half(5), 15.0 * PI.sqrt() / 8.0, max_relative = 1e-15);
    }

    #[test]
    fn vacuum_is_uniform() {
        let r = single(0.0, 0, 0, 1.0);
        for t in [-3.0, -1.0, 0.0, 0.4, 2.9] {
            assert_relative_eq!(phase_single(&r, t).unwrap(), 1.0 / (2.0 * PI), max_relative = 1e-15);
        }
    }

    #[test]
    fn reference_values() {
        let ssv = single(0.9, 0, 0, 1.0);
        assert_relative_eq!(phase_single(&ssv, PI / 2.0).unwrap(), 0.19f64.sqrt() / (2.0 * PI * 0.1), max_relative = 1e-12);
        assert_relative_eq!(0.19f64.sqrt() / (2.0 * PI * 0.1), 0.69374, epsilon = 1e-5);
        let ps = single(0.9, 0, 1, 0.9);
        let expected = (1.0 - 0.81f64.powi(2)).powf(1.5) / (2.0 * PI * 0.19f64.powi(2));
        assert_relative_eq!(phase_single(&ps, PI / 2.0).unwrap(), expected, max_relative = 1e-12);
        assert!((expected - 0.889).abs() < 1e-3);
    }

    #[test]
    fn closed_form_reference_values() {
        assert_relative_eq!(phase_single_closed(ClosedForm::SqueezedVacuum, 0.0, 1.0, 1.3), 1.0 / (2.0 * PI));
        assert_relative_eq!(phase_single_closed(ClosedForm::SqueezedVacuum, 0.9, 1.0, 0.0), 0.036513, epsilon = 1e-6);
        assert_relative_eq!(phase_single_closed(ClosedForm::OnePhoton, 0.0, 0.5, 0.7), 1.0 / (2.0 * PI));
        assert_relative_eq!(phase_two_tmsv_closed(0.0, 0.3, 1.2), 1.0 / (4.0 * PI * PI), max_relative = 1e-15);
        assert_relative_eq!(phase_two_tmsv_closed(0.9, PI / 4.0, PI / 4.0), 0.19 / (4.0 * PI * PI), max_relative = 1e-12);
    }

    #[test]
    fn single_mode_matches_closed_forms() {
        for lambda in [0.0, 0.3, 0.6, 0.9] {
            let ssv = SinglePhase::new(&single(lambda, 0, 0, 1.0)).unwrap();
            let ps = SinglePhase::new(&single(lambda.max(0.1), 0, 1, 0.9)).unwrap();
            let pa = SinglePhase::new(&single(lambda.max(0.1), 1, 0, 0.9)).unwrap();
            for t in theta_grid(101).unwrap() {
                let a = ssv.at(t).unwrap();
                let b = phase_single_closed(ClosedForm::SqueezedVacuum, lambda, 1.0, t);
                assert!((a - b).abs() < 1e-10 * b);
                let c = phase_single_closed(ClosedForm::OnePhoton, lambda.max(0.1), 0.9, t);
                assert!((ps.at(t).unwrap() - c).abs() < 1e-10 * c);
                assert!((pa.at(t).unwrap() - c).abs() < 1e-10 * c);
            }
        }
    }

    #[test]
    fn grid_summary_of_squeezed_vacuum() {
        let d = phase_single_grid(&single(0.9, 0, 0, 1.0), DEFAULT_POINTS).unwrap();
        assert!(d.norm_residual < 1e-8);
        assert_relative_eq!(d.peak_theta, PI / 2.0, epsilon = 1e-12);
        let uniform = phase_single_grid(&single(0.0, 0, 0, 1.0), DEFAULT_POINTS).unwrap();
        assert_relative_eq!(uniform.width, PI / (2.0 * 3f64.sqrt()), max_relative = 1e-6);
        assert_relative_eq!(uniform.peak_theta, 0.0);
    }

    #[test]
    fn width_function_and_grid_agree() {
        let r = single(0.9, 0, 1, 0.9);
        let k = SinglePhase::new(&r).unwrap();
        let d = phase_single_grid(&r, DEFAULT_POINTS).unwrap();
        let w = width_about(|t| k.at(t), PI / 2.0).unwrap();
        assert_relative_eq!(d.width, w, max_relative = 1e-6);
        let ssv = phase_single_grid(&single(0.9, 0, 0, 1.0), DEFAULT_POINTS).unwrap();
        assert!(d.width < ssv.width);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PhaseDistribution::from_samples(vec![0.0, 1.0, 3.0], vec![1.0; 3], 1.0).is_err());
        assert!(PhaseDistribution::from_samples(vec![0.0, 1.0], vec![1.0; 2], 1.0).is_err());
        assert!(theta_grid(2).is_err());
    }

    #[test]
    fn two_mode_vacuum_and_tmsv() {
        let vac = TwoPhase::new(&two(0.0, (0, 0, 1.0), (0, 0, 1.0))).unwrap();
        assert_relative_eq!(vac.at(0.3, -1.0).unwrap(), 1.0 / (4.0 * PI * PI), max_relative = 1e-12);
        let t = TwoPhase::new(&two(0.9, (0, 0, 1.0), (0, 0, 1.0))).unwrap();
        for tp in [-3.0, -1.0, 0.0, 0.5, 2.0] {
            let v = t.at(tp / 2.0, tp / 2.0).unwrap();
            let c = phase_two_tmsv_closed(0.9, tp / 2.0, tp / 2.0);
            assert!((v - c).abs() < 1e-9 * c, "θ₊={tp}: {v} vs {c}");
        }
    }

    #[test]
    fn two_mode_normalisation() {
        let d = phase_two_grid(&two(0.6, (0, 1, 0.9), (0, 1, 0.9)), 41).unwrap();
        assert!(d.norm_residual < 1e-5, "{}", d.norm_residual);
        let s = phase_two_sweep(&two(0.9, (0, 1, 0.9), (0, 0, 1.0)), 401).unwrap();
        assert!(s.norm_residual < 1e-6, "{}", s.norm_residual);
        assert_relative_eq!(s.peak_theta, 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn single_mode_symmetries(lambda in 0.05f64..0.95, tau in 0.5f64..=1.0, k in 0u32..3, l in 0u32..3, theta in -PI..PI) {
            prop_assume!(!(tau == 1.0 && k != l && k > 0 && l > 0));
            let r = SinglePhase::new(&single(lambda, k, l, tau)).unwrap();
            let v = r.at(theta).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert!((v - r.at(-theta).unwrap()).abs() < 1e-12 * v.max(1e-300) + 1e-15);
            prop_assert!((v - r.at(theta + PI).unwrap()).abs() < 1e-12 * v.max(1e-300) + 1e-15);
        }

        #[test]
        fn two_mode_depends_on_sum_only(lambda in 0.1f64..0.9, tau in 0.6f64..=1.0, t1 in -PI..PI, t2 in -PI..PI, delta in -1.0f64..1.0) {
            let r = TwoPhase::new(&two(lambda, (0, 1, tau), (1, 0, tau))).unwrap();
            let a = r.at(t1, t2).unwrap();
            let b = r.at(t1 + delta, t2 - delta).unwrap();
            prop_assert!((a - b).abs() < 1e-9 * a, "{} vs {}", a, b);
        }
    }
}
