//! Husimi Q-functions of the heralded squeezed states.
//!
//! `Q(ξ) = pref · F̂ exp(ξᵀA₁ξ + uᵀA₂ξ + uᵀA₃u) / F̂ exp(uᵀA₄u)`, where `F̂`
//! differentiates the auxiliary variables `u` to the orders set by the ladder
//! operations and evaluates at `u = 0`. The numerator is carried with `ξ`
//! symbolic so that the result is again a polynomial times a Gaussian.
//!
//! Only auxiliary variables with a nonzero order enter the generator. For a
//! pure subtraction (or addition) on a mode, its auxiliary variables are
//! rescaled by `1/√(1−τ)`; the ratio is unchanged and the ideal limit `τ → 1`
//! stays finite.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::polyform::{derivative_at_zero, GaussPoly, QuadraticForm};
use crate::states::{EntryTable, StateSpec};

/// Allowed `|Im Q| / |Re Q|` before a complex residue is treated as a bug.
const IMAG_TOLERANCE: f64 = 1e-10;

/// Q-function in normal form.
///
/// `Q(ξ) = Re numerator(ξ) / norm_const`. The generator over
/// `(active auxiliary variables, ξ)` is kept so that channels acting on `ξ`
/// can be applied before the derivatives are taken.
#[derive(Clone, Debug)]
pub struct QFormRepr {
    modes: usize,
    generator: GaussPoly,
    orders: Vec<u32>,
    numerator: GaussPoly,
    norm_const: f64,
}

impl QFormRepr {
    /// Builds the representation from a generator whose first
    /// `orders.len()` variables are auxiliary and the rest quadratures.
    pub(crate) fn from_generator(
        modes: usize,
        generator: GaussPoly,
        orders: Vec<u32>,
        norm_const: f64,
    ) -> Result<Self> {
        let aux = orders.len();
        let xi_dim = 2 * modes;
        if generator.dim() != aux + xi_dim {
            return Err(Error::Dimension {
                expected: aux + xi_dim,
                got: generator.dim(),
            });
        }
        let pairs: Vec<(usize, u32)> = orders.iter().copied().enumerate().collect();
        let keep: Vec<usize> = (aux..aux + xi_dim).collect();
        let numerator = generator.eliminate(&pairs)?.restrict(&keep)?;
        Ok(Self {
            modes,
            generator,
            orders,
            numerator,
            norm_const,
        })
    }

    /// Vacuum on one or two modes.
    pub fn vacuum(modes: usize) -> Self {
        let dim = 2 * modes;
        let exponent = QuadraticForm::from_matrix(DMatrix::identity(dim, dim) * C64::new(-0.5, 0.0))
            .expect("square matrix");
        let g = GaussPoly::from_exponent(exponent);
        Self::from_generator(modes, g, Vec::new(), (2.0 * PI).powi(modes as i32))
            .expect("vacuum generator is well formed")
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn xi_dim(&self) -> usize {
        2 * self.modes
    }

    /// `F̂`-reduced numerator as a polynomial times a Gaussian in `ξ`.
    pub fn numerator(&self) -> &GaussPoly {
        &self.numerator
    }

    pub fn norm_const(&self) -> f64 {
        self.norm_const
    }

    pub(crate) fn generator(&self) -> &GaussPoly {
        &self.generator
    }

    pub(crate) fn orders(&self) -> &[u32] {
        &self.orders
    }

    /// `Q(ξ)`.
    pub fn eval(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.xi_dim() {
            return Err(Error::Dimension {
                expected: self.xi_dim(),
                got: xi.len(),
            });
        }
        let point: Vec<C64> = xi.iter().map(|&x| C64::new(x, 0.0)).collect();
        let z = self.numerator.value(&point);
        real_part(z, "Q-function value").map(|v| v / self.norm_const)
    }
}

/// Real part of a quantity that must be real, with the imaginary-residue
/// check.
pub(crate) fn real_part(z: C64, what: &str) -> Result<f64> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Consistency(format!("{what} is not finite: {z}")));
    }
    if z.im.abs() > IMAG_TOLERANCE * z.re.abs() && z.im.abs() > 1e-300 {
        return Err(Error::Consistency(format!(
            "{what} has imaginary residue {:.3e} against real part {:.3e}",
            z.im, z.re
        )));
    }
    Ok(z.re)
}

pub fn q_eval(repr: &QFormRepr, xi: &[f64]) -> Result<f64> {
    repr.eval(xi)
}

pub fn q_repr_single(spec: &StateSpec) -> Result<QFormRepr> {
    if spec.modes() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: spec.modes(),
        });
    }
    q_repr(spec)
}

pub fn q_repr_two(spec: &StateSpec) -> Result<QFormRepr> {
    if spec.modes() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: spec.modes(),
        });
    }
    q_repr(spec)
}

/// Q-function of any supported state.
pub fn q_repr(spec: &StateSpec) -> Result<QFormRepr> {
    let table = EntryTable::for_spec(spec)?;
    let all_orders = spec.derivative_orders();
    let active: Vec<usize> = (0..all_orders.len()).filter(|&j| all_orders[j] > 0).collect();
    let orders: Vec<u32> = active.iter().map(|&j| all_orders[j]).collect();

    // Scale exponent (power of 1/sₘ) per auxiliary variable.
    let mut scale = vec![0i32; all_orders.len()];
    for (m, op) in spec.ops().iter().enumerate() {
        let (k, l) = (op.additions(), op.subtractions());
        if k > 0 && l > 0 && k != l && op.tau() == 1.0 {
            return Err(Error::domain(format!(
                "with an ideal beam splitter the ancilla photon number is conserved; \
                 adding {k} and heralding {l} photons never succeeds"
            )));
        }
        let rescale_subtraction = k == 0 && l > 0;
        let rescale_addition = l == 0 && k > 0;
        for (j, s) in scale.iter_mut().enumerate() {
            if table.aux_mode[j] != m {
                continue;
            }
            let is_subtraction_var = j >= all_orders.len() / 2;
            if (is_subtraction_var && rescale_subtraction) || (!is_subtraction_var && rescale_addition) {
                *s = 1;
            }
        }
    }
    let extra = |j: usize| {
        let mut e = [0i32; 2];
        e[table.aux_mode[j]] += scale[j];
        e
    };
    let index_of = |j: usize| active.iter().position(|&a| a == j);

    let n = active.len();
    let xi_dim = table.xi_dim;
    let dim = n + xi_dim;
    let mut matrix = DMatrix::<C64>::zeros(dim, dim);
    for e in &table.xi_quadratic {
        matrix[(n + e.row, n + e.col)] += table.scaled_value(e, [0, 0])?;
    }
    for e in &table.coupling {
        if let Some(i) = index_of(e.row) {
            let v = table.scaled_value(e, extra(e.row))? * 0.5;
            matrix[(i, n + e.col)] += v;
            matrix[(n + e.col, i)] += v;
        }
    }
    let mut norm = DMatrix::<C64>::zeros(n, n);
    for (list, target) in [(&table.aux_quadratic, &mut matrix), (&table.norm_quadratic, &mut norm)] {
        for e in list {
            if let (Some(i), Some(j)) = (index_of(e.row), index_of(e.col)) {
                let [a, b] = extra(e.row);
                let [c, d] = extra(e.col);
                target[(i, j)] += table.scaled_value(e, [a + c, b + d])?;
            }
        }
    }

    let denominator = derivative_at_zero(
        &GaussPoly::from_exponent(QuadraticForm::from_matrix(norm)?),
        &orders,
    )?;
    let denominator = real_part(denominator, "normalisation derivative")?;
    if denominator == 0.0 || !denominator.is_finite() {
        return Err(Error::domain(format!(
            "normalisation derivative vanishes for {:?}; the heralding event has zero probability",
            spec.ops()
        )));
    }

    let lambda = spec.lambda();
    let prefactor = match spec.ops() {
        [op] => (1.0 - (lambda * op.tau()).powi(2)).sqrt() / (2.0 * PI),
        [a, b] => (1.0 - lambda * lambda * a.tau() * b.tau()) / (4.0 * PI * PI),
        _ => unreachable!(),
    };
    let exponent = QuadraticForm::new(matrix, DVector::zeros(dim), C64::default())?;
    let generator = GaussPoly::new(
        crate::polyform::Poly::one(),
        exponent,
        C64::new(denominator.signum(), 0.0),
    )?;
    QFormRepr::from_generator(spec.modes(), generator, orders, denominator.abs() / prefactor)
}

/// Squeezed vacuum `Q(q, p)`.
pub fn ssv_q(lambda: f64, q: f64, p: f64) -> f64 {
    (1.0 - lambda * lambda).sqrt() / (2.0 * PI)
        * (-(q * q) * (1.0 + lambda) / 2.0 - p * p * (1.0 - lambda) / 2.0).exp()
}

/// Two-mode squeezed vacuum `Q(q₁, p₁, q₂, p₂)`.
///
/// The momentum cross term carries the sign fixed by the quadratic block of
/// the generator (`+λq₁q₂ − λp₁p₂` in the exponent).
pub fn tmsv_q(lambda: f64, xi: [f64; 4]) -> f64 {
    let [q1, p1, q2, p2] = xi;
    (1.0 - lambda * lambda) / (4.0 * PI * PI)
        * (-(q1 * q1 + q2 * q2 - 2.0 * lambda * q1 * q2 + p1 * p1 + p2 * p2 + 2.0 * lambda * p1 * p2) / 2.0).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::NgOp;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn single(lambda: f64, k: u32, l: u32, tau: f64) -> StateSpec {
        StateSpec::single(lambda, NgOp::new(k, l, tau).unwrap()).unwrap()
    }

    fn two(lambda: f64, a: (u32, u32, f64), b: (u32, u32, f64)) -> StateSpec {
        StateSpec::two(
            lambda,
            NgOp::new(a.0, a.1, a.2).unwrap(),
            NgOp::new(b.0, b.1, b.2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn vacuum_peak() {
        let r = q_repr(&single(0.0, 0, 0, 1.0)).unwrap();
        assert_relative_eq!(r.eval(&[0.0, 0.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(QFormRepr::vacuum(1).eval(&[0.0, 0.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        let r2 = q_repr(&two(0.0, (0, 0, 1.0), (0, 0, 1.0))).unwrap();
        assert_relative_eq!(r2.eval(&[0.0; 4]).unwrap(), 1.0 / (4.0 * PI * PI), epsilon = 1e-15);
    }

    #[test]
    fn squeezed_vacuum_matches_closed_form() {
        let r = q_repr(&single(0.9, 0, 0, 1.0)).unwrap();
        assert_relative_eq!(r.eval(&[0.0, 0.0]).unwrap(), 0.19_f64.sqrt() / (2.0 * PI), epsilon = 1e-15);
        assert_relative_eq!(0.19_f64.sqrt() / (2.0 * PI), 0.069375, epsilon = 1e-6);
        for (q, p) in [(0.3, -1.2), (2.0, 0.5), (-1.0, 3.0)] {
            assert_relative_eq!(r.eval(&[q, p]).unwrap(), ssv_q(0.9, q, p), max_relative = 1e-13);
        }
    }

    #[test]
    fn two_mode_squeezed_vacuum_matches_closed_form() {
        let r = q_repr(&two(0.6, (0, 0, 1.0), (0, 0, 1.0))).unwrap();
        for xi in [[0.1, 0.2, -0.3, 0.4], [1.0, -1.0, 1.0, 1.0], [0.0, 2.0, 0.0, -2.0]] {
            assert_relative_eq!(r.eval(&xi).unwrap(), tmsv_q(0.6, xi), max_relative = 1e-13);
        }
    }

    #[test]
    fn far_field_decay() {
        // Along the anti-squeezed axis Q falls like exp(-(1-λτ)p²/2), so at
        // λ = 0.9 the value at |ξ| = 20 is still ~1e-10; check moderate squeezing.
        let r = q_repr(&single(0.5, 0, 2, 0.9)).unwrap();
        assert!(r.eval(&[20.0, 0.0]).unwrap() < 1e-30);
        assert!(r.eval(&[0.0, 20.0]).unwrap() < 1e-30);
    }

    #[test]
    fn dimension_mismatch() {
        let r = q_repr(&single(0.5, 0, 1, 0.9)).unwrap();
        assert!(matches!(r.eval(&[0.0; 4]), Err(Error::Dimension { expected: 2, got: 4 })));
        assert!(q_repr_two(&single(0.5, 0, 1, 0.9)).is_err());
    }

    #[test]
    fn ideal_limit_is_continuous() {
        for (k, l) in [(0, 1), (0, 2), (1, 0), (2, 0)] {
            let ideal = q_repr(&single(0.7, k, l, 1.0)).unwrap();
            let near = q_repr(&single(0.7, k, l, 1.0 - 1e-9)).unwrap();
            for xi in [[0.4, -0.3], [1.2, 0.8]] {
                assert_relative_eq!(ideal.eval(&xi).unwrap(), near.eval(&xi).unwrap(), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn ideal_catalysis_is_identity() {
        let pc = q_repr(&single(0.7, 1, 1, 1.0)).unwrap();
        assert_relative_eq!(pc.eval(&[0.5, 0.3]).unwrap(), ssv_q(0.7, 0.5, 0.3), max_relative = 1e-12);
    }

    #[test]
    fn ideal_mismatched_orders_rejected() {
        assert!(matches!(q_repr(&single(0.7, 1, 2, 1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn normalisation_single_mode() {
        // Tensor Gauss–Hermite against the unit Gaussian envelope e^{-x²/2}.
        let gh = gauss_quad::GaussHermite::new(std::num::NonZeroUsize::new(120).unwrap());
        for spec in [single(0.6, 0, 1, 0.9), single(0.3, 2, 0, 0.8), single(0.6, 1, 1, 0.9)] {
            let r = q_repr(&spec).unwrap();
            let mut total = 0.0_f64;
            for (x, wx) in gh.nodes().zip(gh.weights()) {
                for (y, wy) in gh.nodes().zip(gh.weights()) {
                    let (q, p) = (x * 2f64.sqrt() * 1.8, y * 2f64.sqrt() * 1.8);
                    let env = (x * x + y * y).exp();
                    total += wx * wy * env * r.eval(&[q, p]).unwrap() * 2.0 * 1.8 * 1.8;
                }
            }
            assert!((total - 1.0).abs() < 1e-8, "{spec:?}: {total}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn positive_bounded_and_even(
            lambda in 0.0f64..0.95, tau in 0.5f64..=1.0, k in 0u32..3, l in 0u32..3,
            q in -5.0f64..5.0, p in -5.0f64..5.0,
        ) {
            prop_assume!(!(tau == 1.0 && k != l && k > 0 && l > 0));
            let r = q_repr(&single(lambda, k, l, tau)).unwrap();
            let v = r.eval(&[q, p]).unwrap();
            prop_assert!(v >= -1e-12);
            prop_assert!(v <= 1.0 / (2.0 * PI) + 1e-12);
            let w = r.eval(&[-q, -p]).unwrap();
            prop_assert!((v - w).abs() <= 1e-12 * (1.0 + v.abs()));
        }

        #[test]
        fn two_mode_even(
            lambda in 0.0f64..0.9, t1 in 0.6f64..1.0, t2 in 0.6f64..1.0,
            xi in proptest::array::uniform4(-2.0f64..2.0),
        ) {
            let r = q_repr(&two(lambda, (0, 1, t1), (1, 0, t2))).unwrap();
            let v = r.eval(&xi).unwrap();
            let w = r.eval(&xi.map(|x| -x)).unwrap();
            prop_assert!(v >= -1e-12);
            prop_assert!((v - w).abs() <= 1e-12 * (1.0 + v.abs()));
        }
    }
}
