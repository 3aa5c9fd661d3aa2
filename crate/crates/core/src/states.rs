//! State specifications and the generator matrices of the heralded states.
//!
//! Variable layout of the auxiliary (derivative) variables:
//! - one mode: `u1, v1` (addition order `k`), `u2, v2` (subtraction order `l`);
//! - two modes: `u1, v1, u2, v2` (addition orders `k1, k1, k2, k2`) followed by
//!   `u1', v1', u2', v2'` (subtraction orders `l1, l1, l2, l2`).
//!
//! Quadrature variables are `(q, p)` or `(q1, p1, q2, p2)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Ladder operation realised by mixing the mode with an ancilla prepared in
/// `|additions⟩` and heralding `subtractions` photons.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NgOp {
    additions: u32,
    subtractions: u32,
    tau: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum OpKind {
    Subtraction,
    Addition,
    Catalysis,
    None,
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OpKind::Subtraction => "PS",
            OpKind::Addition => "PA",
            OpKind::Catalysis => "PC",
            OpKind::None => "none",
        })
    }
}

impl NgOp {
    pub fn new(additions: u32, subtractions: u32, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::invalid("tau", format!("{tau} is outside (0, 1]")));
        }
        Ok(Self {
            additions,
            subtractions,
            tau,
        })
    }

    /// No ladder operation, ideal beam splitter.
    pub fn identity() -> Self {
        Self {
            additions: 0,
            subtractions: 0,
            tau: 1.0,
        }
    }

    pub fn additions(&self) -> u32 {
        self.additions
    }

    pub fn subtractions(&self) -> u32 {
        self.subtractions
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn kind(&self) -> OpKind {
        classify(self)
    }

    /// `√(1−τ)`.
    pub(crate) fn reflect_amp(&self) -> f64 {
        (1.0 - self.tau).max(0.0).sqrt()
    }

    /// `√τ`.
    pub(crate) fn transmit_amp(&self) -> f64 {
        self.tau.sqrt()
    }
}

pub fn classify(op: &NgOp) -> OpKind {
    use std::cmp::Ordering::*;
    match op.additions.cmp(&op.subtractions) {
        Less => OpKind::Subtraction,
        Greater => OpKind::Addition,
        Equal if op.additions > 0 => OpKind::Catalysis,
        Equal => OpKind::None,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateSpec {
    lambda: f64,
    ops: Vec<NgOp>,
}

impl StateSpec {
    pub fn single(lambda: f64, op: NgOp) -> Result<Self> {
        Self::new(lambda, vec![op])
    }

    pub fn two(lambda: f64, first: NgOp, second: NgOp) -> Result<Self> {
        Self::new(lambda, vec![first, second])
    }

    fn new(lambda: f64, ops: Vec<NgOp>) -> Result<Self> {
        if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
            return Err(Error::invalid("lambda", format!("{lambda} is outside [0, 1)")));
        }
        for op in &ops {
            NgOp::new(op.additions, op.subtractions, op.tau)?;
        }
        Ok(Self { lambda, ops })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn modes(&self) -> usize {
        self.ops.len()
    }

    pub fn ops(&self) -> &[NgOp] {
        &self.ops
    }

    pub fn is_two_mode(&self) -> bool {
        self.ops.len() == 2
    }

    /// Derivative orders in the auxiliary-variable layout of this module.
    pub fn derivative_orders(&self) -> Vec<u32> {
        match self.ops.as_slice() {
            [a] => vec![a.additions, a.additions, a.subtractions, a.subtractions],
            [a, b] => vec![
                a.additions,
                a.additions,
                b.additions,
                b.additions,
                a.subtractions,
                a.subtractions,
                b.subtractions,
                b.subtractions,
            ],
            _ => unreachable!("validated at construction"),
        }
    }
}

/// Generator matrices of a state.
///
/// One mode: `xi_quadratic` 2×2 (A₁), `coupling` 4×2 (A₂), `aux_quadratic`
/// 4×4 (A₃), `norm_quadratic` 4×4 (A₄). Two modes: 4×4, 8×4, 8×8, 8×8 (M₁–M₄).
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSet {
    pub xi_quadratic: DMatrix<f64>,
    pub coupling: DMatrix<C64>,
    pub aux_quadratic: DMatrix<f64>,
    pub norm_quadratic: DMatrix<f64>,
}

/// A matrix entry `coeff · ∏ₘ sₘ^{powers[m]}` with `sₘ = √(1−τₘ)`. The
/// coefficient already contains every other parameter dependence.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Entry {
    pub row: usize,
    pub col: usize,
    pub coeff: C64,
    pub s_powers: [i32; 2],
}

/// Entry lists for the four generator matrices, plus the mode that each
/// auxiliary variable belongs to.
#[derive(Clone, Debug)]
pub(crate) struct EntryTable {
    pub xi_dim: usize,
    pub aux_dim: usize,
    pub xi_quadratic: Vec<Entry>,
    pub coupling: Vec<Entry>,
    pub aux_quadratic: Vec<Entry>,
    pub norm_quadratic: Vec<Entry>,
    pub aux_mode: Vec<usize>,
    pub s: [f64; 2],
}

fn entry(row: usize, col: usize, coeff: impl Into<C64>, s_powers: [i32; 2]) -> Entry {
    Entry {
        row,
        col,
        coeff: coeff.into(),
        s_powers,
    }
}

/// Pushes `(i, j)` and, off the diagonal, its mirror.
fn sym(list: &mut Vec<Entry>, i: usize, j: usize, coeff: f64, s_powers: [i32; 2]) {
    list.push(entry(i, j, coeff, s_powers));
    if i != j {
        list.push(entry(j, i, coeff, s_powers));
    }
}

impl EntryTable {
    pub fn for_spec(spec: &StateSpec) -> Result<Self> {
        match spec.ops.as_slice() {
            [op] => Self::single(spec.lambda, op),
            [a, b] => Self::two(spec.lambda, a, b),
            _ => unreachable!("validated at construction"),
        }
    }

    fn single(lambda: f64, op: &NgOp) -> Result<Self> {
        let tau = op.tau;
        if lambda * tau >= 1.0 {
            return Err(Error::domain(format!("λτ = {} must be below 1", lambda * tau)));
        }
        let t = op.transmit_amp();
        let i = C64::i();
        let (u1, v1, u2, v2) = (0, 1, 2, 3);

        let xi_quadratic = vec![
            entry(0, 0, -0.5 * (1.0 + lambda * tau), [0, 0]),
            entry(1, 1, -0.5 * (1.0 - lambda * tau), [0, 0]),
        ];

        let coupling = vec![
            entry(u1, 0, 0.5, [1, 0]),
            entry(u1, 1, 0.5 * i, [1, 0]),
            entry(v1, 0, -0.5, [1, 0]),
            entry(v1, 1, 0.5 * i, [1, 0]),
            entry(u2, 0, 0.5 * lambda * t, [1, 0]),
            entry(u2, 1, -0.5 * lambda * t * i, [1, 0]),
            entry(v2, 0, -0.5 * lambda * t, [1, 0]),
            entry(v2, 1, -0.5 * lambda * t * i, [1, 0]),
        ];

        let mut aux_quadratic = Vec::new();
        sym(&mut aux_quadratic, u1, v2, -t / 4.0, [0, 0]);
        sym(&mut aux_quadratic, v1, u2, -t / 4.0, [0, 0]);
        sym(&mut aux_quadratic, u2, u2, -lambda / 4.0, [2, 0]);
        sym(&mut aux_quadratic, v2, v2, -lambda / 4.0, [2, 0]);

        let f = 1.0 / (4.0 * (lambda * lambda * tau * tau - 1.0));
        let mut norm_quadratic = Vec::new();
        sym(&mut norm_quadratic, u1, u1, f * lambda * tau, [2, 0]);
        sym(&mut norm_quadratic, v1, v1, f * lambda * tau, [2, 0]);
        sym(&mut norm_quadratic, u1, v1, f, [2, 0]);
        sym(&mut norm_quadratic, u1, u2, -f * lambda * t, [2, 0]);
        sym(&mut norm_quadratic, v1, v2, -f * lambda * t, [2, 0]);
        sym(&mut norm_quadratic, u1, v2, f * t * (1.0 - lambda * lambda * tau), [0, 0]);
        sym(&mut norm_quadratic, v1, u2, f * t * (1.0 - lambda * lambda * tau), [0, 0]);
        sym(&mut norm_quadratic, u2, u2, f * lambda, [2, 0]);
        sym(&mut norm_quadratic, v2, v2, f * lambda, [2, 0]);
        sym(&mut norm_quadratic, u2, v2, f * lambda * lambda * tau, [2, 0]);

        Ok(Self {
            xi_dim: 2,
            aux_dim: 4,
            xi_quadratic,
            coupling,
            aux_quadratic,
            norm_quadratic,
            aux_mode: vec![0; 4],
            s: [op.reflect_amp(), 0.0],
        })
    }

    fn two(lambda: f64, a: &NgOp, b: &NgOp) -> Result<Self> {
        let (tau1, tau2) = (a.tau, b.tau);
        let l2 = lambda * lambda;
        if l2 * tau1 * tau2 >= 1.0 {
            return Err(Error::domain(format!(
                "λ²τ₁τ₂ = {} must be below 1",
                l2 * tau1 * tau2
            )));
        }
        let (t1, t2) = (a.transmit_amp(), b.transmit_amp());
        let i = C64::i();
        let lt = lambda * t1 * t2;

        let mut xi_quadratic = Vec::new();
        for d in 0..4 {
            sym(&mut xi_quadratic, d, d, -0.5, [0, 0]);
        }
        sym(&mut xi_quadratic, 0, 2, 0.5 * lt, [0, 0]);
        sym(&mut xi_quadratic, 1, 3, -0.5 * lt, [0, 0]);

        // Rows: u1 v1 u2 v2 u1' v1' u2' v2'; columns: q1 p1 q2 p2.
        let coupling = vec![
            entry(0, 0, 0.5, [1, 0]),
            entry(0, 1, 0.5 * i, [1, 0]),
            entry(1, 0, -0.5, [1, 0]),
            entry(1, 1, 0.5 * i, [1, 0]),
            entry(2, 2, 0.5, [0, 1]),
            entry(2, 3, 0.5 * i, [0, 1]),
            entry(3, 2, -0.5, [0, 1]),
            entry(3, 3, 0.5 * i, [0, 1]),
            entry(4, 2, -0.5 * lambda * t2, [1, 0]),
            entry(4, 3, 0.5 * lambda * t2 * i, [1, 0]),
            entry(5, 2, 0.5 * lambda * t2, [1, 0]),
            entry(5, 3, 0.5 * lambda * t2 * i, [1, 0]),
            entry(6, 0, -0.5 * lambda * t1, [0, 1]),
            entry(6, 1, 0.5 * lambda * t1 * i, [0, 1]),
            entry(7, 0, 0.5 * lambda * t1, [0, 1]),
            entry(7, 1, 0.5 * lambda * t1 * i, [0, 1]),
        ];

        let mut aux_quadratic = Vec::new();
        sym(&mut aux_quadratic, 0, 5, -0.25 * t1, [0, 0]);
        sym(&mut aux_quadratic, 1, 4, -0.25 * t1, [0, 0]);
        sym(&mut aux_quadratic, 2, 7, -0.25 * t2, [0, 0]);
        sym(&mut aux_quadratic, 3, 6, -0.25 * t2, [0, 0]);
        sym(&mut aux_quadratic, 4, 6, 0.25 * lambda, [1, 1]);
        sym(&mut aux_quadratic, 5, 7, 0.25 * lambda, [1, 1]);

        let g = 1.0 / (4.0 - 4.0 * l2 * tau1 * tau2);
        let c = two_mode_coefficients(lambda, tau1, tau2);
        let mut norm_quadratic = Vec::new();
        let mut put = |i: usize, j: usize, (coeff, powers): (f64, [i32; 2])| {
            sym(&mut norm_quadratic, i, j, g * coeff, powers);
        };
        put(0, 1, c[0]);
        put(0, 2, c[1]);
        put(0, 5, c[2]);
        put(0, 6, c[3]);
        put(1, 3, c[1]);
        put(1, 4, c[2]);
        put(1, 7, c[3]);
        put(2, 3, c[4]);
        put(2, 4, c[5]);
        put(2, 7, c[6]);
        put(3, 5, c[5]);
        put(3, 6, c[6]);
        put(4, 5, c[7]);
        put(4, 6, c[8]);
        put(5, 7, c[8]);
        put(6, 7, c[9]);

        Ok(Self {
            xi_dim: 4,
            aux_dim: 8,
            xi_quadratic,
            coupling,
            aux_quadratic,
            norm_quadratic,
            aux_mode: vec![0, 0, 1, 1, 0, 0, 1, 1],
            s: [a.reflect_amp(), b.reflect_amp()],
        })
    }

    /// Value of an entry with the auxiliary variables rescaled by
    /// `sₘ^{-scale[var]}`. Fails if a negative power of a vanishing `sₘ`
    /// would be needed.
    pub fn scaled_value(&self, e: &Entry, extra: [i32; 2]) -> Result<C64> {
        let mut v = e.coeff;
        for m in 0..2 {
            let p = e.s_powers[m] - extra[m];
            if p == 0 {
                continue;
            }
            if self.s[m] == 0.0 {
                if p < 0 {
                    return Err(Error::domain(
                        "ideal beam-splitter limit is singular for this combination of orders",
                    ));
                }
                return Ok(C64::default());
            }
            v *= self.s[m].powi(p);
        }
        Ok(v)
    }

    /// Literal matrices.
    pub fn matrices(&self) -> MatrixSet {
        let real = |list: &[Entry], n: usize| {
            let mut m = DMatrix::zeros(n, n);
            for e in list {
                m[(e.row, e.col)] += self.scaled_value(e, [0, 0]).expect("no rescaling").re;
            }
            m
        };
        let mut coupling = DMatrix::zeros(self.aux_dim, self.xi_dim);
        for e in &self.coupling {
            coupling[(e.row, e.col)] += self.scaled_value(e, [0, 0]).expect("no rescaling");
        }
        MatrixSet {
            xi_quadratic: real(&self.xi_quadratic, self.xi_dim),
            coupling,
            aux_quadratic: real(&self.aux_quadratic, self.aux_dim),
            norm_quadratic: real(&self.norm_quadratic, self.aux_dim),
        }
    }
}

/// `c₁ … c₁₀` of the two-mode normalisation matrix, each as a coefficient
/// and its powers of `(s₁, s₂)`.
fn two_mode_coefficients(lambda: f64, tau1: f64, tau2: f64) -> [(f64, [i32; 2]); 10] {
    let (t1, t2) = (tau1.sqrt(), tau2.sqrt());
    let l2 = lambda * lambda;
    [
        (-1.0, [2, 0]),
        (lambda * t1 * t2, [1, 1]),
        (t1 * (l2 * tau2 - 1.0), [0, 0]),
        (-lambda * t1, [1, 1]),
        (-1.0, [0, 2]),
        (-lambda * t2, [1, 1]),
        (t2 * (l2 * tau1 - 1.0), [0, 0]),
        (-l2 * tau2, [2, 0]),
        (lambda, [1, 1]),
        (-l2 * tau1, [0, 2]),
    ]
}

/// Numeric values of `c₁ … c₁₀`.
pub fn two_mode_c(lambda: f64, tau1: f64, tau2: f64) -> [f64; 10] {
    let s = [(1.0 - tau1).max(0.0).sqrt(), (1.0 - tau2).max(0.0).sqrt()];
    two_mode_coefficients(lambda, tau1, tau2).map(|(c, p)| c * s[0].powi(p[0]) * s[1].powi(p[1]))
}

pub fn build_single(spec: &StateSpec) -> Result<MatrixSet> {
    if spec.modes() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: spec.modes(),
        });
    }
    Ok(EntryTable::for_spec(spec)?.matrices())
}

pub fn build_two(spec: &StateSpec) -> Result<MatrixSet> {
    if spec.modes() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: spec.modes(),
        });
    }
    Ok(EntryTable::for_spec(spec)?.matrices())
}

/// Named state families. The order argument is the number of operations per
/// affected mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    /// Subtraction on the first mode of a two-mode state only.
    AsymPs(u32),
    /// Addition on the first mode of a two-mode state only.
    AsymPa(u32),
    SymPs(u32),
    SymPa(u32),
    /// Single-mode catalysis with `n` photons in and `n` heralded.
    Pc(u32),
    Ssv,
    Tmsv,
}

pub const PRESET_NAMES: [&str; 7] = ["asym-ps", "asym-pa", "sym-ps", "sym-pa", "pc", "ssv", "tmsv"];

impl FromStr for Preset {
    type Err = Error;

    /// Accepts `name`, `name N` and `name:N`; the order defaults to 1.
    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let (name, order) = match text.split_once(|c: char| c == ':' || c.is_whitespace()) {
            Some((n, o)) => {
                let o = o.trim();
                let order = o
                    .parse::<u32>()
                    .map_err(|_| Error::Usage(format!("preset order {o:?} is not a nonnegative integer")))?;
                (n, Some(order))
            }
            None => (text, None),
        };
        let n = order.unwrap_or(1);
        let preset = match name {
            "asym-ps" => Preset::AsymPs(n),
            "asym-pa" => Preset::AsymPa(n),
            "sym-ps" => Preset::SymPs(n),
            "sym-pa" => Preset::SymPa(n),
            "pc" => Preset::Pc(n),
            "ssv" | "tmsv" if order.is_some() => {
                return Err(Error::Usage(format!("preset {name} takes no order")))
            }
            "ssv" => Preset::Ssv,
            "tmsv" => Preset::Tmsv,
            _ => {
                return Err(Error::Usage(format!(
                    "unknown preset {name:?}; expected one of {}",
                    PRESET_NAMES.join(", ")
                )))
            }
        };
        Ok(preset)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::AsymPs(n) => write!(f, "asym-ps {n}"),
            Preset::AsymPa(n) => write!(f, "asym-pa {n}"),
            Preset::SymPs(n) => write!(f, "sym-ps {n}"),
            Preset::SymPa(n) => write!(f, "sym-pa {n}"),
            Preset::Pc(n) => write!(f, "pc {n}"),
            Preset::Ssv => f.write_str("ssv"),
            Preset::Tmsv => f.write_str("tmsv"),
        }
    }
}

impl Preset {
    pub fn is_two_mode(&self) -> bool {
        !matches!(self, Preset::Pc(_) | Preset::Ssv)
    }

    /// Builds the state. `tau1`/`tau2` are ignored where the preset fixes
    /// them (`τ = 1` for the plain squeezed states and the untouched mode of
    /// the asymmetric presets).
    pub fn spec(&self, lambda: f64, tau1: f64, tau2: f64) -> Result<StateSpec> {
        let ident = NgOp::identity();
        match *self {
            Preset::AsymPs(n) => StateSpec::two(lambda, NgOp::new(0, n, tau1)?, ident),
            Preset::AsymPa(n) => StateSpec::two(lambda, NgOp::new(n, 0, tau1)?, ident),
            Preset::SymPs(n) => StateSpec::two(lambda, NgOp::new(0, n, tau1)?, NgOp::new(0, n, tau2)?),
            Preset::SymPa(n) => StateSpec::two(lambda, NgOp::new(n, 0, tau1)?, NgOp::new(n, 0, tau2)?),
            Preset::Pc(n) => StateSpec::single(lambda, NgOp::new(n, n, tau1)?),
            Preset::Ssv => StateSpec::single(lambda, ident),
            Preset::Tmsv => StateSpec::two(lambda, ident, ident),
        }
    }
}

/// Preset with the parameters used throughout the figures, `λ = τ = 0.9`.
pub fn preset(name: &str) -> Result<StateSpec> {
    name.parse::<Preset>()?.spec(0.9, 0.9, 0.9)
}
