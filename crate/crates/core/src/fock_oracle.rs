//! Truncated Fock-space reference implementation.
//!
//! States are built by brute force (squeeze recursion, beam-splitter
//! heralding, Kraus damping) and Q-functions are read off as coherent-state
//! overlaps, so nothing here shares code with the generating-function route.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::states::StateSpec;

/// Single-mode cutoff used when none is given.
pub const DEFAULT_CUTOFF_SINGLE: usize = 400;
/// Per-mode cutoff for two-mode states.
pub const DEFAULT_CUTOFF_TWO: usize = 200;

const TAIL_WINDOW: usize = 5;
const TAIL_LIMIT: f64 = 1e-12;
const HERALD_FLOOR: f64 = 1e-14;

/// `ln n!` for `n = 0..=max`.
pub fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

fn ln_binomial(lf: &[f64], n: usize, k: usize) -> f64 {
    lf[n] - lf[k] - lf[n - k]
}

/// Pure state on one or two modes; amplitudes are stored mode-major
/// (`index = n₁·dim₂ + n₂`).
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl FockState {
    pub fn single(amps: Vec<C64>) -> Self {
        Self {
            dims: vec![amps.len()],
            amps,
        }
    }

    pub fn two(matrix: &DMatrix<C64>) -> Self {
        let (d1, d2) = matrix.shape();
        let mut amps = Vec::with_capacity(d1 * d2);
        for i in 0..d1 {
            for j in 0..d2 {
                amps.push(matrix[(i, j)]);
            }
        }
        Self {
            dims: vec![d1, d2],
            amps,
        }
    }

    pub fn number(n: usize, cutoff: usize) -> Result<Self> {
        if n > cutoff {
            return Err(Error::invalid("photon number", format!("{n} exceeds cutoff {cutoff}")));
        }
        let mut amps = vec![C64::default(); cutoff + 1];
        amps[n] = C64::new(1.0, 0.0);
        Ok(Self::single(amps))
    }

    /// Coherent state `|α⟩`, amplitudes computed in the log domain.
    pub fn coherent(alpha: C64, cutoff: usize) -> Self {
        let lf = ln_factorials(cutoff);
        let amps = (0..=cutoff)
            .map(|n| coherent_overlap(alpha, n, &lf).conj())
            .collect();
        Self::single(amps)
    }

    pub fn modes(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Highest photon number kept in `mode`.
    pub fn cutoff(&self, mode: usize) -> usize {
        self.dims[mode] - 1
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    /// Two-mode amplitudes as a `dim₁ × dim₂` matrix (a column for one mode).
    pub fn as_matrix(&self) -> DMatrix<C64> {
        let d2 = if self.modes() == 2 { self.dims[1] } else { 1 };
        DMatrix::from_row_slice(self.dims[0], d2, &self.amps)
    }

    fn from_matrix_like(&self, m: DMatrix<C64>) -> Self {
        if self.modes() == 2 {
            Self::two(&m)
        } else {
            Self::single(m.column(0).iter().copied().collect())
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self {
            dims: self.dims.clone(),
            amps: self.amps.iter().map(|a| a / n).collect(),
        }
    }

    /// Photon-number distribution of `mode`.
    pub fn marginal(&self, mode: usize) -> Vec<f64> {
        let m = self.as_matrix();
        match (self.modes(), mode) {
            (1, 0) => m.column(0).iter().map(C64::norm_sqr).collect(),
            (2, 0) => m.row_iter().map(|r| r.iter().map(C64::norm_sqr).sum()).collect(),
            (2, 1) => m.column_iter().map(|c| c.iter().map(C64::norm_sqr).sum()).collect(),
            _ => panic!("mode {mode} out of range"),
        }
    }

    pub fn mean_photons(&self, mode: usize) -> f64 {
        let total = self.norm_sqr();
        self.marginal(mode)
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum::<f64>()
            / total
    }

    /// Fails if the last few photon numbers of any mode carry more than the
    /// allowed fraction of the norm.
    pub fn check_tail(&self) -> Result<()> {
        let total = self.norm_sqr();
        for mode in 0..self.modes() {
            let marginal = self.marginal(mode);
            let start = marginal.len().saturating_sub(TAIL_WINDOW);
            let tail = marginal[start..].iter().sum::<f64>() / total;
            if tail >= TAIL_LIMIT {
                return Err(Error::CutoffInadequate {
                    cutoff: self.cutoff(mode),
                    tail,
                });
            }
        }
        Ok(())
    }
}

/// `⟨α|n⟩ = e^{−|α|²/2} ᾱⁿ/√n!`.
fn coherent_overlap(alpha: C64, n: usize, lf: &[f64]) -> C64 {
    let r = alpha.norm();
    if r == 0.0 {
        return if n == 0 { C64::new(1.0, 0.0) } else { C64::default() };
    }
    let ln_mag = -0.5 * r * r + n as f64 * r.ln() - 0.5 * lf[n];
    C64::from_polar(ln_mag.exp(), -(n as f64) * alpha.arg())
}

/// Row vector `⟨α|n⟩` for `n = 0..dim`.
fn coherent_row(alpha: C64, dim: usize, lf: &[f64]) -> Vec<C64> {
    (0..dim).map(|n| coherent_overlap(alpha, n, lf)).collect()
}

/// `α = (q + ip)/√2`.
pub fn alpha_of(q: f64, p: f64) -> C64 {
    C64::new(q, p) / 2f64.sqrt()
}

/// Squeezed vacuum `exp[r(â² − â†²)/2]|0⟩` with `λ = tanh r`.
///
/// `c₀ = (1−λ²)^{1/4}`, `c_{2n+2} = −λ √((2n+1)/(2n+2)) c_{2n}`.
pub fn ssv_fock(lambda: f64, cutoff: usize) -> Result<FockState> {
    check_lambda(lambda)?;
    let mut amps = vec![C64::default(); cutoff + 1];
    let mut c = (1.0 - lambda * lambda).powf(0.25);
    let mut n = 0;
    while n <= cutoff {
        amps[n] = C64::new(c, 0.0);
        c *= -lambda * ((n as f64 + 1.0) / (n as f64 + 2.0)).sqrt();
        n += 2;
    }
    let state = FockState::single(amps);
    state.check_tail()?;
    Ok(state)
}

/// Two-mode squeezed vacuum, `ψ(n, m) = δ_{nm} √(1−λ²) λⁿ`.
pub fn tmsv_fock(lambda: f64, cutoff: usize) -> Result<FockState> {
    check_lambda(lambda)?;
    let norm = (1.0 - lambda * lambda).sqrt();
    let m = DMatrix::from_fn(cutoff + 1, cutoff + 1, |i, j| {
        if i == j {
            C64::new(norm * lambda.powi(i as i32), 0.0)
        } else {
            C64::default()
        }
    });
    let state = FockState::two(&m);
    state.check_tail()?;
    Ok(state)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && (0.0..1.0).contains(&lambda)) {
        return Err(Error::invalid("lambda", format!("{lambda} is outside [0, 1)")));
    }
    Ok(())
}

/// Outcome of a conditional operation; `probability` is the squared norm of
/// the unnormalised output for a normalised input.
#[derive(Clone, Debug)]
pub struct HeraldResult<S> {
    pub state: S,
    pub probability: f64,
}

/// `K[m][n] = ⟨m|⟨l_out| U |n⟩|k_in⟩` for the beam splitter
/// `â† → √τ â† + √(1−τ) b̂†`, `b̂† → −√(1−τ) â† + √τ b̂†`.
pub fn herald_operator(tau: f64, k_in: usize, l_out: usize, dim_in: usize) -> DMatrix<f64> {
    let dim_out = (dim_in + k_in).saturating_sub(l_out).max(1);
    let lf = ln_factorials(dim_in + k_in + l_out + 1);
    let (t, r) = (tau.sqrt(), (1.0 - tau).max(0.0).sqrt());
    let (ln_t, ln_r) = (t.ln(), r.ln());
    let mut out = DMatrix::zeros(dim_out, dim_in);
    for n in 0..dim_in {
        if n + k_in < l_out {
            continue;
        }
        let m = n + k_in - l_out;
        let norm = 0.5 * (lf[m] + lf[l_out] - lf[n] - lf[k_in]);
        let mut acc = 0.0;
        for j in 0..=k_in.min(m) {
            let i = m - j;
            if i > n {
                continue;
            }
            let t_pow = i + k_in - j;
            let r_pow = n - i + j;
            if r == 0.0 && r_pow > 0 {
                continue;
            }
            let mut ln_mag = ln_binomial(&lf, n, i) + ln_binomial(&lf, k_in, j) + norm;
            if t_pow > 0 {
                ln_mag += t_pow as f64 * ln_t;
            }
            if r_pow > 0 {
                ln_mag += r_pow as f64 * ln_r;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * ln_mag.exp();
        }
        out[(m, n)] = acc;
    }
    out
}

/// Ideal ladder limit: `â^l` (if `k_in = 0`), `â†^k` (if `l_out = 0`), or the
/// identity (`k_in = l_out`).
pub fn ladder_operator(k_in: usize, l_out: usize, dim_in: usize) -> Result<DMatrix<f64>> {
    let lf = ln_factorials(dim_in + k_in);
    if k_in == l_out {
        return Ok(DMatrix::identity(dim_in, dim_in));
    }
    if k_in == 0 {
        let dim_out = dim_in.saturating_sub(l_out).max(1);
        let mut out = DMatrix::zeros(dim_out, dim_in);
        for n in l_out..dim_in {
            out[(n - l_out, n)] = (0.5 * (lf[n] - lf[n - l_out])).exp();
        }
        return Ok(out);
    }
    if l_out == 0 {
        let mut out = DMatrix::zeros(dim_in + k_in, dim_in);
        for n in 0..dim_in {
            out[(n + k_in, n)] = (0.5 * (lf[n + k_in] - lf[n])).exp();
        }
        return Ok(out);
    }
    Err(Error::HeraldFailure { probability: 0.0 })
}

fn apply_on_mode(state: &FockState, mode: usize, op: &DMatrix<f64>) -> FockState {
    let op = op.map(|x| C64::new(x, 0.0));
    let m = state.as_matrix();
    let out = if mode == 0 { &op * m } else { m * op.transpose() };
    state.from_matrix_like(out)
}

fn conditional(state: &FockState, mode: usize, op: &DMatrix<f64>) -> Result<HeraldResult<FockState>> {
    if mode >= state.modes() {
        return Err(Error::Index {
            var: mode,
            dim: state.modes(),
        });
    }
    let input = state.normalized();
    let out = apply_on_mode(&input, mode, op);
    let probability = out.norm_sqr();
    if !(probability >= HERALD_FLOOR) {
        return Err(Error::HeraldFailure { probability });
    }
    Ok(HeraldResult {
        state: out.normalized(),
        probability,
    })
}

/// Mixes `mode` with an ancilla in `|k_in⟩` on a beam splitter of
/// transmissivity `τ` and conditions on `l_out` photons in the ancilla.
pub fn herald(state: &FockState, mode: usize, tau: f64, k_in: usize, l_out: usize) -> Result<HeraldResult<FockState>> {
    if !(tau > 0.0 && tau <= 1.0) {
        return Err(Error::invalid("tau", format!("{tau} is outside (0, 1]")));
    }
    if mode >= state.modes() {
        return Err(Error::Index {
            var: mode,
            dim: state.modes(),
        });
    }
    let op = herald_operator(tau, k_in, l_out, state.dims[mode]);
    conditional(state, mode, &op)
}

/// Applies the ideal ladder operation and renormalises.
pub fn ladder(state: &FockState, mode: usize, k_in: usize, l_out: usize) -> Result<HeraldResult<FockState>> {
    if mode >= state.modes() {
        return Err(Error::Index {
            var: mode,
            dim: state.modes(),
        });
    }
    let op = ladder_operator(k_in, l_out, state.dims[mode])?;
    conditional(state, mode, &op)
}

/// Builds the state described by `spec`. Modes with `τ = 1` and a pure
/// subtraction or addition use the ideal ladder operator (the `τ → 1` limit of
/// the renormalised heralded state). The probability is the product over
/// modes; for ladder limits it is the norm after the ladder operator.
pub fn prepare(spec: &StateSpec, cutoff: usize) -> Result<HeraldResult<FockState>> {
    let mut state = match spec.modes() {
        1 => ssv_fock(spec.lambda(), cutoff)?,
        _ => tmsv_fock(spec.lambda(), cutoff)?,
    };
    let mut probability = 1.0;
    for (mode, op) in spec.ops().iter().enumerate() {
        let (k, l) = (op.additions() as usize, op.subtractions() as usize);
        if k == 0 && l == 0 && op.tau() == 1.0 {
            continue;
        }
        let step = if op.tau() == 1.0 {
            ladder(&state, mode, k, l)?
        } else {
            herald(&state, mode, op.tau(), k, l)?
        };
        probability *= step.probability;
        state = step.state;
    }
    state.check_tail()?;
    Ok(HeraldResult { state, probability })
}

/// Density matrix on one or two modes (mode-major ordering).
#[derive(Clone, Debug, PartialEq)]
pub struct FockDensity {
    dims: Vec<usize>,
    rho: DMatrix<C64>,
}

impl FockDensity {
    pub fn from_pure(state: &FockState) -> Self {
        let v = nalgebra::DVector::from_column_slice(&state.amps);
        Self {
            dims: state.dims.clone(),
            rho: &v * v.adjoint(),
        }
    }

    pub fn new(dims: Vec<usize>, rho: DMatrix<C64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if rho.shape() != (n, n) {
            return Err(Error::Dimension {
                expected: n,
                got: rho.nrows(),
            });
        }
        Ok(Self { dims, rho })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.rho.clone().symmetric_eigenvalues().iter().copied().collect()
    }

    /// Reduced state of `keep` for a two-mode density.
    pub fn partial_trace(&self, keep: usize) -> Result<FockDensity> {
        if self.dims.len() != 2 || keep > 1 {
            return Err(Error::Usage("partial trace needs a two-mode density".into()));
        }
        let (d1, d2) = (self.dims[0], self.dims[1]);
        let d = self.dims[keep];
        let mut out = DMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let mut acc = C64::default();
                let other = self.dims[1 - keep];
                for c in 0..other {
                    let (i, j) = if keep == 0 {
                        (a * d2 + c, b * d2 + c)
                    } else {
                        (c * d2 + a, c * d2 + b)
                    };
                    acc += self.rho[(i, j)];
                }
                out[(a, b)] = acc;
            }
        }
        let _ = d1;
        FockDensity::new(vec![d], out)
    }

    /// Fidelity `⟨ψ|ρ|ψ⟩` with a pure state of the same dimensions.
    pub fn fidelity_with(&self, state: &FockState) -> f64 {
        let v = nalgebra::DVector::from_column_slice(&state.amps);
        (v.adjoint() * &self.rho * &v)[(0, 0)].re
    }

    /// Trace distance to another density of the same shape.
    pub fn trace_distance(&self, other: &FockDensity) -> f64 {
        let diff = &self.rho - &other.rho;
        0.5 * diff.symmetric_eigenvalues().iter().map(|e| e.abs()).sum::<f64>()
    }
}

/// `⟨n−j|K_j|n⟩ = √(C(n,j) (1−η)^j η^{n−j})` for the damping Kraus operators
/// `K_j = √((1−η)^j/j!) η^{n̂/2} â^j`.
pub fn kraus_element(eta: f64, j: usize, n: usize, lf: &[f64]) -> f64 {
    if j > n {
        return 0.0;
    }
    let mut ln_mag = 0.5 * ln_binomial(lf, n, j);
    if j > 0 {
        if eta == 1.0 {
            return 0.0;
        }
        ln_mag += 0.5 * j as f64 * (1.0 - eta).ln();
    }
    if n > j {
        if eta == 0.0 {
            return 0.0;
        }
        ln_mag += 0.5 * (n - j) as f64 * eta.ln();
    }
    ln_mag.exp()
}

/// Amplitude damping of `mode` with surviving energy fraction `η`.
pub fn kraus_damp_mode(rho: &FockDensity, mode: usize, eta: f64) -> Result<FockDensity> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::invalid("eta", format!("{eta} is outside [0, 1]")));
    }
    if mode >= rho.dims.len() {
        return Err(Error::Index {
            var: mode,
            dim: rho.dims.len(),
        });
    }
    let d = rho.dims[mode];
    let lf = ln_factorials(d);
    // table[n][j] = ⟨n−j|K_j|n⟩; K_j lowers the damped mode by j.
    let table: Vec<Vec<f64>> = (0..d).map(|n| (0..=n).map(|j| kraus_element(eta, j, n, &lf)).collect()).collect();
    let stride = if rho.dims.len() == 2 && mode == 0 { rho.dims[1] } else { 1 };
    let occupation = |i: usize| (i / stride) % d;
    let n = rho.rho.nrows();
    let mut out = DMatrix::<C64>::zeros(n, n);
    for c in 0..n {
        let nc = occupation(c);
        for r in 0..n {
            let v = rho.rho[(r, c)];
            if v == C64::default() {
                continue;
            }
            let nr = occupation(r);
            for j in 0..=nr.min(nc) {
                out[(r - j * stride, c - j * stride)] += v * (table[nr][j] * table[nc][j]);
            }
        }
    }
    FockDensity::new(rho.dims.clone(), out)
}

/// Single-mode amplitude damping over time `t` at rate `γ`.
pub fn kraus_damp(rho: &FockDensity, gamma: f64, t: f64) -> Result<FockDensity> {
    if !(gamma >= 0.0 && t >= 0.0) {
        return Err(Error::invalid("gamma·t", format!("γ = {gamma}, t = {t} must be nonnegative")));
    }
    let mut out = rho.clone();
    for mode in 0..rho.dims.len() {
        out = kraus_damp_mode(&out, mode, (-gamma * t).exp())?;
    }
    Ok(out)
}

/// `⟨α|ρ|α⟩ / (2π)^{modes}` at quadrature point `ξ`.
pub fn q_numeric(rho: &FockDensity, xi: &[f64]) -> Result<f64> {
    let w = product_row(&rho.dims, xi)?;
    let mut acc = C64::default();
    for i in 0..w.len() {
        if w[i] == C64::default() {
            continue;
        }
        let mut row = C64::default();
        for j in 0..w.len() {
            row += rho.rho[(i, j)] * w[j].conj();
        }
        acc += w[i] * row;
    }
    Ok(acc.re / (2.0 * PI).powi(rho.dims.len() as i32))
}

/// `|⟨α|ψ⟩|² / (2π)^{modes}` for a pure state.
pub fn q_numeric_pure(state: &FockState, xi: &[f64]) -> Result<f64> {
    let w = product_row(&state.dims, xi)?;
    let overlap: C64 = w.iter().zip(&state.amps).map(|(a, b)| a * b).sum();
    Ok(overlap.norm_sqr() / (2.0 * PI).powi(state.modes() as i32))
}

fn product_row(dims: &[usize], xi: &[f64]) -> Result<Vec<C64>> {
    if xi.len() != 2 * dims.len() {
        return Err(Error::Dimension {
            expected: 2 * dims.len(),
            got: xi.len(),
        });
    }
    let lf = ln_factorials(*dims.iter().max().unwrap_or(&1));
    let rows: Vec<Vec<C64>> = dims
        .iter()
        .enumerate()
        .map(|(m, &d)| coherent_row(alpha_of(xi[2 * m], xi[2 * m + 1]), d, &lf))
        .collect();
    Ok(match rows.as_slice() {
        [a] => a.clone(),
        [a, b] => a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect(),
        _ => unreachable!(),
    })
}

/// Q-function of a two-mode pure state after independent amplitude damping
/// of each mode, evaluated without forming the density matrix:
/// `Q = Σ_{j₁j₂} |(B₁ Ψ B₂ᵀ)_{j₁j₂}|² / (4π²)` with `B[j][n] = ⟨α|K_j|n⟩`.
pub fn q_damped_two(state: &FockState, etas: [f64; 2], xi: &[f64]) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: state.modes(),
        });
    }
    if xi.len() != 4 {
        return Err(Error::Dimension { expected: 4, got: xi.len() });
    }
    let lf = ln_factorials(*state.dims.iter().max().unwrap());
    let b = |mode: usize| {
        let d = state.dims[mode];
        let row = coherent_row(alpha_of(xi[2 * mode], xi[2 * mode + 1]), d, &lf);
        DMatrix::from_fn(d, d, |j, n| {
            if j > n {
                C64::default()
            } else {
                row[n - j] * kraus_element(etas[mode], j, n, &lf)
            }
        })
    };
    let o = b(0) * state.as_matrix() * b(1).transpose();
    Ok(o.iter().map(C64::norm_sqr).sum::<f64>() / (4.0 * PI * PI))
}

/// Entries this far below the largest one are dropped before the
/// eigen-decomposition; the solver returns NaN vectors on damped densities
/// whose tails reach the subnormal range.
const FLUSH_RELATIVE: f64 = 1e-30;

/// Mixed single-mode state as an eigen-ensemble (weights below `1e-18`
/// dropped), used for fast repeated Q evaluation.
#[derive(Clone, Debug)]
pub struct FockEnsemble {
    pub weights: Vec<f64>,
    pub states: Vec<FockState>,
}

impl FockEnsemble {
    pub fn pure(state: &FockState) -> Self {
        Self {
            weights: vec![1.0],
            states: vec![state.normalized()],
        }
    }

    pub fn from_density(rho: &FockDensity) -> Result<Self> {
        if rho.dims.len() != 1 {
            return Err(Error::Usage("ensembles are single-mode only".into()));
        }
        let mut weights = Vec::new();
        let mut states = Vec::new();
        let floor = FLUSH_RELATIVE * rho.rho.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let flush = |x: f64| if x.abs() < floor { 0.0 } else { x };
        if rho.rho.iter().all(|z| z.im == 0.0) {
            let eig = rho.rho.map(|z| flush(z.re)).symmetric_eigen();
            for (i, &w) in eig.eigenvalues.iter().enumerate() {
                if w > 1e-18 {
                    weights.push(w);
                    states.push(FockState::single(eig.eigenvectors.column(i).iter().map(|&x| C64::new(x, 0.0)).collect()));
                }
            }
        } else {
            let eig = rho.rho.map(|z| C64::new(flush(z.re), flush(z.im))).symmetric_eigen();
            for (i, &w) in eig.eigenvalues.iter().enumerate() {
                if w > 1e-18 {
                    weights.push(w);
                    states.push(FockState::single(eig.eigenvectors.column(i).iter().copied().collect()));
                }
            }
        }
        let finite = states.iter().all(|s| s.amps.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        if !finite {
            return Err(Error::Consistency("eigen-decomposition of the density matrix failed".into()));
        }
        Ok(Self { weights, states })
    }

    /// Single-mode Q at `α = a e^{iθ}/√2` for many radii sharing one angle.
    pub fn q_on_ray(&self, theta: f64, radii: &[f64]) -> Vec<f64> {
        let dim = self.states.iter().map(|s| s.amps.len()).max().unwrap_or(1);
        let lf = ln_factorials(dim);
        radii
            .iter()
            .map(|&a| {
                let row = coherent_row(C64::from_polar(a / 2f64.sqrt(), theta), dim, &lf);
                self.weights
                    .iter()
                    .zip(&self.states)
                    .map(|(w, s)| {
                        let ov: C64 = row.iter().zip(&s.amps).map(|(x, y)| x * y).sum();
                        w * ov.norm_sqr()
                    })
                    .sum::<f64>()
                    / (2.0 * PI)
            })
            .collect()
    }

    pub fn max_dim(&self) -> usize {
        self.states.iter().map(|s| s.amps.len()).max().unwrap_or(1)
    }
}

/// Radial Gauss–Legendre rule on `[0, a_max]`. `a_max` is set so that the
/// Poisson weight of photon numbers below the cutoff is negligible.
pub(crate) fn radial_rule(max_dim: usize, panel_width: f64) -> (Vec<f64>, Vec<f64>) {
    let n = max_dim as f64;
    let a_max = (2.0 * (n + 10.0 * n.sqrt() + 50.0)).sqrt();
    let panels = (a_max / panel_width).ceil() as usize;
    let rule = gauss_quad::GaussLegendre::new(std::num::NonZeroUsize::new(16).unwrap());
    let h = a_max / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 16);
    let mut weights = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let (lo, hi) = (p as f64 * h, (p + 1) as f64 * h);
        for (x, w) in rule.nodes().zip(rule.weights()) {
            nodes.push(0.5 * (lo + hi) + 0.5 * (hi - lo) * x);
            weights.push(0.5 * (hi - lo) * w);
        }
    }
    (nodes, weights)
}

/// `P(θ) = ∫₀^∞ a Q(a cos θ, a sin θ) da` by composite Gauss–Legendre.
pub fn phase_numeric_values(ensemble: &FockEnsemble, thetas: &[f64]) -> Vec<f64> {
    use rayon::prelude::*;
    let (nodes, weights) = radial_rule(ensemble.max_dim(), 0.5);
    thetas
        .par_iter()
        .map(|&theta| {
            let q = ensemble.q_on_ray(theta, &nodes);
            q.iter()
                .zip(&nodes)
                .zip(&weights)
                .map(|((q, a), w)| q * a * w)
                .sum()
        })
        .collect()
}

/// Two-mode `P(θ₁, θ₂) = ∫∫ a₁a₂ Q da₁ da₂` for a pure state.
pub fn phase_two_numeric(state: &FockState, theta1: f64, theta2: f64) -> Result<f64> {
    if state.modes() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: state.modes(),
        });
    }
    let lf = ln_factorials(*state.dims.iter().max().unwrap());
    // Wider panels than the single-mode rule: the cost is quadratic in the
    // node count and 16 points per unit length already resolve the integrand.
    let (nodes, weights) = radial_rule(*state.dims.iter().max().unwrap(), 1.0);
    let c = |mode: usize, theta: f64| {
        let d = state.dims[mode];
        let mut m = DMatrix::zeros(nodes.len(), d);
        for (i, &a) in nodes.iter().enumerate() {
            let row = coherent_row(C64::from_polar(a / 2f64.sqrt(), theta), d, &lf);
            for (n, v) in row.into_iter().enumerate() {
                m[(i, n)] = v;
            }
        }
        m
    };
    let o = c(0, theta1) * state.as_matrix() * c(1, theta2).transpose();
    let mut total = 0.0;
    for i in 0..nodes.len() {
        for j in 0..nodes.len() {
            total += weights[i] * weights[j] * nodes[i] * nodes[j] * o[(i, j)].norm_sqr();
        }
    }
    Ok(total / (4.0 * PI * PI))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn vacuum_limits() {
        let s = ssv_fock(0.0, 10).unwrap();
        assert_eq!(s.amps()[0], C64::new(1.0, 0.0));
        assert!(s.amps()[1..].iter().all(|a| a.norm() == 0.0));
        let t = tmsv_fock(0.0, 6).unwrap();
        assert_eq!(t.as_matrix()[(0, 0)], C64::new(1.0, 0.0));
        assert_relative_eq!(t.norm_sqr(), 1.0);
    }

    #[test]
    fn squeezed_vacuum_moments_and_parity() {
        let s = ssv_fock(0.9, DEFAULT_CUTOFF_SINGLE).unwrap();
        assert_relative_eq!(s.mean_photons(0), 0.81 / 0.19, epsilon = 1e-6);
        assert!(s.amps().iter().skip(1).step_by(2).all(|a| *a == C64::default()));
        assert_relative_eq!(s.norm_sqr(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_vacuum_matches_matrix_exponential() {
        // exp[r(â² − â†²)/2]|0⟩ in a truncated space larger than the compared block.
        let lambda: f64 = 0.5;
        let r = lambda.atanh();
        let dim = 90;
        let mut g = DMatrix::<f64>::zeros(dim, dim);
        for n in 2..dim {
            let f = ((n * (n - 1)) as f64).sqrt();
            g[(n - 2, n)] += 0.5 * r * f; // â²
            g[(n, n - 2)] -= 0.5 * r * f; // −â†²
        }
        let u = g.exp();
        let s = ssv_fock(lambda, 60).unwrap();
        for n in 0..=40 {
            assert!((u[(n, 0)] - s.amps()[n].re).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn two_mode_schmidt_and_reduced_state() {
        let lambda: f64 = 0.9;
        let s = tmsv_fock(lambda, DEFAULT_CUTOFF_TWO).unwrap();
        assert_relative_eq!(s.norm_sqr(), 1.0, epsilon = 1e-9);
        let marginal = s.marginal(0);
        for n in 0..20 {
            assert_relative_eq!(marginal[n], (1.0 - lambda * lambda) * lambda.powi(2 * n as i32), max_relative = 1e-12);
        }
        let small = tmsv_fock(0.3, 20).unwrap();
        let reduced = FockDensity::from_pure(&small).partial_trace(1).unwrap();
        for a in 0..21 {
            for b in 0..21 {
                let expected = if a == b { 0.91 * 0.09f64.powi(a as i32) } else { 0.0 };
                assert!((reduced.matrix()[(a, b)].re - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn cutoff_guard() {
        assert!(matches!(ssv_fock(0.99, 60), Err(Error::CutoffInadequate { .. })));
        assert!(matches!(tmsv_fock(0.9, 40), Err(Error::CutoffInadequate { .. })));
    }

    #[test]
    fn herald_probabilities_sum_to_one() {
        let s = ssv_fock(0.6, 120).unwrap();
        for (tau, k) in [(0.9, 0), (0.7, 1), (0.5, 2)] {
            let total: f64 = (0..=60)
                .map(|l| herald(&s, 0, tau, k, l).map(|h| h.probability).unwrap_or(0.0))
                .sum();
            assert!((total - 1.0).abs() < 1e-10, "τ={tau}, k={k}: {total}");
        }
    }

    #[test]
    fn herald_unit_transmissivity_is_identity() {
        let s = ssv_fock(0.5, 60).unwrap();
        let h = herald(&s, 0, 1.0, 1, 1).unwrap();
        assert_relative_eq!(h.probability, 1.0, epsilon = 1e-14);
        assert!(h.state.amps().iter().zip(s.amps()).all(|(a, b)| (a - b).norm() < 1e-14));
        assert!(matches!(herald(&s, 0, 1.0, 0, 1), Err(Error::HeraldFailure { .. })));
    }

    #[test]
    fn near_unit_subtraction_approaches_squeezed_one_photon() {
        // â S(r)|0⟩ ∝ S(r)|1⟩, built here by the squeeze recursion on odd
        // numbers via the matrix exponential.
        let lambda: f64 = 0.5;
        let r = lambda.atanh();
        let dim = 120;
        let mut g = DMatrix::<f64>::zeros(dim, dim);
        for n in 2..dim {
            let f = ((n * (n - 1)) as f64).sqrt();
            g[(n - 2, n)] += 0.5 * r * f;
            g[(n, n - 2)] -= 0.5 * r * f;
        }
        let target: Vec<f64> = g.exp().column(1).iter().copied().collect();
        let s = ssv_fock(lambda, 80).unwrap();
        let h = herald(&s, 0, 1.0 - 1e-8, 0, 1).unwrap();
        let overlap: f64 = h.state.amps().iter().zip(&target).map(|(a, b)| a.re * b).sum();
        assert!(overlap.abs() > 1.0 - 1e-6, "overlap {overlap}");
    }

    #[test]
    fn coherent_damping_law() {
        for alpha in [0.5, 1.0, 2.0] {
            for gt in [0.1, 1.0, 5.0] {
                let rho = FockDensity::from_pure(&FockState::coherent(C64::new(alpha, 0.0), 60));
                let out = kraus_damp(&rho, 1.0, gt).unwrap();
                let target = FockState::coherent(C64::new(alpha * (-gt / 2.0f64).exp(), 0.0), 60);
                assert!(out.fidelity_with(&target) > 1.0 - 1e-10);
                assert!((out.trace() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn damping_identity_and_vacuum_fixed_point() {
        let s = ssv_fock(0.6, 60).unwrap();
        let rho = FockDensity::from_pure(&s);
        let same = kraus_damp(&rho, 1.0, 0.0).unwrap();
        assert!((same.matrix() - rho.matrix()).norm() < 1e-14);
        let gone = kraus_damp(&rho, 1.0, 40.0).unwrap();
        let vac = FockDensity::from_pure(&FockState::number(0, 60).unwrap());
        assert!(gone.trace_distance(&vac) < 1e-8);
        assert!(gone.eigenvalues().iter().all(|&e| e > -1e-10));
    }

    #[test]
    fn q_numeric_reference_values() {
        let vac = FockDensity::from_pure(&FockState::number(0, 10).unwrap());
        assert_relative_eq!(q_numeric(&vac, &[0.0, 0.0]).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        let s = ssv_fock(0.9, DEFAULT_CUTOFF_SINGLE).unwrap();
        assert_relative_eq!(q_numeric_pure(&s, &[0.0, 0.0]).unwrap(), 0.19f64.sqrt() / (2.0 * PI), max_relative = 1e-12);
        let t = tmsv_fock(0.5, 60).unwrap();
        let xi = [0.3, -0.7, 1.1, 0.4];
        let expected = crate::husimi::tmsv_q(0.5, xi);
        assert_relative_eq!(q_numeric_pure(&t, &xi).unwrap(), expected, max_relative = 1e-9);
        let rho = FockDensity::from_pure(&tmsv_fock(0.5, 30).unwrap());
        assert_relative_eq!(q_numeric(&rho, &xi).unwrap(), expected, max_relative = 1e-9);
    }

    #[test]
    fn numeric_phase_of_vacuum_and_squeezed_vacuum() {
        let thetas = [-2.0, -0.3, 0.0, 1.0, PI / 2.0];
        let vac = FockEnsemble::pure(&FockState::number(0, 5).unwrap());
        for v in phase_numeric_values(&vac, &thetas) {
            assert_relative_eq!(v, 1.0 / (2.0 * PI), epsilon = 1e-8);
        }
        let s = FockEnsemble::pure(&ssv_fock(0.9, DEFAULT_CUTOFF_SINGLE).unwrap());
        for (v, th) in phase_numeric_values(&s, &thetas).iter().zip(thetas) {
            let closed = 0.19f64.sqrt() / (2.0 * PI * (0.9 * (2.0 * th).cos() + 1.0));
            assert!((v - closed).abs() < 1e-7 * closed, "θ={th}: {v} vs {closed}");
        }
    }
}
