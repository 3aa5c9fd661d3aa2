//! Complex multivariate polynomials and `poly × exp(quadratic + linear)` forms.
//!
//! Every Q-function in this crate is carried as a [`GaussPoly`]: a polynomial
//! prefactor multiplying the exponential of a [`QuadraticForm`]. Repeated
//! partial derivatives of such a form stay inside the family (product rule:
//! `∂[P e^E] = (∂P + P ∂E) e^E`), which is what [`GaussPoly::eliminate`] and
//! [`derivative_at_zero`] build on.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Product of variable powers, stored as sorted `(variable, power)` pairs.
/// Zero powers are never stored.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(SmallVec<[(u32, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn var(index: usize) -> Self {
        Self::pow(index, 1)
    }

    pub fn pow(index: usize, power: u32) -> Self {
        let mut m = Self::default();
        if power > 0 {
            m.0.push((index as u32, power));
        }
        m
    }

    /// Builds a monomial from arbitrary `(variable, power)` pairs, merging
    /// repeated variables.
    pub fn from_powers(powers: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut map = BTreeMap::new();
        for (var, p) in powers {
            *map.entry(var as u32).or_insert(0u32) += p;
        }
        Self(map.into_iter().filter(|&(_, p)| p > 0).collect())
    }

    pub fn power(&self, var: usize) -> u32 {
        let var = var as u32;
        self.0
            .binary_search_by_key(&var, |&(v, _)| v)
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&(_, p)| p).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0.iter().map(|&(v, p)| (v as usize, p))
    }

    pub fn max_var(&self) -> Option<usize> {
        self.0.last().map(|&(v, _)| v as usize)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = SmallVec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn eval(&self, point: &[C64]) -> C64 {
        self.0
            .iter()
            .fold(C64::new(1.0, 0.0), |acc, &(v, p)| acc * point[v as usize].powu(p))
    }

    /// `∂/∂x_var` of the monomial as `(multiplier, monomial)`, or `None` if
    /// the variable does not occur.
    fn derivative(&self, var: usize) -> Option<(u32, Monomial)> {
        let var = var as u32;
        let pos = self.0.binary_search_by_key(&var, |&(v, _)| v).ok()?;
        let p = self.0[pos].1;
        let mut out = self.0.clone();
        if p == 1 {
            out.remove(pos);
        } else {
            out[pos].1 = p - 1;
        }
        Some((p, Monomial(out)))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .powers()
            .map(|(v, p)| if p == 1 { format!("x{v}") } else { format!("x{v}^{p}") })
            .collect();
        write!(f, "{}", parts.join("·"))
    }
}

/// Sparse complex polynomial. Terms whose coefficient becomes exactly zero
/// are removed; nothing is pruned by magnitude.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Poly {
    terms: BTreeMap<Monomial, C64>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(Monomial::one(), c)
    }

    pub fn var(index: usize) -> Self {
        Self::monomial(Monomial::var(index), C64::new(1.0, 0.0))
    }

    pub fn monomial(m: Monomial, c: C64) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, C64)>) -> Self {
        let mut p = Self::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: C64) {
        if c == C64::new(0.0, 0.0) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = *e.get() + c;
                if v == C64::new(0.0, 0.0) {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C64)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; zero for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn coefficient(&self, m: &Monomial) -> C64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn constant_term(&self) -> C64 {
        self.coefficient(&Monomial::one())
    }

    /// Largest variable index used, if any.
    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().filter_map(Monomial::max_var).max()
    }

    pub fn uses_var(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.power(var) > 0)
    }

    pub fn eval(&self, point: &[C64]) -> C64 {
        self.terms.iter().map(|(m, c)| c * m.eval(point)).sum()
    }

    pub fn scale(&self, c: C64) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(m, v)| (m.clone(), v * c)))
    }

    pub fn differentiate(&self, var: usize) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.terms {
            if let Some((p, dm)) = m.derivative(var) {
                out.add_term(dm, c * p as f64);
            }
        }
        out
    }

    /// Sets `x_var = 0`.
    pub fn substitute_zero(&self, var: usize) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.power(var) == 0)
                .map(|(m, c)| (m.clone(), *c))
                .collect(),
        }
    }

    /// Product restricted to monomials accepted by `keep`.
    pub fn mul_filtered(&self, other: &Poly, keep: impl Fn(&Monomial) -> bool) -> Poly {
        let mut out = Poly::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let m = ma.mul(mb);
                if keep(&m) {
                    out.add_term(m, ca * cb);
                }
            }
        }
        out
    }

    /// Substitutes each variable by a polynomial: `x_i -> images[i]`.
    pub fn compose(&self, images: &[Poly]) -> Poly {
        let mut out = Poly::zero();
        // Cache powers of each image per variable.
        let mut cache: Vec<Vec<Poly>> = images.iter().map(|p| vec![Poly::one(), p.clone()]).collect();
        for (m, c) in &self.terms {
            let mut acc = Poly::constant(*c);
            for (v, p) in m.powers() {
                let powers = &mut cache[v];
                while powers.len() <= p as usize {
                    let next = powers.last().unwrap() * &images[v];
                    powers.push(next);
                }
                acc = &acc * &powers[p as usize];
            }
            out += &acc;
        }
        out
    }
}

/// Coefficientwise product of two polynomials.
pub fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    a.mul_filtered(b, |_| true)
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), *c);
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        poly_mul(self, rhs)
    }
}

/// `E(u) = uᵀ M u + Lᵀ u + c` with `M` kept symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticForm {
    matrix: DMatrix<C64>,
    linear: DVector<C64>,
    constant: C64,
}

impl QuadraticForm {
    pub fn new(matrix: DMatrix<C64>, linear: DVector<C64>, constant: C64) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension {
                expected: matrix.nrows(),
                got: matrix.ncols(),
            });
        }
        if linear.len() != matrix.nrows() {
            return Err(Error::Dimension {
                expected: matrix.nrows(),
                got: linear.len(),
            });
        }
        let sym = (&matrix + matrix.transpose()).scale(0.5);
        Ok(Self {
            matrix: sym,
            linear,
            constant,
        })
    }

    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, DVector::zeros(n), C64::default())
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
            linear: DVector::zeros(dim),
            constant: C64::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn linear(&self) -> &DVector<C64> {
        &self.linear
    }

    pub fn constant(&self) -> C64 {
        self.constant
    }

    pub fn value(&self, u: &[C64]) -> C64 {
        let n = self.dim();
        let mut acc = self.constant;
        for i in 0..n {
            let mut row = C64::default();
            for j in 0..n {
                row += self.matrix[(i, j)] * u[j];
            }
            acc += u[i] * (row + self.linear[i]);
        }
        acc
    }

    /// `∂E/∂u_var` as a linear polynomial.
    pub fn gradient(&self, var: usize) -> Poly {
        let mut p = Poly::constant(self.linear[var]);
        for j in 0..self.dim() {
            p.add_term(Monomial::var(j), self.matrix[(var, j)] * 2.0);
        }
        p
    }

    /// Sets `u_var = 0`, keeping the dimension.
    pub fn with_zeroed(&self, var: usize) -> Self {
        let mut out = self.clone();
        out.matrix.row_mut(var).fill(C64::default());
        out.matrix.column_mut(var).fill(C64::default());
        out.linear[var] = C64::default();
        out
    }

    /// Restriction to the listed variables (in the listed order).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let n = keep.len();
        Self {
            matrix: DMatrix::from_fn(n, n, |i, j| self.matrix[(keep[i], keep[j])]),
            linear: DVector::from_fn(n, |i, _| self.linear[keep[i]]),
            constant: self.constant,
        }
    }

    /// Re-expresses the form in a `dim`-variable space, variable `i` going to
    /// `map[i]`.
    pub fn embed(&self, dim: usize, map: &[usize]) -> Self {
        let mut out = Self::zeros(dim);
        for i in 0..self.dim() {
            out.linear[map[i]] += self.linear[i];
            for j in 0..self.dim() {
                out.matrix[(map[i], map[j])] += self.matrix[(i, j)];
            }
        }
        out.constant = self.constant;
        out
    }

    pub fn add(&self, other: &QuadraticForm) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            linear: &self.linear + &other.linear,
            constant: self.constant + other.constant,
        })
    }

    /// Gaussian integral over the variables in `vars` (each over ℝ).
    ///
    /// Returns the form in the remaining variables (original order) and the
    /// multiplicative constant `π^{n/2} / √det(−P)`, where `P` is the block of
    /// the integrated variables. The real part of `P` must be negative definite.
    pub fn integrate_out(&self, vars: &[usize]) -> Result<(QuadraticForm, C64)> {
        let n = self.dim();
        for &v in vars {
            if v >= n {
                return Err(Error::Index { var: v, dim: n });
            }
        }
        let keep: Vec<usize> = (0..n).filter(|i| !vars.contains(i)).collect();
        let nx = vars.len();
        let p = DMatrix::from_fn(nx, nx, |i, j| self.matrix[(vars[i], vars[j])]);
        let cross = DMatrix::from_fn(keep.len(), nx, |i, j| self.matrix[(keep[i], vars[j])]);
        let lx = DVector::from_fn(nx, |i, _| self.linear[vars[i]]);

        let re_p = p.map(|z| z.re);
        let re_p_sym = (&re_p + re_p.transpose()).scale(0.5);
        if nalgebra::Cholesky::new(-re_p_sym).is_none() {
            return Err(Error::domain(
                "Gaussian integral diverges: integrated block is not negative definite",
            ));
        }
        let lu = p.clone().lu();
        let p_inv = lu
            .try_inverse()
            .ok_or_else(|| Error::Consistency("singular Gaussian block".into()))?;
        let det_neg = (-p).determinant();
        let factor = C64::new(std::f64::consts::PI.powf(nx as f64 / 2.0), 0.0) / det_neg.sqrt();

        let base = self.restrict(&keep);
        let matrix = &base.matrix - &cross * &p_inv * cross.transpose();
        let linear = &base.linear - &cross * &p_inv * &lx;
        let constant = base.constant - (lx.transpose() * &p_inv * &lx)[(0, 0)] * 0.25;
        Ok((QuadraticForm::new(matrix, linear, constant)?, factor))
    }
}

/// `overall · prefactor(u) · exp(exponent(u))`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussPoly {
    prefactor: Poly,
    exponent: QuadraticForm,
    overall: C64,
}

impl GaussPoly {
    pub fn new(prefactor: Poly, exponent: QuadraticForm, overall: C64) -> Result<Self> {
        if let Some(v) = prefactor.max_var() {
            if v >= exponent.dim() {
                return Err(Error::Index {
                    var: v,
                    dim: exponent.dim(),
                });
            }
        }
        Ok(Self {
            prefactor,
            exponent,
            overall,
        })
    }

    pub fn from_exponent(exponent: QuadraticForm) -> Self {
        Self {
            prefactor: Poly::one(),
            exponent,
            overall: C64::new(1.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.exponent.dim()
    }

    pub fn prefactor(&self) -> &Poly {
        &self.prefactor
    }

    pub fn exponent(&self) -> &QuadraticForm {
        &self.exponent
    }

    pub fn overall(&self) -> C64 {
        self.overall
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self {
            overall: self.overall * c,
            ..self.clone()
        }
    }

    pub fn value(&self, u: &[C64]) -> C64 {
        self.overall * self.prefactor.eval(u) * self.exponent.value(u).exp()
    }

    fn check_var(&self, var: usize) -> Result<()> {
        if var >= self.dim() {
            Err(Error::Index {
                var,
                dim: self.dim(),
            })
        } else {
            Ok(())
        }
    }

    /// `∂/∂u_var`; the exponent is unchanged.
    pub fn differentiate(&self, var: usize) -> Result<Self> {
        self.check_var(var)?;
        let grad = self.exponent.gradient(var);
        let mut prefactor = self.prefactor.differentiate(var);
        prefactor += &(&self.prefactor * &grad);
        Ok(Self {
            prefactor,
            exponent: self.exponent.clone(),
            overall: self.overall,
        })
    }

    /// Sets `u_var = 0` in both prefactor and exponent.
    pub fn set_zero(&self, var: usize) -> Result<Self> {
        self.check_var(var)?;
        Ok(Self {
            prefactor: self.prefactor.substitute_zero(var),
            exponent: self.exponent.with_zeroed(var),
            overall: self.overall,
        })
    }

    /// Applies `∏ ∂^{n_i}/∂u_{v_i}^{n_i}` for every `(v_i, n_i)` in `orders`
    /// and then sets each `u_{v_i} = 0`. Variables not listed stay symbolic.
    ///
    /// Variables are processed one at a time and zeroed as soon as their
    /// derivatives are done. Terms whose power in a pending variable exceeds
    /// the derivatives still owed to it can never survive the final
    /// substitution and are dropped; this is exact.
    pub fn eliminate(&self, orders: &[(usize, u32)]) -> Result<Self> {
        let mut remaining: Vec<(usize, u32)> = Vec::with_capacity(orders.len());
        for &(var, n) in orders {
            self.check_var(var)?;
            if remaining.iter().any(|&(v, _)| v == var) {
                return Err(Error::Usage(format!("variable {var} listed twice")));
            }
            remaining.push((var, n));
        }

        let mut prefactor = self.prefactor.clone();
        let mut exponent = self.exponent.clone();
        for &(var, n) in orders {
            if n == 0 {
                prefactor = prefactor.substitute_zero(var);
                exponent = exponent.with_zeroed(var);
            }
        }
        let owed = |m: &Monomial, remaining: &[(usize, u32)]| {
            remaining.iter().all(|&(w, r)| m.power(w) <= r)
        };
        prefactor = Poly::from_terms(
            prefactor
                .terms()
                .filter(|(m, _)| owed(m, &remaining))
                .map(|(m, c)| (m.clone(), *c)),
        );

        for (idx, &(var, n)) in orders.iter().enumerate() {
            if n == 0 {
                continue;
            }
            for _ in 0..n {
                remaining[idx].1 -= 1;
                let grad = exponent.gradient(var);
                let mut next = prefactor.differentiate(var);
                next.terms.retain(|m, _| owed(m, &remaining));
                let prod = prefactor.mul_filtered(&grad, |m| owed(m, &remaining));
                next += &prod;
                prefactor = next;
            }
            prefactor = prefactor.substitute_zero(var);
            exponent = exponent.with_zeroed(var);
        }
        Ok(Self {
            prefactor,
            exponent,
            overall: self.overall,
        })
    }

    /// Restricts to the listed variables. The prefactor and exponent must not
    /// depend on any dropped variable.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let n = self.dim();
        for v in (0..n).filter(|v| !keep.contains(v)) {
            let in_exp = self.exponent.linear[v] != C64::default()
                || self.exponent.matrix.row(v).iter().any(|z| *z != C64::default());
            if self.prefactor.uses_var(v) || in_exp {
                return Err(Error::Consistency(format!(
                    "cannot drop variable {v}: form still depends on it"
                )));
            }
        }
        let mut index = vec![usize::MAX; n];
        for (new, &old) in keep.iter().enumerate() {
            index[old] = new;
        }
        let prefactor = Poly::from_terms(self.prefactor.terms().map(|(m, c)| {
            (
                Monomial::from_powers(m.powers().map(|(v, p)| (index[v], p))),
                *c,
            )
        }));
        Ok(Self {
            prefactor,
            exponent: self.exponent.restrict(keep),
            overall: self.overall,
        })
    }
}

/// `∏ᵢ ∂^{orders[i]}/∂uᵢ^{orders[i]} g` evaluated at `u = 0`.
pub fn derivative_at_zero(g: &GaussPoly, orders: &[u32]) -> Result<C64> {
    if orders.len() != g.dim() {
        return Err(Error::Dimension {
            expected: g.dim(),
            got: orders.len(),
        });
    }
    let pairs: Vec<(usize, u32)> = orders.iter().copied().enumerate().collect();
    let reduced = g.eliminate(&pairs)?;
    Ok(reduced.overall * reduced.prefactor.constant_term() * reduced.exponent.constant.exp())
}
