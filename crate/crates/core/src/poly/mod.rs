//! Sparse multivariate polynomials over a named variable space.
//!
//! A [`VarSpace`] fixes an ordered list of variables, each tagged with a role
//! (state, input, disturbance, noise). A [`Polynomial`] maps exponent vectors
//! over that space to `f64` coefficients. Values are immutable after
//! construction and safe to share across threads.
//!
//! Besides plain arithmetic the module provides the operations the
//! certificate machinery is built on:
//!
//! - [`Polynomial::substitute`] — algebraic composition (controller plug-in,
//!   closed-loop assembly);
//! - [`Polynomial::gaussian_expectation`] — exact expectation over i.i.d.
//!   standard-normal noise variables via moment substitution;
//! - [`interval_bound`] / [`prove_nonneg`] — sound range enclosure on boxes
//!   and branch-and-bound nonnegativity proving on box unions.

mod interval;
mod nonneg;
mod region;
mod text;

pub use interval::{interval_bound, Interval};
pub use nonneg::{prove_nonneg, BnbStats, NonnegBudget, NonnegOutcome};
pub use region::{BoxBounds, Region};
pub use text::parse_polynomial;

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

/// Coefficients with absolute value below this are dropped at normalization.
pub const NORMALIZATION_EPS: f64 = 1e-15;

/// Default tolerance for nonnegativity checks.
pub const DEFAULT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PolyError {
    #[error("polynomials live in different variable spaces")]
    SpaceMismatch,
    #[error("point has dimension {got}, variable space has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate variable name `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is not in the target space (unbound after substitution)")]
    UnboundVariable(String),
    #[error("variable `{0}` does not have the noise role")]
    NotNoise(String),
    #[error("variable `{0}` is not covered by the box")]
    UncoveredVariable(String),
    #[error("region has no boxes")]
    EmptyRegion,
    #[error("substitution requires at least one binding to fix the target space")]
    EmptyBindings,
    #[error("box has lo > hi in dimension {0}")]
    InvertedInterval(usize),
    #[error("parse error: {0}")]
    Parse(String),
}

/// Role of a variable inside a subsystem description.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarRole {
    State,
    Input,
    Disturbance,
    Noise,
}

impl VarRole {
    /// Canonical name prefix used by the text form (`x1`, `nu2`, ...).
    pub fn prefix(self) -> &'static str {
        match self {
            VarRole::State => "x",
            VarRole::Input => "nu",
            VarRole::Disturbance => "w",
            VarRole::Noise => "sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarDef {
    pub name: String,
    pub role: VarRole,
}

/// Ordered, immutable list of named variables; exponent vectors index into it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VarSpace {
    vars: Vec<VarDef>,
}

impl VarSpace {
    pub fn new(vars: Vec<VarDef>) -> Result<Arc<Self>, PolyError> {
        let mut seen = BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.name.clone()) {
                return Err(PolyError::DuplicateVariable(v.name.clone()));
            }
        }
        Ok(Arc::new(VarSpace { vars }))
    }

    /// Canonical space with role-prefixed 1-based names:
    /// `x1..xn, nu1.., w1.., sigma1..`.
    pub fn canonical(n_state: usize, n_input: usize, n_dist: usize, n_noise: usize) -> Arc<Self> {
        let mut vars = Vec::new();
        for (count, role) in [
            (n_state, VarRole::State),
            (n_input, VarRole::Input),
            (n_dist, VarRole::Disturbance),
            (n_noise, VarRole::Noise),
        ] {
            for i in 1..=count {
                vars.push(VarDef {
                    name: format!("{}{}", role.prefix(), i),
                    role,
                });
            }
        }
        Arc::new(VarSpace { vars })
    }

    /// Space over state variables only (`x1..xn`).
    pub fn states_only(n_state: usize) -> Arc<Self> {
        Self::canonical(n_state, 0, 0, 0)
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn var(&self, i: usize) -> &VarDef {
        &self.vars[i]
    }

    pub fn vars(&self) -> &[VarDef] {
        &self.vars
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Indices of all variables with the given role, in declaration order.
    pub fn indices_with_role(&self, role: VarRole) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.vars[i].role == role).collect()
    }

    pub fn names_with_role(&self, role: VarRole) -> Vec<String> {
        self.vars
            .iter()
            .filter(|v| v.role == role)
            .map(|v| v.name.clone())
            .collect()
    }
}

/// Sparse multivariate polynomial with `f64` coefficients.
///
/// Terms are stored in a `BTreeMap` keyed by exponent vectors so iteration
/// order (and hence text output and report content) is deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    space: Arc<VarSpace>,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl Polynomial {
    pub fn zero(space: Arc<VarSpace>) -> Self {
        Polynomial { space, terms: BTreeMap::new() }
    }

    pub fn constant(space: Arc<VarSpace>, c: f64) -> Self {
        let mut p = Self::zero(space);
        if c.abs() >= NORMALIZATION_EPS {
            p.terms.insert(vec![0; p.space.dim()], c);
        }
        p
    }

    /// The monomial `1 * v` for the variable at index `i`.
    pub fn var(space: Arc<VarSpace>, i: usize) -> Self {
        assert!(i < space.dim(), "variable index out of range");
        let mut exp = vec![0u32; space.dim()];
        exp[i] = 1;
        let mut terms = BTreeMap::new();
        terms.insert(exp, 1.0);
        Polynomial { space, terms }
    }

    pub fn var_named(space: Arc<VarSpace>, name: &str) -> Result<Self, PolyError> {
        let i = space
            .index_of(name)
            .ok_or_else(|| PolyError::UnknownVariable(name.to_string()))?;
        Ok(Self::var(space, i))
    }

    /// Build from raw (exponent vector, coefficient) pairs; entries are summed
    /// and normalized.
    pub fn from_terms(
        space: Arc<VarSpace>,
        terms: impl IntoIterator<Item = (Vec<u32>, f64)>,
    ) -> Result<Self, PolyError> {
        let dim = space.dim();
        let mut p = Self::zero(space);
        for (exp, c) in terms {
            if exp.len() != dim {
                return Err(PolyError::DimensionMismatch { expected: dim, got: exp.len() });
            }
            *p.terms.entry(exp).or_insert(0.0) += c;
        }
        p.normalize();
        Ok(p)
    }

    pub fn space(&self) -> &Arc<VarSpace> {
        &self.space
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e[var]).max().unwrap_or(0)
    }

    /// Indices of variables that appear with a nonzero exponent.
    pub fn free_vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        for exp in self.terms.keys() {
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    out.insert(i);
                }
            }
        }
        out
    }

    fn normalize(&mut self) {
        self.terms.retain(|_, c| c.abs() >= NORMALIZATION_EPS && c.is_finite());
    }

    fn check_same_space(&self, other: &Self) -> Result<(), PolyError> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(PolyError::SpaceMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same_space(other)?;
        let mut out = self.clone();
        for (exp, c) in &other.terms {
            *out.terms.entry(exp.clone()).or_insert(0.0) += c;
        }
        out.normalize();
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero(self.space.clone());
        for (exp, v) in &self.terms {
            out.terms.insert(exp.clone(), v * c);
        }
        out.normalize();
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self, PolyError> {
        self.check_same_space(other)?;
        let mut out = Self::zero(self.space.clone());
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exp: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *out.terms.entry(exp).or_insert(0.0) += ca * cb;
            }
        }
        out.normalize();
        Ok(out)
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.space.clone(), 1.0);
        for _ in 0..k {
            acc = acc.mul(self).expect("same space");
        }
        acc
    }

    /// Exact monomial-sum evaluation at a full-dimension point.
    pub fn eval(&self, point: &[f64]) -> Result<f64, PolyError> {
        if point.len() != self.space.dim() {
            return Err(PolyError::DimensionMismatch {
                expected: self.space.dim(),
                got: point.len(),
            });
        }
        let mut acc = 0.0;
        for (exp, c) in &self.terms {
            let mut m = *c;
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    m *= point[i].powi(e as i32);
                }
            }
            acc += m;
        }
        Ok(acc)
    }

    /// Algebraic composition: each bound variable is replaced by its binding
    /// polynomial; unbound variables pass through by name into the target
    /// space. All bindings must live in one common target space.
    pub fn substitute(
        &self,
        bindings: &BTreeMap<String, Polynomial>,
    ) -> Result<Self, PolyError> {
        let target = bindings
            .values()
            .next()
            .map(|p| p.space.clone())
            .ok_or(PolyError::EmptyBindings)?;
        for (name, p) in bindings {
            if !(Arc::ptr_eq(&p.space, &target) || p.space == target) {
                return Err(PolyError::SpaceMismatch);
            }
            if self.space.index_of(name).is_none() {
                return Err(PolyError::UnknownVariable(name.clone()));
            }
        }
        // Per source variable: the polynomial it maps to in the target space.
        let mut images: Vec<Polynomial> = Vec::with_capacity(self.space.dim());
        for v in self.space.vars() {
            if let Some(b) = bindings.get(&v.name) {
                images.push(b.clone());
            } else {
                let idx = target
                    .index_of(&v.name)
                    .ok_or_else(|| PolyError::UnboundVariable(v.name.clone()))?;
                if target.var(idx).role != v.role {
                    return Err(PolyError::UnboundVariable(v.name.clone()));
                }
                images.push(Polynomial::var(target.clone(), idx));
            }
        }
        let mut out = Polynomial::zero(target.clone());
        for (exp, c) in &self.terms {
            let mut m = Polynomial::constant(target.clone(), *c);
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    m = m.mul(&images[i].powi(e))?;
                }
            }
            out = out.add(&m)?;
        }
        Ok(out)
    }

    /// Re-express the polynomial in `target`, mapping every variable by name.
    /// Errors if a free variable is missing from the target space.
    pub fn lift_into(&self, target: Arc<VarSpace>) -> Result<Self, PolyError> {
        let mut map = Vec::with_capacity(self.space.dim());
        for (i, v) in self.space.vars().iter().enumerate() {
            match target.index_of(&v.name) {
                Some(j) => map.push(j),
                None => {
                    if self.free_vars().contains(&i) {
                        return Err(PolyError::UnboundVariable(v.name.clone()));
                    }
                    map.push(usize::MAX);
                }
            }
        }
        let dim = target.dim();
        let mut out = Polynomial::zero(target);
        for (exp, c) in &self.terms {
            let mut nexp = vec![0u32; dim];
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    nexp[map[i]] += e;
                }
            }
            *out.terms.entry(nexp).or_insert(0.0) += c;
        }
        out.normalize();
        Ok(out)
    }

    /// Expectation over the listed noise variables, assumed i.i.d. standard
    /// normal: each factor `s^k` is replaced by the k-th standard-normal
    /// moment (0 for odd k, (k-1)!! for even k). The result lives in the same
    /// space with the noise variables eliminated.
    pub fn gaussian_expectation(&self, noise_vars: &[usize]) -> Result<Self, PolyError> {
        for &i in noise_vars {
            if i >= self.space.dim() {
                return Err(PolyError::DimensionMismatch {
                    expected: self.space.dim(),
                    got: i,
                });
            }
            if self.space.var(i).role != VarRole::Noise {
                return Err(PolyError::NotNoise(self.space.var(i).name.clone()));
            }
        }
        let noise: BTreeSet<usize> = noise_vars.iter().copied().collect();
        let mut out = Polynomial::zero(self.space.clone());
        'term: for (exp, c) in &self.terms {
            let mut coeff = *c;
            let mut nexp = exp.clone();
            for &i in &noise {
                let k = exp[i];
                if k % 2 == 1 {
                    continue 'term; // odd moment vanishes
                }
                if k > 0 {
                    coeff *= double_factorial(k - 1);
                    nexp[i] = 0;
                }
            }
            *out.terms.entry(nexp).or_insert(0.0) += coeff;
        }
        out.normalize();
        Ok(out)
    }

    /// Expectation over all variables with the noise role.
    pub fn expect_all_noise(&self) -> Result<Self, PolyError> {
        let idx = self.space.indices_with_role(VarRole::Noise);
        self.gaussian_expectation(&idx)
    }
}

/// (k)!! for even-moment computation; k is small in practice.
fn double_factorial(k: u32) -> f64 {
    let mut acc = 1.0;
    let mut i = k as i64;
    while i > 1 {
        acc *= i as f64;
        i -= 2;
    }
    acc
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        text::format_polynomial(self, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xspace() -> Arc<VarSpace> {
        VarSpace::canonical(1, 0, 0, 0)
    }

    fn x(space: &Arc<VarSpace>) -> Polynomial {
        Polynomial::var(space.clone(), 0)
    }

    #[test]
    fn eval_simple() {
        let s = xspace();
        let p = x(&s).powi(2).add(&Polynomial::constant(s.clone(), 1.0)).unwrap();
        assert_eq!(p.eval(&[2.0]).unwrap(), 5.0);
    }

    #[test]
    fn eval_case_study_certificate() {
        // 0.00242 x^4 - 0.091 x^3 + 0.7696 x^2 + 1.4935 x + 3.1329 at x = 20
        let s = xspace();
        let p = parse_polynomial(
            "0.00242*x1^4 - 0.091*x1^3 + 0.7696*x1^2 + 1.4935*x1 + 3.1329",
            &s,
        )
        .unwrap();
        let v = p.eval(&[20.0]).unwrap();
        assert!((v - 0.0429).abs() <= 1e-3, "got {v}");
    }

    #[test]
    fn eval_zero_polynomial() {
        let s = xspace();
        let p = Polynomial::zero(s);
        assert_eq!(p.eval(&[123.4]).unwrap(), 0.0);
    }

    #[test]
    fn eval_dimension_mismatch() {
        let s = xspace();
        let p = x(&s);
        assert!(matches!(
            p.eval(&[1.0, 2.0]),
            Err(PolyError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn arith_difference_of_squares() {
        let s = xspace();
        let one = Polynomial::constant(s.clone(), 1.0);
        let lhs = x(&s).add(&one).unwrap().mul(&x(&s).sub(&one).unwrap()).unwrap();
        let rhs = x(&s).powi(2).sub(&one).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn arith_scale_to_zero() {
        let s = xspace();
        assert!(x(&s).powi(2).scale(0.0).is_zero());
    }

    #[test]
    fn arith_binomial_square() {
        let s = VarSpace::canonical(2, 0, 0, 0);
        let x0 = Polynomial::var(s.clone(), 0);
        let x1 = Polynomial::var(s.clone(), 1);
        let sq = x0.add(&x1).unwrap().powi(2);
        let expect = x0
            .powi(2)
            .add(&x0.mul(&x1).unwrap().scale(2.0))
            .unwrap()
            .add(&x1.powi(2))
            .unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn arith_space_mismatch() {
        let a = Polynomial::var(VarSpace::canonical(1, 0, 0, 0), 0);
        let b = Polynomial::var(VarSpace::canonical(2, 0, 0, 0), 0);
        assert_eq!(a.add(&b).unwrap_err(), PolyError::SpaceMismatch);
    }

    #[test]
    fn substitute_shift() {
        // x^2 with x -> (y+1) gives y^2 + 2y + 1
        let sx = xspace();
        let sy = VarSpace::new(vec![VarDef { name: "y1".into(), role: VarRole::State }]).unwrap();
        let y = Polynomial::var(sy.clone(), 0);
        let img = y.add(&Polynomial::constant(sy.clone(), 1.0)).unwrap();
        let mut b = BTreeMap::new();
        b.insert("x1".to_string(), img);
        let out = x(&sx).powi(2).substitute(&b).unwrap();
        let expect = parse_polynomial("y1^2 + 2*y1 + 1", &sy).unwrap();
        assert_eq!(out, expect);
    }

    #[test]
    fn substitute_controller_value() {
        // nu -> -0.0121 x + 0.8, evaluated at x = 20 gives 0.558
        let full = VarSpace::canonical(1, 1, 0, 0);
        let state = xspace();
        let ctrl = parse_polynomial("-0.0121*x1 + 0.8", &state).unwrap();
        let nu = Polynomial::var_named(full, "nu1").unwrap();
        let mut b = BTreeMap::new();
        b.insert("nu1".to_string(), ctrl);
        let out = nu.substitute(&b).unwrap();
        assert!((out.eval(&[20.0]).unwrap() - 0.558).abs() < 1e-12);
    }

    #[test]
    fn substitute_identity() {
        let s = xspace();
        let p = parse_polynomial("3*x1^2 - 1", &s).unwrap();
        let mut b = BTreeMap::new();
        b.insert("x1".to_string(), x(&s));
        assert_eq!(p.substitute(&b).unwrap(), p);
    }

    #[test]
    fn substitute_unbound_missing_from_target() {
        let full = VarSpace::canonical(1, 1, 0, 0);
        let p = Polynomial::var_named(full.clone(), "x1")
            .unwrap()
            .mul(&Polynomial::var_named(full, "nu1").unwrap())
            .unwrap();
        // binding only nu1 into a space without x1
        let other = VarSpace::new(vec![VarDef { name: "z1".into(), role: VarRole::State }]).unwrap();
        let mut b = BTreeMap::new();
        b.insert("nu1".to_string(), Polynomial::var(other, 0));
        assert!(matches!(p.substitute(&b), Err(PolyError::UnboundVariable(_))));
    }

    #[test]
    fn gaussian_unit_variance() {
        let s = VarSpace::canonical(0, 0, 0, 1);
        let sig = Polynomial::var(s.clone(), 0);
        let e = sig.powi(2).expect_all_noise().unwrap();
        assert_eq!(e, Polynomial::constant(s, 1.0));
    }

    #[test]
    fn gaussian_fourth_moment() {
        let s = VarSpace::canonical(0, 0, 0, 1);
        let sig = Polynomial::var(s.clone(), 0);
        let e = sig.powi(4).expect_all_noise().unwrap();
        assert_eq!(e, Polynomial::constant(s, 3.0));
    }

    #[test]
    fn gaussian_odd_moments_vanish() {
        // (x + s)^2 -> x^2 + 1
        let s = VarSpace::canonical(1, 0, 0, 1);
        let x = Polynomial::var(s.clone(), 0);
        let sig = Polynomial::var(s.clone(), 1);
        let e = x.add(&sig).unwrap().powi(2).expect_all_noise().unwrap();
        let expect = x.powi(2).add(&Polynomial::constant(s, 1.0)).unwrap();
        assert_eq!(e, expect);
    }

    #[test]
    fn gaussian_shifted_quartic_closed_form() {
        // E[(x + 0.3 s)^4] = x^4 + 6*0.09 x^2 + 3*0.0081; at x=1: 1.5643
        let s = VarSpace::canonical(1, 0, 0, 1);
        let x = Polynomial::var(s.clone(), 0);
        let sig = Polynomial::var(s.clone(), 1).scale(0.3);
        let e = x.add(&sig).unwrap().powi(4).expect_all_noise().unwrap();
        let v = e.eval(&[1.0, 0.0]).unwrap();
        assert!((v - 1.5643).abs() < 1e-12, "got {v}");
    }

    #[test]
    fn gaussian_rejects_non_noise() {
        let s = VarSpace::canonical(1, 0, 0, 1);
        let x = Polynomial::var(s, 0);
        assert!(matches!(x.gaussian_expectation(&[0]), Err(PolyError::NotNoise(_))));
    }

    #[test]
    fn gaussian_identity_on_noise_free() {
        let s = VarSpace::canonical(2, 0, 0, 1);
        let p = parse_polynomial("1.5*x1^3*x2 - 2*x2^2 + 0.25", &s).unwrap();
        assert_eq!(p.expect_all_noise().unwrap(), p);
    }

    #[test]
    fn gaussian_linearity() {
        let s = VarSpace::canonical(1, 0, 0, 1);
        let p = parse_polynomial("x1^2*sigma1^2 + sigma1^4", &s).unwrap();
        let q = parse_polynomial("x1*sigma1^2 - 3*sigma1^6", &s).unwrap();
        let lhs = p.scale(2.5).add(&q.scale(-1.25)).unwrap().expect_all_noise().unwrap();
        let rhs = p
            .expect_all_noise()
            .unwrap()
            .scale(2.5)
            .add(&q.expect_all_noise().unwrap().scale(-1.25))
            .unwrap();
        for (exp, c) in lhs.terms() {
            let d = rhs.terms.get(exp).copied().unwrap_or(0.0);
            assert!((c - d).abs() <= 1e-12);
        }
        assert_eq!(lhs.num_terms(), rhs.num_terms());
    }

    #[test]
    fn lift_preserves_values() {
        let small = xspace();
        let big = VarSpace::canonical(1, 1, 1, 1);
        let p = parse_polynomial("2*x1^2 - 3", &small).unwrap();
        let lifted = p.lift_into(big).unwrap();
        assert_eq!(lifted.eval(&[2.0, 9.0, 9.0, 9.0]).unwrap(), 5.0);
    }
}
