//! Truncated power series.
//!
//! [`Series`] is exact algebra on coefficient vectors, generic over the
//! number type so the identities can be checked with rationals.
//! [`TruncatedExpansion`] carries `f64` coefficients with per-coefficient
//! error bars and propagates them through the same operations using
//! majorant series: if `|a_k - â_k| <= e_k`, the error of `F(a)` is bounded
//! coefficientwise by `F*(|â| + e) - F*(|â|)` where `F*` has the absolute
//! coefficients of `F`.

use std::fmt;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};

/// Power series `Σ_{k=0}^{N} c_k x^k` known through order `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Series<T> {
    coeffs: Vec<T>,
}

fn from_usize<T: FromPrimitive>(k: usize) -> T {
    T::from_usize(k).expect("small integers are representable")
}

impl<T: Num + Clone + FromPrimitive> Series<T> {
    /// Series with the given coefficients; order = `len - 1`. Empty input
    /// gives the zero series of order 0.
    pub fn new(mut coeffs: Vec<T>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(T::zero());
        }
        Self { coeffs }
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(T::one(), order)
    }

    pub fn constant(c: T, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series `x`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = T::one();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<T> {
        self.coeffs
    }

    /// Same series known through a different order, padding with zeros.
    pub fn truncate(&self, order: usize) -> Self {
        Self {
            coeffs: (0..=order).map(|k| self.coeff(k)).collect(),
        }
    }

    fn common_order(&self, other: &Self) -> usize {
        self.order().min(other.order())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.common_order(other);
        Self {
            coeffs: (0..=n).map(|k| self.coeff(k) + other.coeff(k)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.common_order(other);
        Self {
            coeffs: (0..=n).map(|k| self.coeff(k) - other.coeff(k)).collect(),
        }
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.common_order(other);
        let mut out = vec![T::zero(); n + 1];
        for i in 0..=n {
            if self.coeffs[i].is_zero() {
                continue;
            }
            for j in 0..=n - i {
                out[i + j] = out[i + j].clone() + self.coeffs[i].clone() * other.coeffs[j].clone();
            }
        }
        Self { coeffs: out }
    }

    /// Multiply by `x^k`; the order grows by `k`.
    pub fn shift(&self, k: usize) -> Self {
        let mut coeffs = vec![T::zero(); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Self { coeffs }
    }

    /// `exp` of a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::Domain("exp needs a zero constant term".into()));
        }
        let n = self.order();
        let mut e = vec![T::zero(); n + 1];
        e[0] = T::one();
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                acc = acc + from_usize::<T>(k) * self.coeffs[k].clone() * e[m - k].clone();
            }
            e[m] = acc / from_usize(m);
        }
        Ok(Self { coeffs: e })
    }

    /// `log` of a series with constant term one.
    pub fn log(&self) -> Result<Self> {
        if !self.coeffs[0].is_one() {
            return Err(Error::Domain("log needs constant term one".into()));
        }
        let n = self.order();
        let mut l = vec![T::zero(); n + 1];
        for m in 1..=n {
            let mut acc = self.coeffs[m].clone() * from_usize(m);
            for k in 1..m {
                acc = acc - from_usize::<T>(k) * l[k].clone() * self.coeffs[m - k].clone();
            }
            l[m] = acc / from_usize(m);
        }
        Ok(Self { coeffs: l })
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0].clone();
        if c0.is_zero() {
            return Err(Error::Domain("reciprocal needs a nonzero constant term".into()));
        }
        let n = self.order();
        let mut r = vec![T::zero(); n + 1];
        r[0] = T::one() / c0.clone();
        for m in 1..=n {
            let mut acc = T::zero();
            for k in 1..=m {
                acc = acc + self.coeffs[k].clone() * r[m - k].clone();
            }
            r[m] = (T::zero() - acc) / c0.clone();
        }
        Ok(Self { coeffs: r })
    }

    /// `self(inner(x))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeffs[0].is_zero() {
            return Err(Error::Domain(
                "inner series of a composition needs zero constant term".into(),
            ));
        }
        let n = self.order().min(inner.order());
        let inner = inner.truncate(n);
        let mut acc = Self::zero(n);
        for c in self.coeffs[..=n].iter().rev() {
            acc = acc.mul(&inner);
            acc.coeffs[0] = acc.coeffs[0].clone() + c.clone();
        }
        Ok(acc)
    }

    /// Compositional inverse `g` with `self(g(x)) = x`; needs `c_0 = 0`, `c_1 != 0`.
    pub fn reversion(&self) -> Result<Self> {
        let n = self.order();
        if !self.coeffs[0].is_zero() || n < 1 || self.coeffs[1].is_zero() {
            return Err(Error::Domain("reversion needs c_0 = 0 and c_1 != 0".into()));
        }
        let c1 = self.coeffs[1].clone();
        let mut g = Self::zero(n);
        g.coeffs[1] = T::one() / c1.clone();
        for k in 2..=n {
            let r = self.compose(&g)?.coeff(k);
            g.coeffs[k] = (T::zero() - r) / c1.clone();
        }
        Ok(g)
    }

    pub fn eval(&self, x: T) -> T {
        self.coeffs
            .iter()
            .rev()
            .fold(T::zero(), |acc, c| acc * x.clone() + c.clone())
    }
}

/// How the coefficients of an expansion were obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpansionMethod {
    Exact,
    Grid { h: f64 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl fmt::Display for ExpansionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExpansionMethod::Exact => write!(f, "exact"),
            ExpansionMethod::Grid { h } => write!(f, "grid(h={h})"),
            ExpansionMethod::MonteCarlo { samples, seed } => write!(f, "mc(samples={samples}, seed={seed})"),
        }
    }
}

/// `f64` series with a nonnegative error bound on each coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedExpansion {
    values: Series<f64>,
    errors: Vec<f64>,
    pub method: ExpansionMethod,
}

fn abs_series(s: &Series<f64>) -> Series<f64> {
    Series::new(s.coeffs().iter().map(|c| c.abs()).collect())
}

fn nonneg(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|e| e.max(0.0)).collect()
}

impl TruncatedExpansion {
    pub fn new(coefficients: Vec<f64>, errors: Vec<f64>, method: ExpansionMethod) -> Result<Self> {
        if coefficients.len() != errors.len() || coefficients.is_empty() {
            return Err(Error::Domain(
                "coefficients and errors must have the same nonzero length".into(),
            ));
        }
        if errors.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::Domain("error estimates must be nonnegative".into()));
        }
        Ok(Self {
            values: Series::new(coefficients),
            errors,
            method,
        })
    }

    pub fn exact(coefficients: Vec<f64>) -> Self {
        let errors = vec![0.0; coefficients.len().max(1)];
        Self {
            values: Series::new(coefficients),
            errors,
            method: ExpansionMethod::Exact,
        }
    }

    pub fn order(&self) -> usize {
        self.values.order()
    }

    pub fn coefficients(&self) -> &[f64] {
        self.values.coeffs()
    }

    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn coefficient(&self, k: usize) -> f64 {
        self.values.coeff(k)
    }

    pub fn error(&self, k: usize) -> f64 {
        self.errors.get(k).copied().unwrap_or(0.0)
    }

    pub fn series(&self) -> &Series<f64> {
        &self.values
    }

    fn error_series(&self) -> Series<f64> {
        Series::new(self.errors.clone())
    }

    fn with(&self, values: Series<f64>, errors: Vec<f64>) -> Self {
        Self {
            values,
            errors: nonneg(errors),
            method: self.method,
        }
    }

    fn upper(&self) -> (Series<f64>, Series<f64>) {
        let a = abs_series(&self.values);
        let hi = a.add(&self.error_series());
        (a, hi)
    }

    pub fn add(&self, other: &Self) -> Self {
        let values = self.values.add(&other.values);
        let errors = self.error_series().add(&other.error_series()).into_coeffs();
        self.with(values, errors)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let values = self.values.sub(&other.values);
        let errors = self.error_series().add(&other.error_series()).into_coeffs();
        self.with(values, errors)
    }

    pub fn scale(&self, c: f64) -> Self {
        let errors = self.errors.iter().map(|e| e * c.abs()).collect();
        self.with(self.values.scale(c), errors)
    }

    pub fn shift(&self, k: usize) -> Self {
        let mut errors = vec![0.0; k];
        errors.extend(&self.errors);
        self.with(self.values.shift(k), errors)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let errors = (0..=order).map(|k| self.error(k)).collect();
        self.with(self.values.truncate(order), errors)
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, ah) = self.upper();
        let (b, bh) = other.upper();
        let errors = ah.mul(&bh).sub(&a.mul(&b)).into_coeffs();
        self.with(self.values.mul(&other.values), errors)
    }

    pub fn exp(&self) -> Result<Self> {
        if self.error(0) > 0.0 {
            return Err(Error::Domain("exp needs an exact zero constant term".into()));
        }
        let values = self.values.exp()?;
        let (a, ah) = self.upper();
        let errors = ah.exp()?.sub(&a.exp()?).into_coeffs();
        Ok(self.with(values, errors))
    }

    pub fn log(&self) -> Result<Self> {
        if self.error(0) > 0.0 {
            return Err(Error::Domain("log needs an exact unit constant term".into()));
        }
        let values = self.values.log()?;
        // log(1 + u) is majorized by -log(1 - |u|).
        let n = self.order();
        let major = Series::new((0..=n).map(|k| if k == 0 { 0.0 } else { 1.0 / k as f64 }).collect());
        let (mut u, mut uh) = self.upper();
        u.coeffs[0] = 0.0;
        uh.coeffs[0] = 0.0;
        let errors = major.compose(&uh)?.sub(&major.compose(&u)?).into_coeffs();
        Ok(self.with(values, errors))
    }

    pub fn reciprocal(&self) -> Result<Self> {
        let values = self.values.reciprocal()?;
        let c = self.coefficient(0).abs();
        let c_lo = c - self.error(0);
        if !(c_lo > 0.0) {
            return Err(Error::Domain("constant term is not bounded away from zero".into()));
        }
        // 1/(c - U) has the absolute coefficients of the reciprocal of c + u.
        let (mut u, mut uh) = self.upper();
        u.coeffs[0] = -c;
        uh.coeffs[0] = -c_lo;
        let lo = u.scale(-1.0).reciprocal()?;
        let hi = uh.scale(-1.0).reciprocal()?;
        Ok(self.with(values, hi.sub(&lo).into_coeffs()))
    }

    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if inner.error(0) > 0.0 {
            return Err(Error::Domain("inner series needs an exact zero constant term".into()));
        }
        let values = self.values.compose(&inner.values)?;
        let (a, ah) = self.upper();
        let (b, bh) = inner.upper();
        let errors = ah.compose(&bh)?.sub(&a.compose(&b)?).into_coeffs();
        Ok(self.with(values, errors))
    }

    /// Value and error bound at `x`.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let err = self
            .errors
            .iter()
            .enumerate()
            .map(|(k, e)| e * x.abs().powi(k as i32))
            .sum();
        (self.values.eval(x), err)
    }

    /// Whether every coefficient lies within `k_sigma` error bars (plus
    /// `atol`) of the reference coefficients.
    pub fn agrees_with(&self, reference: &[f64], k_sigma: f64, atol: f64) -> bool {
        reference
            .iter()
            .enumerate()
            .all(|(k, r)| (self.coefficient(k) - r).abs() <= k_sigma * self.error(k) + atol)
    }
}
