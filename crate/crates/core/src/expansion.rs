//! Density and activity expansions at finite order.
//!
//! Coefficients are integrals of brute-force graph sums over free points,
//! computed with an [`Integrator`]. For a density `ρ(dy) = λ · shape(y) dy`
//! the coefficient of `λ^n` is `(1/n!) ∫ F(x, y) ∏ shape(y_i) dy`; the
//! homogeneous case has `shape = 1` and `λ = ρ`.
//!
//! The operators `R_ρ`, `K_ρ` and `T_z` take a [`WeightAnsatz`]. Ansätze of
//! product form `p ∏ φ(x_i)` are integrated in closed form from the single
//! integral `∫ |f(x, y)| φ(y) ρ(dy)`; all others are integrated term by term
//! up to a cutoff `j_max`.

use std::fmt;
use std::sync::Arc;

use crate::error::{check_bound, Error, Result};
use crate::integrate::{Config, Estimate, Integrator};
use crate::numeric::factorial;
use crate::polynomial::{class_polynomial, ClassShape, GraphPolynomial, MAX_POLY_VERTICES};
use crate::series::TruncatedExpansion;
use crate::weights::{PairPotential, Point};

/// Largest number of free points in a term-by-term operator sum.
pub const MAX_OPERATOR_TERMS: usize = 6;

/// Relative size below which operator terms are dropped.
pub const TERM_CUTOFF: f64 = 1e-12;

type SiteFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;
type TupleFn = Arc<dyn Fn(&[Point]) -> f64 + Send + Sync>;

/// Density measure `ρ(dy) = scale · shape(y) dy` with its reference potential.
#[derive(Clone)]
pub struct DensityModel {
    scale: f64,
    shape: Option<SiteFn>,
    potential: PairPotential,
    reference: Point,
}

impl fmt::Debug for DensityModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensityModel")
            .field("scale", &self.scale)
            .field("homogeneous", &self.shape.is_none())
            .field("potential", &self.potential)
            .field("reference", &self.reference)
            .finish()
    }
}

impl DensityModel {
    /// Constant density `rho` (or constant activity, when used as `z`).
    pub fn homogeneous(rho: f64, potential: PairPotential) -> Result<Self> {
        if !(rho >= 0.0) || !rho.is_finite() {
            return Err(Error::Domain(format!(
                "density must be finite and nonnegative, got {rho}"
            )));
        }
        let reference = Point::origin(potential.dim());
        Ok(Self {
            scale: rho,
            shape: None,
            potential,
            reference,
        })
    }

    /// Density `scale · shape(y)`; `shape` must be nonnegative.
    pub fn general<F>(scale: f64, potential: PairPotential, shape: F) -> Result<Self>
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        let mut m = Self::homogeneous(scale, potential)?;
        m.shape = Some(Arc::new(shape));
        Ok(m)
    }

    /// Point at which coefficient tables of homogeneous series are taken.
    pub fn with_reference(mut self, reference: Point) -> Self {
        self.reference = reference;
        self
    }

    /// Same shape at another scale.
    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        if !(scale >= 0.0) || !scale.is_finite() {
            return Err(Error::Domain(format!(
                "density must be finite and nonnegative, got {scale}"
            )));
        }
        let mut m = self.clone();
        m.scale = scale;
        Ok(m)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn rho(&self) -> f64 {
        self.scale
    }

    pub fn potential(&self) -> &PairPotential {
        &self.potential
    }

    pub fn reference(&self) -> Point {
        self.reference
    }

    pub fn is_homogeneous(&self) -> bool {
        self.shape.is_none()
    }

    /// Density at `y`.
    pub fn density(&self, y: &Point) -> f64 {
        self.scale * self.shape_at(y)
    }

    fn shape_at(&self, y: &Point) -> f64 {
        self.shape.as_ref().map_or(1.0, |s| s(y))
    }

    fn shape_product(&self, free: &[Point]) -> f64 {
        match &self.shape {
            None => 1.0,
            Some(s) => free.iter().map(|y| s(y)).product(),
        }
    }

    /// `∫ F(fixed, y) ∏ shape(y_i) dy` over `n` free points.
    fn integrate<F>(&self, integ: &Integrator, fixed: &[Point], n: usize, integrand: F) -> Result<Estimate>
    where
        F: Fn(&Config<'_>) -> f64 + Sync,
    {
        let s = fixed.len();
        integ.integrate(fixed, n, &self.potential, true, |c| {
            let v = integrand(c);
            if v == 0.0 {
                0.0
            } else {
                v * self.shape_product(&c.points()[s..])
            }
        })
    }
}

/// Per-site factor of a product-form ansatz.
#[derive(Clone)]
pub enum SiteFactor {
    Const(f64),
    Func(SiteFn),
}

impl SiteFactor {
    pub fn at(&self, x: &Point) -> f64 {
        match self {
            SiteFactor::Const(c) => *c,
            SiteFactor::Func(f) => f(x),
        }
    }

    fn times(&self, other: &SiteFactor) -> SiteFactor {
        match (self, other) {
            (SiteFactor::Const(a), SiteFactor::Const(b)) => SiteFactor::Const(a * b),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                SiteFactor::Func(Arc::new(move |x| a.at(x) * b.at(x)))
            }
        }
    }
}

/// Weight function `m` on finite point tuples.
#[derive(Clone)]
pub enum WeightAnsatz {
    /// `κ^s`.
    PowS(f64),
    /// `κ^(s-1)`.
    PowS1(f64),
    /// `κ^(s-1) ∏_{i<j} (1 + f(x_i, x_j))`.
    Nf { kappa: f64, potential: PairPotential },
    /// `exp(b(x_1) + ... + b(x_s))`.
    ExpB(SiteFn),
    /// `base(x) ∏ factor(x_i)`.
    Scaled {
        base: Box<WeightAnsatz>,
        factor: SiteFactor,
    },
    /// User function, assumed symmetric. `vanishes_on_overlap` declares that
    /// it is zero whenever two points overlap under a hard core.
    Custom { m: TupleFn, vanishes_on_overlap: bool },
}

impl fmt::Debug for WeightAnsatz {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightAnsatz::PowS(k) => write!(f, "PowS({k})"),
            WeightAnsatz::PowS1(k) => write!(f, "PowS1({k})"),
            WeightAnsatz::Nf { kappa, .. } => write!(f, "Nf({kappa})"),
            WeightAnsatz::ExpB(_) => write!(f, "ExpB(..)"),
            WeightAnsatz::Scaled { base, .. } => write!(f, "Scaled({base:?})"),
            WeightAnsatz::Custom { .. } => write!(f, "Custom(..)"),
        }
    }
}

impl WeightAnsatz {
    pub fn exp_b<F>(b: F) -> Self
    where
        F: Fn(&Point) -> f64 + Send + Sync + 'static,
    {
        WeightAnsatz::ExpB(Arc::new(b))
    }

    pub fn custom<F>(m: F, vanishes_on_overlap: bool) -> Self
    where
        F: Fn(&[Point]) -> f64 + Send + Sync + 'static,
    {
        WeightAnsatz::Custom {
            m: Arc::new(m),
            vanishes_on_overlap,
        }
    }

    pub fn eval(&self, xs: &[Point]) -> f64 {
        let s = xs.len() as i32;
        match self {
            WeightAnsatz::PowS(k) => k.powi(s),
            WeightAnsatz::PowS1(k) => k.powi(s - 1),
            WeightAnsatz::Nf { kappa, potential } => {
                let mut p = kappa.powi(s - 1);
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        p *= 1.0 + potential.f(&xs[i], &xs[j]);
                    }
                }
                p
            }
            WeightAnsatz::ExpB(b) => xs.iter().map(|x| b(x)).sum::<f64>().exp(),
            WeightAnsatz::Scaled { base, factor } => base.eval(xs) * xs.iter().map(|x| factor.at(x)).product::<f64>(),
            WeightAnsatz::Custom { m, .. } => m(xs),
        }
    }

    /// `(p, φ)` with `m(x_1..x_s) = p ∏ φ(x_i)`, if the ansatz has that form.
    fn product_form(&self) -> Option<(f64, SiteFactor)> {
        match self {
            WeightAnsatz::PowS(k) => Some((1.0, SiteFactor::Const(*k))),
            WeightAnsatz::PowS1(k) => Some((1.0 / k, SiteFactor::Const(*k))),
            WeightAnsatz::ExpB(b) => {
                let b = b.clone();
                Some((1.0, SiteFactor::Func(Arc::new(move |x| b(x).exp()))))
            }
            WeightAnsatz::Scaled { base, factor } => base.product_form().map(|(p, phi)| (p, phi.times(factor))),
            WeightAnsatz::Nf { .. } | WeightAnsatz::Custom { .. } => None,
        }
    }

    fn vanishes_on_overlap(&self) -> bool {
        match self {
            WeightAnsatz::Nf { potential, .. } => potential.hard_core_diameter().is_some(),
            WeightAnsatz::Scaled { base, .. } => base.vanishes_on_overlap(),
            WeightAnsatz::Custom {
                vanishes_on_overlap, ..
            } => *vanishes_on_overlap,
            _ => false,
        }
    }
}

/// Most points that fit within distance `< σ` of a point while staying
/// pairwise `>= σ` apart.
pub fn packing_bound(dim: usize) -> usize {
    match dim {
        1 => 2,
        2 => 5,
        _ => 12,
    }
}

fn poly(shape: ClassShape) -> Arc<GraphPolynomial> {
    class_polynomial(shape)
}

/// Coefficients `c_n = (1/n!) ∫ F_n(fixed, y) dy`, `n = 0..=order`, as an expansion.
fn coefficient_table<G>(
    model: &DensityModel,
    integ: &Integrator,
    fixed: &[Point],
    order: usize,
    term: G,
) -> Result<TruncatedExpansion>
where
    G: Fn(usize) -> Arc<dyn Fn(&Config<'_>) -> f64 + Send + Sync>,
{
    let mut coeffs = Vec::with_capacity(order + 1);
    let mut errors = Vec::with_capacity(order + 1);
    for n in 0..=order {
        let f = term(n);
        let e = model.integrate(integ, fixed, n, |c| f(c))?.scale(1.0 / factorial(n));
        coeffs.push(e.value);
        errors.push(e.error);
    }
    TruncatedExpansion::new(coeffs, errors, integ.expansion_method())
}

fn check_psi_size(s: usize, order: usize) -> Result<()> {
    check_bound("points plus order", s + order, 1, MAX_POLY_VERTICES)
}

fn sum_estimates(e: &TruncatedExpansion, x: f64) -> Estimate {
    let (value, error) = e.eval(x);
    Estimate { value, error }
}

/// Coefficients of `ḡ(xs; ρ)`: `(1/n!) ∫ |ψ(xs; y_1..y_n)|`.
pub fn gbar_coefficients(
    xs: &[Point],
    model: &DensityModel,
    order: usize,
    integ: &Integrator,
) -> Result<TruncatedExpansion> {
    check_psi_size(xs.len(), order)?;
    let s = xs.len();
    coefficient_table(model, integ, xs, order, |n| {
        let p = poly(ClassShape::D { white: s, black: n });
        Arc::new(move |c: &Config<'_>| p.eval(c.edges()).abs())
    })
}

/// `ḡ^(N)(xs)`: the partial sum through `N` black points.
pub fn gbar_partial(xs: &[Point], model: &DensityModel, order: usize, integ: &Integrator) -> Result<Estimate> {
    Ok(sum_estimates(&gbar_coefficients(xs, model, order, integ)?, model.scale))
}

/// Coefficients of `g(xs; ρ)`: `(1/n!) ∫ ψ(xs; y_1..y_n)`.
pub fn g_coefficients(
    xs: &[Point],
    model: &DensityModel,
    order: usize,
    integ: &Integrator,
) -> Result<TruncatedExpansion> {
    check_psi_size(xs.len(), order)?;
    let s = xs.len();
    coefficient_table(model, integ, xs, order, |n| {
        let p = poly(ClassShape::D { white: s, black: n });
        Arc::new(move |c: &Config<'_>| p.eval(c.edges()))
    })
}

/// Partial sum of `g(xs; ρ)` through order `N`.
pub fn g_partial(xs: &[Point], model: &DensityModel, order: usize, integ: &Integrator) -> Result<Estimate> {
    Ok(sum_estimates(&g_coefficients(xs, model, order, integ)?, model.scale))
}

/// Coefficients of `α(xs; z)` in the activity: `(1/n!) ∫ φ(xs; y_1..y_n)`.
pub fn alpha_coefficients(
    xs: &[Point],
    model: &DensityModel,
    order: usize,
    integ: &Integrator,
) -> Result<TruncatedExpansion> {
    check_psi_size(xs.len(), order)?;
    let s = xs.len();
    coefficient_table(model, integ, xs, order, |n| {
        let p = poly(ClassShape::C { white: s, black: n });
        Arc::new(move |c: &Config<'_>| p.eval(c.edges()))
    })
}

/// Partial sum of `α(xs; z)` through order `N`; `model` holds the activity.
pub fn alpha_partial(xs: &[Point], model: &DensityModel, order: usize, integ: &Integrator) -> Result<Estimate> {
    Ok(sum_estimates(
        &alpha_coefficients(xs, model, order, integ)?,
        model.scale,
    ))
}

fn check_series_order(order: usize) -> Result<()> {
    check_bound("series order", order, 1, MAX_POLY_VERTICES - 1)
}

/// Coefficients `d_n(x_1) = (1/n!) ∫ D_{n+1}(x_1, y)`, `n = 1..=N`, with `d_0 = 0`.
pub fn d_partial(x1: &Point, model: &DensityModel, order: usize, integ: &Integrator) -> Result<TruncatedExpansion> {
    check_series_order(order)?;
    coefficient_table(model, integ, std::slice::from_ref(x1), order, |n| {
        if n == 0 {
            return Arc::new(|_: &Config<'_>| 0.0);
        }
        let p = poly(ClassShape::TwoConnected(n + 1));
        Arc::new(move |c: &Config<'_>| p.eval(c.edges()))
    })
}

/// `Σ_{n=1}^N (1/n!) ∫ |D_{n+1}(x_1, y)| ρ^n(dy)`.
pub fn dbar_partial(x1: &Point, model: &DensityModel, order: usize, integ: &Integrator) -> Result<Estimate> {
    check_series_order(order)?;
    let table = coefficient_table(model, integ, std::slice::from_ref(x1), order, |n| {
        if n == 0 {
            return Arc::new(|_: &Config<'_>| 0.0);
        }
        let p = poly(ClassShape::TwoConnected(n + 1));
        Arc::new(move |c: &Config<'_>| p.eval(c.edges()).abs())
    })?;
    Ok(sum_estimates(&table, model.scale))
}

/// Rooted connected coefficients `b̃_n = (1/n!) ∫ φ^T_{n+1}(q, y)`, `b̃_0 = 1`.
pub fn ursell_coefficients(
    q: &Point,
    model: &DensityModel,
    order: usize,
    integ: &Integrator,
) -> Result<TruncatedExpansion> {
    check_series_order(order)?;
    coefficient_table(model, integ, std::slice::from_ref(q), order, |n| {
        let p = poly(ClassShape::Connected(n + 1));
        Arc::new(move |c: &Config<'_>| p.eval(c.edges()))
    })
}

/// `z` as a series in the density scale: `ρ exp(-Σ_n d_n ρ^n)` through order `N + 1`,
/// with `d_n` taken at the model's reference point.
pub fn activity_from_density(model: &DensityModel, order: usize, integ: &Integrator) -> Result<TruncatedExpansion> {
    let d = d_partial(&model.reference, model, order, integ)?;
    let shape = model.shape_at(&model.reference);
    Ok(d.scale(-1.0).exp()?.shift(1).scale(shape))
}

/// `ρ_1^z` as a series in the activity scale: `z (1 + Σ_n b̃_n z^n)` through order `N + 1`.
pub fn density_from_activity(model: &DensityModel, order: usize, integ: &Integrator) -> Result<TruncatedExpansion> {
    let b = ursell_coefficients(&model.reference, model, order, integ)?;
    let shape = model.shape_at(&model.reference);
    Ok(b.shift(1).scale(shape))
}

/// `∫ |f(x, y)| φ(y) ρ(dy)`.
fn single_integral(phi: &SiteFactor, x: &Point, model: &DensityModel, integ: &Integrator) -> Result<Estimate> {
    let v = &model.potential;
    if let (SiteFactor::Const(k), true, Some(c)) = (phi, model.is_homogeneous(), v.integral_c()) {
        return Ok(Estimate::exact(c * model.scale * k));
    }
    let e = model.integrate(integ, std::slice::from_ref(x), 1, |c| {
        c.f(0, 1).abs() * phi.at(&c.points()[1])
    })?;
    Ok(e.scale(model.scale))
}

/// `Σ_{j=1}^{J} a^j / j!`, or `e^a - 1` when `J` is unbounded.
fn exp_tail(a: f64, jmax: Option<usize>) -> f64 {
    match jmax {
        None => a.exp_m1(),
        Some(j) => (1..=j).map(|k| a.powi(k as i32) / factorial(k)).sum(),
    }
}

fn default_jmax(m: &WeightAnsatz, model: &DensityModel) -> Option<usize> {
    (m.vanishes_on_overlap() && model.potential.hard_core_diameter().is_some())
        .then(|| packing_bound(model.potential.dim()))
}

/// `Σ_{j≥1} (1/j!) ∫ ∏ |f(x_1, y_i)| m(rest, y_1..y_j) ρ^j(dy)`.
fn attached_sum(
    m: &WeightAnsatz,
    x1: &Point,
    rest: &[Point],
    model: &DensityModel,
    integ: &Integrator,
    jmax: Option<usize>,
) -> Result<Estimate> {
    if model.scale == 0.0 {
        return Ok(Estimate::ZERO);
    }
    if let Some((p, phi)) = m.product_form() {
        let a = single_integral(&phi, x1, model, integ)?;
        let prefix = p * rest.iter().map(|x| phi.at(x)).product::<f64>();
        let value = prefix * exp_tail(a.value, jmax);
        let slope = prefix * (1.0 + exp_tail(a.value, jmax.map(|j| j.saturating_sub(1))));
        return Ok(Estimate {
            value,
            error: slope.abs() * a.error,
        });
    }
    let limit = jmax.or_else(|| default_jmax(m, model)).unwrap_or(MAX_OPERATOR_TERMS);
    let adaptive = jmax.is_none() && default_jmax(m, model).is_none();
    let mut total = Estimate::ZERO;
    for j in 1..=limit.min(MAX_OPERATOR_TERMS) {
        let term = model
            .integrate(integ, std::slice::from_ref(x1), j, |c| {
                let mut w = 1.0;
                for i in 1..=j {
                    w *= c.f(0, i).abs();
                    if w == 0.0 {
                        return 0.0;
                    }
                }
                let mut args: Vec<Point> = Vec::with_capacity(rest.len() + j);
                args.extend_from_slice(rest);
                args.extend_from_slice(&c.points()[1..]);
                w * m.eval(&args)
            })?
            .scale(model.scale.powi(j as i32) / factorial(j));
        total = total + term;
        if adaptive && term.value.abs() <= TERM_CUTOFF * total.value.abs() {
            break;
        }
    }
    Ok(total)
}

/// `(R_ρ m)(x_1)`.
pub fn r_rho(
    m: &WeightAnsatz,
    x1: &Point,
    model: &DensityModel,
    jmax: Option<usize>,
    integ: &Integrator,
) -> Result<Estimate> {
    attached_sum(m, x1, &[], model, integ, jmax)
}

fn one_plus_f_root(xs: &[Point], v: &PairPotential) -> f64 {
    xs[1..].iter().map(|x| 1.0 + v.f(&xs[0], x)).product()
}

/// `(K_ρ m)(x_1..x_s)`; `+∞` when `(R_ρ m)(x_1) >= 1`.
pub fn apply_k(
    m: &WeightAnsatz,
    xs: &[Point],
    model: &DensityModel,
    integ: &Integrator,
    jmax: Option<usize>,
) -> Result<Estimate> {
    if xs.is_empty() {
        return Err(Error::Domain("K acts on tuples of at least one point".into()));
    }
    if xs.len() == 1 {
        return Ok(Estimate::exact(1.0));
    }
    let r = r_rho(m, &xs[0], model, jmax, integ)?;
    if r.value >= 1.0 {
        return Ok(Estimate::exact(f64::INFINITY));
    }
    let pre = one_plus_f_root(xs, &model.potential);
    if pre == 0.0 {
        return Ok(Estimate::ZERO);
    }
    let rest = &xs[1..];
    let bracket = attached_sum(m, &xs[0], rest, model, integ, jmax)?;
    let head = m.eval(rest);
    let b = head + bracket.value;
    let geo = 1.0 / (1.0 - r.value);
    Ok(Estimate {
        value: pre * b * geo,
        error: pre.abs() * (bracket.error * geo + b.abs() * geo * geo * r.error),
    })
}

/// `(T_z m̃)(x_1..x_s)`; `model` holds the activity.
pub fn apply_t(
    mtilde: &WeightAnsatz,
    xs: &[Point],
    model: &DensityModel,
    integ: &Integrator,
    jmax: Option<usize>,
) -> Result<Estimate> {
    if xs.is_empty() {
        return Err(Error::Domain("T acts on tuples of at least one point".into()));
    }
    if xs.len() == 1 {
        return Ok(Estimate::exact(1.0) + r_rho(mtilde, &xs[0], model, jmax, integ)?);
    }
    let pre = one_plus_f_root(xs, &model.potential);
    if pre == 0.0 {
        return Ok(Estimate::ZERO);
    }
    let rest = &xs[1..];
    let bracket = attached_sum(mtilde, &xs[0], rest, model, integ, jmax)?;
    Ok(Estimate::exact(mtilde.eval(rest)).scale(pre) + bracket.scale(pre))
}

/// `-log(1 - (R_ρ m)(x_1))`, `+∞` when the argument of the log is not positive.
pub fn dbar_bound(x1: &Point, model: &DensityModel, m: &WeightAnsatz, integ: &Integrator) -> Result<Estimate> {
    let r = r_rho(m, x1, model, None, integ)?;
    if r.value >= 1.0 {
        return Ok(Estimate::exact(f64::INFINITY));
    }
    Ok(Estimate {
        value: -(-r.value).ln_1p(),
        error: r.error / (1.0 - r.value),
    })
}

/// `m̃(x) = m(x) ∏ (1 - (R_ρ m)(x_i))`.
pub fn mtilde_from_m(m: &WeightAnsatz, model: &DensityModel, integ: &Integrator) -> Result<WeightAnsatz> {
    let check = |r: f64| {
        if r >= 1.0 {
            Err(Error::Domain(format!("R_rho m = {r} >= 1, so m-tilde is undefined")))
        } else {
            Ok(1.0 - r)
        }
    };
    let homogeneous_product = model.is_homogeneous()
        && matches!(m.product_form(), Some((_, SiteFactor::Const(_))))
        && model.potential.integral_c().is_some();
    let factor = if homogeneous_product {
        SiteFactor::Const(check(r_rho(m, &model.reference, model, None, integ)?.value)?)
    } else {
        check(r_rho(m, &model.reference, model, None, integ)?.value)?;
        let (m2, model2, integ2) = (m.clone(), model.clone(), integ.without_error());
        SiteFactor::Func(Arc::new(move |x: &Point| {
            let r = r_rho(&m2, x, &model2, None, &integ2)
                .map(|e| e.value)
                .unwrap_or(f64::INFINITY);
            (1.0 - r).max(0.0)
        }))
    };
    Ok(WeightAnsatz::Scaled {
        base: Box::new(m.clone()),
        factor,
    })
}

/// `(1 + R)/(1 - R) <= m(x_1)` with `R = (R_ρ m)(x_1)`; returns the margin `m(x_1) - (1+R)/(1-R)`.
pub fn suppsuff_margin(m: &WeightAnsatz, x1: &Point, model: &DensityModel, integ: &Integrator) -> Result<f64> {
    let r = r_rho(m, x1, model, None, integ)?.value;
    let lhs = if r >= 1.0 { f64::INFINITY } else { (1.0 + r) / (1.0 - r) };
    Ok(m.eval(std::slice::from_ref(x1)) - lhs)
}

/// Smallest index `i` with `Σ_{j≠i} v(x_i, x_j) >= -2B`.
pub fn select_stable_index(xs: &[Point], v: &PairPotential) -> Result<usize> {
    let bound = -2.0 * v.stability_b();
    (0..xs.len())
        .find(|&i| {
            let s: f64 = (0..xs.len()).filter(|&j| j != i).map(|j| v.v(&xs[i], &xs[j])).sum();
            s >= bound
        })
        .ok_or_else(|| Error::Data("no index satisfies the stability inequality; the declared B is too small".into()))
}

/// The tuple with the stable index moved to the front.
pub fn stable_order(xs: &[Point], v: &PairPotential) -> Result<Vec<Point>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    let i = select_stable_index(xs, v)?;
    let mut out = Vec::with_capacity(xs.len());
    out.push(xs[i]);
    out.extend(xs.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, p)| *p));
    Ok(out)
}

/// Residual of the Kirkwood–Salsburg equation for `s` points, divided by `ρ^s`,
/// with `ρ_k = g ρ^k` and `g` truncated at order `N`, and `z` from
/// [`activity_from_density`]. Returns the residual series coefficients through
/// order `N + 1` at the configuration `xs`.
pub fn ks_residual_series(
    xs: &[Point],
    model: &DensityModel,
    order: usize,
    integ: &Integrator,
) -> Result<TruncatedExpansion> {
    let s = xs.len();
    if s == 0 {
        return Err(Error::Domain("the equation needs at least one point".into()));
    }
    check_bound("points plus order", s + order, 1, MAX_POLY_VERTICES - 1)?;
    let v = &model.potential;
    let top = order + 1;
    let x1 = xs[0];
    let rest: Vec<Point> = xs[1..].to_vec();

    let lhs = g_coefficients(xs, model, order, integ)?;
    let d = d_partial(&x1, model, order, integ)?;
    let zeta = d.scale(-1.0).exp()?.scale(model.shape_at(&x1));

    // B_k = Σ_{n+m=k} (1/(n! m!)) ∫∫ ∏_i f(x_1, y_i) ψ(rest ∪ y; w) dy dw, m <= N.
    let mut b_coeffs = vec![0.0; top + 1];
    let mut b_errors = vec![0.0; top + 1];
    for k in 0..=top {
        for n in 0..=k {
            let m = k - n;
            if m > order || (rest.is_empty() && n == 0) {
                continue;
            }
            let whites = rest.len() + n;
            let p = poly(ClassShape::D {
                white: whites,
                black: m,
            });
            let r = rest.len();
            let mut fixed = vec![x1];
            fixed.extend_from_slice(&rest);
            let sub_len = whites + m;
            let e = integ.integrate(&fixed, n + m, v, false, |c| {
                let pts = c.points();
                let mut w = 1.0;
                for i in 0..n {
                    w *= c.f(0, 1 + r + i);
                    if w == 0.0 {
                        return 0.0;
                    }
                }
                let mut sub = Vec::with_capacity(sub_len * (sub_len - 1) / 2);
                for a in 1..=sub_len {
                    for b in a + 1..=sub_len {
                        sub.push(c.f(a, b));
                    }
                }
                let val = w * p.eval(&sub);
                if val == 0.0 {
                    0.0
                } else {
                    val * model.shape_product(&pts[1 + r..])
                }
            })?;
            let scale = 1.0 / (factorial(n) * factorial(m));
            b_coeffs[k] += e.value * scale;
            b_errors[k] += e.error * scale;
        }
    }
    if rest.is_empty() {
        b_coeffs[0] = 1.0;
    }
    let b = TruncatedExpansion::new(b_coeffs, b_errors, integ.expansion_method())?;
    let pre = one_plus_f_root(xs, v);
    let rhs = zeta.truncate(top).mul(&b).scale(pre);
    Ok(lhs.truncate(top).sub(&rhs))
}

/// Largest `|KS residual|` at density scale `model.scale()` over the given
/// configurations, each with `s` points.
pub fn ks_residual(configs: &[Vec<Point>], model: &DensityModel, order: usize, integ: &Integrator) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for xs in configs {
        let series = ks_residual_series(xs, model, order, integ)?;
        worst = worst.max(series.eval(model.scale).0.abs());
    }
    Ok(worst)
}

/// Fitted exponent `p` in `r ≈ c ρ^p` from residuals at two densities.
pub fn vanishing_order(rho1: f64, r1: f64, rho2: f64, r2: f64) -> f64 {
    (r2 / r1).ln() / (rho2 / rho1).ln()
}

/// `Ψ(μ)`-type integral `∫ ∏|f(0, y_i)| ∏ (1 + f(y_i, y_j)) dy` over `k` points.
pub fn psi_integral(k: usize, v: &PairPotential, integ: &Integrator) -> Result<Estimate> {
    let origin = Point::origin(v.dim());
    integ.integrate(std::slice::from_ref(&origin), k, v, true, |c| {
        let mut w = 1.0;
        for i in 1..=k {
            w *= c.f(0, i).abs();
            if w == 0.0 {
                return 0.0;
            }
        }
        for i in 1..=k {
            for j in i + 1..=k {
                w *= 1.0 + c.f(i, j);
            }
        }
        w
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::line_points;

    fn rods() -> PairPotential {
        PairPotential::hard_rods(1.0).unwrap()
    }

    #[test]
    fn gbar_single_point_is_one() {
        let model = DensityModel::homogeneous(0.1, rods()).unwrap();
        let integ = Integrator::grid(0.05).unwrap();
        for n in 0..3 {
            let g = gbar_partial(&line_points(&[0.3]), &model, n, &integ).unwrap();
            assert!((g.value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn gbar_order_zero_is_pair_product() {
        let model = DensityModel::homogeneous(0.1, rods()).unwrap();
        let integ = Integrator::grid(0.05).unwrap();
        assert_eq!(
            gbar_partial(&line_points(&[0.0, 0.5]), &model, 0, &integ)
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            gbar_partial(&line_points(&[0.0, 1.5]), &model, 0, &integ)
                .unwrap()
                .value,
            1.0
        );
    }

    #[test]
    fn hard_rod_first_coefficients() {
        let model = DensityModel::homogeneous(0.1, rods()).unwrap();
        let integ = Integrator::grid(0.01).unwrap();
        let d = d_partial(&Point::on_line(0.0), &model, 2, &integ).unwrap();
        assert!((d.coefficient(1) + 2.0).abs() < 1e-12);
        assert!((d.coefficient(2) + 1.5).abs() < 0.01);
        let b = ursell_coefficients(&Point::on_line(0.0), &model, 1, &integ).unwrap();
        assert!((b.coefficient(1) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn zero_potential_series_are_trivial() {
        let model = DensityModel::homogeneous(0.2, PairPotential::zero(1)).unwrap();
        let integ = Integrator::grid(0.1).unwrap();
        let z = activity_from_density(&model, 3, &integ).unwrap();
        assert_eq!(z.coefficients(), &[0.0, 1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn r_rho_product_forms() {
        let model = DensityModel::homogeneous(0.1, rods()).unwrap();
        let integ = Integrator::grid(0.05).unwrap();
        let x = Point::on_line(0.0);
        let r = r_rho(&WeightAnsatz::PowS(2.0), &x, &model, None, &integ).unwrap().value;
        assert!((r - (0.4f64).exp_m1()).abs() < 1e-15);
        let r = r_rho(&WeightAnsatz::PowS1(2.0), &x, &model, None, &integ)
            .unwrap()
            .value;
        assert!((r - (0.4f64).exp_m1() / 2.0).abs() < 1e-15);
        let zero = DensityModel::homogeneous(0.0, rods()).unwrap();
        assert_eq!(
            r_rho(&WeightAnsatz::PowS(2.0), &x, &zero, None, &integ).unwrap().value,
            0.0
        );
    }

    #[test]
    fn r_rho_nf_matches_capital_psi_for_rods() {
        // Ψ(μ) = 1 + 2μ + μ²/2 for unit rods, so R = (Ψ(ρκ) - 1)/κ.
        let (rho, kappa) = (0.05, 20.0);
        let model = DensityModel::homogeneous(rho, rods()).unwrap();
        let integ = Integrator::grid(0.01).unwrap();
        let m = WeightAnsatz::Nf {
            kappa,
            potential: rods(),
        };
        let r = r_rho(&m, &Point::on_line(0.0), &model, None, &integ).unwrap();
        let mu: f64 = rho * kappa;
        let expected = (2.0 * mu + mu * mu / 2.0) / kappa;
        assert!((r.value - expected).abs() < 5e-3 * expected, "{r:?} vs {expected}");
    }

    #[test]
    fn k_operator_basics() {
        let integ = Integrator::grid(0.05).unwrap();
        let m = WeightAnsatz::PowS(3.0);
        let zero = DensityModel::homogeneous(0.0, rods()).unwrap();
        let xs = line_points(&[0.0, 1.5]);
        assert_eq!(apply_k(&m, &xs[..1], &zero, &integ, None).unwrap().value, 1.0);
        assert_eq!(apply_k(&m, &xs, &zero, &integ, None).unwrap().value, 3.0);
        let dense = DensityModel::homogeneous(10.0, rods()).unwrap();
        assert!(apply_k(&m, &xs, &dense, &integ, None).unwrap().value.is_infinite());
        assert!(dbar_bound(&xs[0], &dense, &m, &integ).unwrap().value.is_infinite());
    }

    #[test]
    fn lp_ansatz_is_subinvariant() {
        // Cρκ = μ with μ inside the Lebowitz–Penrose window.
        let mu = 0.3;
        let rho = 0.05;
        let kappa = mu / (2.0 * rho);
        assert!(f64::exp(mu) <= kappa * (2.0 - f64::exp(mu)));
        let model = DensityModel::homogeneous(rho, rods()).unwrap();
        let integ = Integrator::grid(0.05).unwrap();
        let m = WeightAnsatz::PowS(kappa);
        for xs in [vec![0.0, 1.2], vec![0.0, 0.4, 2.0], vec![0.0, 1.1, 2.3, 3.7]] {
            let xs = line_points(&xs);
            let k = apply_k(&m, &xs, &model, &integ, None).unwrap().value;
            assert!(k <= m.eval(&xs));
        }
    }

    #[test]
    fn mtilde_homogeneous_power() {
        let (rho, kappa) = (0.05, 3.0);
        let model = DensityModel::homogeneous(rho, rods()).unwrap();
        let integ = Integrator::grid(0.05).unwrap();
        let mt = mtilde_from_m(&WeightAnsatz::PowS(kappa), &model, &integ).unwrap();
        let xs = line_points(&[0.0, 2.0]);
        let per = kappa * (2.0 - (2.0 * rho * kappa).exp());
        assert!((mt.eval(&xs) - per * per).abs() < 1e-12);
        let zero = DensityModel::homogeneous(0.0, rods()).unwrap();
        let same = mtilde_from_m(&WeightAnsatz::PowS(kappa), &zero, &integ).unwrap();
        assert_eq!(same.eval(&xs), kappa * kappa);
        let dense = DensityModel::homogeneous(5.0, rods()).unwrap();
        assert!(mtilde_from_m(&WeightAnsatz::PowS(kappa), &dense, &integ).is_err());
    }

    #[test]
    fn t_operator_at_zero_activity() {
        let integ = Integrator::grid(0.05).unwrap();
        let zero = DensityModel::homogeneous(0.0, rods()).unwrap();
        let m = WeightAnsatz::PowS(2.0);
        assert_eq!(
            apply_t(&m, &line_points(&[0.0]), &zero, &integ, None).unwrap().value,
            1.0
        );
        assert_eq!(
            apply_t(&m, &line_points(&[0.0, 2.0]), &zero, &integ, None)
                .unwrap()
                .value,
            2.0
        );
    }

    #[test]
    fn stable_index_selection() {
        let v = rods();
        assert_eq!(select_stable_index(&line_points(&[0.0, 0.5, 3.0]), &v).unwrap(), 0);
        assert_eq!(select_stable_index(&line_points(&[1.0]), &v).unwrap(), 0);
        // Attraction to the origin: points near it have very negative sums.
        let well = PairPotential::custom(
            1,
            |x: &Point, y: &Point| if (x.x() - y.x()).abs() < 1.0 { -1.0 } else { 0.0 },
            1.0,
            Some(2.0),
            false,
            Some(1.0),
        )
        .unwrap();
        let xs = line_points(&[0.0, 0.1, 0.2, 5.0, 0.3]);
        assert_eq!(select_stable_index(&xs, &well).unwrap(), 3);
        let order = stable_order(&xs, &well).unwrap();
        assert_eq!(order[0].x(), 5.0);
        let bad = PairPotential::custom(1, |_: &Point, _: &Point| -1.0, 0.0, None, false, None).unwrap();
        assert!(matches!(select_stable_index(&xs, &bad), Err(Error::Data(_))));
    }

    #[test]
    fn ks_residual_vanishes_at_zero_density_and_zero_potential() {
        let integ = Integrator::grid(0.1).unwrap();
        let zero_pot = DensityModel::homogeneous(0.3, PairPotential::zero(1)).unwrap();
        let configs = vec![line_points(&[0.05, 1.55])];
        assert!(ks_residual(&configs, &zero_pot, 2, &integ).unwrap() < 1e-14);
        let empty = DensityModel::homogeneous(0.0, rods()).unwrap();
        assert_eq!(ks_residual(&configs, &empty, 2, &integ).unwrap(), 0.0);
    }
}
