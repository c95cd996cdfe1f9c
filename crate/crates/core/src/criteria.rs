//! Closed-form convergence conditions and the radii they imply.
//!
//! Each criterion is a scalar inequality in `μ` (`μ = Cρκ` for the
//! Lebowitz–Penrose and Groeneveld forms, `μ = ρκ` for Nguyen–Fernández).
//! Radii are suprema of a unimodal objective, located by golden-section
//! search on a bracket found by doubling.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::expansion::DensityModel;
use crate::integrate::{mc_sum, Integrator};
use crate::numeric::factorial;
use crate::weights::Point;

/// Tolerance in `μ` for the scalar maximizations.
pub const MU_TOLERANCE: f64 = 1e-10;

const MAX_DOUBLINGS: u32 = 24;
const MAX_GOLDEN_STEPS: usize = 400;
const UNIMODAL_SAMPLES: usize = 64;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizer of a scalar objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    pub iterations: usize,
    pub bracket: (f64, f64),
}

/// Golden-section maximization of `f` on `[lo, hi]`, after checking by
/// coarse sampling that the samples rise and then fall.
pub fn golden_max<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Maximum> {
    if !(lo < hi) {
        return Err(Error::Domain(format!("empty bracket [{lo}, {hi}]")));
    }
    check_unimodal(&f, lo, hi)?;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut iterations = 0;
    while b - a > tol * a.abs().max(1.0) && iterations < MAX_GOLDEN_STEPS {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iterations += 1;
    }
    let argmax = 0.5 * (a + b);
    Ok(Maximum {
        argmax,
        value: f(argmax),
        iterations,
        bracket: (lo, hi),
    })
}

fn check_unimodal<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<()> {
    let ys: Vec<f64> = (1..UNIMODAL_SAMPLES)
        .map(|i| f(lo + (hi - lo) * i as f64 / UNIMODAL_SAMPLES as f64))
        .collect();
    let mut falling = false;
    for w in ys.windows(2) {
        let scale = w[0].abs().max(w[1].abs()).max(1e-300);
        if w[1] < w[0] - 1e-12 * scale {
            falling = true;
        } else if falling && w[1] > w[0] + 1e-12 * scale {
            return Err(Error::Domain(format!("objective is not unimodal on [{lo}, {hi}]")));
        }
    }
    Ok(())
}

/// Upper end of a bracket for a maximum on `(0, ∞)`: doubles `hi` while `f` still grows.
pub fn doubling_bracket<F: Fn(f64) -> f64>(f: F, start: f64) -> Result<f64> {
    let mut hi = start;
    for _ in 0..MAX_DOUBLINGS {
        if f(2.0 * hi) <= f(hi) {
            return Ok(2.0 * hi);
        }
        hi *= 2.0;
    }
    Err(Error::Unbounded { mu_hi: hi })
}

/// Convergence radius and its certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusResult {
    pub radius: f64,
    pub maximizer_mu: f64,
    /// `κ` that certifies the condition at `ρ = radius`.
    pub kappa: f64,
    pub solver_iterations: usize,
    pub bracket: (f64, f64),
}

fn check_c_u(c: f64, u: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("C must be positive, got {c}")));
    }
    if !(u >= 1.0) || !u.is_finite() {
        return Err(Error::Domain(format!("u must be at least 1, got {u}")));
    }
    Ok(())
}

/// `sup_{0<μ<log 2} μ(2e^{-μ} - 1) / (Cu)`.
pub fn lp_radius(c: f64, u: f64) -> Result<RadiusResult> {
    check_c_u(c, u)?;
    let m = golden_max(
        |mu| mu * (2.0 * (-mu).exp() - 1.0),
        0.0,
        std::f64::consts::LN_2,
        MU_TOLERANCE,
    )?;
    let radius = m.value / (c * u);
    Ok(RadiusResult {
        radius,
        maximizer_mu: m.argmax,
        kappa: m.argmax / (c * radius),
        solver_iterations: m.iterations,
        bracket: m.bracket,
    })
}

/// `sup_{μ>0} μ / ((1+u)e^μ - 1) / C`.
pub fn groeneveld_radius(c: f64, u: f64) -> Result<RadiusResult> {
    check_c_u(c, u)?;
    let f = |mu: f64| mu / ((1.0 + u) * mu.exp() - 1.0);
    let hi = doubling_bracket(f, 0.125)?;
    let m = golden_max(f, 0.0, hi, MU_TOLERANCE)?;
    let radius = m.value / c;
    Ok(RadiusResult {
        radius,
        maximizer_mu: m.argmax,
        kappa: m.argmax / (c * radius),
        solver_iterations: m.iterations,
        bracket: m.bracket,
    })
}

/// Coefficients `I_k = ∫ ∏|f(0, y_i)| ∏(1 + f(y_i, y_j)) dy` of `Ψ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CapitalPsiTable {
    pub sigma: f64,
    pub dim: usize,
    /// `I_1, I_2, ...`.
    pub coefficients: Vec<f64>,
    /// One standard error per coefficient (zero when exact).
    pub errors: Vec<f64>,
    /// Monte Carlo hit counts per coefficient, when sampled.
    pub hits: Vec<u64>,
    pub samples: u64,
}

impl CapitalPsiTable {
    /// Table from known coefficients `I_1, I_2, ...`.
    pub fn exact(sigma: f64, dim: usize, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::Domain("Psi coefficients must be nonnegative".into()));
        }
        let n = coefficients.len();
        Ok(Self {
            sigma,
            dim,
            coefficients,
            errors: vec![0.0; n],
            hits: Vec::new(),
            samples: 0,
        })
    }

    /// `I_1`.
    pub fn c(&self) -> f64 {
        self.coefficients.first().copied().unwrap_or(0.0)
    }
}

impl fmt::Display for CapitalPsiTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (c, e)) in self.coefficients.iter().zip(&self.errors).enumerate() {
            writeln!(f, "I_{} = {c} ± {e}", k + 1)?;
        }
        Ok(())
    }
}

/// `Ψ(μ) = 1 + Σ_k μ^k I_k / k!`.
pub fn capital_psi(mu: f64, table: &CapitalPsiTable) -> f64 {
    1.0 + table
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| mu.powi(i as i32 + 1) * c / factorial(i + 1))
        .sum::<f64>()
}

/// Fewest samples accepted by [`compute_psi_table_hard_disks`].
pub const MIN_PSI_SAMPLES: u64 = 100_000;

/// Largest relative standard error accepted for `I_2`.
pub const PSI_REL_ERROR_LIMIT: f64 = 1e-2;

/// Monte Carlo `Ψ` table for hard disks of diameter `sigma`.
///
/// `I_1 = πσ²`; `I_2..I_5` are `(πσ²)^k` times the probability that `k`
/// uniform points in the open `σ`-disk are pairwise at least `σ` apart. Six
/// such points cannot exist, so `I_6` must have no hits and higher
/// coefficients are zero.
pub fn compute_psi_table_hard_disks(sigma: f64, samples: u64, seed: u64) -> Result<CapitalPsiTable> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("diameter must be positive, got {sigma}")));
    }
    if samples < MIN_PSI_SAMPLES {
        return Err(Error::Bound {
            what: "Monte Carlo samples",
            value: samples as usize,
            min: MIN_PSI_SAMPLES as usize,
            max: usize::MAX,
        });
    }
    let area = std::f64::consts::PI * sigma * sigma;
    let mut coefficients = vec![area];
    let mut errors = vec![0.0];
    let mut hits = vec![samples];
    for k in 2..=6usize {
        let (s, _) = mc_sum(samples, seed, k as u64, |rng| {
            let mut pts = [(0.0f64, 0.0f64); 6];
            for i in 0..k {
                let r = sigma * rng.gen::<f64>().sqrt();
                let t = std::f64::consts::TAU * rng.gen::<f64>();
                let p = (r * t.cos(), r * t.sin());
                if r >= sigma {
                    return 0.0;
                }
                for q in &pts[..i] {
                    let (dx, dy) = (p.0 - q.0, p.1 - q.1);
                    if dx * dx + dy * dy < sigma * sigma {
                        return 0.0;
                    }
                }
                pts[i] = p;
            }
            1.0
        });
        let count = s.round() as u64;
        let p = count as f64 / samples as f64;
        let vol = area.powi(k as i32);
        if k == 6 {
            if count > 0 {
                return Err(Error::Data(format!(
                    "{count} samples placed six disks in a disk of equal diameter"
                )));
            }
            hits.push(0);
            break;
        }
        coefficients.push(vol * p);
        errors.push(vol * (p * (1.0 - p) / samples as f64).sqrt());
        hits.push(count);
    }
    let rel = errors[1] / coefficients[1];
    if rel > PSI_REL_ERROR_LIMIT {
        return Err(Error::Precision {
            stderr: rel,
            threshold: PSI_REL_ERROR_LIMIT,
        });
    }
    Ok(CapitalPsiTable {
        sigma,
        dim: 2,
        coefficients,
        errors,
        hits,
        samples,
    })
}

/// `sup_{μ>0} μ / (2Ψ(μ) - 1)`, scaled so that `ρ ≤ radius`.
pub fn nf_radius(table: &CapitalPsiTable) -> Result<RadiusResult> {
    if table.coefficients.is_empty() || table.c() <= 0.0 {
        return Err(Error::Domain("Psi table needs a positive I_1".into()));
    }
    let f = |mu: f64| mu / (2.0 * capital_psi(mu, table) - 1.0);
    let hi = doubling_bracket(f, 0.125)?;
    let m = golden_max(f, 0.0, hi, MU_TOLERANCE)?;
    Ok(RadiusResult {
        radius: m.value,
        maximizer_mu: m.argmax,
        kappa: m.argmax / m.value,
        solver_iterations: m.iterations,
        bracket: m.bracket,
    })
}

/// A sufficient condition for convergence.
#[derive(Debug, Clone, PartialEq)]
pub enum Condition {
    /// `u e^{Cρκ} ≤ κ(2 - e^{Cρκ})`.
    Lp { c: f64, u: f64 },
    /// `(1+u)e^{Cρκ} - 1 ≤ κ`.
    Groeneveld { c: f64, u: f64 },
    /// `2Ψ(ρκ) - 1 ≤ κ`.
    Nf { table: CapitalPsiTable },
    /// `e^A / (2 - e^A) ≤ e^b` with `A = Cρe^b`, for constant `b` (passed as `κ`).
    ExpB { c: f64 },
}

/// Outcome of [`check_condition`]: `margin = RHS - LHS`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionCheck {
    pub holds: bool,
    pub margin: f64,
    pub kappa: f64,
}

impl Condition {
    /// `RHS - LHS` at density `rho` and parameter `kappa`.
    pub fn margin(&self, rho: f64, kappa: f64) -> f64 {
        match self {
            Condition::Lp { c, u } => {
                let e = (c * rho * kappa).exp();
                kappa * (2.0 - e) - u * e
            }
            Condition::Groeneveld { c, u } => kappa - ((1.0 + u) * (c * rho * kappa).exp() - 1.0),
            Condition::Nf { table } => kappa - (2.0 * capital_psi(rho * kappa, table) - 1.0),
            Condition::ExpB { c } => suff2_margin(c * rho, kappa),
        }
    }

    /// `μ` as a function of `κ` at density `rho`.
    fn mu_scale(&self, rho: f64) -> f64 {
        match self {
            Condition::Lp { c, .. } | Condition::Groeneveld { c, .. } => c * rho,
            Condition::Nf { .. } => rho,
            Condition::ExpB { .. } => 1.0,
        }
    }
}

/// Constant-`b` form of the exponential condition: `e^b - e^A/(2 - e^A)`, `A = cρ e^b`.
pub fn suff2_margin(c_rho: f64, b: f64) -> f64 {
    let a = c_rho * b.exp();
    let e = a.exp();
    if e >= 2.0 {
        return f64::NEG_INFINITY;
    }
    b.exp() - e / (2.0 - e)
}

/// Constant-`a` form of the JKT condition: `a - cρ e^{2a}`.
pub fn jkt_margin(c_rho: f64, a: f64) -> f64 {
    a - c_rho * (2.0 * a).exp()
}

/// Checks `cond` at `rho`. With `kappa = None` the margin is maximized over `κ`.
pub fn check_condition(cond: &Condition, rho: f64, kappa: Option<f64>) -> Result<ConditionCheck> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!(
            "density must be finite and nonnegative, got {rho}"
        )));
    }
    if let Some(k) = kappa {
        let margin = cond.margin(rho, k);
        return Ok(ConditionCheck {
            holds: margin >= 0.0,
            margin,
            kappa: k,
        });
    }
    if let Condition::ExpB { c } = cond {
        // Optimize over A = cρe^b in (0, log 2).
        if rho == 0.0 {
            return Ok(ConditionCheck {
                holds: true,
                margin: f64::INFINITY,
                kappa: f64::INFINITY,
            });
        }
        let c_rho = c * rho;
        let f = |a: f64| suff2_margin(c_rho, (a / c_rho).ln());
        let m = golden_max(f, 1e-12, std::f64::consts::LN_2 - 1e-12, MU_TOLERANCE)?;
        return Ok(ConditionCheck {
            holds: m.value >= 0.0,
            margin: m.value,
            kappa: (m.argmax / c_rho).ln(),
        });
    }
    if rho == 0.0 {
        return Ok(ConditionCheck {
            holds: true,
            margin: f64::INFINITY,
            kappa: f64::INFINITY,
        });
    }
    let scale = cond.mu_scale(rho);
    let f = |mu: f64| cond.margin(rho, mu / scale);
    let hi = match cond {
        Condition::Lp { .. } => std::f64::consts::LN_2,
        _ => doubling_bracket(f, 0.125)?,
    };
    let m = golden_max(f, 0.0, hi, MU_TOLERANCE)?;
    Ok(ConditionCheck {
        holds: m.value >= 0.0,
        margin: m.value,
        kappa: m.argmax / scale,
    })
}

/// Result of [`check_jkt`]: the smallest margin `a(x) - ∫|f(x,y)|e^{2a(y)}ρ(dy)`
/// over the grid and, if negative, where it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct JktCheck {
    pub holds: bool,
    pub worst_margin: f64,
    pub witness: Option<Point>,
}

/// `∫|f(x,y)| e^{2a(y)} ρ(dy) ≤ a(x)` at every `x` in `grid`.
pub fn check_jkt<A>(a: A, model: &DensityModel, grid: &[Point], integ: &Integrator) -> Result<JktCheck>
where
    A: Fn(&Point) -> f64 + Sync,
{
    let v = model.potential();
    if !v.is_nonnegative() {
        return Err(Error::Domain("the JKT criterion needs a nonnegative potential".into()));
    }
    let mut worst = f64::INFINITY;
    let mut witness = None;
    for x in grid {
        let lhs = if model.scale() == 0.0 {
            0.0
        } else {
            integ
                .integrate(std::slice::from_ref(x), 1, v, true, |c| {
                    let y = &c.points()[1];
                    c.f(0, 1).abs() * (2.0 * a(y)).exp() * model.density(y)
                })?
                .value
        };
        let margin = a(x) - lhs;
        if margin < worst {
            worst = margin;
            if margin < 0.0 {
                witness = Some(*x);
            }
        }
    }
    Ok(JktCheck {
        holds: worst >= 0.0,
        worst_margin: worst,
        witness,
    })
}
