//! Verification suites: each checks one identity or inequality over a
//! family of cases and reports the worst residual per group.

use std::fmt;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::expansion::{
    apply_k, gbar_partial, ks_residual, ks_residual_series, vanishing_order, DensityModel, WeightAnsatz,
};
use crate::graph::{
    decompose_at_vertex, enumerate_graphs, full_set, in_class_d_on, is_connected, is_two_connected, VertexSet,
};
use crate::integrate::{block_rng, Integrator};
use crate::partition::{mobius_compose, mobius_invert};
use crate::recurrences::{psi_recurrence, two_connected_recurrence};
use crate::weights::{line_points, psi_sum, two_connected_sum, PairPotential, Point, WeightMatrix};

/// One group of cases within a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseGroup {
    pub label: String,
    pub cases: usize,
    /// Largest residual (for inequalities: the negated smallest slack).
    pub max_residual: f64,
    pub passed: bool,
    /// First failing case, if any.
    pub witness: Option<String>,
}

/// Outcome of a suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: String,
    pub tolerance: f64,
    pub groups: Vec<CaseGroup>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.passed)
    }

    pub fn cases(&self) -> usize {
        self.groups.iter().map(|g| g.cases).sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.groups
            .iter()
            .map(|g| g.max_residual)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn witness(&self) -> Option<&str> {
        self.groups.iter().find_map(|g| g.witness.as_deref())
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {} ({} cases, max residual {:.3e}, tolerance {:.1e})",
            self.suite,
            if self.passed() { "pass" } else { "FAIL" },
            self.cases(),
            self.max_residual(),
            self.tolerance
        )?;
        for g in &self.groups {
            writeln!(
                f,
                "  {}: {} cases, max residual {:.3e}",
                g.label, g.cases, g.max_residual
            )?;
            if let Some(w) = &g.witness {
                writeln!(f, "    witness: {w}")?;
            }
        }
        Ok(())
    }
}

struct Group {
    label: String,
    cases: usize,
    max_residual: f64,
    tolerance: f64,
    witness: Option<String>,
}

impl Group {
    fn new(label: impl Into<String>, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            cases: 0,
            max_residual: f64::NEG_INFINITY,
            tolerance,
            witness: None,
        }
    }

    fn record(&mut self, residual: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if residual > self.max_residual || residual.is_nan() {
            self.max_residual = residual;
        }
        if self.witness.is_none() && !(residual <= self.tolerance) {
            self.witness = Some(describe());
        }
    }

    fn finish(self) -> CaseGroup {
        CaseGroup {
            passed: self.witness.is_none(),
            label: self.label,
            cases: self.cases,
            max_residual: if self.cases == 0 { 0.0 } else { self.max_residual },
            witness: self.witness,
        }
    }
}

/// Symmetric matrix with entries uniform in `[-1, 3]`.
pub fn random_weight_matrix(n: usize, rng: &mut ChaCha8Rng) -> WeightMatrix {
    let mut wm = WeightMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            wm.set(i, j, rng.gen_range(-1.0..=3.0));
        }
    }
    wm
}

fn describe_matrix(wm: &WeightMatrix) -> String {
    let n = wm.n();
    let mut rows = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            rows.push(format!("f{i}{j}={:.17e}", wm.get(i, j)));
        }
    }
    rows.join(" ")
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

/// Vertex-deletion characterization of 2-connectivity, on every graph and
/// every vertex for `n = 3..=max_n`.
pub fn lemma21(max_n: usize) -> Result<SuiteReport> {
    let mut groups = Vec::new();
    for n in 3..=max_n {
        let mut g = Group::new(format!("n={n}"), 0.0);
        for graph in enumerate_graphs(n)? {
            let two = is_two_connected(&graph)?;
            for v in 0..n {
                let d = decompose_at_vertex(&graph, v)?;
                let rhs = is_connected(&d.reduced) && in_class_d_on(&d.reduced, d.neighbors, d.non_neighbors());
                let mismatch = if two == rhs { 0.0 } else { 1.0 };
                g.record(mismatch, || format!("edges={:#x} vertex={v}", graph.edge_mask()));
            }
        }
        groups.push(g.finish());
    }
    Ok(SuiteReport {
        suite: "lemma21".into(),
        tolerance: 0.0,
        groups,
    })
}

/// 2-connected recurrence against the brute-force sum on random weight matrices.
pub fn prop31(min_n: usize, max_n: usize, samples: usize, seed: u64, tolerance: f64) -> Result<SuiteReport> {
    let mut groups = Vec::new();
    for n in min_n..=max_n {
        let mut g = Group::new(format!("n={n}"), tolerance);
        for k in 0..samples {
            let mut rng = block_rng(seed, 31, (n * 100_000 + k) as u64);
            let wm = random_weight_matrix(n, &mut rng);
            let brute = two_connected_sum(&wm, full_set(n)).value;
            let rec = two_connected_recurrence(&wm, 0, full_set(n) & !1)?;
            g.record(relative(rec, brute), || describe_matrix(&wm));
        }
        groups.push(g.finish());
    }
    Ok(SuiteReport {
        suite: "prop31".into(),
        tolerance,
        groups,
    })
}

/// ψ recurrence against the brute-force sum, every shape `#W + #B <= max_total`
/// with `#W >= 2` and every choice of the removed white vertex.
pub fn prop32(max_total: usize, samples: usize, seed: u64, tolerance: f64) -> Result<SuiteReport> {
    let mut groups = Vec::new();
    for total in 2..=max_total {
        for w in 2..=total {
            let b = total - w;
            let white: VertexSet = full_set(w);
            let black: VertexSet = full_set(total) & !white;
            let mut g = Group::new(format!("W={w} B={b}"), tolerance);
            for k in 0..samples {
                let mut rng = block_rng(seed, 32, (total * 1000 + w) as u64 * 100_000 + k as u64);
                let wm = random_weight_matrix(total, &mut rng);
                let brute = psi_sum(&wm, white, black).value;
                for iota in 0..w {
                    let rec = psi_recurrence(&wm, white, black, iota)?;
                    g.record(relative(rec, brute), || format!("iota={iota} {}", describe_matrix(&wm)));
                }
            }
            groups.push(g.finish());
        }
    }
    Ok(SuiteReport {
        suite: "prop32".into(),
        tolerance,
        groups,
    })
}

/// Möbius inversion round trips with random integer values, exact.
pub fn mobius(max_size: usize, samples: usize, seed: u64) -> Result<SuiteReport> {
    let mut groups = Vec::new();
    for size in 1..=max_size {
        let ground = full_set(size);
        let mut g = Group::new(format!("|V|={size}"), 0.0);
        for k in 0..samples {
            let mut rng = block_rng(seed, 8, (size * 100_000 + k) as u64);
            let table: Vec<i128> = (0..1usize << size).map(|_| rng.gen_range(-5..=5)).collect();
            let b = |v: VertexSet| table[v as usize];
            let a = mobius_invert::<i128, _>(ground, b)?;
            let back = mobius_compose::<i128, _>(ground, |v| *a.get(v))?;
            let again = mobius_invert::<i128, _>(ground, |v| *back.get(v))?;
            let mut bad = 0.0;
            for v in 1..=ground {
                if *back.get(v) != table[v as usize] || again.get(v) != a.get(v) {
                    bad = 1.0;
                }
            }
            g.record(bad, || format!("size={size} sample={k}"));
        }
        groups.push(g.finish());
    }
    Ok(SuiteReport {
        suite: "mobius".into(),
        tolerance: 0.0,
        groups,
    })
}

/// Hard-rod configurations used by the operator suites.
pub fn rod_configurations(s: usize) -> Vec<Vec<Point>> {
    match s {
        1 => vec![line_points(&[0.0]), line_points(&[0.37])],
        2 => vec![
            line_points(&[0.0, 1.3]),
            line_points(&[0.0, 2.2]),
            line_points(&[0.1, 1.05]),
        ],
        _ => vec![
            line_points(&[0.1, 1.4, 2.9]),
            line_points(&[0.0, 1.2, 2.6]),
            line_points(&[0.0, 2.5, 1.1]),
        ],
    }
}

/// `ḡ^(N+1) <= K_ρ ḡ^(N)` for unit hard rods and `2 <= s <= max_s` (at
/// `s = 1` both sides are 1). Residuals are `ḡ^(N+1) - K_ρ ḡ^(N)`, so a
/// negative maximum means strict slack everywhere.
pub fn horeka(max_s: usize, max_order: usize, densities: &[f64], integ: &Integrator) -> Result<SuiteReport> {
    let rods = PairPotential::hard_rods(1.0)?;
    let inner = integ.without_error();
    let mut groups = Vec::new();
    for &rho in densities {
        let model = DensityModel::homogeneous(rho, rods.clone())?;
        for order in 0..=max_order {
            let m = {
                let (model, inner) = (model.clone(), inner);
                WeightAnsatz::custom(
                    move |xs| {
                        gbar_partial(xs, &model, order, &inner)
                            .map(|e| e.value)
                            .unwrap_or(f64::NAN)
                    },
                    true,
                )
            };
            let mut g = Group::new(format!("rho={rho} N={order}"), 0.0);
            for s in 2..=max_s {
                for xs in rod_configurations(s) {
                    let lhs = gbar_partial(&xs, &model, order + 1, &inner)?.value;
                    let rhs = apply_k(&m, &xs, &model, &inner, None)?.value;
                    g.record(lhs - rhs, || {
                        format!(
                            "s={s} x={:?} gbar={lhs} K={rhs}",
                            xs.iter().map(|p| p.x()).collect::<Vec<_>>()
                        )
                    });
                }
            }
            groups.push(g.finish());
        }
    }
    Ok(SuiteReport {
        suite: "horeka".into(),
        tolerance: 0.0,
        groups,
    })
}

/// Kirkwood–Salsburg residual for unit hard rods: coefficients through order
/// `N` vanish and the residual scales as `ρ^(N+1)` between `rho` and `2 rho`.
pub fn ks(s: usize, order: usize, rho: f64, integ: &Integrator, tolerance: f64) -> Result<SuiteReport> {
    let rods = PairPotential::hard_rods(1.0)?;
    let model = DensityModel::homogeneous(rho, rods)?;
    let configs: Vec<Vec<Point>> = match s {
        1 => vec![line_points(&[0.013])],
        2 => [0.3, 1.2, 1.75, 2.6]
            .iter()
            .map(|&d| line_points(&[0.013, 0.013 + d]))
            .collect(),
        _ => vec![line_points(&[0.013, 1.3, 2.45]), line_points(&[0.013, 0.6, 2.1])],
    };
    let mut coeffs = Group::new("coefficients", tolerance);
    for xs in &configs {
        let series = ks_residual_series(xs, &model, order, integ)?;
        let worst = (0..=order).map(|k| series.coefficient(k).abs()).fold(0.0, f64::max);
        coeffs.record(worst, || {
            format!("x={:?}", xs.iter().map(|p| p.x()).collect::<Vec<_>>())
        });
    }
    let r1 = ks_residual(&configs, &model, order, integ)?;
    let r2 = ks_residual(&configs, &model.with_scale(2.0 * rho)?, order, integ)?;
    let p = vanishing_order(rho, r1, 2.0 * rho, r2);
    let mut fit = Group::new(format!("fitted order (expect {})", order + 1), 0.1);
    fit.record((p - (order as f64 + 1.0)).abs(), || {
        format!("order {p} from residuals {r1:.3e}, {r2:.3e}")
    });
    Ok(SuiteReport {
        suite: "ks".into(),
        tolerance,
        groups: vec![coeffs.finish(), fit.finish()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        assert!(lemma21(4).unwrap().passed());
        assert!(prop31(2, 4, 5, 1, 1e-9).unwrap().passed());
        assert!(prop32(4, 3, 1, 1e-9).unwrap().passed());
        assert!(mobius(4, 3, 1).unwrap().passed());
    }

    #[test]
    fn failing_group_keeps_witness() {
        let mut g = Group::new("x", 1e-9);
        g.record(1e-12, || "a".into());
        g.record(1.0, || "b".into());
        g.record(2.0, || "c".into());
        let g = g.finish();
        assert!(!g.passed);
        assert_eq!(g.witness.as_deref(), Some("b"));
        assert_eq!(g.max_residual, 2.0);
    }

    #[test]
    fn report_is_deterministic() {
        assert_eq!(prop31(3, 4, 4, 9, 1e-9).unwrap(), prop31(3, 4, 4, 9, 1e-9).unwrap());
    }
}
