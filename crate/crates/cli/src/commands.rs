use std::f64::consts::PI;

use clusterkit::counting::{count_classes_by_formula, two_connected_by_articulation};
use clusterkit::criteria::{compute_psi_table_hard_disks, groeneveld_radius, lp_radius, nf_radius, RadiusResult};
use clusterkit::expansion::{
    activity_from_density, alpha_coefficients, d_partial, density_from_activity, g_coefficients, gbar_coefficients,
    ursell_coefficients,
};
use clusterkit::graph::{
    count_classes, enumerate_graphs, full_set, in_class_c_on, in_class_d_on, is_connected, is_two_connected,
    LabelledGraph, VertexSet,
};
use clusterkit::numeric::{factorial, CompensatedSum};
use clusterkit::verify::{self, SuiteReport};
use clusterkit::{DensityModel, Error, Integrator, PairPotential, Point, TruncatedExpansion};
use serde_json::Value;

use crate::report::{int, num, text, Report};
use crate::{
    CliError, Criterion, EnumerateArgs, GraphClass, IntegrationMethod, PotentialArgs, PotentialKind, Quantity,
    RadiusArgs, SeriesArgs, Suite, VerifyArgs,
};

/// Largest `n` for class counts; beyond exhaustive sweeps the formulas take over.
const MAX_COUNT_N: usize = 9;
const MAX_SWEEP_N: usize = 7;

fn bound(what: &'static str, value: usize, min: usize, max: usize) -> Result<(), CliError> {
    if value < min || value > max {
        return Err(Error::Bound { what, value, min, max }.into());
    }
    Ok(())
}

fn class_name(c: GraphClass) -> &'static str {
    match c {
        GraphClass::All => "all",
        GraphClass::Connected => "connected",
        GraphClass::TwoConnected => "two_connected",
        GraphClass::D => "D",
        GraphClass::C => "C",
    }
}

fn label_set(labels: &[usize], n: usize, what: &str) -> Result<VertexSet, CliError> {
    let mut set = 0;
    for &l in labels {
        if l == 0 || l > n {
            return Err(CliError::Usage(format!("{what} vertex {l} is outside 1..={n}")));
        }
        set |= 1 << (l - 1);
    }
    Ok(set)
}

fn in_class(g: &LabelledGraph, class: GraphClass, white: VertexSet, black: VertexSet) -> Result<bool, CliError> {
    Ok(match class {
        GraphClass::All => true,
        GraphClass::Connected => is_connected(g),
        GraphClass::TwoConnected => g.n() >= 2 && is_two_connected(g)?,
        GraphClass::D => in_class_d_on(g, white, black),
        GraphClass::C => in_class_c_on(g, white, black),
    })
}

pub fn potential(a: &PotentialArgs) -> Result<PairPotential, CliError> {
    Ok(match a.potential {
        PotentialKind::Rods => PairPotential::hard_rods(a.sigma)?,
        PotentialKind::Disks => PairPotential::hard_disks(a.sigma)?,
        PotentialKind::Spheres => PairPotential::hard_spheres(a.sigma)?,
        PotentialKind::Shoulder => PairPotential::shoulder(a.dim, a.sigma, a.height)?,
        PotentialKind::Zero => PairPotential::zero(a.dim),
    })
}

fn potential_name(k: PotentialKind) -> &'static str {
    match k {
        PotentialKind::Rods => "hard_rods",
        PotentialKind::Disks => "hard_disks",
        PotentialKind::Spheres => "hard_spheres",
        PotentialKind::Shoulder => "shoulder",
        PotentialKind::Zero => "zero",
    }
}

pub fn enumerate(a: &EnumerateArgs, threads: usize) -> Result<Report, CliError> {
    let n = a.n;
    let bipartite = matches!(a.class, GraphClass::D | GraphClass::C);
    let weighted = !a.points.is_empty();
    let max = if bipartite || weighted {
        MAX_SWEEP_N
    } else {
        MAX_COUNT_N
    };
    bound("vertex count", n, 1, max)?;
    let (white, black) = if bipartite {
        let w = label_set(&a.white, n, "white")?;
        let b = label_set(&a.black, n, "black")?;
        if w == 0 || w & b != 0 || w | b != full_set(n) {
            return Err(CliError::Usage(
                "--white and --black must split 1..=n with a nonempty white set".into(),
            ));
        }
        (w, b)
    } else {
        (0, 0)
    };
    let mut report = Report::new("enumerate")
        .field("n", int(n as u64))
        .field("class", text(class_name(a.class)));
    if bipartite {
        report = report
            .field("white", Value::Array(a.white.iter().map(|&w| int(w as u64)).collect()))
            .field("black", Value::Array(a.black.iter().map(|&b| int(b as u64)).collect()));
    }

    if weighted {
        if a.points.len() != n {
            return Err(CliError::Usage(format!(
                "--points has {} entries, expected {n}",
                a.points.len()
            )));
        }
        let v = potential(&a.potential)?;
        if v.dim() != 1 {
            return Err(CliError::Usage("--points takes positions on the line".into()));
        }
        let xs: Vec<Point> = a.points.iter().map(|&x| Point::on_line(x)).collect();
        let mut rows = Vec::new();
        let mut total = CompensatedSum::new();
        for g in enumerate_graphs(n)? {
            if !in_class(&g, a.class, white, black)? {
                continue;
            }
            let w: f64 = g.edges().map(|(i, j)| v.f(&xs[i], &xs[j])).product();
            total.add(w);
            let edges: Vec<String> = g.edges().map(|(i, j)| format!("{}-{}", i + 1, j + 1)).collect();
            rows.push(vec![int(g.edge_mask()), text(edges.join(" ")), num(w)]);
        }
        return Ok(report
            .field("potential", text(potential_name(a.potential.potential)))
            .field("sigma", num(a.potential.sigma))
            .field("points", Value::Array(a.points.iter().map(|&x| num(x)).collect()))
            .field("count", int(rows.len() as u64))
            .field("weight_sum", num(total.value()))
            .table("graphs", &["edge_mask", "edges", "weight"], rows));
    }

    if bipartite {
        let mut count = 0u64;
        for g in enumerate_graphs(n)? {
            if in_class(&g, a.class, white, black)? {
                count += 1;
            }
        }
        return Ok(report.field("count", int(count)).field("method", text("sweep")));
    }

    let formula = count_classes_by_formula(n)?;
    let pick = |c: &clusterkit::graph::GraphClassCount| match a.class {
        GraphClass::All => c.total,
        GraphClass::Connected => c.connected,
        _ => c.two_connected,
    };
    if n > MAX_SWEEP_N {
        return Ok(report
            .field("count", int(pick(&formula)))
            .field("method", text("formula")));
    }
    let sweep = count_classes(n, threads)?;
    let mut report = report
        .field("count", int(pick(&sweep)))
        .field("method", text("sweep"))
        .field("formula", int(pick(&formula)));
    if a.class == GraphClass::TwoConnected {
        report = report.field("articulation_sweep", int(two_connected_by_articulation(n)?));
    }
    Ok(report)
}

fn suite_name(s: Suite) -> &'static str {
    match s {
        Suite::Prop31 => "prop31",
        Suite::Prop32 => "prop32",
        Suite::Mobius => "mobius",
        Suite::Lemma21 => "lemma21",
        Suite::Horeka => "horeka",
        Suite::Ks => "ks",
    }
}

fn suite_report(r: &SuiteReport, params: Vec<(&str, Value)>) -> Report {
    let mut report = Report::new("verify").field("suite", text(r.suite.clone()));
    for (k, v) in params {
        report = report.field(k, v);
    }
    let rows = r
        .groups
        .iter()
        .map(|g| {
            vec![
                text(g.label.clone()),
                int(g.cases as u64),
                num(g.max_residual),
                Value::Bool(g.passed),
                g.witness.clone().map(Value::String).unwrap_or(Value::Null),
            ]
        })
        .collect();
    report
        .field("passed", Value::Bool(r.passed()))
        .field("tolerance", num(r.tolerance))
        .field("cases", int(r.cases() as u64))
        .field("max_residual", num(r.max_residual()))
        .field("witness", r.witness().map(text).unwrap_or(Value::Null))
        .table("groups", &["label", "cases", "max_residual", "passed", "witness"], rows)
}

pub fn verify(a: &VerifyArgs) -> Result<(Report, bool), CliError> {
    let seed = ("seed", int(a.seed));
    let r = match a.suite {
        Suite::Prop31 => {
            let max_n = a.max_n.unwrap_or(6);
            let samples = a.samples.unwrap_or(100);
            bound("vertex count", max_n, 2, clusterkit::polynomial::MAX_POLY_VERTICES)?;
            bound("vertex count", a.min_n, 2, max_n)?;
            let r = verify::prop31(a.min_n, max_n, samples, a.seed, a.tolerance)?;
            let params = vec![
                ("min_n", int(a.min_n as u64)),
                ("max_n", int(max_n as u64)),
                ("samples", int(samples as u64)),
                seed,
            ];
            (r, params)
        }
        Suite::Prop32 => {
            let max_n = a.max_n.unwrap_or(6);
            let samples = a.samples.unwrap_or(50);
            bound("#W + #B", max_n, 2, clusterkit::polynomial::MAX_POLY_VERTICES)?;
            let r = verify::prop32(max_n, samples, a.seed, a.tolerance)?;
            (
                r,
                vec![("max_n", int(max_n as u64)), ("samples", int(samples as u64)), seed],
            )
        }
        Suite::Mobius => {
            let max_n = a.max_n.unwrap_or(7);
            let samples = a.samples.unwrap_or(20);
            bound("ground set size", max_n, 1, clusterkit::partition::MAX_MOBIUS_SET)?;
            let r = verify::mobius(max_n, samples, a.seed)?;
            (
                r,
                vec![("max_n", int(max_n as u64)), ("samples", int(samples as u64)), seed],
            )
        }
        Suite::Lemma21 => {
            let max_n = a.max_n.unwrap_or(6);
            bound("vertex count", max_n, 3, MAX_SWEEP_N)?;
            (verify::lemma21(max_n)?, vec![("max_n", int(max_n as u64))])
        }
        Suite::Horeka => {
            let max_s = a.s.unwrap_or(3);
            bound("points", max_s, 2, 3)?;
            bound("order", a.order, 0, 2)?;
            let rho = if a.rho.is_empty() {
                vec![0.02, 0.05, 0.1]
            } else {
                a.rho.clone()
            };
            let integ = Integrator::grid(a.h)?;
            let r = verify::horeka(max_s, a.order, &rho, &integ)?;
            let params = vec![
                ("max_s", int(max_s as u64)),
                ("max_order", int(a.order as u64)),
                ("rho", Value::Array(rho.iter().map(|&r| num(r)).collect())),
                ("h", num(a.h)),
            ];
            (r, params)
        }
        Suite::Ks => {
            let s = a.s.unwrap_or(2);
            bound("points", s, 1, 3)?;
            let rho = a.rho.first().copied().unwrap_or(0.05);
            let integ = Integrator::grid(a.h)?.without_error();
            let r = verify::ks(s, a.order, rho, &integ, a.tolerance)?;
            let params = vec![
                ("s", int(s as u64)),
                ("order", int(a.order as u64)),
                ("rho", num(rho)),
                ("h", num(a.h)),
            ];
            (r, params)
        }
    };
    let (r, params) = r;
    debug_assert_eq!(r.suite, suite_name(a.suite));
    let passed = r.passed();
    Ok((suite_report(&r, params), passed))
}

fn radius_fields(report: Report, r: &RadiusResult) -> Report {
    report
        .field("radius", num(r.radius))
        .field("maximizer_mu", num(r.maximizer_mu))
        .field("kappa", num(r.kappa))
        .field("solver_iterations", int(r.solver_iterations as u64))
        .field("bracket", Value::Array(vec![num(r.bracket.0), num(r.bracket.1)]))
}

pub fn radius(a: &RadiusArgs) -> Result<Report, CliError> {
    match a.criterion {
        Criterion::Lp | Criterion::Groeneveld => {
            let (name, r) = if a.criterion == Criterion::Lp {
                ("lp", lp_radius(a.c, a.u)?)
            } else {
                ("groeneveld", groeneveld_radius(a.c, a.u)?)
            };
            let report = Report::new("radius")
                .field("criterion", text(name))
                .field("C", num(a.c))
                .field("u", num(a.u));
            Ok(radius_fields(report, &r).field("radius_times_c", num(r.radius * a.c)))
        }
        Criterion::Nf => {
            let table = compute_psi_table_hard_disks(a.sigma, a.samples, a.seed)?;
            let r = nf_radius(&table)?;
            let c = PI * a.sigma * a.sigma;
            // Envelope theorem: dR/dI_k = -2 μ*^{k+1}/k! / (2Ψ(μ*) - 1)^2 at the maximizer.
            let mu = r.maximizer_mu;
            let denom = mu / r.radius;
            let err: f64 = table
                .errors
                .iter()
                .enumerate()
                .map(|(i, e)| 2.0 * mu * mu.powi(i as i32 + 1) / factorial(i + 1) / (denom * denom) * e)
                .sum();
            let rows = table
                .coefficients
                .iter()
                .zip(&table.errors)
                .zip(&table.hits)
                .enumerate()
                .map(|(i, ((v, e), h))| vec![int(i as u64 + 1), num(*v), num(*e), int(*h)])
                .collect();
            let report = Report::new("radius")
                .field("criterion", text("nf"))
                .field("potential", text("hard_disks"))
                .field("sigma", num(a.sigma))
                .field("C", num(c))
                .field("samples", int(a.samples))
                .field("seed", int(a.seed));
            Ok(radius_fields(report, &r)
                .field("radius_times_c", num(r.radius * c))
                .field("radius_error", num(err))
                .field("radius_times_c_error", num(err * c))
                .field("i6_hits", int(0u8))
                .table("psi_table", &["k", "value", "error", "hits"], rows))
        }
    }
}

fn parse_point(s: &str) -> Result<Point, CliError> {
    let coords: Vec<f64> = s
        .split(':')
        .map(|c| {
            c.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("bad coordinate {c:?}: {e}")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Point::new(&coords)?)
}

pub fn series(a: &SeriesArgs) -> Result<Report, CliError> {
    let v = potential(&a.potential)?;
    let integ = match a.method {
        IntegrationMethod::Grid => Integrator::grid(a.h)?,
        IntegrationMethod::Mc => Integrator::monte_carlo(a.samples, a.seed)?,
    };
    let xs: Vec<Point> = a.points.iter().map(|s| parse_point(s)).collect::<Result<_, _>>()?;
    if xs.iter().any(|p| p.dim() != v.dim()) {
        return Err(CliError::Usage(format!("--points must have dimension {}", v.dim())));
    }
    let q = xs[0];
    let model = DensityModel::homogeneous(1.0, v.clone())?.with_reference(q);
    let (name, table): (&str, TruncatedExpansion) = match a.quantity {
        Quantity::D => ("d", d_partial(&q, &model, a.order, &integ)?),
        Quantity::Z => ("z", activity_from_density(&model, a.order, &integ)?),
        Quantity::Density => ("density", density_from_activity(&model, a.order, &integ)?),
        Quantity::Ursell => ("ursell", ursell_coefficients(&q, &model, a.order, &integ)?),
        Quantity::Gbar => ("gbar", gbar_coefficients(&xs, &model, a.order, &integ)?),
        Quantity::G => ("g", g_coefficients(&xs, &model, a.order, &integ)?),
        Quantity::Alpha => ("alpha", alpha_coefficients(&xs, &model, a.order, &integ)?),
    };
    let rows = table
        .coefficients()
        .iter()
        .zip(table.errors())
        .enumerate()
        .map(|(k, (c, e))| vec![int(k as u64), num(*c), num(*e)])
        .collect();
    let mut report = Report::new("series")
        .field("quantity", text(name))
        .field("potential", text(potential_name(a.potential.potential)))
        .field("sigma", num(a.potential.sigma))
        .field("order", int(a.order as u64))
        .field("method", text(table.method.to_string()));
    report = match a.method {
        IntegrationMethod::Grid => report.field("h", num(a.h)),
        IntegrationMethod::Mc => report.field("samples", int(a.samples)).field("seed", int(a.seed)),
    };
    Ok(report
        .field(
            "points",
            Value::Array(
                xs.iter()
                    .map(|p| Value::Array(p.coords().iter().map(|&c| num(c)).collect()))
                    .collect(),
            ),
        )
        .table("coefficients", &["k", "value", "error"], rows))
}
