use clusterkit::expansion::*;
use clusterkit::weights::line_points;
use clusterkit::{DensityModel, Integrator, PairPotential, Point, TruncatedExpansion, WeightAnsatz};

fn rods() -> PairPotential {
    PairPotential::hard_rods(1.0).unwrap()
}

/// Tonks gas: `d_n = -(1 + 1/n)` for unit rods.
fn tonks_d(n: usize) -> f64 {
    -(1.0 + 1.0 / n as f64)
}

#[test]
fn tonks_d_coefficients() {
    let integ = Integrator::grid(1.0 / 200.0).unwrap();
    let model = DensityModel::homogeneous(0.1, rods()).unwrap();
    let d = d_partial(&Point::on_line(0.0), &model, 2, &integ).unwrap();
    assert_eq!(d.coefficient(0), 0.0);
    assert!((d.coefficient(1) - tonks_d(1)).abs() < 1e-12);
    assert!((d.coefficient(2) - tonks_d(2)).abs() < 5e-3 * 1.5);

    let coarse = Integrator::grid(1.0 / 40.0).unwrap();
    let d3 = d_partial(&Point::on_line(0.0), &model, 3, &coarse)
        .unwrap()
        .coefficient(3);
    assert!((d3 - tonks_d(3)).abs() < 0.05 * 4.0 / 3.0, "{d3}");
}

#[test]
fn tonks_activity_series() {
    // z = ρ/(1-t) exp(t/(1-t)) with t = ρσ; b̃_1 = -2, b̃_2 = 9/2.
    let integ = Integrator::grid(1.0 / 200.0).unwrap();
    let model = DensityModel::homogeneous(0.1, rods()).unwrap();
    let b = ursell_coefficients(&Point::on_line(0.0), &model, 2, &integ).unwrap();
    assert!((b.coefficient(1) + 2.0).abs() < 1e-12);
    assert!((b.coefficient(2) - 4.5).abs() < 0.03);

    let z = activity_from_density(&model, 2, &integ).unwrap();
    // ρ e^{2ρ + 3ρ²/2}: 1, 2, 2 + 3/2.
    let expected = [0.0, 1.0, 2.0, 3.5];
    for (k, e) in expected.iter().enumerate() {
        assert!((z.coefficient(k) - e).abs() < 0.02, "z_{k} = {}", z.coefficient(k));
    }
}

fn lattice_site(integ: &Integrator, k: i64) -> Point {
    Point::on_line(integ.lattice_point(k).unwrap())
}

#[test]
fn density_activity_round_trip_is_identity_on_the_lattice() {
    for order in 1..=3 {
        let integ = Integrator::grid(1.0 / 20.0).unwrap().without_error();
        let q = lattice_site(&integ, 0);
        let model = DensityModel::homogeneous(0.1, rods()).unwrap().with_reference(q);
        let z = activity_from_density(&model, order, &integ).unwrap();
        let rho = density_from_activity(&model, order, &integ).unwrap();
        let back = rho.compose(&z).unwrap();
        for k in 0..=order + 1 {
            let want = if k == 1 { 1.0 } else { 0.0 };
            assert!(
                (back.coefficient(k) - want).abs() < 1e-10,
                "N={order} k={k}: {}",
                back.coefficient(k)
            );
        }
    }
}

fn relation_residual(xs: &[Point], order: usize, integ: &Integrator) -> TruncatedExpansion {
    let model = DensityModel::homogeneous(0.1, rods()).unwrap().with_reference(xs[0]);
    let alpha = alpha_coefficients(xs, &model, order, integ).unwrap();
    let z = activity_from_density(&model, order, integ).unwrap();
    let alpha_of_rho = alpha.compose(&z).unwrap().truncate(order);
    let d = d_partial(&xs[0], &model, order, integ).unwrap();
    let damp = d.scale(-(xs.len() as f64)).exp().unwrap();
    let g = g_coefficients(xs, &model, order, integ).unwrap();
    alpha_of_rho.mul(&damp).truncate(order).sub(&g)
}

#[test]
fn activity_and_density_correlations_agree() {
    let integ = Integrator::grid(1.0 / 20.0).unwrap().without_error();
    for (s, order) in [(1usize, 3usize), (2, 2), (2, 3), (3, 2)] {
        for spacing in [11i64, 17, 30] {
            let xs: Vec<Point> = (0..s as i64).map(|i| lattice_site(&integ, i * spacing)).collect();
            let r = relation_residual(&xs, order, &integ);
            for k in 0..=order {
                assert!(
                    r.coefficient(k).abs() < 1e-10,
                    "s={s} N={order} k={k}: {}",
                    r.coefficient(k)
                );
            }
        }
    }
}

#[test]
fn ks_residual_vanishes_to_order_n_plus_one() {
    let integ = Integrator::grid(1.0 / 20.0).unwrap().without_error();
    let model = DensityModel::homogeneous(0.05, rods()).unwrap();
    let order = 2;
    let configs: Vec<Vec<Point>> = [0.3, 1.2, 1.75, 2.6]
        .iter()
        .map(|&d| line_points(&[0.013, 0.013 + d]))
        .collect();
    for xs in &configs {
        let series = ks_residual_series(xs, &model, order, &integ).unwrap();
        for k in 0..=order {
            assert!(series.coefficient(k).abs() < 1e-10, "k={k}: {}", series.coefficient(k));
        }
    }
    let r1 = ks_residual(&configs, &model, order, &integ).unwrap();
    let r2 = ks_residual(&configs, &model.with_scale(0.1).unwrap(), order, &integ).unwrap();
    let p = vanishing_order(0.05, r1, 0.1, r2);
    assert!((p - (order as f64 + 1.0)).abs() < 0.1, "fitted order {p}");
}

#[test]
fn ks_single_point_equation() {
    let integ = Integrator::grid(1.0 / 20.0).unwrap().without_error();
    let model = DensityModel::homogeneous(0.08, rods()).unwrap();
    let series = ks_residual_series(&line_points(&[0.2]), &model, 3, &integ).unwrap();
    for k in 0..=3 {
        assert!(series.coefficient(k).abs() < 1e-10, "k={k}: {}", series.coefficient(k));
    }
}

fn gbar_ansatz(order: usize, model: &DensityModel, integ: &Integrator) -> WeightAnsatz {
    let (model, integ) = (model.clone(), integ.without_error());
    WeightAnsatz::custom(move |xs| gbar_partial(xs, &model, order, &integ).unwrap().value, true)
}

#[test]
fn gbar_partial_sums_satisfy_the_recursive_bound() {
    let integ = Integrator::grid(1.0 / 20.0).unwrap().without_error();
    for rho in [0.02, 0.05, 0.1] {
        let model = DensityModel::homogeneous(rho, rods()).unwrap();
        for order in 0..=2 {
            let m = gbar_ansatz(order, &model, &integ);
            for xs in [vec![0.0, 1.3], vec![0.0, 2.2], vec![0.1, 1.4, 2.9]] {
                let xs = line_points(&xs);
                let lhs = gbar_partial(&xs, &model, order + 1, &integ).unwrap().value;
                let rhs = apply_k(&m, &xs, &model, &integ, None).unwrap().value;
                assert!(lhs < rhs, "rho={rho} N={order} {xs:?}: {lhs} !< {rhs}");
            }
        }
    }
}

#[test]
fn nf_certificate_bounds_gbar() {
    let (rho, kappa) = (0.05, 20.0);
    let integ = Integrator::grid(1.0 / 50.0).unwrap().without_error();
    let model = DensityModel::homogeneous(rho, rods()).unwrap();
    let nf = WeightAnsatz::Nf {
        kappa,
        potential: rods(),
    };
    for k in 0..20 {
        let xs = line_points(&[0.0, 0.2 * k as f64 + 0.01]);
        let g = gbar_partial(&xs, &model, 3, &integ).unwrap().value;
        assert!(g <= nf.eval(&xs), "{xs:?}: {g}");
    }
}
