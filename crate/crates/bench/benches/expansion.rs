use criterion::{black_box, criterion_group, criterion_main, Criterion};

use clusterkit::criteria::{compute_psi_table_hard_disks, groeneveld_radius, lp_radius, nf_radius};
use clusterkit::expansion::{d_partial, gbar_partial};
use clusterkit::weights::line_points;
use clusterkit::{DensityModel, Integrator, PairPotential, Point};

fn radii(c: &mut Criterion) {
    c.bench_function("lp radius", |b| b.iter(|| lp_radius(black_box(1.0), 1.0).unwrap()));
    c.bench_function("groeneveld radius", |b| {
        b.iter(|| groeneveld_radius(black_box(1.0), 1.0).unwrap())
    });
    let mut g = c.benchmark_group("nf");
    g.sample_size(10);
    g.bench_function("disk table 1e5 + radius", |b| {
        b.iter(|| nf_radius(&compute_psi_table_hard_disks(1.0, 100_000, 1).unwrap()).unwrap())
    });
    g.finish();
}

fn series(c: &mut Criterion) {
    let rods = PairPotential::hard_rods(1.0).unwrap();
    let model = DensityModel::homogeneous(0.05, rods).unwrap();
    let integ = Integrator::grid(1.0 / 40.0).unwrap();
    let mut g = c.benchmark_group("series");
    g.sample_size(10);
    g.bench_function("d_3 rods h=1/40", |b| {
        b.iter(|| d_partial(&Point::on_line(0.0), &model, 3, &integ).unwrap())
    });
    let xs = line_points(&[0.0, 1.4]);
    g.bench_function("gbar N=2 rods h=1/40", |b| {
        b.iter(|| gbar_partial(&xs, &model, 2, &integ).unwrap())
    });
    g.finish();
}

criterion_group!(benches, radii, series);
criterion_main!(benches);
