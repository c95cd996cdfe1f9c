//! Integration of cluster integrands over `n` free points.
//!
//! The grid method sums over the 1-D lattice `(k + offset) h`, `k ∈ Z`,
//! with weight `h` per point. This is an exact discrete measure: identities
//! that hold for every measure hold for it to rounding, provided all fixed
//! points sit on lattice sites. As a quadrature rule its error estimate is
//! `|I_h - I_{2h}|`.
//!
//! The Monte Carlo method samples the free points uniformly in a box around
//! the fixed points. Samples are drawn in fixed-size blocks, each from its
//! own ChaCha stream keyed by `(seed, stream, block)`, and block sums are
//! combined in block order, so results do not depend on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::pair_count;
use crate::polynomial::edge_index;
use crate::series::ExpansionMethod;
use crate::weights::{PairPotential, Point};

/// Samples per Monte Carlo block.
pub const MC_BLOCK: u64 = 1 << 16;

/// Largest lattice size for a custom (non-radial) potential, whose pair
/// values are tabulated as a full matrix.
const MAX_CUSTOM_LATTICE: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Grid { h: f64, offset: f64 },
    MonteCarlo { samples: u64, seed: u64 },
}

/// Integration method plus options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integrator {
    method: Method,
    stream: u64,
    estimate_error: bool,
}

/// Integral value with an error estimate (grid: `|I_h - I_2h|`; Monte
/// Carlo: one standard error).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

impl Estimate {
    pub const ZERO: Estimate = Estimate { value: 0.0, error: 0.0 };

    pub fn exact(value: f64) -> Self {
        Self { value, error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Self {
            value: self.value * c,
            error: self.error * c.abs(),
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, o: Estimate) -> Estimate {
        Estimate {
            value: self.value + o.value,
            error: self.error + o.error,
        }
    }
}

/// One evaluation point of an integrand: the fixed points followed by the
/// free points, with the Mayer values of every pair.
pub struct Config<'a> {
    points: &'a [Point],
    edges: &'a [f64],
    fixed: usize,
}

impl<'a> Config<'a> {
    pub fn points(&self) -> &[Point] {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn fixed_count(&self) -> usize {
        self.fixed
    }

    /// Mayer values of all pairs in [`crate::graph::edge_pairs`] order.
    pub fn edges(&self) -> &[f64] {
        self.edges
    }

    #[inline]
    pub fn f(&self, i: usize, j: usize) -> f64 {
        self.edges[edge_index(self.points.len(), i, j)]
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Generator for one Monte Carlo block.
pub fn block_rng(seed: u64, stream: u64, block: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut x = splitmix(seed ^ splitmix(stream ^ splitmix(block)));
    for chunk in key.chunks_mut(8) {
        x = splitmix(x);
        chunk.copy_from_slice(&x.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Sum of `f` over `samples` draws, block by block; returns `(Σf, Σf²)`.
pub fn mc_sum<F>(samples: u64, seed: u64, stream: u64, f: F) -> (f64, f64)
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let blocks = samples.div_ceil(MC_BLOCK);
    let parts: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, stream, b);
            let count = MC_BLOCK.min(samples - b * MC_BLOCK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..count {
                let v = f(&mut rng);
                s += v;
                s2 += v * v;
            }
            (s, s2)
        })
        .collect();
    parts.iter().fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2))
}

impl Integrator {
    /// Midpoint lattice with step `h`.
    pub fn grid(h: f64) -> Result<Self> {
        Self::grid_with_offset(h, 0.5)
    }

    pub fn grid_with_offset(h: f64, offset: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Domain(format!("grid step must be positive, got {h}")));
        }
        Ok(Self {
            method: Method::Grid { h, offset },
            stream: 0,
            estimate_error: true,
        })
    }

    pub fn monte_carlo(samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::Domain("Monte Carlo needs at least one sample".into()));
        }
        Ok(Self {
            method: Method::MonteCarlo { samples, seed },
            stream: 0,
            estimate_error: true,
        })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn expansion_method(&self) -> ExpansionMethod {
        match self.method {
            Method::Grid { h, .. } => ExpansionMethod::Grid { h },
            Method::MonteCarlo { samples, seed } => ExpansionMethod::MonteCarlo { samples, seed },
        }
    }

    /// Same method on an independent random stream.
    pub fn with_stream(mut self, stream: u64) -> Self {
        self.stream = stream;
        self
    }

    /// Skip the coarse-grid error estimate (grid method only).
    pub fn without_error(mut self) -> Self {
        self.estimate_error = false;
        self
    }

    /// Lattice site `k`, if this is a grid.
    pub fn lattice_point(&self, k: i64) -> Option<f64> {
        match self.method {
            Method::Grid { h, offset } => Some((k as f64 + offset) * h),
            Method::MonteCarlo { .. } => None,
        }
    }

    /// `∫ F(fixed, y_1..y_n) dy_1..dy_n` over Lebesgue measure (lattice
    /// measure for the grid). `F` must vanish once some free point is farther
    /// than `n · range` from every fixed point. With `symmetric`, `F` is
    /// assumed symmetric in the free points and only sorted tuples are visited.
    pub fn integrate<F>(
        &self,
        fixed: &[Point],
        n: usize,
        v: &PairPotential,
        symmetric: bool,
        integrand: F,
    ) -> Result<Estimate>
    where
        F: Fn(&Config<'_>) -> f64 + Sync,
    {
        let dim = v.dim();
        if fixed.is_empty() {
            return Err(Error::Domain("at least one fixed point is required".into()));
        }
        if fixed.iter().any(|p| p.dim() != dim) {
            return Err(Error::Domain("fixed points and potential differ in dimension".into()));
        }
        if n == 0 {
            let edges = pair_edges(fixed, v);
            return Ok(Estimate::exact(integrand(&Config {
                points: fixed,
                edges: &edges,
                fixed: fixed.len(),
            })));
        }
        let range = v
            .range()
            .ok_or_else(|| Error::Domain("integration needs a potential with finite range".into()))?;
        match self.method {
            Method::Grid { h, offset } => {
                if dim != 1 {
                    return Err(Error::Domain(
                        "the lattice method is one-dimensional; use Monte Carlo".into(),
                    ));
                }
                let fine = lattice_sum(fixed, n, v, range, h, offset, symmetric, &integrand)?;
                let error = if self.estimate_error {
                    (fine - lattice_sum(fixed, n, v, range, 2.0 * h, offset, symmetric, &integrand)?).abs()
                } else {
                    0.0
                };
                Ok(Estimate { value: fine, error })
            }
            Method::MonteCarlo { samples, seed } => {
                Ok(mc_integrate(fixed, n, v, range, samples, seed, self.stream, &integrand))
            }
        }
    }
}

fn pair_edges(points: &[Point], v: &PairPotential) -> Vec<f64> {
    let k = points.len();
    let mut e = Vec::with_capacity(pair_count(k));
    for i in 0..k {
        for j in i + 1..k {
            e.push(v.f(&points[i], &points[j]));
        }
    }
    e
}

fn bounding_box(fixed: &[Point], pad: f64) -> (Vec<f64>, Vec<f64>) {
    let dim = fixed[0].dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in fixed {
        for (k, &c) in p.coords().iter().enumerate() {
            lo[k] = lo[k].min(c - pad);
            hi[k] = hi[k].max(c + pad);
        }
    }
    (lo, hi)
}

enum PairTable {
    Radial(Vec<f64>),
    Full(Vec<f64>, usize),
}

impl PairTable {
    #[inline]
    fn get(&self, a: usize, b: usize) -> f64 {
        match self {
            PairTable::Radial(t) => t[a.abs_diff(b)],
            PairTable::Full(t, l) => t[a * l + b],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn lattice_sum<F>(
    fixed: &[Point],
    n: usize,
    v: &PairPotential,
    range: f64,
    h: f64,
    offset: f64,
    symmetric: bool,
    integrand: &F,
) -> Result<f64>
where
    F: Fn(&Config<'_>) -> f64 + Sync,
{
    let (lo, hi) = bounding_box(fixed, n as f64 * range);
    let k_lo = (lo[0] / h - offset).floor() as i64;
    let k_hi = (hi[0] / h - offset).ceil() as i64;
    let sites: Vec<Point> = (k_lo..=k_hi).map(|k| Point::on_line((k as f64 + offset) * h)).collect();
    let l = sites.len();
    let s = fixed.len();
    let table = if v.is_radial() {
        PairTable::Radial((0..l).map(|d| v.radial_f(d as f64 * h).expect("radial")).collect())
    } else {
        if l > MAX_CUSTOM_LATTICE {
            return Err(Error::Domain(format!(
                "lattice of {l} sites is too large for a custom potential"
            )));
        }
        let mut t = vec![0.0; l * l];
        for a in 0..l {
            for b in 0..l {
                t[a * l + b] = v.f(&sites[a], &sites[b]);
            }
        }
        PairTable::Full(t, l)
    };
    let fixed_f: Vec<Vec<f64>> = fixed
        .iter()
        .map(|x| sites.iter().map(|y| v.f(x, y)).collect())
        .collect();
    let base_edges = pair_edges(fixed, v);
    let total = s + n;
    let fact: Vec<f64> = (0..=n)
        .scan(1.0, |acc, k| {
            if k > 0 {
                *acc *= k as f64;
            }
            Some(*acc)
        })
        .collect();

    let ctx = LatticeCtx {
        fixed,
        sites: &sites,
        table: &table,
        fixed_f: &fixed_f,
        total,
        s,
        symmetric,
        fact: &fact,
    };
    let partial: Vec<f64> = (0..l)
        .into_par_iter()
        .map(|first| {
            let mut points: Vec<Point> = fixed.to_vec();
            points.resize(total, Point::on_line(0.0));
            let mut edges = vec![0.0; pair_count(total)];
            for i in 0..s {
                for j in i + 1..s {
                    edges[edge_index(total, i, j)] = base_edges[edge_index(s, i, j)];
                }
            }
            let mut idx = vec![0usize; n];
            ctx.place(0, first, &mut idx, &mut points, &mut edges);
            ctx.descend(1, &mut idx, &mut points, &mut edges, integrand)
        })
        .collect();
    let mut sum = 0.0;
    for p in partial {
        sum += p;
    }
    Ok(sum * h.powi(n as i32))
}

struct LatticeCtx<'a> {
    fixed: &'a [Point],
    sites: &'a [Point],
    table: &'a PairTable,
    fixed_f: &'a [Vec<f64>],
    total: usize,
    s: usize,
    symmetric: bool,
    fact: &'a [f64],
}

impl LatticeCtx<'_> {
    fn place(&self, depth: usize, site: usize, idx: &mut [usize], points: &mut [Point], edges: &mut [f64]) {
        idx[depth] = site;
        let me = self.s + depth;
        points[me] = self.sites[site];
        for a in 0..self.fixed.len() {
            edges[edge_index(self.total, a, me)] = self.fixed_f[a][site];
        }
        for d in 0..depth {
            edges[edge_index(self.total, self.s + d, me)] = self.table.get(idx[d], site);
        }
    }

    fn multiplicity(&self, idx: &[usize]) -> f64 {
        if !self.symmetric {
            return 1.0;
        }
        let mut m = self.fact[idx.len()];
        let mut run = 1;
        for w in idx.windows(2) {
            if w[0] == w[1] {
                run += 1;
            } else {
                m /= self.fact[run];
                run = 1;
            }
        }
        m / self.fact[run]
    }

    fn descend<F>(&self, depth: usize, idx: &mut [usize], points: &mut [Point], edges: &mut [f64], integrand: &F) -> f64
    where
        F: Fn(&Config<'_>) -> f64,
    {
        if depth == idx.len() {
            let cfg = Config {
                points,
                edges,
                fixed: self.s,
            };
            let val = integrand(&cfg);
            return if val == 0.0 { 0.0 } else { val * self.multiplicity(idx) };
        }
        let start = if self.symmetric { idx[depth - 1] } else { 0 };
        let mut acc = 0.0;
        for site in start..self.sites.len() {
            self.place(depth, site, idx, points, edges);
            acc += self.descend(depth + 1, idx, points, edges, integrand);
        }
        acc
    }
}

#[allow(clippy::too_many_arguments)]
fn mc_integrate<F>(
    fixed: &[Point],
    n: usize,
    v: &PairPotential,
    range: f64,
    samples: u64,
    seed: u64,
    stream: u64,
    integrand: &F,
) -> Estimate
where
    F: Fn(&Config<'_>) -> f64 + Sync,
{
    let (lo, hi) = bounding_box(fixed, n as f64 * range);
    let dim = lo.len();
    let volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product::<f64>().powi(n as i32);
    let s = fixed.len();
    let total = s + n;
    let (sum, sum2) = mc_sum(samples, seed, stream ^ (n as u64) << 32, |rng| {
        let mut points: Vec<Point> = fixed.to_vec();
        for _ in 0..n {
            let mut c = [0.0; 3];
            for k in 0..dim {
                c[k] = rng.gen_range(lo[k]..hi[k]);
            }
            points.push(Point::new(&c[..dim]).expect("dimension checked"));
        }
        let edges = pair_edges(&points, v);
        integrand(&Config {
            points: &points,
            edges: &edges,
            fixed: s,
        })
    });
    debug_assert_eq!(total, s + n);
    let m = samples as f64;
    let mean = sum / m;
    let var = (sum2 / m - mean * mean).max(0.0);
    Estimate {
        value: mean * volume,
        error: (var / m).sqrt() * volume,
    }
}
