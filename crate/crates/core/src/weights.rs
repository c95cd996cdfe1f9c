//! Pair potentials, Mayer's f-function and the brute-force weighted graph
//! sums (`D_n`, `ψ`, `ψ_c`, `φ^T`, `φ`, `ψ̂`).
//!
//! Sums are computed by enumerating the member graphs of each class, so
//! they serve as the reference values the recurrences and expansions are
//! tested against. Everything is expressed in terms of a [`WeightMatrix`]
//! holding `f(x_i, x_j)` for the points involved; the point-based wrappers
//! build that matrix from a [`PairPotential`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{check_bound, Error, Result};
use crate::graph::{vertices, LabelledGraph, VertexSet};
use crate::polynomial::{class_polynomial, ClassShape, MAX_POLY_VERTICES};

/// Largest dimension of a [`Point`].
pub const MAX_DIM: usize = 3;

/// Point of `R^d`, `1 <= d <= 3`.
#[derive(Clone, Copy, PartialEq)]
pub struct Point {
    coords: [f64; MAX_DIM],
    dim: u8,
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Point").field(&self.coords()).finish()
    }
}

impl Point {
    pub fn new(coords: &[f64]) -> Result<Self> {
        check_bound("point dimension", coords.len(), 1, MAX_DIM)?;
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Self {
            coords: c,
            dim: coords.len() as u8,
        })
    }

    /// Point on the line.
    pub fn on_line(x: f64) -> Self {
        Self {
            coords: [x, 0.0, 0.0],
            dim: 1,
        }
    }

    pub fn origin(dim: usize) -> Self {
        Self {
            coords: [0.0; MAX_DIM],
            dim: dim.clamp(1, MAX_DIM) as u8,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords[..self.dim()]
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.coords[0]
    }

    #[inline]
    pub fn distance(&self, other: &Point) -> f64 {
        let mut s = 0.0;
        for k in 0..self.dim() {
            let d = self.coords[k] - other.coords[k];
            s += d * d;
        }
        s.sqrt()
    }

    pub fn translated(&self, offset: &[f64]) -> Point {
        let mut p = *self;
        for (k, o) in offset.iter().enumerate().take(self.dim()) {
            p.coords[k] += o;
        }
        p
    }
}

/// Points on the line from their coordinates.
pub fn line_points(xs: &[f64]) -> Vec<Point> {
    xs.iter().map(|&x| Point::on_line(x)).collect()
}

type PotentialFn = Arc<dyn Fn(&Point, &Point) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Interaction {
    Zero,
    /// `v = ∞` for `r < σ`, else 0.
    HardCore {
        sigma: f64,
    },
    /// `v = height` for `r < σ`, else 0.
    Shoulder {
        sigma: f64,
        height: f64,
    },
    Custom(PotentialFn),
}

/// Symmetric pair potential with its declared stability and integrability
/// constants. The constants are never inferred from the callback.
#[derive(Clone)]
pub struct PairPotential {
    interaction: Interaction,
    dim: usize,
    stability_b: f64,
    integral_c: Option<f64>,
    nonnegative: bool,
    range: Option<f64>,
}

impl fmt::Debug for PairPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.interaction {
            Interaction::Zero => "zero".to_string(),
            Interaction::HardCore { sigma } => format!("hard-core(sigma={sigma})"),
            Interaction::Shoulder { sigma, height } => format!("shoulder(sigma={sigma}, height={height})"),
            Interaction::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("PairPotential")
            .field("kind", &kind)
            .field("dim", &self.dim)
            .field("stability_b", &self.stability_b)
            .field("integral_c", &self.integral_c)
            .field("nonnegative", &self.nonnegative)
            .finish()
    }
}

/// Volume of the ball of radius `r` in `R^d`.
pub fn ball_volume(dim: usize, r: f64) -> f64 {
    match dim {
        1 => 2.0 * r,
        2 => PI * r * r,
        3 => 4.0 / 3.0 * PI * r * r * r,
        _ => f64::NAN,
    }
}

impl PairPotential {
    pub fn zero(dim: usize) -> Self {
        Self {
            interaction: Interaction::Zero,
            dim,
            stability_b: 0.0,
            integral_c: Some(0.0),
            nonnegative: true,
            range: Some(0.0),
        }
    }

    /// Hard spheres of diameter `sigma` in dimension `dim` (rods for 1, disks for 2).
    pub fn hard_core(dim: usize, sigma: f64) -> Result<Self> {
        check_bound("dimension", dim, 1, MAX_DIM)?;
        if !(sigma > 0.0) {
            return Err(Error::Domain(format!("diameter must be positive, got {sigma}")));
        }
        Ok(Self {
            interaction: Interaction::HardCore { sigma },
            dim,
            stability_b: 0.0,
            integral_c: Some(ball_volume(dim, sigma)),
            nonnegative: true,
            range: Some(sigma),
        })
    }

    pub fn hard_rods(sigma: f64) -> Result<Self> {
        Self::hard_core(1, sigma)
    }

    pub fn hard_disks(sigma: f64) -> Result<Self> {
        Self::hard_core(2, sigma)
    }

    pub fn hard_spheres(sigma: f64) -> Result<Self> {
        Self::hard_core(3, sigma)
    }

    /// Bounded repulsive step `v = height` inside distance `sigma`.
    pub fn shoulder(dim: usize, sigma: f64, height: f64) -> Result<Self> {
        check_bound("dimension", dim, 1, MAX_DIM)?;
        if !(sigma > 0.0) || !(height >= 0.0) {
            return Err(Error::Domain("shoulder needs sigma > 0 and height >= 0".into()));
        }
        Ok(Self {
            interaction: Interaction::Shoulder { sigma, height },
            dim,
            stability_b: 0.0,
            integral_c: Some((1.0 - (-height).exp()) * ball_volume(dim, sigma)),
            nonnegative: true,
            range: Some(sigma),
        })
    }

    /// User potential. `range` is a distance beyond which `v = 0`, if any.
    pub fn custom<F>(
        dim: usize,
        v: F,
        stability_b: f64,
        integral_c: Option<f64>,
        nonnegative: bool,
        range: Option<f64>,
    ) -> Result<Self>
    where
        F: Fn(&Point, &Point) -> f64 + Send + Sync + 'static,
    {
        check_bound("dimension", dim, 1, MAX_DIM)?;
        if !(stability_b >= 0.0) {
            return Err(Error::Domain("stability constant B must be nonnegative".into()));
        }
        if let Some(c) = integral_c {
            if !(c >= 0.0) {
                return Err(Error::Domain("integral constant C must be nonnegative".into()));
            }
        }
        Ok(Self {
            interaction: Interaction::Custom(Arc::new(v)),
            dim,
            stability_b,
            integral_c,
            nonnegative,
            range,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared stability constant `B`.
    pub fn stability_b(&self) -> f64 {
        self.stability_b
    }

    /// `u = e^{2B}`.
    pub fn u(&self) -> f64 {
        (2.0 * self.stability_b).exp()
    }

    /// Declared `C = ∫ |e^{-v} - 1|`.
    pub fn integral_c(&self) -> Option<f64> {
        self.integral_c
    }

    pub fn is_nonnegative(&self) -> bool {
        self.nonnegative
    }

    /// Interaction range: `f = 0` at larger distances.
    pub fn range(&self) -> Option<f64> {
        self.range
    }

    /// Hard-core diameter, if this is a pure hard-core potential.
    pub fn hard_core_diameter(&self) -> Option<f64> {
        match self.interaction {
            Interaction::HardCore { sigma } => Some(sigma),
            _ => None,
        }
    }

    /// Whether `f` depends on the distance only.
    pub fn is_radial(&self) -> bool {
        !matches!(self.interaction, Interaction::Custom(_))
    }

    pub fn v(&self, x: &Point, y: &Point) -> f64 {
        match &self.interaction {
            Interaction::Custom(v) => v(x, y),
            _ => self.radial_v(x.distance(y)),
        }
    }

    fn radial_v(&self, r: f64) -> f64 {
        match self.interaction {
            Interaction::Zero => 0.0,
            Interaction::HardCore { sigma } => {
                if r < sigma {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            Interaction::Shoulder { sigma, height } => {
                if r < sigma {
                    height
                } else {
                    0.0
                }
            }
            Interaction::Custom(_) => unreachable!("custom potentials are not radial"),
        }
    }

    /// Mayer function of a radial potential at distance `r`.
    pub fn radial_f(&self, r: f64) -> Option<f64> {
        self.is_radial().then(|| f_from_v(self.radial_v(r)))
    }

    /// Mayer function `f(x, y) = e^{-v(x, y)} - 1`.
    #[inline]
    pub fn f(&self, x: &Point, y: &Point) -> f64 {
        f_from_v(self.v(x, y))
    }
}

#[inline]
fn f_from_v(v: f64) -> f64 {
    if v == f64::INFINITY {
        -1.0
    } else if v == 0.0 {
        0.0
    } else {
        (-v).exp() - 1.0
    }
}

/// Mayer's f-function; exactly `-1` on a hard core.
pub fn mayer_f(v: &PairPotential, x: &Point, y: &Point) -> f64 {
    v.f(x, y)
}

/// Symmetric matrix of edge weights `f_ij` on vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    n: usize,
    f: Vec<f64>,
}

impl WeightMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, f: vec![0.0; n * n] }
    }

    /// Matrix with `f_ij = value(i, j)` for `i < j`.
    pub fn from_fn(n: usize, mut value: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, value(i, j));
            }
        }
        m
    }

    /// Mayer matrix of a point configuration.
    pub fn from_points(points: &[Point], v: &PairPotential) -> Self {
        Self::from_fn(points.len(), |i, j| v.f(&points[i], &points[j]))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.f[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.f[i * self.n + j] = value;
        self.f[j * self.n + i] = value;
    }

    /// Edge-weight vector for the vertices `order` relabelled `0..k`, in
    /// [`crate::graph::edge_pairs`] order.
    pub(crate) fn edge_vector(&self, order: &[usize], out: &mut Vec<f64>) {
        out.clear();
        for (a, &i) in order.iter().enumerate() {
            for &j in &order[a + 1..] {
                out.push(self.get(i, j));
            }
        }
    }

    /// `∏_{i<j in set} (1 + f_ij)`.
    pub fn pair_product(&self, set: VertexSet) -> f64 {
        let vs: Vec<usize> = vertices(set).collect();
        let mut p = 1.0;
        for (a, &i) in vs.iter().enumerate() {
            for &j in &vs[a + 1..] {
                p *= 1.0 + self.get(i, j);
            }
        }
        p
    }
}

/// Value of a graph sum with the number of graphs that entered it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightValue {
    pub value: f64,
    pub terms: u64,
}

fn check_set_size(set: VertexSet) -> Result<()> {
    check_bound("vertex count", set.count_ones() as usize, 0, MAX_POLY_VERTICES)
}

fn eval_shape(wm: &WeightMatrix, shape: ClassShape, order: &[usize]) -> WeightValue {
    let poly = class_polynomial(shape);
    let mut f = Vec::with_capacity(poly.edge_count());
    wm.edge_vector(order, &mut f);
    WeightValue {
        value: poly.eval(&f),
        terms: poly.members().len() as u64,
    }
}

fn ordered(sets: &[VertexSet]) -> Vec<usize> {
    sets.iter().flat_map(|&s| vertices(s)).collect()
}

/// `ψ(I; J)` on the vertices `white ∪ black` of a weight matrix; zero when
/// `white` is empty.
pub fn psi_sum(wm: &WeightMatrix, white: VertexSet, black: VertexSet) -> WeightValue {
    if white == 0 {
        return WeightValue { value: 0.0, terms: 0 };
    }
    let shape = ClassShape::D {
        white: white.count_ones() as usize,
        black: black.count_ones() as usize,
    };
    eval_shape(wm, shape, &ordered(&[white, black]))
}

/// `ψ_c(I; J)`: the connected members of `D(I, J)`.
pub fn psi_connected_sum(wm: &WeightMatrix, white: VertexSet, black: VertexSet) -> WeightValue {
    if white == 0 {
        return WeightValue { value: 0.0, terms: 0 };
    }
    let shape = ClassShape::DConnected {
        white: white.count_ones() as usize,
        black: black.count_ones() as usize,
    };
    eval_shape(wm, shape, &ordered(&[white, black]))
}

/// `φ(I; J)`: sum over `C(I, J)`.
pub fn phi_sum(wm: &WeightMatrix, white: VertexSet, black: VertexSet) -> WeightValue {
    if white == 0 {
        return WeightValue { value: 0.0, terms: 0 };
    }
    let shape = ClassShape::C {
        white: white.count_ones() as usize,
        black: black.count_ones() as usize,
    };
    eval_shape(wm, shape, &ordered(&[white, black]))
}

/// `ψ̂(I'; L; J∖L)`: sum over `D̂(I'; L; J∖L)`.
pub fn psi_hat_sum(wm: &WeightMatrix, iprime: VertexSet, l: VertexSet, jrest: VertexSet) -> WeightValue {
    let shape = ClassShape::DHat {
        iprime: iprime.count_ones() as usize,
        l: l.count_ones() as usize,
        jrest: jrest.count_ones() as usize,
    };
    eval_shape(wm, shape, &ordered(&[iprime, l, jrest]))
}

/// `D(V)`: sum over the 2-connected graphs on `set`.
pub fn two_connected_sum(wm: &WeightMatrix, set: VertexSet) -> WeightValue {
    eval_shape(
        wm,
        ClassShape::TwoConnected(set.count_ones() as usize),
        &ordered(&[set]),
    )
}

/// Ursell function on `set`: sum over connected graphs.
pub fn ursell_sum(wm: &WeightMatrix, set: VertexSet) -> WeightValue {
    eval_shape(wm, ClassShape::Connected(set.count_ones() as usize), &ordered(&[set]))
}

/// Sum over all graphs on `set`.
pub fn all_graphs_sum(wm: &WeightMatrix, set: VertexSet) -> WeightValue {
    eval_shape(wm, ClassShape::All(set.count_ones() as usize), &ordered(&[set]))
}

/// `w(G; x) = ∏_{ij in E(G)} f(x_i, x_j)`.
pub fn graph_weight(g: &LabelledGraph, xs: &[Point], v: &PairPotential) -> Result<f64> {
    if xs.len() != g.n() {
        return Err(Error::Domain(format!(
            "graph has {} vertices but {} points were given",
            g.n(),
            xs.len()
        )));
    }
    Ok(g.edges().map(|(i, j)| v.f(&xs[i], &xs[j])).product())
}

fn concat(a: &[Point], b: &[Point]) -> Vec<Point> {
    a.iter().chain(b).copied().collect()
}

fn lead_sets(whites: usize, blacks: usize) -> (VertexSet, VertexSet) {
    let w = crate::graph::full_set(whites);
    (w, crate::graph::full_set(whites + blacks) & !w)
}

/// `D_n(x_1..x_n)`, `2 <= n <= 7`.
pub fn sum_two_connected(xs: &[Point], v: &PairPotential) -> Result<WeightValue> {
    check_bound("vertex count", xs.len(), 2, MAX_POLY_VERTICES)?;
    let wm = WeightMatrix::from_points(xs, v);
    Ok(two_connected_sum(&wm, crate::graph::full_set(xs.len())))
}

fn check_colored(white: &[Point], black: &[Point]) -> Result<()> {
    if white.is_empty() {
        return Err(Error::Domain("at least one white point is required".into()));
    }
    check_bound("vertex count", white.len() + black.len(), 1, MAX_POLY_VERTICES)
}

/// `ψ((x_i)_{i in W}; (x_j)_{j in B})`.
pub fn sum_psi(white: &[Point], black: &[Point], v: &PairPotential) -> Result<WeightValue> {
    check_colored(white, black)?;
    let wm = WeightMatrix::from_points(&concat(white, black), v);
    let (w, b) = lead_sets(white.len(), black.len());
    Ok(psi_sum(&wm, w, b))
}

/// `ψ_c`: connected members of `D(W, B)` only.
pub fn sum_psi_connected(white: &[Point], black: &[Point], v: &PairPotential) -> Result<WeightValue> {
    check_colored(white, black)?;
    let wm = WeightMatrix::from_points(&concat(white, black), v);
    let (w, b) = lead_sets(white.len(), black.len());
    Ok(psi_connected_sum(&wm, w, b))
}

/// Ursell function `φ^T_n`, `1 <= n <= 7`.
pub fn ursell(xs: &[Point], v: &PairPotential) -> Result<WeightValue> {
    check_bound("vertex count", xs.len(), 1, MAX_POLY_VERTICES)?;
    let wm = WeightMatrix::from_points(xs, v);
    Ok(ursell_sum(&wm, crate::graph::full_set(xs.len())))
}

/// `φ(W; B)`: sum over `C(W, B)`.
pub fn sum_phi_class_c(white: &[Point], black: &[Point], v: &PairPotential) -> Result<WeightValue> {
    check_colored(white, black)?;
    let wm = WeightMatrix::from_points(&concat(white, black), v);
    let (w, b) = lead_sets(white.len(), black.len());
    Ok(phi_sum(&wm, w, b))
}

pub(crate) fn check_sets(sets: &[VertexSet]) -> Result<()> {
    let mut seen = 0;
    for &s in sets {
        if s & seen != 0 {
            return Err(Error::Domain("vertex sets must be disjoint".into()));
        }
        seen |= s;
    }
    check_set_size(seen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::enumerate_graphs;

    fn rods() -> PairPotential {
        PairPotential::hard_rods(1.0).unwrap()
    }

    #[test]
    fn mayer_f_hard_rods() {
        let v = rods();
        let o = Point::on_line(0.0);
        assert_eq!(mayer_f(&v, &o, &Point::on_line(0.5)), -1.0);
        assert_eq!(mayer_f(&v, &o, &Point::on_line(1.5)), 0.0);
        assert_eq!(mayer_f(&PairPotential::zero(1), &o, &Point::on_line(0.1)), 0.0);
    }

    #[test]
    fn graph_weight_examples() {
        let xs = line_points(&[0.0, 0.3, 0.6]);
        let edgeless = LabelledGraph::empty(3).unwrap();
        assert_eq!(graph_weight(&edgeless, &xs, &rods()).unwrap(), 1.0);
        let tri = LabelledGraph::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(graph_weight(&tri, &xs, &rods()).unwrap(), -1.0);
        assert!(graph_weight(&tri, &xs[..2], &rods()).is_err());
    }

    #[test]
    fn psi_examples() {
        let v = PairPotential::shoulder(1, 1.0, 0.7).unwrap();
        let p = line_points(&[0.0, 0.4, 0.9, 1.3]);
        let f = |i: usize, j: usize| v.f(&p[i], &p[j]);
        let s = sum_psi(&p, &[], &v).unwrap().value;
        let prod: f64 = (0..4)
            .flat_map(|i| (i + 1..4).map(move |j| (i, j)))
            .map(|(i, j)| 1.0 + f(i, j))
            .product();
        assert!((s - prod).abs() < 1e-12 * prod.abs().max(1.0));

        assert_eq!(sum_psi(&p[..1], &p[1..2], &v).unwrap().value, 0.0);
        let s = sum_psi(&p[..2], &p[2..3], &v).unwrap().value;
        let expected = f(0, 2) * f(1, 2) * (1.0 + f(0, 1));
        assert!((s - expected).abs() < 1e-14);
        assert!(sum_psi(&[], &p, &v).is_err());
    }

    #[test]
    fn psi_connected_examples() {
        let v = PairPotential::shoulder(1, 1.0, 0.7).unwrap();
        let p = line_points(&[0.0, 0.4, 0.9]);
        let f01 = v.f(&p[0], &p[1]);
        // Of the two member graphs on two whites only the edge is connected.
        assert!((sum_psi_connected(&p[..2], &[], &v).unwrap().value - f01).abs() < 1e-15);
        let a = sum_psi_connected(&p[..2], &p[2..], &v).unwrap().value;
        let b = sum_psi(&p[..2], &p[2..], &v).unwrap().value;
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn ursell_examples() {
        let xs = line_points(&[0.0, 0.2, 0.4]);
        assert_eq!(ursell(&xs, &rods()).unwrap().value, 2.0);
        assert_eq!(ursell(&xs[..1], &rods()).unwrap().value, 1.0);
        assert_eq!(ursell(&xs[..2], &rods()).unwrap().value, -1.0);
    }

    #[test]
    fn phi_examples() {
        let v = PairPotential::shoulder(1, 1.0, 0.3).unwrap();
        let p = line_points(&[0.0, 0.5, 2.5]);
        let f01 = v.f(&p[0], &p[1]);
        assert!((sum_phi_class_c(&p[..2], &[], &v).unwrap().value - (1.0 + f01)).abs() < 1e-15);
        assert_eq!(sum_phi_class_c(&p[..1], &p[1..2], &v).unwrap().value, f01);
        // Overlapping hard rods: all f = -1, six member graphs with alternating signs.
        let close = line_points(&[0.0, 0.1, 0.2]);
        let r = sum_phi_class_c(&close[..2], &close[2..], &rods()).unwrap();
        assert_eq!((r.value, r.terms), (0.0, 6));
    }

    #[test]
    fn two_connected_small() {
        let v = PairPotential::shoulder(1, 1.0, 0.4).unwrap();
        let p = line_points(&[0.0, 0.5, 0.8]);
        let f = |i: usize, j: usize| v.f(&p[i], &p[j]);
        assert_eq!(sum_two_connected(&p[..2], &v).unwrap().value, f(0, 1));
        let d3 = sum_two_connected(&p, &v).unwrap().value;
        assert!((d3 - f(0, 1) * f(0, 2) * f(1, 2)).abs() < 1e-15);
        assert!(sum_two_connected(&p[..1], &v).is_err());
    }

    #[test]
    fn binomial_expansion_over_all_graphs() {
        let v = PairPotential::shoulder(1, 1.0, 1.1).unwrap();
        let xs = line_points(&[0.0, 0.3, 0.9, 1.4, 2.2, 2.5]);
        let wm = WeightMatrix::from_points(&xs, &v);
        let direct: f64 = enumerate_graphs(6)
            .unwrap()
            .map(|g| graph_weight(&g, &xs, &v).unwrap())
            .sum();
        let product = wm.pair_product(0b111111);
        assert!((direct - product).abs() < 1e-12);
        assert!((all_graphs_sum(&wm, 0b111111).value - product).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_weights_are_bounded() {
        let v = PairPotential::shoulder(1, 1.0, 2.0).unwrap();
        let xs = line_points(&[0.0, 0.3, 0.9, 1.4, 1.6]);
        for g in enumerate_graphs(5).unwrap() {
            assert!(graph_weight(&g, &xs, &v).unwrap().abs() <= 1.0);
        }
    }
}
