//! Edge-weight polynomials of graph classes.
//!
//! A class of graphs on `n` labelled vertices defines the multilinear
//! polynomial `P(f) = Σ_{G in class} ∏_{e in E(G)} f_e`. Every weighted sum in
//! the crate is one of these evaluated at a Mayer matrix, so the member lists
//! are built once per class shape and cached.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::graph::{
    enumerate_graphs, full_set, in_class_c_on, in_class_d_on, in_class_dhat_on, is_connected, is_two_connected,
    pair_count, LabelledGraph,
};

/// Largest vertex count for which class polynomials are built.
pub const MAX_POLY_VERTICES: usize = 7;

/// A graph class on vertices `0..n`. Colored classes put whites first,
/// then blacks (for `DHat`: `I'`, then `L`, then `J∖L`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassShape {
    All(usize),
    Connected(usize),
    TwoConnected(usize),
    D { white: usize, black: usize },
    DConnected { white: usize, black: usize },
    C { white: usize, black: usize },
    DHat { iprime: usize, l: usize, jrest: usize },
}

impl ClassShape {
    pub fn vertex_count(&self) -> usize {
        match *self {
            ClassShape::All(n) | ClassShape::Connected(n) | ClassShape::TwoConnected(n) => n,
            ClassShape::D { white, black }
            | ClassShape::DConnected { white, black }
            | ClassShape::C { white, black } => white + black,
            ClassShape::DHat { iprime, l, jrest } => iprime + l + jrest,
        }
    }

    fn contains(&self, g: &LabelledGraph) -> bool {
        match *self {
            ClassShape::All(_) => true,
            ClassShape::Connected(_) => is_connected(g),
            ClassShape::TwoConnected(n) => n >= 2 && is_two_connected(g).expect("n >= 2"),
            ClassShape::D { white, black } => white > 0 && in_class_d_on(g, full_set(white), shifted(white, black)),
            ClassShape::DConnected { white, black } => {
                white > 0 && in_class_d_on(g, full_set(white), shifted(white, black)) && is_connected(g)
            }
            ClassShape::C { white, black } => white > 0 && in_class_c_on(g, full_set(white), shifted(white, black)),
            ClassShape::DHat { iprime, l, jrest } => {
                iprime > 0 && in_class_dhat_on(g, full_set(iprime), shifted(iprime, l), shifted(iprime + l, jrest))
            }
        }
    }
}

fn shifted(start: usize, count: usize) -> u32 {
    full_set(start + count) & !full_set(start)
}

/// Member list of a graph class, with evaluation at edge weights.
#[derive(Debug)]
pub struct GraphPolynomial {
    n: usize,
    edges: usize,
    members: Vec<u32>,
    sign_table: OnceLock<Vec<f64>>,
}

impl GraphPolynomial {
    fn build(shape: ClassShape) -> Self {
        let n = shape.vertex_count();
        assert!(
            n <= MAX_POLY_VERTICES,
            "class polynomials limited to {MAX_POLY_VERTICES} vertices"
        );
        let members = if n == 0 {
            Vec::new()
        } else {
            enumerate_graphs(n)
                .expect("n within enumeration bound")
                .filter(|g| shape.contains(g))
                .map(|g| g.edge_mask() as u32)
                .collect()
        };
        Self {
            n,
            edges: pair_count(n),
            members,
            sign_table: OnceLock::new(),
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Edge masks of the member graphs in [`crate::graph::edge_pairs`] bit order.
    pub fn members(&self) -> &[u32] {
        &self.members
    }

    /// `Σ_G ∏_{e in G} f[e]`, `f` indexed in [`crate::graph::edge_pairs`] order.
    pub fn eval(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.edges);
        if self.members.is_empty() {
            return 0.0;
        }
        let mut support = 0u32;
        let mut hard = true;
        for (e, &x) in f.iter().enumerate() {
            if x == -1.0 {
                support |= 1 << e;
            } else if x != 0.0 {
                hard = false;
                break;
            }
        }
        if hard {
            return self.sign_table()[support as usize];
        }
        self.eval_general(f)
    }

    /// Evaluation without the `{0, -1}` lookup shortcut.
    pub fn eval_general(&self, f: &[f64]) -> f64 {
        // Products of every edge subset, one 8-bit chunk of the edge mask at a time.
        let mut tables: [[f64; 256]; 3] = [[0.0; 256]; 3];
        let chunks = self.edges.div_ceil(8).max(1);
        for (c, table) in tables.iter_mut().enumerate().take(chunks) {
            let base = 8 * c;
            let width = self.edges.saturating_sub(base).min(8);
            table[0] = 1.0;
            for m in 1usize..1 << width {
                table[m] = table[m & (m - 1)] * f[base + m.trailing_zeros() as usize];
            }
        }
        let mut acc = 0.0;
        match chunks {
            1 => {
                for &g in &self.members {
                    acc += tables[0][g as usize];
                }
            }
            2 => {
                for &g in &self.members {
                    acc += tables[0][(g & 0xff) as usize] * tables[1][(g >> 8) as usize];
                }
            }
            _ => {
                for &g in &self.members {
                    acc += tables[0][(g & 0xff) as usize]
                        * tables[1][(g >> 8 & 0xff) as usize]
                        * tables[2][(g >> 16) as usize];
                }
            }
        }
        acc
    }

    /// `t[S] = Σ_{G ⊆ S} (-1)^{|G|}`: the polynomial at `f_e = -1` on `S`, `0` elsewhere.
    fn sign_table(&self) -> &[f64] {
        self.sign_table.get_or_init(|| {
            let size = 1usize << self.edges;
            let mut t = vec![0.0; size];
            for &g in &self.members {
                t[g as usize] += if g.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            }
            for bit in 0..self.edges {
                let b = 1usize << bit;
                for m in 0..size {
                    if m & b != 0 {
                        t[m] += t[m ^ b];
                    }
                }
            }
            t
        })
    }
}

/// Cached polynomial for a class shape.
pub fn class_polynomial(shape: ClassShape) -> Arc<GraphPolynomial> {
    static CACHE: OnceLock<Mutex<HashMap<ClassShape, Arc<GraphPolynomial>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(p) = cache.lock().expect("cache poisoned").get(&shape) {
        return Arc::clone(p);
    }
    // Built outside the lock; a racing duplicate build is harmless.
    let built = Arc::new(GraphPolynomial::build(shape));
    let mut guard = cache.lock().expect("cache poisoned");
    Arc::clone(guard.entry(shape).or_insert(built))
}

/// Edge index of the pair `(i, j)`, `i != j`, for `n` vertices.
#[inline]
pub fn edge_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_pairs;

    #[test]
    fn edge_index_matches_pairs() {
        for n in 1..8 {
            for (k, (i, j)) in edge_pairs(n).into_iter().enumerate() {
                assert_eq!(edge_index(n, i, j), k);
                assert_eq!(edge_index(n, j, i), k);
            }
        }
    }

    #[test]
    fn class_sizes() {
        assert_eq!(class_polynomial(ClassShape::Connected(4)).members().len(), 38);
        assert_eq!(class_polynomial(ClassShape::TwoConnected(5)).members().len(), 238);
        assert_eq!(
            class_polynomial(ClassShape::D { white: 2, black: 1 }).members().len(),
            2
        );
        assert_eq!(
            class_polynomial(ClassShape::C { white: 2, black: 1 }).members().len(),
            6
        );
        assert_eq!(
            class_polynomial(ClassShape::D { white: 1, black: 0 }).members().len(),
            1
        );
        assert_eq!(
            class_polynomial(ClassShape::D { white: 1, black: 2 }).members().len(),
            0
        );
    }

    #[test]
    fn sign_shortcut_agrees_with_general() {
        let p = class_polynomial(ClassShape::TwoConnected(5));
        for support in [0u32, 0b1011010111, 0b1111111111, 0b0100110010] {
            let f: Vec<f64> = (0..10)
                .map(|e| if support >> e & 1 == 1 { -1.0 } else { 0.0 })
                .collect();
            assert_eq!(p.eval(&f), p.eval_general(&f));
        }
    }

    #[test]
    fn all_graphs_factorize() {
        let p = class_polynomial(ClassShape::All(5));
        let f: Vec<f64> = (0..10).map(|e| 0.1 * e as f64 - 0.45).collect();
        let prod: f64 = f.iter().map(|x| 1.0 + x).product();
        assert!((p.eval(&f) - prod).abs() < 1e-12);
    }
}
