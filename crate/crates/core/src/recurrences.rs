//! Vertex-removal recurrences: `D_n` from `ψ` through set partitions, and
//! `ψ(I; J)` from smaller `ψ` weights through ordered splits.
//!
//! All functions here work on a [`WeightMatrix`] with vertex sets as bit
//! masks, so they accept arbitrary symmetric edge weights. The identities are
//! polynomial in the `f_ij` and hold for any such matrix; random weights
//! outside `[-1, 0]` exercise cancellations the hard-core case hides.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{check_bound, Error, Result};
use crate::graph::{full_set, vertices, VertexSet};
use crate::numeric::CompensatedSum;
use crate::partition::{enumerate_ordered_splits, partitions};
use crate::polynomial::MAX_POLY_VERTICES;
use crate::weights::{check_sets, psi_hat_sum, psi_sum, PairPotential, Point, WeightMatrix};

/// Memoized `ψ(W; B)` on one weight matrix.
struct PsiCache<'a> {
    wm: &'a WeightMatrix,
    memo: RefCell<HashMap<(VertexSet, VertexSet), f64>>,
}

impl<'a> PsiCache<'a> {
    fn new(wm: &'a WeightMatrix) -> Self {
        Self {
            wm,
            memo: RefCell::new(HashMap::new()),
        }
    }

    fn psi(&self, white: VertexSet, black: VertexSet) -> f64 {
        if white == 0 {
            return 0.0;
        }
        if let Some(&v) = self.memo.borrow().get(&(white, black)) {
            return v;
        }
        let v = psi_sum(self.wm, white, black).value;
        self.memo.borrow_mut().insert((white, black), v);
        v
    }
}

fn f_product(wm: &WeightMatrix, root: usize, set: VertexSet) -> f64 {
    vertices(set).map(|l| wm.get(root, l)).product()
}

fn one_plus_f_product(wm: &WeightMatrix, root: usize, set: VertexSet) -> f64 {
    vertices(set).map(|i| 1.0 + wm.get(root, i)).product()
}

/// Subsets of `set`, the empty set first.
fn subsets(set: VertexSet) -> impl Iterator<Item = VertexSet> {
    let mut next = Some(0);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == set {
            None
        } else {
            Some((cur.wrapping_sub(set)) & set)
        };
        Some(cur)
    })
}

/// `(-1)^(m-1) (m-1)!`.
fn partition_sign(m: usize) -> f64 {
    let fact: f64 = (1..m).map(|k| k as f64).product();
    if m % 2 == 1 {
        fact
    } else {
        -fact
    }
}

fn alternating(m: usize) -> f64 {
    if m % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// `Σ_m (-1)^(m-1)(m-1)! Σ_{{V_r} ∈ P(ground)} ∏_r ψ(white ∩ V_r, V_r ∖ white)`.
fn mobius_psi(cache: &PsiCache<'_>, white: VertexSet, ground: VertexSet) -> f64 {
    let mut acc = CompensatedSum::new();
    for p in partitions(ground) {
        let mut prod = 1.0;
        for &blk in &p.blocks {
            prod *= cache.psi(blk & white, blk & !white);
            if prod == 0.0 {
                break;
            }
        }
        if prod != 0.0 {
            acc.add(partition_sign(p.len()) * prod);
        }
    }
    acc.value()
}

/// 2-connected sum on `{root} ∪ rest` by removing `root`:
/// `Σ_{L ⊆ rest} ∏_{ℓ∈L} f(root, ℓ) · ψ_c(L, rest ∖ L)` with `ψ_c` by Möbius inversion.
pub fn two_connected_recurrence(wm: &WeightMatrix, root: usize, rest: VertexSet) -> Result<f64> {
    if rest >> root & 1 == 1 {
        return Err(Error::Domain("root must not lie in the remaining vertex set".into()));
    }
    check_sets(&[1 << root, rest])?;
    check_bound("vertex count", rest.count_ones() as usize + 1, 2, MAX_POLY_VERTICES)?;
    let cache = PsiCache::new(wm);
    let mut acc = CompensatedSum::new();
    for l in subsets(rest) {
        let weight = f_product(wm, root, l);
        if weight == 0.0 {
            continue;
        }
        acc.add(weight * mobius_psi(&cache, l, rest));
    }
    Ok(acc.value())
}

/// `ψ_c(W; B)`, the connected part of `ψ`, by Möbius inversion over partitions of `W ∪ B`.
pub fn psi_connected_mobius(wm: &WeightMatrix, white: VertexSet, black: VertexSet) -> Result<f64> {
    check_sets(&[white, black])?;
    Ok(mobius_psi(&PsiCache::new(wm), white, white | black))
}

/// `ψ(I; J)` by removing the white vertex `iota`.
pub fn psi_recurrence(wm: &WeightMatrix, white: VertexSet, black: VertexSet, iota: usize) -> Result<f64> {
    check_sets(&[white, black])?;
    if white >> iota & 1 == 0 {
        return Err(Error::Domain(format!("iota = {iota} is not a white vertex")));
    }
    if white.count_ones() < 2 {
        return Err(Error::Domain("the recurrence needs at least two white vertices".into()));
    }
    let iprime = white & !(1 << iota);
    let cache = PsiCache::new(wm);
    let mut acc = CompensatedSum::new();
    acc.add(cache.psi(iprime, black));
    for l in subsets(black).skip(1) {
        let weight = f_product(wm, iota, l);
        if weight == 0.0 {
            continue;
        }
        acc.add(weight * split_sum(&cache, iprime, l, black & !l)?);
    }
    Ok(one_plus_f_product(wm, iota, iprime) * acc.value())
}

/// `Σ_m (-1)^(m-1) Σ_splits ψ(I' ∪ L_1; J_1) ∏_{k≥2} ψ(L_k; J_k)`.
fn split_sum(cache: &PsiCache<'_>, iprime: VertexSet, l: VertexSet, jrest: VertexSet) -> Result<f64> {
    let mut acc = CompensatedSum::new();
    for split in enumerate_ordered_splits(l, jrest)? {
        let mut prod = cache.psi(iprime | split.l_blocks[0], split.j_blocks[0]);
        for k in 1..split.m() {
            if prod == 0.0 {
                break;
            }
            prod *= cache.psi(split.l_blocks[k], split.j_blocks[k]);
        }
        if prod != 0.0 {
            acc.add(alternating(split.m()) * prod);
        }
    }
    Ok(acc.value())
}

/// `ψ̂(I'; L; J∖L)` from `ψ` weights through ordered splits.
pub fn psi_hat_splits(wm: &WeightMatrix, iprime: VertexSet, l: VertexSet, jrest: VertexSet) -> Result<f64> {
    check_sets(&[iprime, l, jrest])?;
    if iprime == 0 {
        return Err(Error::Domain("I' must be nonempty".into()));
    }
    split_sum(&PsiCache::new(wm), iprime, l, jrest)
}

/// `ψ(I; J) = ∏_{i∈I'} (1 + f(ι, i)) Σ_{L ⊆ J} ∏_{ℓ∈L} f(ι, ℓ) ψ̂(I'; L; J∖L)`
/// with `ψ̂` summed directly over its graph class.
pub fn psi_via_hat(wm: &WeightMatrix, white: VertexSet, black: VertexSet, iota: usize) -> Result<f64> {
    check_sets(&[white, black])?;
    if white >> iota & 1 == 0 || white.count_ones() < 2 {
        return Err(Error::Domain("iota must be one of at least two white vertices".into()));
    }
    let iprime = white & !(1 << iota);
    let mut acc = CompensatedSum::new();
    for l in subsets(black) {
        let weight = f_product(wm, iota, l);
        if weight != 0.0 {
            acc.add(weight * psi_hat_sum(wm, iprime, l, black & !l).value);
        }
    }
    Ok(one_plus_f_product(wm, iota, iprime) * acc.value())
}

fn concat(a: &[Point], b: &[Point]) -> Vec<Point> {
    a.iter().chain(b).copied().collect()
}

/// `D_n(x_1..x_n)` through the vertex-removal recurrence at `x_1`.
pub fn two_connected_via_recurrence(xs: &[Point], v: &PairPotential) -> Result<f64> {
    check_bound("vertex count", xs.len(), 2, MAX_POLY_VERTICES)?;
    let wm = WeightMatrix::from_points(xs, v);
    two_connected_recurrence(&wm, 0, full_set(xs.len()) & !1)
}

/// `ψ(W; B)` through the recurrence that removes the white point `white[iota]`.
pub fn psi_via_recurrence(white: &[Point], black: &[Point], v: &PairPotential, iota: usize) -> Result<f64> {
    check_bound("vertex count", white.len() + black.len(), 2, MAX_POLY_VERTICES)?;
    if iota >= white.len() {
        return Err(Error::Domain(format!("iota = {iota} is not a white index")));
    }
    let wm = WeightMatrix::from_points(&concat(white, black), v);
    let w = full_set(white.len());
    psi_recurrence(&wm, w, full_set(white.len() + black.len()) & !w, iota)
}

/// `ψ̂(I'; L; J∖L)` summed over its graph class.
pub fn psi_hat(iprime: &[Point], l: &[Point], jrest: &[Point], v: &PairPotential) -> Result<f64> {
    if iprime.is_empty() {
        return Err(Error::Domain("I' must be nonempty".into()));
    }
    let n = iprime.len() + l.len() + jrest.len();
    check_bound("vertex count", n, 1, MAX_POLY_VERTICES)?;
    let pts: Vec<Point> = iprime.iter().chain(l).chain(jrest).copied().collect();
    let wm = WeightMatrix::from_points(&pts, v);
    let a = full_set(iprime.len());
    let b = full_set(iprime.len() + l.len()) & !a;
    Ok(psi_hat_sum(&wm, a, b, full_set(n) & !(a | b)).value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{line_points, psi_connected_sum, sum_psi, sum_two_connected, two_connected_sum};

    fn sample_matrix(n: usize, seed: u64) -> WeightMatrix {
        // Deterministic values in [-1, 3].
        let mut state = seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) | 1;
        WeightMatrix::from_fn(n, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            -1.0 + 4.0 * (state >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    #[test]
    fn subsets_enumerates_all() {
        let all: Vec<_> = subsets(0b1010).collect();
        assert_eq!(all, vec![0, 0b10, 0b1000, 0b1010]);
        assert_eq!(subsets(0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn two_connected_n2_is_f() {
        let v = PairPotential::shoulder(1, 1.0, 0.5).unwrap();
        let xs = line_points(&[0.0, 0.3]);
        let r = two_connected_via_recurrence(&xs, &v).unwrap();
        assert_eq!(r, v.f(&xs[0], &xs[1]));
    }

    #[test]
    fn two_connected_triangle_hard_rods() {
        let v = PairPotential::hard_rods(1.0).unwrap();
        let xs = line_points(&[0.0, 0.2, 0.4]);
        assert!((two_connected_via_recurrence(&xs, &v).unwrap() + 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_connected_matches_brute_force() {
        for n in 3..=6 {
            for seed in 0..5 {
                let wm = sample_matrix(n, seed);
                let brute = two_connected_sum(&wm, full_set(n)).value;
                let rec = two_connected_recurrence(&wm, 0, full_set(n) & !1).unwrap();
                assert!(
                    (brute - rec).abs() <= 1e-9 * brute.abs().max(1.0),
                    "n={n}: {brute} vs {rec}"
                );
            }
        }
    }

    #[test]
    fn psi_worked_example() {
        let v = PairPotential::shoulder(1, 1.0, 0.8).unwrap();
        let p = line_points(&[0.0, 0.6, 0.3]);
        let f = |i: usize, j: usize| v.f(&p[i], &p[j]);
        let expected = (1.0 + f(0, 1)) * f(0, 2) * f(1, 2);
        for iota in 0..2 {
            let r = psi_via_recurrence(&p[..2], &p[2..], &v, iota).unwrap();
            assert!((r - expected).abs() < 1e-15);
        }
        assert!((sum_psi(&p[..2], &p[2..], &v).unwrap().value - expected).abs() < 1e-15);
    }

    #[test]
    fn psi_recurrence_matches_brute_force_all_iota() {
        for total in 2..=6 {
            for whites in 2..=total {
                let wm = sample_matrix(total, (total * 10 + whites) as u64);
                let w = full_set(whites);
                let b = full_set(total) & !w;
                let brute = psi_sum(&wm, w, b).value;
                for iota in 0..whites {
                    let r = psi_recurrence(&wm, w, b, iota).unwrap();
                    assert!((r - brute).abs() <= 1e-9 * brute.abs().max(1.0));
                    let h = psi_via_hat(&wm, w, b, iota).unwrap();
                    assert!((h - brute).abs() <= 1e-9 * brute.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn psi_hat_examples() {
        let v = PairPotential::shoulder(1, 1.0, 0.8).unwrap();
        let p = line_points(&[0.0, 0.5]);
        let f = v.f(&p[0], &p[1]);
        assert!((psi_hat(&p[..1], &p[1..], &[], &v).unwrap() - f).abs() < 1e-15);
        let w = sum_psi(&p, &[], &v).unwrap().value;
        assert_eq!(psi_hat(&p, &[], &[], &v).unwrap(), w);
        assert!(psi_hat(&[], &p, &[], &v).is_err());
    }

    #[test]
    fn psi_hat_split_form_matches_class_sum() {
        for (ip, l, j) in [(1, 1, 0), (1, 2, 1), (2, 1, 1), (1, 1, 3), (2, 2, 1), (3, 1, 1)] {
            let n = ip + l + j;
            let wm = sample_matrix(n, (ip * 100 + l * 10 + j) as u64);
            let a = full_set(ip);
            let b = full_set(ip + l) & !a;
            let c = full_set(n) & !(a | b);
            let direct = psi_hat_sum(&wm, a, b, c).value;
            let split = psi_hat_splits(&wm, a, b, c).unwrap();
            assert!((direct - split).abs() <= 1e-9 * direct.abs().max(1.0), "{ip},{l},{j}");
        }
    }

    #[test]
    fn psi_connected_by_mobius() {
        for total in 2..=5 {
            for whites in 1..=total {
                let wm = sample_matrix(total, 77 + total as u64);
                let w = full_set(whites);
                let b = full_set(total) & !w;
                let direct = psi_connected_sum(&wm, w, b).value;
                let mob = psi_connected_mobius(&wm, w, b).unwrap();
                assert!((direct - mob).abs() <= 1e-10 * direct.abs().max(1.0));
            }
        }
    }

    #[test]
    fn recurrence_agrees_with_points() {
        let v = PairPotential::hard_rods(1.0).unwrap();
        let xs = line_points(&[0.0, 0.7, 1.3, 0.4, 2.1]);
        let brute = sum_two_connected(&xs, &v).unwrap().value;
        assert_eq!(two_connected_via_recurrence(&xs, &v).unwrap(), brute);
    }

    #[test]
    fn argument_errors() {
        let wm = sample_matrix(4, 1);
        assert!(psi_recurrence(&wm, 0b0011, 0b1100, 2).is_err());
        assert!(psi_recurrence(&wm, 0b0001, 0b1110, 0).is_err());
        assert!(psi_recurrence(&wm, 0b0011, 0b0110, 0).is_err());
        assert!(two_connected_recurrence(&wm, 0, 0b1111).is_err());
    }
}
