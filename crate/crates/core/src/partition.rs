//! Set partitions, ordered block splits and Möbius inversion on the
//! partition lattice.

use num_traits::{FromPrimitive, Num};

use crate::error::{check_bound, Result};
use crate::graph::{vertices, VertexSet};

/// Largest ground set [`enumerate_partitions`] accepts.
pub const MAX_PARTITION_SET: usize = 12;
/// Largest `|L| + |J∖L|` for [`enumerate_ordered_splits`].
pub const MAX_SPLIT_SET: usize = 10;
/// Largest ground set for [`mobius_invert`] and [`mobius_compose`].
pub const MAX_MOBIUS_SET: usize = 10;

/// Partition of a vertex set into nonempty blocks, ordered by least element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetPartition {
    pub blocks: Vec<VertexSet>,
}

impl SetPartition {
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Restricted-growth-string enumeration of all partitions of a set.
#[derive(Debug, Clone)]
pub struct Partitions {
    elems: Vec<usize>,
    // rgs[i] = block of elems[i]; rgs[0] = 0 and rgs[i] <= 1 + max(rgs[..i]).
    rgs: Vec<usize>,
    maxes: Vec<usize>,
    done: bool,
}

impl Partitions {
    fn current(&self) -> SetPartition {
        let count = self.maxes.last().map_or(0, |&m| m + 1);
        let mut blocks = vec![0 as VertexSet; count];
        for (e, &b) in self.elems.iter().zip(&self.rgs) {
            blocks[b] |= 1 << e;
        }
        SetPartition { blocks }
    }

    fn advance(&mut self) {
        let k = self.elems.len();
        let mut i = k;
        while i > 1 {
            i -= 1;
            if self.rgs[i] <= self.maxes[i - 1] {
                self.rgs[i] += 1;
                self.maxes[i] = self.maxes[i - 1].max(self.rgs[i]);
                for j in i + 1..k {
                    self.rgs[j] = 0;
                    self.maxes[j] = self.maxes[i];
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Partitions {
    type Item = SetPartition;

    fn next(&mut self) -> Option<SetPartition> {
        if self.done {
            return None;
        }
        let out = self.current();
        if self.elems.is_empty() {
            self.done = true;
        } else {
            self.advance();
        }
        Some(out)
    }
}

/// Every partition of `set` exactly once. The empty set has one partition
/// with no blocks.
pub fn enumerate_partitions(set: VertexSet) -> Result<Partitions> {
    let elems: Vec<usize> = vertices(set).collect();
    check_bound("partition ground set size", elems.len(), 0, MAX_PARTITION_SET)?;
    let k = elems.len();
    Ok(Partitions {
        elems,
        rgs: vec![0; k],
        maxes: vec![0; k],
        done: false,
    })
}

/// Unchecked partition stream for internal callers with small sets.
pub(crate) fn partitions(set: VertexSet) -> Partitions {
    enumerate_partitions(set).expect("ground set within bound")
}

/// Ordered tuples `(L_1..L_m)`, `(J_1..J_m)` with `L_1` possibly empty,
/// `L_2..L_m` nonempty, `⋃ L_i = L` and `⋃ J_i = J∖L`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OrderedSplit {
    pub l_blocks: Vec<VertexSet>,
    pub j_blocks: Vec<VertexSet>,
}

impl OrderedSplit {
    pub fn m(&self) -> usize {
        self.l_blocks.len()
    }
}

/// Stream of [`OrderedSplit`]s: `m` ascending, then assignments of `L`
/// elements to block indices in lexicographic order, then assignments of
/// `J∖L` elements likewise.
#[derive(Debug, Clone)]
pub struct OrderedSplits {
    l_elems: Vec<usize>,
    j_elems: Vec<usize>,
    m: usize,
    max_m: usize,
    l_assign: Vec<usize>,
    j_assign: Vec<usize>,
    started: bool,
    done: bool,
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

impl OrderedSplits {
    fn l_valid(&self) -> bool {
        // Blocks 1..m (zero-based) must each receive an L element.
        let mut hit = 0u64;
        for &b in &self.l_assign {
            hit |= 1 << b;
        }
        let need = ((1u64 << self.m) - 1) & !1;
        hit & need == need
    }

    fn next_l(&mut self) -> bool {
        while odometer(&mut self.l_assign, self.m) {
            if self.l_valid() {
                return true;
            }
        }
        false
    }

    fn first_l_for_m(&mut self) -> bool {
        self.l_assign.iter_mut().for_each(|d| *d = 0);
        self.l_valid() || self.next_l()
    }

    fn step(&mut self) -> bool {
        if !self.started {
            self.started = true;
            self.m = 1;
            self.j_assign.iter_mut().for_each(|d| *d = 0);
            return self.first_l_for_m();
        }
        if odometer(&mut self.j_assign, self.m) {
            return true;
        }
        if self.next_l() {
            return true;
        }
        while self.m < self.max_m {
            self.m += 1;
            self.j_assign.iter_mut().for_each(|d| *d = 0);
            if self.first_l_for_m() {
                return true;
            }
        }
        false
    }

    fn current(&self) -> OrderedSplit {
        let mut l_blocks = vec![0; self.m];
        let mut j_blocks = vec![0; self.m];
        for (&e, &b) in self.l_elems.iter().zip(&self.l_assign) {
            l_blocks[b] |= 1 << e;
        }
        for (&e, &b) in self.j_elems.iter().zip(&self.j_assign) {
            j_blocks[b] |= 1 << e;
        }
        OrderedSplit { l_blocks, j_blocks }
    }
}

impl Iterator for OrderedSplits {
    type Item = OrderedSplit;

    fn next(&mut self) -> Option<OrderedSplit> {
        if self.done {
            return None;
        }
        if self.step() {
            Some(self.current())
        } else {
            self.done = true;
            None
        }
    }
}

/// All ordered splits of `(L, J∖L)`; `l` and `jrest` must be disjoint.
pub fn enumerate_ordered_splits(l: VertexSet, jrest: VertexSet) -> Result<OrderedSplits> {
    if l & jrest != 0 {
        return Err(crate::Error::Domain("L and J∖L must be disjoint".into()));
    }
    let l_elems: Vec<usize> = vertices(l).collect();
    let j_elems: Vec<usize> = vertices(jrest).collect();
    check_bound("split ground set size", l_elems.len() + j_elems.len(), 0, MAX_SPLIT_SET)?;
    let max_m = l_elems.len() + 1;
    Ok(OrderedSplits {
        l_assign: vec![0; l_elems.len()],
        j_assign: vec![0; j_elems.len()],
        l_elems,
        j_elems,
        m: 1,
        max_m,
        started: false,
        done: false,
    })
}

/// Values of a function on the subsets of a fixed ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetMap<T> {
    ground: VertexSet,
    values: Vec<T>,
}

impl<T: Clone> SubsetMap<T> {
    /// Tabulates `f` on every subset of `ground` (including the empty set).
    pub fn tabulate(ground: VertexSet, mut f: impl FnMut(VertexSet) -> T) -> Self {
        let elems: Vec<usize> = vertices(ground).collect();
        let values = (0..1usize << elems.len()).map(|idx| f(expand(idx, &elems))).collect();
        Self { ground, values }
    }

    pub fn ground(&self) -> VertexSet {
        self.ground
    }

    /// Value at `subset`, which must lie inside the ground set.
    pub fn get(&self, subset: VertexSet) -> &T {
        assert_eq!(subset & !self.ground, 0, "subset outside ground set");
        &self.values[compress(subset, self.ground)]
    }
}

fn expand(idx: usize, elems: &[usize]) -> VertexSet {
    elems
        .iter()
        .enumerate()
        .filter(|&(k, _)| idx >> k & 1 == 1)
        .fold(0, |acc, (_, &e)| acc | 1 << e)
}

fn compress(subset: VertexSet, ground: VertexSet) -> usize {
    vertices(ground)
        .enumerate()
        .filter(|&(_, e)| subset >> e & 1 == 1)
        .fold(0, |acc, (k, _)| acc | 1 << k)
}

/// `(-1)^(m-1) (m-1)!`.
fn mobius_coefficient<T: Num + FromPrimitive>(m: usize) -> T {
    let fact: u64 = (1..m as u64).product();
    let mag = T::from_u64(fact).expect("factorial representable");
    if m % 2 == 1 {
        mag
    } else {
        T::zero() - mag
    }
}

/// Möbius inversion on the partition lattice:
/// `a(V) = Σ_m (-1)^(m-1)(m-1)! Σ_{V_1..V_m} b(V_1)⋯b(V_m)` over partitions of `V`.
/// `b` is queried on nonempty subsets only; `a(∅)` is set to zero.
pub fn mobius_invert<T, F>(ground: VertexSet, b: F) -> Result<SubsetMap<T>>
where
    T: Num + FromPrimitive + Clone,
    F: Fn(VertexSet) -> T,
{
    check_bound(
        "Möbius ground set size",
        ground.count_ones() as usize,
        0,
        MAX_MOBIUS_SET,
    )?;
    let b_table = SubsetMap::tabulate(ground, |v| if v == 0 { T::zero() } else { b(v) });
    Ok(SubsetMap::tabulate(ground, |v| {
        if v == 0 {
            return T::zero();
        }
        let mut acc = T::zero();
        for p in partitions(v) {
            let prod = p
                .blocks
                .iter()
                .fold(T::one(), |acc, &blk| acc * b_table.get(blk).clone());
            acc = acc + mobius_coefficient::<T>(p.len()) * prod;
        }
        acc
    }))
}

/// Block-multiplicative composition `b(V) = Σ_{partitions of V} ∏ a(V_r)`,
/// the inverse of [`mobius_invert`].
pub fn mobius_compose<T, F>(ground: VertexSet, a: F) -> Result<SubsetMap<T>>
where
    T: Num + Clone,
    F: Fn(VertexSet) -> T,
{
    check_bound(
        "Möbius ground set size",
        ground.count_ones() as usize,
        0,
        MAX_MOBIUS_SET,
    )?;
    let a_table = SubsetMap::tabulate(ground, |v| if v == 0 { T::zero() } else { a(v) });
    Ok(SubsetMap::tabulate(ground, |v| {
        if v == 0 {
            return T::zero();
        }
        partitions(v).fold(T::zero(), |acc, p| {
            acc + p
                .blocks
                .iter()
                .fold(T::one(), |acc, &blk| acc * a_table.get(blk).clone())
        })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_counts() {
        assert_eq!(enumerate_partitions(0).unwrap().count(), 1);
        assert_eq!(enumerate_partitions(0).unwrap().next().unwrap().len(), 0);
        assert_eq!(enumerate_partitions(0b1).unwrap().count(), 1);
        assert_eq!(enumerate_partitions(0b111).unwrap().count(), 5);
        assert!(enumerate_partitions((1 << 13) - 1).is_err());
    }

    #[test]
    fn partitions_are_canonical() {
        let set = 0b1011_0110;
        for p in enumerate_partitions(set).unwrap() {
            assert_eq!(p.blocks.iter().fold(0, |a, b| a | b), set);
            let mins: Vec<u32> = p.blocks.iter().map(|b| b.trailing_zeros()).collect();
            assert!(mins.windows(2).all(|w| w[0] < w[1]));
            for (i, a) in p.blocks.iter().enumerate() {
                assert_ne!(*a, 0);
                for b in &p.blocks[i + 1..] {
                    assert_eq!(a & b, 0);
                }
            }
        }
    }

    #[test]
    fn ordered_split_examples() {
        let splits: Vec<_> = enumerate_ordered_splits(0b1000, 0).unwrap().collect();
        assert_eq!(
            splits,
            vec![
                OrderedSplit {
                    l_blocks: vec![0b1000],
                    j_blocks: vec![0]
                },
                OrderedSplit {
                    l_blocks: vec![0, 0b1000],
                    j_blocks: vec![0, 0]
                },
            ]
        );
        let splits: Vec<_> = enumerate_ordered_splits(0, 0).unwrap().collect();
        assert_eq!(
            splits,
            vec![OrderedSplit {
                l_blocks: vec![0],
                j_blocks: vec![0]
            }]
        );
        let splits: Vec<_> = enumerate_ordered_splits(0, 0b10000).unwrap().collect();
        assert_eq!(
            splits,
            vec![OrderedSplit {
                l_blocks: vec![0],
                j_blocks: vec![0b10000]
            }]
        );
        assert!(enumerate_ordered_splits(0b11, 0b10).is_err());
    }

    #[test]
    fn mobius_independent_sets() {
        // b(V) = ∏ c_i is the exponential of a(singleton) = c_i, a = 0 on larger sets.
        let c = [2i64, -3, 5, 7];
        let b = |v: VertexSet| vertices(v).map(|i| c[i]).product::<i64>();
        let a = mobius_invert(0b1111, b).unwrap();
        for v in 1..16u32 {
            let expected = if v.count_ones() == 1 {
                c[v.trailing_zeros() as usize]
            } else {
                0
            };
            assert_eq!(*a.get(v), expected);
        }
    }

    #[test]
    fn mobius_constant_one_gives_singleton_indicator() {
        let a = mobius_invert(0b11111, |_| 1i64).unwrap();
        for v in 1..32u32 {
            assert_eq!(*a.get(v), i64::from(v.count_ones() == 1));
        }
        // The singleton indicator is not a fixed point: a({0,1}) = 0 - 1.
        let a = mobius_invert(0b11, |v: VertexSet| i64::from(v.count_ones() == 1)).unwrap();
        assert_eq!(*a.get(0b11), -1);
    }
}
