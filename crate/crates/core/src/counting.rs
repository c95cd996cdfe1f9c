//! Closed-form counts of labelled graphs, for sizes beyond exhaustive sweeps.
//!
//! Connected counts use the inclusion–exclusion recurrence on the component
//! of vertex 1. Two-connected counts come from the block decomposition of
//! rooted connected graphs, `C'(x) = exp(B'(x C'(x)))`, solved with exact
//! rational power series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{check_bound, Error, Result};
use crate::graph::{articulation_points, enumerate_graphs, is_connected, GraphClassCount};
use crate::series::Series;

/// Largest vertex count the formulas accept (counts stay below `2^128`).
pub const MAX_COUNT_VERTICES: usize = 16;

fn binomial(n: usize, k: usize) -> BigInt {
    let mut b = BigInt::one();
    for i in 0..k {
        b = b * (n - i) / (i + 1);
    }
    b
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |a, k| a * k)
}

/// `2^(n(n-1)/2)`.
pub fn graph_count(n: usize) -> BigInt {
    BigInt::one() << (n * n.saturating_sub(1) / 2)
}

/// Connected labelled graphs on `1..=n`, as a table indexed by `n`.
pub fn connected_counts(n: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::zero(); n + 1];
    for m in 1..=n {
        let mut v = graph_count(m);
        for k in 1..m {
            v -= binomial(m - 1, k - 1) * &c[k] * graph_count(m - k);
        }
        c[m] = v;
    }
    c
}

/// Two-connected labelled graphs on `0..=n` vertices (the single edge counts, a
/// single vertex does not).
pub fn two_connected_counts(n: usize) -> Result<Vec<BigInt>> {
    let c = connected_counts(n + 1);
    if n < 2 {
        return Ok(vec![BigInt::zero(); n + 1]);
    }
    let order = n - 1;
    let q = |num: BigInt, den: BigInt| BigRational::new(num, den);
    // C'(x) = Σ c_{k+1} x^k / k!.
    let dc = Series::new((0..=order).map(|k| q(c[k + 1].clone(), factorial(k))).collect());
    let rooted = dc.shift(1).truncate(order);
    let log_dc = dc.log()?;
    let inverse = rooted.reversion()?;
    let db = log_dc.compose(&inverse)?;
    let mut out = vec![BigInt::zero(); n + 1];
    for m in 2..=n {
        let v = db.coeff(m - 1) * q(factorial(m - 1), BigInt::one());
        if !v.is_integer() {
            return Err(Error::Data(format!("non-integral block count at n = {m}")));
        }
        out[m] = v.to_integer();
    }
    Ok(out)
}

/// Class counts from the formulas.
pub fn count_classes_by_formula(n: usize) -> Result<GraphClassCount> {
    check_bound("vertex count", n, 1, MAX_COUNT_VERTICES)?;
    let to = |b: &BigInt| b.to_u128().ok_or_else(|| Error::Data("count exceeds u128".into()));
    Ok(GraphClassCount {
        n,
        total: to(&graph_count(n))?,
        connected: to(&connected_counts(n)[n])?,
        two_connected: to(&two_connected_counts(n)?[n])?,
    })
}

/// Two-connected graphs on `n` vertices by sweeping every graph and testing
/// for articulation points (a lowpoint search, independent of the
/// vertex-deletion test behind [`crate::graph::count_classes`]).
pub fn two_connected_by_articulation(n: usize) -> Result<u128> {
    let mut count = 0;
    if n < 2 {
        return Ok(0);
    }
    for g in enumerate_graphs(n)? {
        if is_connected(&g) && articulation_points(&g) == 0 {
            count += 1;
        }
    }
    Ok(count)
}
