//! Exact symmetric-group combinatorics under Schur-Weyl duality.
//!
//! Young frames are [`Partition`]s. Irrep dimensions come from the
//! hook-length formula and Schur-Weyl multiplicities from the hook-content
//! formula, both in exact big-integer arithmetic. Every list of frames
//! produced here is in descending lexicographic order.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ln_biguint, product_biguint};

/// A Young frame: weakly decreasing positive parts. The empty frame is the
/// unique partition of zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        let valid = parts.iter().all(|&p| p > 0) && parts.windows(2).all(|w| w[0] >= w[1]);
        if valid {
            Ok(Self(parts))
        } else {
            Err(Error::InvalidPartition { parts })
        }
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Two-row frame `(n - l, l)`; `l = 0` gives the one-row frame.
    pub fn two_row(n: u32, l: u32) -> Result<Self> {
        if 2 * l > n {
            return Err(Error::InvalidArgument(format!(
                "({}, {l}) is not a frame",
                n as i64 - l as i64
            )));
        }
        let parts = if l == 0 {
            if n == 0 {
                vec![]
            } else {
                vec![n]
            }
        } else {
            vec![n - l, l]
        };
        Ok(Self(parts))
    }

    pub(crate) fn from_parts_unchecked(parts: Vec<u32>) -> Self {
        debug_assert!(Self::new(parts.clone()).is_ok());
        Self(parts)
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    /// Total number of boxes.
    pub fn n(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn height(&self) -> u32 {
        self.0.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Column lengths of the frame.
    pub fn conjugate(&self) -> Vec<u32> {
        let width = self.0.first().copied().unwrap_or(0);
        (0..width)
            .map(|j| self.0.iter().filter(|&&p| p > j).count() as u32)
            .collect()
    }

    /// Hook lengths, row by row.
    pub fn hook_lengths(&self) -> Vec<u32> {
        let cols = self.conjugate();
        let mut hooks = Vec::with_capacity(self.n() as usize);
        for (i, &row) in self.0.iter().enumerate() {
            for j in 0..row {
                let arm = row - j - 1;
                let leg = cols[j as usize] - i as u32 - 1;
                hooks.push(arm + leg + 1);
            }
        }
        hooks
    }

    /// Second row length, or zero; the `l` of a two-row frame `(n - l, l)`.
    pub fn second_row(&self) -> u32 {
        self.0.get(1).copied().unwrap_or(0)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, p) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ")")
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;

    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Self::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.0
    }
}

/// All partitions of `n` with at most `max_height` rows, in descending
/// lexicographic order.
pub fn partitions_bounded(n: u32, max_height: u32) -> Vec<Partition> {
    fn rec(rem: u32, max_part: u32, rows_left: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition::from_parts_unchecked(cur.clone()));
            return;
        }
        if rows_left == 0 {
            return;
        }
        // the remaining rows must be able to hold the remainder
        let lowest = rem.div_ceil(rows_left);
        for p in (lowest..=rem.min(max_part)).rev() {
            cur.push(p);
            rec(rem - p, p, rows_left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, max_height, &mut Vec::new(), &mut out);
    out
}

/// Dimension of the symmetric-group irrep labelled by `alpha` (number of
/// standard Young tableaux), via the hook-length formula.
pub fn dim_irrep(alpha: &Partition) -> BigUint {
    let num = product_biguint(2..=alpha.n() as u64);
    let den = product_biguint(alpha.hook_lengths().into_iter().map(u64::from));
    num / den
}

/// Schur-Weyl multiplicity of `alpha` in `(C^d)^{⊗n}`: the number of
/// semistandard tableaux with entries at most `d` (hook-content formula).
pub fn mult_schur_weyl(alpha: &Partition, d: u32) -> BigUint {
    if alpha.height() > d {
        return BigUint::zero();
    }
    // d + j - i >= 1 because i < height <= d
    let contents = alpha
        .parts()
        .iter()
        .enumerate()
        .flat_map(|(i, &row)| (0..row).map(move |j| (d + j - i as u32) as u64));
    let num = product_biguint(contents);
    let den = product_biguint(alpha.hook_lengths().into_iter().map(u64::from));
    debug_assert!((&num % &den).is_zero());
    num / den
}

/// Frames obtained from `alpha` by adding one box, keeping height at most
/// `max_height`. Ordered by the row receiving the box, which is descending
/// lexicographic.
pub fn add_box(alpha: &Partition, max_height: u32) -> Vec<Partition> {
    let parts = alpha.parts();
    let mut out = Vec::new();
    for i in 0..=parts.len() {
        if i > 0 && i < parts.len() && parts[i] == parts[i - 1] {
            continue;
        }
        let mut next = parts.to_vec();
        if i == parts.len() {
            if parts.len() as u32 >= max_height {
                continue;
            }
            next.push(1);
        } else {
            next[i] += 1;
        }
        out.push(Partition::from_parts_unchecked(next));
    }
    out
}

/// Frames obtained from `alpha` by removing one corner box, in descending
/// lexicographic order.
pub fn remove_box(alpha: &Partition) -> Result<Vec<Partition>> {
    let parts = alpha.parts();
    if parts.is_empty() {
        return Err(Error::NoBoxToRemove);
    }
    let mut out = Vec::new();
    // removing from a lower row yields a lexicographically larger frame
    for i in (0..parts.len()).rev() {
        if i + 1 < parts.len() && parts[i + 1] == parts[i] {
            continue;
        }
        let mut next = parts.to_vec();
        next[i] -= 1;
        if next[i] == 0 {
            next.pop();
        }
        out.push(Partition::from_parts_unchecked(next));
    }
    Ok(out)
}

/// The θ frame of `alpha` for local dimension `d`.
///
/// When `height(alpha) == d` this is `alpha` with an appended one-box row,
/// together with its irrep dimension. When the height is smaller there is
/// no such frame and `None` is returned (read downstream as `d_θ = 0`).
pub fn theta_of(alpha: &Partition, d: u32) -> Result<Option<(Partition, BigUint)>> {
    use std::cmp::Ordering::*;
    match alpha.height().cmp(&d) {
        Greater => Err(Error::FrameExceedsDimension {
            partition: alpha.clone(),
            dim: d,
        }),
        Less => Ok(None),
        Equal => {
            let mut parts = alpha.parts().to_vec();
            parts.push(1);
            let theta = Partition::from_parts_unchecked(parts);
            let dim = dim_irrep(&theta);
            Ok(Some((theta, dim)))
        }
    }
}

/// `d_θ` for `alpha`, zero when `height(alpha) < d`.
pub fn theta_dim(alpha: &Partition, d: u32) -> Result<BigUint> {
    Ok(theta_of(alpha, d)?.map(|(_, dim)| dim).unwrap_or_default())
}

/// Exact irrep dimension and Schur-Weyl multiplicity of one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IrrepDims {
    pub dim_s: BigUint,
    pub mult: BigUint,
}

impl IrrepDims {
    pub fn compute(alpha: &Partition, d: u32) -> Self {
        Self {
            dim_s: dim_irrep(alpha),
            mult: mult_schur_weyl(alpha, d),
        }
    }

    pub fn ln_dim(&self) -> f64 {
        ln_biguint(&self.dim_s)
    }

    /// `-inf` when the frame does not occur for this `d`.
    pub fn ln_mult(&self) -> f64 {
        ln_biguint(&self.mult)
    }

    /// `ln sqrt(m d)`, the log of the weight that recurs in every trace
    /// formula.
    pub fn ln_sqrt_md(&self) -> f64 {
        0.5 * (self.ln_mult() + self.ln_dim())
    }
}

/// Capacity-bounded, thread-safe memo of [`IrrepDims`] keyed by frame and
/// local dimension. Once full, further lookups are computed but not stored.
pub struct IrrepCache {
    capacity: usize,
    map: RwLock<HashMap<(Partition, u32), Arc<IrrepDims>>>,
}

impl IrrepCache {
    pub const DEFAULT_CAPACITY: usize = 1 << 16;

    pub fn with_capacity(capacity: usize) -> Self {
        Self {
            capacity,
            map: RwLock::new(HashMap::new()),
        }
    }

    /// Process-wide cache with [`Self::DEFAULT_CAPACITY`].
    pub fn global() -> &'static IrrepCache {
        static CACHE: OnceLock<IrrepCache> = OnceLock::new();
        CACHE.get_or_init(|| IrrepCache::with_capacity(Self::DEFAULT_CAPACITY))
    }

    pub fn get(&self, alpha: &Partition, d: u32) -> Arc<IrrepDims> {
        let key = (alpha.clone(), d);
        if let Some(hit) = self.map.read().expect("cache lock").get(&key) {
            return Arc::clone(hit);
        }
        let dims = Arc::new(IrrepDims::compute(alpha, d));
        let mut map = self.map.write().expect("cache lock");
        if map.len() < self.capacity {
            map.entry(key).or_insert_with(|| Arc::clone(&dims));
        }
        dims
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

/// Cached lookup through [`IrrepCache::global`].
pub fn irrep_dims(alpha: &Partition, d: u32) -> Arc<IrrepDims> {
    IrrepCache::global().get(alpha, d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, ToPrimitive};
    use proptest::prelude::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn binom(n: u64, k: u64) -> BigUint {
        if k > n {
            return BigUint::zero();
        }
        (0..k).fold(BigUint::one(), |acc, i| acc * (n - i) / (i + 1))
    }

    /// Count standard Young tableaux by removing the largest entry from
    /// every corner in turn.
    fn count_syt(alpha: &Partition) -> u64 {
        if alpha.is_empty() {
            return 1;
        }
        remove_box(alpha).unwrap().iter().map(count_syt).sum()
    }

    /// Count semistandard tableaux with entries in 1..=d by filling row by
    /// row under the column-strictness constraint.
    fn count_ssyt(alpha: &Partition, d: u32) -> u64 {
        fn rec(shape: &[u32], d: u32, row: usize, prev: &[u32], cur: &mut Vec<u32>, rows: &mut Vec<Vec<u32>>) -> u64 {
            if row == shape.len() {
                return 1;
            }
            let len = shape[row] as usize;
            if cur.len() == len {
                let done = std::mem::take(cur);
                rows.push(done.clone());
                let r = rec(shape, d, row + 1, &done, &mut Vec::new(), rows);
                rows.pop();
                *cur = done;
                return r;
            }
            let j = cur.len();
            let lo_row = cur.last().copied().unwrap_or(1);
            let lo_col = if row > 0 { prev[j] + 1 } else { 1 };
            let mut total = 0;
            for v in lo_row.max(lo_col)..=d {
                cur.push(v);
                total += rec(shape, d, row, prev, cur, rows);
                cur.pop();
            }
            total
        }
        rec(alpha.parts(), d, 0, &[], &mut Vec::new(), &mut Vec::new())
    }

    #[test]
    fn partitions_of_four() {
        let all: Vec<Vec<u32>> = partitions_bounded(4, 4).into_iter().map(Vec::from).collect();
        assert_eq!(
            all,
            vec![vec![4], vec![3, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1]]
        );
        let qubit: Vec<Vec<u32>> = partitions_bounded(4, 2).into_iter().map(Vec::from).collect();
        assert_eq!(qubit, vec![vec![4], vec![3, 1], vec![2, 2]]);
        assert_eq!(partitions_bounded(0, 3), vec![Partition::empty()]);
    }

    #[test]
    fn partition_counts_match_known_sequence() {
        let counts: Vec<usize> = (0..=12).map(|n| partitions_bounded(n, n.max(1)).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77]);
    }

    #[test]
    fn rejects_malformed_partitions() {
        assert!(Partition::new(vec![1, 2]).is_err());
        assert!(Partition::new(vec![2, 0]).is_err());
        assert!(serde_json::from_str::<Partition>("[3,1]").is_ok());
        assert!(serde_json::from_str::<Partition>("[1,3]").is_err());
    }

    #[test]
    fn dims_against_tableau_enumeration() {
        assert_eq!(dim_irrep(&p(&[5])), BigUint::one());
        assert_eq!(dim_irrep(&p(&[3, 1])), BigUint::from(3u32));
        assert_eq!(count_syt(&p(&[3, 1])), 3);
        for n in 0..=8 {
            for alpha in partitions_bounded(n, n.max(1)) {
                assert_eq!(dim_irrep(&alpha).to_u64().unwrap(), count_syt(&alpha), "{alpha}");
            }
        }
    }

    #[test]
    fn mults_against_tableau_enumeration() {
        assert_eq!(mult_schur_weyl(&p(&[1]), 5), BigUint::from(5u32));
        assert_eq!(mult_schur_weyl(&p(&[1, 1, 1]), 2), BigUint::zero());
        for n in 1..=6 {
            for d in 1..=4 {
                for alpha in partitions_bounded(n, n) {
                    assert_eq!(
                        mult_schur_weyl(&alpha, d).to_u64().unwrap(),
                        count_ssyt(&alpha, d),
                        "{alpha} d={d}"
                    );
                }
            }
        }
    }

    #[test]
    fn two_row_closed_forms() {
        for n in 1..=60u32 {
            for l in 0..=n / 2 {
                let alpha = Partition::two_row(n, l).unwrap();
                let expected_dim = binom(n as u64, l as u64)
                    - if l > 0 {
                        binom(n as u64, l as u64 - 1)
                    } else {
                        BigUint::zero()
                    };
                assert_eq!(dim_irrep(&alpha), expected_dim);
                assert_eq!(mult_schur_weyl(&alpha, 2), BigUint::from(n - 2 * l + 1));
            }
        }
    }

    #[test]
    fn box_moves() {
        assert_eq!(
            add_box(&p(&[4, 1]), u32::MAX),
            vec![p(&[5, 1]), p(&[4, 2]), p(&[4, 1, 1])]
        );
        assert_eq!(add_box(&Partition::empty(), 1), vec![p(&[1])]);
        assert_eq!(add_box(&p(&[2, 2]), 2), vec![p(&[3, 2])]);
        assert_eq!(add_box(&p(&[2, 2]), 3), vec![p(&[3, 2]), p(&[2, 2, 1])]);
        assert_eq!(remove_box(&p(&[3, 1])).unwrap(), vec![p(&[3]), p(&[2, 1])]);
        assert_eq!(remove_box(&p(&[1])).unwrap(), vec![Partition::empty()]);
        assert_eq!(remove_box(&p(&[2, 2])).unwrap(), vec![p(&[2, 1])]);
        assert!(matches!(remove_box(&Partition::empty()), Err(Error::NoBoxToRemove)));
    }

    #[test]
    fn theta_frames() {
        let (theta, dim) = theta_of(&p(&[2, 1]), 2).unwrap().unwrap();
        assert_eq!(theta, p(&[2, 1, 1]));
        assert_eq!(dim, BigUint::from(3u32));
        assert!(theta_of(&p(&[3]), 2).unwrap().is_none());
        assert!(matches!(
            theta_of(&p(&[1, 1, 1]), 2),
            Err(Error::FrameExceedsDimension { .. })
        ));
    }

    #[test]
    fn theta_dimension_two_row_identity() {
        // alpha = (N-1-l, l) ⊢ N-1: d_θ = N (N-l) l / ((N+1-l)(l+1)) d_α
        for big_n in 3..=40u32 {
            for l in 1..=(big_n - 1) / 2 {
                let alpha = Partition::two_row(big_n - 1, l).unwrap();
                let d_theta = theta_dim(&alpha, 2).unwrap();
                let d_alpha = dim_irrep(&alpha);
                let lhs = d_theta * (big_n + 1 - l) * (l + 1);
                let rhs = d_alpha * big_n * (big_n - l) * l;
                assert_eq!(lhs, rhs, "N={big_n} l={l}");
            }
        }
    }

    #[test]
    fn schur_weyl_completeness() {
        for n in 0..=12u32 {
            for d in 1..=4u32 {
                let total: BigUint = partitions_bounded(n, d)
                    .iter()
                    .map(|a| mult_schur_weyl(a, d) * dim_irrep(a))
                    .sum();
                assert_eq!(total, BigUint::from(d).pow(n), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn branching_dimension_identity() {
        for n in 0..=10u32 {
            for alpha in partitions_bounded(n, n.max(1)) {
                let up: BigUint = add_box(&alpha, u32::MAX).iter().map(dim_irrep).sum();
                assert_eq!(up, dim_irrep(&alpha) * (n + 1), "{alpha}");
            }
        }
    }

    #[test]
    fn cache_respects_capacity() {
        let cache = IrrepCache::with_capacity(2);
        for alpha in partitions_bounded(5, 5) {
            let got = cache.get(&alpha, 3);
            assert_eq!(*got, IrrepDims::compute(&alpha, 3));
        }
        assert_eq!(cache.len(), 2);
        assert_eq!(cache.capacity(), 2);
    }

    #[test]
    fn cache_is_shareable_across_threads() {
        let cache = Arc::new(IrrepCache::with_capacity(64));
        let handles: Vec<_> = (0..4)
            .map(|t| {
                let cache = Arc::clone(&cache);
                std::thread::spawn(move || {
                    for alpha in partitions_bounded(6 + t, 3) {
                        assert_eq!(*cache.get(&alpha, 3), IrrepDims::compute(&alpha, 3));
                    }
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        (0u32..=12).prop_flat_map(|n| {
            let all = partitions_bounded(n, n.max(1));
            (0..all.len()).prop_map(move |i| all[i].clone())
        })
    }

    proptest! {
        #[test]
        fn remove_box_inverts_add_box(alpha in arb_partition()) {
            for mu in add_box(&alpha, u32::MAX) {
                prop_assert!(remove_box(&mu).unwrap().contains(&alpha));
            }
            if !alpha.is_empty() {
                for beta in remove_box(&alpha).unwrap() {
                    prop_assert!(add_box(&beta, u32::MAX).contains(&alpha));
                }
            }
        }

        #[test]
        fn box_moves_are_descending(alpha in arb_partition(), h in 1u32..5) {
            prop_assume!(alpha.height() <= h);
            let up = add_box(&alpha, h);
            prop_assert!(up.windows(2).all(|w| w[0] > w[1]));
            prop_assert!(up.iter().all(|mu| mu.height() <= h && mu.n() == alpha.n() + 1));
        }
    }
}
