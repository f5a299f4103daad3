//! Symmetric-group characters by the Murnaghan-Nakayama rule and the Young
//! projectors built from them.

use std::collections::HashMap;

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::{checked_dim, permutation_index_map, DenseOperator};
use crate::error::{Error, Result};
use crate::numerics::biguint_to_f64;
use crate::schur_weyl::{dim_irrep, Partition};

/// Largest `n` for which projectors are assembled from all `n!` permutations.
pub const MAX_PROJECTOR_SYSTEMS: u32 = 8;

/// Cycle lengths of a permutation, descending.
pub fn cycle_type(perm: &[usize]) -> Vec<u32> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        lengths.push(len);
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths
}

/// Memoised character table lookups `χ^λ(ρ)`.
#[derive(Default)]
pub struct CharacterTable {
    memo: HashMap<(Vec<u32>, Vec<u32>), i64>,
}

impl CharacterTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `χ^shape` on the class with the given cycle lengths (any order).
    pub fn character(&mut self, shape: &Partition, cycles: &[u32]) -> Result<i64> {
        if cycles.iter().sum::<u32>() != shape.n() {
            return Err(Error::InvalidArgument(format!(
                "cycle type {cycles:?} does not partition {}",
                shape.n()
            )));
        }
        let mut sorted = cycles.to_vec();
        sorted.sort_unstable_by(|a, b| b.cmp(a));
        Ok(self.mn(shape.parts().to_vec(), &sorted))
    }

    /// Border strips are removed through beta-sets: a strip of length `k`
    /// corresponds to lowering one bead by `k` onto a free position, with
    /// sign `(-1)^(beads jumped)`.
    fn mn(&mut self, shape: Vec<u32>, cycles: &[u32]) -> i64 {
        let Some((&k, rest)) = cycles.split_first() else {
            return if shape.is_empty() { 1 } else { 0 };
        };
        let key = (shape.clone(), cycles.to_vec());
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        let len = shape.len();
        let beta: Vec<i64> = shape
            .iter()
            .enumerate()
            .map(|(i, &p)| p as i64 + (len - 1 - i) as i64)
            .collect();
        let mut total = 0;
        for &b in &beta {
            let nb = b - k as i64;
            if nb < 0 || beta.contains(&nb) {
                continue;
            }
            let jumped = beta.iter().filter(|&&x| nb < x && x < b).count();
            let sign = if jumped % 2 == 0 { 1 } else { -1 };
            let mut next: Vec<i64> = beta.iter().copied().filter(|&x| x != b).chain([nb]).collect();
            next.sort_unstable_by(|a, b| b.cmp(a));
            let m = next.len();
            let parts: Vec<u32> = next
                .iter()
                .enumerate()
                .map(|(i, &x)| (x - (m - 1 - i) as i64) as u32)
                .filter(|&p| p > 0)
                .collect();
            total += sign * self.mn(parts, rest);
        }
        self.memo.insert(key, total);
        total
    }
}

/// Isotypic projector `P_μ = (d_μ / n!) Σ_σ χ^μ(σ) V(σ)` on `(C^d)^{⊗n}`.
pub fn young_projector(mu: &Partition, d: u32, cap: usize) -> Result<DenseOperator> {
    let mut table = CharacterTable::new();
    young_projector_with(&mut table, mu, d, cap)
}

pub(crate) fn young_projector_with(
    table: &mut CharacterTable,
    mu: &Partition,
    d: u32,
    cap: usize,
) -> Result<DenseOperator> {
    let n = mu.n();
    if n > MAX_PROJECTOR_SYSTEMS {
        return Err(Error::InvalidArgument(format!(
            "Young projectors are limited to n <= {MAX_PROJECTOR_SYSTEMS}, got {n}"
        )));
    }
    let dim = checked_dim(d, n, cap)?;
    let mut acc = DMatrix::<f64>::zeros(dim, dim);
    let mut factorial = 1.0;
    for perm in (0..n as usize).permutations(n as usize) {
        let chi = table.character(mu, &cycle_type(&perm))?;
        if chi == 0 {
            continue;
        }
        let map = permutation_index_map(&perm, d, cap)?;
        for (idx, &img) in map.iter().enumerate() {
            acc[(img, idx)] += chi as f64;
        }
    }
    for k in 2..=n {
        factorial *= k as f64;
    }
    let scale = biguint_to_f64(&dim_irrep(mu)) / factorial;
    let m = acc.map(|x| Complex64::new(x * scale, 0.0));
    Ok(DenseOperator::from_parts(m, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::dense::DEFAULT_MAX_DIM;
    use crate::schur_weyl::{mult_schur_weyl, partitions_bounded};

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn cycle_types() {
        assert_eq!(cycle_type(&[0, 1, 2]), vec![1, 1, 1]);
        assert_eq!(cycle_type(&[1, 2, 0, 4, 3]), vec![3, 2]);
    }

    #[test]
    fn s3_character_table() {
        let mut t = CharacterTable::new();
        let classes: [&[u32]; 3] = [&[1, 1, 1], &[2, 1], &[3]];
        let expected = [
            (p(&[3]), [1, 1, 1]),
            (p(&[2, 1]), [2, 0, -1]),
            (p(&[1, 1, 1]), [1, -1, 1]),
        ];
        for (shape, row) in expected {
            for (class, chi) in classes.iter().zip(row) {
                assert_eq!(t.character(&shape, class).unwrap(), chi, "{shape} {class:?}");
            }
        }
    }

    #[test]
    fn identity_character_is_dimension_and_rows_orthogonal() {
        let mut t = CharacterTable::new();
        for n in 1..=6u32 {
            let frames = partitions_bounded(n, n);
            for f in &frames {
                let ones = vec![1; n as usize];
                assert_eq!(t.character(f, &ones).unwrap() as f64, biguint_to_f64(&dim_irrep(f)));
            }
            // Σ_σ χ^λ(σ) χ^μ(σ) = n! δ_λμ
            let perms: Vec<Vec<usize>> = (0..n as usize).permutations(n as usize).collect();
            let fact = perms.len() as i64;
            for a in &frames {
                for b in &frames {
                    let s: i64 = perms
                        .iter()
                        .map(|q| {
                            let c = cycle_type(q);
                            t.character(a, &c).unwrap() * t.character(b, &c).unwrap()
                        })
                        .sum();
                    assert_eq!(s, if a == b { fact } else { 0 }, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn projector_traces_and_completeness() {
        for (n, d) in [(4u32, 2u32), (3, 3), (2, 4)] {
            let dim = d.pow(n) as usize;
            let mut total = DenseOperator::zeros(dim);
            for mu in partitions_bounded(n, n) {
                let pm = young_projector(&mu, d, DEFAULT_MAX_DIM).unwrap();
                let expected = biguint_to_f64(&(dim_irrep(&mu) * mult_schur_weyl(&mu, d)));
                assert!((pm.trace().re - expected).abs() < 1e-10, "{mu}");
                assert!(pm.mul(&pm).max_abs_diff(&pm) < 1e-10, "{mu}");
                total = total.add(&pm);
            }
            assert!(total.max_abs_diff(&DenseOperator::identity(dim)) < 1e-10);
        }
        assert!(young_projector(&p(&[9]), 1, DEFAULT_MAX_DIM).is_err());
    }
}
