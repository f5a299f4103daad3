//! Dense complex operators on `(C^d)^{⊗n}` and the spectral helpers the
//! oracle needs.
//!
//! Tensor factors are ordered most significant first: factor `k` of a basis
//! index is its `k`-th base-`d` digit from the left.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the matrix dimension `d^n`.
pub const DEFAULT_MAX_DIM: usize = 1 << 10;

/// Eigenvalues below this fraction of the largest count as kernel.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Eigenvalues in `(-NEGATIVE_CLAMP, 0)` are round-off and clamp to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-10;

const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// `d^n`, or an error when it exceeds `cap` (or overflows).
pub fn checked_dim(d: u32, n: u32, cap: usize) -> Result<usize> {
    let required = (d as usize).checked_pow(n).unwrap_or(usize::MAX);
    if required > cap {
        return Err(Error::DimensionCap { required, allowed: cap });
    }
    Ok(required)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    matrix: DMatrix<Complex64>,
    hermitian: bool,
}

impl DenseOperator {
    /// Wraps a square matrix; a matrix claimed Hermitian is checked.
    pub fn new(matrix: DMatrix<Complex64>, hermitian: bool) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let op = Self { matrix, hermitian };
        if hermitian {
            let dev = op.hermitian_defect();
            if dev > HERMITIAN_TOLERANCE {
                return Err(Error::InvalidArgument(format!(
                    "operator flagged Hermitian deviates by {dev:e}"
                )));
            }
        }
        Ok(op)
    }

    pub(crate) fn from_parts(matrix: DMatrix<Complex64>, hermitian: bool) -> Self {
        Self { matrix, hermitian }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_parts(DMatrix::identity(dim, dim), true)
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_parts(DMatrix::zeros(dim, dim), true)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// `max |M - M†|`.
    pub fn hermitian_defect(&self) -> f64 {
        max_abs(&(&self.matrix - self.matrix.adjoint()))
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_parts(self.matrix.adjoint(), self.hermitian)
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_parts(&self.matrix * &other.matrix, false)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_parts(&self.matrix + &other.matrix, self.hermitian && other.hermitian)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_parts(&self.matrix - &other.matrix, self.hermitian && other.hermitian)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_parts(&self.matrix * Complex64::new(s, 0.0), self.hermitian)
    }

    /// `U M U†`, Hermitian whenever `M` is.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        Self::from_parts(&u.matrix * &self.matrix * u.matrix.adjoint(), self.hermitian)
    }

    /// `M ⊗ 1_extra`.
    pub fn kron_identity(&self, extra: usize) -> Self {
        Self::from_parts(self.matrix.kronecker(&DMatrix::identity(extra, extra)), self.hermitian)
    }

    /// `tr(A B)` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.matrix[(i, k)] * other.matrix[(k, i)];
            }
        }
        acc
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        max_abs(&(&self.matrix - &other.matrix))
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.matrix)
    }

    /// Ascending real spectrum of a Hermitian operator.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.require_hermitian()?;
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        Ok(ev)
    }

    fn require_hermitian(&self) -> Result<()> {
        if !self.hermitian {
            return Err(Error::InvalidArgument("operator is not flagged Hermitian".into()));
        }
        Ok(())
    }

    /// `f` applied to the spectrum of a PSD operator. Eigenvalues below
    /// `SUPPORT_THRESHOLD · λ_max` are mapped to zero.
    fn psd_function(&self, tol: f64, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.require_hermitian()?;
        let eig = SymmetricEigen::new(self.matrix.clone());
        let lambda_max = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        let cutoff = SUPPORT_THRESHOLD * lambda_max;
        let mut mapped = Vec::with_capacity(eig.eigenvalues.len());
        for &lambda in eig.eigenvalues.iter() {
            if lambda < -tol {
                return Err(Error::NotPsd {
                    eigenvalue: lambda,
                    tolerance: tol,
                });
            }
            mapped.push(if lambda > cutoff { f(lambda) } else { 0.0 });
        }
        let u = &eig.eigenvectors;
        let mut scaled = u.clone();
        for (j, &w) in mapped.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        let mut m = scaled * u.adjoint();
        symmetrize(&mut m);
        Ok(Self::from_parts(m, true))
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.modulus()).fold(0.0, f64::max)
}

fn symmetrize(m: &mut DMatrix<Complex64>) {
    let h = (&*m + m.adjoint()) * Complex64::new(0.5, 0.0);
    *m = h;
}

/// Spectral square root, clamping round-off negatives in `(-tol, 0)`.
pub fn sqrt_psd(m: &DenseOperator, tol: f64) -> Result<DenseOperator> {
    m.psd_function(tol, f64::sqrt)
}

/// Square root of the pseudo-inverse on the support.
pub fn pinv_sqrt_psd(m: &DenseOperator, tol: f64) -> Result<DenseOperator> {
    m.psd_function(tol, |x| 1.0 / x.sqrt())
}

/// Base-`d` digits of `index`, most significant first.
pub fn digits(mut index: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = index % d;
        index /= d;
    }
    out
}

pub fn from_digits(digits: &[usize], d: usize) -> usize {
    digits.iter().fold(0, |acc, &x| acc * d + x)
}

/// Basis map of `V(π)`: entry `idx` is the image of basis state `idx`.
/// `perm[k]` is the position factor `k` is sent to.
pub fn permutation_index_map(perm: &[usize], d: u32, cap: usize) -> Result<Vec<usize>> {
    validate_permutation(perm)?;
    let n = perm.len();
    let dim = checked_dim(d, n as u32, cap)?;
    let d = d as usize;
    let mut moved = vec![0; n];
    Ok((0..dim)
        .map(|idx| {
            let old = digits(idx, d, n);
            for (k, &target) in perm.iter().enumerate() {
                moved[target] = old[k];
            }
            from_digits(&moved, d)
        })
        .collect())
}

fn validate_permutation(perm: &[usize]) -> Result<()> {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// `V(π)`, the unitary moving tensor factor `k` to position `perm[k]`.
pub fn permutation_operator(perm: &[usize], d: u32, cap: usize) -> Result<DenseOperator> {
    let map = permutation_index_map(perm, d, cap)?;
    let dim = map.len();
    let mut m = DMatrix::zeros(dim, dim);
    for (idx, &img) in map.iter().enumerate() {
        m[(img, idx)] = Complex64::new(1.0, 0.0);
    }
    // permutation matrices are Hermitian only for involutions
    let involution = perm.iter().enumerate().all(|(k, &p)| perm[p] == k);
    Ok(DenseOperator::from_parts(m, involution))
}

/// `V(π) M V(π)†` given the basis map of `V(π)`.
pub fn conjugate_by_permutation(m: &DenseOperator, map: &[usize]) -> DenseOperator {
    let dim = m.dim();
    let src = m.matrix();
    let mut out = DMatrix::zeros(dim, dim);
    for c in 0..dim {
        for r in 0..dim {
            out[(map[r], map[c])] = src[(r, c)];
        }
    }
    DenseOperator::from_parts(out, m.is_hermitian())
}

/// Partial transpose on the last tensor factor.
pub fn partial_transpose_last(m: &DenseOperator, d: u32) -> DenseOperator {
    let d = d as usize;
    let dim = m.dim();
    let src = m.matrix();
    let mut out = DMatrix::zeros(dim, dim);
    for r in 0..dim {
        for c in 0..dim {
            let (rb, rs) = (r / d, r % d);
            let (cb, cs) = (c / d, c % d);
            out[(r, c)] = src[(rb * d + cs, cb * d + rs)];
        }
    }
    let hermitian = m.is_hermitian() && max_abs(&(&out - out.adjoint())) <= HERMITIAN_TOLERANCE;
    DenseOperator::from_parts(out, hermitian)
}

/// Sorted multiset distance; `inf` when the sizes differ.
pub fn multiset_deviation(observed: &[f64], predicted: &[f64]) -> f64 {
    if observed.len() != predicted.len() {
        return f64::INFINITY;
    }
    let mut a = observed.to_vec();
    let mut b = predicted.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real(rows: usize, data: &[f64]) -> DenseOperator {
        let m = DMatrix::from_row_slice(rows, rows, data).map(|x| Complex64::new(x, 0.0));
        DenseOperator::new(m, true).unwrap()
    }

    #[test]
    fn swap_matrix() {
        let swap = permutation_operator(&[1, 0], 2, DEFAULT_MAX_DIM).unwrap();
        let expected = real(4, &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.]);
        assert_eq!(swap.max_abs_diff(&expected), 0.0);
        let id = permutation_operator(&[0, 1, 2], 3, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(id.max_abs_diff(&DenseOperator::identity(27)), 0.0);
    }

    #[test]
    fn factor_moves_to_target_position() {
        // |0 1 1> under k -> perm[k] with perm = [2, 0, 1] becomes |1 1 0>
        let map = permutation_index_map(&[2, 0, 1], 2, DEFAULT_MAX_DIM).unwrap();
        assert_eq!(map[0b011], 0b110);
    }

    #[test]
    fn dimension_cap() {
        let err = permutation_operator(&[0, 1, 2, 3, 4], 4, 512).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionCap {
                required: 1024,
                allowed: 512
            }
        ));
        assert!(permutation_operator(&[0, 0], 2, 16).is_err());
    }

    #[test]
    fn square_roots() {
        let id = DenseOperator::identity(3);
        assert!(sqrt_psd(&id, NEGATIVE_CLAMP).unwrap().max_abs_diff(&id) < 1e-14);
        let m = real(2, &[4., 0., 0., 0.]);
        assert!(
            sqrt_psd(&m, NEGATIVE_CLAMP)
                .unwrap()
                .max_abs_diff(&real(2, &[2., 0., 0., 0.]))
                < 1e-14
        );
        assert!(
            pinv_sqrt_psd(&m, NEGATIVE_CLAMP)
                .unwrap()
                .max_abs_diff(&real(2, &[0.5, 0., 0., 0.]))
                < 1e-14
        );
        let slightly_negative = real(2, &[1., 0., 0., -1e-12]);
        assert!(sqrt_psd(&slightly_negative, NEGATIVE_CLAMP).is_ok());
        let negative = real(2, &[1., 0., 0., -1e-3]);
        assert!(matches!(sqrt_psd(&negative, NEGATIVE_CLAMP), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn hermitian_flag_is_checked() {
        let m = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]).map(|x| Complex64::new(x, 0.0));
        assert!(DenseOperator::new(m.clone(), true).is_err());
        let op = DenseOperator::new(m, false).unwrap();
        assert!(op.eigenvalues().is_err());
    }

    #[test]
    fn partial_transpose_of_swap_is_unnormalised_bell_projector() {
        let swap = permutation_operator(&[1, 0], 2, DEFAULT_MAX_DIM).unwrap();
        let pt = partial_transpose_last(&swap, 2);
        let bell = real(4, &[1., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0., 0., 1.]);
        assert_eq!(pt.max_abs_diff(&bell), 0.0);
    }

    fn arb_perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
        Just((0..n).collect::<Vec<_>>()).prop_shuffle()
    }

    proptest! {
        #[test]
        fn permutation_homomorphism(p in arb_perm(4), q in arb_perm(4)) {
            let vp = permutation_operator(&p, 2, DEFAULT_MAX_DIM).unwrap();
            let vq = permutation_operator(&q, 2, DEFAULT_MAX_DIM).unwrap();
            // (p ∘ q)(k) = p[q[k]]
            let pq: Vec<usize> = (0..4).map(|k| p[q[k]]).collect();
            let vpq = permutation_operator(&pq, 2, DEFAULT_MAX_DIM).unwrap();
            prop_assert_eq!(vp.mul(&vq).max_abs_diff(&vpq), 0.0);
        }

        #[test]
        fn conjugation_shortcut_matches_products(p in arb_perm(3)) {
            let v = permutation_operator(&p, 2, DEFAULT_MAX_DIM).unwrap();
            let map = permutation_index_map(&p, 2, DEFAULT_MAX_DIM).unwrap();
            let m = DenseOperator::from_parts(
                DMatrix::from_fn(8, 8, |r, c| Complex64::new((r * 8 + c) as f64, 0.0)),
                false,
            );
            let direct = v.mul(&m).mul(&v.adjoint());
            prop_assert_eq!(conjugate_by_permutation(&m, &map).max_abs_diff(&direct), 0.0);
        }
    }
}
