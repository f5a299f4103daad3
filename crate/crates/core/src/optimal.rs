//! The optimal protocol: coefficients `v_μ` of Alice's operation, the qubit
//! teleportation matrix and its dominant eigenvector, the optimal recycling
//! fidelity and the overlap between optimal and non-optimal resource states.

use std::collections::BTreeMap;
use std::f64::consts::{LN_2, PI};
use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::closed_form::{binomial_row, blocks, Evaluation, FidelityReport, Method};
use crate::error::{CoefficientError, Error, Result};
use crate::numerics::{biguint_to_f64, ln_biguint, ln_factorial, KahanSum, LogSumExp};
use crate::schur_weyl::{add_box, irrep_dims, partitions_bounded, Partition};

/// Tolerance on `Σ v_μ² = 1`.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Coefficients `v_μ` over the frames `μ ⊢ N` of height at most `d`.
///
/// Always complete, nonnegative and unit-normalised; construct through
/// [`VCoefficients::new`] or one of the loaders.
#[derive(Clone, Debug, PartialEq)]
pub struct VCoefficients {
    ports: u32,
    dim: u32,
    entries: BTreeMap<Partition, f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(rename = "N")]
    n: u32,
    d: u32,
    entries: Vec<DocumentEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentEntry {
    partition: Vec<u32>,
    v: f64,
}

impl VCoefficients {
    pub fn new<I>(ports: u32, dim: u32, entries: I) -> std::result::Result<Self, CoefficientError>
    where
        I: IntoIterator<Item = (Partition, f64)>,
    {
        if dim < 1 {
            return Err(CoefficientError::Schema("d must be at least 1".into()));
        }
        let mut map = BTreeMap::new();
        for (partition, v) in entries {
            if partition.n() != ports || partition.height() > dim {
                return Err(CoefficientError::ForeignPartition { partition, ports, dim });
            }
            if !v.is_finite() {
                return Err(CoefficientError::Schema(format!("entry for {partition} is not finite")));
            }
            if v < 0.0 {
                return Err(CoefficientError::Negative { partition, value: v });
            }
            if map.contains_key(&partition) {
                return Err(CoefficientError::Duplicate(partition));
            }
            map.insert(partition, v);
        }
        if let Some(missing) = partitions_bounded(ports, dim)
            .into_iter()
            .find(|p| !map.contains_key(p))
        {
            return Err(CoefficientError::IncompleteSupport(missing));
        }
        let norm: KahanSum = map.values().map(|v| v * v).collect();
        if (norm.value() - 1.0).abs() > NORM_TOLERANCE {
            return Err(CoefficientError::NotNormalized(norm.value()));
        }
        Ok(Self {
            ports,
            dim,
            entries: map,
        })
    }

    /// Normalises a nonnegative vector given in descending frame order.
    pub fn from_unnormalized(ports: u32, dim: u32, values: &[f64]) -> std::result::Result<Self, CoefficientError> {
        let frames = partitions_bounded(ports, dim);
        if frames.len() != values.len() {
            return Err(CoefficientError::Schema(format!(
                "expected {} values for (N={ports}, d={dim}), got {}",
                frames.len(),
                values.len()
            )));
        }
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(CoefficientError::NotNormalized(norm * norm));
        }
        Self::new(ports, dim, frames.into_iter().zip(values.iter().map(|v| v / norm)))
    }

    /// The coefficients for which Alice's operation is the identity:
    /// `v_μ = sqrt(d_μ m_μ / d^N)`.
    pub fn uniform(ports: u32, dim: u32) -> Self {
        let ln_total = ports as f64 * (dim as f64).ln();
        let values: Vec<f64> = partitions_bounded(ports, dim)
            .iter()
            .map(|mu| (irrep_dims(mu, dim).ln_sqrt_md() - 0.5 * ln_total).exp())
            .collect();
        Self::from_unnormalized(ports, dim, &values).expect("uniform coefficients are valid")
    }

    pub fn ports(&self) -> u32 {
        self.ports
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// `v_μ`; zero for frames outside the support.
    pub fn get(&self, mu: &Partition) -> f64 {
        self.entries.get(mu).copied().unwrap_or(0.0)
    }

    /// Entries in descending lexicographic frame order.
    pub fn iter(&self) -> impl Iterator<Item = (&Partition, f64)> {
        self.entries.iter().rev().map(|(p, &v)| (p, v))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn check_shape(&self, ports: u32, dim: u32) -> std::result::Result<(), CoefficientError> {
        if self.ports != ports || self.dim != dim {
            return Err(CoefficientError::WrongShape {
                ports,
                dim,
                found_ports: self.ports,
                found_dim: self.dim,
            });
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, CoefficientError> {
        let doc: Document = serde_json::from_str(text).map_err(|e| CoefficientError::Schema(e.to_string()))?;
        let mut entries = Vec::with_capacity(doc.entries.len());
        for e in doc.entries {
            let partition = Partition::new(e.partition).map_err(|err| CoefficientError::Schema(err.to_string()))?;
            entries.push((partition, e.v));
        }
        Self::new(doc.n, doc.d, entries)
    }

    pub fn to_json(&self) -> String {
        let doc = Document {
            n: self.ports,
            d: self.dim,
            entries: self
                .iter()
                .map(|(p, v)| DocumentEntry {
                    partition: p.parts().to_vec(),
                    v,
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("serializable");
        text.push('\n');
        text
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::from_json(&text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

/// Parse and validate a coefficient document.
pub fn load_v_coefficients(document: &str) -> Result<VCoefficients> {
    Ok(VCoefficients::from_json(document)?)
}

/// Symmetric tridiagonal matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct TriDiagonalMatrix {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl TriDiagonalMatrix {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() || off_diagonal.len() + 1 != diagonal.len() {
            return Err(Error::InvalidArgument(format!(
                "tridiagonal shape mismatch: {} diagonal, {} off-diagonal",
                diagonal.len(),
                off_diagonal.len()
            )));
        }
        Ok(Self { diagonal, off_diagonal })
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut y = self.diagonal[i] * x[i];
                if i > 0 {
                    y += self.off_diagonal[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off_diagonal[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// `‖M x - λ x‖₂`.
    pub fn residual(&self, lambda: f64, x: &[f64]) -> f64 {
        self.mul_vec(x)
            .iter()
            .zip(x)
            .map(|(y, xi)| (y - lambda * xi).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => self.diagonal[i],
            1 => self.off_diagonal[i.min(j)],
            _ => 0.0,
        })
    }
}

/// The qubit teleportation matrix of size `⌊N/2⌋ + 1`. Row `l` belongs to the
/// frame `(N-l, l)`.
///
/// The single-cell matrix at `N = 1` would need both corner rules at once and
/// is rejected.
pub fn teleportation_matrix_qubit(n: u32) -> Result<TriDiagonalMatrix> {
    if n < 2 {
        return Err(Error::InvalidArgument("teleportation matrix needs N >= 2".into()));
    }
    let t = (n / 2 + 1) as usize;
    let (x1, x2) = if n.is_multiple_of(2) { (1.0, 1.0) } else { (1.0, 0.0) };
    let mut diagonal = vec![0.5; t];
    diagonal[0] = (2.0 - x1) / 4.0;
    diagonal[t - 1] = (2.0 - x2) / 4.0;
    TriDiagonalMatrix::new(diagonal, vec![0.25; t - 1])
}

fn two_row_frames(n: u32) -> Vec<Partition> {
    (0..=n / 2)
        .map(|l| Partition::two_row(n, l).expect("l <= N/2"))
        .collect()
}

fn signed_positive(mut v: Vec<f64>) -> Result<Vec<f64>> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for x in v.iter_mut() {
        *x *= sign / norm;
    }
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, &x)| x <= 0.0 || !x.is_finite()) {
        return Err(Error::EigenvectorPositivity { index, value });
    }
    Ok(v)
}

/// Closed-form dominant eigenvector of the qubit teleportation matrix,
/// indexed by `l` for the frames `(N-l, l)`. At `N = 1` the only frame is
/// `(1)` and the coefficient set is trivially `{(1): 1}`.
pub fn v_qubit_analytic(n: u32) -> Result<VCoefficients> {
    if n == 0 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if n == 1 {
        return Ok(VCoefficients::new(1, 2, [(Partition::two_row(1, 0)?, 1.0)])?);
    }
    let nf = n as f64;
    let w = nf * PI / (nf + 2.0);
    let den = w.sin();
    let raw: Vec<f64> = (0..=n / 2)
        .map(|l| {
            let lf = l as f64;
            if n.is_multiple_of(2) {
                let sign = if (n / 2 - l).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * ((((nf + 2.0) / 2.0 - lf) * w).sin() - ((nf / 2.0 - lf) * w).sin()) / den
            } else {
                let sign = if ((n - 1) / 2 - l).is_multiple_of(2) { 1.0 } else { -1.0 };
                sign * (((nf + 1.0) / 2.0 - lf) * w).sin() / den
            }
        })
        .collect();
    let v = signed_positive(raw)?;
    Ok(VCoefficients::new(n, 2, two_row_frames(n).into_iter().zip(v))?)
}

/// Iteration cap handed to the dense symmetric eigensolver.
pub const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Required `‖M v - λ v‖₂` for a numeric eigenpair.
pub const EIGEN_RESIDUAL: f64 = 1e-12;

/// Largest eigenvalue and its eigenvector, sign-fixed to a positive sum.
pub fn dominant_eigenpair(m: &TriDiagonalMatrix) -> Result<(f64, Vec<f64>)> {
    let eig =
        SymmetricEigen::try_new(m.to_dense(), f64::EPSILON, EIGEN_MAX_ITERATIONS).ok_or(Error::NonConvergence {
            iterations: EIGEN_MAX_ITERATIONS,
        })?;
    let (idx, &lambda) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty spectrum");
    let col: DVector<f64> = eig.eigenvectors.column(idx).into_owned();
    let sign = if col.sum() < 0.0 { -1.0 } else { 1.0 };
    let v: Vec<f64> = col.iter().map(|x| x * sign / col.norm()).collect();
    if m.residual(lambda, &v) > EIGEN_RESIDUAL {
        return Err(Error::NonConvergence {
            iterations: EIGEN_MAX_ITERATIONS,
        });
    }
    Ok((lambda, v))
}

/// Dominant eigenvector of [`teleportation_matrix_qubit`], solved numerically.
pub fn v_qubit_numeric(n: u32) -> Result<VCoefficients> {
    let (_, v) = dominant_eigenpair(&teleportation_matrix_qubit(n)?)?;
    let v = signed_positive(v)?;
    Ok(VCoefficients::new(n, 2, two_row_frames(n).into_iter().zip(v))?)
}

/// Weight `γ(j)` of the spin-`j` sector in the angular-momentum form of the
/// optimal qubit operation; `two_j = 2j`.
pub fn gamma_angular(n: u32, two_j: u32) -> Result<f64> {
    if n < 1 || two_j > n || !(n - two_j).is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "2j = {two_j} is not a spin sector of N = {n}"
        )));
    }
    let nf = n as f64;
    let m = (two_j + 1) as f64;
    let ln_dj = ln_spin_dim(n, two_j);
    let ln = (nf + 2.0) * LN_2 - (nf + 2.0).ln() - m.ln() - ln_dj;
    Ok(ln.exp() * (PI * m / (nf + 2.0)).sin().powi(2))
}

/// `ln d_j = ln[(2j+1) N! / ((N/2-j)! (N/2+j+1)!)]`.
fn ln_spin_dim(n: u32, two_j: u32) -> f64 {
    let l = ((n - two_j) / 2) as u64;
    ((two_j + 1) as f64).ln() + ln_factorial(n as u64) - ln_factorial(l) - ln_factorial(n as u64 - l + 1)
}

fn check_pair(n: u32, d: u32, v_n: &VCoefficients, v_nm1: &VCoefficients) -> Result<()> {
    if n < 1 || d < 2 {
        return Err(Error::InvalidArgument(format!(
            "need N >= 1 and d >= 2, got N={n} d={d}"
        )));
    }
    v_n.check_shape(n, d)?;
    v_nm1.check_shape(n - 1, d)?;
    Ok(())
}

/// Optimal-protocol recycling fidelity
/// `F = d^(-3/2) Σ_α v_α Σ_{μ ∈ α+□} v_μ S(α) / sqrt(m_α (N d_α - d_θ))`.
pub fn frec_optimal(n: u32, d: u32, v_n: &VCoefficients, v_nm1: &VCoefficients) -> Result<FidelityReport> {
    check_pair(n, d, v_n, v_nm1)?;
    let eval = Evaluation::auto(n, d);
    let sum: KahanSum = blocks(n, d, eval)?
        .iter()
        .map(|b| {
            let v_mu: f64 = b.children.iter().map(|mu| v_n.get(mu)).sum();
            let ratio = match eval {
                Evaluation::Direct => b.s / (b.mult.sqrt() * b.gap.sqrt()),
                Evaluation::LogSpace => (b.ln_s - 0.5 * (b.ln_mult + b.ln_gap)).exp(),
            };
            v_nm1.get(&b.alpha) * v_mu * ratio
        })
        .collect();
    let value = sum.value() / (d as f64).powf(1.5);
    Ok(FidelityReport::new(value, Method::OptimalGeneral, n, d, eval.is_log()))
}

/// Tolerance for the qubit closed form against the general optimal formula.
pub const QUBIT_CROSS_CHECK: f64 = 1e-9;

/// Qubit optimal recycling fidelity from the two-row sum, with coefficients
/// from [`v_qubit_analytic`]. Cross-checked against [`frec_optimal`].
pub fn frec_optimal_qubit(n: u32) -> Result<FidelityReport> {
    if n < 2 {
        return Err(Error::InvalidArgument("optimal qubit fidelity needs N >= 2".into()));
    }
    let v_n = v_qubit_analytic(n)?;
    let v_nm1 = v_qubit_analytic(n - 1)?;
    let eval = Evaluation::auto(n, 2);
    let row_np1 = binomial_row(n + 1, (n - 1) / 2);
    let row_n = binomial_row(n, (n - 1) / 2);
    let nf = n as f64;
    let ln_np1 = (nf + 1.0).ln();
    let sum: KahanSum = (0..=(n - 1) / 2)
        .map(|l| {
            let li = l as usize;
            let lf = l as f64;
            let a = (n - 2 * l + 1) as f64;
            let b = (n - 2 * l - 1) as f64;
            let m_alpha = (n - 2 * l) as f64;
            let coeff = v_nm1.get(&Partition::two_row(n - 1, l).expect("frame"))
                * (v_n.get(&Partition::two_row(n, l).expect("frame"))
                    + Partition::two_row(n, l + 1).map(|mu| v_n.get(&mu)).unwrap_or(0.0));
            let weight = match eval {
                Evaluation::Direct => {
                    let c0 = biguint_to_f64(&row_np1[li]);
                    let c1 = biguint_to_f64(&row_np1[li + 1]);
                    let s = a * (c0 / (nf + 1.0)).sqrt() + b * (c1 / (nf + 1.0)).sqrt();
                    let cn = biguint_to_f64(&row_n[li]);
                    s / m_alpha * ((nf + 1.0 - lf) * (lf + 1.0) / ((nf + 1.0) * cn)).sqrt()
                }
                Evaluation::LogSpace => {
                    let mut s = LogSumExp::default();
                    s.push(a.ln() + 0.5 * (ln_biguint(&row_np1[li]) - ln_np1));
                    if b > 0.0 {
                        s.push(b.ln() + 0.5 * (ln_biguint(&row_np1[li + 1]) - ln_np1));
                    }
                    let ln = s.ln() - m_alpha.ln()
                        + 0.5 * ((nf + 1.0 - lf).ln() + (lf + 1.0).ln() - ln_np1 - ln_biguint(&row_n[li]));
                    ln.exp()
                }
            };
            coeff * weight
        })
        .collect();
    let value = sum.value() / (2.0 * 2f64.sqrt());
    let general = frec_optimal(n, 2, &v_n, &v_nm1)?.value;
    if (value - general).abs() > QUBIT_CROSS_CHECK {
        return Err(Error::Disagreement {
            what: "qubit and general optimal fidelity",
            left: value,
            right: general,
            tolerance: QUBIT_CROSS_CHECK,
        });
    }
    Ok(FidelityReport::new(value, Method::OptimalQubit, n, 2, eval.is_log()))
}

/// Overlap between the resource states of the optimal and non-optimal
/// protocols, `d^(-N/2) Σ_μ v_μ sqrt(d_μ m_μ)`.
pub fn resource_state_fidelity(n: u32, d: u32, v: &VCoefficients) -> Result<FidelityReport> {
    if d < 2 {
        return Err(Error::InvalidArgument("d must be at least 2".into()));
    }
    v.check_shape(n, d)?;
    let eval = Evaluation::auto(n, d);
    let half_ln_total = 0.5 * n as f64 * (d as f64).ln();
    let sum: KahanSum = v
        .iter()
        .map(|(mu, v_mu)| {
            let dims = irrep_dims(mu, d);
            match eval {
                Evaluation::Direct => {
                    v_mu * biguint_to_f64(&(&dims.dim_s * &dims.mult)).sqrt() / (d as f64).powf(0.5 * n as f64)
                }
                Evaluation::LogSpace => v_mu * (dims.ln_sqrt_md() - half_ln_total).exp(),
            }
        })
        .collect();
    Ok(FidelityReport::new(sum.value(), Method::General, n, d, eval.is_log()))
}

/// The same overlap at `d = 2` in the angular-momentum parametrisation.
pub fn resource_state_fidelity_qubit_angular(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    let nf = n as f64;
    let ln_pref = 0.5 * (ln_factorial(n as u64) - (nf - 2.0) * LN_2 - (nf + 2.0).ln());
    let sum: KahanSum = (0..=n / 2)
        .map(|l| {
            let m = (n - 2 * l + 1) as f64;
            let ln_den = 0.5 * (ln_factorial(l as u64) + ln_factorial((n - l + 1) as u64));
            m * (PI * m / (nf + 2.0)).sin() * (ln_pref - ln_den).exp()
        })
        .collect();
    Ok(sum.value())
}

/// Frames of `N` reachable from a frame of `N-1` (diagnostic helper for
/// coefficient files).
pub fn parents_of(mu: &Partition, d: u32) -> Vec<Partition> {
    partitions_bounded(mu.n().saturating_sub(1), d)
        .into_iter()
        .filter(|a| add_box(a, d).contains(mu))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{frec, frec_qubit};
    use crate::schur_weyl::{dim_irrep, mult_schur_weyl};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    fn values(v: &VCoefficients) -> Vec<f64> {
        v.iter().map(|(_, x)| x).collect()
    }

    #[test]
    fn matrix_shapes() {
        let m2 = teleportation_matrix_qubit(2).unwrap();
        assert_eq!(m2.diagonal, vec![0.25, 0.25]);
        assert_eq!(m2.off_diagonal, vec![0.25]);
        let m3 = teleportation_matrix_qubit(3).unwrap();
        assert_eq!(m3.diagonal, vec![0.25, 0.5]);
        for n in 2..=40u32 {
            let m = teleportation_matrix_qubit(n).unwrap();
            assert_eq!(m.size(), (n / 2 + 1) as usize);
            let allowed = [0.25, 0.5];
            assert!(m.diagonal.iter().chain(&m.off_diagonal).all(|x| allowed.contains(x)));
        }
        assert!(teleportation_matrix_qubit(1).is_err());
    }

    #[test]
    fn small_eigenvectors() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(v_qubit_analytic(1).unwrap().get(&p(&[1])), 1.0);
        for v in [v_qubit_analytic(2).unwrap(), v_qubit_numeric(2).unwrap()] {
            assert_relative_eq!(v.get(&p(&[2])), h, epsilon = 1e-14);
            assert_relative_eq!(v.get(&p(&[1, 1])), h, epsilon = 1e-14);
        }
        let (lambda, _) = dominant_eigenpair(&teleportation_matrix_qubit(2).unwrap()).unwrap();
        assert_relative_eq!(lambda, 0.5, epsilon = 1e-14);
        assert!(v_qubit_numeric(1).is_err());
    }

    #[test]
    fn analytic_vector_solves_eigen_equation() {
        for n in 2..=40 {
            let m = teleportation_matrix_qubit(n).unwrap();
            let (lambda, _) = dominant_eigenpair(&m).unwrap();
            let v = values(&v_qubit_analytic(n).unwrap());
            assert!(m.residual(lambda, &v) <= 1e-10, "N={n}");
            assert!(v.iter().all(|&x| x > 0.0));
        }
    }

    #[test]
    fn reversed_orientation_fails_for_odd_ports() {
        // the first matrix row belongs to l = 0; the reverse does not solve
        // the eigen-equation as soon as the corner entries differ
        for n in [3u32, 5, 7, 9] {
            let m = teleportation_matrix_qubit(n).unwrap();
            let (lambda, _) = dominant_eigenpair(&m).unwrap();
            let mut v = values(&v_qubit_analytic(n).unwrap());
            v.reverse();
            assert!(m.residual(lambda, &v) > 1e-3, "N={n}");
        }
    }

    #[test]
    fn analytic_matches_numeric() {
        for n in 2..=40 {
            let a = v_qubit_analytic(n).unwrap();
            let b = v_qubit_numeric(n).unwrap();
            for ((pa, x), (pb, y)) in a.iter().zip(b.iter()) {
                assert_eq!(pa, pb);
                assert!((x - y).abs() <= 1e-8, "N={n} {pa}");
            }
        }
    }

    #[test]
    fn gamma_normalization_and_consistency() {
        for n in 1..=20u32 {
            let total: f64 = (0..=n / 2)
                .map(|l| {
                    let two_j = n - 2 * l;
                    let dj = ln_spin_dim(n, two_j).exp();
                    gamma_angular(n, two_j).unwrap() * dj * (two_j + 1) as f64
                })
                .sum();
            assert_relative_eq!(total, 2f64.powi(n as i32), max_relative = 1e-10);
            if n >= 2 {
                let v = v_qubit_analytic(n).unwrap();
                for l in 0..=n / 2 {
                    let mu = Partition::two_row(n, l).unwrap();
                    let md = biguint_to_f64(&(dim_irrep(&mu) * mult_schur_weyl(&mu, 2)));
                    let lhs = 2f64.powf(n as f64 / 2.0) * v.get(&mu) / md.sqrt();
                    let rhs = gamma_angular(n, n - 2 * l).unwrap().sqrt();
                    assert!((lhs - rhs).abs() <= 1e-8, "N={n} l={l}");
                }
            }
        }
        assert!(gamma_angular(2, 1).is_err());
        assert!(gamma_angular(2, 4).is_err());
        assert!(gamma_angular(2, 2).unwrap() > 0.0);
    }

    #[test]
    fn resource_fidelity_parametrizations_agree() {
        for n in 1..=30 {
            let sw = resource_state_fidelity(n, 2, &v_qubit_analytic(n).unwrap())
                .unwrap()
                .value;
            let ang = resource_state_fidelity_qubit_angular(n).unwrap();
            assert!((sw - ang).abs() <= 1e-9, "N={n}");
            assert!(sw > 0.0 && sw <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn frozen_resource_fidelities() {
        let table = [
            (1, 1.0),
            (2, 0.9659258262890682),
            (3, 0.9732489894677303),
            (4, 0.98492773528702),
            (5, 0.9935267823507877),
            (6, 0.9977460437707844),
            (7, 0.9978732263411464),
            (8, 0.9945825287092738),
            (10, 0.9804645212382022),
            (20, 0.8588511658580233),
        ];
        for (n, expected) in table {
            let f = resource_state_fidelity(n, 2, &v_qubit_analytic(n).unwrap())
                .unwrap()
                .value;
            assert!((f - expected).abs() < 1e-12, "N={n}: {f}");
        }
    }

    #[test]
    fn angular_tail_decreases() {
        let values: Vec<f64> = (40..=60)
            .map(|n| resource_state_fidelity_qubit_angular(n).unwrap())
            .collect();
        assert!(values.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn uniform_coefficients_reproduce_non_optimal_protocol() {
        for (n, d) in [(1, 2), (2, 2), (5, 2), (12, 2), (3, 3), (6, 3), (4, 4)] {
            let opt = frec_optimal(n, d, &VCoefficients::uniform(n, d), &VCoefficients::uniform(n - 1, d)).unwrap();
            assert_relative_eq!(opt.value, frec(n, d).unwrap().value, max_relative = 1e-12);
            let r = resource_state_fidelity(n, d, &VCoefficients::uniform(n, d)).unwrap();
            assert_relative_eq!(r.value, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn frozen_optimal_values() {
        // independent dense-matrix evaluation with the same coefficients
        let table = [
            (2, 0.6830127018922195),
            (3, 0.7595444509941641),
            (4, 0.8121637250394907),
            (5, 0.8473256011650397),
            (6, 0.8715195096965483),
            (40, 0.9549938045599707),
        ];
        for (n, expected) in table {
            let f = frec_optimal_qubit(n).unwrap();
            assert!((f.value - expected).abs() < 1e-12, "N={n}: {}", f.value);
        }
        assert_relative_eq!(
            frec_optimal_qubit(2).unwrap().value,
            (1.0 + 3f64.sqrt()) / 4.0,
            epsilon = 1e-15
        );
        let v3 = VCoefficients::from_unnormalized(3, 3, &[1.0, 2.0, 1.0]).unwrap();
        let v2 = VCoefficients::from_unnormalized(2, 3, &[1.0, 1.0]).unwrap();
        assert!((frec_optimal(3, 3, &v3, &v2).unwrap().value - 0.5591386167914434).abs() < 1e-12);
    }

    #[test]
    fn qubit_closed_form_matches_general_formula() {
        for n in 2..=40 {
            let q = frec_optimal_qubit(n).unwrap();
            let g = frec_optimal(n, 2, &v_qubit_analytic(n).unwrap(), &v_qubit_analytic(n - 1).unwrap()).unwrap();
            assert!((q.value - g.value).abs() <= 1e-10, "N={n}");
        }
        assert!(frec_optimal_qubit(1).is_err());
        assert!(frec_optimal_qubit(200).unwrap().log_space_used);
    }

    #[test]
    fn optimal_ordering_beyond_three_ports() {
        for n in 4..=40 {
            assert!(
                frec_optimal_qubit(n).unwrap().value < frec_qubit(n).unwrap().value,
                "N={n}"
            );
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let v3 = v_qubit_analytic(3).unwrap();
        let v2 = v_qubit_analytic(2).unwrap();
        assert!(matches!(
            frec_optimal(3, 2, &v2, &v3),
            Err(Error::Coefficients(CoefficientError::WrongShape { .. }))
        ));
        assert!(frec_optimal(3, 3, &v3, &v2).is_err());
        assert!(resource_state_fidelity(2, 2, &v3).is_err());
    }

    #[test]
    fn coefficient_validation() {
        let good = r#"{"N": 2, "d": 3, "entries": [{"partition": [2], "v": 0.6}, {"partition": [1, 1], "v": 0.8}]}"#;
        let v = load_v_coefficients(good).unwrap();
        assert_eq!((v.ports(), v.dim(), v.len()), (2, 3, 2));

        let short = r#"{"N": 2, "d": 3, "entries": [{"partition": [2], "v": 0.6}, {"partition": [1, 1], "v": 0.7}]}"#;
        let err = load_v_coefficients(short).unwrap_err().to_string();
        assert!(err.contains("not normalized"), "{err}");

        let missing = r#"{"N": 2, "d": 3, "entries": [{"partition": [2], "v": 1.0}]}"#;
        let err = load_v_coefficients(missing).unwrap_err().to_string();
        assert!(err.contains("incomplete support"), "{err}");

        let negative =
            r#"{"N": 2, "d": 3, "entries": [{"partition": [2], "v": -0.6}, {"partition": [1, 1], "v": 0.8}]}"#;
        assert!(matches!(
            VCoefficients::from_json(negative),
            Err(CoefficientError::Negative { .. })
        ));

        let duplicate = r#"{"N": 1, "d": 2, "entries": [{"partition": [1], "v": 1.0}, {"partition": [1], "v": 0.0}]}"#;
        assert!(matches!(
            VCoefficients::from_json(duplicate),
            Err(CoefficientError::Duplicate(_))
        ));

        let foreign = r#"{"N": 2, "d": 1, "entries": [{"partition": [1, 1], "v": 1.0}]}"#;
        assert!(matches!(
            VCoefficients::from_json(foreign),
            Err(CoefficientError::ForeignPartition { .. })
        ));

        for bad in [
            r#"{"N": 2}"#,
            "not json",
            r#"{"N": 1, "d": 2, "entries": [{"partition": [0], "v": 1.0}]}"#,
        ] {
            assert!(
                matches!(VCoefficients::from_json(bad), Err(CoefficientError::Schema(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn json_round_trip_and_files() {
        let v = v_qubit_analytic(7).unwrap();
        assert_eq!(VCoefficients::from_json(&v.to_json()).unwrap(), v);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.json");
        v.save(&path).unwrap();
        assert_eq!(VCoefficients::load(&path).unwrap(), v);
        assert!(matches!(
            VCoefficients::load(dir.path().join("absent.json")),
            Err(Error::Io(_))
        ));
    }

    #[test]
    fn parents_of_frames() {
        assert_eq!(parents_of(&p(&[2, 1]), 2), vec![p(&[2]), p(&[1, 1])]);
        assert_eq!(parents_of(&p(&[1]), 2), vec![Partition::empty()]);
    }

    proptest! {
        #[test]
        fn normalisation_is_enforced(raw in proptest::collection::vec(0.01f64..10.0, 3)) {
            let v = VCoefficients::from_unnormalized(4, 2, &raw).unwrap();
            let norm: f64 = v.iter().map(|(_, x)| x * x).sum();
            prop_assert!((norm - 1.0).abs() < 1e-12);
            let scaled: Vec<(Partition, f64)> = v.iter().map(|(p, x)| (p.clone(), 1.1 * x)).collect();
            prop_assert!(VCoefficients::new(4, 2, scaled).is_err());
        }

        #[test]
        fn resource_fidelity_at_most_one(raw in proptest::collection::vec(0.0f64..1.0, 4), shift in 0.01f64..1.0) {
            let values: Vec<f64> = raw.iter().map(|x| x + shift).collect();
            let v = VCoefficients::from_unnormalized(6, 2, &values).unwrap();
            let f = resource_state_fidelity(6, 2, &v).unwrap().value;
            prop_assert!(f > 0.0 && f <= 1.0 + 1e-12);
        }
    }
}
