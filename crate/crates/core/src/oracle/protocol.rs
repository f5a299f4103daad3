//! Explicit protocol objects on `A_1 … A_N A_0` and fidelities computed
//! straight from their definitions.
//!
//! Factor `k < N` is port `A_{k+1}`; the last factor is Bob's system `A_0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::characters::{young_projector_with, CharacterTable};
use super::dense::{
    checked_dim, partial_transpose_last, permutation_operator, pinv_sqrt_psd, sqrt_psd, DenseOperator, NEGATIVE_CLAMP,
};
use crate::closed_form::{FidelityReport, Method};
use crate::error::{Error, Result};
use crate::numerics::biguint_to_f64;
use crate::optimal::VCoefficients;
use crate::schur_weyl::irrep_dims;

/// Dimension cap and tolerances shared by every oracle construction.
#[derive(Clone, Copy, Debug)]
pub struct Oracle {
    pub max_dim: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            max_dim: super::dense::DEFAULT_MAX_DIM,
        }
    }
}

/// Tolerance on `tr(O†O) = d^N` when assembling Alice's operation.
pub const OPERATOR_TRACE_TOLERANCE: f64 = 1e-8;

/// All operators of the non-optimal (or rotated) square-root measurement.
#[derive(Clone, Debug)]
pub struct Protocol {
    pub ports: u32,
    pub d: u32,
    pub signals: Vec<DenseOperator>,
    pub rho: DenseOperator,
    pub pi: Vec<DenseOperator>,
    pub delta: DenseOperator,
    pub pi_tilde: Vec<DenseOperator>,
}

impl Protocol {
    fn from_signals(ports: u32, d: u32, signals: Vec<DenseOperator>) -> Result<Self> {
        let dim = signals[0].dim();
        let rho = signals.iter().skip(1).fold(signals[0].clone(), |acc, s| acc.add(s));
        let r = pinv_sqrt_psd(&rho, NEGATIVE_CLAMP)?;
        let pi: Vec<DenseOperator> = signals.iter().map(|s| s.conjugate_by(&r)).collect();
        let sum = pi.iter().fold(DenseOperator::zeros(dim), |acc, p| acc.add(p));
        let delta = DenseOperator::identity(dim).sub(&sum);
        let share = delta.scale(1.0 / ports as f64);
        let pi_tilde = pi.iter().map(|p| p.add(&share)).collect();
        Ok(Self {
            ports,
            d,
            signals,
            rho,
            pi,
            delta,
            pi_tilde,
        })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    /// Signals for teleportation through port `a`, 1-based.
    pub fn signal(&self, a: u32) -> &DenseOperator {
        &self.signals[a as usize - 1]
    }

    pub fn pi_tilde(&self, a: u32) -> &DenseOperator {
        &self.pi_tilde[a as usize - 1]
    }
}

impl Oracle {
    pub fn new(max_dim: usize) -> Self {
        Self { max_dim }
    }

    fn check_ports(&self, n: u32, d: u32) -> Result<usize> {
        if n < 1 || d < 2 {
            return Err(Error::InvalidArgument(format!(
                "need N >= 1 and d >= 2, got N={n} d={d}"
            )));
        }
        checked_dim(d, n + 1, self.max_dim)
    }

    /// `V(π)` for a permutation of the `n` factors.
    pub fn permutation_operator(&self, perm: &[usize], d: u32) -> Result<DenseOperator> {
        permutation_operator(perm, d, self.max_dim)
    }

    /// `V'[(a, n)]`: the transposition of `A_a` and `A_0`, partially
    /// transposed on `A_0`.
    pub fn transposed_swap(&self, a: u32, n: u32, d: u32) -> Result<DenseOperator> {
        self.check_ports(n, d)?;
        check_port(a, n)?;
        let total = n as usize + 1;
        let mut perm: Vec<usize> = (0..total).collect();
        perm.swap(a as usize - 1, total - 1);
        let v = permutation_operator(&perm, d, self.max_dim)?;
        Ok(partial_transpose_last(&v, d))
    }

    /// `σ_a = d^{-(N-1)} 1 ⊗ P⁺_{A_a A_0}` assembled entry by entry.
    pub fn signal_state(&self, a: u32, n: u32, d: u32) -> Result<DenseOperator> {
        let dim = self.check_ports(n, d)?;
        check_port(a, n)?;
        let du = d as usize;
        let total = n as usize + 1;
        let a_pos = total - 1 - (a as usize - 1);
        let weight_a = du.pow(a_pos as u32);
        let value = Complex64::new(1.0 / (d as f64).powi(n as i32), 0.0);
        let mut m = DMatrix::zeros(dim, dim);
        // rows with equal digits on A_a and A_0; columns differ only there
        for r in 0..dim {
            let ra = (r / weight_a) % du;
            let r0 = r % du;
            if ra != r0 {
                continue;
            }
            let base = r - ra * weight_a - r0;
            for j in 0..du {
                m[(r, base + j * weight_a + j)] = value;
            }
        }
        Ok(DenseOperator::from_parts(m, true))
    }

    pub fn rho_operator(&self, n: u32, d: u32) -> Result<DenseOperator> {
        Ok(self.protocol(n, d)?.rho)
    }

    /// Square-root measurement for the unrotated signals.
    pub fn protocol(&self, n: u32, d: u32) -> Result<Protocol> {
        self.check_ports(n, d)?;
        let signals = (1..=n)
            .map(|a| self.signal_state(a, n, d))
            .collect::<Result<Vec<_>>>()?;
        Protocol::from_signals(n, d, signals)
    }

    /// Square-root measurement for the signals `O σ_a O†`, with `O` an
    /// operator on the ports extended by the identity on `A_0`.
    pub fn rotated_protocol(&self, n: u32, d: u32, o: &DenseOperator) -> Result<Protocol> {
        self.check_ports(n, d)?;
        let full = extend_to(o, n + 1, d)?;
        let signals = (1..=n)
            .map(|a| Ok(self.signal_state(a, n, d)?.conjugate_by(&full)))
            .collect::<Result<Vec<_>>>()?;
        Protocol::from_signals(n, d, signals)
    }

    /// `(Π_a, Δ, Π̃_a)` for port `a`.
    pub fn srm_povm(&self, a: u32, n: u32, d: u32) -> Result<(DenseOperator, DenseOperator, DenseOperator)> {
        check_port(a, n)?;
        let p = self.protocol(n, d)?;
        let i = a as usize - 1;
        Ok((p.pi[i].clone(), p.delta.clone(), p.pi_tilde[i].clone()))
    }

    /// Alice's operation `O = sqrt(d^n) Σ_μ v_μ / sqrt(d_μ m_μ) P_μ` on the
    /// `n = v.ports()` systems it acts on.
    pub fn build_optimizing_operator(&self, v: &VCoefficients) -> Result<DenseOperator> {
        let (n, d) = (v.ports(), v.dim());
        let dim = checked_dim(d, n, self.max_dim)?;
        let mut table = CharacterTable::new();
        let mut acc = DenseOperator::zeros(dim);
        let root = (d as f64).powf(0.5 * n as f64);
        for (mu, v_mu) in v.iter() {
            if v_mu == 0.0 {
                continue;
            }
            let dims = irrep_dims(mu, d);
            let md = biguint_to_f64(&(&dims.dim_s * &dims.mult));
            let projector = young_projector_with(&mut table, mu, d, self.max_dim)?;
            acc = acc.add(&projector.scale(root * v_mu / md.sqrt()));
        }
        let norm = acc.adjoint().trace_product(&acc).re;
        let expected = dim as f64;
        if (norm - expected).abs() > OPERATOR_TRACE_TOLERANCE * expected {
            return Err(Error::TraceCheck {
                what: "tr(O†O) = d^N",
                expected,
                actual: norm,
            });
        }
        Ok(acc)
    }

    /// `F = (N/d) sqrt(tr Π̃_N / d^(N+1)) |tr(σ_N sqrt(Π̃_N))|`.
    pub fn frec_oracle(&self, n: u32, d: u32) -> Result<FidelityReport> {
        let p = self.protocol(n, d)?;
        Ok(FidelityReport::new(frec_from(&p)?, Method::Oracle, n, d, false))
    }

    /// `F = (sqrt(N)/d) |tr(σ_N sqrt(Π̃_N) O_A O_Ã†)|` with the non-optimal
    /// measurement; `O_Ã` acts on `A_1 … A_{N-1}`.
    pub fn frec_optimal_oracle(
        &self,
        n: u32,
        d: u32,
        v_n: &VCoefficients,
        v_nm1: &VCoefficients,
    ) -> Result<FidelityReport> {
        check_pair(n, d, v_n, v_nm1)?;
        let p = self.protocol(n, d)?;
        let (o, ot) = self.operator_pair(n, d, v_n, v_nm1)?;
        let root = sqrt_psd(p.pi_tilde(n), NEGATIVE_CLAMP)?;
        let chain = p.signal(n).mul(&root).mul(&o).mul(&ot.adjoint());
        let value = (n as f64).sqrt() / d as f64 * chain.trace().norm();
        Ok(FidelityReport::new(value, Method::Oracle, n, d, false))
    }

    /// The same quantity with the measurement of the rotated signals
    /// `O_A σ_a O_A†`: `(sqrt(N)/d) |tr(sqrt(Π̃'_N) O_A σ_N O_Ã†)|`.
    pub fn frec_rotated_oracle(
        &self,
        n: u32,
        d: u32,
        v_n: &VCoefficients,
        v_nm1: &VCoefficients,
    ) -> Result<FidelityReport> {
        check_pair(n, d, v_n, v_nm1)?;
        let alice = self.build_optimizing_operator(v_n)?;
        let p = self.rotated_protocol(n, d, &alice)?;
        let (o, ot) = self.operator_pair(n, d, v_n, v_nm1)?;
        let root = sqrt_psd(p.pi_tilde(n), NEGATIVE_CLAMP)?;
        let original = self.signal_state(n, n, d)?;
        let chain = root.mul(&o).mul(&original).mul(&ot.adjoint());
        let value = (n as f64).sqrt() / d as f64 * chain.trace().norm();
        Ok(FidelityReport::new(value, Method::Oracle, n, d, false))
    }

    fn operator_pair(
        &self,
        n: u32,
        d: u32,
        v_n: &VCoefficients,
        v_nm1: &VCoefficients,
    ) -> Result<(DenseOperator, DenseOperator)> {
        let o = extend_to(&self.build_optimizing_operator(v_n)?, n + 1, d)?;
        let ot = extend_to(&self.build_optimizing_operator(v_nm1)?, n + 1, d)?;
        Ok((o, ot))
    }

    /// Entanglement fidelity `(1/d²) Σ_a tr[(O†⊗1) Π̃_a (O⊗1) σ_a]` of the
    /// teleportation channel. With `O` given, `Π̃_a` is the square-root
    /// measurement of the rotated signals `O σ_a O†`.
    pub fn channel_fidelity_oracle(&self, n: u32, d: u32, o: Option<&DenseOperator>) -> Result<f64> {
        let (p, full) = match o {
            None => (self.protocol(n, d)?, None),
            Some(o) => (self.rotated_protocol(n, d, o)?, Some(extend_to(o, n + 1, d)?)),
        };
        let mut total = 0.0;
        for a in 1..=n {
            let sigma = self.signal_state(a, n, d)?;
            let pulled = match &full {
                None => p.pi_tilde(a).clone(),
                Some(f) => f.adjoint().mul(p.pi_tilde(a)).mul(f),
            };
            total += pulled.trace_product(&sigma).re;
        }
        Ok(total / (d * d) as f64)
    }

    /// `|⟨Φ⁺|(O_A ⊗ 1_B)|Φ⁺⟩|` on the `2N`-qudit resource state. The pairs
    /// are regrouped as `A_1 … A_N B_1 … B_N`, so the resource state reads
    /// `d^{-N/2} Σ_i |i⟩_A |i⟩_B`.
    pub fn resource_fidelity_oracle(&self, n: u32, d: u32, v: &VCoefficients) -> Result<f64> {
        v.check_shape(n, d)?;
        // only O counts against the cap; the state is a vector of side² entries
        let side = checked_dim(d, n, self.max_dim)?;
        let total = side * side;
        let o = self.build_optimizing_operator(v)?;
        let amp = 1.0 / (side as f64).sqrt();
        let mut phi = vec![Complex64::new(0.0, 0.0); total];
        for i in 0..side {
            phi[i * side + i] = Complex64::new(amp, 0.0);
        }
        // (O ⊗ 1)|Φ⟩: index (r, c) picks up Σ_k O[r, k] Φ[k, c]
        let om = o.matrix();
        let mut overlap = Complex64::new(0.0, 0.0);
        for r in 0..side {
            for c in 0..side {
                let mut out = Complex64::new(0.0, 0.0);
                for k in 0..side {
                    out += om[(r, k)] * phi[k * side + c];
                }
                overlap += phi[r * side + c].conj() * out;
            }
        }
        Ok(overlap.norm())
    }
}

/// `F` from an assembled protocol.
pub(crate) fn frec_from(p: &Protocol) -> Result<f64> {
    let (n, d) = (p.ports, p.d);
    let pt = p.pi_tilde(n);
    let root = sqrt_psd(pt, NEGATIVE_CLAMP)?;
    let overlap = p.signal(n).trace_product(&root).norm();
    let norm = (pt.trace().re / (d as f64).powi(n as i32 + 1)).sqrt();
    Ok(n as f64 / d as f64 * norm * overlap)
}

fn check_port(a: u32, n: u32) -> Result<()> {
    if a < 1 || a > n {
        return Err(Error::InvalidArgument(format!("port {a} outside 1..={n}")));
    }
    Ok(())
}

fn check_pair(n: u32, d: u32, v_n: &VCoefficients, v_nm1: &VCoefficients) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    v_n.check_shape(n, d)?;
    v_nm1.check_shape(n - 1, d)?;
    Ok(())
}

/// `O ⊗ 1` up to `total` factors.
pub fn extend_to(o: &DenseOperator, total: u32, d: u32) -> Result<DenseOperator> {
    let dim = o.dim();
    let mut acted = 0;
    let mut probe = 1usize;
    while probe < dim {
        probe *= d as usize;
        acted += 1;
    }
    if probe != dim || acted > total {
        return Err(Error::InvalidArgument(format!(
            "operator of dimension {dim} does not act on at most {total} qudits"
        )));
    }
    Ok(o.kron_identity((d as usize).pow(total - acted)))
}

/// Entanglement fidelity of the teleportation channel for Alice's operation
/// built from `v`, using the rotated-signal measurement.
pub fn channel_fidelity_for(oracle: &Oracle, v: &VCoefficients) -> Result<f64> {
    let o = oracle.build_optimizing_operator(v)?;
    oracle.channel_fidelity_oracle(v.ports(), v.dim(), Some(&o))
}
