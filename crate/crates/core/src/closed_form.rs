//! Closed-form recycling fidelity of the non-optimal protocol.
//!
//! Everything is a finite sum over frames `α ⊢ N-1` of height at most `d`.
//! Exact integers from [`crate::schur_weyl`] are converted to floating point
//! only at the last moment; once `d^(N+1)` leaves the comfortable range of a
//! double every quantity is carried as a logarithm instead.

use num_bigint::BigUint;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{biguint_to_f64, ln_biguint, KahanSum, LogSumExp};
use crate::schur_weyl::{add_box, irrep_dims, partitions_bounded, theta_dim, Partition};

/// Above this many bits in `d^(N+1)` the evaluators switch to log space.
pub const LOG_SPACE_THRESHOLD_BITS: f64 = 150.0;

/// Slack allowed above 1 for a fidelity value.
pub const FIDELITY_SLACK: f64 = 1e-9;

/// Which evaluation produced a [`FidelityReport`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    General,
    QubitClosed,
    Oracle,
    OptimalGeneral,
    OptimalQubit,
    Angular,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::General => "general",
            Method::QubitClosed => "qubit_closed",
            Method::Oracle => "oracle",
            Method::OptimalGeneral => "optimal_general",
            Method::OptimalQubit => "optimal_qubit",
            Method::Angular => "angular",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    #[serde(rename = "N")]
    pub ports: u32,
    pub d: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
}

/// A fidelity value together with how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityReport {
    pub value: f64,
    pub method: Method,
    pub params: Params,
    pub log_space_used: bool,
}

impl FidelityReport {
    pub fn new(value: f64, method: Method, ports: u32, d: u32, log_space_used: bool) -> Self {
        Self {
            value,
            method,
            params: Params { ports, d, k: None },
            log_space_used,
        }
    }

    /// True when the value is finite, nonnegative and at most `1 + FIDELITY_SLACK`.
    pub fn is_physical(&self) -> bool {
        self.value.is_finite() && self.value >= 0.0 && self.value <= 1.0 + FIDELITY_SLACK
    }
}

/// Evaluation strategy for the closed forms.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Evaluation {
    Direct,
    LogSpace,
}

impl Evaluation {
    /// Direct while `d^(N+1)` stays below `2^LOG_SPACE_THRESHOLD_BITS`.
    pub fn auto(n: u32, d: u32) -> Self {
        if (n as f64 + 1.0) * (d as f64).log2() > LOG_SPACE_THRESHOLD_BITS {
            Evaluation::LogSpace
        } else {
            Evaluation::Direct
        }
    }

    pub fn is_log(self) -> bool {
        self == Evaluation::LogSpace
    }
}

fn check_nd(n: u32, d: u32) -> Result<()> {
    if n < 1 {
        return Err(Error::InvalidArgument("N must be at least 1".into()));
    }
    if d < 2 {
        return Err(Error::InvalidArgument("d must be at least 2".into()));
    }
    Ok(())
}

/// Per-frame data shared by the trace formula and the optimal fidelity.
///
/// For `α ⊢ N-1` with height at most `d`: `S(α) = Σ_ν sqrt(m_ν d_ν)` over
/// `ν ∈ α + □` of height at most `d` (θ is never among them), and the gap
/// `N d_α - d_θ`.
#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub alpha: Partition,
    pub children: Vec<Partition>,
    pub ln_dim: f64,
    pub ln_mult: f64,
    pub ln_s: f64,
    pub ln_gap: f64,
    /// Direct-path values; only meaningful when evaluated directly.
    pub s: f64,
    pub dim: f64,
    pub mult: f64,
    pub gap: f64,
}

pub(crate) fn blocks(n: u32, d: u32, eval: Evaluation) -> Result<Vec<Block>> {
    let n_big = BigUint::from(n);
    partitions_bounded(n - 1, d)
        .into_iter()
        .map(|alpha| {
            let dims = irrep_dims(&alpha, d);
            let d_theta = theta_dim(&alpha, d)?;
            let gap = &n_big * &dims.dim_s - &d_theta;
            let children = add_box(&alpha, d);
            let (ln_s, s) = match eval {
                Evaluation::LogSpace => {
                    let lse: LogSumExp = children.iter().map(|nu| irrep_dims(nu, d).ln_sqrt_md()).collect();
                    (lse.ln(), f64::NAN)
                }
                Evaluation::Direct => {
                    let s: KahanSum = children
                        .iter()
                        .map(|nu| {
                            let nd = irrep_dims(nu, d);
                            biguint_to_f64(&(&nd.mult * &nd.dim_s)).sqrt()
                        })
                        .collect();
                    (s.value().ln(), s.value())
                }
            };
            Ok(Block {
                ln_dim: dims.ln_dim(),
                ln_mult: dims.ln_mult(),
                ln_s,
                ln_gap: ln_biguint(&gap),
                s,
                dim: biguint_to_f64(&dims.dim_s),
                mult: biguint_to_f64(&dims.mult),
                gap: biguint_to_f64(&gap),
                alpha,
                children,
            })
        })
        .collect()
}

/// Eigenvalue of ρ on the block labelled by `(α, ν)`:
/// `(N / d^N) m_ν d_α / (m_α d_ν)`.
pub fn srm_eigenvalue(alpha: &Partition, nu: &Partition, n: u32, d: u32) -> Result<f64> {
    if n < 1 || d < 1 || alpha.n() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "{alpha} is not a frame of N-1 = {}",
            n as i64 - 1
        )));
    }
    if alpha.height() > d {
        return Err(Error::FrameExceedsDimension {
            partition: alpha.clone(),
            dim: d,
        });
    }
    if !add_box(alpha, d).contains(nu) {
        return Err(Error::NotOneBox {
            alpha: alpha.clone(),
            nu: nu.clone(),
        });
    }
    let a = irrep_dims(alpha, d);
    let v = irrep_dims(nu, d);
    let ln = (n as f64).ln() - n as f64 * (d as f64).ln() + v.ln_mult() + a.ln_dim() - a.ln_mult() - v.ln_dim();
    Ok(ln.exp())
}

/// The nonzero eigenvalue of `Π_a` on blocks labelled by `α`:
/// `1 - d_θ / (N d_α)`, equal to 1 when `height(α) < d`.
pub fn povm_block_factor(alpha: &Partition, n: u32, d: u32) -> Result<f64> {
    if n < 1 || alpha.n() + 1 != n {
        return Err(Error::InvalidArgument(format!(
            "{alpha} is not a frame of N-1 = {}",
            n as i64 - 1
        )));
    }
    let d_theta = theta_dim(alpha, d)?;
    if d_theta.is_zero() {
        return Ok(1.0);
    }
    let full = BigUint::from(n) * crate::schur_weyl::dim_irrep(alpha);
    let gap = &full - &d_theta;
    Ok((ln_biguint(&gap) - ln_biguint(&full)).exp())
}

/// `ln tr(sqrt(Π_a) V')` for the non-optimal measurement.
pub fn ln_trace_sqrt_povm_signal(n: u32, d: u32, eval: Evaluation) -> Result<f64> {
    check_nd(n, d)?;
    let ln_n = (n as f64).ln();
    match eval {
        Evaluation::LogSpace => {
            let lse: LogSumExp = blocks(n, d, eval)?
                .iter()
                .map(|b| 0.5 * (b.ln_dim - ln_n - b.ln_gap) + 2.0 * b.ln_s)
                .collect();
            Ok(lse.ln())
        }
        Evaluation::Direct => Ok(trace_sqrt_direct(n, d)?.ln()),
    }
}

fn trace_sqrt_direct(n: u32, d: u32) -> Result<f64> {
    let sqrt_n = (n as f64).sqrt();
    let sum: KahanSum = blocks(n, d, Evaluation::Direct)?
        .iter()
        .map(|b| b.dim.sqrt() / (sqrt_n * b.gap.sqrt()) * b.s * b.s)
        .collect();
    Ok(sum.value())
}

/// `tr(sqrt(Π_a) V')`; grows like `d^(N+1)` and overflows to `inf` for very
/// large `N`, where [`ln_trace_sqrt_povm_signal`] should be used instead.
pub fn trace_sqrt_povm_signal(n: u32, d: u32) -> Result<f64> {
    match Evaluation::auto(n, d) {
        Evaluation::Direct => trace_sqrt_direct(n, d),
        eval => Ok(ln_trace_sqrt_povm_signal(n, d, eval)?.exp()),
    }
}

/// Row `C(n, 0..=k+1)` of exact binomials.
pub(crate) fn binomial_row(n: u32, k: u32) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(k as usize + 2);
    let mut c = BigUint::from(1u32);
    row.push(c.clone());
    for i in 0..=k {
        c = c * (n - i) / (i + 1);
        row.push(c.clone());
    }
    row
}

/// Terms `ln[sqrt((N+1-l)(l+1)/(N+1)) S_l^2]` of the two-row trace sum,
/// `l = 0 ..= (N-1)/2`.
fn qubit_ln_terms(n: u32) -> Vec<f64> {
    let k = (n - 1) / 2;
    let row = binomial_row(n + 1, k);
    let ln_np1 = ((n + 1) as f64).ln();
    (0..=k)
        .map(|l| {
            let a = (n - 2 * l + 1) as f64;
            let b = (n - 2 * l - 1) as f64;
            let mut s = LogSumExp::default();
            s.push(a.ln() + 0.5 * (ln_biguint(&row[l as usize]) - ln_np1));
            if b > 0.0 {
                s.push(b.ln() + 0.5 * (ln_biguint(&row[l as usize + 1]) - ln_np1));
            }
            let weight = 0.5 * (((n + 1 - l) as f64).ln() + ((l + 1) as f64).ln() - ln_np1);
            weight + 2.0 * s.ln()
        })
        .collect()
}

fn qubit_direct_terms(n: u32) -> Vec<f64> {
    let k = (n - 1) / 2;
    let row = binomial_row(n + 1, k);
    let np1 = (n + 1) as f64;
    (0..=k)
        .map(|l| {
            let c0 = biguint_to_f64(&row[l as usize]);
            let c1 = biguint_to_f64(&row[l as usize + 1]);
            let s = (n - 2 * l + 1) as f64 * (c0 / np1).sqrt() + (n - 2 * l - 1) as f64 * (c1 / np1).sqrt();
            (((n + 1 - l) as f64) * ((l + 1) as f64) / np1).sqrt() * s * s
        })
        .collect()
}

/// Two-row specialisation of [`trace_sqrt_povm_signal`] at `d = 2`.
pub fn trace_sqrt_povm_signal_qubit(n: u32) -> Result<f64> {
    check_nd(n, 2)?;
    match Evaluation::auto(n, 2) {
        Evaluation::Direct => {
            let sum: KahanSum = qubit_direct_terms(n).into_iter().collect();
            Ok(sum.value() / n as f64)
        }
        Evaluation::LogSpace => {
            let lse: LogSumExp = qubit_ln_terms(n).into_iter().collect();
            Ok((lse.ln() - (n as f64).ln()).exp())
        }
    }
}

/// Recycling fidelity `F = sqrt(N) / d^(N+1) · tr(sqrt(Π_N) V')` with an
/// explicit evaluation strategy.
pub fn frec_with(n: u32, d: u32, eval: Evaluation) -> Result<FidelityReport> {
    check_nd(n, d)?;
    let value = match eval {
        Evaluation::Direct => (n as f64).sqrt() / (d as f64).powi(n as i32 + 1) * trace_sqrt_direct(n, d)?,
        Evaluation::LogSpace => {
            let ln =
                0.5 * (n as f64).ln() - (n as f64 + 1.0) * (d as f64).ln() + ln_trace_sqrt_povm_signal(n, d, eval)?;
            ln.exp()
        }
    };
    Ok(FidelityReport::new(value, Method::General, n, d, eval.is_log()))
}

/// Recycling fidelity of the non-optimal protocol after one round.
pub fn frec(n: u32, d: u32) -> Result<FidelityReport> {
    frec_with(n, d, Evaluation::auto(n, d))
}

/// Qubit recycling fidelity from the two-row sum.
pub fn frec_qubit(n: u32) -> Result<FidelityReport> {
    check_nd(n, 2)?;
    let eval = Evaluation::auto(n, 2);
    let ln_n = (n as f64).ln();
    let value = match eval {
        Evaluation::Direct => {
            let sum: KahanSum = qubit_direct_terms(n).into_iter().collect();
            sum.value() / ((n as f64).sqrt() * 2f64.powi(n as i32 + 1))
        }
        Evaluation::LogSpace => {
            let lse: LogSumExp = qubit_ln_terms(n).into_iter().collect();
            (lse.ln() - 0.5 * ln_n - (n as f64 + 1.0) * std::f64::consts::LN_2).exp()
        }
    };
    Ok(FidelityReport::new(value, Method::QubitClosed, n, 2, eval.is_log()))
}

/// Lower bound `1 - 2k(1 - f1)` on the fidelity after `k` rounds. Returned
/// raw: a negative value means the bound is vacuous.
pub fn kround_lower_bound(f1: f64, k: u32) -> Result<f64> {
    if !(0.0..=1.0).contains(&f1) {
        return Err(Error::InvalidArgument(format!(
            "one-round fidelity {f1} outside [0, 1]"
        )));
    }
    if k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(1.0 - 2.0 * k as f64 * (1.0 - f1))
}
