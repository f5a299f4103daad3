//! Brute-force density-matrix oracle for small `(N, d)`.
//!
//! Every object is built as an explicit `d^(N+1)`-dimensional matrix and the
//! fidelities are evaluated from their defining traces, independently of the
//! representation-theoretic closed forms.

pub mod characters;
pub mod dense;
pub mod optimize;
pub mod protocol;
pub mod verify;

pub use characters::{cycle_type, young_projector, CharacterTable};
pub use dense::{
    partial_transpose_last, permutation_operator, pinv_sqrt_psd, sqrt_psd, DenseOperator, DEFAULT_MAX_DIM,
    NEGATIVE_CLAMP, SUPPORT_THRESHOLD,
};
pub use optimize::{optimize_channel_coefficients, SearchOptions, SearchResult};
pub use protocol::{Oracle, Protocol};
pub use verify::{verify_suite, verify_suite_with, Check, SpectrumReport, VerifyOptions, VerifyReport};

use crate::closed_form::FidelityReport;
use crate::error::Result;
use crate::optimal::VCoefficients;

/// [`Oracle::frec_oracle`] with the default dimension cap.
pub fn frec_oracle(n: u32, d: u32) -> Result<FidelityReport> {
    Oracle::default().frec_oracle(n, d)
}

/// [`Oracle::frec_optimal_oracle`] with the default dimension cap.
pub fn frec_optimal_oracle(n: u32, d: u32, v_n: &VCoefficients, v_nm1: &VCoefficients) -> Result<FidelityReport> {
    Oracle::default().frec_optimal_oracle(n, d, v_n, v_nm1)
}
