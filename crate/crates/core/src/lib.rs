//! Fidelity of the resource state left behind by deterministic port-based
//! teleportation, for both the non-optimal and the optimal protocol.
//!
//! [`closed_form`] and [`optimal`] evaluate everything through Schur-Weyl
//! data from [`schur_weyl`]. [`oracle`] rebuilds the same quantities from
//! explicit matrices for small instances. [`cli`] is the command-line front end.

pub mod cli;
pub mod closed_form;
pub mod error;
pub mod numerics;
pub mod optimal;
pub mod oracle;
pub mod schur_weyl;
