use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::optimal::{v_qubit_analytic, VCoefficients};
use crate::oracle::Oracle;

/// One row of the pinned-values table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PinnedValue {
    pub name: String,
    #[serde(rename = "N")]
    pub ports: u32,
    pub d: u32,
    pub value: f64,
    pub note: String,
}

/// Qutrit coefficients `d_μ / √(N!)` shipped under `data/vcoeffs`.
fn qutrit_coefficients(n: u32) -> Result<VCoefficients> {
    let raw: &[f64] = match n {
        2 => &[1.0, 1.0],
        3 => &[1.0, 2.0, 1.0],
        _ => unreachable!("only N = 2, 3 are shipped"),
    };
    Ok(VCoefficients::from_unnormalized(n, 3, raw)?)
}

/// Recompute every pinned constant from the dense-matrix oracle.
pub fn pinned_values() -> Result<Vec<PinnedValue>> {
    let oracle = Oracle::default();
    let mut out = Vec::new();
    let mut push = |name: &str, ports, d, value, note: &str| {
        out.push(PinnedValue {
            name: name.to_string(),
            ports,
            d,
            value,
            note: note.to_string(),
        })
    };

    for (n, d) in [(1, 2), (2, 2), (3, 2), (4, 2), (5, 2), (2, 3), (3, 3), (1, 4), (2, 4)] {
        let v = oracle.frec_oracle(n, d)?.value;
        push("frec", n, d, v, "dense oracle, square-root measurement");
    }
    for n in 2..=5 {
        let v = oracle
            .frec_optimal_oracle(n, 2, &v_qubit_analytic(n)?, &v_qubit_analytic(n - 1)?)?
            .value;
        push("frec_optimal", n, 2, v, "dense oracle, qubit eigenvector coefficients");
    }
    let v = oracle
        .frec_optimal_oracle(3, 3, &qutrit_coefficients(3)?, &qutrit_coefficients(2)?)?
        .value;
    push("frec_optimal", 3, 3, v, "dense oracle, shipped qutrit coefficients");
    for n in [2, 6] {
        let v = oracle.resource_fidelity_oracle(n, 2, &v_qubit_analytic(n)?)?;
        push("resource_fidelity", n, 2, v, "dense oracle, overlap of resource states");
    }
    for n in 2..=3 {
        let alice = oracle.build_optimizing_operator(&qutrit_coefficients(n)?)?;
        let v = oracle.channel_fidelity_oracle(n, 3, Some(&alice))?;
        push("channel_fidelity", n, 3, v, "dense oracle, shipped qutrit coefficients");
    }
    Ok(out)
}
