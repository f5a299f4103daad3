//! Numerical search for coefficients `v_μ` maximising the entanglement
//! fidelity of the rotated-signal teleportation channel. Used to produce
//! coefficient files for `d > 2`, where no closed form is available here.

use super::protocol::{channel_fidelity_for, Oracle};
use crate::error::{Error, Result};
use crate::optimal::VCoefficients;
use crate::schur_weyl::partitions_bounded;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub max_evaluations: usize,
    /// Stop once the simplex spread in objective value falls below this.
    pub value_tolerance: f64,
    pub initial_step: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_evaluations: 4000,
            value_tolerance: 1e-14,
            initial_step: 0.25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchResult {
    pub coefficients: VCoefficients,
    pub channel_fidelity: f64,
    pub evaluations: usize,
}

fn to_coefficients(n: u32, d: u32, x: &[f64]) -> Result<VCoefficients> {
    let abs: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    Ok(VCoefficients::from_unnormalized(n, d, &abs)?)
}

/// Nelder-Mead over `x ↦ |x| / ‖x‖`, started from the all-ones vector.
pub fn optimize_channel_coefficients(oracle: &Oracle, n: u32, d: u32, opts: SearchOptions) -> Result<SearchResult> {
    let k = partitions_bounded(n, d).len();
    let mut evaluations = 0;
    let mut objective = |x: &[f64]| -> Result<f64> {
        evaluations += 1;
        Ok(-channel_fidelity_for(oracle, &to_coefficients(n, d, x)?)?)
    };
    if k == 1 {
        let x = vec![1.0];
        let f = -objective(&x)?;
        return Ok(SearchResult {
            coefficients: to_coefficients(n, d, &x)?,
            channel_fidelity: f,
            evaluations: 1,
        });
    }

    let start = vec![1.0; k];
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(k + 1);
    simplex.push((start.clone(), objective(&start)?));
    for i in 0..k {
        let mut x = start.clone();
        x[i] += opts.initial_step;
        let f = objective(&x)?;
        simplex.push((x, f));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut used = k + 1;
    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[k].1 - simplex[0].1;
        if spread.abs() <= opts.value_tolerance {
            break;
        }
        if used >= opts.max_evaluations {
            return Err(Error::NonConvergence { iterations: used });
        }
        let centroid: Vec<f64> = (0..k)
            .map(|j| simplex[..k].iter().map(|(x, _)| x[j]).sum::<f64>() / k as f64)
            .collect();
        let towards =
            |t: f64, from: &[f64]| -> Vec<f64> { centroid.iter().zip(from).map(|(c, w)| c + t * (w - c)).collect() };
        let worst = simplex[k].0.clone();
        let reflected = towards(-alpha, &worst);
        let fr = objective(&reflected)?;
        used += 1;
        if fr < simplex[0].1 {
            let expanded = towards(-gamma, &worst);
            let fe = objective(&expanded)?;
            used += 1;
            simplex[k] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[k - 1].1 {
            simplex[k] = (reflected, fr);
        } else {
            let contracted = towards(rho, &worst);
            let fc = objective(&contracted)?;
            used += 1;
            if fc < simplex[k].1 {
                simplex[k] = (contracted, fc);
            } else {
                let best = simplex[0].0.clone();
                for entry in simplex.iter_mut().skip(1) {
                    let x: Vec<f64> = best.iter().zip(&entry.0).map(|(b, w)| b + sigma * (w - b)).collect();
                    entry.1 = objective(&x)?;
                    entry.0 = x;
                    used += 1;
                }
            }
        }
    }
    let (x, f) = simplex.swap_remove(0);
    Ok(SearchResult {
        coefficients: to_coefficients(n, d, &x)?,
        channel_fidelity: -f,
        evaluations,
    })
}
