//! Rényi and Cauchy-Schwarz divergences between particle LMB densities that
//! share labels and particle supports.
//!
//! Both are evaluated through the multi-Bernoulli factorization: the sum over
//! label subsets of products of per-label terms equals the product over labels
//! of (absent term + present term), so no subset enumeration is needed.

use crate::error::{Error, Result};
use crate::tbd_lmb::LmbBelief;

/// Existence and particle weights of one label, borrowed from a belief.
#[derive(Debug, Clone, Copy)]
pub struct LabelWeights<'a> {
    pub existence: f64,
    pub weights: &'a [f64],
}

/// Pair up the labels of two beliefs, checking that they share supports.
pub fn paired_weights<'a>(a: &'a LmbBelief, b: &'a LmbBelief) -> Result<Vec<(LabelWeights<'a>, LabelWeights<'a>)>> {
    if a.labels() != b.labels() {
        return Err(Error::SupportMismatch(format!(
            "label sets {:?} and {:?} differ",
            a.labels(),
            b.labels()
        )));
    }
    a.components()
        .zip(b.components())
        .map(|(ca, cb)| {
            if ca.particles != cb.particles {
                return Err(Error::SupportMismatch(format!("particles of label {} differ", ca.label)));
            }
            Ok((
                LabelWeights {
                    existence: ca.existence,
                    weights: &ca.weights,
                },
                LabelWeights {
                    existence: cb.existence,
                    weights: &cb.weights,
                },
            ))
        })
        .collect()
}

/// `p2^a p1^(1-a) - p1` for probabilities `p1`, `p2`, accurate near `p2 = p1`.
fn renyi_term(p2: f64, p1: f64, alpha: f64) -> f64 {
    if p1 > 0.0 && p2 > 0.0 {
        p1 * (alpha * (p2 / p1).ln()).exp_m1()
    } else if p1 > 0.0 {
        // p2 = 0
        if alpha > 0.0 {
            -p1
        } else {
            0.0
        }
    } else if p2 > 0.0 {
        if alpha < 1.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        0.0
    }
}

fn kl_term(p2: f64, p1: f64) -> f64 {
    if p2 <= 0.0 {
        0.0
    } else if p1 <= 0.0 {
        f64::INFINITY
    } else {
        p2 * (p2 / p1).ln()
    }
}

/// Rényi divergence of order `alpha` from per-label weight pairs `(pi2, pi1)`.
pub fn renyi_from_weights(pairs: &[(LabelWeights, LabelWeights)], alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(crate::error::invalid("alpha", format!("must be non-negative, got {alpha}")));
    }
    if (alpha - 1.0).abs() < 1e-9 {
        let mut d = 0.0;
        for (two, one) in pairs {
            check_len(two, one)?;
            d += kl_term(1.0 - two.existence, 1.0 - one.existence);
            for (&w2, &w1) in two.weights.iter().zip(one.weights) {
                d += kl_term(two.existence * w2, one.existence * w1);
            }
        }
        return Ok(d);
    }
    let mut log_sum = 0.0;
    for (two, one) in pairs {
        check_len(two, one)?;
        let mut s = renyi_term(1.0 - two.existence, 1.0 - one.existence, alpha);
        for (&w2, &w1) in two.weights.iter().zip(one.weights) {
            s += renyi_term(two.existence * w2, one.existence * w1, alpha);
        }
        log_sum += s.ln_1p();
    }
    Ok(log_sum / (alpha - 1.0))
}

/// Per-label log of `<pi_i, pi_j>_K`.
fn log_inner(a: &LabelWeights, b: &LabelWeights, k: f64) -> f64 {
    let overlap: f64 = a.weights.iter().zip(b.weights).map(|(&x, &y)| x * y).sum();
    ((1.0 - a.existence) * (1.0 - b.existence) + a.existence * b.existence * k * overlap).ln()
}

/// Cauchy-Schwarz divergence from per-label weight pairs.
pub fn cauchy_schwarz_from_weights(pairs: &[(LabelWeights, LabelWeights)], k: f64) -> Result<f64> {
    if !(k > 0.0) {
        return Err(crate::error::invalid("k", format!("must be positive, got {k}")));
    }
    let (mut l21, mut l11, mut l22) = (0.0, 0.0, 0.0);
    for (two, one) in pairs {
        check_len(two, one)?;
        l21 += log_inner(two, one, k);
        l11 += log_inner(one, one, k);
        l22 += log_inner(two, two, k);
    }
    if !(l21.is_finite() && l11.is_finite() && l22.is_finite()) {
        return Err(Error::DegenerateSupport);
    }
    Ok(-(l21 - (l22 + l11) / 2.0))
}

fn check_len(a: &LabelWeights, b: &LabelWeights) -> Result<()> {
    if a.weights.len() != b.weights.len() {
        return Err(Error::SupportMismatch(format!(
            "{} vs {} particles",
            a.weights.len(),
            b.weights.len()
        )));
    }
    Ok(())
}

/// `D_alpha(pi2 || pi1)`; `alpha` near one gives the Kullback-Leibler limit.
pub fn renyi_divergence(pi2: &LmbBelief, pi1: &LmbBelief, alpha: f64) -> Result<f64> {
    renyi_from_weights(&paired_weights(pi2, pi1)?, alpha)
}

/// `-ln(<pi2, pi1> / sqrt(<pi2, pi2> <pi1, pi1>))` with unit hyper-volume `k`.
pub fn cauchy_schwarz_divergence(pi2: &LmbBelief, pi1: &LmbBelief, k: f64) -> Result<f64> {
    cauchy_schwarz_from_weights(&paired_weights(pi2, pi1)?, k)
}
