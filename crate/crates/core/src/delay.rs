//! Delayed quasi-steady-state machinery.
//!
//! A one-point quadrature of the convolution solution of a linear decay
//! equation `X' = f - g X` is exact for all linear integrands when the
//! quadrature point is delayed by a specific lag and carries a specific
//! weight; for large times both tend to the reciprocal decay rate. Applying
//! that rule to the five fast species yields an evaluation chain of delayed
//! steady-state lookups feeding the two retained equations for `R` and `C`.

use thiserror::Error;

use crate::history::{Channel, HistoryError, HistoryStore};
use crate::model::{
    a_tilde_s, steady_da, steady_dr, steady_ma, steady_mr, RateConstants, ReducedState,
};

/// Which delay expressions the reduced system uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DelayVariant {
    /// State-dependent delays exactly as derived for every fast species.
    Derived,
    /// Gene delays frozen at their kinetic limits `1/theta`; the activator
    /// delay keeps its dependence on `R`.
    Simplified,
    /// As `Simplified`, with the activator delay frozen at the activator
    /// mRNA delay `1/delta_MA`.
    Constant,
}

impl DelayVariant {
    pub fn as_str(&self) -> &'static str {
        match self {
            DelayVariant::Derived => "derived",
            DelayVariant::Simplified => "simplified",
            DelayVariant::Constant => "constant",
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DelayError {
    #[error("quadrature rule requires t > 0, got t = {t}")]
    NonpositiveTime { t: f64 },
    #[error("quadrature rule requires delta > 0, got delta = {delta}")]
    NonpositiveRate { delta: f64 },
    #[error(transparent)]
    History(#[from] HistoryError),
}

/// One-point quadrature rule: evaluation offset `tau` (h) and weight `w` (h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub tau: f64,
    pub w: f64,
}

/// Finite-horizon delay and weight that make the one-point rule
/// `w * phi(t - tau)` exact for all linear `phi` in
/// `int_0^t phi(s) exp(delta (s - t)) ds`.
pub fn exact_tau_w(delta: f64, t: f64) -> Result<QuadratureRule, DelayError> {
    if delta <= 0.0 || delta.is_nan() {
        return Err(DelayError::NonpositiveRate { delta });
    }
    if t <= 0.0 || t.is_nan() {
        return Err(DelayError::NonpositiveTime { t });
    }
    let x = delta * t;
    // 1 - exp(-x) via expm1; 1 - (1 + x) exp(-x) as the difference of two
    // O(x) terms, which keeps the relative error near 2*eps/x.
    let one_minus_exp = -(-x).exp_m1();
    let numerator = one_minus_exp - x * (-x).exp();
    Ok(QuadratureRule {
        tau: numerator / (delta * one_minus_exp),
        w: one_minus_exp / delta,
    })
}

/// Large-time limit of [`exact_tau_w`]: both the delay and the weight tend
/// to the reciprocal decay rate.
pub fn limit_tau_w(delta: f64) -> QuadratureRule {
    debug_assert!(delta > 0.0);
    QuadratureRule {
        tau: 1.0 / delta,
        w: 1.0 / delta,
    }
}

/// Weight of the undelayed one-point rule (quadrature point at `t`),
/// fixed by exactness for constant integrands.
pub fn constant_rule_weight(delta: f64, t: f64) -> f64 {
    -(-delta * t).exp_m1() / delta
}

/// The five delays, in hours.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delays {
    pub d_a: f64,
    pub d_r: f64,
    pub m_a: f64,
    pub m_r: f64,
    pub a: f64,
}

impl Delays {
    pub fn all_positive(&self) -> bool {
        self.d_a > 0.0 && self.d_r > 0.0 && self.m_a > 0.0 && self.m_r > 0.0 && self.a > 0.0
    }
}

/// Evaluates the five delays for a variant.
///
/// `d_a_tau`/`d_r_tau` are the current delayed gene levels; they enter only
/// the `Derived` activator delay and are ignored by the other variants.
pub fn delays_at(
    variant: DelayVariant,
    r_now: f64,
    d_a_tau: f64,
    d_r_tau: f64,
    p: &RateConstants,
) -> Delays {
    let (d_a, d_r) = gene_delays(variant, r_now, p);
    Delays {
        d_a,
        d_r,
        m_a: limit_tau_w(p.delta_ma).tau,
        m_r: limit_tau_w(p.delta_mr).tau,
        a: activator_delay(variant, r_now, d_a_tau, d_r_tau, p),
    }
}

fn gene_delays(variant: DelayVariant, r_now: f64, p: &RateConstants) -> (f64, f64) {
    match variant {
        DelayVariant::Derived => {
            let a = a_tilde_s(r_now, p);
            (
                1.0 / (p.theta_a + p.gamma_a * a),
                1.0 / (p.theta_r + p.gamma_r * a),
            )
        }
        DelayVariant::Simplified | DelayVariant::Constant => (1.0 / p.theta_a, 1.0 / p.theta_r),
    }
}

fn activator_delay(
    variant: DelayVariant,
    r_now: f64,
    d_a_tau: f64,
    d_r_tau: f64,
    p: &RateConstants,
) -> f64 {
    match variant {
        DelayVariant::Derived => {
            1.0 / (p.gamma_a * d_a_tau + p.gamma_r * d_r_tau + p.gamma_c * r_now + p.delta_a)
        }
        DelayVariant::Simplified => 1.0 / (p.gamma_c * r_now + p.delta_a),
        DelayVariant::Constant => 1.0 / p.delta_ma,
    }
}

/// Delayed steady-state levels entering the reduced right-hand side at one
/// time, plus the auxiliary activator level to append to the history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayedAux {
    pub d_a_tau: f64,
    pub d_r_tau: f64,
    pub m_a_tau: f64,
    pub m_r_tau: f64,
    pub a_tau: f64,
    /// `A^s(t)`, recorded so later activator lookups can reach it.
    pub a_s_now: f64,
    pub delays: Delays,
}

/// Evaluates the delayed quasi-steady-state chain at time `t`.
///
/// Stages, each using only recorded history and the current repressor
/// level: gene delays from `r_now`; delayed gene levels from the `A^tau`
/// channel; delayed mRNA levels likewise; the activator delay per variant;
/// `A^tau(t)` from the `A^s` channel (the constant pre-grid extension of
/// the activator applies at `t <= t0`); finally `A^s(t)` from the delayed
/// levels and `r_now`.
pub fn delayed_aux_at(
    t: f64,
    r_now: f64,
    hist: &HistoryStore,
    variant: DelayVariant,
    p: &RateConstants,
) -> Result<DelayedAux, DelayError> {
    chain_at(t, r_now, hist, variant, p, None)
}

/// Same chain with the activator lookup time pinned to `u` instead of
/// `t - tau_a`. Used by the stepper's fallback solve, which treats that
/// lookup time as an explicit scalar unknown.
pub(crate) fn delayed_aux_pinned(
    t: f64,
    r_now: f64,
    hist: &HistoryStore,
    variant: DelayVariant,
    p: &RateConstants,
    u: f64,
) -> Result<DelayedAux, DelayError> {
    chain_at(t, r_now, hist, variant, p, Some(u))
}

fn chain_at(
    t: f64,
    r_now: f64,
    hist: &HistoryStore,
    variant: DelayVariant,
    p: &RateConstants,
    pinned_lookup: Option<f64>,
) -> Result<DelayedAux, DelayError> {
    let (tau_d_a, tau_d_r) = gene_delays(variant, r_now, p);
    let d_a_tau = steady_da(hist.lookup(Channel::ATau, t - tau_d_a)?, p);
    let d_r_tau = steady_dr(hist.lookup(Channel::ATau, t - tau_d_r)?, p);

    let tau_m_a = limit_tau_w(p.delta_ma).tau;
    let tau_m_r = limit_tau_w(p.delta_mr).tau;
    let m_a_tau = steady_ma(hist.lookup(Channel::ATau, t - tau_m_a)?, p);
    let m_r_tau = steady_mr(hist.lookup(Channel::ATau, t - tau_m_r)?, p);

    let tau_a = activator_delay(variant, r_now, d_a_tau, d_r_tau, p);
    let a_tau = if t <= hist.t0() {
        hist.pre0(Channel::ATau)
    } else {
        let lookup_time = pinned_lookup.unwrap_or(t - tau_a);
        hist.lookup(Channel::AS, lookup_time)?
    };

    let sink = p.gamma_a * d_a_tau + p.gamma_r * d_r_tau + p.gamma_c * r_now + p.delta_a;
    let a_s_now = (p.beta_a * m_a_tau
        + p.theta_a * (1.0 - d_a_tau)
        + p.theta_r * (1.0 - d_r_tau))
        / sink;

    Ok(DelayedAux {
        d_a_tau,
        d_r_tau,
        m_a_tau,
        m_r_tau,
        a_tau,
        a_s_now,
        delays: Delays {
            d_a: tau_d_a,
            d_r: tau_d_r,
            m_a: tau_m_a,
            m_r: tau_m_r,
            a: tau_a,
        },
    })
}

/// Reduced derivative given already-evaluated delayed levels.
pub fn delayed_derivative(s: &ReducedState, aux: &DelayedAux, p: &RateConstants) -> ReducedState {
    let complex_formation = p.gamma_c * aux.a_tau * s.r;
    ReducedState {
        r: p.beta_r * aux.m_r_tau - complex_formation + p.delta_a * s.c - p.delta_r * s.r,
        c: complex_formation - p.delta_a * s.c,
    }
}

/// Right-hand side of the delayed reduced system at time `t`.
pub fn delayed_rhs(
    t: f64,
    s: &ReducedState,
    hist: &HistoryStore,
    variant: DelayVariant,
    p: &RateConstants,
) -> Result<(ReducedState, DelayedAux), DelayError> {
    let aux = delayed_aux_at(t, s.r, hist, variant, p)?;
    Ok((delayed_derivative(s, &aux, p), aux))
}
