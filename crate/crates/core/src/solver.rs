//! Fixed-step implicit Euler integration for the full system, the
//! delay-free reduction, and the three delayed reductions (method of steps
//! over a uniform-grid history).

use std::fmt;
use std::str::FromStr;

use nalgebra::{Const, DimMin, SMatrix, SVector};
use thiserror::Error;

use crate::delay::{
    delayed_aux_at, delayed_aux_pinned, delayed_derivative, DelayError, DelayVariant, DelayedAux,
};
use crate::history::{HistoryStore, Sample};
use crate::model::{
    full_rhs, reduced_rhs, FullState, RateConstants, ReducedState, FULL_COMPONENTS,
    REDUCED_COMPONENTS,
};

/// The five systems the toolkit simulates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemId {
    /// Nine-species mass-action system.
    Original,
    /// Two-variable reduction with instantaneous steady-state maps.
    Qss,
    /// Delayed reduction with fully state-dependent delays.
    DqssDerived,
    /// Delayed reduction with simplified gene delays.
    DqssSimplified,
    /// Delayed reduction with constant delays.
    DqssConstant,
}

impl SystemId {
    pub const ALL: [SystemId; 5] = [
        SystemId::Original,
        SystemId::Qss,
        SystemId::DqssDerived,
        SystemId::DqssSimplified,
        SystemId::DqssConstant,
    ];

    /// The four approximations, in reporting order.
    pub const APPROXIMATIONS: [SystemId; 4] = [
        SystemId::Qss,
        SystemId::DqssDerived,
        SystemId::DqssSimplified,
        SystemId::DqssConstant,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SystemId::Original => "original",
            SystemId::Qss => "qss",
            SystemId::DqssDerived => "dqss-derived",
            SystemId::DqssSimplified => "dqss-simplified",
            SystemId::DqssConstant => "dqss-constant",
        }
    }

    /// Delay variant backing the system, if it is a delayed reduction.
    pub fn delay_variant(&self) -> Option<DelayVariant> {
        match self {
            SystemId::DqssDerived => Some(DelayVariant::Derived),
            SystemId::DqssSimplified => Some(DelayVariant::Simplified),
            SystemId::DqssConstant => Some(DelayVariant::Constant),
            _ => None,
        }
    }
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
#[error("unknown system '{0}' (expected original, qss, dqss-derived, dqss-simplified or dqss-constant)")]
pub struct ParseSystemError(pub String);

impl FromStr for SystemId {
    type Err = ParseSystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "original" => Ok(SystemId::Original),
            "qss" => Ok(SystemId::Qss),
            "dqss-derived" => Ok(SystemId::DqssDerived),
            "dqss-simplified" => Ok(SystemId::DqssSimplified),
            "dqss-constant" => Ok(SystemId::DqssConstant),
            other => Err(ParseSystemError(other.to_string())),
        }
    }
}

/// Fixed-step solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Step size, h.
    pub dt: f64,
    /// Integration horizon, h.
    pub t_end: f64,
    /// Relative residual tolerance of the inner iteration.
    pub newton_tol: f64,
    /// Inner-iteration cap per step.
    pub max_iters: usize,
    /// Emit every `stride`-th step to the trajectory (1 = every step).
    pub stride: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 300.0,
            newton_tol: 1e-10,
            max_iters: 50,
            stride: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let fail = |reason: String| Err(SolverError::InvalidConfig { reason });
        if self.dt <= 0.0 || !self.dt.is_finite() {
            return fail(format!("dt must be positive and finite, got {}", self.dt));
        }
        if self.t_end <= 0.0 || !self.t_end.is_finite() {
            return fail(format!(
                "t_end must be positive and finite, got {}",
                self.t_end
            ));
        }
        if self.newton_tol <= 0.0 || self.newton_tol.is_nan() {
            return fail(format!(
                "newton_tol must be positive, got {}",
                self.newton_tol
            ));
        }
        if self.max_iters == 0 {
            return fail("max_iters must be at least 1".to_string());
        }
        if self.stride == 0 {
            return fail("stride must be at least 1".to_string());
        }
        Ok(())
    }

    fn n_steps(&self) -> usize {
        ((self.t_end / self.dt).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SolverError {
    #[error("implicit step at t = {t:.6} h did not converge (scaled residual {residual:.3e})")]
    NonConvergence { t: f64, residual: f64 },
    #[error("state became non-finite at t = {t:.6} h")]
    NonFinite { t: f64 },
    #[error("invalid solver configuration: {reason}")]
    InvalidConfig { reason: String },
    #[error(transparent)]
    Delay(#[from] DelayError),
}

/// Run identification attached to every trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryMeta {
    pub system: SystemId,
    pub cfg: SolverConfig,
}

/// Timestamped state samples on a uniform output grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    times: Vec<f64>,
    values: Vec<f64>,
    components: Vec<&'static str>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub(crate) fn with_capacity(
        components: Vec<&'static str>,
        meta: TrajectoryMeta,
        capacity: usize,
    ) -> Self {
        Self {
            times: Vec::with_capacity(capacity),
            values: Vec::with_capacity(capacity * components.len()),
            components,
            meta,
        }
    }

    pub(crate) fn push_row(&mut self, t: f64, row: &[f64]) {
        assert_eq!(row.len(), self.components.len());
        if let Some(&last) = self.times.last() {
            assert!(t > last, "trajectory times must be strictly increasing");
        }
        self.times.push(t);
        self.values.extend_from_slice(row);
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    /// Output-grid spacing.
    pub fn spacing(&self) -> f64 {
        self.meta.cfg.dt * self.meta.cfg.stride as f64
    }

    pub fn components(&self) -> &[&'static str] {
        &self.components
    }

    pub fn ncomp(&self) -> usize {
        self.components.len()
    }

    /// State vector at sample `i`.
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.components.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn component_index(&self, name: &str) -> Option<usize> {
        self.components.iter().position(|&c| c == name)
    }

    /// Copy of one component's series.
    pub fn component(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.component_index(name)?;
        let n = self.components.len();
        Some(self.values.iter().skip(idx).step_by(n).copied().collect())
    }
}

fn scaled_residual_norm(g: &[f64], y: &[f64]) -> f64 {
    g.iter()
        .zip(y)
        .map(|(gi, yi)| gi.abs() / (1.0 + yi.abs()))
        .fold(0.0, f64::max)
}

/// One implicit Euler step `y1 = y0 + dt f(t1, y1)` solved by damped Newton
/// iteration with a forward-difference Jacobian, warm-started at `y0`.
/// Once the scaled residual meets the tolerance the last computed Newton
/// update is still applied, so the accepted state solves the step equation
/// essentially to round-off.
fn implicit_euler_step<const N: usize, F>(
    rhs: &mut F,
    t1: f64,
    y0: [f64; N],
    dt: f64,
    tol: f64,
    max_iters: usize,
) -> Result<[f64; N], SolverError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    let sqrt_eps = f64::EPSILON.sqrt();
    let residual = |y: &[f64; N], f: &[f64; N]| {
        let mut g = [0.0; N];
        for i in 0..N {
            g[i] = y[i] - y0[i] - dt * f[i];
        }
        g
    };

    let mut y = y0;
    let mut f = rhs(t1, &y);
    let mut last_norm = f64::INFINITY;
    for _ in 0..max_iters {
        let g = residual(&y, &f);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { t: t1 });
        }
        let norm = scaled_residual_norm(&g, &y);

        let mut jac = SMatrix::<f64, N, N>::zeros();
        for j in 0..N {
            let h = sqrt_eps * (1.0 + y[j].abs());
            let mut y_h = y;
            y_h[j] += h;
            let f_h = rhs(t1, &y_h);
            for i in 0..N {
                let didj = if i == j { 1.0 } else { 0.0 };
                jac[(i, j)] = didj - dt * (f_h[i] - f[i]) / h;
            }
        }
        let g_vec = SVector::<f64, N>::from_row_slice(&g);
        let delta = match jac.lu().solve(&g_vec) {
            Some(d) => d,
            None => return Err(SolverError::NonConvergence { t: t1, residual: norm }),
        };

        if norm <= tol {
            for i in 0..N {
                y[i] -= delta[i];
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(SolverError::NonFinite { t: t1 });
            }
            return Ok(y);
        }

        // Backtrack if the full update would grow the residual or leave
        // the finite domain.
        let mut lambda = 1.0;
        loop {
            let mut cand = y;
            for i in 0..N {
                cand[i] -= lambda * delta[i];
            }
            let f_cand = rhs(t1, &cand);
            let g_cand = residual(&cand, &f_cand);
            let cand_norm = scaled_residual_norm(&g_cand, &cand);
            if cand_norm.is_finite() && (cand_norm < norm || lambda <= 1.0 / 16.0) {
                y = cand;
                f = f_cand;
                last_norm = cand_norm;
                break;
            }
            if lambda < 1e-9 {
                return Err(SolverError::NonFinite { t: t1 });
            }
            lambda *= 0.5;
        }
    }
    Err(SolverError::NonConvergence {
        t: t1,
        residual: last_norm,
    })
}

/// Integrates `y' = rhs(t, y)` with fixed-step implicit Euler from `t = 0`.
pub fn integrate_ode<const N: usize, F>(
    mut rhs: F,
    y0: [f64; N],
    components: [&'static str; N],
    system: SystemId,
    cfg: &SolverConfig,
) -> Result<Trajectory, SolverError>
where
    F: FnMut(f64, &[f64; N]) -> [f64; N],
    Const<N>: DimMin<Const<N>, Output = Const<N>>,
{
    cfg.validate()?;
    let n_steps = cfg.n_steps();
    let meta = TrajectoryMeta {
        system,
        cfg: *cfg,
    };
    let mut traj =
        Trajectory::with_capacity(components.to_vec(), meta, n_steps / cfg.stride + 2);
    traj.push_row(0.0, &y0);

    let mut y = y0;
    for n in 0..n_steps {
        let t1 = (n + 1) as f64 * cfg.dt;
        y = implicit_euler_step(&mut rhs, t1, y, cfg.dt, cfg.newton_tol, cfg.max_iters)?;
        if (n + 1) % cfg.stride == 0 {
            traj.push_row(t1, &y);
        }
    }
    Ok(traj)
}

/// Integrates the nine-species system from the reference initial condition.
pub fn integrate_full(p: &RateConstants, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    let p = *p;
    integrate_ode(
        move |_t, y: &[f64; 9]| full_rhs(&FullState::from_array(*y), &p).to_array(),
        FullState::initial().to_array(),
        FULL_COMPONENTS,
        SystemId::Original,
        cfg,
    )
}

/// Integrates the delay-free reduced system from `(R, C) = (0, 0)`.
pub fn integrate_reduced(p: &RateConstants, cfg: &SolverConfig) -> Result<Trajectory, SolverError> {
    let p = *p;
    integrate_ode(
        move |_t, y: &[f64; 2]| reduced_rhs(&ReducedState::from_array(*y), &p).to_array(),
        [0.0, 0.0],
        REDUCED_COMPONENTS,
        SystemId::Qss,
        cfg,
    )
}

/// A delayed-reduction run: the `(R, C)` trajectory plus the full-resolution
/// history of recorded channels needed to evaluate delayed lookups later.
#[derive(Debug, Clone)]
pub struct DdeSolution {
    pub trajectory: Trajectory,
    pub history: HistoryStore,
    pub variant: DelayVariant,
}

fn system_for(variant: DelayVariant) -> SystemId {
    match variant {
        DelayVariant::Derived => SystemId::DqssDerived,
        DelayVariant::Simplified => SystemId::DqssSimplified,
        DelayVariant::Constant => SystemId::DqssConstant,
    }
}

/// One method-of-steps implicit Euler step of the delayed system.
///
/// Delayed lookups with `t - tau` inside the current step interpolate
/// against a provisional endpoint sample, so the unknown is the joint
/// vector `(R, C, A^tau, A^s)` at the step end. It is found as the fixed
/// point of "install provisional values, evaluate the delayed chain, solve
/// the step equations with the delayed levels frozen" by damped Newton
/// iteration with a forward-difference Jacobian. Plain self-iteration is
/// not an option here: where a state-dependent lookup sweeps a corner of a
/// recorded channel (such as the grid start, which the activator lookup
/// crosses once), its loop gain can reach a few tens and the iteration
/// settles into bounded oscillation instead of converging.
fn dde_step(
    hist: &mut HistoryStore,
    y: ReducedState,
    t1: f64,
    variant: DelayVariant,
    p: &RateConstants,
    cfg: &SolverConfig,
) -> Result<(ReducedState, DelayedAux), SolverError> {
    let dt = cfg.dt;
    // Wild Newton candidates (negative repressor levels give negative
    // delays, hence future lookups or compromised algebra) are treated as
    // infeasible trial points, not as run failures.
    let eval = |hist: &mut HistoryStore, x: &[f64; 4]| -> Option<([f64; 4], DelayedAux)> {
        hist.set_provisional(Sample {
            a_tau: x[2],
            a_s: x[3],
            r: x[0],
            c: x[1],
        });
        let aux = delayed_aux_at(t1, x[0], hist, variant, p).ok()?;
        let next = frozen_step(&y, dt, &aux, p);
        let psi = [next.r, next.c, aux.a_tau, aux.a_s_now];
        if psi.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some((psi, aux))
    };

    let sqrt_eps = f64::EPSILON.sqrt();
    let mut x = [
        y.r,
        y.c,
        hist.last(crate::history::Channel::ATau),
        hist.last(crate::history::Channel::AS),
    ];
    let mut last_norm = f64::INFINITY;
    'newton: for _ in 0..cfg.max_iters {
        let Some((psi, aux)) = eval(hist, &x) else {
            break 'newton;
        };
        let mut g = [0.0; 4];
        for i in 0..4 {
            g[i] = x[i] - psi[i];
        }
        let norm = scaled_residual_norm(&g, &x);
        last_norm = norm;
        if norm <= cfg.newton_tol {
            return Ok((ReducedState { r: x[0], c: x[1] }, aux));
        }

        let mut jac = SMatrix::<f64, 4, 4>::zeros();
        for j in 0..4 {
            let h = sqrt_eps * (1.0 + x[j].abs());
            let mut x_h = x;
            x_h[j] += h;
            let Some((psi_h, _)) = eval(hist, &x_h) else {
                break 'newton;
            };
            for i in 0..4 {
                let didj = if i == j { 1.0 } else { 0.0 };
                jac[(i, j)] = didj - (psi_h[i] - psi[i]) / h;
            }
        }
        let Some(delta) = jac.lu().solve(&SVector::<f64, 4>::from_row_slice(&g)) else {
            break 'newton;
        };

        let mut lambda = 1.0;
        loop {
            let mut cand = x;
            for i in 0..4 {
                cand[i] -= lambda * delta[i];
            }
            match eval(hist, &cand) {
                Some((psi_c, _)) => {
                    let mut g_c = [0.0; 4];
                    for i in 0..4 {
                        g_c[i] = cand[i] - psi_c[i];
                    }
                    let cand_norm = scaled_residual_norm(&g_c, &cand);
                    if cand_norm < norm || lambda <= 1.0 / 64.0 {
                        x = cand;
                        break;
                    }
                }
                None if lambda <= 1.0 / 4096.0 => break 'newton,
                None => {}
            }
            lambda *= 0.5;
        }
    }
    rescue_dde_step(hist, y, t1, variant, p, cfg).map_err(|e| match e {
        SolverError::NonConvergence { t, .. } => SolverError::NonConvergence {
            t,
            residual: last_norm,
        },
        other => other,
    })
}

/// Fallback step solve for the rare steps where the Newton iteration
/// stalls: the state-dependent activator lookup time `t - tau_a` is then
/// sweeping a high-curvature corner of the recorded channels (corners
/// propagate from the grid start each time a delayed term switches from
/// pre-grid to recorded data), and the step map is only piecewise smooth
/// in that scalar.
///
/// With the lookup time pinned, the step is closed-form: the delayed
/// levels entering the state equations come from committed history, so
/// `(R, C)` follows from the frozen linear solve and only the provisional
/// channels need a short settle. The pinned lookup time is then the single
/// unknown, found by bisecting its defect `u - (t1 - tau_a(u))` over
/// `[t1 - 1/delta_A, t1]`, which brackets a root because the activator
/// delay lies in `(0, 1/delta_A]`.
fn rescue_dde_step(
    hist: &mut HistoryStore,
    y: ReducedState,
    t1: f64,
    variant: DelayVariant,
    p: &RateConstants,
    cfg: &SolverConfig,
) -> Result<(ReducedState, DelayedAux), SolverError> {
    let dt = cfg.dt;
    let warm = Sample {
        a_tau: hist.last(crate::history::Channel::ATau),
        a_s: hist.last(crate::history::Channel::AS),
        r: y.r,
        c: y.c,
    };
    let solve_at = |hist: &mut HistoryStore,
                        u: f64|
     -> Result<(f64, ReducedState, DelayedAux), SolverError> {
        let mut trial = y;
        let mut prov = warm;
        let mut aux = None;
        for _ in 0..12 {
            hist.set_provisional(prov);
            let a = delayed_aux_pinned(t1, trial.r, hist, variant, p, u)?;
            let next = frozen_step(&y, dt, &a, p);
            let settled = (next.r - trial.r).abs() <= 1e-13 * (1.0 + trial.r.abs())
                && (a.a_s_now - prov.a_s).abs() <= 1e-13 * (1.0 + prov.a_s.abs());
            trial = next;
            prov = Sample {
                a_tau: a.a_tau,
                a_s: a.a_s_now,
                r: trial.r,
                c: trial.c,
            };
            aux = Some(a);
            if settled {
                break;
            }
        }
        let aux = aux.expect("at least one settle pass runs");
        Ok((u - (t1 - aux.delays.a), trial, aux))
    };

    let mut lo = t1 - 1.0 / p.delta_a - 1e-9;
    let mut hi = t1;
    let (f_lo, ..) = solve_at(hist, lo)?;
    let (f_hi, ..) = solve_at(hist, hi)?;
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return Err(SolverError::NonConvergence {
            t: t1,
            residual: f_lo.abs().min(f_hi.abs()),
        });
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        let (f_mid, ..) = solve_at(hist, mid)?;
        if f_mid <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * (1.0 + t1.abs()) {
            break;
        }
    }
    let u = 0.5 * (lo + hi);
    let (_, trial, aux) = solve_at(hist, u)?;

    // The accepted state must satisfy the unpinned step equations.
    hist.set_provisional(Sample {
        a_tau: aux.a_tau,
        a_s: aux.a_s_now,
        r: trial.r,
        c: trial.c,
    });
    let check = delayed_aux_at(t1, trial.r, hist, variant, p)?;
    let d = delayed_derivative(&trial, &check, p);
    let g = [trial.r - y.r - dt * d.r, trial.c - y.c - dt * d.c];
    let norm = scaled_residual_norm(&g, &[trial.r, trial.c]);
    // The bisected solution may sit exactly on a corner; allow the defect
    // of one interpolation cell there.
    if norm > 1e3 * cfg.newton_tol {
        return Err(SolverError::NonConvergence {
            t: t1,
            residual: norm,
        });
    }
    Ok((trial, aux))
}

/// Solves the frozen-coefficient implicit Euler equations of the delayed
/// reduced system exactly. With the delayed levels held fixed the step
/// equations are linear in `(R, C)` and the system matrix has determinant
/// `>= 1`, so the solve never degenerates.
fn frozen_step(y0: &ReducedState, dt: f64, aux: &DelayedAux, p: &RateConstants) -> ReducedState {
    let a11 = 1.0 + dt * (p.gamma_c * aux.a_tau + p.delta_r);
    let a12 = -dt * p.delta_a;
    let a21 = -dt * p.gamma_c * aux.a_tau;
    let a22 = 1.0 + dt * p.delta_a;
    let b1 = y0.r + dt * p.beta_r * aux.m_r_tau;
    let b2 = y0.c;
    let det = a11 * a22 - a12 * a21;
    ReducedState {
        r: (b1 * a22 - a12 * b2) / det,
        c: (a11 * b2 - a21 * b1) / det,
    }
}

/// Integrates a delayed reduction by the method of steps.
///
/// The initial history is the reference initial condition extended to all
/// `t <= 0` (`A`, `R`, `C` absent); the auxiliary activator channel is
/// frozen at its `t = 0` evaluation. Each step solves the two-dimensional
/// implicit Euler equations by a damped iteration whose inner linear part
/// is solved exactly; delayed lookups landing inside the current step
/// interpolate against the iterate's provisional endpoint values. After
/// convergence the endpoint channels are committed to the history.
pub fn integrate_dde(
    variant: DelayVariant,
    p: &RateConstants,
    cfg: &SolverConfig,
) -> Result<DdeSolution, SolverError> {
    cfg.validate()?;
    let n_steps = cfg.n_steps();

    // The t = 0 evaluation of the chain does not read the auxiliary
    // channel, so it can seed that channel's pre-grid constant.
    let mut hist = HistoryStore::new(0.0, cfg.dt, Sample::default());
    let aux0 = delayed_aux_at(0.0, 0.0, &hist, variant, p)?;
    let pre0 = Sample {
        a_tau: 0.0,
        a_s: aux0.a_s_now,
        r: 0.0,
        c: 0.0,
    };
    hist = HistoryStore::new(0.0, cfg.dt, pre0);
    hist.push(pre0);

    let meta = TrajectoryMeta {
        system: system_for(variant),
        cfg: *cfg,
    };
    let mut traj = Trajectory::with_capacity(
        REDUCED_COMPONENTS.to_vec(),
        meta,
        n_steps / cfg.stride + 2,
    );
    traj.push_row(0.0, &[0.0, 0.0]);

    let mut y = ReducedState { r: 0.0, c: 0.0 };
    for n in 0..n_steps {
        let t1 = (n + 1) as f64 * cfg.dt;
        let (y_new, aux) = dde_step(&mut hist, y, t1, variant, p, cfg)?;
        if !y_new.r.is_finite() || !y_new.c.is_finite() {
            return Err(SolverError::NonFinite { t: t1 });
        }
        debug_assert!(aux.delays.all_positive());
        hist.push(Sample {
            a_tau: aux.a_tau,
            a_s: aux.a_s_now,
            r: y_new.r,
            c: y_new.c,
        });
        y = y_new;
        if (n + 1) % cfg.stride == 0 {
            traj.push_row(t1, &[y.r, y.c]);
        }
    }

    Ok(DdeSolution {
        trajectory: traj,
        history: hist,
        variant,
    })
}
