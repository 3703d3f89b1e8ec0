//! Period extraction, trajectory alignment, relative-error metrics, and
//! reconstruction of all nine components from reduced runs.

use thiserror::Error;

use crate::delay::delayed_aux_at;
use crate::model::{
    a_tilde_s, steady_da, steady_dr, steady_ma, steady_mr, RateConstants, FULL_COMPONENTS,
};
use crate::solver::{
    integrate_dde, integrate_full, integrate_reduced, DdeSolution, SolverConfig, SolverError,
    SystemId, Trajectory,
};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no sustained oscillation: found {found} usable peaks, need at least 4")]
    NoOscillation { found: usize },
    #[error("irregular period: peak spacings spread {rel_spread:.3e} exceeds 1e-2")]
    IrregularPeriod { rel_spread: f64 },
    #[error("trajectory has no component named '{name}'")]
    MissingChannel { name: String },
    #[error("window [{a}, {b}] h is not covered by the common grid [{t_first}, {t_last}] h")]
    WindowOutOfRange {
        a: f64,
        b: f64,
        t_first: f64,
        t_last: f64,
    },
    #[error("trajectories have mismatched shapes ({left} vs {right} components)")]
    ShapeMismatch { left: usize, right: usize },
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Period measured from refined peak times of one component.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodEstimate {
    /// Mean spacing of successive peaks, h.
    pub period: f64,
    /// Refined peak times, strictly increasing, h.
    pub peak_times: Vec<f64>,
    /// Number of peak-to-peak intervals averaged.
    pub n_cycles_used: usize,
}

/// Periods and relative errors of one approximation against the original
/// system.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub system: SystemId,
    pub p_orig: f64,
    pub p_approx: f64,
    /// `|p_orig - p_approx| / p_orig`.
    pub rel_err_period: f64,
    /// Relative vector L2 distance over one period window after rescaling
    /// and peak alignment.
    pub rel_err_l2: f64,
    /// The comparison window `(a, b)` with `b - a = p_orig`, h.
    pub window: (f64, f64),
}

/// The four approximation reports sharing one reference period.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub p_orig: f64,
    pub reports: Vec<ErrorReport>,
}

/// Finds the oscillation period of one component.
///
/// Strict discrete maxima after `skip` are refined by three-point parabolic
/// interpolation; maxima below the post-`skip` midrange are ignored so
/// small wiggles on the rising flank do not register. The period is the
/// mean spacing of the surviving peaks; at least four peaks (three full
/// cycles) are required and their spacings must agree to 1% relative
/// spread.
pub fn detect_period(
    traj: &Trajectory,
    component: &str,
    skip: f64,
) -> Result<PeriodEstimate, AnalysisError> {
    let idx = traj
        .component_index(component)
        .ok_or_else(|| AnalysisError::MissingChannel {
            name: component.to_string(),
        })?;
    let times = traj.times();
    let n = times.len();

    let start = times.partition_point(|&t| t < skip);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in start..n {
        let v = traj.row(i)[idx];
        lo = lo.min(v);
        hi = hi.max(v);
    }
    let threshold = lo + 0.5 * (hi - lo);

    let mut peak_times = Vec::new();
    for i in start.max(1)..n.saturating_sub(1) {
        let (ym, y0, yp) = (
            traj.row(i - 1)[idx],
            traj.row(i)[idx],
            traj.row(i + 1)[idx],
        );
        if y0 > ym && y0 > yp && y0 >= threshold {
            let denom = ym - 2.0 * y0 + yp;
            let offset = if denom < 0.0 {
                0.5 * (ym - yp) / denom
            } else {
                0.0
            };
            peak_times.push(times[i] + offset * (times[i + 1] - times[i]));
        }
    }

    if peak_times.len() < 4 {
        return Err(AnalysisError::NoOscillation {
            found: peak_times.len(),
        });
    }
    let spacings: Vec<f64> = peak_times.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = spacings.iter().sum::<f64>() / spacings.len() as f64;
    let var = spacings.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
        / spacings.len() as f64;
    let rel_spread = var.sqrt() / mean;
    if rel_spread > 0.01 {
        return Err(AnalysisError::IrregularPeriod { rel_spread });
    }
    Ok(PeriodEstimate {
        period: mean,
        n_cycles_used: spacings.len(),
        peak_times,
    })
}

/// Expands a delay-free reduced run to all nine components through the
/// instantaneous steady-state maps.
pub fn reconstruct_qss(
    traj: &Trajectory,
    p: &RateConstants,
) -> Result<Trajectory, AnalysisError> {
    let r_idx = traj
        .component_index("R")
        .ok_or_else(|| AnalysisError::MissingChannel { name: "R".into() })?;
    let c_idx = traj
        .component_index("C")
        .ok_or_else(|| AnalysisError::MissingChannel { name: "C".into() })?;

    let mut out = Trajectory::with_capacity(FULL_COMPONENTS.to_vec(), traj.meta, traj.len());
    for i in 0..traj.len() {
        let row = traj.row(i);
        let (r, c) = (row[r_idx], row[c_idx]);
        let a = a_tilde_s(r, p);
        let d_a = steady_da(a, p);
        let d_r = steady_dr(a, p);
        out.push_row(
            traj.time(i),
            &[
                d_a,
                1.0 - d_a,
                d_r,
                1.0 - d_r,
                steady_ma(a, p),
                steady_mr(a, p),
                a,
                r,
                c,
            ],
        );
    }
    Ok(out)
}

/// Expands a delayed-reduction run to all nine components by re-evaluating
/// the delayed steady-state chain against the recorded history.
pub fn reconstruct_delayed(
    sol: &DdeSolution,
    p: &RateConstants,
) -> Result<Trajectory, AnalysisError> {
    let traj = &sol.trajectory;
    let r_idx = traj
        .component_index("R")
        .ok_or_else(|| AnalysisError::MissingChannel { name: "R".into() })?;
    let c_idx = traj
        .component_index("C")
        .ok_or_else(|| AnalysisError::MissingChannel { name: "C".into() })?;

    let mut out = Trajectory::with_capacity(FULL_COMPONENTS.to_vec(), traj.meta, traj.len());
    for i in 0..traj.len() {
        let row = traj.row(i);
        let (r, c) = (row[r_idx], row[c_idx]);
        let aux = delayed_aux_at(traj.time(i), r, &sol.history, sol.variant, p)
            .map_err(SolverError::from)?;
        out.push_row(
            traj.time(i),
            &[
                aux.d_a_tau,
                1.0 - aux.d_a_tau,
                aux.d_r_tau,
                1.0 - aux.d_r_tau,
                aux.m_a_tau,
                aux.m_r_tau,
                aux.a_tau,
                r,
                c,
            ],
        );
    }
    Ok(out)
}

/// Rescales and shifts `g` so its period matches `p_orig` and a reference
/// repressor peak coincides with the corresponding peak of `f`, then
/// resamples onto `f`'s grid.
///
/// The reference peak of `f` is its first peak after `skip`; the matching
/// peak of the rescaled `g` is the one nearest in time. Returns the
/// overlap of the shifted signal with `f`'s grid.
pub fn align_scale(
    f: &Trajectory,
    g: &Trajectory,
    p_orig: f64,
    p_approx: f64,
    skip: f64,
) -> Result<Trajectory, AnalysisError> {
    if f.ncomp() != g.ncomp() {
        return Err(AnalysisError::ShapeMismatch {
            left: f.ncomp(),
            right: g.ncomp(),
        });
    }
    let est_f = detect_period(f, "R", skip)?;
    let est_g = detect_period(g, "R", skip)?;
    let scale = p_orig / p_approx;

    let ref_f = est_f.peak_times[0];
    let ref_g = est_g
        .peak_times
        .iter()
        .map(|t| t * scale)
        .min_by(|a, b| {
            (a - ref_f)
                .abs()
                .partial_cmp(&(b - ref_f).abs())
                .expect("peak times are finite")
        })
        .expect("detect_period guarantees peaks");
    let shift = ref_f - ref_g;

    // The rescaled signal keeps a uniform grid.
    let g_t0 = g.time(0) * scale + shift;
    let g_h = g.spacing() * scale;
    let g_last = g.time(g.len() - 1) * scale + shift;

    let mut out = Trajectory::with_capacity(g.components().to_vec(), g.meta, f.len());
    for j in 0..f.len() {
        let t = f.time(j);
        if t < g_t0 - 1e-9 || t > g_last + 1e-9 {
            continue;
        }
        let u = ((t - g_t0) / g_h).clamp(0.0, (g.len() - 1) as f64);
        let i = (u.floor() as usize).min(g.len() - 2);
        let frac = u - i as f64;
        let (lo, hi) = (g.row(i), g.row(i + 1));
        let row: Vec<f64> = lo
            .iter()
            .zip(hi)
            .map(|(l, h)| l + frac * (h - l))
            .collect();
        out.push_row(t, &row);
    }
    if out.is_empty() {
        return Err(AnalysisError::WindowOutOfRange {
            a: g_t0,
            b: g_last,
            t_first: f.time(0),
            t_last: f.time(f.len() - 1),
        });
    }
    Ok(out)
}

/// Relative vector L2 distance between two trajectories over `[a, b]`,
/// by the trapezoid rule on the common sample grid.
pub fn rel_err_l2(
    f: &Trajectory,
    g: &Trajectory,
    window: (f64, f64),
) -> Result<f64, AnalysisError> {
    if f.ncomp() != g.ncomp() {
        return Err(AnalysisError::ShapeMismatch {
            left: f.ncomp(),
            right: g.ncomp(),
        });
    }
    let (a, b) = window;
    let out_of_range = || AnalysisError::WindowOutOfRange {
        a,
        b,
        t_first: f.time(0).max(g.time(0)),
        t_last: f.time(f.len() - 1).min(g.time(g.len() - 1)),
    };

    if f.is_empty()
        || g.is_empty()
        || f.time(0) > a + 1e-9
        || f.time(f.len() - 1) < b - 1e-9
        || g.time(0) > a + 1e-9
        || g.time(g.len() - 1) < b - 1e-9
    {
        return Err(out_of_range());
    }
    let f_start = f.times().partition_point(|&t| t < a - 1e-9);
    let f_end = f.times().partition_point(|&t| t <= b + 1e-9);
    if f_end - f_start < 2 {
        return Err(out_of_range());
    }
    // Locate the same window in g, which must share the grid.
    let h = f.time(f_start + 1) - f.time(f_start);
    let g_offset_f = (f.time(f_start) - g.time(0)) / h;
    let g_offset = g_offset_f.round();
    if (g_offset_f - g_offset).abs() > 1e-6 || g_offset < 0.0 {
        return Err(out_of_range());
    }
    let g_offset = g_offset as usize;
    if g_offset + (f_end - f_start) > g.len() {
        return Err(out_of_range());
    }

    let mut num = 0.0;
    let mut den = 0.0;
    let count = f_end - f_start;
    for k in 0..count {
        let fr = f.row(f_start + k);
        let gr = g.row(g_offset + k);
        let w = if k == 0 || k == count - 1 { 0.5 } else { 1.0 };
        let mut diff2 = 0.0;
        let mut ref2 = 0.0;
        for (fv, gv) in fr.iter().zip(gr) {
            diff2 += (fv - gv) * (fv - gv);
            ref2 += fv * fv;
        }
        num += w * diff2;
        den += w * ref2;
    }
    if den == 0.0 {
        return Ok(if num == 0.0 { 0.0 } else { f64::INFINITY });
    }
    Ok((num / den).sqrt())
}

/// Simulates one system and returns all nine components (reduced systems
/// are expanded through their reconstruction).
pub fn simulate_nine(
    system: SystemId,
    p: &RateConstants,
    cfg: &SolverConfig,
) -> Result<Trajectory, AnalysisError> {
    match system {
        SystemId::Original => Ok(integrate_full(p, cfg)?),
        SystemId::Qss => reconstruct_qss(&integrate_reduced(p, cfg)?, p),
        _ => {
            let variant = system.delay_variant().expect("delayed system");
            reconstruct_delayed(&integrate_dde(variant, p, cfg)?, p)
        }
    }
}

/// Builds one approximation's report against an already-simulated original
/// trajectory.
pub fn error_report(
    f: &Trajectory,
    est_f: &PeriodEstimate,
    g: &Trajectory,
    skip: f64,
) -> Result<ErrorReport, AnalysisError> {
    let est_g = detect_period(g, "R", skip)?;
    let p_orig = est_f.period;
    let p_approx = est_g.period;
    let g_tilde = align_scale(f, g, p_orig, p_approx, skip)?;
    let a = est_f.peak_times[0];
    let window = (a, a + p_orig);
    let l2 = rel_err_l2(f, &g_tilde, window)?;
    Ok(ErrorReport {
        system: g.meta.system,
        p_orig,
        p_approx,
        rel_err_period: (p_orig - p_approx).abs() / p_orig,
        rel_err_l2: l2,
        window,
    })
}

/// Runs all five systems with the given settings and reports each
/// approximation against the original.
pub fn build_table1(
    p: &RateConstants,
    cfg: &SolverConfig,
    skip: f64,
) -> Result<Table1, AnalysisError> {
    let f = simulate_nine(SystemId::Original, p, cfg)?;
    let est_f = detect_period(&f, "R", skip)?;
    let mut reports = Vec::with_capacity(SystemId::APPROXIMATIONS.len());
    for sys in SystemId::APPROXIMATIONS {
        let g = simulate_nine(sys, p, cfg)?;
        reports.push(error_report(&f, &est_f, &g, skip)?);
    }
    Ok(Table1 {
        p_orig: est_f.period,
        reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::TrajectoryMeta;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn synthetic(
        system: SystemId,
        t_end: f64,
        h: f64,
        mut f: impl FnMut(f64) -> f64,
    ) -> Trajectory {
        let cfg = SolverConfig {
            dt: h,
            t_end,
            stride: 1,
            ..SolverConfig::default()
        };
        let meta = TrajectoryMeta { system, cfg };
        let n = (t_end / h).round() as usize;
        let mut traj = Trajectory::with_capacity(vec!["R"], meta, n + 1);
        for i in 0..=n {
            let t = i as f64 * h;
            traj.push_row(t, &[f(t)]);
        }
        traj
    }

    fn sine(period: f64) -> impl FnMut(f64) -> f64 {
        move |t| (2.0 * std::f64::consts::PI * t / period).sin()
    }

    #[test]
    fn detects_the_period_of_a_pure_sine() {
        let traj = synthetic(SystemId::Original, 300.0, 0.01, sine(25.0));
        let est = detect_period(&traj, "R", 30.0).unwrap();
        assert!((est.period - 25.0).abs() < 1e-3, "period {}", est.period);
        assert!(est.n_cycles_used >= 3);
        assert!(est.peak_times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn period_is_invariant_under_scaling_and_sample_shifts() {
        let base = synthetic(SystemId::Original, 300.0, 0.01, sine(25.0));
        let est = detect_period(&base, "R", 30.0).unwrap();

        let scaled = synthetic(SystemId::Original, 300.0, 0.01, |t| {
            7.5 * sine(25.0)(t) + 3.0
        });
        let est_scaled = detect_period(&scaled, "R", 30.0).unwrap();
        assert_abs_diff_eq!(est.period, est_scaled.period, epsilon = 1e-9);

        // Translation by a whole number of samples.
        let shifted = synthetic(SystemId::Original, 300.0, 0.01, |t| sine(25.0)(t - 0.5));
        let est_shifted = detect_period(&shifted, "R", 30.0).unwrap();
        assert_abs_diff_eq!(est.period, est_shifted.period, epsilon = 1e-6);
    }

    #[test]
    fn flat_and_irregular_signals_are_rejected() {
        let flat = synthetic(SystemId::Original, 100.0, 0.01, |_| 1.0);
        assert!(matches!(
            detect_period(&flat, "R", 10.0),
            Err(AnalysisError::NoOscillation { .. })
        ));

        // Chirp: spacing shrinks with time.
        let chirp = synthetic(SystemId::Original, 200.0, 0.01, |t| {
            (2.0 * std::f64::consts::PI * (t / 25.0 + t * t / 4000.0)).sin()
        });
        assert!(matches!(
            detect_period(&chirp, "R", 10.0),
            Err(AnalysisError::IrregularPeriod { .. })
        ));

        let missing = synthetic(SystemId::Original, 100.0, 0.01, sine(25.0));
        assert!(matches!(
            detect_period(&missing, "Q", 10.0),
            Err(AnalysisError::MissingChannel { .. })
        ));
    }

    #[test]
    fn align_with_itself_is_the_identity() {
        let f = synthetic(SystemId::Original, 200.0, 0.01, sine(25.0));
        let est = detect_period(&f, "R", 30.0).unwrap();
        let aligned = align_scale(&f, &f, est.period, est.period, 30.0).unwrap();
        let offset = f
            .times()
            .partition_point(|&t| t < aligned.time(0) - 1e-12);
        for i in (0..aligned.len()).step_by(577) {
            let a = aligned.row(i)[0];
            let b = f.row(offset + i)[0];
            assert!((a - b).abs() <= 1e-12, "mismatch at sample {i}");
        }
    }

    #[test]
    fn align_removes_a_pure_shift() {
        let f = synthetic(SystemId::Original, 200.0, 0.01, sine(25.0));
        let g = synthetic(SystemId::Qss, 200.0, 0.01, |t| sine(25.0)(t - 3.0));
        let est_f = detect_period(&f, "R", 30.0).unwrap();
        let g_tilde = align_scale(&f, &g, est_f.period, est_f.period, 30.0).unwrap();
        let a = est_f.peak_times[0];
        let err = rel_err_l2(&f, &g_tilde, (a, a + est_f.period)).unwrap();
        assert!(err < 1e-4, "residual after de-shifting: {err}");
    }

    #[test]
    fn align_rescales_the_period() {
        let f = synthetic(SystemId::Original, 300.0, 0.01, sine(25.0));
        let g = synthetic(SystemId::Qss, 300.0, 0.01, sine(20.0));
        let g_tilde = align_scale(&f, &g, 25.0, 20.0, 30.0).unwrap();
        let est = detect_period(&g_tilde, "R", 40.0).unwrap();
        assert!(
            (est.period - 25.0).abs() < 0.01,
            "rescaled period {}",
            est.period
        );
    }

    #[test]
    fn l2_error_basic_properties() {
        let f = synthetic(SystemId::Original, 120.0, 0.01, sine(25.0));
        let zero = synthetic(SystemId::Qss, 120.0, 0.01, |_| 0.0);
        let window = (40.0, 65.0);
        assert_eq!(rel_err_l2(&f, &f, window).unwrap(), 0.0);
        assert_relative_eq!(
            rel_err_l2(&f, &zero, window).unwrap(),
            1.0,
            max_relative = 1e-12
        );

        // Common scaling leaves the ratio unchanged.
        let f2 = synthetic(SystemId::Original, 120.0, 0.01, |t| 3.0 * sine(25.0)(t));
        let g = synthetic(SystemId::Qss, 120.0, 0.01, |t| sine(24.0)(t));
        let g2 = synthetic(SystemId::Qss, 120.0, 0.01, |t| 3.0 * sine(24.0)(t));
        let e1 = rel_err_l2(&f, &g, window).unwrap();
        let e2 = rel_err_l2(&f2, &g2, window).unwrap();
        assert_relative_eq!(e1, e2, max_relative = 1e-12);
        assert!(e1 > 0.0);

        assert!(matches!(
            rel_err_l2(&f, &g, (110.0, 135.0)),
            Err(AnalysisError::WindowOutOfRange { .. })
        ));
    }

    #[test]
    fn qss_reconstruction_composes_the_steady_state_maps() {
        let p = RateConstants::default();
        let reduced = synthetic(SystemId::Qss, 1.0, 0.1, |_| 0.0);
        // Single channel "R" is not enough: reconstruction needs C too.
        assert!(matches!(
            reconstruct_qss(&reduced, &p),
            Err(AnalysisError::MissingChannel { .. })
        ));

        let cfg = SolverConfig {
            dt: 0.1,
            t_end: 1.0,
            stride: 1,
            ..SolverConfig::default()
        };
        let meta = TrajectoryMeta {
            system: SystemId::Qss,
            cfg,
        };
        let mut traj = Trajectory::with_capacity(vec!["R", "C"], meta, 11);
        for i in 0..=10 {
            traj.push_row(i as f64 * 0.1, &[0.0, 0.0]);
        }
        let nine = reconstruct_qss(&traj, &p).unwrap();
        assert_eq!(nine.components(), FULL_COMPONENTS);
        let a0 = a_tilde_s(0.0, &p);
        for i in 0..nine.len() {
            let row = nine.row(i);
            assert_relative_eq!(row[0], steady_da(a0, &p), max_relative = 1e-14);
            assert_relative_eq!(row[1], 1.0 - steady_da(a0, &p), max_relative = 1e-12);
            assert_relative_eq!(row[4], steady_ma(a0, &p), max_relative = 1e-14);
            assert_relative_eq!(row[6], a0, max_relative = 1e-14);
            assert_eq!(row[7], 0.0);
        }
    }

    #[test]
    fn printed_percentages_are_consistent_with_printed_periods() {
        // Reference table rows: rounded periods vs rounded percentages must
        // agree to within rounding slack (0.6 percentage points).
        let p_orig = 25.6;
        for (p_approx, printed_pct) in [(17.9, 29.8), (25.1, 1.65), (25.3, 1.02), (26.1, 2.28)] {
            let recomputed = 100.0 * f64::abs(p_orig - p_approx) / p_orig;
            assert!(
                (recomputed - printed_pct).abs() <= 0.6,
                "{p_approx}: {recomputed} vs {printed_pct}"
            );
        }
    }
}
