//! The nine-species mass-action model of an activator–repressor circadian
//! oscillator, its conservation relations, and the algebraic steady-state
//! maps used by the quasi-steady-state reductions.
//!
//! Species: two genes with inactive/activated forms (`D_A`/`D_A'`,
//! `D_R`/`D_R'`), the two mRNAs (`M_A`, `M_R`), the activator `A`, the
//! repressor `R`, and their complex `C`. Copy numbers are modelled as
//! continuous non-negative reals; rates are per hour.

use thiserror::Error;

/// Component order used by 9-component trajectories and CSV output.
pub const FULL_COMPONENTS: [&str; 9] =
    ["D_A", "D_Ap", "D_R", "D_Rp", "M_A", "M_R", "A", "R", "C"];

/// Component order used by raw reduced trajectories.
pub const REDUCED_COMPONENTS: [&str; 2] = ["R", "C"];

/// Rejected rate-constant value.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("rate constant {name} must be strictly positive, got {value}")]
pub struct InvalidRate {
    pub name: &'static str,
    pub value: f64,
}

/// The fifteen kinetic parameters of the model.
///
/// Transcription (`alpha_*`), translation (`beta_*`), gene
/// activation/deactivation (`gamma_A`/`gamma_R`, `theta_A`/`theta_R`),
/// complex formation (`gamma_C`) and degradation (`delta_*`). Units are
/// h⁻¹ except the bimolecular rates `gamma_*`, which are Mol⁻¹h⁻¹.
/// `Default` yields the reference parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    pub alpha_a: f64,
    pub alpha_a_p: f64,
    pub alpha_r: f64,
    pub alpha_r_p: f64,
    pub beta_a: f64,
    pub beta_r: f64,
    pub gamma_a: f64,
    pub gamma_r: f64,
    pub gamma_c: f64,
    pub delta_a: f64,
    pub delta_r: f64,
    pub delta_ma: f64,
    pub delta_mr: f64,
    pub theta_a: f64,
    pub theta_r: f64,
}

impl Default for RateConstants {
    fn default() -> Self {
        Self {
            alpha_a: 50.0,
            alpha_a_p: 500.0,
            alpha_r: 0.01,
            alpha_r_p: 50.0,
            beta_a: 50.0,
            beta_r: 5.0,
            gamma_a: 1.0,
            gamma_r: 1.0,
            gamma_c: 2.0,
            delta_a: 1.0,
            delta_r: 0.2,
            delta_ma: 10.0,
            delta_mr: 0.5,
            theta_a: 50.0,
            theta_r: 100.0,
        }
    }
}

impl RateConstants {
    /// Checks that every rate constant is strictly positive and finite.
    pub fn validate(&self) -> Result<(), InvalidRate> {
        for (name, value) in self.fields() {
            if value <= 0.0 || !value.is_finite() {
                return Err(InvalidRate { name, value });
            }
        }
        Ok(())
    }

    /// Name/value pairs in declaration order.
    pub fn fields(&self) -> [(&'static str, f64); 15] {
        [
            ("alpha_A", self.alpha_a),
            ("alpha_A_p", self.alpha_a_p),
            ("alpha_R", self.alpha_r),
            ("alpha_R_p", self.alpha_r_p),
            ("beta_A", self.beta_a),
            ("beta_R", self.beta_r),
            ("gamma_A", self.gamma_a),
            ("gamma_R", self.gamma_r),
            ("gamma_C", self.gamma_c),
            ("delta_A", self.delta_a),
            ("delta_R", self.delta_r),
            ("delta_MA", self.delta_ma),
            ("delta_MR", self.delta_mr),
            ("theta_A", self.theta_a),
            ("theta_R", self.theta_r),
        ]
    }
}

/// Copy numbers of all nine species.
///
/// With the reference initial condition the gene totals are conserved:
/// `D_A + D_A' = 1` and `D_R + D_R' = 1` along the exact flow.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FullState {
    pub d_a: f64,
    pub d_a_p: f64,
    pub d_r: f64,
    pub d_r_p: f64,
    pub m_a: f64,
    pub m_r: f64,
    pub a: f64,
    pub r: f64,
    pub c: f64,
}

impl FullState {
    /// Reference initial condition: one inactive copy of each gene,
    /// everything else absent.
    pub fn initial() -> Self {
        Self {
            d_a: 1.0,
            d_r: 1.0,
            ..Self::default()
        }
    }

    pub fn to_array(self) -> [f64; 9] {
        [
            self.d_a, self.d_a_p, self.d_r, self.d_r_p, self.m_a, self.m_r, self.a, self.r,
            self.c,
        ]
    }

    pub fn from_array(y: [f64; 9]) -> Self {
        Self {
            d_a: y[0],
            d_a_p: y[1],
            d_r: y[2],
            d_r_p: y[3],
            m_a: y[4],
            m_r: y[5],
            a: y[6],
            r: y[7],
            c: y[8],
        }
    }
}

/// The two slow variables retained by every reduction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReducedState {
    pub r: f64,
    pub c: f64,
}

impl ReducedState {
    pub fn to_array(self) -> [f64; 2] {
        [self.r, self.c]
    }

    pub fn from_array(y: [f64; 2]) -> Self {
        Self { r: y[0], c: y[1] }
    }
}

/// Time derivative of the full system.
///
/// Evaluates the nine mass-action rate equations exactly as written; no
/// clamping is applied, so transiently negative inputs produce the
/// corresponding algebraic derivative.
pub fn full_rhs(s: &FullState, p: &RateConstants) -> FullState {
    let gene_a_activation = p.gamma_a * s.d_a * s.a;
    let gene_r_activation = p.gamma_r * s.d_r * s.a;
    let complex_formation = p.gamma_c * s.a * s.r;
    FullState {
        d_a: p.theta_a * s.d_a_p - gene_a_activation,
        d_a_p: -p.theta_a * s.d_a_p + gene_a_activation,
        d_r: p.theta_r * s.d_r_p - gene_r_activation,
        d_r_p: -p.theta_r * s.d_r_p + gene_r_activation,
        m_a: p.alpha_a_p * s.d_a_p + p.alpha_a * s.d_a - p.delta_ma * s.m_a,
        m_r: p.alpha_r_p * s.d_r_p + p.alpha_r * s.d_r - p.delta_mr * s.m_r,
        a: p.beta_a * s.m_a + p.theta_a * s.d_a_p + p.theta_r * s.d_r_p
            - s.a * (p.gamma_a * s.d_a + p.gamma_r * s.d_r + p.gamma_c * s.r + p.delta_a),
        r: p.beta_r * s.m_r - complex_formation + p.delta_a * s.c - p.delta_r * s.r,
        c: complex_formation - p.delta_a * s.c,
    }
}

/// Steady state of the activator gene as a function of the activator level.
pub fn steady_da(a: f64, p: &RateConstants) -> f64 {
    p.theta_a / (p.theta_a + p.gamma_a * a)
}

/// Steady state of the repressor gene as a function of the activator level.
pub fn steady_dr(a: f64, p: &RateConstants) -> f64 {
    p.theta_r / (p.theta_r + p.gamma_r * a)
}

/// Steady state of the activator mRNA as a function of the activator level.
pub fn steady_ma(a: f64, p: &RateConstants) -> f64 {
    p.alpha_a_p / p.delta_ma
        + p.theta_a * (p.alpha_a - p.alpha_a_p) / (p.delta_ma * (p.theta_a + p.gamma_a * a))
}

/// Steady state of the repressor mRNA as a function of the activator level.
pub fn steady_mr(a: f64, p: &RateConstants) -> f64 {
    p.alpha_r_p / p.delta_mr
        + p.theta_r * (p.alpha_r - p.alpha_r_p) / (p.delta_mr * (p.theta_r + p.gamma_r * a))
}

/// Quasi-steady state of the activator as a function of the repressor level.
///
/// Positive root of `A² - (alpha_A'·rho - K_d)·A - alpha_A·rho·K_d = 0`
/// with `rho(R) = beta_A / (delta_MA (gamma_C R + delta_A))` and
/// `K_d = theta_A / gamma_A`. The discriminant strictly exceeds the square
/// of the linear coefficient, so the root is positive for every `R >= 0`.
pub fn a_tilde_s(r: f64, p: &RateConstants) -> f64 {
    let rho = p.beta_a / (p.delta_ma * (p.gamma_c * r + p.delta_a));
    let k_d = p.theta_a / p.gamma_a;
    let half_b = 0.5 * (p.alpha_a_p * rho - k_d);
    half_b + (half_b * half_b + p.alpha_a * rho * k_d).sqrt()
}

/// Time derivative of the delay-free reduced system.
///
/// The fast species are replaced by their steady states evaluated at
/// `a_tilde_s(R)`, leaving two equations for the repressor and the complex.
pub fn reduced_rhs(s: &ReducedState, p: &RateConstants) -> ReducedState {
    let a = a_tilde_s(s.r, p);
    let complex_formation = p.gamma_c * a * s.r;
    ReducedState {
        r: p.beta_r * steady_mr(a, p) - complex_formation + p.delta_a * s.c - p.delta_r * s.r,
        c: complex_formation - p.delta_a * s.c,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::{Rng, SeedableRng};

    #[test]
    fn default_rates_match_reference_values() {
        let p = RateConstants::default();
        assert_eq!(p.alpha_a, 50.0);
        assert_eq!(p.alpha_a_p, 500.0);
        assert_eq!(p.alpha_r, 0.01);
        assert_eq!(p.alpha_r_p, 50.0);
        assert_eq!(p.beta_a, 50.0);
        assert_eq!(p.beta_r, 5.0);
        assert_eq!(p.gamma_a, 1.0);
        assert_eq!(p.gamma_r, 1.0);
        assert_eq!(p.gamma_c, 2.0);
        assert_eq!(p.delta_a, 1.0);
        assert_eq!(p.delta_r, 0.2);
        assert_eq!(p.delta_ma, 10.0);
        assert_eq!(p.delta_mr, 0.5);
        assert_eq!(p.theta_a, 50.0);
        assert_eq!(p.theta_r, 100.0);
        assert!(p.validate().is_ok());
    }

    #[test]
    fn validate_rejects_nonpositive_rates() {
        let mut p = RateConstants {
            delta_ma: -1.0,
            ..RateConstants::default()
        };
        let err = p.validate().unwrap_err();
        assert_eq!(err.name, "delta_MA");
        p.delta_ma = 0.0;
        assert!(p.validate().is_err());
        p.delta_ma = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rhs_at_initial_condition() {
        let p = RateConstants::default();
        let d = full_rhs(&FullState::initial(), &p);
        // A = 0 kills every bilinear term; only transcription off the
        // inactive genes remains.
        assert_eq!(d.d_a, 0.0);
        assert_eq!(d.d_a_p, 0.0);
        assert_eq!(d.m_a, 50.0);
        assert_eq!(d.m_r, 0.01);
        assert_eq!(d.a, 0.0);
        assert_eq!(d.r, 0.0);
        assert_eq!(d.c, 0.0);
    }

    #[test]
    fn rhs_with_zero_activator_leaves_only_gene_reactivation() {
        let p = RateConstants::default();
        let mut s = FullState::initial();
        s.d_a = 0.3;
        s.d_a_p = 0.7;
        s.a = 0.0;
        let d = full_rhs(&s, &p);
        assert_eq!(d.d_a, p.theta_a * 0.7);
        assert_eq!(d.d_a_p, -p.theta_a * 0.7);
    }

    #[test]
    fn rhs_hand_evaluated_midpoint_state() {
        let p = RateConstants::default();
        let s = FullState {
            d_a: 0.5,
            d_a_p: 0.5,
            d_r: 0.5,
            d_r_p: 0.5,
            m_a: 1.0,
            m_r: 1.0,
            a: 1.0,
            r: 1.0,
            c: 1.0,
        };
        let d = full_rhs(&s, &p);
        // Each line evaluated by hand from the rate equations:
        assert_abs_diff_eq!(d.d_a, 50.0 * 0.5 - 1.0 * 0.5 * 1.0); // 24.5
        assert_abs_diff_eq!(d.d_a_p, -24.5);
        assert_abs_diff_eq!(d.d_r, 100.0 * 0.5 - 1.0 * 0.5 * 1.0); // 49.5
        assert_abs_diff_eq!(d.d_r_p, -49.5);
        assert_abs_diff_eq!(d.m_a, 500.0 * 0.5 + 50.0 * 0.5 - 10.0); // 265
        assert_abs_diff_eq!(d.m_r, 50.0 * 0.5 + 0.01 * 0.5 - 0.5); // 24.505
        assert_abs_diff_eq!(d.a, 50.0 + 25.0 + 50.0 - (0.5 + 0.5 + 2.0 + 1.0)); // 121
        assert_abs_diff_eq!(d.r, 5.0 - 2.0 + 1.0 - 0.2); // 3.8
        assert_abs_diff_eq!(d.c, 2.0 - 1.0); // 1
    }

    #[test]
    fn gene_totals_are_conserved_by_the_rhs() {
        let p = RateConstants::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        for _ in 0..500 {
            let s = FullState {
                d_a: rng.random_range(0.0..1.0),
                d_a_p: rng.random_range(0.0..1.0),
                d_r: rng.random_range(0.0..1.0),
                d_r_p: rng.random_range(0.0..1.0),
                m_a: rng.random_range(0.0..50.0),
                m_r: rng.random_range(0.0..100.0),
                a: rng.random_range(0.0..2500.0),
                r: rng.random_range(0.0..2000.0),
                c: rng.random_range(0.0..2000.0),
            };
            let d = full_rhs(&s, &p);
            // The activation fluxes cancel exactly, to round-off.
            assert_abs_diff_eq!(d.d_a + d.d_a_p, 0.0, epsilon = 1e-12 * d.d_a.abs().max(1.0));
            assert_abs_diff_eq!(d.d_r + d.d_r_p, 0.0, epsilon = 1e-12 * d.d_r.abs().max(1.0));
        }
    }

    #[test]
    fn steady_maps_at_zero_activator() {
        let p = RateConstants::default();
        assert_eq!(steady_da(0.0, &p), 1.0);
        assert_eq!(steady_dr(0.0, &p), 1.0);
        // The terms telescope to alpha/delta at A = 0. The repressor value
        // comes out of `100 - 99.98`, so round-off is magnified.
        assert_relative_eq!(steady_ma(0.0, &p), 5.0, max_relative = 1e-14);
        assert_relative_eq!(steady_mr(0.0, &p), 0.02, max_relative = 1e-11);
    }

    #[test]
    fn steady_ma_hand_evaluated_at_fifty() {
        let p = RateConstants::default();
        // theta_A/(theta_A + gamma_A*50) = 0.5; 500/10 + 50*(50-500)/(10*100) = 27.5
        assert_relative_eq!(steady_ma(50.0, &p), 27.5, max_relative = 1e-14);
    }

    #[test]
    fn steady_mrna_maps_increase_with_activator() {
        let p = RateConstants::default();
        let grid: Vec<f64> = (0..200).map(|i| i as f64 * 25.0).collect();
        for w in grid.windows(2) {
            assert!(steady_ma(w[1], &p) > steady_ma(w[0], &p));
            assert!(steady_mr(w[1], &p) > steady_mr(w[0], &p));
        }
    }

    #[test]
    fn activator_quasi_steady_state_at_zero_repressor() {
        let p = RateConstants::default();
        // rho(0) = 5, K_d = 50: root of A^2 - 2450 A - 50000 = 0.
        assert_relative_eq!(a_tilde_s(0.0, &p), 2455.0915, max_relative = 1e-7);
    }

    #[test]
    fn activator_quasi_steady_state_is_positive_and_decays() {
        let p = RateConstants::default();
        let mut prev = f64::INFINITY;
        for i in 0..60 {
            let r = (i as f64) * 100.0;
            let a = a_tilde_s(r, &p);
            assert!(a > 0.0);
            assert!(a < prev);
            prev = a;
        }
        // rho -> 0 as R -> infinity, so the root collapses towards zero.
        assert!(a_tilde_s(1e9, &p) < 1e-3);
    }

    #[test]
    fn activator_quasi_steady_state_solves_its_quadratic() {
        let p = RateConstants::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(42);
        for _ in 0..1000 {
            let r = rng.random_range(0.0..5000.0);
            let rho = p.beta_a / (p.delta_ma * (p.gamma_c * r + p.delta_a));
            let k_d = p.theta_a / p.gamma_a;
            let a = a_tilde_s(r, &p);
            let residual = a * a - (p.alpha_a_p * rho - k_d) * a - p.alpha_a * rho * k_d;
            let scale = a * a + (p.alpha_a_p * rho - k_d).abs() * a + p.alpha_a * rho * k_d;
            assert!(
                residual.abs() <= 1e-10 * scale,
                "relative residual {} at R = {}",
                residual.abs() / scale,
                r
            );
        }
    }

    #[test]
    fn quasi_steady_state_is_a_fixed_point_of_the_activator_equation() {
        let p = RateConstants::default();
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for _ in 0..300 {
            let r = rng.random_range(0.0..5000.0);
            let a = a_tilde_s(r, &p);
            let s = FullState {
                d_a: steady_da(a, &p),
                d_a_p: 1.0 - steady_da(a, &p),
                d_r: steady_dr(a, &p),
                d_r_p: 1.0 - steady_dr(a, &p),
                m_a: steady_ma(a, &p),
                m_r: steady_mr(a, &p),
                a,
                r,
                c: 0.0,
            };
            let d = full_rhs(&s, &p);
            let scale = p.beta_a * s.m_a
                + p.theta_a * s.d_a_p
                + p.theta_r * s.d_r_p
                + a * (p.gamma_a * s.d_a + p.gamma_r * s.d_r + p.gamma_c * r + p.delta_a);
            assert!(
                d.a.abs() <= 1e-8 * scale,
                "dA/dt = {} (scale {}) at R = {}",
                d.a,
                scale,
                r
            );
        }
    }

    #[test]
    fn reduced_rhs_at_origin_and_pure_complex() {
        let p = RateConstants::default();
        let d0 = reduced_rhs(&ReducedState { r: 0.0, c: 0.0 }, &p);
        let a0 = a_tilde_s(0.0, &p);
        assert_relative_eq!(d0.r, p.beta_r * steady_mr(a0, &p), max_relative = 1e-14);
        assert_eq!(d0.c, 0.0);

        let d1 = reduced_rhs(&ReducedState { r: 0.0, c: 1.0 }, &p);
        assert_relative_eq!(d1.c, -p.delta_a, max_relative = 1e-14);
    }

    #[test]
    fn reduced_rhs_composes_the_steady_state_maps() {
        let p = RateConstants::default();
        let s = ReducedState { r: 10.0, c: 5.0 };
        let a = a_tilde_s(10.0, &p);
        let d = reduced_rhs(&s, &p);
        let expected_r =
            p.beta_r * steady_mr(a, &p) - p.gamma_c * a * 10.0 + p.delta_a * 5.0 - p.delta_r * 10.0;
        let expected_c = p.gamma_c * a * 10.0 - p.delta_a * 5.0;
        assert_relative_eq!(d.r, expected_r, max_relative = 1e-14);
        assert_relative_eq!(d.c, expected_c, max_relative = 1e-14);
    }
}
