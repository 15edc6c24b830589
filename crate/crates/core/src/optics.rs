//! Physical transformations: beam splitters and the energy-conserving
//! non-absorption interaction.
//!
//! All operations are pure: they take a [`JointState`] and return a new one.
//! Beam splitters act only on the path factor. The interaction acts on one
//! arm's absorber factor, projecting onto the absorber staying outside the
//! path while shifting the pointer by each energy transition, and moves the
//! complementary probability into the absorbed accumulator.

use num_complex::Complex;

use crate::absorber::AbsorberParams;
use crate::error::{Error, Result};
use crate::joint_state::{JointState, Level, PathLabel};
use crate::pointer_grid::PointerWavefunction;
use crate::scalar::Scalar;

fn ensure_paths_subset<T: Scalar>(
    state: &JointState<T>,
    allowed: &[PathLabel],
    operation: &'static str,
    expected: &'static str,
) -> Result<()> {
    for path in state.occupied_paths() {
        if !allowed.contains(&path) {
            return Err(Error::WrongStage {
                operation,
                expected,
                found: path.label(),
            });
        }
    }
    Ok(())
}

/// Input port → both interferometer arms, each with amplitude `1/√2`.
pub fn first_beam_splitter<T: Scalar>(state: &JointState<T>) -> Result<JointState<T>> {
    ensure_paths_subset(state, &[PathLabel::Input], "first beam splitter", "input")?;
    let s = Complex::new(T::lit(0.5).sqrt(), T::zero());
    let mut out = JointState::new(*state.grid());
    out.set_absorbed_prob(state.absorbed_prob());
    for ((_, level), psi) in state.branches() {
        out.add_scaled_branch(PathLabel::ArmI, *level, psi, s)?;
        out.add_scaled_branch(PathLabel::ArmII, *level, psi, s)?;
    }
    out.prune_zero_branches();
    Ok(out)
}

/// Arm recombination: `armI → (bright + dark)/√2`, `armII → (bright − dark)/√2`.
pub fn second_beam_splitter<T: Scalar>(state: &JointState<T>) -> Result<JointState<T>> {
    ensure_paths_subset(
        state,
        &[PathLabel::ArmI, PathLabel::ArmII],
        "second beam splitter",
        "interferometer arms",
    )?;
    let s = Complex::new(T::lit(0.5).sqrt(), T::zero());
    let mut out = JointState::new(*state.grid());
    out.set_absorbed_prob(state.absorbed_prob());
    for ((path, level), psi) in state.branches() {
        let dark_sign = match path {
            PathLabel::ArmI => s,
            PathLabel::ArmII => -s,
            _ => unreachable!("stage checked above"),
        };
        out.add_scaled_branch(PathLabel::Bright, *level, psi, s)?;
        out.add_scaled_branch(PathLabel::Dark, *level, psi, dark_sign)?;
    }
    out.prune_zero_branches();
    Ok(out)
}

/// Non-absorption interaction with the absorber sitting on `arm`.
///
/// Each input branch `(arm, e_i)` with pointer `ψ_i(ω)` contributes
/// `⟨e_j|out⟩⟨out|e_i⟩ · ψ_i(ω + ω_j − ω_i)` to the output branch
/// `(arm, e_j)`, so the photon's energy shift mirrors the absorber's
/// transition and the average energy is conserved term by term. The
/// coherent projection of the arm onto the absorber-in-path state, with the
/// same per-transition shifts, is what gets absorbed:
/// `absorbed_prob += ‖⟨in|g⟩ψ_g(ω) + ⟨in|f⟩ψ_f(ω − ω_f)‖²`.
///
/// Only the ground-level input arises physically in the scenarios here; the
/// action on an excited-level input is the unique linear extension of the
/// same rule and should be considered experimental.
pub fn nonabsorption_interaction<T: Scalar>(
    state: &JointState<T>,
    arm: PathLabel,
    params: &AbsorberParams<T>,
) -> Result<JointState<T>> {
    if !matches!(arm, PathLabel::Input | PathLabel::ArmI | PathLabel::ArmII) {
        return Err(Error::WrongStage {
            operation: "non-absorption interaction",
            expected: "input or an interferometer arm",
            found: arm.label(),
        });
    }
    let quanta = state.grid().aligned_quanta(params.omega_f())?;

    let alpha = params.alpha();
    let beta = params.beta();
    let psi_g = state.branch(arm, Level::Ground).cloned();
    let psi_f = state.branch(arm, Level::Excited).cloned();

    // per-transition shifts: g→f lowers the pointer, f→g raises it
    let g_shifted = psi_g.as_ref().map(|p| p.shift_down(quanta)).transpose()?;
    let f_shifted = psi_f.as_ref().map(|p| p.shift_down(-quanta)).transpose()?;

    let mut out_g = PointerWavefunction::zeros(*state.grid());
    let mut out_f = PointerWavefunction::zeros(*state.grid());
    let mut absorbed = PointerWavefunction::zeros(*state.grid());

    if let Some(p) = &psi_g {
        // <g|out><out|g> = |beta|^2, no shift
        out_g.add_scaled(p, Complex::new(beta.norm_sqr(), T::zero()))?;
        // <in|g> = alpha
        absorbed.add_scaled(p, alpha)?;
    }
    if let Some(p) = &g_shifted {
        // <f|out><out|g> = -alpha beta, pointer loses omega_f
        out_f.add_scaled(p, -(alpha * beta))?;
    }
    if let Some(p) = &psi_f {
        // <f|out><out|f> = |alpha|^2, no shift
        out_f.add_scaled(p, Complex::new(alpha.norm_sqr(), T::zero()))?;
    }
    if let Some(p) = &f_shifted {
        // <g|out><out|f> = -(alpha beta)*, pointer gains omega_f
        out_g.add_scaled(p, -(alpha * beta).conj())?;
        // <in|f> = beta*
        absorbed.add_scaled(p, beta.conj())?;
    }

    let mut out = state.clone();
    out.remove_branch(arm, Level::Ground);
    out.remove_branch(arm, Level::Excited);
    out.add_absorbed_prob(absorbed.norm_sq());
    if !out_g.is_zero() {
        out.set_branch(arm, Level::Ground, out_g)?;
    }
    if !out_f.is_zero() {
        out.set_branch(arm, Level::Excited, out_f)?;
    }
    Ok(out)
}

/// Explicit no-op for an arm without an absorber.
pub fn free_pass<T: Scalar>(state: &JointState<T>, arm: PathLabel) -> Result<JointState<T>> {
    if !matches!(arm, PathLabel::Input | PathLabel::ArmI | PathLabel::ArmII) {
        return Err(Error::WrongStage {
            operation: "free pass",
            expected: "input or an interferometer arm",
            found: arm.label(),
        });
    }
    Ok(state.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointer_grid::FrequencyGrid;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn grid() -> FrequencyGrid<f64> {
        FrequencyGrid::spanning(-12.0, 12.0, 4096).unwrap()
    }

    fn pointer(g: FrequencyGrid<f64>) -> PointerWavefunction<f64> {
        PointerWavefunction::gaussian(g, 0.0, 1.0).unwrap()
    }

    fn input_state(g: FrequencyGrid<f64>) -> JointState<f64> {
        JointState::new(g)
            .with_branch(PathLabel::Input, Level::Ground, pointer(g))
            .unwrap()
    }

    fn snapped_params(g: &FrequencyGrid<f64>, alpha: f64, omega_f: f64) -> AbsorberParams<f64> {
        let q = g.nearest_quanta(omega_f);
        AbsorberParams::from_real_alpha(alpha, q as f64 * g.delta_omega()).unwrap()
    }

    #[test]
    fn first_splitter_halves_the_probability() {
        let g = grid();
        let s = first_beam_splitter(&input_state(g)).unwrap();
        assert_abs_diff_eq!(
            s.branch(PathLabel::ArmI, Level::Ground).unwrap().norm_sq(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            s.branch(PathLabel::ArmII, Level::Ground).unwrap().norm_sq(),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(s.total_norm_sq(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn first_splitter_on_empty_state_is_empty() {
        let s = first_beam_splitter(&JointState::<f64>::new(grid())).unwrap();
        assert_eq!(s.branches().count(), 0);
    }

    #[test]
    fn first_splitter_rejects_wrong_stage() {
        let g = grid();
        let s = JointState::new(g)
            .with_branch(PathLabel::ArmI, Level::Ground, pointer(g))
            .unwrap();
        assert!(matches!(
            first_beam_splitter(&s),
            Err(Error::WrongStage { .. })
        ));
    }

    #[test]
    fn second_splitter_interferes_equal_arms_into_bright() {
        let g = grid();
        let s = first_beam_splitter(&input_state(g)).unwrap();
        let out = second_beam_splitter(&s).unwrap();
        assert_abs_diff_eq!(out.path_norm_sq(PathLabel::Bright), 1.0, epsilon = 1e-12);
        assert!(out.path_norm_sq(PathLabel::Dark) <= 1e-12);
    }

    #[test]
    fn second_splitter_splits_single_arm_evenly() {
        let g = grid();
        let s = JointState::new(g)
            .with_branch(PathLabel::ArmI, Level::Ground, pointer(g))
            .unwrap();
        let out = second_beam_splitter(&s).unwrap();
        assert_abs_diff_eq!(out.path_norm_sq(PathLabel::Bright), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(out.path_norm_sq(PathLabel::Dark), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn interaction_reproduces_coupled_arm_coefficients() {
        // (ArmI, ground) at norm 1/2 with alpha = beta = 1/sqrt(2)
        let g = grid();
        let params = snapped_params(&g, FRAC_1_SQRT_2, 0.01);
        let s = first_beam_splitter(&input_state(g)).unwrap();
        let out = nonabsorption_interaction(&s, PathLabel::ArmI, &params).unwrap();
        assert_abs_diff_eq!(out.absorbed_prob(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(
            out.branch(PathLabel::ArmI, Level::Ground)
                .unwrap()
                .norm_sq(),
            0.125,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            out.branch(PathLabel::ArmI, Level::Excited)
                .unwrap()
                .norm_sq(),
            0.125,
            epsilon = 1e-12
        );
        // spectator arm untouched
        assert_abs_diff_eq!(out.path_norm_sq(PathLabel::ArmII), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn transparent_absorber_is_identity() {
        let g = grid();
        let params = snapped_params(&g, 0.0, 0.01);
        let s = input_state(g);
        let out = nonabsorption_interaction(&s, PathLabel::Input, &params).unwrap();
        assert_eq!(out.absorbed_prob(), 0.0);
        assert_eq!(
            out.branch(PathLabel::Input, Level::Ground).unwrap(),
            s.branch(PathLabel::Input, Level::Ground).unwrap()
        );
        assert!(out.branch(PathLabel::Input, Level::Excited).is_none());
    }

    #[test]
    fn opaque_absorber_absorbs_the_arm() {
        let g = grid();
        let params = snapped_params(&g, 1.0, 0.01);
        let out = nonabsorption_interaction(&input_state(g), PathLabel::Input, &params).unwrap();
        assert_abs_diff_eq!(out.absorbed_prob(), 1.0, epsilon = 1e-12);
        assert_eq!(out.total_norm_sq(), 0.0);
    }

    #[test]
    fn excited_input_follows_the_general_rule() {
        // brute-force oracle: coefficients <e_j|out><out|e_i> with shift
        // omega_j - omega_i, evaluated directly from the basis vectors
        let g = grid();
        let params = snapped_params(&g, 0.6, 0.5);
        let q = g.aligned_quanta(params.omega_f()).unwrap();
        let psi = pointer(g);
        let s = JointState::new(g)
            .with_branch(PathLabel::ArmII, Level::Excited, psi.clone())
            .unwrap();
        let out = nonabsorption_interaction(&s, PathLabel::ArmII, &params).unwrap();

        let outv = params.out_state();
        let coeff_gf = outv.g_amp * outv.f_amp.conj(); // <g|out><out|f>
        let coeff_ff = outv.f_amp * outv.f_amp.conj(); // <f|out><out|f>
        assert_abs_diff_eq!(
            (coeff_gf - -(params.alpha() * params.beta()).conj()).norm(),
            0.0,
            epsilon = 1e-15
        );

        let expected_g = psi.shift_down(-q).unwrap().scaled(coeff_gf);
        let expected_f = psi.scaled(coeff_ff);
        let got_g = out.branch(PathLabel::ArmII, Level::Ground).unwrap();
        let got_f = out.branch(PathLabel::ArmII, Level::Excited).unwrap();
        for (a, b) in got_g.amplitudes().iter().zip(expected_g.amplitudes()) {
            assert!((a - b).norm() <= 1e-14);
        }
        for (a, b) in got_f.amplitudes().iter().zip(expected_f.amplitudes()) {
            assert!((a - b).norm() <= 1e-14);
        }
        // the absorbed projection picks up <in|f> = beta* on the shifted pointer
        let expected_abs = params.beta_sq() * psi.shift_down(-q).unwrap().norm_sq();
        assert_abs_diff_eq!(out.absorbed_prob(), expected_abs, epsilon = 1e-12);
    }

    #[test]
    fn interaction_conserves_energy_term_by_term() {
        let g = grid();
        let params = snapped_params(&g, 0.6, 0.1);
        let out = nonabsorption_interaction(&input_state(g), PathLabel::Input, &params).unwrap();
        let mean_in = 0.0;
        let f_branch = out.branch(PathLabel::Input, Level::Excited).unwrap();
        assert_abs_diff_eq!(
            f_branch.mean_frequency(),
            mean_in - params.omega_f(),
            epsilon = 1e-9
        );
    }

    #[test]
    fn full_pipeline_reproduces_exit_port_coefficients() {
        // dark port: ground amplitude ∝ (|beta|^2 - 1), excited ∝ -alpha beta
        let g = grid();
        let params = snapped_params(&g, 0.6, 0.01);
        let q = g.aligned_quanta(params.omega_f()).unwrap();
        let psi = pointer(g);
        let s = first_beam_splitter(&input_state(g)).unwrap();
        let s = nonabsorption_interaction(&s, PathLabel::ArmI, &params).unwrap();
        let s = second_beam_splitter(&s).unwrap();

        let half = Complex::new(0.5, 0.0);
        let dark_g_expected = psi.scaled(half * (params.beta_sq() - 1.0));
        let dark_f_expected = psi
            .shift_down(q)
            .unwrap()
            .scaled(-half * params.alpha() * params.beta());
        let got_g = s.branch(PathLabel::Dark, Level::Ground).unwrap();
        let got_f = s.branch(PathLabel::Dark, Level::Excited).unwrap();
        for (a, b) in got_g.amplitudes().iter().zip(dark_g_expected.amplitudes()) {
            assert!((a - b).norm() <= 1e-12);
        }
        for (a, b) in got_f.amplitudes().iter().zip(dark_f_expected.amplitudes()) {
            assert!((a - b).norm() <= 1e-12);
        }
        assert_abs_diff_eq!(s.probability_budget(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn free_pass_is_identity() {
        let g = grid();
        for state in [
            input_state(g),
            first_beam_splitter(&input_state(g)).unwrap(),
            JointState::new(g),
        ] {
            let out = free_pass(&state, PathLabel::ArmI).unwrap();
            assert_eq!(out, state);
        }
        assert!(free_pass(&input_state(g), PathLabel::Dark).is_err());
    }

    #[test]
    fn misaligned_omega_f_is_rejected() {
        let g = grid();
        let params = AbsorberParams::from_real_alpha(0.5, 2.5 * g.delta_omega()).unwrap();
        let err =
            nonabsorption_interaction(&input_state(g), PathLabel::Input, &params).unwrap_err();
        assert!(matches!(err, Error::MisalignedShift { .. }));
    }

    /// Random interior-supported wavefunction; shifts up to ~16 steps stay
    /// on the grid exactly.
    fn padded_random(g: FrequencyGrid<f64>, coeffs: &[(f64, f64)]) -> PointerWavefunction<f64> {
        let n = g.n_points();
        let mut amps = vec![Complex::new(0.0, 0.0); n];
        for (i, (re, im)) in coeffs.iter().enumerate() {
            amps[n / 4 + i * 2] = Complex::new(*re, *im);
        }
        PointerWavefunction::from_amplitudes(g, amps).unwrap()
    }

    proptest! {
        #[test]
        fn splitters_preserve_norm_and_purity(
            coeffs in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8),
        ) {
            let g = FrequencyGrid::spanning(-15.0, 15.0, 256).unwrap();
            let mut s = JointState::new(g);
            for (i, level) in Level::ALL.into_iter().enumerate() {
                let psi = padded_random(g, &coeffs[i * 4..(i + 1) * 4]);
                if !psi.is_zero() {
                    s.set_branch(PathLabel::Input, level, psi).unwrap();
                }
            }
            prop_assume!(s.total_norm_sq() > 1e-6);
            let after1 = first_beam_splitter(&s).unwrap();
            prop_assert!((after1.total_norm_sq() - s.total_norm_sq()).abs() <= 1e-12);
            let after2 = second_beam_splitter(&after1).unwrap();
            prop_assert!((after2.total_norm_sq() - s.total_norm_sq()).abs() <= 1e-12);

            let p0 = s.reduced_absorber_density().unwrap().purity();
            let p1 = after1.reduced_absorber_density().unwrap().purity();
            let p2 = after2.reduced_absorber_density().unwrap().purity();
            prop_assert!((p1 - p0).abs() <= 1e-10);
            prop_assert!((p2 - p0).abs() <= 1e-10);
        }

        #[test]
        fn interaction_conserves_the_probability_budget(
            coeffs in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8),
            theta in 0.05..1.52f64,
            phase_a in 0.0..std::f64::consts::TAU,
            phase_b in 0.0..std::f64::consts::TAU,
            q in 1i64..8,
        ) {
            let g = FrequencyGrid::spanning(-15.0, 15.0, 256).unwrap();
            let params = AbsorberParams::new(
                Complex::from_polar(theta.cos(), phase_a),
                Complex::from_polar(theta.sin(), phase_b),
                q as f64 * g.delta_omega(),
            ).unwrap();
            let mut s = JointState::new(g);
            for (i, level) in Level::ALL.into_iter().enumerate() {
                let psi = padded_random(g, &coeffs[i * 4..(i + 1) * 4]);
                if !psi.is_zero() {
                    s.set_branch(PathLabel::ArmI, level, psi).unwrap();
                }
            }
            prop_assume!(s.total_norm_sq() > 1e-6);
            let before = s.total_norm_sq();
            let out = nonabsorption_interaction(&s, PathLabel::ArmI, &params).unwrap();
            let gained = out.absorbed_prob() - s.absorbed_prob();
            prop_assert!((out.total_norm_sq() + gained - before).abs() <= 1e-12);
        }
    }
}
