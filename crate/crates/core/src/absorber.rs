//! Two-level translational algebra of the perfect absorber.
//!
//! Energy basis: ground state at energy zero, excited state at `omega_f`.
//! Position basis: inside / outside the photon's path, related to the energy
//! basis by the complex amplitudes `alpha`, `beta` of the ground state
//! `|g⟩ = α|in⟩ + β|out⟩`, with `|f⟩ = β*|in⟩ − α*|out⟩`.
//!
//! All vectors here are stored in energy-basis coordinates; the inverse
//! relations are `|in⟩ = α*|g⟩ + β|f⟩` and `|out⟩ = β*|g⟩ − α|f⟩`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Absorber ground-state decomposition and level splitting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorberParams<T: Scalar> {
    alpha: Complex<T>,
    beta: Complex<T>,
    omega_f: T,
}

impl<T: Scalar> AbsorberParams<T> {
    pub fn new(alpha: Complex<T>, beta: Complex<T>, omega_f: T) -> Result<Self> {
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if !norm.is_finite() || (norm - T::one()).abs() > T::TOL_EXACT {
            return Err(Error::InvalidParameter(format!(
                "|alpha|^2 + |beta|^2 = {} must be 1",
                norm.to_f64_lossy()
            )));
        }
        if omega_f <= T::zero() || !omega_f.is_finite() {
            return Err(Error::InvalidParameter("omega_f must be positive".into()));
        }
        Ok(Self {
            alpha,
            beta,
            omega_f,
        })
    }

    /// Real `alpha` in `[0, 1]`, `beta = sqrt(1 - alpha²)` chosen real.
    pub fn from_real_alpha(alpha: T, omega_f: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&alpha) {
            return Err(Error::InvalidParameter(
                "alpha magnitude must lie in [0, 1]".into(),
            ));
        }
        let beta = (T::one() - alpha * alpha).sqrt();
        Self::new(
            Complex::new(alpha, T::zero()),
            Complex::new(beta, T::zero()),
            omega_f,
        )
    }

    pub fn alpha(&self) -> Complex<T> {
        self.alpha
    }

    pub fn beta(&self) -> Complex<T> {
        self.beta
    }

    pub fn omega_f(&self) -> T {
        self.omega_f
    }

    pub fn alpha_sq(&self) -> T {
        self.alpha.norm_sqr()
    }

    pub fn beta_sq(&self) -> T {
        self.beta.norm_sqr()
    }

    /// Ground state `|g⟩`, energy zero.
    pub fn ground(&self) -> AbsorberVec<T> {
        AbsorberVec::new(
            Complex::new(T::one(), T::zero()),
            Complex::new(T::zero(), T::zero()),
        )
    }

    /// Excited state `|f⟩`, energy `omega_f`.
    pub fn excited(&self) -> AbsorberVec<T> {
        AbsorberVec::new(
            Complex::new(T::zero(), T::zero()),
            Complex::new(T::one(), T::zero()),
        )
    }

    /// Absorber inside the photon path: `|in⟩ = α*|g⟩ + β|f⟩`.
    pub fn in_state(&self) -> AbsorberVec<T> {
        AbsorberVec::new(self.alpha.conj(), self.beta)
    }

    /// Absorber outside the photon path: `|out⟩ = β*|g⟩ − α|f⟩`.
    pub fn out_state(&self) -> AbsorberVec<T> {
        AbsorberVec::new(self.beta.conj(), -self.alpha)
    }
}

/// Absorber state in energy-basis coordinates `(g_amp, f_amp)`.
///
/// May be unnormalized mid-computation; operations that read it as a
/// physical state check normalization themselves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AbsorberVec<T: Scalar> {
    pub g_amp: Complex<T>,
    pub f_amp: Complex<T>,
}

impl<T: Scalar> AbsorberVec<T> {
    pub fn new(g_amp: Complex<T>, f_amp: Complex<T>) -> Self {
        Self { g_amp, f_amp }
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.g_amp.conj() * other.g_amp + self.f_amp.conj() * other.f_amp
    }

    pub fn norm_sq(&self) -> T {
        self.g_amp.norm_sqr() + self.f_amp.norm_sqr()
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self::new(self.g_amp * c, self.f_amp * c)
    }

    /// Mean energy `omega_f · |f_amp|²` of a normalized state.
    pub fn mean_energy(&self, params: &AbsorberParams<T>) -> Result<T> {
        let n = self.norm_sq();
        if (n - T::one()).abs() > T::TOL_STATE_NORM {
            return Err(Error::NotNormalized {
                norm_sq: n.to_f64_lossy(),
            });
        }
        Ok(params.omega_f() * self.f_amp.norm_sqr())
    }

    /// Coordinates `(in_amp, out_amp)` in the position basis.
    pub fn position_coords(&self, params: &AbsorberParams<T>) -> (Complex<T>, Complex<T>) {
        let in_amp = params.in_state().inner(self);
        let out_amp = params.out_state().inner(self);
        (in_amp, out_amp)
    }

    /// Rebuild from position-basis coordinates.
    pub fn from_position(
        params: &AbsorberParams<T>,
        in_amp: Complex<T>,
        out_amp: Complex<T>,
    ) -> Self {
        let i = params.in_state();
        let o = params.out_state();
        Self::new(
            i.g_amp * in_amp + o.g_amp * out_amp,
            i.f_amp * in_amp + o.f_amp * out_amp,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn params(alpha: f64, omega_f: f64) -> AbsorberParams<f64> {
        AbsorberParams::from_real_alpha(alpha, omega_f).unwrap()
    }

    fn random_params(theta: f64, pa: f64, pb: f64, omega_f: f64) -> AbsorberParams<f64> {
        AbsorberParams::new(
            Complex::from_polar(theta.cos(), pa),
            Complex::from_polar(theta.sin(), pb),
            omega_f,
        )
        .unwrap()
    }

    #[test]
    fn constructor_enforces_unit_decomposition() {
        let err =
            AbsorberParams::new(Complex::new(0.9, 0.0), Complex::new(0.9, 0.0), 1.0).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter(_)));
        assert!(AbsorberParams::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), 0.0).is_err());
        assert!(AbsorberParams::from_real_alpha(1.2, 1.0).is_err());
    }

    #[test]
    fn fully_inside_absorber_has_in_equal_ground() {
        let p = params(1.0, 1.0);
        let i = p.in_state();
        assert_eq!(i.g_amp, Complex::new(1.0, 0.0));
        assert_eq!(i.f_amp, Complex::new(0.0, 0.0));
    }

    #[test]
    fn fully_outside_absorber_has_in_equal_excited_up_to_phase() {
        let p = params(0.0, 1.0);
        let i = p.in_state();
        assert_abs_diff_eq!(i.g_amp.norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(i.f_amp.norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_energy_of_named_states() {
        let p = params(0.6, 2.5);
        assert_abs_diff_eq!(p.ground().mean_energy(&p).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            p.in_state().mean_energy(&p).unwrap(),
            2.5 * p.beta_sq(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            p.out_state().mean_energy(&p).unwrap(),
            2.5 * p.alpha_sq(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn mean_energy_rejects_unnormalized_states() {
        let p = params(0.5, 1.0);
        let v = AbsorberVec::new(Complex::new(2.0, 0.0), Complex::new(0.0, 0.0));
        assert!(matches!(
            v.mean_energy(&p),
            Err(Error::NotNormalized { .. })
        ));
    }

    #[test]
    fn mean_energy_is_phase_invariant() {
        let p = params(0.7, 1.3);
        let v = p.in_state();
        let rotated = v.scaled(Complex::from_polar(1.0, 2.1));
        assert_abs_diff_eq!(
            v.mean_energy(&p).unwrap(),
            rotated.mean_energy(&p).unwrap(),
            epsilon = 1e-14
        );
    }

    proptest! {
        #[test]
        fn position_basis_is_orthonormal(
            theta in 0.0..std::f64::consts::FRAC_PI_2,
            pa in 0.0..std::f64::consts::TAU,
            pb in 0.0..std::f64::consts::TAU,
        ) {
            let p = random_params(theta, pa, pb, 1.0);
            let i = p.in_state();
            let o = p.out_state();
            prop_assert!(i.inner(&o).norm() <= 1e-15);
            prop_assert!((i.norm_sq() - 1.0).abs() <= 1e-14);
            prop_assert!((o.norm_sq() - 1.0).abs() <= 1e-14);
        }

        #[test]
        fn energy_position_round_trip(
            theta in 0.0..std::f64::consts::FRAC_PI_2,
            pa in 0.0..std::f64::consts::TAU,
            pb in 0.0..std::f64::consts::TAU,
            g_re in -1.0..1.0f64,
            g_im in -1.0..1.0f64,
            f_re in -1.0..1.0f64,
            f_im in -1.0..1.0f64,
        ) {
            let p = random_params(theta, pa, pb, 1.0);
            let v = AbsorberVec::new(Complex::new(g_re, g_im), Complex::new(f_re, f_im));
            let (in_amp, out_amp) = v.position_coords(&p);
            let back = AbsorberVec::from_position(&p, in_amp, out_amp);
            prop_assert!((back.g_amp - v.g_amp).norm() <= 1e-15);
            prop_assert!((back.f_amp - v.f_amp).norm() <= 1e-15);
        }
    }
}
