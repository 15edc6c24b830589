//! Post-selection, conditional pointer statistics, and weak values.

use num_complex::Complex;

use crate::absorber::AbsorberVec;
use crate::error::{Error, Result};
use crate::joint_state::{DiscreteVec, JointState, Level, PathLabel, JOINT_DIM};
use crate::pointer_grid::PointerWavefunction;
use crate::scalar::Scalar;

/// Linear operator on the discrete `(path, level)` factor.
#[derive(Clone, Debug)]
pub struct Observable<T: Scalar> {
    m: [[Complex<T>; JOINT_DIM]; JOINT_DIM],
}

impl<T: Scalar> Observable<T> {
    /// Physically measured observables must be Hermitian on construction.
    pub fn new(m: [[Complex<T>; JOINT_DIM]; JOINT_DIM]) -> Result<Self> {
        let obs = Self { m };
        let dev = obs.hermiticity_error();
        if dev > T::TOL_EXACT {
            return Err(Error::NonHermitian {
                max_deviation: dev.to_f64_lossy(),
            });
        }
        Ok(obs)
    }

    /// Escape hatch for deliberately non-Hermitian operators.
    pub fn new_non_hermitian(m: [[Complex<T>; JOINT_DIM]; JOINT_DIM]) -> Self {
        Self { m }
    }

    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for j in 0..JOINT_DIM {
            for k in 0..JOINT_DIM {
                let d = (self.m[j][k] - self.m[k][j].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Negative absorber Hamiltonian `−ω_f |f⟩⟨f|`, acting identically on
    /// every path: diagonal `−ω_f` on each excited slot.
    pub fn neg_hamiltonian(params: &crate::absorber::AbsorberParams<T>) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let mut m = [[zero; JOINT_DIM]; JOINT_DIM];
        for path in PathLabel::ALL {
            let s = crate::joint_state::slot(path, Level::Excited);
            m[s][s] = Complex::new(-params.omega_f(), T::zero());
        }
        Self { m }
    }

    /// `−ω_f |path⟩⟨path| ⊗ |f⟩⟨f|`: the energy weakly transferred on one
    /// path only.
    pub fn neg_hamiltonian_on_path(
        path: PathLabel,
        params: &crate::absorber::AbsorberParams<T>,
    ) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        let mut m = [[zero; JOINT_DIM]; JOINT_DIM];
        let s = crate::joint_state::slot(path, Level::Excited);
        m[s][s] = Complex::new(-params.omega_f(), T::zero());
        Self { m }
    }

    pub fn apply(&self, v: &DiscreteVec<T>) -> DiscreteVec<T> {
        let mut out = DiscreteVec::zero();
        let zero = Complex::new(T::zero(), T::zero());
        let amps = v.amplitudes();
        let mut result = [zero; JOINT_DIM];
        for (j, row) in self.m.iter().enumerate() {
            let mut acc = zero;
            for (k, e) in row.iter().enumerate() {
                acc += *e * amps[k];
            }
            result[j] = acc;
        }
        for (i, amp) in result.iter().enumerate() {
            let path = PathLabel::ALL[i / 2];
            let level = Level::ALL[i % 2];
            out = out.with(path, level, *amp);
        }
        out
    }

    /// `⟨post|A|pre⟩`.
    pub fn matrix_element(&self, post: &DiscreteVec<T>, pre: &DiscreteVec<T>) -> Complex<T> {
        post.inner(&self.apply(pre))
    }
}

/// Projective outcome: photon found on `path`, absorber found along
/// `absorber_bra`.
#[derive(Clone, Copy, Debug)]
pub struct PostSelection<T: Scalar> {
    absorber_bra: AbsorberVec<T>,
    path: PathLabel,
}

impl<T: Scalar> PostSelection<T> {
    pub fn new(absorber_bra: AbsorberVec<T>, path: PathLabel) -> Result<Self> {
        let n = absorber_bra.norm_sq();
        if (n - T::one()).abs() > T::TOL_EXACT {
            return Err(Error::NotNormalized {
                norm_sq: n.to_f64_lossy(),
            });
        }
        Ok(Self { absorber_bra, path })
    }

    pub fn absorber_bra(&self) -> &AbsorberVec<T> {
        &self.absorber_bra
    }

    pub fn path(&self) -> PathLabel {
        self.path
    }
}

/// Weak-value comparison bundle for one pre/post/observable triple.
#[derive(Clone, Copy, Debug)]
pub struct WeakValueResult<T: Scalar> {
    pub weak_value: Complex<T>,
    pub postselect_prob: T,
    pub exact_shift: T,
    /// `Re(weak_value)`; the imaginary part is reported but not compared.
    pub predicted_shift: T,
    pub discrepancy: T,
}

impl<T: Scalar> WeakValueResult<T> {
    pub fn new(weak_value: Complex<T>, postselect_prob: T, exact_shift: T) -> Result<Self> {
        if postselect_prob < T::zero() || postselect_prob > T::one() + T::TOL_BUDGET {
            return Err(Error::InvalidParameter(format!(
                "post-selection probability {} outside [0, 1]",
                postselect_prob.to_f64_lossy()
            )));
        }
        let predicted_shift = weak_value.re;
        Ok(Self {
            weak_value,
            postselect_prob,
            exact_shift,
            predicted_shift,
            discrepancy: (exact_shift - predicted_shift).abs(),
        })
    }
}

/// `⟨post|A|pre⟩ / ⟨post|pre⟩`.
///
/// Invariant under independent nonzero rescaling of `pre` and `post`;
/// undefined (error) when the two are orthogonal.
pub fn weak_value<T: Scalar>(
    pre: &DiscreteVec<T>,
    post: &DiscreteVec<T>,
    obs: &Observable<T>,
) -> Result<Complex<T>> {
    let denom = post.inner(pre);
    let scale = (post.norm_sq() * pre.norm_sq()).sqrt();
    if denom.norm() <= T::TOL_EXACT * scale {
        return Err(Error::OrthogonalSelection);
    }
    Ok(obs.matrix_element(post, pre) / denom)
}

/// Project `state` onto the selection.
///
/// Returns the outcome probability per photon launched (normalized by the
/// full unit budget including `absorbed_prob`) and the normalized
/// conditional pointer, or `None` for a zero-probability outcome.
pub fn post_select<T: Scalar>(
    state: &JointState<T>,
    sel: &PostSelection<T>,
) -> Result<(T, Option<PointerWavefunction<T>>)> {
    let budget = state.probability_budget();
    if budget <= T::min_positive_value() {
        return Err(Error::ZeroNorm);
    }
    let mut chi = PointerWavefunction::zeros(*state.grid());
    if let Some(psi) = state.branch(sel.path, Level::Ground) {
        chi.add_scaled(psi, sel.absorber_bra.g_amp.conj())?;
    }
    if let Some(psi) = state.branch(sel.path, Level::Excited) {
        chi.add_scaled(psi, sel.absorber_bra.f_amp.conj())?;
    }
    let n = chi.norm_sq();
    if n <= T::min_positive_value() {
        return Ok((T::zero(), None));
    }
    Ok((n / budget, Some(chi.normalized()?)))
}

/// Mean of the conditional pointer minus `reference_mean`.
pub fn conditional_shift<T: Scalar>(
    state: &JointState<T>,
    sel: &PostSelection<T>,
    reference_mean: T,
) -> Result<T> {
    let (_, chi) = post_select(state, sel)?;
    match chi {
        Some(chi) => Ok(chi.mean_frequency() - reference_mean),
        None => Err(Error::ZeroProbability),
    }
}

/// Measurement-strength ratio `omega_f / sigma`; small is weak, large is
/// projective.
pub fn measurement_strength<T: Scalar>(sigma: T, omega_f: T) -> T {
    omega_f / sigma
}
