//! Discretized complex energy wavefunctions and their statistics.
//!
//! The pointer of every measurement in this crate is a photon energy
//! wavefunction sampled on a uniform frequency grid. Squared norms carry the
//! grid weight: `norm_sq = Σ |ψ_k|² · Δω`, so a normalized wavefunction
//! integrates to one in the rectangle-rule sense.
//!
//! Energy exchange with the absorber is represented exclusively by *integer*
//! grid shifts ([`PointerWavefunction::shift_down`]); scenario setup snaps the
//! level splitting to the grid so that shifts stay interpolation-free and
//! conservation checks stay bit-tight.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Uniform frequency grid: point `k` sits at `omega_min + k · delta_omega`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid<T: Scalar> {
    omega_min: T,
    delta_omega: T,
    n_points: usize,
}

impl<T: Scalar> FrequencyGrid<T> {
    pub fn new(omega_min: T, delta_omega: T, n_points: usize) -> Result<Self> {
        if !omega_min.is_finite() || !delta_omega.is_finite() {
            return Err(Error::InvalidParameter("grid bounds must be finite".into()));
        }
        if delta_omega <= T::zero() {
            return Err(Error::InvalidParameter(
                "delta_omega must be positive".into(),
            ));
        }
        if n_points < 2 {
            return Err(Error::InvalidParameter(
                "grid needs at least 2 points".into(),
            ));
        }
        Ok(Self {
            omega_min,
            delta_omega,
            n_points,
        })
    }

    /// Grid covering `[omega_min, omega_max]` with `n_points` samples.
    pub fn spanning(omega_min: T, omega_max: T, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidParameter(
                "grid needs at least 2 points".into(),
            ));
        }
        if omega_max <= omega_min || omega_max.is_nan() || omega_min.is_nan() {
            return Err(Error::InvalidParameter(
                "omega_max must exceed omega_min".into(),
            ));
        }
        let steps = T::from_usize(n_points - 1).expect("point count fits the scalar");
        Self::new(omega_min, (omega_max - omega_min) / steps, n_points)
    }

    pub fn omega_min(&self) -> T {
        self.omega_min
    }

    pub fn omega_max(&self) -> T {
        self.omega(self.n_points - 1)
    }

    pub fn delta_omega(&self) -> T {
        self.delta_omega
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Frequency of grid point `k`.
    pub fn omega(&self, k: usize) -> T {
        self.omega_min + T::from_usize(k).expect("index fits the scalar") * self.delta_omega
    }

    /// Nearest whole number of grid steps to `omega_f`; no alignment check.
    pub fn nearest_quanta(&self, omega_f: T) -> i64 {
        (omega_f / self.delta_omega)
            .round()
            .to_i64()
            .unwrap_or(i64::MAX)
    }

    /// Number of grid steps equivalent to `omega_f`.
    ///
    /// `omega_f` must be an integer multiple of the spacing to within
    /// `TOL_EXACT · delta_omega`; anything else is a misalignment error.
    pub fn aligned_quanta(&self, omega_f: T) -> Result<i64> {
        let q = (omega_f / self.delta_omega).round();
        let quanta = q
            .to_i64()
            .ok_or_else(|| Error::InvalidParameter("shift exceeds representable quanta".into()))?;
        let residual = (omega_f - q * self.delta_omega).abs();
        if residual > T::TOL_EXACT * self.delta_omega {
            return Err(Error::MisalignedShift {
                omega_f: omega_f.to_f64_lossy(),
                delta_omega: self.delta_omega.to_f64_lossy(),
            });
        }
        Ok(quanta)
    }
}

/// Complex energy wavefunction on a [`FrequencyGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct PointerWavefunction<T: Scalar> {
    grid: FrequencyGrid<T>,
    amps: Vec<Complex<T>>,
}

impl<T: Scalar> PointerWavefunction<T> {
    /// All-zero wavefunction.
    pub fn zeros(grid: FrequencyGrid<T>) -> Self {
        Self {
            amps: vec![Complex::new(T::zero(), T::zero()); grid.n_points()],
            grid,
        }
    }

    pub fn from_amplitudes(grid: FrequencyGrid<T>, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != grid.n_points() {
            return Err(Error::InvalidParameter(format!(
                "amplitude count {} does not match grid size {}",
                amps.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, amps })
    }

    /// Normalized real Gaussian whose probability density `|ψ(ω)|²` has the
    /// given mean and standard deviation.
    ///
    /// The grid must span at least `center ± 8·sigma`; thinner grids would
    /// push truncated tail mass above the shift guardrail downstream.
    pub fn gaussian(grid: FrequencyGrid<T>, center: T, sigma: T) -> Result<Self> {
        if sigma <= T::zero() || !sigma.is_finite() || !center.is_finite() {
            return Err(Error::InvalidParameter(
                "gaussian needs finite center and positive sigma".into(),
            ));
        }
        let pad = T::lit(8.0) * sigma;
        if grid.omega_min() > center - pad || grid.omega_max() < center + pad {
            return Err(Error::GridTooNarrow {
                grid_min: grid.omega_min().to_f64_lossy(),
                grid_max: grid.omega_max().to_f64_lossy(),
                needed_min: (center - pad).to_f64_lossy(),
                needed_max: (center + pad).to_f64_lossy(),
            });
        }
        // |psi|^2 ~ exp(-(w-c)^2 / (2 sigma^2)), so the amplitude carries
        // half the exponent; the overall scale comes from the grid norm.
        let four_sigma_sq = T::lit(4.0) * sigma * sigma;
        let amps = (0..grid.n_points())
            .map(|k| {
                let d = grid.omega(k) - center;
                Complex::new((-(d * d) / four_sigma_sq).exp(), T::zero())
            })
            .collect();
        let psi = Self { grid, amps };
        psi.normalized()
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    /// Squared norm `Σ |ψ_k|² Δω`.
    pub fn norm_sq(&self) -> T {
        let s = self
            .amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr());
        s * self.grid.delta_omega()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - T::one()).abs() <= T::TOL_EXACT
    }

    /// Rescaled to unit norm.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n <= T::min_positive_value() {
            return Err(Error::ZeroNorm);
        }
        let scale = n.sqrt().recip();
        Ok(self.scaled(Complex::new(scale, T::zero())))
    }

    /// Mean of the probability density `|ψ(ω)|²`. NaN for an all-zero input.
    pub fn mean_frequency(&self) -> T {
        let mut mass = T::zero();
        let mut first = T::zero();
        for (k, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            mass += p;
            first += p * self.grid.omega(k);
        }
        first / mass
    }

    /// Variance of the probability density. NaN for an all-zero input.
    pub fn variance(&self) -> T {
        let mean = self.mean_frequency();
        let mut mass = T::zero();
        let mut second = T::zero();
        for (k, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            let d = self.grid.omega(k) - mean;
            mass += p;
            second += p * d * d;
        }
        second / mass
    }

    /// `⟨self|other⟩` with the grid weight; conjugate-linear in `self`.
    pub fn overlap(&self, other: &Self) -> Result<Complex<T>> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut acc = Complex::new(T::zero(), T::zero());
        for (a, b) in self.amps.iter().zip(&other.amps) {
            acc += a.conj() * b;
        }
        Ok(acc * self.grid.delta_omega())
    }

    /// Relabel amplitudes `out_k = in_{k+quanta}` with zero fill, moving the
    /// distribution *down* in frequency by `quanta · Δω`. Negative `quanta`
    /// shifts up.
    ///
    /// Amplitude pushed off the grid may carry at most `TOL_EXACT` of the
    /// squared norm; more means the grid is under-padded and the shift would
    /// silently break conservation checks.
    pub fn shift_down(&self, quanta: i64) -> Result<Self> {
        let n = self.amps.len() as i64;
        let total = self.norm_sq();

        // Source indices that fall outside [0, n) are lost.
        let lost = |j: i64| -> bool {
            if quanta >= 0 {
                j < quanta.min(n)
            } else {
                j >= n + quanta.max(-n)
            }
        };
        let mut leak = T::zero();
        for j in 0..n {
            if lost(j) {
                leak += self.amps[j as usize].norm_sqr();
            }
        }
        leak *= self.grid.delta_omega();
        if total > T::zero() {
            let fraction = leak / total;
            if fraction > T::TOL_EXACT {
                return Err(Error::Truncation {
                    leaked_fraction: fraction.to_f64_lossy(),
                    limit: T::TOL_EXACT.to_f64_lossy(),
                });
            }
        }

        let zero = Complex::new(T::zero(), T::zero());
        let mut out = vec![zero; self.amps.len()];
        for (k, slot) in out.iter_mut().enumerate() {
            let j = k as i64 + quanta;
            if (0..n).contains(&j) {
                *slot = self.amps[j as usize];
            }
        }
        Ok(Self {
            grid: self.grid,
            amps: out,
        })
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        Self {
            grid: self.grid,
            amps: self.amps.iter().map(|a| a * c).collect(),
        }
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &Self, c: Complex<T>) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += b * c;
        }
        Ok(())
    }

    /// True when every amplitude is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.amps
            .iter()
            .all(|a| a.re == T::zero() && a.im == T::zero())
    }
}
