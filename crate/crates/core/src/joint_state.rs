//! Joint photon-path ⊗ absorber ⊗ pointer state with explicit probability
//! bookkeeping for the absorbed branch.
//!
//! A state is a sparse map from `(path, absorber level)` to an unnormalized
//! pointer wavefunction, plus a scalar `absorbed_prob` accumulator. The
//! absorbed photon's own state is never needed downstream, only the
//! probability that the non-absorption branch lost, so after any complete
//! physical step `total_norm_sq + absorbed_prob = 1`.

use std::collections::BTreeMap;

use num_complex::Complex;
use serde_json::{json, Value};

use crate::absorber::{AbsorberParams, AbsorberVec};
use crate::error::{Error, Result};
use crate::pointer_grid::{FrequencyGrid, PointerWavefunction};
use crate::scalar::Scalar;

/// Photon path label through the optical layout.
///
/// `ArmI`/`ArmII` live between the beam splitters, `Bright`/`Dark` after the
/// second one. The container accepts any combination; the scenario pipeline
/// is what keeps stages consistent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathLabel {
    Input,
    ArmI,
    ArmII,
    Bright,
    Dark,
}

impl PathLabel {
    pub const ALL: [PathLabel; 5] = [
        PathLabel::Input,
        PathLabel::ArmI,
        PathLabel::ArmII,
        PathLabel::Bright,
        PathLabel::Dark,
    ];

    pub fn index(self) -> usize {
        match self {
            PathLabel::Input => 0,
            PathLabel::ArmI => 1,
            PathLabel::ArmII => 2,
            PathLabel::Bright => 3,
            PathLabel::Dark => 4,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PathLabel::Input => "input",
            PathLabel::ArmI => "arm_i",
            PathLabel::ArmII => "arm_ii",
            PathLabel::Bright => "bright",
            PathLabel::Dark => "dark",
        }
    }
}

/// Absorber energy level attached to a branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Level {
    Ground,
    Excited,
}

impl Level {
    pub const ALL: [Level; 2] = [Level::Ground, Level::Excited];

    pub fn index(self) -> usize {
        match self {
            Level::Ground => 0,
            Level::Excited => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::Ground => "ground",
            Level::Excited => "excited",
        }
    }
}

/// Dimension of the discrete `(path, level)` factor.
pub const JOINT_DIM: usize = 10;

/// Canonical slot of `(path, level)` in the declared ordering: paths in
/// [`PathLabel::ALL`] order, ground before excited.
pub fn slot(path: PathLabel, level: Level) -> usize {
    path.index() * 2 + level.index()
}

/// Sparse joint state; absent branches are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState<T: Scalar> {
    grid: FrequencyGrid<T>,
    branches: BTreeMap<(PathLabel, Level), PointerWavefunction<T>>,
    absorbed_prob: T,
}

impl<T: Scalar> JointState<T> {
    pub fn new(grid: FrequencyGrid<T>) -> Self {
        Self {
            grid,
            branches: BTreeMap::new(),
            absorbed_prob: T::zero(),
        }
    }

    pub fn grid(&self) -> &FrequencyGrid<T> {
        &self.grid
    }

    pub fn set_branch(
        &mut self,
        path: PathLabel,
        level: Level,
        psi: PointerWavefunction<T>,
    ) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        self.branches.insert((path, level), psi);
        Ok(())
    }

    /// Builder-style [`JointState::set_branch`].
    pub fn with_branch(
        mut self,
        path: PathLabel,
        level: Level,
        psi: PointerWavefunction<T>,
    ) -> Result<Self> {
        self.set_branch(path, level, psi)?;
        Ok(self)
    }

    /// `self(path, level) += c · psi`, inserting the branch if absent.
    pub fn add_scaled_branch(
        &mut self,
        path: PathLabel,
        level: Level,
        psi: &PointerWavefunction<T>,
        c: Complex<T>,
    ) -> Result<()> {
        if psi.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        match self.branches.get_mut(&(path, level)) {
            Some(existing) => existing.add_scaled(psi, c)?,
            None => {
                self.branches.insert((path, level), psi.scaled(c));
            }
        }
        Ok(())
    }

    pub fn remove_branch(
        &mut self,
        path: PathLabel,
        level: Level,
    ) -> Option<PointerWavefunction<T>> {
        self.branches.remove(&(path, level))
    }

    /// Drop branches whose amplitudes are all exactly zero.
    pub fn prune_zero_branches(&mut self) {
        self.branches.retain(|_, psi| !psi.is_zero());
    }

    pub fn branch(&self, path: PathLabel, level: Level) -> Option<&PointerWavefunction<T>> {
        self.branches.get(&(path, level))
    }

    pub fn branches(&self) -> impl Iterator<Item = (&(PathLabel, Level), &PointerWavefunction<T>)> {
        self.branches.iter()
    }

    pub fn occupied_paths(&self) -> impl Iterator<Item = PathLabel> + '_ {
        let mut seen = [false; 5];
        self.branches.keys().filter_map(move |(p, _)| {
            if seen[p.index()] {
                None
            } else {
                seen[p.index()] = true;
                Some(*p)
            }
        })
    }

    pub fn absorbed_prob(&self) -> T {
        self.absorbed_prob
    }

    pub fn set_absorbed_prob(&mut self, p: T) {
        self.absorbed_prob = p;
    }

    pub fn add_absorbed_prob(&mut self, p: T) {
        self.absorbed_prob += p;
    }

    /// Sum of squared norms over all branches.
    pub fn total_norm_sq(&self) -> T {
        self.branches
            .values()
            .fold(T::zero(), |acc, psi| acc + psi.norm_sq())
    }

    /// Squared norm restricted to one path (both levels).
    pub fn path_norm_sq(&self, path: PathLabel) -> T {
        Level::ALL
            .iter()
            .filter_map(|&l| self.branch(path, l))
            .fold(T::zero(), |acc, psi| acc + psi.norm_sq())
    }

    /// `total_norm_sq + absorbed_prob`; equals one after any complete
    /// physical step starting from a normalized state.
    pub fn probability_budget(&self) -> T {
        self.total_norm_sq() + self.absorbed_prob
    }

    /// Reduced absorber density matrix, traced over path and pointer,
    /// normalized by the surviving norm.
    pub fn reduced_absorber_density(&self) -> Result<AbsorberDensity<T>> {
        self.density_over(PathLabel::ALL.iter().copied())
    }

    /// Absorber density conditioned on the photon exiting on `path`.
    pub fn absorber_density_on_path(&self, path: PathLabel) -> Result<AbsorberDensity<T>> {
        self.density_over(std::iter::once(path))
    }

    fn density_over(&self, paths: impl Iterator<Item = PathLabel>) -> Result<AbsorberDensity<T>> {
        let zero = Complex::new(T::zero(), T::zero());
        let mut m = [[zero; 2]; 2];
        let mut norm = T::zero();
        for path in paths {
            for &row in &Level::ALL {
                for &col in &Level::ALL {
                    if let (Some(b_row), Some(b_col)) =
                        (self.branch(path, row), self.branch(path, col))
                    {
                        // rho_jk = <psi_k | psi_j>
                        let ov = b_col.overlap(b_row)?;
                        m[row.index()][col.index()] += ov;
                        if row == col {
                            norm += ov.re;
                        }
                    }
                }
            }
        }
        if norm <= T::min_positive_value() {
            return Err(Error::ZeroNorm);
        }
        let scale = Complex::new(norm.recip(), T::zero());
        for row in &mut m {
            for e in row.iter_mut() {
                *e *= scale;
            }
        }
        Ok(AbsorberDensity { m })
    }

    /// JSON document with grid header, absorbed probability, and branch
    /// amplitude arrays as `[re, im]` pairs, in canonical branch order.
    pub fn to_json(&self) -> Value {
        let branches: Vec<Value> = self
            .branches
            .iter()
            .map(|((path, level), psi)| {
                let amps: Vec<Value> = psi
                    .amplitudes()
                    .iter()
                    .map(|a| json!([a.re.to_f64_lossy(), a.im.to_f64_lossy()]))
                    .collect();
                json!({
                    "path": path.label(),
                    "level": level.label(),
                    "amplitudes": amps,
                })
            })
            .collect();
        json!({
            "schema": 1,
            "grid": {
                "omega_min": self.grid.omega_min().to_f64_lossy(),
                "delta_omega": self.grid.delta_omega().to_f64_lossy(),
                "n_points": self.grid.n_points(),
            },
            "absorbed_prob": self.absorbed_prob.to_f64_lossy(),
            "branches": branches,
        })
    }
}

/// 2×2 absorber density matrix in the energy basis.
#[derive(Clone, Copy, Debug)]
pub struct AbsorberDensity<T: Scalar> {
    m: [[Complex<T>; 2]; 2],
}

impl<T: Scalar> AbsorberDensity<T> {
    pub fn from_matrix(m: [[Complex<T>; 2]; 2]) -> Self {
        Self { m }
    }

    pub fn element(&self, row: Level, col: Level) -> Complex<T> {
        self.m[row.index()][col.index()]
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    /// `tr(ρ²)`; 1 for pure states, 1/2 at the maximally mixed point.
    pub fn purity(&self) -> T {
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..2 {
            for k in 0..2 {
                acc += self.m[j][k] * self.m[k][j];
            }
        }
        acc.re
    }

    /// `⟨v|ρ|v⟩` for a normalized vector `v`.
    pub fn fidelity(&self, v: &AbsorberVec<T>) -> T {
        let coords = [v.g_amp, v.f_amp];
        let mut acc = Complex::new(T::zero(), T::zero());
        for j in 0..2 {
            for k in 0..2 {
                acc += coords[j].conj() * self.m[j][k] * coords[k];
            }
        }
        acc.re
    }

    /// `tr(ρH) = omega_f · ρ_ff`.
    pub fn mean_energy(&self, params: &AbsorberParams<T>) -> T {
        params.omega_f() * self.m[1][1].re
    }

    /// Largest element-wise deviation from the adjoint.
    pub fn hermiticity_error(&self) -> T {
        let mut worst = T::zero();
        for j in 0..2 {
            for k in 0..2 {
                let d = (self.m[j][k] - self.m[k][j].conj()).norm();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> (T, T) {
        let half = T::lit(0.5);
        let t = self.trace().re * half;
        let det = (self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]).re;
        let disc = (t * t - det).max(T::zero()).sqrt();
        (t - disc, t + disc)
    }
}

/// Joint state with the pointer factored out: one complex amplitude per
/// `(path, level)` slot. Houses pre- and post-selection vectors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteVec<T: Scalar> {
    amps: [Complex<T>; JOINT_DIM],
}

impl<T: Scalar> DiscreteVec<T> {
    pub fn zero() -> Self {
        Self {
            amps: [Complex::new(T::zero(), T::zero()); JOINT_DIM],
        }
    }

    /// Builder: set one slot.
    pub fn with(mut self, path: PathLabel, level: Level, amp: Complex<T>) -> Self {
        self.amps[slot(path, level)] = amp;
        self
    }

    pub fn get(&self, path: PathLabel, level: Level) -> Complex<T> {
        self.amps[slot(path, level)]
    }

    pub fn amplitudes(&self) -> &[Complex<T>; JOINT_DIM] {
        &self.amps
    }

    /// Absorber vector placed on a single path.
    pub fn embed_absorber(path: PathLabel, v: &AbsorberVec<T>) -> Self {
        Self::zero()
            .with(path, Level::Ground, v.g_amp)
            .with(path, Level::Excited, v.f_amp)
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut out = *self;
        for (a, b) in out.amps.iter_mut().zip(&other.amps) {
            *a += *b;
        }
        out
    }

    pub fn scaled(&self, c: Complex<T>) -> Self {
        let mut out = *self;
        for a in out.amps.iter_mut() {
            *a *= c;
        }
        out
    }

    /// `⟨self|other⟩`, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| {
                acc + a.conj() * b
            })
    }

    pub fn norm_sq(&self) -> T {
        self.amps
            .iter()
            .fold(T::zero(), |acc, a| acc + a.norm_sqr())
    }

    pub fn to_json(&self) -> Value {
        let amps: Vec<Value> = self
            .amps
            .iter()
            .map(|a| json!([a.re.to_f64_lossy(), a.im.to_f64_lossy()]))
            .collect();
        Value::Array(amps)
    }
}
