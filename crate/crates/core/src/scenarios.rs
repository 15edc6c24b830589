//! End-to-end measurement scenarios and parameter sweeps.
//!
//! Two pipelines are orchestrated here:
//!
//! * **direct**: photon incident on the absorber, post-selected on the
//!   absorber found outside the path;
//! * **mz**: absorber on arm I of a tuned Mach-Zehnder interferometer,
//!   post-selected on a dark-port detection with the absorber found in the
//!   path — the interaction-free energy transfer.
//!
//! The requested level splitting is snapped to the nearest grid multiple and
//! the snapped value is used everywhere, including in the weak-value
//! predictions, so every comparison is interpolation-free.

use num_complex::Complex;
use serde_json::{json, Map, Value};

use crate::absorber::AbsorberParams;
use crate::analysis::{self, Observable, PostSelection, WeakValueResult};
use crate::error::{Error, Result};
use crate::joint_state::{DiscreteVec, JointState, Level, PathLabel};
use crate::optics;
use crate::pointer_grid::{FrequencyGrid, PointerWavefunction};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    Direct,
    MachZehnder,
    /// Tuned interferometer with no absorber at all; the dark port stays dark.
    MachZehnderNull,
}

impl ScenarioKind {
    pub fn label(self) -> &'static str {
        match self {
            ScenarioKind::Direct => "direct",
            ScenarioKind::MachZehnder => "mz",
            ScenarioKind::MachZehnderNull => "mz_null",
        }
    }
}

/// Scenario parameters plus the grid they are resolved on.
///
/// Frequencies are in pointer-sigma units when `sigma = 1` (the default);
/// only `omega_f / sigma` and the absorber amplitudes matter physically.
#[derive(Clone, Debug)]
pub struct ScenarioConfig<T: Scalar> {
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
    /// Requested level splitting; snapped to the grid during `prepare`.
    pub omega_f: T,
    pub sigma: T,
    pub center: T,
    pub n_points: usize,
    /// Full width of the symmetric grid around `center`.
    pub span: T,
}

impl<T: Scalar> Default for ScenarioConfig<T> {
    /// `alpha = beta = √½`, `omega_f = 0.01`, unit sigma, grid `[-12, 12]`
    /// with 4096 points.
    fn default() -> Self {
        let half_amp = T::lit(0.5).sqrt();
        Self {
            alpha: Complex::new(half_amp, T::zero()),
            beta: Complex::new(half_amp, T::zero()),
            omega_f: T::lit(0.01),
            sigma: T::one(),
            center: T::zero(),
            n_points: 4096,
            span: T::lit(24.0),
        }
    }
}

impl<T: Scalar> ScenarioConfig<T> {
    /// Default grid with real `alpha` in `[0, 1]` and the given splitting.
    pub fn with_real_alpha(alpha: T, omega_f: T) -> Result<Self> {
        if !(T::zero()..=T::one()).contains(&alpha) {
            return Err(Error::InvalidParameter(
                "alpha magnitude must lie in [0, 1]".into(),
            ));
        }
        let beta = (T::one() - alpha * alpha).sqrt();
        Ok(Self {
            alpha: Complex::new(alpha, T::zero()),
            beta: Complex::new(beta, T::zero()),
            omega_f,
            ..Self::default()
        })
    }

    /// Validate, build the grid, snap `omega_f`, and prepare the pointer.
    pub fn prepare(&self) -> Result<ScenarioSetup<T>> {
        if self.sigma <= T::zero() || !self.sigma.is_finite() {
            return Err(Error::InvalidParameter("sigma must be positive".into()));
        }
        if self.omega_f <= T::zero() || !self.omega_f.is_finite() {
            return Err(Error::InvalidParameter("omega_f must be positive".into()));
        }
        if self.span <= T::zero() || !self.span.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidParameter(
                "grid span must be positive and center finite".into(),
            ));
        }
        let half_span = self.span * T::lit(0.5);
        let grid = FrequencyGrid::spanning(
            self.center - half_span,
            self.center + half_span,
            self.n_points,
        )?;
        let quanta = grid.nearest_quanta(self.omega_f);
        if quanta < 1 {
            return Err(Error::InvalidParameter(format!(
                "omega_f = {} snaps to zero grid quanta (delta_omega = {}); refine the grid",
                self.omega_f.to_f64_lossy(),
                grid.delta_omega().to_f64_lossy()
            )));
        }
        let omega_f = T::from_i64(quanta).expect("quanta fits the scalar") * grid.delta_omega();
        let params = AbsorberParams::new(self.alpha, self.beta, omega_f)?;

        // padding rule: 8 sigma both sides, plus one omega_f of margin on the
        // low-frequency side where the shifted branch lands
        let pad = T::lit(8.0) * self.sigma;
        let needed_min = self.center - pad - omega_f;
        let needed_max = self.center + pad;
        if grid.omega_min() > needed_min || grid.omega_max() < needed_max {
            return Err(Error::GridTooNarrow {
                grid_min: grid.omega_min().to_f64_lossy(),
                grid_max: grid.omega_max().to_f64_lossy(),
                needed_min: needed_min.to_f64_lossy(),
                needed_max: needed_max.to_f64_lossy(),
            });
        }

        let pointer = PointerWavefunction::gaussian(grid, self.center, self.sigma)?;
        Ok(ScenarioSetup {
            grid,
            params,
            pointer,
            quanta,
            ratio: omega_f / self.sigma,
        })
    }
}

/// Resolved scenario inputs after grid snapping.
#[derive(Clone, Debug)]
pub struct ScenarioSetup<T: Scalar> {
    pub grid: FrequencyGrid<T>,
    pub params: AbsorberParams<T>,
    pub pointer: PointerWavefunction<T>,
    pub quanta: i64,
    pub ratio: T,
}

/// Pre-selection of the interferometer scenario with the pointer factored
/// out: `β|out⟩|armI⟩ + α|in⟩|armII⟩ + β|out⟩|armII⟩` — the path/absorber
/// state conditioned on the photon not being absorbed.
pub fn mz_pre_selection<T: Scalar>(params: &AbsorberParams<T>) -> DiscreteVec<T> {
    DiscreteVec::embed_absorber(PathLabel::ArmI, &params.out_state())
        .scaled(params.beta())
        .plus(
            &DiscreteVec::embed_absorber(PathLabel::ArmII, &params.in_state())
                .scaled(params.alpha()),
        )
        .plus(
            &DiscreteVec::embed_absorber(PathLabel::ArmII, &params.out_state())
                .scaled(params.beta()),
        )
}

/// Dark-port post-selection retropropagated through the second beam
/// splitter: `|in⟩(|armI⟩ − |armII⟩)`.
pub fn mz_post_selection<T: Scalar>(params: &AbsorberParams<T>) -> DiscreteVec<T> {
    DiscreteVec::embed_absorber(PathLabel::ArmI, &params.in_state()).plus(
        &DiscreteVec::embed_absorber(PathLabel::ArmII, &params.in_state())
            .scaled(Complex::new(-T::one(), T::zero())),
    )
}

/// Pre- and post-selection of the direct scenario: the absorber projected
/// outside the path, photon on its single path.
pub fn direct_selection<T: Scalar>(params: &AbsorberParams<T>) -> DiscreteVec<T> {
    DiscreteVec::embed_absorber(PathLabel::Input, &params.out_state())
}

/// Intermediate joint states of a pipeline, for debugging and golden tests.
#[derive(Clone, Debug)]
pub struct PipelineTrace<T: Scalar> {
    pub stages: Vec<(&'static str, JointState<T>)>,
}

impl<T: Scalar> PipelineTrace<T> {
    pub fn to_json(&self) -> Value {
        let stages: Vec<Value> = self
            .stages
            .iter()
            .map(|(label, state)| json!({ "label": label, "state": state.to_json() }))
            .collect();
        json!({ "schema": 1, "stages": stages })
    }
}

/// Everything a scenario run reports.
#[derive(Clone, Debug)]
pub struct ScenarioReport<T: Scalar> {
    pub kind: ScenarioKind,
    pub alpha: Complex<T>,
    pub beta: Complex<T>,
    /// Level splitting after snapping to the grid.
    pub omega_f: T,
    pub sigma: T,
    /// Measurement strength `omega_f / sigma` (snapped).
    pub ratio: T,
    pub quanta: i64,
    pub p_absorbed: T,
    /// Exit-port probabilities (interferometer kinds only).
    pub p_dark: Option<T>,
    pub p_bright: Option<T>,
    /// Joint probability of the scenario's full post-selection, per photon
    /// launched.
    pub p_postselect: T,
    /// Same path, orthogonal absorber outcome (second order in the ratio).
    pub p_postselect_orth: T,
    pub p_postselect_given_survival: Option<T>,
    pub weak_value: Option<Complex<T>>,
    pub predicted_shift: Option<T>,
    pub exact_shift: Option<T>,
    pub discrepancy: Option<T>,
    /// Mean energy of the conditional absorber state: the energy transfer.
    pub conditional_energy: Option<T>,
    /// Overlap of the conditional absorber state with the post-selected one.
    pub conditional_fidelity: Option<T>,
    /// Purity of the reduced absorber state (survival-conditional).
    pub purity: Option<T>,
    pub pre_selection: Option<DiscreteVec<T>>,
    /// Total probability budget; 1 up to rounding.
    pub budget: T,
}

fn jnum<T: Scalar>(x: T) -> Value {
    serde_json::Number::from_f64(x.to_f64_lossy())
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

fn jopt<T: Scalar>(x: Option<T>) -> Value {
    x.map(jnum).unwrap_or(Value::Null)
}

fn jcomplex<T: Scalar>(c: Complex<T>) -> Value {
    json!([c.re.to_f64_lossy(), c.im.to_f64_lossy()])
}

fn csv_cell<T: Scalar>(x: Option<T>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => "NaN".to_string(),
    }
}

impl<T: Scalar> ScenarioReport<T> {
    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("schema".into(), json!(1));
        m.insert("scenario".into(), json!(self.kind.label()));
        m.insert("alpha".into(), jcomplex(self.alpha));
        m.insert("beta".into(), jcomplex(self.beta));
        m.insert("omega_f".into(), jnum(self.omega_f));
        m.insert("sigma".into(), jnum(self.sigma));
        m.insert("ratio".into(), jnum(self.ratio));
        m.insert("quanta".into(), json!(self.quanta));
        m.insert("p_absorbed".into(), jnum(self.p_absorbed));
        m.insert("p_dark".into(), jopt(self.p_dark));
        m.insert("p_bright".into(), jopt(self.p_bright));
        m.insert("p_postselect".into(), jnum(self.p_postselect));
        m.insert("p_postselect_orth".into(), jnum(self.p_postselect_orth));
        m.insert(
            "p_postselect_given_survival".into(),
            jopt(self.p_postselect_given_survival),
        );
        m.insert(
            "weak_value".into(),
            self.weak_value.map(jcomplex).unwrap_or(Value::Null),
        );
        m.insert("predicted_shift".into(), jopt(self.predicted_shift));
        m.insert("exact_shift".into(), jopt(self.exact_shift));
        m.insert("discrepancy".into(), jopt(self.discrepancy));
        m.insert("conditional_energy".into(), jopt(self.conditional_energy));
        m.insert(
            "conditional_fidelity".into(),
            jopt(self.conditional_fidelity),
        );
        m.insert("purity".into(), jopt(self.purity));
        m.insert(
            "pre_selection".into(),
            self.pre_selection
                .as_ref()
                .map(|v| v.to_json())
                .unwrap_or(Value::Null),
        );
        m.insert("budget".into(), jnum(self.budget));
        Value::Object(m)
    }

    pub fn csv_header(&self) -> &'static str {
        match self.kind {
            ScenarioKind::Direct => {
                "alpha,p_absorbed,p_postselect,exact_shift,weak_value_re,energy_transfer,purity,ratio"
            }
            _ => "alpha,p_dark,p_bright,p_absorbed,exact_shift,weak_value_re,energy_transfer,ratio",
        }
    }

    pub fn csv_row(&self) -> String {
        let alpha_mag = self.alpha.norm();
        match self.kind {
            ScenarioKind::Direct => format!(
                "{},{},{},{},{},{},{},{}",
                alpha_mag,
                self.p_absorbed,
                self.p_postselect,
                csv_cell(self.exact_shift),
                csv_cell(self.weak_value.map(|w| w.re)),
                csv_cell(self.conditional_energy),
                csv_cell(self.purity),
                self.ratio
            ),
            _ => format!(
                "{},{},{},{},{},{},{},{}",
                alpha_mag,
                csv_cell(self.p_dark),
                csv_cell(self.p_bright),
                self.p_absorbed,
                csv_cell(self.exact_shift),
                csv_cell(self.weak_value.map(|w| w.re)),
                csv_cell(self.conditional_energy),
                self.ratio
            ),
        }
    }

    pub fn to_csv(&self) -> String {
        format!("{}\n{}\n", self.csv_header(), self.csv_row())
    }
}

fn check_budget<T: Scalar>(budget: T) -> Result<()> {
    if (budget - T::one()).abs() > T::TOL_BUDGET {
        return Err(Error::BudgetViolation {
            budget: budget.to_f64_lossy(),
        });
    }
    Ok(())
}

/// Photon incident directly on the absorber; post-select the absorber
/// outside its path.
pub fn run_direct<T: Scalar>(config: &ScenarioConfig<T>) -> Result<ScenarioReport<T>> {
    Ok(run_direct_traced(config)?.0)
}

pub fn run_direct_traced<T: Scalar>(
    config: &ScenarioConfig<T>,
) -> Result<(ScenarioReport<T>, PipelineTrace<T>)> {
    let setup = config.prepare()?;
    let params = setup.params;

    let initial = JointState::new(setup.grid).with_branch(
        PathLabel::Input,
        Level::Ground,
        setup.pointer.clone(),
    )?;
    let coupled = optics::nonabsorption_interaction(&initial, PathLabel::Input, &params)?;
    let budget = coupled.probability_budget();
    check_budget(budget)?;

    let sel = PostSelection::new(params.out_state(), PathLabel::Input)?;
    let sel_orth = PostSelection::new(params.in_state(), PathLabel::Input)?;
    let (p_post, chi) = analysis::post_select(&coupled, &sel)?;
    let (p_orth, _) = analysis::post_select(&coupled, &sel_orth)?;

    let pre = direct_selection(&params);
    let obs = Observable::neg_hamiltonian(&params);
    let weak_value = analysis::weak_value(&pre, &pre, &obs)?;

    let exact_shift = chi.as_ref().map(|c| c.mean_frequency() - config.center);
    let (predicted_shift, discrepancy) = match exact_shift {
        Some(shift) => {
            let r = WeakValueResult::new(weak_value, p_post, shift)?;
            (Some(r.predicted_shift), Some(r.discrepancy))
        }
        None => (Some(weak_value.re), None),
    };

    let (conditional_energy, conditional_fidelity, purity) =
        match coupled.reduced_absorber_density() {
            Ok(rho) => (
                Some(rho.mean_energy(&params)),
                Some(rho.fidelity(&params.out_state())),
                Some(rho.purity()),
            ),
            Err(Error::ZeroNorm) => (None, None, None),
            Err(e) => return Err(e),
        };

    let p_absorbed = coupled.absorbed_prob();
    let survival = budget - p_absorbed;
    let p_postselect_given_survival = if survival > T::min_positive_value() {
        Some(p_post * budget / survival)
    } else {
        None
    };

    let report = ScenarioReport {
        kind: ScenarioKind::Direct,
        alpha: params.alpha(),
        beta: params.beta(),
        omega_f: params.omega_f(),
        sigma: config.sigma,
        ratio: setup.ratio,
        quanta: setup.quanta,
        p_absorbed,
        p_dark: None,
        p_bright: None,
        p_postselect: p_post,
        p_postselect_orth: p_orth,
        p_postselect_given_survival,
        weak_value: Some(weak_value),
        predicted_shift,
        exact_shift,
        discrepancy,
        conditional_energy,
        conditional_fidelity,
        purity,
        pre_selection: Some(pre),
        budget,
    };
    let trace = PipelineTrace {
        stages: vec![("initial", initial), ("after_interaction", coupled)],
    };
    Ok((report, trace))
}

/// Absorber on arm I of a tuned interferometer; post-select a dark-port
/// detection with the absorber found in the path.
pub fn run_mz<T: Scalar>(config: &ScenarioConfig<T>) -> Result<ScenarioReport<T>> {
    Ok(run_mz_traced(config)?.0)
}

pub fn run_mz_traced<T: Scalar>(
    config: &ScenarioConfig<T>,
) -> Result<(ScenarioReport<T>, PipelineTrace<T>)> {
    let setup = config.prepare()?;
    let params = setup.params;

    let initial = JointState::new(setup.grid).with_branch(
        PathLabel::Input,
        Level::Ground,
        setup.pointer.clone(),
    )?;
    let split = optics::first_beam_splitter(&initial)?;
    let coupled = optics::nonabsorption_interaction(&split, PathLabel::ArmI, &params)?;
    let exited = optics::second_beam_splitter(&coupled)?;
    let budget = exited.probability_budget();
    check_budget(budget)?;

    let p_absorbed = exited.absorbed_prob();
    let p_dark = exited.path_norm_sq(PathLabel::Dark) / budget;
    let p_bright = exited.path_norm_sq(PathLabel::Bright) / budget;

    let sel = PostSelection::new(params.in_state(), PathLabel::Dark)?;
    let sel_orth = PostSelection::new(params.out_state(), PathLabel::Dark)?;
    let (p_post, chi) = analysis::post_select(&exited, &sel)?;
    let (p_orth, _) = analysis::post_select(&exited, &sel_orth)?;

    let pre = mz_pre_selection(&params);
    let post = mz_post_selection(&params);
    let obs = Observable::neg_hamiltonian_on_path(PathLabel::ArmI, &params);
    let weak_value = match analysis::weak_value(&pre, &post, &obs) {
        Ok(wv) => Some(wv),
        Err(Error::OrthogonalSelection) => None,
        Err(e) => return Err(e),
    };

    let exact_shift = chi.as_ref().map(|c| c.mean_frequency() - config.center);
    let (predicted_shift, discrepancy) = match (weak_value, exact_shift) {
        (Some(wv), Some(shift)) => {
            let r = WeakValueResult::new(wv, p_post, shift)?;
            (Some(r.predicted_shift), Some(r.discrepancy))
        }
        (Some(wv), None) => (Some(wv.re), None),
        _ => (None, None),
    };

    let (conditional_energy, conditional_fidelity) =
        match exited.absorber_density_on_path(PathLabel::Dark) {
            Ok(rho) => (
                Some(rho.mean_energy(&params)),
                Some(rho.fidelity(&params.in_state())),
            ),
            Err(Error::ZeroNorm) => (None, None),
            Err(e) => return Err(e),
        };
    let purity = match exited.reduced_absorber_density() {
        Ok(rho) => Some(rho.purity()),
        Err(Error::ZeroNorm) => None,
        Err(e) => return Err(e),
    };

    let survival = budget - p_absorbed;
    let p_postselect_given_survival = if survival > T::min_positive_value() {
        Some(p_post * budget / survival)
    } else {
        None
    };

    let report = ScenarioReport {
        kind: ScenarioKind::MachZehnder,
        alpha: params.alpha(),
        beta: params.beta(),
        omega_f: params.omega_f(),
        sigma: config.sigma,
        ratio: setup.ratio,
        quanta: setup.quanta,
        p_absorbed,
        p_dark: Some(p_dark),
        p_bright: Some(p_bright),
        p_postselect: p_post,
        p_postselect_orth: p_orth,
        p_postselect_given_survival,
        weak_value,
        predicted_shift,
        exact_shift,
        discrepancy,
        conditional_energy,
        conditional_fidelity,
        purity,
        pre_selection: Some(pre),
        budget,
    };
    let trace = PipelineTrace {
        stages: vec![
            ("initial", initial),
            ("after_first_beam_splitter", split),
            ("after_interaction", coupled),
            ("after_second_beam_splitter", exited),
        ],
    };
    Ok((report, trace))
}

/// Tuned interferometer with the interaction replaced by a free pass; the
/// dark port never fires.
pub fn run_mz_null<T: Scalar>(config: &ScenarioConfig<T>) -> Result<ScenarioReport<T>> {
    let setup = config.prepare()?;

    let initial = JointState::new(setup.grid).with_branch(
        PathLabel::Input,
        Level::Ground,
        setup.pointer.clone(),
    )?;
    let split = optics::first_beam_splitter(&initial)?;
    let passed = optics::free_pass(&split, PathLabel::ArmI)?;
    let exited = optics::second_beam_splitter(&passed)?;
    let budget = exited.probability_budget();
    check_budget(budget)?;

    let p_dark = exited.path_norm_sq(PathLabel::Dark) / budget;
    let p_bright = exited.path_norm_sq(PathLabel::Bright) / budget;
    let purity = match exited.reduced_absorber_density() {
        Ok(rho) => Some(rho.purity()),
        Err(Error::ZeroNorm) => None,
        Err(e) => return Err(e),
    };

    Ok(ScenarioReport {
        kind: ScenarioKind::MachZehnderNull,
        alpha: config.alpha,
        beta: config.beta,
        omega_f: setup.params.omega_f(),
        sigma: config.sigma,
        ratio: setup.ratio,
        quanta: setup.quanta,
        p_absorbed: exited.absorbed_prob(),
        p_dark: Some(p_dark),
        p_bright: Some(p_bright),
        p_postselect: p_dark,
        p_postselect_orth: T::zero(),
        p_postselect_given_survival: Some(p_dark),
        weak_value: None,
        predicted_shift: None,
        exact_shift: None,
        discrepancy: None,
        conditional_energy: None,
        conditional_fidelity: None,
        purity,
        pre_selection: None,
        budget,
    })
}

/// One sweep row: exact shift versus weak-value prediction at one ratio.
#[derive(Clone, Copy, Debug)]
pub struct ConvergenceRow<T: Scalar> {
    /// Snapped `omega_f / sigma`.
    pub ratio: T,
    pub exact_shift: T,
    pub predicted_shift: T,
    pub discrepancy: T,
}

#[derive(Clone, Debug)]
pub struct ConvergenceTable<T: Scalar> {
    pub kind: ScenarioKind,
    pub rows: Vec<ConvergenceRow<T>>,
    /// Fitted log-log slope of `discrepancy` versus `ratio`; `None` when
    /// undefined (fewer than two rows or a vanishing discrepancy).
    pub slope: Option<T>,
}

impl<T: Scalar> ConvergenceTable<T> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("ratio,exact_shift,predicted_shift,abs_discrepancy\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.ratio, row.exact_shift, row.predicted_shift, row.discrepancy
            ));
        }
        match self.slope {
            Some(s) => out.push_str(&format!("# fitted_slope={s}\n")),
            None => out.push_str("# fitted_slope=undefined\n"),
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "ratio": jnum(r.ratio),
                    "exact_shift": jnum(r.exact_shift),
                    "predicted_shift": jnum(r.predicted_shift),
                    "abs_discrepancy": jnum(r.discrepancy),
                })
            })
            .collect();
        json!({
            "schema": 1,
            "sweep": "ratio",
            "scenario": self.kind.label(),
            "rows": rows,
            "fitted_slope": jopt(self.slope),
        })
    }
}

/// Least-squares slope of `ln(discrepancy)` against `ln(ratio)`.
fn fit_loglog<T: Scalar>(rows: &[ConvergenceRow<T>]) -> Option<T> {
    if rows.len() < 2 {
        return None;
    }
    let mut points = Vec::with_capacity(rows.len());
    for r in rows {
        if r.discrepancy <= T::zero()
            || r.discrepancy.is_nan()
            || r.ratio <= T::zero()
            || r.ratio.is_nan()
        {
            return None;
        }
        points.push((r.ratio.ln(), r.discrepancy.ln()));
    }
    let n = T::from_usize(points.len()).expect("row count fits the scalar");
    let mean_x = points.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let mean_y = points.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    for (x, y) in points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx <= T::zero() {
        return None;
    }
    Some(sxy / sxx)
}

/// Run one scenario per measurement-strength ratio and fit the convergence
/// order of the exact-versus-predicted discrepancy.
pub fn convergence_sweep<T: Scalar>(
    config: &ScenarioConfig<T>,
    kind: ScenarioKind,
    ratios: &[T],
    jobs: usize,
) -> Result<ConvergenceTable<T>> {
    if ratios.is_empty() {
        return Err(Error::InvalidParameter("ratio list is empty".into()));
    }
    for &r in ratios {
        if !(r > T::zero() && r < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "ratio {} outside (0, 1)",
                r.to_f64_lossy()
            )));
        }
    }
    let rows = par_map(jobs, ratios, |&ratio| {
        let mut c = config.clone();
        c.omega_f = ratio * config.sigma;
        let report = match kind {
            ScenarioKind::Direct => run_direct(&c)?,
            ScenarioKind::MachZehnder => run_mz(&c)?,
            ScenarioKind::MachZehnderNull => {
                return Err(Error::InvalidParameter(
                    "the null scenario has no weak value to converge to".into(),
                ))
            }
        };
        let exact = report.exact_shift.ok_or_else(|| {
            Error::InvalidParameter("degenerate configuration: post-selection never fires".into())
        })?;
        let predicted = report.predicted_shift.ok_or(Error::OrthogonalSelection)?;
        Ok(ConvergenceRow {
            ratio: report.ratio,
            exact_shift: exact,
            predicted_shift: predicted,
            discrepancy: (exact - predicted).abs(),
        })
    })?;
    let slope = fit_loglog(&rows);
    Ok(ConvergenceTable { kind, rows, slope })
}

/// One interferometer run per absorber amplitude.
#[derive(Clone, Copy, Debug)]
pub struct AlphaRow<T: Scalar> {
    pub alpha: T,
    pub p_dark: T,
    pub p_bright: T,
    pub p_absorbed: T,
    /// NaN where the dark port never fires.
    pub exact_shift: T,
    pub weak_value_re: T,
    pub energy_transfer: T,
    pub ratio: T,
}

#[derive(Clone, Debug)]
pub struct AlphaSweepTable<T: Scalar> {
    pub rows: Vec<AlphaRow<T>>,
}

impl<T: Scalar> AlphaSweepTable<T> {
    pub const CSV_HEADER: &'static str =
        "alpha,p_dark,p_bright,p_absorbed,exact_shift,weak_value_re,energy_transfer,ratio";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.alpha,
                r.p_dark,
                r.p_bright,
                r.p_absorbed,
                r.exact_shift,
                r.weak_value_re,
                r.energy_transfer,
                r.ratio
            ));
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                json!({
                    "alpha": jnum(r.alpha),
                    "p_dark": jnum(r.p_dark),
                    "p_bright": jnum(r.p_bright),
                    "p_absorbed": jnum(r.p_absorbed),
                    "exact_shift": jnum(r.exact_shift),
                    "weak_value_re": jnum(r.weak_value_re),
                    "energy_transfer": jnum(r.energy_transfer),
                    "ratio": jnum(r.ratio),
                })
            })
            .collect();
        json!({ "schema": 1, "sweep": "alpha", "rows": rows })
    }
}

/// One [`run_mz`] per real alpha in `[0, 1]`.
pub fn alpha_sweep<T: Scalar>(
    config: &ScenarioConfig<T>,
    alphas: &[T],
    jobs: usize,
) -> Result<AlphaSweepTable<T>> {
    if alphas.is_empty() {
        return Err(Error::InvalidParameter("alpha list is empty".into()));
    }
    for &a in alphas {
        if !(T::zero()..=T::one()).contains(&a) {
            return Err(Error::InvalidParameter(format!(
                "alpha {} outside [0, 1]",
                a.to_f64_lossy()
            )));
        }
    }
    let rows = par_map(jobs, alphas, |&alpha| {
        let mut c = config.clone();
        c.alpha = Complex::new(alpha, T::zero());
        c.beta = Complex::new((T::one() - alpha * alpha).sqrt(), T::zero());
        let report = run_mz(&c)?;
        Ok(AlphaRow {
            alpha,
            p_dark: report.p_dark.unwrap_or_else(T::nan),
            p_bright: report.p_bright.unwrap_or_else(T::nan),
            p_absorbed: report.p_absorbed,
            exact_shift: report.exact_shift.unwrap_or_else(T::nan),
            weak_value_re: report.weak_value.map(|w| w.re).unwrap_or_else(T::nan),
            energy_transfer: report.conditional_energy.unwrap_or_else(T::nan),
            ratio: report.ratio,
        })
    })?;
    Ok(AlphaSweepTable { rows })
}

/// Deterministic parallel map: results are assembled in input order and the
/// first error (by input index) wins regardless of worker scheduling.
fn par_map<I, O, F>(jobs: usize, items: &[I], f: F) -> Result<Vec<O>>
where
    I: Sync,
    O: Send,
    F: Fn(&I) -> Result<O> + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs <= 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<Result<O>>> = (0..items.len()).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|worker| {
                let f = &f;
                scope.spawn(move || {
                    let mut acc = Vec::new();
                    let mut i = worker;
                    while i < items.len() {
                        acc.push((i, f(&items[i])));
                        i += jobs;
                    }
                    acc
                })
            })
            .collect();
        for handle in handles {
            for (i, r) in handle.join().expect("sweep worker panicked") {
                slots[i] = Some(r);
            }
        }
    });
    let mut out = Vec::with_capacity(items.len());
    for slot in slots {
        out.push(slot.expect("every index visited")?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn direct_transparent_absorber() {
        let config = ScenarioConfig::with_real_alpha(0.0, 0.01).unwrap();
        let r = run_direct(&config).unwrap();
        assert_eq!(r.p_absorbed, 0.0);
        assert_abs_diff_eq!(r.exact_shift.unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_postselect, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn direct_weak_regime_shift_tracks_the_weak_value() {
        let config = ScenarioConfig::with_real_alpha(FRAC_1_SQRT_2, 0.01).unwrap();
        let r = run_direct(&config).unwrap();
        assert_abs_diff_eq!(r.p_absorbed, 0.5, epsilon = 1e-12);
        let ratio = r.exact_shift.unwrap() / r.predicted_shift.unwrap();
        assert!((ratio - 1.0).abs() <= 0.01, "shift ratio {ratio}");
        // first-order reading: shift ≈ -omega_f |alpha|^2
        assert_abs_diff_eq!(
            r.predicted_shift.unwrap(),
            -r.omega_f * 0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn direct_exact_shift_matches_the_closed_form_at_moderate_ratio() {
        // frozen quadrature-oracle value for alpha^2 = 0.5, ratio 0.1
        // (snapped to 0.09963369963369964)
        let config = ScenarioConfig::with_real_alpha(FRAC_1_SQRT_2, 0.1).unwrap();
        let r = run_direct(&config).unwrap();
        assert_abs_diff_eq!(
            r.exact_shift.unwrap(),
            -0.049_816_849_816_849_82,
            epsilon = 1e-6
        );
    }

    #[test]
    fn mz_classical_obstruction() {
        let config = ScenarioConfig::with_real_alpha(1.0, 0.01).unwrap();
        let r = run_mz(&config).unwrap();
        assert_abs_diff_eq!(r.p_dark.unwrap(), 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(r.p_absorbed, 0.5, epsilon = 1e-12);
        assert_eq!(r.conditional_energy.unwrap(), 0.0);
    }

    #[test]
    fn mz_transparent_absorber_keeps_the_dark_port_dark() {
        let config = ScenarioConfig::with_real_alpha(0.0, 0.01).unwrap();
        let r = run_mz(&config).unwrap();
        assert!(r.p_dark.unwrap() <= 1e-12);
        assert!(r.weak_value.is_none());
        assert!(r.exact_shift.is_none());
    }

    #[test]
    fn mz_weak_regime_report() {
        let config = ScenarioConfig::with_real_alpha(FRAC_1_SQRT_2, 0.01).unwrap();
        let r = run_mz(&config).unwrap();
        let beta_sq = 0.5;
        assert_abs_diff_eq!(r.p_dark.unwrap(), 0.5 / 4.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.p_absorbed, 0.25, epsilon = 1e-12);
        let shift_ratio = r.exact_shift.unwrap() / (-r.omega_f * beta_sq);
        assert!((shift_ratio - 1.0).abs() <= 0.01, "{shift_ratio}");
        let energy_ratio = r.conditional_energy.unwrap() / (r.omega_f * beta_sq);
        assert!((energy_ratio - 1.0).abs() <= 0.01, "{energy_ratio}");
        // unit budget across the three outcomes
        let total = r.p_dark.unwrap() + r.p_bright.unwrap() + r.p_absorbed;
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn null_interferometer_dark_port_never_fires() {
        let r = run_mz_null(&ScenarioConfig::<f64>::default()).unwrap();
        assert!(r.p_dark.unwrap() <= 1e-12);
        assert_abs_diff_eq!(r.p_bright.unwrap(), 1.0, epsilon = 1e-10);
        assert_eq!(r.p_absorbed, 0.0);
    }

    #[test]
    fn convergence_discrepancy_shrinks_superlinearly() {
        let config = ScenarioConfig::with_real_alpha(0.6, 0.01).unwrap();
        let table = convergence_sweep(&config, ScenarioKind::Direct, &[0.1, 0.01], 1).unwrap();
        let d0 = table.rows[0].discrepancy;
        let d1 = table.rows[1].discrepancy;
        assert!(
            d0 / d1 >= 50.0,
            "discrepancy shrank only {}x per decade",
            d0 / d1
        );
    }

    #[test]
    fn convergence_single_ratio_has_no_slope() {
        let config = ScenarioConfig::with_real_alpha(0.6, 0.01).unwrap();
        let table = convergence_sweep(&config, ScenarioKind::MachZehnder, &[0.1], 1).unwrap();
        assert_eq!(table.rows.len(), 1);
        assert!(table.slope.is_none());
    }

    #[test]
    fn convergence_rejects_out_of_range_ratios() {
        let config = ScenarioConfig::with_real_alpha(0.6, 0.01).unwrap();
        assert!(convergence_sweep(&config, ScenarioKind::Direct, &[0.0], 1).is_err());
        assert!(convergence_sweep(&config, ScenarioKind::Direct, &[1.0], 1).is_err());
    }

    #[test]
    fn convergence_guardrail_fires_on_insufficient_span() {
        let mut config = ScenarioConfig::with_real_alpha(0.6, 0.01).unwrap();
        config.span = 10.0; // < 16 sigma: cannot hold the 8-sigma support
        let err = convergence_sweep(&config, ScenarioKind::Direct, &[0.5], 1).unwrap_err();
        assert!(err.is_grid_guardrail(), "got {err:?}");
    }

    #[test]
    fn alpha_sweep_matches_closed_forms() {
        let config = ScenarioConfig::<f64>::default();
        let table = alpha_sweep(&config, &[0.0, 0.5, 1.0], 1).unwrap();
        let expected_dark = [0.0, 1.0 / 16.0, 0.25];
        for (row, expected) in table.rows.iter().zip(expected_dark) {
            assert_abs_diff_eq!(row.p_dark, expected, epsilon = 1e-10);
        }
        // energy transfer column: omega_f (1 - alpha^2) within 1% where defined
        let mid = &table.rows[1];
        let expected_energy = mid.ratio * (1.0 - 0.25);
        assert!((mid.energy_transfer / expected_energy - 1.0).abs() <= 0.01);
        // dark-port probability grows monotonically with alpha
        assert!(table.rows[0].p_dark < table.rows[1].p_dark);
        assert!(table.rows[1].p_dark < table.rows[2].p_dark);
        // the closed alpha=0 port emits NaN markers, not fake numbers
        assert!(table.rows[0].exact_shift.is_nan());
        assert!(table.rows[0].weak_value_re.is_nan());
    }

    #[test]
    fn sweeps_are_deterministic_across_job_counts() {
        let config = ScenarioConfig::<f64>::default();
        let alphas = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let serial = alpha_sweep(&config, &alphas, 1).unwrap().to_csv();
        let parallel = alpha_sweep(&config, &alphas, 4).unwrap().to_csv();
        assert_eq!(serial, parallel);

        let cfg6 = ScenarioConfig::with_real_alpha(0.6, 0.01).unwrap();
        let ratios = [0.2, 0.1, 0.05, 0.02, 0.01];
        let a = convergence_sweep(&cfg6, ScenarioKind::MachZehnder, &ratios, 1)
            .unwrap()
            .to_csv();
        let b = convergence_sweep(&cfg6, ScenarioKind::MachZehnder, &ratios, 3)
            .unwrap()
            .to_csv();
        assert_eq!(a, b);
    }

    #[test]
    fn report_json_has_the_documented_keys() {
        let r = run_mz(&ScenarioConfig::<f64>::default()).unwrap();
        let v = r.to_json();
        for key in [
            "schema",
            "scenario",
            "p_dark",
            "p_bright",
            "p_absorbed",
            "weak_value",
            "exact_shift",
            "purity",
        ] {
            assert!(v.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(v["schema"], 1);
        assert_eq!(v["scenario"], "mz");
    }

    #[test]
    fn every_report_keeps_the_unit_budget() {
        for alpha in [0.0, 0.3, FRAC_1_SQRT_2, 0.95, 1.0] {
            let config = ScenarioConfig::with_real_alpha(alpha, 0.01).unwrap();
            for report in [run_direct(&config).unwrap(), run_mz(&config).unwrap()] {
                assert_abs_diff_eq!(report.budget, 1.0, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn snapping_is_exact() {
        let config = ScenarioConfig::<f64>::default();
        let setup = config.prepare().unwrap();
        let q = setup.grid.aligned_quanta(setup.params.omega_f()).unwrap();
        assert_eq!(q, setup.quanta);
        assert!(setup.quanta >= 1);
    }

    #[test]
    fn omega_f_below_grid_resolution_is_rejected() {
        let config = ScenarioConfig::with_real_alpha(0.5, 1e-4).unwrap();
        assert!(matches!(config.prepare(), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn trace_exposes_the_pipeline_stages() {
        let (_, trace) = run_mz_traced(&ScenarioConfig::<f64>::default()).unwrap();
        let labels: Vec<_> = trace.stages.iter().map(|(l, _)| *l).collect();
        assert_eq!(
            labels,
            vec![
                "initial",
                "after_first_beam_splitter",
                "after_interaction",
                "after_second_beam_splitter"
            ]
        );
        let json = trace.to_json();
        assert_eq!(json["stages"].as_array().unwrap().len(), 4);
    }
}
