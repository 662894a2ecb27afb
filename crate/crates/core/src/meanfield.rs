//! Mean-field equations of motion for the cavity amplitude and the
//! per-transition atomic variables, with every atom in a given ground
//! sublevel following the same internal dynamics.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{CouplingSet, Sublevel};
use crate::ode::{self, OdeSystem, StepStats, Tolerances};
use crate::scenarios::{atom_number_ballistic, CloudParams};

/// Cavity drive and detunings. All values in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    /// Cavity pump rate η.
    pub eta: f64,
    /// Probe–atom detuning Δ_a.
    pub delta_a: f64,
    /// Probe–cavity detuning Δ_c.
    pub delta_c: f64,
    /// Cavity field decay rate κ.
    pub kappa: f64,
}

impl DriveParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::invalid(format!("kappa must be positive, got {}", self.kappa)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be non-negative, got {}", self.eta)));
        }
        if !self.delta_a.is_finite() || !self.delta_c.is_finite() {
            return Err(Error::invalid("detunings must be finite"));
        }
        Ok(())
    }
}

/// Cavity amplitude and per-ground-sublevel atomic variables.
///
/// `population[i]` is the probability P_m of taking part in the transition
/// driven from ground level `levels[i]` (ground plus paired excited
/// population); `rho_ee[i]` is the population of the paired excited level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub levels: Vec<Sublevel>,
    pub a: Complex64,
    pub sigma: Vec<Complex64>,
    pub population: Vec<f64>,
    pub rho_ee: Vec<f64>,
}

impl MeanFieldState {
    fn to_vec(&self) -> Vec<f64> {
        let mut y = Vec::with_capacity(2 + 4 * self.levels.len());
        y.push(self.a.re);
        y.push(self.a.im);
        for i in 0..self.levels.len() {
            y.extend_from_slice(&[self.sigma[i].re, self.sigma[i].im, self.population[i], self.rho_ee[i]]);
        }
        y
    }

    fn from_slice(levels: &[Sublevel], y: &[f64]) -> Self {
        let n = levels.len();
        MeanFieldState {
            levels: levels.to_vec(),
            a: Complex64::new(y[0], y[1]),
            sigma: (0..n).map(|i| Complex64::new(y[2 + 4 * i], y[3 + 4 * i])).collect(),
            population: (0..n).map(|i| y[4 + 4 * i]).collect(),
            rho_ee: (0..n).map(|i| y[5 + 4 * i]).collect(),
        }
    }

    pub fn photon_number(&self) -> f64 {
        self.a.norm_sqr()
    }

    pub fn total_population(&self) -> f64 {
        self.population.iter().sum()
    }

    fn check_against(&self, couplings: &CouplingSet) -> Result<()> {
        if self.levels != couplings.ground_levels() {
            return Err(Error::invalid(format!(
                "state sublevels {:?} do not match coupling sublevels {:?}",
                self.levels,
                couplings.ground_levels()
            )));
        }
        let n = self.levels.len();
        if self.sigma.len() != n || self.population.len() != n || self.rho_ee.len() != n {
            return Err(Error::invalid("state vectors have inconsistent lengths"));
        }
        Ok(())
    }
}

/// Time derivative of a [`MeanFieldState`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateDerivative {
    pub a: Complex64,
    pub sigma: Vec<Complex64>,
    pub population: Vec<f64>,
    pub rho_ee: Vec<f64>,
}

/// Ground-state preparation: normalized populations, empty cavity, no
/// coherence, no excitation.
pub fn initial_state(populations: &BTreeMap<Sublevel, f64>) -> Result<MeanFieldState> {
    if let Some((m, p)) = populations.iter().find(|(_, p)| !(**p >= 0.0 && p.is_finite())) {
        return Err(Error::invalid(format!("population of m = {m} must be non-negative, got {p}")));
    }
    let total: f64 = populations.values().sum();
    if total <= 0.0 {
        return Err(Error::invalid("all populations are zero"));
    }
    let n = populations.len();
    Ok(MeanFieldState {
        levels: populations.keys().copied().collect(),
        a: Complex64::new(0.0, 0.0),
        sigma: vec![Complex64::new(0.0, 0.0); n],
        population: populations.values().map(|p| p / total).collect(),
        rho_ee: vec![0.0; n],
    })
}

/// Equal populations over every ground sublevel of `couplings`.
pub fn equal_populations(couplings: &CouplingSet) -> BTreeMap<Sublevel, f64> {
    couplings.ground_levels().iter().map(|&m| (m, 1.0)).collect()
}

/// Right-hand side of the mean-field equations with the sum over identical
/// atoms replaced by the atom number `n_atoms`.
pub fn derivatives(
    state: &MeanFieldState,
    params: &DriveParams,
    couplings: &CouplingSet,
    n_atoms: f64,
) -> Result<StateDerivative> {
    state.check_against(couplings)?;
    let system = MeanFieldSystem::new(params, couplings, AtomNumberModel::Constant(n_atoms));
    let y = state.to_vec();
    let mut dy = vec![0.0; y.len()];
    system.rhs(0.0, &y, &mut dy);
    let d = MeanFieldState::from_slice(&state.levels, &dy);
    Ok(StateDerivative { a: d.a, sigma: d.sigma, population: d.population, rho_ee: d.rho_ee })
}

/// Effective atom number as a function of time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum AtomNumberModel {
    Constant(f64),
    Ballistic(CloudParams),
    /// Piecewise-linear in time, held constant outside the table.
    Table(Vec<(f64, f64)>),
}

impl AtomNumberModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            AtomNumberModel::Constant(n) => {
                if !(*n >= 0.0 && n.is_finite()) {
                    return Err(Error::invalid(format!("atom number must be non-negative, got {n}")));
                }
            }
            AtomNumberModel::Ballistic(cloud) => cloud.validate()?,
            AtomNumberModel::Table(points) => {
                if points.is_empty() {
                    return Err(Error::invalid("atom-number table is empty"));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::invalid("atom-number table times must be strictly increasing"));
                }
                if points.iter().any(|p| !(p.1 >= 0.0 && p.1.is_finite())) {
                    return Err(Error::invalid("atom-number table entries must be non-negative"));
                }
            }
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        match self {
            AtomNumberModel::Constant(n) => *n,
            AtomNumberModel::Ballistic(cloud) => atom_number_ballistic(t.max(0.0), cloud),
            AtomNumberModel::Table(points) => {
                let i = points.partition_point(|p| p.0 <= t);
                if i == 0 {
                    points[0].1
                } else if i == points.len() {
                    points[i - 1].1
                } else {
                    let (t0, n0) = points[i - 1];
                    let (t1, n1) = points[i];
                    n0 + (n1 - n0) * (t - t0) / (t1 - t0)
                }
            }
        }
    }

    /// Largest value over `[t0, t1]`, used to bound the step size.
    pub fn max_over(&self, t0: f64, t1: f64) -> f64 {
        match self {
            AtomNumberModel::Constant(n) => *n,
            AtomNumberModel::Ballistic(_) => self.at(t0),
            AtomNumberModel::Table(points) => points
                .iter()
                .filter(|p| p.0 >= t0 && p.0 <= t1)
                .map(|p| p.1)
                .fold(self.at(t0).max(self.at(t1)), f64::max),
        }
    }
}

/// Integrator controls for mean-field and rate-equation runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub rtol: f64,
    pub atol: f64,
    /// The step is capped at `max_step_factor / max(κ, Γ, g₀√N)`.
    pub max_step_factor: f64,
    pub max_steps: u64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        IntegratorSettings { rtol: 1e-8, atol: 1e-10, max_step_factor: 0.1, max_steps: 500_000_000 }
    }
}

impl IntegratorSettings {
    pub(crate) fn tolerances(&self, fastest_rate: f64) -> Tolerances {
        Tolerances {
            rtol: self.rtol,
            atol: self.atol,
            max_step: (fastest_rate > 0.0).then(|| self.max_step_factor / fastest_rate),
            max_steps: self.max_steps,
        }
    }
}

/// One sampled point of a mean-field run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub a: Complex64,
    pub photon_number: f64,
    pub population: Vec<f64>,
    pub rho_ee: Vec<f64>,
    /// g_eff = g₀ √(Σ c_m² P_m), rad/s.
    pub g_eff: f64,
    pub n_eff: f64,
}

impl Record {
    /// Collective coupling g_eff √N, rad/s.
    pub fn collective_coupling(&self) -> f64 {
        self.g_eff * self.n_eff.sqrt()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    /// max over accepted steps of |Σ_m P_m − 1|.
    pub conservation_drift: f64,
    /// max over accepted steps and sublevels of ρ^ee.
    pub peak_rho_ee: f64,
    /// min over accepted steps and sublevels of P_m and ρ^ee.
    pub min_population: f64,
    pub steps: StepStats,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub levels: Vec<Sublevel>,
    pub times: Vec<f64>,
    pub records: Vec<Record>,
    /// Full state at the end of the span, for continuing a run.
    pub final_state: MeanFieldState,
    pub metadata: RunMetadata,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_state_populations(&self) -> Option<&[f64]> {
        self.records.last().map(|r| r.population.as_slice())
    }

    pub fn photon_numbers(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.photon_number).collect()
    }
}

/// `n` evenly spaced samples from `t0` to `t1` inclusive.
pub fn uniform_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![t1],
        _ => (0..n).map(|i| if i + 1 == n { t1 } else { t0 + (t1 - t0) * (i as f64 / (n - 1) as f64) }).collect(),
    }
}

struct MeanFieldSystem {
    n_levels: usize,
    eta: f64,
    delta_a: f64,
    delta_c: f64,
    kappa: f64,
    gamma: f64,
    g: Vec<f64>,
    /// refill[i * n + j]: branching of the excited partner of j into ground i.
    refill: Vec<f64>,
    model: AtomNumberModel,
    n_atoms: f64,
    drift: f64,
    peak_rho: f64,
    min_pop: f64,
    last: Vec<f64>,
}

impl MeanFieldSystem {
    fn new(params: &DriveParams, couplings: &CouplingSet, model: AtomNumberModel) -> Self {
        let n_atoms = model.at(0.0);
        MeanFieldSystem {
            n_levels: couplings.len(),
            eta: params.eta,
            delta_a: params.delta_a,
            delta_c: params.delta_c,
            kappa: params.kappa,
            gamma: couplings.gamma(),
            g: couplings.couplings().to_vec(),
            refill: couplings.refill_matrix().into_iter().flatten().collect(),
            model,
            n_atoms,
            drift: 0.0,
            peak_rho: 0.0,
            min_pop: f64::INFINITY,
            last: Vec::new(),
        }
    }

    fn track(&mut self, y: &[f64]) {
        let mut total = 0.0;
        for i in 0..self.n_levels {
            let p = y[4 + 4 * i];
            let rho = y[5 + 4 * i];
            total += p;
            self.peak_rho = self.peak_rho.max(rho);
            self.min_pop = self.min_pop.min(p).min(rho);
        }
        self.drift = self.drift.max((total - 1.0).abs());
    }
}

impl OdeSystem for MeanFieldSystem {
    fn dim(&self) -> usize {
        2 + 4 * self.n_levels
    }

    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let n = self.n_levels;
        let a = Complex64::new(y[0], y[1]);
        let half_gamma = 0.5 * self.gamma;

        let mut coherence_sum = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let sigma = Complex64::new(y[2 + 4 * i], y[3 + 4 * i]);
            let p = y[4 + 4 * i];
            let rho = y[5 + 4 * i];
            let g = self.g[i];
            coherence_sum += g * sigma;

            let inversion = 2.0 * rho - p;
            let dsigma = -Complex64::new(half_gamma, -self.delta_a) * sigma + g * inversion * a;
            dy[2 + 4 * i] = dsigma.re;
            dy[3 + 4 * i] = dsigma.im;

            // a σ* + a* σ = 2 Re(a σ*)
            let exchange = 2.0 * (a * sigma.conj()).re;
            dy[5 + 4 * i] = -self.gamma * rho - g * exchange;

            let mut refill = 0.0;
            let row = &self.refill[i * n..(i + 1) * n];
            for j in 0..n {
                refill += row[j] * y[5 + 4 * j];
            }
            dy[4 + 4 * i] = -self.gamma * rho + self.gamma * refill;
        }
        let da = -Complex64::new(self.kappa, -self.delta_c) * a + self.n_atoms * coherence_sum + self.eta;
        dy[0] = da.re;
        dy[1] = da.im;
    }

    fn begin_step(&mut self, t: f64, _y: &[f64]) -> bool {
        if matches!(self.model, AtomNumberModel::Constant(_)) {
            return false;
        }
        let n = self.model.at(t);
        let changed = n != self.n_atoms;
        self.n_atoms = n;
        changed
    }

    fn after_step(&mut self, _t: f64, y: &[f64]) {
        self.track(y);
        self.last.clear();
        self.last.extend_from_slice(y);
    }
}

/// Integrates the mean-field equations over `t_span`, sampling the state at
/// every time in `grid`.
pub fn integrate(
    initial: &MeanFieldState,
    params: &DriveParams,
    couplings: &CouplingSet,
    n_model: &AtomNumberModel,
    t_span: (f64, f64),
    grid: &[f64],
    ctrl: &IntegratorSettings,
) -> Result<TimeSeries> {
    initial.check_against(couplings)?;
    params.validate()?;
    n_model.validate()?;
    let (t0, t1) = t_span;
    if !(t1 > t0) {
        return Err(Error::invalid(format!("time span must be increasing, got [{t0}, {t1}]")));
    }

    let n_max = n_model.max_over(t0, t1);
    let fastest = params.kappa.max(couplings.gamma()).max(couplings.g0() * n_max.sqrt());
    let tol = ctrl.tolerances(fastest);

    let mut system = MeanFieldSystem::new(params, couplings, n_model.clone());
    system.n_atoms = n_model.at(t0);
    let y0 = initial.to_vec();
    system.track(&y0);

    let g0_sq = couplings.g0() * couplings.g0();
    let cg_sq: Vec<f64> = couplings.cg_squared().collect();
    let levels = initial.levels.clone();
    let mut times = Vec::with_capacity(grid.len());
    let mut records = Vec::with_capacity(grid.len());

    let stats = ode::integrate(&mut system, t0, &y0, t1, grid, &tol, |t, y| {
        let s = MeanFieldState::from_slice(&levels, y);
        let g_eff_sq: f64 = g0_sq * cg_sq.iter().zip(&s.population).map(|(c, p)| c * p).sum::<f64>();
        times.push(t);
        records.push(Record {
            a: s.a,
            photon_number: s.a.norm_sqr(),
            g_eff: g_eff_sq.max(0.0).sqrt(),
            n_eff: n_model.at(t),
            population: s.population,
            rho_ee: s.rho_ee,
        });
    })?;

    let final_state = MeanFieldState::from_slice(&levels, &system.last);
    Ok(TimeSeries {
        levels,
        times,
        records,
        final_state,
        metadata: RunMetadata {
            conservation_drift: system.drift,
            peak_rho_ee: system.peak_rho,
            min_population: system.min_pop,
            steps: stats,
        },
    })
}
