//! Parameterized runs of the experiment: cloud expansion, the pumped
//! effective-coupling table, transmission dynamics at fixed probe detuning,
//! and the rate-model landscape.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{coupling_set, AngularMomentum, CouplingSet, LevelScheme, Sublevel};
use crate::meanfield::{self, AtomNumberModel, DriveParams, IntegratorSettings, TimeSeries};
use crate::pumping::{
    self, classify_regime, match_drive_strength, rate_coefficients, RateCoefficients, RateTrace, Regime,
    TwoTransitionParams,
};
use crate::spectra::{effective_coupling_ratio, transmitted_power};
use crate::units::{optical_angular_frequency, BOLTZMANN, HBAR, SPEED_OF_LIGHT};

/// Thermal cloud released at t = 0 and overlapping a Gaussian cavity mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudParams {
    /// Effective atom number at t = 0.
    pub n0: f64,
    /// K
    pub temperature: f64,
    /// Initial rms cloud radius, m.
    pub sigma0: f64,
    /// Mode waist, m.
    pub w0: f64,
    /// kg
    pub mass: f64,
}

impl CloudParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.n0 >= 0.0 && self.n0.is_finite()) {
            return Err(Error::invalid(format!("N0 must be non-negative, got {}", self.n0)));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::invalid(format!("temperature must be non-negative, got {}", self.temperature)));
        }
        for (name, v) in [("sigma0", self.sigma0), ("w0", self.w0), ("mass", self.mass)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Thermal velocity √(k_B T / m), m/s.
    pub fn thermal_velocity(&self) -> f64 {
        (BOLTZMANN * self.temperature / self.mass).sqrt()
    }
}

/// Effective atom number after free expansion for time `t`. The transverse
/// overlap of a Gaussian cloud of rms radius σ with a mode of waist w₀ scales
/// as w₀² / (w₀² + 4σ²); it is normalized so that N(0) = N₀.
pub fn atom_number_ballistic(t: f64, cloud: &CloudParams) -> f64 {
    let w0_sq = cloud.w0 * cloud.w0;
    let sigma0_sq = cloud.sigma0 * cloud.sigma0;
    let v_sq = BOLTZMANN * cloud.temperature / cloud.mass;
    let sigma_sq = sigma0_sq + v_sq * t * t;
    cloud.n0 * (w0_sq + 4.0 * sigma0_sq) / (w0_sq + 4.0 * sigma_sq)
}

/// Cavity pump rate η = κ√n for a resonant empty-cavity photon number
/// n = P_cav l / (ħω c).
pub fn eta_from_power(p_cav: f64, kappa: f64, omega: f64, round_trip: f64) -> f64 {
    let n = p_cav * round_trip / (HBAR * omega * SPEED_OF_LIGHT);
    kappa * n.max(0.0).sqrt()
}

/// Depth U/k_B (K) of the standing-wave dipole potential at an antinode.
/// The antinode intensity is four times the one-way intensity of a beam
/// carrying half the circulating power: I = 8 P_cav / (π w₀²).
pub fn dipole_potential_depth(p_cav: f64, w0: f64, delta: f64, gamma: f64, omega0: f64) -> Result<f64> {
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::domain("dipole potential needs a nonzero detuning"));
    }
    let intensity = 8.0 * p_cav / (PI * w0 * w0);
    let u = 3.0 * PI * SPEED_OF_LIGHT * SPEED_OF_LIGHT / (2.0 * omega0.powi(3)) * (gamma / delta) * intensity;
    Ok(u / BOLTZMANN)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig2Row {
    pub label: String,
    pub populations: Vec<f64>,
    /// g_eff² / g₀²
    pub coupling_ratio: f64,
}

/// Convergence threshold on max_m |Ṗ_m| in units of Γ.
pub const STEADY_STATE_RATE: f64 = 1e-9;

/// Ground-state populations reached under long weak π pumping.
///
/// The steady state of the pumping cycle does not depend on the time scale,
/// so the run uses Γ = κ = 1, a single weakly coupled atom and a drive that
/// keeps ρ^ee near 10⁻³.
pub fn steady_state_populations(scheme: &LevelScheme) -> Result<Vec<f64>> {
    let normalized = LevelScheme::new(scheme.ground(), scheme.excited(), scheme.geometry(), 0.1, 1.0)?;
    let couplings = coupling_set(&normalized)?;
    let drive = DriveParams { eta: 0.2, delta_a: 0.0, delta_c: 0.0, kappa: 1.0 };
    let model = AtomNumberModel::Constant(1.0);
    let ctrl = IntegratorSettings { rtol: 1e-10, atol: 1e-13, ..Default::default() };
    let mut state = meanfield::initial_state(&meanfield::equal_populations(&couplings))?;
    let chunk = 2e4;
    for _ in 0..200 {
        let series = meanfield::integrate(&state, &drive, &couplings, &model, (0.0, chunk), &[], &ctrl)?;
        state = series.final_state;
        let d = meanfield::derivatives(&state, &drive, &couplings, 1.0)?;
        if d.population.iter().all(|p| p.abs() < STEADY_STATE_RATE) {
            let total: f64 = state.population.iter().sum();
            return Ok(state.population.iter().map(|p| p / total).collect());
        }
    }
    Err(Error::domain("optical pumping did not reach a steady state"))
}

/// Effective coupling for equal populations, the pumped steady state and
/// each single occupied sublevel.
pub fn scenario_fig2(scheme: &LevelScheme) -> Result<Vec<Fig2Row>> {
    if scheme.geometry().q() != 0 {
        return Err(Error::invalid("the effective-coupling table is defined for pi pumping"));
    }
    let couplings = coupling_set(scheme)?;
    let n = couplings.len();
    let mut rows = Vec::with_capacity(n + 2);
    let mut push = |label: String, populations: Vec<f64>| -> Result<()> {
        let coupling_ratio = effective_coupling_ratio(&couplings, &populations)?;
        rows.push(Fig2Row { label, populations, coupling_ratio });
        Ok(())
    };
    push("equal".into(), vec![1.0 / n as f64; n])?;
    push("steady_state".into(), steady_state_populations(scheme)?)?;
    for (i, m) in couplings.ground_levels().iter().enumerate() {
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        push(format!("m={m}"), p)?;
    }
    Ok(rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum DriveStrength {
    /// Intracavity power on the empty-cavity resonance, W.
    Power(f64),
    /// Pump rate η, rad/s.
    Eta(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    /// 2πδ_p = Δ_a = Δ_c, rad/s.
    pub detuning: f64,
    pub n0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scheme: LevelScheme,
    pub kappa: f64,
    /// Initial populations in ground-level order; `None` means equal.
    pub populations: Option<Vec<f64>>,
    /// Cloud template; each probe supplies its own N₀.
    pub cloud: CloudParams,
    /// Hold N fixed at N₀ instead of following the expansion.
    pub constant_atom_number: bool,
    pub probes: Vec<Probe>,
    pub drive: DriveStrength,
    /// m
    pub wavelength: f64,
    /// m
    pub round_trip: f64,
    pub mirror_transmission: f64,
    /// s
    pub t_end: f64,
    pub samples: usize,
    pub integrator: IntegratorSettings,
    /// Runs whose peak ρ^ee exceeds this are flagged as outside the weak-drive regime.
    pub rho_ee_limit: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.probes.is_empty() {
            return Err(Error::invalid("at least one probe detuning is required"));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::invalid(format!("kappa must be positive, got {}", self.kappa)));
        }
        for (name, v) in [("wavelength", self.wavelength), ("round_trip", self.round_trip), ("t_end", self.t_end)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.mirror_transmission >= 0.0 && self.mirror_transmission <= 1.0) {
            return Err(Error::invalid("mirror_transmission must lie in [0, 1]"));
        }
        if self.samples < 2 {
            return Err(Error::invalid("at least two samples are required"));
        }
        match self.drive {
            DriveStrength::Power(p) if !(p >= 0.0) => return Err(Error::invalid("P_cav must be non-negative")),
            DriveStrength::Eta(e) if !(e >= 0.0) => return Err(Error::invalid("eta must be non-negative")),
            _ => {}
        }
        self.cloud.validate()?;
        for p in &self.probes {
            if !p.detuning.is_finite() || !(p.n0 >= 0.0) {
                return Err(Error::invalid(format!("invalid probe {p:?}")));
            }
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        optical_angular_frequency(self.wavelength)
    }

    pub fn eta(&self) -> f64 {
        match self.drive {
            DriveStrength::Power(p) => eta_from_power(p, self.kappa, self.omega(), self.round_trip),
            DriveStrength::Eta(e) => e,
        }
    }

    pub fn couplings(&self) -> Result<CouplingSet> {
        coupling_set(&self.scheme)
    }

    pub fn atom_number_model(&self, probe: &Probe) -> AtomNumberModel {
        if self.constant_atom_number {
            AtomNumberModel::Constant(probe.n0)
        } else {
            AtomNumberModel::Ballistic(CloudParams { n0: probe.n0, ..self.cloud })
        }
    }

    pub fn initial_populations(&self, couplings: &CouplingSet) -> Result<std::collections::BTreeMap<Sublevel, f64>> {
        match &self.populations {
            None => Ok(meanfield::equal_populations(couplings)),
            Some(p) if p.len() == couplings.len() => {
                Ok(couplings.ground_levels().iter().copied().zip(p.iter().copied()).collect())
            }
            Some(p) => {
                Err(Error::invalid(format!("expected {} initial populations, got {}", couplings.len(), p.len())))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremumKind {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub kind: ExtremumKind,
    pub time: f64,
    pub value: f64,
}

/// Transmission dynamics at one probe detuning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRun {
    pub probe: Probe,
    pub eta: f64,
    pub series: TimeSeries,
    /// |a|² relative to the empty-cavity maximum η²/κ².
    pub transmission: Vec<f64>,
    /// Power leaving through the outcoupling mirror, W.
    pub power: Vec<f64>,
    /// Empty-cavity transmission at this detuning, same normalization.
    pub empty_cavity: f64,
    /// Samples before this time belong to the field build-up.
    pub settle_time: f64,
    pub weak_field_warning: bool,
}

impl ProbeRun {
    /// g_eff√N / 2π, MHz.
    pub fn collective_coupling_mhz(&self) -> Vec<f64> {
        self.series.records.iter().map(|r| crate::units::to_mhz(r.collective_coupling())).collect()
    }

    fn settled(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let settle = self.settle_time;
        self.series.times.iter().copied().zip(self.transmission.iter().copied()).filter(move |(t, _)| *t >= settle)
    }

    /// Interior local extrema of the settled transmission trace, ignoring
    /// changes below 10⁻⁹ of its maximum.
    pub fn transmission_extrema(&self) -> Vec<Extremum> {
        let trace: Vec<(f64, f64)> = self.settled().collect();
        let scale = trace.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
        let eps = 1e-9 * scale;
        let mut out = Vec::new();
        let mut last_sign = 0i8;
        let mut last_turn = 0usize;
        for i in 1..trace.len() {
            let d = trace[i].1 - trace[i - 1].1;
            let sign = if d > eps {
                1
            } else if d < -eps {
                -1
            } else {
                continue;
            };
            if last_sign != 0 && sign != last_sign {
                let (time, value) = trace[last_turn];
                out.push(Extremum {
                    kind: if last_sign > 0 { ExtremumKind::Max } else { ExtremumKind::Min },
                    time,
                    value,
                });
            }
            last_sign = sign;
            last_turn = i;
        }
        out
    }

    /// |T(end) − T_empty| / |T(start) − T_empty| on the settled trace.
    pub fn approach_ratio(&self) -> f64 {
        let mut it = self.settled();
        let start = it.next().map(|p| p.1).unwrap_or(f64::NAN);
        let end = it.last().map(|p| p.1).unwrap_or(start);
        (end - self.empty_cavity).abs() / (start - self.empty_cavity).abs()
    }

    /// Increase of g_eff√N/2π from the settled start to its maximum, MHz.
    pub fn coupling_rise_mhz(&self) -> f64 {
        let coll = self.collective_coupling_mhz();
        let mut settled = self.series.times.iter().zip(&coll).filter(|(t, _)| **t >= self.settle_time).map(|p| *p.1);
        let first = settled.next().unwrap_or(f64::NAN);
        settled.fold(first, f64::max) - first
    }
}

/// Runs one probe detuning of `config`.
pub fn run_probe(config: &ExperimentConfig, probe: &Probe) -> Result<ProbeRun> {
    config.validate()?;
    let couplings = config.couplings()?;
    let eta = config.eta();
    let drive = DriveParams { eta, delta_a: probe.detuning, delta_c: probe.detuning, kappa: config.kappa };
    let state = meanfield::initial_state(&config.initial_populations(&couplings)?)?;
    let grid = meanfield::uniform_grid(0.0, config.t_end, config.samples);
    let model = config.atom_number_model(probe);
    let series =
        meanfield::integrate(&state, &drive, &couplings, &model, (0.0, config.t_end), &grid, &config.integrator)?;

    let omega = config.omega();
    let kappa_sq = config.kappa * config.kappa;
    let empty_max = eta * eta / kappa_sq;
    let transmission =
        series.records.iter().map(|r| if empty_max > 0.0 { r.photon_number / empty_max } else { 0.0 }).collect();
    let power = series
        .records
        .iter()
        .map(|r| transmitted_power(r.photon_number, omega, config.round_trip, config.mirror_transmission))
        .collect();
    let settle_time = 50.0 / config.kappa.min(0.5 * config.scheme.gamma());
    Ok(ProbeRun {
        probe: *probe,
        eta,
        transmission,
        power,
        empty_cavity: kappa_sq / (kappa_sq + probe.detuning * probe.detuning),
        settle_time,
        weak_field_warning: series.metadata.peak_rho_ee > config.rho_ee_limit,
        series,
    })
}

/// Transmission, coupling and population dynamics for a single probe.
pub fn scenario_fig3(config: &ExperimentConfig) -> Result<ProbeRun> {
    match config.probes.as_slice() {
        [probe] => run_probe(config, probe),
        probes => Err(Error::invalid(format!("expected exactly one probe detuning, got {}", probes.len()))),
    }
}

/// One run per probe detuning, executed in parallel and returned in the
/// order of `config.probes`.
pub fn scenario_fig4(config: &ExperimentConfig) -> Result<Vec<ProbeRun>> {
    config.validate()?;
    config.probes.par_iter().map(|p| run_probe(config, p)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Config {
    /// rad/s
    pub gamma: f64,
    pub kappa_over_gamma: f64,
    pub c_minus_sq: f64,
    pub c_plus_sq: f64,
    /// g₀ / Γ. The coupling regimes differ only in the atom number.
    pub g0_over_gamma: f64,
    /// g₀√N / Γ for the strong-coupling curves.
    pub strong_coupling: f64,
    /// g₀√N / Γ for the weak-coupling curves.
    pub weak_coupling: f64,
    /// Δ_a / Γ sweep range and point count (Δ_c = Δ_a).
    pub sweep: (f64, f64, usize),
    /// η/Γ of the reference trace (strong coupling, Δ_a = 0).
    pub reference_eta_over_gamma: f64,
    /// Trace horizon in units of the common initial decay time 1/|Ṗ_−(0)|.
    pub horizon: f64,
    pub samples: usize,
    pub integrator: IntegratorSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Row {
    /// rad/s
    pub delta_a: f64,
    pub strong: Option<RateCoefficients>,
    pub weak: Option<RateCoefficients>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Trace {
    pub label: String,
    pub params: TwoTransitionParams,
    pub regime: Regime,
    pub trace: RateTrace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fig5Result {
    pub rows: Vec<Fig5Row>,
    pub traces: Vec<Fig5Trace>,
}

impl Fig5Config {
    pub fn params(&self, coupling: f64, delta_over_gamma: f64, eta: f64) -> TwoTransitionParams {
        let delta = delta_over_gamma * self.gamma;
        let ratio = coupling / self.g0_over_gamma;
        TwoTransitionParams {
            c_minus_sq: self.c_minus_sq,
            c_plus_sq: self.c_plus_sq,
            g0: self.g0_over_gamma * self.gamma,
            gamma: self.gamma,
            kappa: self.kappa_over_gamma * self.gamma,
            n_atoms: ratio * ratio,
            delta_a: delta,
            delta_c: delta,
            eta,
        }
    }
}

/// α and β against Δ_a for strong and weak coupling, and three decay traces
/// started with equal initial slope: strong coupling at Δ_a = g₀√N and at
/// Δ_a = 0, and weak coupling at Δ_a = 0.
pub fn scenario_fig5(config: &Fig5Config) -> Result<Fig5Result> {
    let (lo, hi, points) = config.sweep;
    if points < 2 || !(hi > lo) {
        return Err(Error::invalid("fig5 sweep needs hi > lo and at least two points"));
    }
    if config.samples < 2 || !(config.horizon > 0.0) {
        return Err(Error::invalid("fig5 traces need at least two samples and a positive horizon"));
    }
    let reference = config.params(config.strong_coupling, 0.0, config.reference_eta_over_gamma * config.gamma);
    reference.validate()?;

    let rows = meanfield::uniform_grid(lo, hi, points)
        .into_iter()
        .map(|x| Fig5Row {
            delta_a: x * config.gamma,
            strong: rate_coefficients(&config.params(config.strong_coupling, x, reference.eta)).ok(),
            weak: rate_coefficients(&config.params(config.weak_coupling, x, reference.eta)).ok(),
        })
        .collect();

    let cases = [
        ("strong_collective", config.strong_coupling, config.strong_coupling),
        ("strong_resonant", config.strong_coupling, 0.0),
        ("weak_resonant", config.weak_coupling, 0.0),
    ];
    let slope = rate_coefficients(&reference)?.rate(1.0).abs();
    if !(slope > 0.0) {
        return Err(Error::domain("reference trace does not decay"));
    }
    let t_end = config.horizon / slope;
    let grid = meanfield::uniform_grid(0.0, t_end, config.samples);
    let mut traces = Vec::with_capacity(cases.len());
    for (label, coupling, delta) in cases {
        let unmatched = config.params(coupling, delta, 1.0);
        let params = TwoTransitionParams { eta: match_drive_strength(&unmatched, &reference)?, ..unmatched };
        let trace = pumping::integrate_rate(&params, t_end, &grid, &config.integrator)?;
        traces.push(Fig5Trace { label: label.into(), params, regime: classify_regime(&trace.coefficients), trace });
    }
    Ok(Fig5Result { rows, traces })
}

/// Experiment-scale F = 2 → F′ = 3 scheme with the given geometry.
pub fn rb87_f2_f3(geometry: crate::levels::TransitionGeometry, g0: f64, gamma: f64) -> Result<LevelScheme> {
    LevelScheme::new(AngularMomentum::from_twice(4)?, AngularMomentum::from_twice(6)?, geometry, g0, gamma)
}
