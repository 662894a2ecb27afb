//! Two-transition optical-pumping rate model. Population flows from the
//! ground level m = −1/2 (squared coupling c_−²) into m = +1/2 (c_+²) at a
//! rate that depends on the current population through the collective
//! response of the cavity.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{two_transition_scheme, Sublevel};
use crate::meanfield::{self, AtomNumberModel, DriveParams, IntegratorSettings};
use crate::ode::{self, OdeSystem, StepStats};
use crate::spectra::intracavity_intensity_ss;

/// Inputs of the rate model. Rates in rad/s.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTransitionParams {
    pub c_minus_sq: f64,
    pub c_plus_sq: f64,
    pub g0: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub n_atoms: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub eta: f64,
}

impl TwoTransitionParams {
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("c_minus_sq", self.c_minus_sq), ("c_plus_sq", self.c_plus_sq)] {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::invalid(format!("{name} must lie in (0, 1], got {c}")));
            }
        }
        for (name, v) in [("g0", self.g0), ("gamma", self.gamma), ("kappa", self.kappa), ("N", self.n_atoms)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("eta must be non-negative, got {}", self.eta)));
        }
        if !self.delta_a.is_finite() || !self.delta_c.is_finite() {
            return Err(Error::invalid("detunings must be finite"));
        }
        Ok(())
    }

    pub fn drive(&self) -> DriveParams {
        DriveParams { eta: self.eta, delta_a: self.delta_a, delta_c: self.delta_c, kappa: self.kappa }
    }

    /// Collective coupling g₀√N, rad/s.
    pub fn collective_coupling(&self) -> f64 {
        self.g0 * self.n_atoms.sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateCoefficients {
    pub u: f64,
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
    /// rad/s
    pub gamma_eff: f64,
}

impl RateCoefficients {
    /// f(P) = 1 / (αP² + βP + 1).
    pub fn nonlinearity(&self, p: f64) -> f64 {
        1.0 / (self.alpha * p * p + self.beta * p + 1.0)
    }

    /// Ṗ_− at population `p`.
    pub fn rate(&self, p: f64) -> f64 {
        -self.gamma_eff * self.nonlinearity(p) * p
    }

    /// Time scale of the square-root law, α / (2Γ_eff).
    pub fn sqrt_law_time(&self) -> f64 {
        self.alpha / (2.0 * self.gamma_eff)
    }

    /// Checks that αP² + βP + 1 stays positive on (0, 1].
    fn check_monotone(&self) -> Result<()> {
        let q = |p: f64| self.alpha * p * p + self.beta * p + 1.0;
        let mut lowest = q(1.0).min(1.0);
        if self.alpha > 0.0 {
            let vertex = -self.beta / (2.0 * self.alpha);
            if vertex > 0.0 && vertex < 1.0 {
                lowest = lowest.min(q(vertex));
            }
        }
        if !(lowest > 0.0) {
            return Err(Error::Degenerate(format!(
                "alpha P^2 + beta P + 1 reaches {lowest} on (0, 1] (alpha = {}, beta = {})",
                self.alpha, self.beta
            )));
        }
        Ok(())
    }
}

pub fn rate_coefficients(p: &TwoTransitionParams) -> Result<RateCoefficients> {
    p.validate()?;
    let g2n = p.g0 * p.g0 * p.n_atoms;
    let u = (p.gamma * p.kappa - 2.0 * p.delta_a * p.delta_c) / g2n;
    let w =
        (0.25 * p.gamma * p.gamma + p.delta_a * p.delta_a) * (p.kappa * p.kappa + p.delta_c * p.delta_c) / (g2n * g2n);
    let (cm, cp) = (p.c_minus_sq, p.c_plus_sq);
    let alpha_den = cp * (cp + u) + w;
    let beta_den = (cp + u) + w;
    if !(alpha_den > 0.0) {
        return Err(Error::Degenerate(format!(
            "alpha denominator c+^2 (c+^2 + u) + w = {alpha_den} (u = {u}, w = {w})"
        )));
    }
    if !(beta_den > 0.0) {
        return Err(Error::Degenerate(format!("beta denominator (c+^2 + u) + w = {beta_den} (u = {u}, w = {w})")));
    }
    let diff = cm - cp;
    Ok(RateCoefficients {
        u,
        w,
        alpha: diff * diff / alpha_den,
        beta: 2.0 * diff * (1.0 + 0.5 * u) / beta_den,
        gamma_eff: p.eta * p.eta / (p.g0 * p.g0 * p.n_atoms * p.n_atoms) * (cm / cp) * p.gamma / beta_den,
    })
}

/// Closed-form time at which P_− has fallen from 1 to `p`.
pub fn implicit_time(p: f64, coeffs: &RateCoefficients) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::domain(format!("population must lie in (0, 1], got {p}")));
    }
    let RateCoefficients { alpha, beta, gamma_eff, .. } = *coeffs;
    if !(gamma_eff > 0.0) {
        return Err(Error::domain("gamma_eff must be positive"));
    }
    Ok(-(0.5 * alpha * p * p + beta * p + p.ln()) / gamma_eff + (alpha + 2.0 * beta) / (2.0 * gamma_eff))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Exponential,
    Accelerated,
    Decelerated,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::Exponential => "exponential",
            Regime::Accelerated => "accelerated",
            Regime::Decelerated => "decelerated",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Below this value of max(|α|, |β|) the decay counts as exponential.
pub const EXPONENTIAL_THRESHOLD: f64 = 0.1;

pub fn classify_regime(coeffs: &RateCoefficients) -> Regime {
    if coeffs.alpha.abs().max(coeffs.beta.abs()) < EXPONENTIAL_THRESHOLD {
        Regime::Exponential
    } else if coeffs.alpha + coeffs.beta > 0.0 {
        Regime::Accelerated
    } else {
        Regime::Decelerated
    }
}

/// Strong-coupling limit of α: (c_−² − c_+²)² g₀²N / (Γ/2 + κ)².
pub fn alpha_strong_coupling(p: &TwoTransitionParams) -> f64 {
    let diff = p.c_minus_sq - p.c_plus_sq;
    let width = 0.5 * p.gamma + p.kappa;
    diff * diff * p.g0 * p.g0 * p.n_atoms / (width * width)
}

/// Light absorbed per atom at t = 0, up to a constant:
/// |a(0)|² / (Δ_a² + (Γ/2)²) with every atom in m = −1/2.
fn initial_absorption(p: &TwoTransitionParams) -> Result<f64> {
    let g_eff = p.g0 * p.c_minus_sq.sqrt();
    let a_sq = intracavity_intensity_ss(&p.drive(), p.gamma, p.n_atoms, g_eff)?;
    Ok(a_sq / (p.delta_a * p.delta_a + 0.25 * p.gamma * p.gamma))
}

/// Drive strength η for `p` that makes its initial absorption equal to that
/// of `reference`.
pub fn match_drive_strength(p: &TwoTransitionParams, reference: &TwoTransitionParams) -> Result<f64> {
    p.validate()?;
    reference.validate()?;
    let target = initial_absorption(reference)?;
    if !(target > 0.0) {
        return Err(Error::domain("reference absorbs no light; cannot match drive strength"));
    }
    let unit = initial_absorption(&TwoTransitionParams { eta: 1.0, ..*p })?;
    if !(unit > 0.0) {
        return Err(Error::domain("target parameters absorb no light"));
    }
    Ok((target / unit).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateTrace {
    pub coefficients: RateCoefficients,
    pub times: Vec<f64>,
    pub p_minus: Vec<f64>,
    pub steps: StepStats,
}

impl RateTrace {
    pub fn p_plus(&self) -> Vec<f64> {
        self.p_minus.iter().map(|p| 1.0 - p).collect()
    }

    /// max_k |t(P_−(t_k)) − t_k| over samples with P_− > 0.
    /// Largest |t(P_−) − t| over the samples.
    pub fn implicit_residual(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (&t, &p) in self.times.iter().zip(&self.p_minus) {
            if p > 0.0 {
                worst = worst.max((implicit_time(p.min(1.0), &self.coefficients)? - t).abs());
            }
        }
        Ok(worst)
    }
}

struct RateSystem {
    coeffs: RateCoefficients,
}

impl OdeSystem for RateSystem {
    fn dim(&self) -> usize {
        1
    }

    // y = ln P_−, which keeps P_− positive and resolved far below atol.
    fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
        let p = y[0].exp();
        dy[0] = -self.coeffs.gamma_eff * self.coeffs.nonlinearity(p);
    }
}

/// Solves Ṗ_− = −Γ_eff f(P_−) P_− from P_−(0) = 1, sampling on `grid`.
pub fn integrate_rate(
    p: &TwoTransitionParams,
    t_end: f64,
    grid: &[f64],
    ctrl: &IntegratorSettings,
) -> Result<RateTrace> {
    let coeffs = rate_coefficients(p)?;
    integrate_coefficients(&coeffs, t_end, grid, ctrl)
}

/// As [`integrate_rate`] for precomputed coefficients.
pub fn integrate_coefficients(
    coeffs: &RateCoefficients,
    t_end: f64,
    grid: &[f64],
    ctrl: &IntegratorSettings,
) -> Result<RateTrace> {
    if !(t_end > 0.0) {
        return Err(Error::invalid(format!("time span must be positive, got {t_end}")));
    }
    coeffs.check_monotone()?;
    let tol = ctrl.tolerances(0.0);
    let mut system = RateSystem { coeffs: *coeffs };
    let mut times = Vec::with_capacity(grid.len());
    let mut p_minus = Vec::with_capacity(grid.len());
    let steps = ode::integrate(&mut system, 0.0, &[0.0], t_end, grid, &tol, |t, y| {
        times.push(t);
        p_minus.push(y[0].exp());
    })?;
    Ok(RateTrace { coefficients: *coeffs, times, p_minus, steps })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub times: Vec<f64>,
    pub rate: Vec<f64>,
    pub meanfield: Vec<f64>,
    pub max_deviation: f64,
    /// Largest excited-state population seen by the mean-field run.
    pub peak_rho_ee: f64,
}

/// Runs the rate model and the mean-field equations for the same two-level
/// pumping scheme and compares P_−(t) on `samples` evenly spaced points.
pub fn crosscheck_meanfield(
    p: &TwoTransitionParams,
    t_end: f64,
    samples: usize,
    ctrl: &IntegratorSettings,
) -> Result<CrosscheckReport> {
    p.validate()?;
    let grid = meanfield::uniform_grid(0.0, t_end, samples);
    let rate = if p.eta > 0.0 { integrate_rate(p, t_end, &grid, ctrl)?.p_minus } else { vec![1.0; grid.len()] };

    let couplings = two_transition_scheme(p.c_minus_sq, p.c_plus_sq, p.g0, p.gamma)?;
    let initial: BTreeMap<Sublevel, f64> = [(Sublevel(-1), 1.0), (Sublevel(1), 0.0)].into_iter().collect();
    let state = meanfield::initial_state(&initial)?;
    let series = meanfield::integrate(
        &state,
        &p.drive(),
        &couplings,
        &AtomNumberModel::Constant(p.n_atoms),
        (0.0, t_end),
        &grid,
        ctrl,
    )?;
    let mf: Vec<f64> = series.records.iter().map(|r| r.population[0]).collect();
    let max_deviation = rate.iter().zip(&mf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(CrosscheckReport {
        times: series.times,
        rate,
        meanfield: mf,
        max_deviation,
        peak_rho_ee: series.metadata.peak_rho_ee,
    })
}

/// Least-squares slope through the origin of ln P against ln(1 − t/τ) over
/// samples with t < τ. Returns `None` with fewer than two usable points.
pub fn sqrt_law_exponent(times: &[f64], p_minus: &[f64], tau: f64) -> Option<f64> {
    let (mut sxy, mut sxx, mut count) = (0.0, 0.0, 0);
    for (&t, &p) in times.iter().zip(p_minus) {
        if t <= 0.0 || t >= tau || p <= 0.0 {
            continue;
        }
        let x = (1.0 - t / tau).ln();
        let y = p.ln();
        sxy += x * y;
        sxx += x * x;
        count += 1;
    }
    (count >= 2 && sxx > 0.0).then(|| sxy / sxx)
}
