//! Closed-form steady-state observables of the driven atom–cavity system in
//! the weak-drive limit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::CouplingSet;
use crate::meanfield::DriveParams;
use crate::units::{HBAR, SPEED_OF_LIGHT};

/// g_eff = g₀ √(Σ_m c_m² P_m), rad/s. `populations` is indexed like the
/// ground levels of `couplings` and must sum to one.
pub fn effective_coupling(couplings: &CouplingSet, populations: &[f64]) -> Result<f64> {
    Ok(couplings.g0() * effective_coupling_ratio(couplings, populations)?.sqrt())
}

/// g_eff² / g₀² for the given populations.
pub fn effective_coupling_ratio(couplings: &CouplingSet, populations: &[f64]) -> Result<f64> {
    if populations.len() != couplings.len() {
        return Err(Error::invalid(format!("expected {} populations, got {}", couplings.len(), populations.len())));
    }
    if populations.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::invalid("populations must be finite and non-negative"));
    }
    let total: f64 = populations.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("populations must sum to 1, got {total}")));
    }
    Ok(couplings.cg_squared().zip(populations).map(|(c, p)| c * p).sum())
}

/// Steady-state intracavity photon number |a|².
pub fn intracavity_intensity_ss(params: &DriveParams, gamma: f64, n_atoms: f64, g_eff: f64) -> Result<f64> {
    if !(n_atoms >= 0.0) {
        return Err(Error::invalid(format!("atom number must be non-negative, got {n_atoms}")));
    }
    let DriveParams { eta, delta_a, delta_c, kappa } = *params;
    let atomic = 0.25 * gamma * gamma + delta_a * delta_a;
    let g2n = g_eff * g_eff * n_atoms;
    let denominator =
        g2n * g2n + g2n * (gamma * kappa - 2.0 * delta_a * delta_c) + atomic * (kappa * kappa + delta_c * delta_c);
    if !(denominator > 0.0) || !denominator.is_finite() {
        return Err(Error::domain(format!("steady-state denominator is {denominator}")));
    }
    Ok(atomic * eta * eta / denominator)
}

/// Δ_nms = 2 g_eff √N.
pub fn normal_mode_splitting(g_eff: f64, n_atoms: f64) -> f64 {
    2.0 * g_eff * n_atoms.max(0.0).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumScan {
    /// Δ_a = Δ_c, rad/s.
    pub detunings: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Interpolated transmission maxima, rad/s, in increasing order.
    pub peaks: Vec<f64>,
    /// Distance between the two maxima, or zero for a single peak.
    pub splitting: f64,
}

/// Scans Δ_a = Δ_c over `grid` (rad/s, strictly increasing) with the drive
/// strength and κ of `template`.
pub fn transmission_spectrum(
    template: &DriveParams,
    gamma: f64,
    n_atoms: f64,
    couplings: &CouplingSet,
    populations: &[f64],
    grid: &[f64],
) -> Result<SpectrumScan> {
    if grid.is_empty() {
        return Err(Error::invalid("detuning grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("detuning grid must be strictly increasing"));
    }
    let g_eff = effective_coupling(couplings, populations)?;
    let mut intensities = Vec::with_capacity(grid.len());
    let mut shape = Vec::with_capacity(grid.len());
    for &d in grid {
        let p = DriveParams { delta_a: d, delta_c: d, ..*template };
        intensities.push(intracavity_intensity_ss(&p, gamma, n_atoms, g_eff)?);
        // The line shape does not depend on η; locate peaks on the unit-drive
        // curve so that η = 0 still yields positions.
        shape.push(intracavity_intensity_ss(&DriveParams { eta: 1.0, ..p }, gamma, n_atoms, g_eff)?);
    }
    let peaks = find_peaks(grid, &shape);
    let splitting = if peaks.len() == 2 { peaks[1] - peaks[0] } else { 0.0 };
    Ok(SpectrumScan { detunings: grid.to_vec(), intensities, peaks, splitting })
}

/// Local maxima of `y` refined by a parabola through ln y at the three
/// nearest samples. Keeps the two highest; a maximum on the grid edge is
/// reported unrefined only if there is no interior maximum.
fn find_peaks(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut found: Vec<(f64, f64)> = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if y[i] > y[i - 1] && y[i] >= y[i + 1] {
            found.push((refine(&x[i - 1..=i + 1], &y[i - 1..=i + 1]), y[i]));
        }
    }
    if found.is_empty() {
        let i = (0..n).fold(0, |best, i| if y[i] > y[best] { i } else { best });
        return vec![x[i]];
    }
    found.sort_by(|a, b| b.1.total_cmp(&a.1));
    found.truncate(2);
    let mut peaks: Vec<f64> = found.into_iter().map(|p| p.0).collect();
    peaks.sort_by(f64::total_cmp);
    peaks
}

fn refine(x: &[f64], y: &[f64]) -> f64 {
    if y.iter().any(|v| !(*v > 0.0)) {
        return x[1];
    }
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let (l0, l1, l2) = (y[0].ln(), y[1].ln(), y[2].ln());
    let d01 = (l1 - l0) / (x1 - x0);
    let d12 = (l2 - l1) / (x2 - x1);
    let curvature = (d12 - d01) / (x2 - x0);
    if !(curvature < 0.0) {
        return x1;
    }
    let vertex = 0.5 * (x0 + x1) - d01 / (2.0 * curvature);
    vertex.clamp(x0, x2)
}

/// Circulating power |a|² ħω c / l, W.
pub fn circulating_power(a_sq: f64, omega: f64, round_trip: f64) -> f64 {
    a_sq * HBAR * omega * SPEED_OF_LIGHT / round_trip
}

/// Power leaving through the outcoupling mirror, W.
pub fn transmitted_power(a_sq: f64, omega: f64, round_trip: f64, mirror_transmission: f64) -> f64 {
    circulating_power(a_sq, omega, round_trip) * mirror_transmission
}
