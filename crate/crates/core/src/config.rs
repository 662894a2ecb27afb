//! Declarative run configuration. Keys carry their units (`g0_kHz`,
//! `delta_p_MHz`); frequencies are ordinary frequencies and become angular
//! frequencies on conversion.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{AngularMomentum, LevelScheme, TransitionGeometry};
use crate::meanfield::IntegratorSettings;
use crate::pumping::TwoTransitionParams;
use crate::scenarios::{CloudParams, DriveStrength, ExperimentConfig, Fig5Config, Probe};
use crate::units::{khz, mhz, RB87_D2_LINEWIDTH_MHZ, RB87_D2_WAVELENGTH, RB87_MASS};

pub const PRESETS: &[(&str, &str, &str)] = &[
    (
        "fig2",
        "effective coupling for equal, pumped and single-sublevel populations",
        include_str!("../presets/fig2.toml"),
    ),
    ("fig3", "transmission dynamics at +24 MHz with expanding cloud", include_str!("../presets/fig3.toml")),
    ("fig4", "transmission dynamics at -24, -15, +15, +24 MHz", include_str!("../presets/fig4.toml")),
    ("fig5", "rate-model coefficients and decay traces", include_str!("../presets/fig5.toml")),
];

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS.iter().find(|p| p.0 == name).map(|p| p.2).ok_or_else(|| {
        let known: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
        Error::Config(format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub scheme: SchemeSection,
    pub cavity: CavitySection,
    pub probe: ProbeSection,
    pub cloud: CloudSection,
    pub run: RunSection,
    pub integrator: IntegratorSettings,
    pub spectrum: SpectrumSection,
    pub rates: RatesSection,
    pub sweep: SweepSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    pub f_ground: String,
    pub f_excited: String,
    pub geometry: String,
    #[serde(rename = "g0_kHz")]
    pub g0_khz: f64,
    #[serde(rename = "Gamma_MHz")]
    pub gamma_mhz: f64,
    /// Initial ground-level populations in increasing m; empty means equal.
    pub populations: Vec<f64>,
}

impl Default for SchemeSection {
    fn default() -> Self {
        SchemeSection {
            f_ground: "2".into(),
            f_excited: "3".into(),
            geometry: "pi".into(),
            g0_khz: 210.0,
            gamma_mhz: RB87_D2_LINEWIDTH_MHZ,
            populations: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CavitySection {
    /// Field decay rate κ/2π (half the transmission FWHM).
    #[serde(rename = "kappa_MHz")]
    pub kappa_mhz: f64,
    pub round_trip_m: f64,
    pub mirror_transmission: f64,
    pub wavelength_nm: f64,
}

impl Default for CavitySection {
    fn default() -> Self {
        CavitySection {
            kappa_mhz: 6.7,
            round_trip_m: 0.1,
            mirror_transmission: 0.015,
            wavelength_nm: RB87_D2_WAVELENGTH * 1e9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    #[serde(rename = "delta_p_MHz")]
    pub delta_p_mhz: Vec<f64>,
    /// Initial effective atom number, one per detuning or a single shared value.
    #[serde(rename = "N0")]
    pub n0: Vec<f64>,
    #[serde(rename = "P_cav_nW")]
    pub p_cav_nw: f64,
    /// Pump rate η/2π; takes precedence over `P_cav_nW` when set.
    #[serde(rename = "eta_MHz", skip_serializing_if = "Option::is_none")]
    pub eta_mhz: Option<f64>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        ProbeSection { delta_p_mhz: vec![24.0], n0: vec![11200.0], p_cav_nw: 2.4, eta_mhz: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CloudSection {
    /// `ballistic` or `constant`.
    pub model: String,
    #[serde(rename = "T_uK")]
    pub t_uk: f64,
    pub sigma0_um: f64,
    pub w0_um: f64,
    pub mass_kg: f64,
}

impl Default for CloudSection {
    fn default() -> Self {
        CloudSection { model: "ballistic".into(), t_uk: 75.0, sigma0_um: 2000.0, w0_um: 80.0, mass_kg: RB87_MASS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// `probe` for transmission dynamics, `fig2` for the coupling table.
    pub scenario: String,
    pub t_end_ms: f64,
    pub samples: usize,
    /// Also write separate power, coupling and population files.
    pub panels: bool,
    pub rho_ee_limit: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { scenario: "probe".into(), t_end_ms: 60.0, samples: 2001, panels: false, rho_ee_limit: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    /// Atom number for the scan; defaults to the first `probe.N0`.
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[serde(rename = "span_MHz")]
    pub span_mhz: f64,
    pub points: usize,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        SpectrumSection { n: None, span_mhz: 40.0, points: 2001 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RatesSection {
    /// `single` or `fig5`.
    pub mode: String,
    pub c_minus_sq: f64,
    pub c_plus_sq: f64,
    #[serde(rename = "g0_over_Gamma")]
    pub g0_over_gamma: f64,
    /// g₀√N / Γ.
    pub coupling: f64,
    /// g₀√N / Γ of the weak-coupling curves (fig5 mode).
    pub weak_coupling: f64,
    #[serde(rename = "kappa_over_Gamma")]
    pub kappa_over_gamma: f64,
    #[serde(rename = "delta_a_over_Gamma")]
    pub delta_a_over_gamma: f64,
    #[serde(rename = "delta_c_over_Gamma")]
    pub delta_c_over_gamma: f64,
    #[serde(rename = "eta_over_Gamma")]
    pub eta_over_gamma: f64,
    /// Trace length in units of the initial decay time 1/|Ṗ_−(0)|.
    pub horizon: f64,
    pub samples: usize,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_points: usize,
    /// Also integrate the mean-field equations and report the deviation.
    pub crosscheck: bool,
}

impl Default for RatesSection {
    fn default() -> Self {
        RatesSection {
            mode: "single".into(),
            c_minus_sq: 1.0 / 3.0,
            c_plus_sq: 1.0,
            g0_over_gamma: 210.0 / (RB87_D2_LINEWIDTH_MHZ * 1e3),
            coupling: 10.0,
            weak_coupling: 0.01,
            kappa_over_gamma: 1.0,
            delta_a_over_gamma: 10.0,
            delta_c_over_gamma: 10.0,
            eta_over_gamma: 0.01,
            horizon: 5.0,
            samples: 401,
            sweep_min: -25.0,
            sweep_max: 25.0,
            sweep_points: 501,
            crosscheck: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Config key of the outer axis, e.g. `spectrum.N`.
    pub x: String,
    pub x_start: f64,
    pub x_stop: f64,
    pub x_points: usize,
    /// Config key of the inner axis.
    pub y: String,
    pub y_start: f64,
    pub y_stop: f64,
    pub y_points: usize,
    pub observables: Vec<String>,
    /// Integration time for dynamics observables.
    pub t_end_us: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            x: "spectrum.N".into(),
            x_start: 0.0,
            x_stop: 11200.0,
            x_points: 8,
            y: "probe.delta_p_MHz".into(),
            y_start: -24.0,
            y_stop: 24.0,
            y_points: 5,
            observables: vec!["splitting_MHz".into()],
            t_end_us: 10.0,
        }
    }
}

fn field(key: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn positive(key: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(field(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(field(key, format!("must be non-negative, got {v}")))
    }
}

impl Config {
    pub fn from_toml_str(src: &str) -> Result<Config> {
        let value: toml::Table = src.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        Self::from_table(value)
    }

    fn from_table(table: toml::Table) -> Result<Config> {
        toml::Value::Table(table).try_into().map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))
    }

    pub fn preset(name: &str) -> Result<Config> {
        Self::from_toml_str(preset_source(name)?)
    }

    /// Reads a TOML config, or the `config` entry of a JSON run manifest.
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e == "json") {
            let manifest: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let config = manifest
                .get("config")
                .cloned()
                .ok_or_else(|| Error::Config(format!("{}: manifest has no `config` entry", path.display())))?;
            serde_json::from_value(config).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
        } else {
            Self::from_toml_str(&text).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
                other => other,
            })
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Applies `section.key=value` overrides. Values are parsed as TOML and
    /// fall back to plain strings; a scalar assigned to a list key becomes a
    /// one-element list.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Config> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut table = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        for item in overrides {
            let item = item.as_ref();
            let (key, raw) = item
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("override `{item}` is not of the form section.key=value")))?;
            set_path(&mut table, key.trim(), parse_value(raw.trim()))?;
        }
        Self::from_table(table)
    }

    /// Sets a single numeric key, as used by parameter sweeps.
    pub fn with_number(&self, key: &str, value: f64) -> Result<Config> {
        let mut table = toml::Table::try_from(self).map_err(|e| Error::Config(e.to_string()))?;
        set_path(&mut table, key, toml::Value::Float(value))?;
        Self::from_table(table)
    }

    pub fn level_scheme(&self) -> Result<LevelScheme> {
        let s = &self.scheme;
        let ground: AngularMomentum = s.f_ground.parse().map_err(|e| field("scheme.f_ground", e))?;
        let excited: AngularMomentum = s.f_excited.parse().map_err(|e| field("scheme.f_excited", e))?;
        let geometry: TransitionGeometry = s.geometry.parse().map_err(|e| field("scheme.geometry", e))?;
        let g0 = khz(positive("scheme.g0_kHz", s.g0_khz)?);
        let gamma = mhz(positive("scheme.Gamma_MHz", s.gamma_mhz)?);
        LevelScheme::new(ground, excited, geometry, g0, gamma).map_err(|e| field("scheme", e))
    }

    pub fn gamma(&self) -> f64 {
        mhz(self.scheme.gamma_mhz)
    }

    pub fn kappa(&self) -> Result<f64> {
        Ok(mhz(positive("cavity.kappa_MHz", self.cavity.kappa_mhz)?))
    }

    pub fn populations(&self) -> Option<Vec<f64>> {
        (!self.scheme.populations.is_empty()).then(|| self.scheme.populations.clone())
    }

    pub fn probes(&self) -> Result<Vec<Probe>> {
        let p = &self.probe;
        if p.delta_p_mhz.is_empty() {
            return Err(field("probe.delta_p_MHz", "at least one detuning is required"));
        }
        let n0 = match p.n0.len() {
            1 => vec![p.n0[0]; p.delta_p_mhz.len()],
            n if n == p.delta_p_mhz.len() => p.n0.clone(),
            n => return Err(field("probe.N0", format!("expected 1 or {} entries, got {n}", p.delta_p_mhz.len()))),
        };
        p.delta_p_mhz
            .iter()
            .zip(n0)
            .map(|(&d, n)| {
                if !d.is_finite() {
                    return Err(field("probe.delta_p_MHz", format!("must be finite, got {d}")));
                }
                Ok(Probe { detuning: mhz(d), n0: non_negative("probe.N0", n)? })
            })
            .collect()
    }

    pub fn drive_strength(&self) -> Result<DriveStrength> {
        Ok(match self.probe.eta_mhz {
            Some(e) => DriveStrength::Eta(mhz(non_negative("probe.eta_MHz", e)?)),
            None => DriveStrength::Power(non_negative("probe.P_cav_nW", self.probe.p_cav_nw)? * 1e-9),
        })
    }

    pub fn integrator(&self) -> Result<IntegratorSettings> {
        let i = self.integrator;
        positive("integrator.rtol", i.rtol)?;
        positive("integrator.atol", i.atol)?;
        positive("integrator.max_step_factor", i.max_step_factor)?;
        if i.max_steps == 0 {
            return Err(field("integrator.max_steps", "must be positive"));
        }
        Ok(i)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let c = &self.cloud;
        let constant_atom_number = match c.model.as_str() {
            "ballistic" => false,
            "constant" => true,
            other => return Err(field("cloud.model", format!("expected `ballistic` or `constant`, got `{other}`"))),
        };
        let cfg = ExperimentConfig {
            scheme: self.level_scheme()?,
            kappa: self.kappa()?,
            populations: self.populations(),
            cloud: CloudParams {
                n0: 0.0,
                temperature: non_negative("cloud.T_uK", c.t_uk)? * 1e-6,
                sigma0: positive("cloud.sigma0_um", c.sigma0_um)? * 1e-6,
                w0: positive("cloud.w0_um", c.w0_um)? * 1e-6,
                mass: positive("cloud.mass_kg", c.mass_kg)?,
            },
            constant_atom_number,
            probes: self.probes()?,
            drive: self.drive_strength()?,
            wavelength: positive("cavity.wavelength_nm", self.cavity.wavelength_nm)? * 1e-9,
            round_trip: positive("cavity.round_trip_m", self.cavity.round_trip_m)?,
            mirror_transmission: self.cavity.mirror_transmission,
            t_end: positive("run.t_end_ms", self.run.t_end_ms)? * 1e-3,
            samples: self.run.samples,
            integrator: self.integrator()?,
            rho_ee_limit: positive("run.rho_ee_limit", self.run.rho_ee_limit)?,
        };
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// Atom number for spectra and steady-state observables.
    pub fn spectrum_atoms(&self) -> Result<f64> {
        match self.spectrum.n {
            Some(n) => non_negative("spectrum.N", n),
            None => self
                .probe
                .n0
                .first()
                .copied()
                .ok_or_else(|| field("probe.N0", "needed when spectrum.N is unset"))
                .and_then(|n| non_negative("probe.N0", n)),
        }
    }

    pub fn two_transition(&self) -> Result<TwoTransitionParams> {
        let r = &self.rates;
        let gamma = mhz(positive("scheme.Gamma_MHz", self.scheme.gamma_mhz)?);
        let g0_ratio = positive("rates.g0_over_Gamma", r.g0_over_gamma)?;
        let n = (positive("rates.coupling", r.coupling)? / g0_ratio).powi(2);
        let p = TwoTransitionParams {
            c_minus_sq: r.c_minus_sq,
            c_plus_sq: r.c_plus_sq,
            g0: g0_ratio * gamma,
            gamma,
            kappa: positive("rates.kappa_over_Gamma", r.kappa_over_gamma)? * gamma,
            n_atoms: n,
            delta_a: r.delta_a_over_gamma * gamma,
            delta_c: r.delta_c_over_gamma * gamma,
            eta: non_negative("rates.eta_over_Gamma", r.eta_over_gamma)? * gamma,
        };
        p.validate().map_err(|e| field("rates", e))?;
        Ok(p)
    }

    pub fn fig5(&self) -> Result<Fig5Config> {
        let r = &self.rates;
        let p = self.two_transition()?;
        if r.sweep_points < 2 || !(r.sweep_max > r.sweep_min) {
            return Err(field("rates.sweep_points", "sweep needs sweep_max > sweep_min and at least two points"));
        }
        Ok(Fig5Config {
            gamma: p.gamma,
            kappa_over_gamma: r.kappa_over_gamma,
            c_minus_sq: r.c_minus_sq,
            c_plus_sq: r.c_plus_sq,
            g0_over_gamma: r.g0_over_gamma,
            strong_coupling: r.coupling,
            weak_coupling: positive("rates.weak_coupling", r.weak_coupling)?,
            sweep: (r.sweep_min, r.sweep_max, r.sweep_points),
            reference_eta_over_gamma: r.eta_over_gamma,
            horizon: positive("rates.horizon", r.horizon)?,
            samples: r.samples,
            integrator: self.integrator()?,
        })
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.into())),
        Err(_) => toml::Value::String(raw.into()),
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<()> {
    let (section, name) =
        key.split_once('.').ok_or_else(|| Error::Config(format!("override key `{key}` must be section.key")))?;
    let sec = table
        .get_mut(section)
        .and_then(toml::Value::as_table_mut)
        .ok_or_else(|| Error::Config(format!("unknown config section `{section}`")))?;
    let value = match (sec.get(name), value) {
        (
            Some(toml::Value::Array(_)),
            v @ (toml::Value::Float(_) | toml::Value::Integer(_) | toml::Value::String(_)),
        ) => toml::Value::Array(vec![v]),
        (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
        (Some(toml::Value::Integer(_)), toml::Value::Float(f)) if f.fract() == 0.0 && f.abs() < 9e15 => {
            toml::Value::Integer(f as i64)
        }
        (_, v) => v,
    };
    sec.insert(name.to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, _, _) in PRESETS {
            let c = Config::preset(name).unwrap();
            c.level_scheme().unwrap();
            c.experiment().unwrap();
            c.two_transition().unwrap();
        }
        assert!(matches!(Config::preset("fig9"), Err(Error::Config(_))));
    }

    #[test]
    fn defaults_match_experiment_parameters() {
        let c = Config::default();
        let s = c.level_scheme().unwrap();
        assert!((s.g0() - khz(210.0)).abs() < 1e-9);
        assert!((c.kappa().unwrap() - mhz(6.7)).abs() < 1e-9);
        assert_eq!(c.spectrum_atoms().unwrap(), 11200.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::from_toml_str("[cavity]\nkappa = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("kappa"), "{err}");
        assert!(Config::from_toml_str("[nonsense]\n").is_err());
        assert!(Config::from_toml_str("[cavity\n").is_err());
    }

    #[test]
    fn overrides() {
        let c = Config::default()
            .with_overrides(&[
                "probe.delta_p_MHz=15",
                "cavity.kappa_MHz=3",
                "run.samples=11",
                "scheme.geometry=sigma_plus",
            ])
            .unwrap();
        assert_eq!(c.probe.delta_p_mhz, vec![15.0]);
        assert_eq!(c.cavity.kappa_mhz, 3.0);
        assert_eq!(c.run.samples, 11);
        assert_eq!(c.scheme.geometry, "sigma_plus");
        let c = c.with_overrides(&["probe.eta_MHz=0.5"]).unwrap();
        assert_eq!(c.probe.eta_mhz, Some(0.5));
        assert!(Config::default().with_overrides(&["kappa=3"]).is_err());
        assert!(Config::default().with_overrides(&["cavity.kappa=3"]).is_err());
        assert!(Config::default().with_overrides(&["nope.kappa=3"]).is_err());
        assert!(Config::default().with_overrides(&["cavity.kappa_MHz=fast"]).is_err());
    }

    #[test]
    fn field_level_validation() {
        let c = Config::default().with_overrides(&["cavity.kappa_MHz=-1"]).unwrap();
        let e = c.experiment().unwrap_err();
        assert!(e.to_string().contains("cavity.kappa_MHz"), "{e}");
        let c = Config::default().with_overrides(&["probe.N0=[1.0, 2.0]"]).unwrap();
        assert!(c.probes().unwrap_err().to_string().contains("probe.N0"));
        let c = Config::default().with_overrides(&["cloud.model=frozen"]).unwrap();
        assert!(c.experiment().is_err());
    }

    #[test]
    fn toml_round_trip() {
        for (name, _, _) in PRESETS {
            let c = Config::preset(name).unwrap();
            assert_eq!(Config::from_toml_str(&c.to_toml().unwrap()).unwrap(), c);
        }
    }

    #[test]
    fn sweep_assignment() {
        let c = Config::default().with_number("spectrum.N", 500.0).unwrap();
        assert_eq!(c.spectrum.n, Some(500.0));
        let c = c.with_number("probe.delta_p_MHz", -3.0).unwrap();
        assert_eq!(c.probe.delta_p_mhz, vec![-3.0]);
        let c = c.with_number("run.samples", 7.0).unwrap();
        assert_eq!(c.run.samples, 7);
    }
}
