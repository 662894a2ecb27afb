//! Command-line front end: resolves a configuration, runs one command and
//! writes its CSV tables plus a JSON manifest.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{Config, PRESETS};
use crate::error::{Error, Result};
use crate::levels::{coupling_set, CouplingSet};
use crate::meanfield::{self, AtomNumberModel, DriveParams};
use crate::output::{Bundle, Cell, RunManifest, Table};
use crate::pumping::{
    self, alpha_strong_coupling, classify_regime, crosscheck_meanfield, rate_coefficients, RateCoefficients,
};
use crate::scenarios::{self, ProbeRun};
use crate::spectra::{
    effective_coupling, intracavity_intensity_ss, normal_mode_splitting, transmission_spectrum, transmitted_power,
};
use crate::units::{mhz, to_mhz};

/// Longest mean-field crosscheck, in units of the fastest system rate.
pub const CROSSCHECK_MAX_SPAN: f64 = 1e8;

/// Largest number of points a sweep may evaluate.
pub const MAX_SWEEP_POINTS: usize = 1_000_000;

#[derive(Debug, Parser)]
#[command(name = "mlcavity", version, about = "Multilevel atoms collectively coupled to a cavity mode")]
pub struct Cli {
    /// Start from a bundled preset (see `presets list`).
    #[arg(long, global = true, conflicts_with = "config")]
    pub preset: Option<String>,
    /// TOML config file, or a manifest.json from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Override a config key, e.g. `--set cavity.kappa_MHz=6.7`.
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for parallel runs.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Steady-state transmission spectrum and normal-mode splitting.
    Spectrum {
        /// Atom number (sets `spectrum.N`).
        #[arg(long)]
        atoms: Option<f64>,
    },
    /// Mean-field transmission dynamics, or the effective-coupling table.
    Dynamics {
        /// Initial atom number for every probe (sets `probe.N0`).
        #[arg(long)]
        atoms: Option<f64>,
        /// Pump rate η/2π in MHz (sets `probe.eta_MHz`).
        #[arg(long, value_name = "MHz")]
        eta: Option<f64>,
    },
    /// Two-transition optical-pumping rate model.
    Rates,
    /// Grid sweep over two config keys.
    Sweep,
    /// Bundled presets.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum PresetsAction {
    List,
    /// Print a preset's TOML.
    Show {
        name: String,
    },
}

/// Result of a command before anything is written.
#[derive(Debug)]
pub struct Outcome {
    pub bundle: Bundle,
    pub manifest: RunManifest,
    pub summary: Vec<String>,
}

impl Cli {
    pub fn resolve_config(&self) -> Result<Config> {
        let base = match (&self.preset, &self.config) {
            (Some(name), _) => Config::preset(name)?,
            (None, Some(path)) => Config::load(path)?,
            (None, None) => Config::default(),
        };
        let mut overrides = self.overrides.clone();
        match &self.command {
            Command::Spectrum { atoms: Some(n) } => overrides.push(format!("spectrum.N={}", toml_float(*n))),
            Command::Dynamics { atoms, eta } => {
                if let Some(n) = atoms {
                    overrides.push(format!("probe.N0=[{}]", toml_float(*n)));
                }
                if let Some(e) = eta {
                    overrides.push(format!("probe.eta_MHz={}", toml_float(*e)));
                }
            }
            _ => {}
        }
        base.with_overrides(&overrides)
    }
}

fn toml_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        format!("{v}")
    }
}

/// Parses nothing; runs `cli` and writes artifacts into `cli.out`.
pub fn run(cli: &Cli, stdout: &mut dyn Write) -> Result<()> {
    if let Command::Presets { action } = &cli.command {
        match action {
            PresetsAction::List => {
                for (name, about, _) in PRESETS {
                    writeln!(stdout, "{name:<6} {about}")?;
                }
            }
            PresetsAction::Show { name } => write!(stdout, "{}", crate::config::preset_source(name)?)?,
        }
        return Ok(());
    }
    let config = cli.resolve_config()?;
    let started = Instant::now();
    let outcome = match cli.jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Config(format!("--jobs: {e}")))?;
            pool.install(|| execute(&cli.command, &config))?
        }
        None => execute(&cli.command, &config)?,
    };
    let Outcome { bundle, mut manifest, summary } = outcome;
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    bundle.write(&cli.out, &mut manifest)?;
    for line in summary {
        writeln!(stdout, "{line}")?;
    }
    if manifest.weak_field_warning {
        eprintln!(
            "warning: peak excited-state population {:.3e} exceeds run.rho_ee_limit = {}",
            manifest.peak_rho_ee.unwrap_or(f64::NAN),
            config.run.rho_ee_limit
        );
    }
    Ok(())
}

/// Runs a command without touching the file system.
pub fn execute(command: &Command, config: &Config) -> Result<Outcome> {
    match command {
        Command::Spectrum { .. } => cmd_spectrum(config),
        Command::Dynamics { .. } => cmd_dynamics(config),
        Command::Rates => cmd_rates(config),
        Command::Sweep => cmd_sweep(config),
        Command::Presets { .. } => Err(Error::invalid("presets has no artifacts")),
    }
}

fn initial_population_vector(config: &Config, couplings: &CouplingSet) -> Result<Vec<f64>> {
    let exp = config.experiment()?;
    let map = exp.initial_populations(couplings)?;
    let state = meanfield::initial_state(&map).map_err(|e| Error::Config(format!("scheme.populations: {e}")))?;
    Ok(state.population)
}

fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        vec![start]
    } else {
        meanfield::uniform_grid(start, stop, n)
    }
}

pub fn cmd_spectrum(config: &Config) -> Result<Outcome> {
    let exp = config.experiment()?;
    let couplings = exp.couplings()?;
    let populations = initial_population_vector(config, &couplings)?;
    let n = config.spectrum_atoms()?;
    let span = config.spectrum.span_mhz;
    if !(span > 0.0) || config.spectrum.points < 3 {
        return Err(Error::Config("spectrum: span_MHz must be positive and points at least 3".into()));
    }
    let grid: Vec<f64> = linspace(-span, span, config.spectrum.points).into_iter().map(mhz).collect();
    let template = DriveParams { eta: exp.eta(), delta_a: 0.0, delta_c: 0.0, kappa: exp.kappa };
    let scan = transmission_spectrum(&template, exp.scheme.gamma(), n, &couplings, &populations, &grid)?;
    let g_eff = effective_coupling(&couplings, &populations)?;
    let omega = exp.omega();

    let peaks: Vec<String> = scan.peaks.iter().map(|p| format!("{:.6}", to_mhz(*p))).collect();
    let mut table = Table::new(["delta_p_MHz", "intensity", "power_W"])
        .meta("N", n)
        .meta("g_eff_sqrtN_MHz", to_mhz(g_eff * n.sqrt()))
        .meta("splitting_MHz", to_mhz(scan.splitting))
        .meta("closed_form_splitting_MHz", to_mhz(normal_mode_splitting(g_eff, n)))
        .meta("peaks_MHz", peaks.join(" "));
    for (d, x) in scan.detunings.iter().zip(&scan.intensities) {
        table.push_numbers([to_mhz(*d), *x, transmitted_power(*x, omega, exp.round_trip, exp.mirror_transmission)]);
    }
    let mut bundle = Bundle::default();
    bundle.add("spectrum.csv", &table);
    Ok(Outcome {
        bundle,
        manifest: RunManifest::new("spectrum", config),
        summary: vec![
            format!("splitting: {:.4} MHz", to_mhz(scan.splitting)),
            format!("peaks: {} MHz", peaks.join(", ")),
        ],
    })
}

fn detuning_tag(mhz_value: f64) -> String {
    let sign = if mhz_value < 0.0 { "m" } else { "p" };
    format!("dp_{sign}{}MHz", mhz_value.abs())
}

fn sublevel_columns(prefix: &str, labels: impl IntoIterator<Item = String>) -> Vec<String> {
    labels.into_iter().map(|l| format!("{prefix}_{l}")).collect()
}

fn probe_tables(run: &ProbeRun, couplings: &CouplingSet) -> (Table, Table, Table, Table) {
    let dp = to_mhz(run.probe.detuning);
    let p_cols = sublevel_columns("P", couplings.ground_levels().iter().map(|m| m.to_string()));
    let rho_cols = sublevel_columns(
        "rho_ee",
        (0..couplings.len()).map(|i| couplings.partner(i).map_or_else(|| "none".into(), |k| k.to_string())),
    );
    let meta = |t: Table| {
        t.meta("delta_p_MHz", dp)
            .meta("N0", run.probe.n0)
            .meta("eta_MHz", to_mhz(run.eta))
            .meta("empty_cavity_transmission", run.empty_cavity)
            .meta("peak_rho_ee", run.series.metadata.peak_rho_ee)
            .meta("conservation_drift", run.series.metadata.conservation_drift)
    };
    let mut columns: Vec<String> = ["t_s", "re_a", "im_a", "photon_number"].map(String::from).to_vec();
    columns.extend(p_cols.iter().cloned());
    columns.extend(rho_cols);
    columns.extend(["g_eff_sqrtN_MHz", "N_eff", "transmission", "power_W"].map(String::from));
    let mut full = meta(Table::new(columns));
    let mut power = meta(Table::new(["t_s", "transmission", "power_W"]));
    let mut coupling = meta(Table::new(["t_s", "g_eff_sqrtN_MHz", "N_eff"]));
    let mut pops = meta(Table::new(std::iter::once("t_s".to_string()).chain(p_cols)));
    for (i, (t, r)) in run.series.times.iter().zip(&run.series.records).enumerate() {
        let coll = to_mhz(r.collective_coupling());
        let mut row = vec![*t, r.a.re, r.a.im, r.photon_number];
        row.extend(&r.population);
        row.extend(&r.rho_ee);
        row.extend([coll, r.n_eff, run.transmission[i], run.power[i]]);
        full.push_numbers(row);
        power.push_numbers([*t, run.transmission[i], run.power[i]]);
        coupling.push_numbers([*t, coll, r.n_eff]);
        pops.push_numbers(std::iter::once(*t).chain(r.population.iter().copied()));
    }
    (full, power, coupling, pops)
}

pub fn cmd_dynamics(config: &Config) -> Result<Outcome> {
    let mut manifest = RunManifest::new("dynamics", config);
    let mut bundle = Bundle::default();
    let mut summary = Vec::new();
    match config.run.scenario.as_str() {
        "fig2" => {
            let rows = scenarios::scenario_fig2(&config.level_scheme()?)?;
            let couplings = coupling_set(&config.level_scheme()?)?;
            let mut columns = vec!["label".to_string(), "g_eff_sq_over_g0_sq".to_string()];
            columns.extend(sublevel_columns("P", couplings.ground_levels().iter().map(|m| m.to_string())));
            let mut table = Table::new(columns).meta("steady_state_rate_per_Gamma", scenarios::STEADY_STATE_RATE);
            for r in &rows {
                let mut row: Vec<Cell> = vec![r.label.clone().into(), r.coupling_ratio.into()];
                row.extend(r.populations.iter().map(|p| Cell::Num(*p)));
                table.push(row);
                summary.push(format!("{:<14} g_eff^2/g0^2 = {:.6}", r.label, r.coupling_ratio));
            }
            bundle.add("fig2.csv", &table);
        }
        "probe" => {
            let exp = config.experiment()?;
            let couplings = exp.couplings()?;
            let runs = scenarios::scenario_fig4(&exp)?;
            let mut drift: f64 = 0.0;
            let mut peak: f64 = 0.0;
            for run in &runs {
                let dp = to_mhz(run.probe.detuning);
                let tag = detuning_tag(dp);
                let (full, power, coupling, pops) = probe_tables(run, &couplings);
                bundle.add(format!("dynamics_{tag}.csv"), &full);
                if config.run.panels {
                    bundle.add(format!("power_{tag}.csv"), &power);
                    bundle.add(format!("coupling_{tag}.csv"), &coupling);
                    bundle.add(format!("populations_{tag}.csv"), &pops);
                }
                drift = drift.max(run.series.metadata.conservation_drift);
                peak = peak.max(run.series.metadata.peak_rho_ee);
                manifest.weak_field_warning |= run.weak_field_warning;
                summary.push(format!(
                    "delta_p = {dp:+} MHz: coupling rise {:.3} MHz, final/empty transmission {:.4}/{:.4}",
                    run.coupling_rise_mhz(),
                    run.transmission.last().copied().unwrap_or(f64::NAN),
                    run.empty_cavity
                ));
            }
            manifest.conservation_drift = Some(drift);
            manifest.peak_rho_ee = Some(peak);
        }
        other => return Err(Error::Config(format!("run.scenario: expected `probe` or `fig2`, got `{other}`"))),
    }
    Ok(Outcome { bundle, manifest, summary })
}

fn coefficient_table(c: &RateCoefficients, extra: &[(&str, f64)]) -> Table {
    let mut t = Table::new(["quantity", "value"]).meta("regime", classify_regime(c));
    for (k, v) in [("u", c.u), ("w", c.w), ("alpha", c.alpha), ("beta", c.beta), ("gamma_eff_per_s", c.gamma_eff)]
        .into_iter()
        .chain(extra.iter().copied())
    {
        t.push(vec![k.into(), v.into()]);
    }
    t
}

pub fn cmd_rates(config: &Config) -> Result<Outcome> {
    let mut bundle = Bundle::default();
    let mut summary = Vec::new();
    let mut manifest = RunManifest::new("rates", config);
    let r = &config.rates;
    if r.samples < 2 {
        return Err(Error::Config("rates.samples: at least two samples are required".into()));
    }
    match r.mode.as_str() {
        "single" => {
            let p = config.two_transition()?;
            let c = rate_coefficients(&p)?;
            let regime = classify_regime(&c);
            let slope = c.rate(1.0).abs();
            if !(slope > 0.0) {
                return Err(Error::Config("rates.eta_over_Gamma: the population does not decay without drive".into()));
            }
            let t_end = r.horizon / slope;
            let grid = meanfield::uniform_grid(0.0, t_end, r.samples);
            let trace = pumping::integrate_rate(&p, t_end, &grid, &config.integrator()?)?;
            let residual = trace.implicit_residual()?;
            bundle.add(
                "rates_coefficients.csv",
                &coefficient_table(
                    &c,
                    &[
                        ("alpha_strong_coupling", alpha_strong_coupling(&p)),
                        ("sqrt_law_time_s", c.sqrt_law_time()),
                        ("implicit_residual_s", residual),
                    ],
                ),
            );
            let mut t = Table::new(["t_s", "P_minus", "P_plus", "t_implicit_s"])
                .meta("regime", regime)
                .meta("implicit_residual_s", residual);
            for (time, pm) in trace.times.iter().zip(&trace.p_minus) {
                let implicit = if *pm > 0.0 { pumping::implicit_time(pm.min(1.0), &c)? } else { f64::NAN };
                t.push_numbers([*time, *pm, 1.0 - pm, implicit]);
            }
            bundle.add("rates_trace.csv", &t);
            summary.extend([
                format!("u = {:.6}", c.u),
                format!("w = {:.6}", c.w),
                format!("alpha = {:.6}", c.alpha),
                format!("beta = {:.6}", c.beta),
                format!("gamma_eff = {:.6e} 1/s", c.gamma_eff),
                format!("regime: {regime}"),
                format!("implicit-solution residual: {residual:.3e} s"),
            ]);
            if r.crosscheck {
                let fastest = p.kappa.max(p.gamma).max(p.collective_coupling());
                if fastest * t_end > CROSSCHECK_MAX_SPAN {
                    return Err(Error::Config(format!(
                        "rates.crosscheck: the mean-field run would span {:.1e} atomic lifetimes (limit {CROSSCHECK_MAX_SPAN:.0e}); \
                         raise rates.eta_over_Gamma or lower rates.horizon",
                        fastest * t_end
                    )));
                }
                let report = crosscheck_meanfield(&p, t_end, r.samples, &config.integrator()?)?;
                let mut t = Table::new(["t_s", "P_minus_rate", "P_minus_meanfield"])
                    .meta("max_deviation", report.max_deviation)
                    .meta("peak_rho_ee", report.peak_rho_ee);
                for i in 0..report.times.len() {
                    t.push_numbers([report.times[i], report.rate[i], report.meanfield[i]]);
                }
                bundle.add("crosscheck.csv", &t);
                manifest.peak_rho_ee = Some(report.peak_rho_ee);
                summary.push(format!("mean-field deviation: {:.3e}", report.max_deviation));
            }
        }
        "fig5" => {
            let result = scenarios::scenario_fig5(&config.fig5()?)?;
            let gamma = config.gamma();
            let mut t = Table::new(["delta_a_over_Gamma", "alpha_strong", "beta_strong", "alpha_weak", "beta_weak"])
                .meta("coupling_strong", r.coupling)
                .meta("coupling_weak", r.weak_coupling);
            for row in &result.rows {
                let pick =
                    |c: Option<RateCoefficients>, f: fn(&RateCoefficients) -> f64| c.as_ref().map_or(f64::NAN, f);
                t.push_numbers([
                    row.delta_a / gamma,
                    pick(row.strong, |c| c.alpha),
                    pick(row.strong, |c| c.beta),
                    pick(row.weak, |c| c.alpha),
                    pick(row.weak, |c| c.beta),
                ]);
            }
            bundle.add("fig5_coefficients.csv", &t);
            for tr in &result.traces {
                let c = tr.trace.coefficients;
                let mut t = Table::new(["t_s", "P_minus", "P_plus"])
                    .meta("label", &tr.label)
                    .meta("regime", tr.regime)
                    .meta("alpha", c.alpha)
                    .meta("beta", c.beta)
                    .meta("eta_over_Gamma", tr.params.eta / gamma)
                    .meta("delta_a_over_Gamma", tr.params.delta_a / gamma)
                    .meta("coupling", tr.params.collective_coupling() / gamma);
                for (time, pm) in tr.trace.times.iter().zip(&tr.trace.p_minus) {
                    t.push_numbers([*time, *pm, 1.0 - pm]);
                }
                bundle.add(format!("fig5_trace_{}.csv", tr.label), &t);
                summary.push(format!(
                    "{:<18} alpha = {:>10.4} beta = {:>8.4} regime: {}",
                    tr.label, c.alpha, c.beta, tr.regime
                ));
            }
        }
        other => return Err(Error::Config(format!("rates.mode: expected `single` or `fig5`, got `{other}`"))),
    }
    Ok(Outcome { bundle, manifest, summary })
}

pub const SWEEP_OBSERVABLES: &[&str] = &[
    "splitting_MHz",
    "nms_MHz",
    "g_eff_sqrtN_MHz",
    "photon_number_ss",
    "transmission_ss",
    "alpha",
    "beta",
    "u",
    "w",
    "gamma_eff_per_s",
    "peak_rho_ee",
];

fn observe(config: &Config, observables: &[String]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(observables.len());
    let needs = |names: &[&str]| observables.iter().any(|o| names.contains(&o.as_str()));
    let rates = if needs(&["alpha", "beta", "u", "w", "gamma_eff_per_s"]) {
        rate_coefficients(&config.two_transition()?).ok()
    } else {
        None
    };
    for name in observables {
        let value = match name.as_str() {
            "alpha" => rates.map_or(f64::NAN, |c| c.alpha),
            "beta" => rates.map_or(f64::NAN, |c| c.beta),
            "u" => rates.map_or(f64::NAN, |c| c.u),
            "w" => rates.map_or(f64::NAN, |c| c.w),
            "gamma_eff_per_s" => rates.map_or(f64::NAN, |c| c.gamma_eff),
            _ => {
                let exp = config.experiment()?;
                let couplings = exp.couplings()?;
                let populations = initial_population_vector(config, &couplings)?;
                let n = config.spectrum_atoms()?;
                let g_eff = effective_coupling(&couplings, &populations)?;
                let probe = exp.probes[0];
                let drive =
                    DriveParams { eta: exp.eta(), delta_a: probe.detuning, delta_c: probe.detuning, kappa: exp.kappa };
                match name.as_str() {
                    "splitting_MHz" => {
                        let span = config.spectrum.span_mhz;
                        let grid: Vec<f64> =
                            linspace(-span, span, config.spectrum.points).into_iter().map(mhz).collect();
                        let scan =
                            transmission_spectrum(&drive, exp.scheme.gamma(), n, &couplings, &populations, &grid)?;
                        to_mhz(scan.splitting)
                    }
                    "nms_MHz" => to_mhz(normal_mode_splitting(g_eff, n)),
                    "g_eff_sqrtN_MHz" => to_mhz(g_eff * n.sqrt()),
                    "photon_number_ss" => intracavity_intensity_ss(&drive, exp.scheme.gamma(), n, g_eff)?,
                    "transmission_ss" => {
                        let x = intracavity_intensity_ss(&drive, exp.scheme.gamma(), n, g_eff)?;
                        if drive.eta > 0.0 {
                            x * exp.kappa * exp.kappa / (drive.eta * drive.eta)
                        } else {
                            0.0
                        }
                    }
                    "peak_rho_ee" => {
                        let t_end = config.sweep.t_end_us * 1e-6;
                        let state = meanfield::initial_state(&exp.initial_populations(&couplings)?)?;
                        let series = meanfield::integrate(
                            &state,
                            &drive,
                            &couplings,
                            &AtomNumberModel::Constant(n),
                            (0.0, t_end),
                            &[],
                            &exp.integrator,
                        )?;
                        series.metadata.peak_rho_ee
                    }
                    other => return Err(Error::Config(format!("sweep.observables: unknown observable `{other}`"))),
                }
            }
        };
        out.push(value);
    }
    Ok(out)
}

pub fn cmd_sweep(config: &Config) -> Result<Outcome> {
    let s = &config.sweep;
    for o in &s.observables {
        if !SWEEP_OBSERVABLES.contains(&o.as_str()) {
            return Err(Error::Config(format!(
                "sweep.observables: unknown observable `{o}` (known: {})",
                SWEEP_OBSERVABLES.join(", ")
            )));
        }
    }
    if s.observables.is_empty() {
        return Err(Error::Config("sweep.observables: at least one observable is required".into()));
    }
    if s.x_points == 0 || s.y_points == 0 {
        return Err(Error::Config("sweep: x_points and y_points must be at least 1".into()));
    }
    let total = s.x_points.saturating_mul(s.y_points);
    if total > MAX_SWEEP_POINTS {
        return Err(Error::Config(format!(
            "sweep: grid of {} x {} = {total} points exceeds the limit of {MAX_SWEEP_POINTS}; reduce x_points or y_points",
            s.x_points, s.y_points
        )));
    }
    if s.peak_rho_ee_requested() && !(s.t_end_us > 0.0) {
        return Err(Error::Config("sweep.t_end_us: must be positive".into()));
    }
    // Reject bad keys before the parallel section.
    config.with_number(&s.x, s.x_start)?.with_number(&s.y, s.y_start)?;

    let xs = linspace(s.x_start, s.x_stop, s.x_points);
    let ys = linspace(s.y_start, s.y_stop, s.y_points);
    let points: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    let values: Vec<Vec<f64>> = points
        .par_iter()
        .map(|&(x, y)| observe(&config.with_number(&s.x, x)?.with_number(&s.y, y)?, &s.observables))
        .collect::<Result<_>>()?;

    let mut bundle = Bundle::default();
    for (k, name) in s.observables.iter().enumerate() {
        let mut t = Table::new([s.x.as_str(), s.y.as_str(), name.as_str()]).meta("order", "row-major, x outer");
        for (&(x, y), v) in points.iter().zip(&values) {
            t.push_numbers([x, y, v[k]]);
        }
        bundle.add(format!("sweep_{name}.csv"), &t);
    }
    Ok(Outcome {
        bundle,
        manifest: RunManifest::new("sweep", config),
        summary: vec![format!("evaluated {total} points for {}", s.observables.join(", "))],
    })
}

impl crate::config::SweepSection {
    fn peak_rho_ee_requested(&self) -> bool {
        self.observables.iter().any(|o| o == "peak_rho_ee")
    }
}
