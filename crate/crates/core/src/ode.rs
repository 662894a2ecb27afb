//! Dormand–Prince 5(4) integrator with PI step-size control and continuous
//! (dense) output, shared by the mean-field and rate-equation solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A first-order system ẏ = f(t, y) over a flat real state vector.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]);

    /// Called before each new step from `t`. Returns `true` if the right-hand
    /// side changed, in which case the first stage is re-evaluated.
    fn begin_step(&mut self, _t: f64, _y: &[f64]) -> bool {
        false
    }

    /// Called after every accepted step.
    fn after_step(&mut self, _t: f64, _y: &[f64]) {}
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size; `None` leaves it to the error controller.
    pub max_step: Option<f64>,
    pub max_steps: u64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rtol: 1e-8, atol: 1e-10, max_step: None, max_steps: 200_000_000 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0) || !(self.atol > 0.0) {
            return Err(Error::invalid(format!(
                "tolerances must be positive (rtol = {}, atol = {})",
                self.rtol, self.atol
            )));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::invalid(format!("max_step must be positive, got {h}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub evaluations: u64,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const PI_BETA: f64 = 0.04;

/// Integrates `sys` from `t0` to `t_end`, calling `observe(t, y)` at each
/// time in `outputs` (sorted, inside `[t0, t_end]`) using the 4th-order
/// continuous extension.
pub fn integrate<S: OdeSystem, F: FnMut(f64, &[f64])>(
    sys: &mut S,
    t0: f64,
    y0: &[f64],
    t_end: f64,
    outputs: &[f64],
    tol: &Tolerances,
    mut observe: F,
) -> Result<StepStats> {
    tol.validate()?;
    let n = sys.dim();
    if y0.len() != n {
        return Err(Error::invalid(format!("state has {} components, system expects {n}", y0.len())));
    }
    if !(t_end > t0) {
        return Err(Error::invalid(format!("time span must be increasing, got [{t0}, {t_end}]")));
    }
    if outputs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("output times must be strictly increasing"));
    }
    if let (Some(&first), Some(&last)) = (outputs.first(), outputs.last()) {
        if first < t0 || last > t_end {
            return Err(Error::invalid("output times must lie inside the integration span"));
        }
    }

    let mut stats = StepStats::default();
    let mut out_idx = 0;
    while out_idx < outputs.len() && outputs[out_idx] <= t0 {
        observe(outputs[out_idx], y0);
        out_idx += 1;
    }

    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut k5 = vec![0.0; n];
    let mut k6 = vec![0.0; n];
    let mut k7 = vec![0.0; n];
    let mut y_stage = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut cont = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let mut y_out = vec![0.0; n];

    sys.begin_step(t, &y);
    sys.rhs(t, &y, &mut k1);
    stats.evaluations += 1;

    let h_max = tol.max_step.unwrap_or(f64::INFINITY).min(t_end - t0);
    let mut h = initial_step(sys, t, &y, &k1, tol, h_max, &mut stats);
    let mut fac_old = 1e-4_f64;
    let mut last_rejected = false;
    let mut first = true;

    loop {
        if stats.accepted + stats.rejected >= tol.max_steps {
            return Err(Error::Stiffness { t, h });
        }
        if !first && sys.begin_step(t, &y) {
            sys.rhs(t, &y, &mut k1);
            stats.evaluations += 1;
        }
        first = false;

        let mut last = false;
        if t + 1.01 * h >= t_end {
            h = t_end - t;
            last = true;
        }
        if h < 16.0 * f64::EPSILON * t.abs().max(1e-300) || h <= 0.0 {
            return Err(Error::Stiffness { t, h });
        }

        for i in 0..n {
            y_stage[i] = y[i] + h * A21 * k1[i];
        }
        sys.rhs(t + C2 * h, &y_stage, &mut k2);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        sys.rhs(t + C3 * h, &y_stage, &mut k3);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        sys.rhs(t + C4 * h, &y_stage, &mut k4);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        sys.rhs(t + C5 * h, &y_stage, &mut k5);
        for i in 0..n {
            y_stage[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        sys.rhs(t + h, &y_stage, &mut k6);
        for i in 0..n {
            y_new[i] = y[i] + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        sys.rhs(t + h, &y_new, &mut k7);
        stats.evaluations += 6;

        let mut err = 0.0;
        for i in 0..n {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.atol + tol.rtol * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / n as f64).sqrt();
        if !err.is_finite() {
            stats.rejected += 1;
            h *= FAC_MIN;
            last_rejected = true;
            continue;
        }

        let fac11 = err.powf(0.2 - PI_BETA * 0.75);
        if err <= 1.0 {
            let fac = (fac11 / fac_old.powf(PI_BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            fac_old = err.max(1e-4);
            stats.accepted += 1;

            let t_new = t + h;
            if out_idx < outputs.len() && (outputs[out_idx] <= t_new || last) {
                for i in 0..n {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h * k7[i] - bspl;
                    cont[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                }
                while out_idx < outputs.len() && (outputs[out_idx] <= t_new || last) {
                    let theta = ((outputs[out_idx] - t) / h).clamp(0.0, 1.0);
                    let theta1 = 1.0 - theta;
                    for i in 0..n {
                        y_out[i] = cont[0][i]
                            + theta * (cont[1][i] + theta1 * (cont[2][i] + theta * (cont[3][i] + theta1 * cont[4][i])));
                    }
                    observe(outputs[out_idx], &y_out);
                    out_idx += 1;
                }
            }

            std::mem::swap(&mut k1, &mut k7);
            std::mem::swap(&mut y, &mut y_new);
            t = t_new;
            sys.after_step(t, &y);

            if last {
                return Ok(stats);
            }

            let mut h_new = (h / fac).min(h_max);
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            last_rejected = true;
        }
    }
}

fn initial_step<S: OdeSystem>(
    sys: &S,
    t: f64,
    y: &[f64],
    f0: &[f64],
    tol: &Tolerances,
    h_max: f64,
    stats: &mut StepStats,
) -> f64 {
    let n = y.len();
    let scale = |i: usize| tol.atol + tol.rtol * y[i].abs();
    let d0 = (y.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n as f64).sqrt();
    let d1 = (f0.iter().enumerate().map(|(i, v)| (v / scale(i)).powi(2)).sum::<f64>() / n as f64).sqrt();
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(h_max);
    let y1: Vec<f64> = y.iter().zip(f0).map(|(a, b)| a + h0 * b).collect();
    let mut f1 = vec![0.0; n];
    sys.rhs(t + h0, &y1, &mut f1);
    stats.evaluations += 1;
    let d2 = (f1.iter().zip(f0).enumerate().map(|(i, (a, b))| ((a - b) / scale(i)).powi(2)).sum::<f64>() / n as f64)
        .sqrt()
        / h0;
    let der = d1.max(d2);
    let h1 = if der <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / der).powf(0.2) };
    (100.0 * h0).min(h1).min(h_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay(f64);

    impl OdeSystem for Decay {
        fn dim(&self) -> usize {
            1
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = -self.0 * y[0];
        }
    }

    struct Oscillator;

    impl OdeSystem for Oscillator {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _t: f64, y: &[f64], dy: &mut [f64]) {
            dy[0] = y[1];
            dy[1] = -y[0];
        }
    }

    #[test]
    fn exponential_decay_dense_output() {
        let tol = Tolerances { rtol: 1e-10, atol: 1e-12, ..Default::default() };
        let outputs: Vec<f64> = (0..=50).map(|i| i as f64 * 0.1).collect();
        let mut got = Vec::new();
        integrate(&mut Decay(1.3), 0.0, &[1.0], 5.0, &outputs, &tol, |t, y| got.push((t, y[0]))).unwrap();
        assert_eq!(got.len(), outputs.len());
        for (t, y) in got {
            assert!((y - (-1.3 * t).exp()).abs() < 1e-9, "t = {t}: {y}");
        }
    }

    #[test]
    fn harmonic_oscillator_many_periods() {
        let tol = Tolerances { rtol: 1e-10, atol: 1e-12, ..Default::default() };
        let t_end = 20.0 * std::f64::consts::TAU;
        let mut last = vec![];
        integrate(&mut Oscillator, 0.0, &[1.0, 0.0], t_end, &[t_end], &tol, |_, y| last = y.to_vec()).unwrap();
        assert!((last[0] - 1.0).abs() < 1e-7);
        assert!(last[1].abs() < 1e-7);
    }

    #[test]
    fn max_step_is_respected() {
        struct Counting(f64, std::cell::Cell<f64>);
        impl OdeSystem for Counting {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _t: f64, _y: &[f64], dy: &mut [f64]) {
                dy[0] = 0.0;
            }
            fn after_step(&mut self, t: f64, _y: &[f64]) {
                assert!(t - self.1.get() <= self.0 * (1.0 + 1e-12));
                self.1.set(t);
            }
        }
        let tol = Tolerances { max_step: Some(0.01), ..Default::default() };
        let stats =
            integrate(&mut Counting(0.01, std::cell::Cell::new(0.0)), 0.0, &[1.0], 1.0, &[], &tol, |_, _| {}).unwrap();
        assert!(stats.accepted >= 100);
    }

    #[test]
    fn step_budget_exhaustion_reports_time() {
        let tol = Tolerances { max_steps: 10, max_step: Some(1e-3), ..Default::default() };
        let err = integrate(&mut Decay(1.0), 0.0, &[1.0], 1.0, &[], &tol, |_, _| {}).unwrap_err();
        match err {
            Error::Stiffness { t, .. } => assert!(t > 0.0 && t < 1.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let tol = Tolerances::default();
        assert!(integrate(&mut Decay(1.0), 1.0, &[1.0], 0.0, &[], &tol, |_, _| {}).is_err());
        assert!(integrate(&mut Decay(1.0), 0.0, &[1.0, 2.0], 1.0, &[], &tol, |_, _| {}).is_err());
        assert!(integrate(&mut Decay(1.0), 0.0, &[1.0], 1.0, &[0.5, 0.2], &tol, |_, _| {}).is_err());
        let bad = Tolerances { rtol: 0.0, ..Default::default() };
        assert!(integrate(&mut Decay(1.0), 0.0, &[1.0], 1.0, &[], &bad, |_, _| {}).is_err());
    }
}
