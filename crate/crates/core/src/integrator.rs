//! Fixed-step RK4 integration of `x_i' = x_i (c_i + Σ_j s_ij z_j(t))`.
//!
//! The default mode integrates `u = ln x`, so `u' = C + S Z` and positivity
//! holds by construction. Piecewise switch times and oscillator threshold
//! crossings are step boundaries: no step straddles a change of `Z`.

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::linalg::dot;
use crate::model::{to_f64, validate, Level, ModelError, Oscillator, ResourceSignal, SimConfig, State, SystemSpec, Trajectory};

/// Crossing-time tolerance for oscillator switches.
pub const SWITCH_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("x0[{0}] must be strictly positive")]
    NonPositiveStart(usize),
    #[error("coordinate {coordinate} exceeded the blow-up threshold at t = {t}")]
    Blowup { t: f64, coordinate: usize, partial: Box<Trajectory> },
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
    #[error("oscillator levels unusable: {0}")]
    BadLevels(String),
    #[error("oscillator needs both watched coordinates below m at t = 0")]
    OscillatorStart,
    #[error("trajectory is empty")]
    Empty,
}

/// An oscillator switch: at time `t` the signal changed to `level`.
#[derive(Clone, Debug, PartialEq)]
pub struct SwitchEvent {
    pub t: f64,
    pub level: Level,
    pub x: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOutput {
    pub trajectory: Trajectory,
    pub switches: Vec<SwitchEvent>,
    /// Number of integration steps taken.
    pub steps: usize,
}

/// `C + S Z` in floating point.
pub fn percapita_rates(spec: &SystemSpec, z: &[f64]) -> Vec<f64> {
    let c = spec.c_f64();
    spec.s_f64()
        .iter()
        .zip(c)
        .map(|(row, ci)| ci + row.iter().zip(z).map(|(s, zj)| s * zj).sum::<f64>())
        .collect()
}

/// `C + S Z` in exact arithmetic.
pub fn percapita_rates_exact(spec: &SystemSpec, z: &[BigRational]) -> Vec<BigRational> {
    spec.s.iter().zip(&spec.c).map(|(row, ci)| ci + dot(row, z)).collect()
}

/// Writes the oscillator event log `t_switch,level`.
pub fn write_events<W: std::io::Write>(switches: &[SwitchEvent], out: W) -> Result<(), ModelError> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e: csv::Error| ModelError::Csv(e.to_string());
    w.write_record(["t_switch", "level"]).map_err(err)?;
    for s in switches {
        w.write_record([crate::model::fmt17(s.t).as_str(), s.level.name()]).map_err(err)?;
    }
    w.flush().map_err(|e| ModelError::Csv(e.to_string()))
}

/// Largest coordinate over all samples.
pub fn trajectory_bound(traj: &Trajectory) -> Result<f64, SimError> {
    if traj.samples.is_empty() {
        return Err(SimError::Empty);
    }
    Ok(traj.samples.iter().flat_map(|s| s.x.iter().copied()).fold(f64::NEG_INFINITY, f64::max))
}

/// Builds an oscillator signal after checking that each watched coordinate
/// rises while its level is held. Returns advisory warnings alongside.
pub fn make_oscillator(
    spec: &SystemSpec,
    z_star: Vec<BigRational>,
    z_starstar: Vec<BigRational>,
    watch: (usize, usize),
    m: f64,
) -> Result<(ResourceSignal, Vec<String>), SimError> {
    let osc = Oscillator { z_star, z_starstar, watch_low: watch.0, watch_high: watch.1, m };
    let signal = ResourceSignal::Oscillator(osc.clone());
    validate(spec, &signal)?;
    if osc.z_star == osc.z_starstar {
        return Err(SimError::BadLevels("z_star equals z_starstar".into()));
    }
    let star = percapita_rates_exact(spec, &osc.z_star);
    let starstar = percapita_rates_exact(spec, &osc.z_starstar);
    let (lo, hi) = (osc.watch_low - 1, osc.watch_high - 1);
    for w in [lo, hi] {
        if star[w].is_zero() && starstar[w].is_zero() {
            return Err(SimError::BadLevels(format!("coordinate {} has zero rate at both levels", w + 1)));
        }
        if star[w].is_positive() && starstar[w].is_positive() {
            return Err(SimError::BadLevels(format!("coordinate {} grows at both levels", w + 1)));
        }
    }
    if !starstar[lo].is_positive() {
        return Err(SimError::BadLevels(format!("coordinate {} does not rise under z_starstar", lo + 1)));
    }
    if !star[hi].is_positive() {
        return Err(SimError::BadLevels(format!("coordinate {} does not rise under z_star", hi + 1)));
    }
    let mut warnings = Vec::new();
    if !(star[lo].is_negative() && starstar[hi].is_negative()) {
        warnings.push("watched pair does not have opposite signs at both levels".to_string());
    }
    for i in (0..spec.d()).filter(|&i| i != lo && i != hi) {
        if !star[i].is_zero() || !starstar[i].is_zero() {
            warnings.push(format!("coordinate {} has a nonzero rate at one of the levels", i + 1));
        }
    }
    Ok((signal, warnings))
}

/// What drives `Z` during one step.
enum Drive<'a> {
    Coupled(&'a [usize]),
    /// Held `Z` with its per-capita rates, computed exactly then rounded.
    Fixed { z: Vec<f64>, rates: Vec<f64> },
}

struct Rhs<'a> {
    c: Vec<f64>,
    s: Vec<Vec<f64>>,
    log_space: bool,
    drive: Drive<'a>,
}

impl Rhs<'_> {
    fn z(&self, x: &[f64]) -> Vec<f64> {
        match &self.drive {
            Drive::Coupled(mapping) => ResourceSignal::coupled_value(mapping, x),
            Drive::Fixed { z, .. } => z.clone(),
        }
    }

    fn eval(&self, y: &[f64], out: &mut [f64]) {
        match &self.drive {
            Drive::Fixed { rates, .. } => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = if self.log_space { rates[i] } else { y[i] * rates[i] };
                }
            }
            Drive::Coupled(mapping) => {
                let x: Vec<f64> = if self.log_space { y.iter().map(|u| u.exp()).collect() } else { y.to_vec() };
                let z = ResourceSignal::coupled_value(mapping, &x);
                for (i, o) in out.iter_mut().enumerate() {
                    let r = self.c[i] + self.s[i].iter().zip(&z).map(|(s, zj)| s * zj).sum::<f64>();
                    *o = if self.log_space { r } else { x[i] * r };
                }
            }
        }
    }

    fn rk4(&self, y: &[f64], h: f64) -> Vec<f64> {
        let n = y.len();
        let mut k1 = vec![0.0; n];
        let mut k2 = vec![0.0; n];
        let mut k3 = vec![0.0; n];
        let mut k4 = vec![0.0; n];
        let mut tmp = vec![0.0; n];
        self.eval(y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k1[i];
        }
        self.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * h * k2[i];
        }
        self.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + h * k3[i];
        }
        self.eval(&tmp, &mut k4);
        (0..n).map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
    }
}

fn fixed<'a>(spec: &SystemSpec, z: &[BigRational]) -> Drive<'a> {
    Drive::Fixed {
        z: z.iter().map(to_f64).collect(),
        rates: percapita_rates_exact(spec, z).iter().map(to_f64).collect(),
    }
}

/// Coupled resources repeat state columns, so they are not kept.
fn kept(signal: &ResourceSignal, resources: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    if signal.is_coupled() {
        Vec::new()
    } else {
        resources
    }
}

/// Integrates the system from `cfg.x0` over `[0, cfg.horizon]`.
pub fn simulate(spec: &SystemSpec, signal: &ResourceSignal, cfg: &SimConfig) -> Result<SimOutput, SimError> {
    validate(spec, signal)?;
    cfg.validate(spec.d())?;
    if let Some(i) = cfg.x0.iter().position(|&v| v <= 0.0) {
        return Err(SimError::NonPositiveStart(i));
    }
    let log_space = cfg.log_space;
    let to_x = |y: &[f64]| -> Vec<f64> {
        if log_space {
            y.iter().map(|u| u.exp().max(cfg.extinction_floor)).collect()
        } else {
            y.to_vec()
        }
    };
    let mut level = Level::StarStar;
    if let ResourceSignal::Oscillator(osc) = signal {
        if cfg.x0[osc.watch_low - 1] >= osc.m || cfg.x0[osc.watch_high - 1] >= osc.m {
            return Err(SimError::OscillatorStart);
        }
    }
    let drive_at = |t: f64, level: Level| -> Drive<'_> {
        match signal {
            ResourceSignal::Coupled { mapping } => Drive::Coupled(mapping),
            ResourceSignal::Constant { z } => fixed(spec, z),
            ResourceSignal::Piecewise { schedule } => fixed(spec, ResourceSignal::schedule_value(schedule, t)),
            ResourceSignal::Oscillator(osc) => fixed(spec, osc.level_values(level)),
        }
    };
    let switch_times: Vec<f64> = match signal {
        ResourceSignal::Piecewise { schedule } => schedule.iter().map(|(t, _)| *t).filter(|&t| t > 0.0).collect(),
        _ => Vec::new(),
    };
    let (c, s) = (spec.c_f64(), spec.s_f64());
    let rhs_for = |drive| Rhs { c: c.clone(), s: s.clone(), log_space, drive };

    let mut y: Vec<f64> = if log_space { cfg.x0.iter().map(|v| v.ln()).collect() } else { cfg.x0.clone() };
    let mut t = 0.0_f64;
    let mut rhs = rhs_for(drive_at(t, level));
    let mut beta = cfg.x0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut samples = vec![State { t, x: cfg.x0.clone() }];
    let mut resources = vec![rhs.z(&cfg.x0)];
    let mut switches = Vec::new();
    let mut steps = 0usize;
    let mut last_sampled = 0usize;
    // regular steps are placed at anchor + n * dt to avoid drift
    let (mut anchor, mut n_since) = (0.0_f64, 0usize);
    let end_tol = 1e-12 * cfg.horizon;

    while t < cfg.horizon - end_tol {
        let mut t_next = anchor + (n_since + 1) as f64 * cfg.dt;
        let mut regular = true;
        if t_next > cfg.horizon - end_tol {
            t_next = cfg.horizon;
            regular = false;
        }
        if let Some(&ts) = switch_times.iter().find(|&&ts| ts > t + end_tol) {
            if ts <= t_next {
                t_next = ts;
                regular = false;
            }
        }
        let mut h = t_next - t;
        let mut y_new = rhs.rk4(&y, h);
        let mut switched = false;

        if let ResourceSignal::Oscillator(osc) = signal {
            let w = osc.rising(level);
            let target = if log_space { osc.m.ln() } else { osc.m };
            let g = |v: &[f64]| v[w] - target;
            if g(&y_new) >= 0.0 {
                let (mut lo, mut g_lo) = (0.0, g(&y));
                let (mut hi, mut g_hi) = (h, g(&y_new));
                // regula falsi on the step length
                for _ in 0..100 {
                    let theta = lo + (hi - lo) * (-g_lo) / (g_hi - g_lo);
                    let trial = rhs.rk4(&y, theta);
                    let gt = g(&trial);
                    if gt >= 0.0 {
                        hi = theta;
                        g_hi = gt;
                        y_new = trial;
                    } else {
                        lo = theta;
                        g_lo = gt;
                    }
                    if gt.abs() <= 1e-14 * target.abs().max(1.0) || hi - lo <= SWITCH_TOL {
                        if gt < 0.0 {
                            y_new = rhs.rk4(&y, hi);
                        }
                        break;
                    }
                }
                h = hi;
                t_next = t + h;
                switched = true;
                regular = false;
            }
        }

        if y_new.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite(t_next));
        }
        if !log_space {
            for v in y_new.iter_mut() {
                *v = v.max(cfg.extinction_floor);
            }
        }
        y = y_new;
        t = t_next;
        steps += 1;
        if regular {
            n_since += 1;
        } else {
            anchor = t;
            n_since = 0;
        }
        let x = to_x(&y);
        if let Some(i) = x.iter().position(|&v| v > cfg.blowup) {
            samples.push(State { t, x: x.clone() });
            resources.push(rhs.z(&x));
            let mut partial = Trajectory { samples, resources: kept(signal, resources), beta: 0.0 };
            partial.beta = trajectory_bound(&partial)?;
            return Err(SimError::Blowup { t, coordinate: i + 1, partial: Box::new(partial) });
        }
        beta = x.iter().copied().fold(beta, f64::max);

        if switched {
            level = level.flipped();
            switches.push(SwitchEvent { t, level, x: x.clone() });
        }
        if switched || !switch_times.is_empty() {
            rhs = rhs_for(drive_at(t, level));
        }
        if steps.is_multiple_of(cfg.sample_stride) {
            samples.push(State { t, x: x.clone() });
            resources.push(rhs.z(&x));
            last_sampled = steps;
        }
    }
    if last_sampled != steps {
        let x = to_x(&y);
        resources.push(rhs.z(&x));
        samples.push(State { t, x });
    }
    Ok(SimOutput { trajectory: Trajectory { samples, resources: kept(signal, resources), beta }, switches, steps })
}
