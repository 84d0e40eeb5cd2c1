//! Domain types shared by every analysis: the system `(C, S)`, the resource
//! signal `Z(t)`, states, trajectories, and the JSON config document.

use std::io::{Read, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("invalid rational literal {0:?}")]
    BadRational(String),
    #[error("invalid signal: {0}")]
    BadSignal(String),
    #[error("invalid config: {0}")]
    BadConfig(String),
    #[error("trajectory csv: {0}")]
    Csv(String),
}

/// Parses an exact rational from `p/q`, an integer, or a finite decimal such
/// as `-0.0023` (converted exactly, not through floating point).
pub fn parse_rational(text: &str) -> Result<BigRational, ModelError> {
    let bad = || ModelError::BadRational(text.to_string());
    let s = text.trim();
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (neg, int_digits) = match int_part.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
        };
        let all_digits = |t: &str| t.chars().all(|c| c.is_ascii_digit());
        if !all_digits(int_digits) || !all_digits(frac_part) || (int_digits.is_empty() && frac_part.is_empty()) {
            return Err(bad());
        }
        let digits = format!("{int_digits}{frac_part}");
        let numer: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
        let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let r = BigRational::new(numer, denom);
        return Ok(if neg { -r } else { r });
    }
    let p: BigInt = s.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(p))
}

/// Canonical text form: `p/q` with `q > 0` and `gcd(|p|, q) = 1`, or `p`.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom() == &BigInt::from(1) {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact conversion of a finite float into a rational.
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// The pair `(C, S)`: `d` focal coordinates, `dprime` resource coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub c: Vec<BigRational>,
    pub s: Vec<Vec<BigRational>>,
    dprime: usize,
}

impl SystemSpec {
    pub fn new(c: Vec<BigRational>, s: Vec<Vec<BigRational>>, dprime: usize) -> Result<Self, ModelError> {
        if c.is_empty() {
            return Err(ModelError::DimensionMismatch("d must be positive".into()));
        }
        if s.len() != c.len() {
            return Err(ModelError::DimensionMismatch(format!(
                "C has {} entries but S has {} rows",
                c.len(),
                s.len()
            )));
        }
        if let Some((i, row)) = s.iter().enumerate().find(|(_, row)| row.len() != dprime) {
            return Err(ModelError::DimensionMismatch(format!(
                "row {} of S has {} entries, expected {dprime}",
                i + 1,
                row.len()
            )));
        }
        Ok(SystemSpec { c, s, dprime })
    }

    /// Convenience constructor from integer-valued entries.
    pub fn from_ints(c: &[i64], s: &[&[i64]]) -> Result<Self, ModelError> {
        let dprime = s.first().map_or(0, |r| r.len());
        let c = c.iter().map(|&v| BigRational::from_integer(v.into())).collect();
        let s = s
            .iter()
            .map(|row| row.iter().map(|&v| BigRational::from_integer(v.into())).collect())
            .collect();
        SystemSpec::new(c, s, dprime)
    }

    pub fn d(&self) -> usize {
        self.c.len()
    }

    pub fn dprime(&self) -> usize {
        self.dprime
    }

    pub fn is_square(&self) -> bool {
        self.d() == self.dprime
    }

    pub fn c_f64(&self) -> Vec<f64> {
        self.c.iter().map(to_f64).collect()
    }

    pub fn s_f64(&self) -> Vec<Vec<f64>> {
        self.s.iter().map(|row| row.iter().map(to_f64).collect()).collect()
    }

    /// Same interaction matrix with a different growth vector.
    pub fn with_c(&self, c: Vec<BigRational>) -> Result<Self, ModelError> {
        SystemSpec::new(c, self.s.clone(), self.dprime)
    }
}

/// Which level an oscillator signal is currently holding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Star,
    StarStar,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::Star => "star",
            Level::StarStar => "starstar",
        }
    }

    pub fn flipped(self) -> Level {
        match self {
            Level::Star => Level::StarStar,
            Level::StarStar => Level::Star,
        }
    }
}

/// Bang-bang resource signal. Holds `z_starstar` until the `watch_low`
/// coordinate rises to `m`, then `z_star` until `watch_high` rises to `m`,
/// and so on. Watch indices are 1-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Oscillator {
    pub z_star: Vec<BigRational>,
    pub z_starstar: Vec<BigRational>,
    pub watch_low: usize,
    pub watch_high: usize,
    pub m: f64,
}

impl Oscillator {
    pub fn level_values(&self, level: Level) -> &[BigRational] {
        match level {
            Level::Star => &self.z_star,
            Level::StarStar => &self.z_starstar,
        }
    }

    /// The 0-based coordinate that rises while `level` is held.
    pub fn rising(&self, level: Level) -> usize {
        match level {
            Level::StarStar => self.watch_low - 1,
            Level::Star => self.watch_high - 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ResourceSignal {
    /// `z_j(t) = x_{mapping[j]}(t)`, 1-based; realizes the classical system.
    Coupled { mapping: Vec<usize> },
    Constant { z: Vec<BigRational> },
    /// `(switch_time, value)` pairs; the value holds from its time until the next.
    Piecewise { schedule: Vec<(f64, Vec<BigRational>)> },
    Oscillator(Oscillator),
}

impl ResourceSignal {
    /// Identity coupling `z_j = x_j` for a square system.
    pub fn identity(d: usize) -> Self {
        ResourceSignal::Coupled { mapping: (1..=d).collect() }
    }

    pub fn is_coupled(&self) -> bool {
        matches!(self, ResourceSignal::Coupled { .. })
    }

    /// Value of a coupled signal at a state: the selected coordinates.
    pub fn coupled_value(mapping: &[usize], x: &[f64]) -> Vec<f64> {
        mapping.iter().map(|&j| x[j - 1]).collect()
    }

    /// Value of a piecewise schedule at time `t`; before the first entry the
    /// first value applies.
    pub fn schedule_value(schedule: &[(f64, Vec<BigRational>)], t: f64) -> &[BigRational] {
        let idx = schedule.iter().rposition(|(ts, _)| *ts <= t).unwrap_or(0);
        &schedule[idx].1
    }
}

/// Checks every type invariant of the pair.
pub fn validate(spec: &SystemSpec, signal: &ResourceSignal) -> Result<(), ModelError> {
    let d = spec.d();
    let dprime = spec.dprime();
    if spec.s.len() != d || spec.s.iter().any(|r| r.len() != dprime) {
        return Err(ModelError::DimensionMismatch("S shape does not match d x dprime".into()));
    }
    let check_len = |what: &str, v: &[BigRational]| {
        if v.len() != dprime {
            Err(ModelError::DimensionMismatch(format!(
                "{what} has {} entries, expected dprime = {dprime}",
                v.len()
            )))
        } else {
            Ok(())
        }
    };
    match signal {
        ResourceSignal::Coupled { mapping } => {
            if mapping.len() != dprime {
                return Err(ModelError::DimensionMismatch(format!(
                    "coupled mapping has {} entries, expected dprime = {dprime}",
                    mapping.len()
                )));
            }
            if let Some(&j) = mapping.iter().find(|&&j| j == 0 || j > d) {
                return Err(ModelError::BadSignal(format!("mapping index {j} outside 1..={d}")));
            }
        }
        ResourceSignal::Constant { z } => check_len("constant signal", z)?,
        ResourceSignal::Piecewise { schedule } => {
            if schedule.is_empty() {
                return Err(ModelError::BadSignal("piecewise schedule is empty".into()));
            }
            for (t, z) in schedule {
                if !t.is_finite() {
                    return Err(ModelError::NonFinite("piecewise switch time".into()));
                }
                check_len("piecewise value", z)?;
            }
            if schedule.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(ModelError::BadSignal("piecewise switch times must strictly increase".into()));
            }
        }
        ResourceSignal::Oscillator(osc) => {
            check_len("z_star", &osc.z_star)?;
            check_len("z_starstar", &osc.z_starstar)?;
            if !osc.m.is_finite() {
                return Err(ModelError::NonFinite("oscillator threshold".into()));
            }
            if osc.m <= 0.0 {
                return Err(ModelError::BadSignal("oscillator threshold m must be positive".into()));
            }
            for w in [osc.watch_low, osc.watch_high] {
                if w == 0 || w > d {
                    return Err(ModelError::BadSignal(format!("watch index {w} outside 1..={d}")));
                }
            }
            if osc.watch_low == osc.watch_high {
                return Err(ModelError::BadSignal("watch indices must be distinct".into()));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub t: f64,
    pub x: Vec<f64>,
}

/// Time-stamped samples with the observed bound `beta` (sup over every
/// integration step, which includes every retained sample).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<State>,
    /// `Z(t)` at each retained sample; empty when not recorded.
    pub resources: Vec<Vec<f64>>,
    pub beta: f64,
}

impl Trajectory {
    /// Builds a trajectory whose bound is the max over its samples.
    pub fn from_samples(samples: Vec<State>) -> Self {
        let beta = samples
            .iter()
            .flat_map(|s| s.x.iter().copied())
            .fold(0.0_f64, f64::max);
        Trajectory { samples, resources: Vec::new(), beta }
    }

    pub fn dim(&self) -> usize {
        self.samples.first().map_or(0, |s| s.x.len())
    }

    pub fn last(&self) -> Option<&State> {
        self.samples.last()
    }

    /// Writes `t,x1..xd[,z1..zdprime]` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), ModelError> {
        let d = self.dim();
        let dz = self.resources.first().map_or(0, |z| z.len());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string()];
        header.extend((1..=d).map(|i| format!("x{i}")));
        header.extend((1..=dz).map(|j| format!("z{j}")));
        w.write_record(&header).map_err(|e| ModelError::Csv(e.to_string()))?;
        for (k, s) in self.samples.iter().enumerate() {
            let mut row = vec![fmt17(s.t)];
            row.extend(s.x.iter().map(|&v| fmt17(v)));
            if dz > 0 {
                row.extend(self.resources[k].iter().map(|&v| fmt17(v)));
            }
            w.write_record(&row).map_err(|e| ModelError::Csv(e.to_string()))?;
        }
        w.flush().map_err(|e| ModelError::Csv(e.to_string()))?;
        Ok(())
    }

    /// Reads a trajectory CSV with `d` state columns; `z` columns are kept if present.
    pub fn read_csv<R: Read>(input: R, d: usize) -> Result<Trajectory, ModelError> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers().map_err(|e| ModelError::Csv(e.to_string()))?.clone();
        if headers.len() < d + 1 || &headers[0] != "t" {
            return Err(ModelError::Csv(format!(
                "expected header t,x1..x{d}; got {} columns",
                headers.len()
            )));
        }
        for i in 1..=d {
            if headers[i] != format!("x{i}") {
                return Err(ModelError::Csv(format!("column {} should be x{i}", i + 1)));
            }
        }
        let mut samples = Vec::new();
        let mut resources = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| ModelError::Csv(e.to_string()))?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|f| f.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| ModelError::Csv(e.to_string()))?;
            if vals.len() != headers.len() {
                return Err(ModelError::Csv("ragged row".into()));
            }
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite("trajectory csv".into()));
            }
            samples.push(State { t: vals[0], x: vals[1..=d].to_vec() });
            if vals.len() > d + 1 {
                resources.push(vals[d + 1..].to_vec());
            }
        }
        if samples.windows(2).any(|w| w[1].t <= w[0].t) {
            return Err(ModelError::Csv("sample times must strictly increase".into()));
        }
        let mut traj = Trajectory::from_samples(samples);
        traj.resources = resources;
        Ok(traj)
    }
}

/// 17 significant digits, which round-trips every `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Integration settings.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    pub log_space: bool,
    pub sample_stride: usize,
    pub extinction_floor: f64,
    pub blowup: f64,
}

impl SimConfig {
    pub fn new(x0: Vec<f64>, horizon: f64, dt: f64) -> Self {
        SimConfig {
            x0,
            horizon,
            dt,
            log_space: true,
            sample_stride: 1,
            extinction_floor: 1e-300,
            blowup: 1e12,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.sample_stride = stride;
        self
    }

    pub fn linear(mut self) -> Self {
        self.log_space = false;
        self
    }

    pub fn validate(&self, d: usize) -> Result<(), ModelError> {
        if self.x0.len() != d {
            return Err(ModelError::DimensionMismatch(format!(
                "x0 has {} entries, expected d = {d}",
                self.x0.len()
            )));
        }
        if self.x0.iter().any(|v| !v.is_finite()) {
            return Err(ModelError::NonFinite("x0".into()));
        }
        if !self.horizon.is_finite() || !self.dt.is_finite() {
            return Err(ModelError::NonFinite("horizon/dt".into()));
        }
        if self.dt <= 0.0 || self.horizon <= 0.0 || self.dt >= self.horizon {
            return Err(ModelError::BadConfig("need 0 < dt < horizon".into()));
        }
        if self.sample_stride == 0 {
            return Err(ModelError::BadConfig("sample_stride must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ScheduleEntry {
    pub t: f64,
    pub z: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalDoc {
    Coupled {
        mapping: Vec<usize>,
    },
    Constant {
        z: Vec<String>,
    },
    Piecewise {
        schedule: Vec<ScheduleEntry>,
    },
    Oscillator {
        z_star: Vec<String>,
        z_starstar: Vec<String>,
        watch_low: usize,
        watch_high: usize,
        m: f64,
    },
}

/// On-disk config document.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ConfigDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub d: usize,
    pub dprime: usize,
    #[serde(rename = "C")]
    pub c: Vec<String>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<String>>,
    pub signal: SignalDoc,
    pub x0: Vec<f64>,
    pub horizon: f64,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_space: Option<bool>,
}

/// A parsed and validated config.
#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub name: Option<String>,
    pub spec: SystemSpec,
    pub signal: ResourceSignal,
    pub sim: SimConfig,
    pub beta: Option<f64>,
}

fn parse_vec(v: &[String]) -> Result<Vec<BigRational>, ModelError> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn fmt_vec(v: &[BigRational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config, ModelError> {
        let doc: ConfigDoc = serde_json::from_str(text).map_err(|e| ModelError::BadConfig(e.to_string()))?;
        Config::from_doc(&doc)
    }

    pub fn from_doc(doc: &ConfigDoc) -> Result<Config, ModelError> {
        if doc.c.len() != doc.d {
            return Err(ModelError::DimensionMismatch(format!(
                "C has {} entries but d = {}",
                doc.c.len(),
                doc.d
            )));
        }
        let c = parse_vec(&doc.c)?;
        let s = doc.s.iter().map(|r| parse_vec(r)).collect::<Result<Vec<_>, _>>()?;
        let spec = SystemSpec::new(c, s, doc.dprime)?;
        let signal = match &doc.signal {
            SignalDoc::Coupled { mapping } => ResourceSignal::Coupled { mapping: mapping.clone() },
            SignalDoc::Constant { z } => ResourceSignal::Constant { z: parse_vec(z)? },
            SignalDoc::Piecewise { schedule } => ResourceSignal::Piecewise {
                schedule: schedule
                    .iter()
                    .map(|e| Ok((e.t, parse_vec(&e.z)?)))
                    .collect::<Result<_, ModelError>>()?,
            },
            SignalDoc::Oscillator { z_star, z_starstar, watch_low, watch_high, m } => {
                ResourceSignal::Oscillator(Oscillator {
                    z_star: parse_vec(z_star)?,
                    z_starstar: parse_vec(z_starstar)?,
                    watch_low: *watch_low,
                    watch_high: *watch_high,
                    m: *m,
                })
            }
        };
        validate(&spec, &signal)?;
        let mut sim = SimConfig::new(doc.x0.clone(), doc.horizon, doc.dt);
        if let Some(stride) = doc.sample_stride {
            sim.sample_stride = stride;
        }
        if let Some(log_space) = doc.log_space {
            sim.log_space = log_space;
        }
        sim.validate(spec.d())?;
        if let Some(b) = doc.beta {
            if !b.is_finite() || b <= 0.0 {
                return Err(ModelError::BadConfig("beta must be positive and finite".into()));
            }
        }
        Ok(Config { name: doc.name.clone(), spec, signal, sim, beta: doc.beta })
    }

    pub fn to_doc(&self) -> ConfigDoc {
        let signal = match &self.signal {
            ResourceSignal::Coupled { mapping } => SignalDoc::Coupled { mapping: mapping.clone() },
            ResourceSignal::Constant { z } => SignalDoc::Constant { z: fmt_vec(z) },
            ResourceSignal::Piecewise { schedule } => SignalDoc::Piecewise {
                schedule: schedule.iter().map(|(t, z)| ScheduleEntry { t: *t, z: fmt_vec(z) }).collect(),
            },
            ResourceSignal::Oscillator(o) => SignalDoc::Oscillator {
                z_star: fmt_vec(&o.z_star),
                z_starstar: fmt_vec(&o.z_starstar),
                watch_low: o.watch_low,
                watch_high: o.watch_high,
                m: o.m,
            },
        };
        ConfigDoc {
            name: self.name.clone(),
            d: self.spec.d(),
            dprime: self.spec.dprime(),
            c: fmt_vec(&self.spec.c),
            s: self.spec.s.iter().map(|r| fmt_vec(r)).collect(),
            signal,
            x0: self.sim.x0.clone(),
            horizon: self.sim.horizon,
            dt: self.sim.dt,
            beta: self.beta,
            sample_stride: Some(self.sim.sample_stride),
            log_space: Some(self.sim.log_space),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("config serializes")
    }
}
