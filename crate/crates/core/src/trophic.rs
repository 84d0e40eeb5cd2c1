//! Trophic sign conditions and the linear trapping function
//! `V(X) = Σ ε^n x_n` with `V̇ <= A - B V`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{format_rational, to_f64, SystemSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrophicError {
    #[error("trophic analysis needs a square system, got {d} x {dprime}")]
    NotSquare { d: usize, dprime: usize },
    #[error("quadratic cap needs c >= 0 and s < 0")]
    BadSigns,
    #[error("system is not trophic")]
    NotTrophic(TrophicReport),
    #[error("lambda factor must exceed 1")]
    BadFactor,
}

/// Result of the sign checks; indices are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrophicReport {
    pub pass: bool,
    /// `n` with `c_n >= 0` and `s_nn >= 0`.
    pub t1_violations: Vec<usize>,
    /// `(n, m)` with `s_nm > 0` and (`n <= m` or `s_mn >= 0`).
    pub t2_violations: Vec<(usize, usize)>,
}

pub fn check_trophic(spec: &SystemSpec) -> Result<TrophicReport, TrophicError> {
    if !spec.is_square() {
        return Err(TrophicError::NotSquare { d: spec.d(), dprime: spec.dprime() });
    }
    let d = spec.d();
    let s = &spec.s;
    let t1_violations: Vec<usize> = (0..d)
        .filter(|&n| !spec.c[n].is_negative() && !s[n][n].is_negative())
        .map(|n| n + 1)
        .collect();
    let mut t2_violations = Vec::new();
    for n in 0..d {
        for m in 0..d {
            if s[n][m].is_positive() && (n <= m || !s[m][n].is_negative()) {
                t2_violations.push((n + 1, m + 1));
            }
        }
    }
    Ok(TrophicReport { pass: t1_violations.is_empty() && t2_violations.is_empty(), t1_violations, t2_violations })
}

/// The smallest `a` with `c x + s x^2 <= a - x` for all `x`: `-(c+1)^2 / (4 s)`.
pub fn quadratic_cap(c: &BigRational, s: &BigRational) -> Result<BigRational, TrophicError> {
    if c.is_negative() || !s.is_negative() {
        return Err(TrophicError::BadSigns);
    }
    let c1 = c + BigRational::one();
    Ok(-(&c1 * &c1) / (BigRational::from_integer(4.into()) * s))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrappingRegion {
    pub epsilon: BigRational,
    /// `(ε, ε^2, ..., ε^d)`.
    pub weights: Vec<BigRational>,
    /// 1-based indices with `c_n >= 0`.
    pub growing: Vec<usize>,
    /// Quadratic caps `a_n` keyed by 1-based index in `growing`.
    pub caps: BTreeMap<usize, BigRational>,
    pub a: BigRational,
    pub b: BigRational,
    pub lambda: BigRational,
}

impl TrappingRegion {
    pub fn v_value(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, xi)| to_f64(w) * xi).sum()
    }

    /// Any state with `V(X) <= v` has every coordinate at most `v / ε^d`.
    pub fn coordinate_bound(&self, v: f64) -> f64 {
        v / to_f64(self.weights.last().expect("d >= 1"))
    }

    pub fn report(&self) -> TrappingSummary {
        TrappingSummary {
            epsilon: format_rational(&self.epsilon),
            a: format_rational(&self.a),
            b: format_rational(&self.b),
            lambda: format_rational(&self.lambda),
            growing: self.growing.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrappingSummary {
    pub epsilon: String,
    #[serde(rename = "A")]
    pub a: String,
    #[serde(rename = "B")]
    pub b: String,
    pub lambda: String,
    pub growing: Vec<usize>,
}

/// Trapping region with `λ = 2 A / B` (or `1` when `A = 0`).
pub fn trapping_region(spec: &SystemSpec) -> Result<TrappingRegion, TrophicError> {
    trapping_region_with_factor(spec, &BigRational::from_integer(2.into()))
}

pub fn trapping_region_with_factor(spec: &SystemSpec, factor: &BigRational) -> Result<TrappingRegion, TrophicError> {
    if factor <= &BigRational::one() {
        return Err(TrophicError::BadFactor);
    }
    let report = check_trophic(spec)?;
    if !report.pass {
        return Err(TrophicError::NotTrophic(report));
    }
    let d = spec.d();
    let s = &spec.s;
    let pairs: Vec<(usize, usize)> =
        (0..d).flat_map(|n| (0..d).map(move |m| (n, m))).filter(|&(n, m)| s[n][m].is_positive()).collect();

    // largest 2^-j, j >= 1, with ε^(n-m) s_nm + s_mn <= 0 for every s_nm > 0
    let half = BigRational::new(1.into(), 2.into());
    let mut epsilon = half.clone();
    loop {
        let ok = pairs.iter().all(|&(n, m)| {
            let scaled = num_traits::pow(epsilon.clone(), n - m) * &s[n][m];
            !(scaled + &s[m][n]).is_positive()
        });
        if ok {
            break;
        }
        epsilon *= &half;
    }

    let mut weights = Vec::with_capacity(d);
    let mut w = BigRational::one();
    for _ in 0..d {
        w *= &epsilon;
        weights.push(w.clone());
    }
    let growing: Vec<usize> = (0..d).filter(|&n| !spec.c[n].is_negative()).map(|n| n + 1).collect();
    let mut caps = BTreeMap::new();
    let mut a = BigRational::zero();
    for &n in &growing {
        let cap = quadratic_cap(&spec.c[n - 1], &s[n - 1][n - 1]).expect("T1 gives s_nn < 0 when c_n >= 0");
        a += &weights[n - 1] * &cap;
        caps.insert(n, cap);
    }
    let b = (0..d)
        .filter(|&n| spec.c[n].is_negative())
        .map(|n| spec.c[n].abs())
        .fold(BigRational::one(), |acc, x| if x < acc { x } else { acc });
    let lambda = if a.is_zero() { BigRational::one() } else { factor * &a / &b };
    Ok(TrappingRegion { epsilon, weights, growing, caps, a, b, lambda })
}

/// `V̇(X) = Σ ε^n x_n (c_n + Σ_m s_nm x_m)` for the classical system.
pub fn v_dot(spec: &SystemSpec, region: &TrappingRegion, x: &[f64]) -> f64 {
    let c = spec.c_f64();
    let s = spec.s_f64();
    region
        .weights
        .iter()
        .enumerate()
        .map(|(n, w)| {
            let rate = c[n] + s[n].iter().zip(x).map(|(snm, xm)| snm * xm).sum::<f64>();
            to_f64(w) * x[n] * rate
        })
        .sum()
}
