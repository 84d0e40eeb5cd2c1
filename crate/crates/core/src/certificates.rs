//! Die-out certificates built from the log-linear functions `Λ_ν(X) = ν·ln X`.
//!
//! Along any solution `Λ_ν` changes at the constant rate `ν·C`. For an
//! oriented member (`ν·C < 0`) and a solution bounded by `β` this yields
//! `min_{ν_i > 0} x_i(t) <= exp(a_ν - b_ν t)`, and the team-wide pair
//! `(a*, b*) = (max a_ν, min b_ν)` bounds at least `k` coordinates at every
//! time.

use std::collections::BTreeSet;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::model::{to_f64, Trajectory};
use crate::nullspace::{orient, NullTeam, NullVector, NullspaceError};

/// Relative slack when comparing a float trajectory against an envelope.
pub const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("coordinate {0} is not strictly positive")]
    NonPositiveCoordinate(usize),
    #[error("nu . C = {0} is not negative; orient the vector first")]
    WrongOrientation(String),
    #[error("null vector has no positive entry")]
    NoPositiveEntry,
    #[error("x0[{index}] = {value} is outside (0, beta = {beta}]")]
    X0OutOfRange { index: usize, value: f64, beta: f64 },
    #[error("beta must be positive and finite, got {0}")]
    BadBeta(f64),
    #[error("every team member is balanced (nu . C = 0); coexistence regime")]
    AllBalanced,
    #[error("trajectory bound {traj_beta} exceeds certificate beta {cert_beta}")]
    BetaMismatch { traj_beta: f64, cert_beta: f64 },
    #[error("trajectory does not start at the certified initial state")]
    X0Mismatch,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Where the bound `β` behind a certificate came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaSource {
    Flag,
    Config,
    Trajectory,
    Simulation,
    TrappingRegion,
}

/// `Λ_ν(X) = Σ ν_i ln x_i`.
pub fn lambda_value(nu: &NullVector, x: &[f64]) -> Result<f64, CertError> {
    if x.len() != nu.dim() {
        return Err(CertError::Dimension(format!("state has {} coordinates, nu has {}", x.len(), nu.dim())));
    }
    let w = nu.to_f64();
    let mut acc = 0.0;
    for &i in nu.support() {
        if x[i] <= 0.0 || x[i].is_nan() {
            return Err(CertError::NonPositiveCoordinate(i));
        }
        acc += w[i] * x[i].ln();
    }
    Ok(acc)
}

/// Exact time derivative of `Λ_ν` along solutions: `ν·C`.
pub fn lambda_rate(nu: &NullVector, c: &[BigRational]) -> BigRational {
    nu.dot(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DieOutCertificate {
    pub nu: NullVector,
    pub nu_plus: BigRational,
    pub nu_dot_c: BigRational,
    pub a: f64,
    pub b: f64,
    /// 0-based coordinates with `ν_i > 0`.
    pub positive_support: Vec<usize>,
}

impl DieOutCertificate {
    pub fn envelope(&self, t: f64) -> f64 {
        (self.a - self.b * t).exp()
    }

    /// `min_{ν_i>0} x_i <= exp(a - b t)` up to [`ENVELOPE_SLACK`], compared in logs.
    pub fn holds_at(&self, t: f64, x: &[f64]) -> bool {
        let m = self.positive_support.iter().map(|&i| x[i]).fold(f64::INFINITY, f64::min);
        under_envelope(m, self.a, self.b, t)
    }
}

fn under_envelope(x: f64, a: f64, b: f64, t: f64) -> bool {
    x <= 0.0 || x.ln() <= a - b * t + ENVELOPE_SLACK.ln_1p()
}

fn check_beta(beta: f64) -> Result<(), CertError> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(CertError::BadBeta(beta))
    }
}

/// `(a_ν, b_ν)` for an oriented vector, a bound `β` and an initial state.
pub fn certificate(nu: &NullVector, c: &[BigRational], beta: f64, x0: &[f64]) -> Result<DieOutCertificate, CertError> {
    check_beta(beta)?;
    if x0.len() != nu.dim() || c.len() != nu.dim() {
        return Err(CertError::Dimension("nu, C and x0 must have length d".into()));
    }
    let rate = nu.dot(c);
    if !rate.is_negative() {
        return Err(CertError::WrongOrientation(crate::model::format_rational(&rate)));
    }
    let nu_plus = nu.positive_mass();
    if !nu_plus.is_positive() {
        return Err(CertError::NoPositiveEntry);
    }
    if let Some((index, &value)) = x0.iter().enumerate().find(|(_, &v)| !(v > 0.0 && v <= beta)) {
        return Err(CertError::X0OutOfRange { index, value, beta });
    }
    // a and b depend only on nu / nu_plus; normalize exactly first
    let weights: Vec<BigRational> = nu.entries().iter().map(|v| v / &nu_plus).collect();
    let neg_mass: BigRational = weights.iter().filter(|w| w.is_negative()).fold(BigRational::zero(), |a, w| a + w);
    let log_beta = beta.ln();
    let mut a = -log_beta * to_f64(&neg_mass);
    for &i in nu.support() {
        a += to_f64(&weights[i]) * x0[i].ln();
    }
    let b = to_f64(&(rate.abs() / &nu_plus));
    Ok(DieOutCertificate {
        nu: nu.clone(),
        nu_plus,
        nu_dot_c: rate,
        a,
        b,
        positive_support: nu.positive_support(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TeamCertificate {
    /// One per member with `ν·C < 0` after orientation.
    pub certificates: Vec<DieOutCertificate>,
    /// `max a_ν`; `None` when no member is certified.
    pub a_star: Option<f64>,
    /// `min b_ν`; `None` when no member is certified.
    pub b_star: Option<f64>,
    pub k: usize,
    /// Members with `ν·C = 0` (canonical orientation).
    pub balanced: Vec<NullVector>,
    pub beta: f64,
    pub x0: Vec<f64>,
}

/// Orients every member, certifies the decaying ones and aggregates `(a*, b*)`.
pub fn team_certificate(team: &NullTeam, c: &[BigRational], beta: f64, x0: &[f64]) -> Result<TeamCertificate, CertError> {
    check_beta(beta)?;
    let mut certificates = Vec::new();
    let mut balanced = Vec::new();
    for member in &team.members {
        match orient(member, c) {
            Ok(nu) => certificates.push(certificate(&nu, c, beta, x0)?),
            Err(NullspaceError::Balanced) => balanced.push(member.clone()),
            Err(e) => unreachable!("team members are nonzero: {e}"),
        }
    }
    if team.k > 0 && certificates.is_empty() && !balanced.is_empty() {
        return Err(CertError::AllBalanced);
    }
    let a_star = certificates.iter().map(|c| c.a).reduce(f64::max);
    let b_star = certificates.iter().map(|c| c.b).reduce(f64::min);
    Ok(TeamCertificate { certificates, a_star, b_star, k: team.k, balanced, beta, x0: x0.to_vec() })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtinctionClaim {
    /// Oriented member entries.
    pub oriented: Vec<String>,
    /// 1-based coordinates, at least one of which dies out.
    pub at_least_one_of: Vec<usize>,
    /// Set when the positive support is a single coordinate (1-based).
    pub definite: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MustDieReport {
    pub claims: Vec<ExtinctionClaim>,
    /// 1-based coordinates that must die out.
    pub definite: Vec<usize>,
    /// Canonical entries of balanced members; no claim is made for them.
    pub balanced: Vec<Vec<String>>,
    pub k: usize,
}

/// Extinction claims readable off the orientations alone.
pub fn must_die_report(team: &NullTeam, c: &[BigRational]) -> MustDieReport {
    let fmt = |v: &NullVector| v.entries().iter().map(crate::model::format_rational).collect::<Vec<_>>();
    let mut claims = Vec::new();
    let mut balanced = Vec::new();
    let mut definite = BTreeSet::new();
    for member in &team.members {
        match orient(member, c) {
            Ok(nu) => {
                let pos: Vec<usize> = nu.positive_support().iter().map(|i| i + 1).collect();
                let single = (pos.len() == 1).then(|| pos[0]);
                if let Some(i) = single {
                    definite.insert(i);
                }
                claims.push(ExtinctionClaim { oriented: fmt(&nu), at_least_one_of: pos, definite: single });
            }
            Err(_) => balanced.push(fmt(member)),
        }
    }
    MustDieReport { claims, definite: definite.into_iter().collect(), balanced, k: team.k }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MemberCheck {
    pub oriented: Vec<String>,
    pub ok: bool,
    pub first_violation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DieOutReport {
    pub times: Vec<f64>,
    /// Per sample, the 1-based coordinates with `x_i(t) <= exp(a* - b* t)`.
    pub census: Vec<Vec<usize>>,
    pub min_census: usize,
    pub k: usize,
    pub pass: bool,
    pub first_failure: Option<f64>,
    pub members: Vec<MemberCheck>,
    pub beta: f64,
}

impl DieOutReport {
    pub fn members_ok(&self) -> bool {
        self.members.iter().all(|m| m.ok)
    }
}

/// Census of coordinates under the team envelope at every sample.
pub fn verify_dieout(traj: &Trajectory, tc: &TeamCertificate) -> Result<DieOutReport, CertError> {
    if traj.beta > tc.beta {
        return Err(CertError::BetaMismatch { traj_beta: traj.beta, cert_beta: tc.beta });
    }
    let first = traj.samples.first().ok_or(CertError::X0Mismatch)?;
    let same_start = first.t == 0.0
        && first.x.len() == tc.x0.len()
        && first.x.iter().zip(&tc.x0).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0));
    if !same_start {
        return Err(CertError::X0Mismatch);
    }
    let (a_star, b_star) = (tc.a_star.unwrap_or(f64::NEG_INFINITY), tc.b_star.unwrap_or(0.0));
    let mut census = Vec::with_capacity(traj.samples.len());
    let mut times = Vec::with_capacity(traj.samples.len());
    let mut first_failure = None;
    let mut min_census = usize::MAX;
    for s in &traj.samples {
        let under: Vec<usize> = s
            .x
            .iter()
            .enumerate()
            .filter(|(_, &x)| tc.a_star.is_some() && under_envelope(x, a_star, b_star, s.t))
            .map(|(i, _)| i + 1)
            .collect();
        if under.len() < tc.k && first_failure.is_none() {
            first_failure = Some(s.t);
        }
        min_census = min_census.min(under.len());
        census.push(under);
        times.push(s.t);
    }
    let members = tc
        .certificates
        .iter()
        .map(|cert| {
            let bad = traj.samples.iter().find(|s| !cert.holds_at(s.t, &s.x)).map(|s| s.t);
            MemberCheck {
                oriented: cert.nu.entries().iter().map(crate::model::format_rational).collect(),
                ok: bad.is_none(),
                first_violation: bad,
            }
        })
        .collect();
    let min_census = if census.is_empty() { 0 } else { min_census };
    Ok(DieOutReport {
        times,
        census,
        min_census,
        k: tc.k,
        pass: first_failure.is_none(),
        first_failure,
        members,
        beta: tc.beta,
    })
}
