//! JSON documents written by the command-line tool. Indices are 1-based and
//! exact quantities are rational strings.

use serde::Serialize;

use crate::certificates::{must_die_report, BetaSource, DieOutReport, MustDieReport, TeamCertificate};
use crate::halfplanes::Vertex;
use crate::integrator::SimOutput;
use crate::model::{format_rational, SystemSpec};
use crate::nullspace::{NullTeam, NullVector};
use crate::trophic::{TrappingRegion, TrappingSummary, TrophicReport};

fn entries(v: &NullVector) -> Vec<String> {
    v.entries().iter().map(format_rational).collect()
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberDoc {
    pub entries: Vec<String>,
    pub support: Vec<usize>,
}

impl MemberDoc {
    pub fn new(v: &NullVector) -> Self {
        MemberDoc { entries: entries(v), support: one_based(v.support()) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TeamDoc {
    pub d: usize,
    pub dprime: usize,
    pub rank: usize,
    pub k: usize,
    pub member_count: usize,
    /// Member count expected for generic entries on the kernel coordinates.
    pub generic_count: u128,
    pub generic: bool,
    pub kernel_coordinates: Vec<usize>,
    pub support_bound: usize,
    pub basis: Vec<Vec<String>>,
    pub members: Vec<MemberDoc>,
}

impl TeamDoc {
    pub fn new(spec: &SystemSpec, team: &NullTeam) -> Self {
        TeamDoc {
            d: spec.d(),
            dprime: spec.dprime(),
            rank: spec.d() - team.k,
            k: team.k,
            member_count: team.members.len(),
            generic_count: team.generic_count,
            generic: team.is_generic(),
            kernel_coordinates: one_based(&team.kernel_coordinates),
            support_bound: team.support_bound,
            basis: team.basis.iter().map(entries).collect(),
            members: team.members.iter().map(MemberDoc::new).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateDoc {
    pub nu: Vec<String>,
    pub nu_plus: String,
    pub nu_dot_c: String,
    pub a: f64,
    pub b: f64,
    pub positive_support: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertifyDoc {
    pub beta: f64,
    pub beta_source: BetaSource,
    pub x0: Vec<f64>,
    pub k: usize,
    pub a_star: Option<f64>,
    pub b_star: Option<f64>,
    pub certificates: Vec<CertificateDoc>,
    pub balanced: Vec<Vec<String>>,
    pub must_die: MustDieReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trapping: Option<TrappingSummary>,
}

impl CertifyDoc {
    pub fn new(
        spec: &SystemSpec,
        team: &NullTeam,
        tc: &TeamCertificate,
        source: BetaSource,
        trapping: Option<&TrappingRegion>,
    ) -> Self {
        CertifyDoc {
            beta: tc.beta,
            beta_source: source,
            x0: tc.x0.clone(),
            k: tc.k,
            a_star: tc.a_star,
            b_star: tc.b_star,
            certificates: tc
                .certificates
                .iter()
                .map(|c| CertificateDoc {
                    nu: entries(&c.nu),
                    nu_plus: format_rational(&c.nu_plus),
                    nu_dot_c: format_rational(&c.nu_dot_c),
                    a: c.a,
                    b: c.b,
                    positive_support: one_based(&c.positive_support),
                })
                .collect(),
            balanced: tc.balanced.iter().map(entries).collect(),
            must_die: must_die_report(team, &spec.c),
            trapping: trapping.map(TrappingRegion::report),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TrophicDoc {
    pub check: TrophicReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trapping: Option<TrappingDoc>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrappingDoc {
    #[serde(flatten)]
    pub summary: TrappingSummary,
    pub weights: Vec<String>,
    /// Quadratic caps `a_n` for the growing species, keyed by 1-based index.
    pub caps: Vec<(usize, String)>,
}

impl TrappingDoc {
    pub fn new(r: &TrappingRegion) -> Self {
        TrappingDoc {
            summary: r.report(),
            weights: r.weights.iter().map(format_rational).collect(),
            caps: r.caps.iter().map(|(n, a)| (*n, format_rational(a))).collect(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyDoc {
    pub beta_source: BetaSource,
    #[serde(flatten)]
    pub report: DieOutReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct SwitchDoc {
    pub t: f64,
    pub level: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationDoc {
    pub steps: usize,
    pub samples: usize,
    pub beta: f64,
    pub t_end: f64,
    pub x_end: Vec<f64>,
    pub switches: Vec<SwitchDoc>,
    pub warnings: Vec<String>,
}

impl SimulationDoc {
    pub fn new(out: &SimOutput, warnings: Vec<String>) -> Self {
        let last = out.trajectory.last().expect("a run keeps its initial sample");
        SimulationDoc {
            steps: out.steps,
            samples: out.trajectory.samples.len(),
            beta: out.trajectory.beta,
            t_end: last.t,
            x_end: last.x.clone(),
            switches: out.switches.iter().map(|s| SwitchDoc { t: s.t, level: s.level.name() }).collect(),
            warnings,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HalfplanesDoc {
    pub zmax: f64,
    pub grid: usize,
    pub vertices: Vec<Vertex>,
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}
