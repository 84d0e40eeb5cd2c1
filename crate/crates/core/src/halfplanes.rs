//! Planar resource space (`d' = 2`): the half-planes
//! `H_i = {z : c_i + s_i1 z1 + s_i2 z2 <= 0}` and the vertices of the
//! region `G` where no species grows.

use std::io::Write;

use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::integrator::percapita_rates_exact;
use crate::model::{format_rational, to_f64, SystemSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HalfplaneError {
    #[error("half-plane analysis needs dprime = 2, got {0}")]
    NotPlanar(usize),
    #[error("grid needs at least one interval and zmax > 0")]
    BadGrid,
    #[error("csv: {0}")]
    Io(String),
}

/// A boundary line `a z1 + b z2 + c = 0`, with its label.
#[derive(Clone, Debug)]
struct Line {
    label: String,
    a: BigRational,
    b: BigRational,
    c: BigRational,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vertex {
    /// Exact coordinates.
    pub z: [String; 2],
    pub z_f64: [f64; 2],
    /// Labels of the boundaries through the point: `H<i>`, `z1=0`, `z2=0`.
    pub on: Vec<String>,
    /// Both coordinates strictly positive.
    pub positive: bool,
}

/// `-1`, `0` or `1` per species: the exact sign of its per-capita rate at `z`.
pub fn rate_signs(spec: &SystemSpec, z: &[BigRational]) -> Vec<i8> {
    percapita_rates_exact(spec, z)
        .iter()
        .map(|r| if r.is_zero() { 0 } else if r.is_positive() { 1 } else { -1 })
        .collect()
}

fn lines(spec: &SystemSpec) -> Vec<Line> {
    let mut out: Vec<Line> = spec
        .s
        .iter()
        .zip(&spec.c)
        .enumerate()
        .filter(|(_, (row, _))| !(row[0].is_zero() && row[1].is_zero()))
        .map(|(i, (row, c))| Line { label: format!("H{}", i + 1), a: row[0].clone(), b: row[1].clone(), c: c.clone() })
        .collect();
    let (zero, one) = (BigRational::zero(), BigRational::from_integer(1.into()));
    out.push(Line { label: "z1=0".into(), a: one.clone(), b: zero.clone(), c: zero.clone() });
    out.push(Line { label: "z2=0".into(), a: zero.clone(), b: one, c: zero });
    out
}

fn on_line(l: &Line, z: &[BigRational; 2]) -> bool {
    (&l.a * &z[0] + &l.b * &z[1] + &l.c).is_zero()
}

/// Vertices of `G = {z >= 0 : every rate <= 0}` among pairwise boundary
/// intersections, in lexicographic order.
pub fn vertices(spec: &SystemSpec) -> Result<Vec<Vertex>, HalfplaneError> {
    if spec.dprime() != 2 {
        return Err(HalfplaneError::NotPlanar(spec.dprime()));
    }
    let ls = lines(spec);
    let mut points: Vec<[BigRational; 2]> = Vec::new();
    for (i, p) in ls.iter().enumerate() {
        for q in &ls[i + 1..] {
            let det = &p.a * &q.b - &p.b * &q.a;
            if det.is_zero() {
                continue;
            }
            let z1 = (&p.b * &q.c - &q.b * &p.c) / &det;
            let z2 = (&q.a * &p.c - &p.a * &q.c) / &det;
            let z = [z1, z2];
            if z.iter().any(Signed::is_negative) || rate_signs(spec, &z).iter().any(|&s| s > 0) {
                continue;
            }
            if !points.contains(&z) {
                points.push(z);
            }
        }
    }
    points.sort();
    Ok(points
        .into_iter()
        .map(|z| Vertex {
            on: ls.iter().filter(|l| on_line(l, &z)).map(|l| l.label.clone()).collect(),
            positive: z.iter().all(Signed::is_positive),
            z_f64: [to_f64(&z[0]), to_f64(&z[1])],
            z: [format_rational(&z[0]), format_rational(&z[1])],
        })
        .collect())
}

/// A default plotting window: 5/4 of the largest vertex coordinate, or 1.
pub fn default_zmax(vs: &[Vertex]) -> f64 {
    let m = vs.iter().flat_map(|v| v.z_f64).fold(0.0, f64::max);
    if m > 0.0 {
        1.25 * m
    } else {
        1.0
    }
}

/// Writes `z1,z2,sign_1..sign_d` on the `(grid+1)^2` lattice over `[0, zmax]^2`.
/// Grid points are exact multiples of `zmax / grid`, so signs are exact.
pub fn write_grid<W: Write>(spec: &SystemSpec, zmax: &BigRational, grid: usize, out: W) -> Result<(), HalfplaneError> {
    if spec.dprime() != 2 {
        return Err(HalfplaneError::NotPlanar(spec.dprime()));
    }
    if grid == 0 || !zmax.is_positive() {
        return Err(HalfplaneError::BadGrid);
    }
    let io = |e: csv::Error| HalfplaneError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["z1".to_string(), "z2".to_string()];
    header.extend((1..=spec.d()).map(|i| format!("sign_{i}")));
    w.write_record(&header).map_err(io)?;
    let step = zmax / BigRational::from_integer(grid.into());
    for i in 0..=grid {
        for j in 0..=grid {
            let z = [&step * BigRational::from_integer(i.into()), &step * BigRational::from_integer(j.into())];
            let mut row = vec![crate::model::fmt17(to_f64(&z[0])), crate::model::fmt17(to_f64(&z[1]))];
            row.extend(rate_signs(spec, &z).iter().map(|s| s.to_string()));
            w.write_record(&row).map_err(io)?;
        }
    }
    w.flush().map_err(|e| HalfplaneError::Io(e.to_string()))
}
