//! Kernel of `S^T` and its team of minimal-support null vectors.
//!
//! Null vectors are row vectors `ν` with `ν S = 0`. A null vector has minimal
//! support when the rows of `S` indexed by its support have a one-dimensional
//! left kernel. The team is enumerated support by support: a candidate set
//! `σ` yields a member iff `S_σ` has left nullity exactly one and the spanning
//! vector is nonzero on all of `σ`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{self, canonical_rational, dot, ints_to_rationals, row_times};
use crate::model::SystemSpec;

/// Default cap on the number of candidate supports tested by [`team`].
pub const DEFAULT_SUBSET_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NullspaceError {
    #[error("zero vector has no support")]
    ZeroVector,
    #[error("vector is not in the left kernel of S")]
    NotNullVector,
    #[error("{candidates} candidate supports exceed the cap of {cap}; lower max_support")]
    TooLarge { candidates: u64, cap: u64 },
    #[error("nu . C = 0: orientation undefined")]
    Balanced,
    #[error("|J| = {j} must be smaller than the kernel dimension {k}")]
    NotEnoughKernel { j: usize, k: usize },
    #[error("s[{i}][{j}] is nonzero for a focal row and a non-resource column")]
    NotClosed { i: usize, j: usize },
    #[error("index {0} out of range")]
    BadIndex(usize),
}

/// A left null vector of `S`. Indices in `support` are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NullVector {
    entries: Vec<BigRational>,
    support: Vec<usize>,
    canonical: bool,
}

impl NullVector {
    pub fn new(entries: Vec<BigRational>) -> Self {
        let support = entries
            .iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(i, _)| i)
            .collect();
        let canonical = entries.iter().all(|x| x.is_integer())
            && entries.iter().any(|x| !x.is_zero())
            && canonical_rational(&entries) == entries.iter().map(|x| x.to_integer()).collect::<Vec<_>>();
        NullVector { entries, support, canonical }
    }

    pub fn from_ints(v: &[BigInt]) -> Self {
        NullVector::new(ints_to_rationals(v))
    }

    pub fn from_i64(v: &[i64]) -> Self {
        NullVector::new(v.iter().map(|&x| BigRational::from_integer(x.into())).collect())
    }

    /// The canonical representative of this vector's line.
    pub fn canonical_form(&self) -> Self {
        NullVector::from_ints(&canonical_rational(&self.entries))
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.entries
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn negated(&self) -> Self {
        NullVector::new(self.entries.iter().map(|x| -x).collect())
    }

    pub fn scaled(&self, alpha: &BigRational) -> Self {
        NullVector::new(self.entries.iter().map(|x| x * alpha).collect())
    }

    /// Indices with strictly positive entries.
    pub fn positive_support(&self) -> Vec<usize> {
        self.support.iter().copied().filter(|&i| self.entries[i].is_positive()).collect()
    }

    /// Sum of the positive entries.
    pub fn positive_mass(&self) -> BigRational {
        self.entries.iter().filter(|x| x.is_positive()).fold(BigRational::zero(), |a, x| a + x)
    }

    pub fn dot(&self, c: &[BigRational]) -> BigRational {
        dot(&self.entries, c)
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.entries.iter().map(crate::model::to_f64).collect()
    }

    /// Exact check of `ν S = 0`.
    pub fn annihilates(&self, spec: &SystemSpec) -> bool {
        row_times(&self.entries, &spec.s, spec.dprime()).iter().all(Zero::is_zero)
    }
}

/// The kernel of `S^T` summarized by its minimal-support members.
#[derive(Clone, Debug, PartialEq)]
pub struct NullTeam {
    pub k: usize,
    pub basis: Vec<NullVector>,
    /// Canonical members ordered by support size, then lexicographically.
    pub members: Vec<NullVector>,
    /// Union of member supports (0-based).
    pub kernel_coordinates: Vec<usize>,
    /// Member count expected for generic entries on the kernel coordinates,
    /// `binom(|K|, rank(S_K) + 1)`.
    pub generic_count: u128,
    /// Largest support size examined.
    pub support_bound: usize,
}

impl NullTeam {
    pub fn is_generic(&self) -> bool {
        self.members.len() as u128 == self.generic_count
    }
}

#[derive(Clone, Copy, Debug)]
pub struct TeamOptions {
    pub max_support: Option<usize>,
    pub subset_cap: u64,
}

impl Default for TeamOptions {
    fn default() -> Self {
        TeamOptions { max_support: None, subset_cap: DEFAULT_SUBSET_CAP }
    }
}

/// `d - rank(S)` independent canonical vectors spanning `{ν : ν S = 0}`.
pub fn kernel_basis(spec: &SystemSpec) -> Vec<NullVector> {
    linalg::left_null_space(&spec.s, spec.dprime())
        .iter()
        .map(|v| NullVector::from_ints(v))
        .collect()
}

fn rows_of(spec: &SystemSpec, idx: &[usize]) -> Vec<Vec<BigRational>> {
    idx.iter().map(|&i| spec.s[i].clone()).collect()
}

/// Left nullity of the rows of `S` indexed by `idx`.
fn left_nullity(spec: &SystemSpec, idx: &[usize]) -> usize {
    idx.len() - linalg::rank(&rows_of(spec, idx), spec.dprime())
}

/// True iff no null vector has support strictly inside `supp(ν)`.
pub fn is_minimal_support(nu: &NullVector, spec: &SystemSpec) -> Result<bool, NullspaceError> {
    if nu.is_zero() {
        return Err(NullspaceError::ZeroVector);
    }
    if nu.dim() != spec.d() || !nu.annihilates(spec) {
        return Err(NullspaceError::NotNullVector);
    }
    Ok(left_nullity(spec, nu.support()) == 1)
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Lexicographic `size`-subsets of `items`.
fn for_each_subset(items: &[usize], size: usize, mut f: impl FnMut(&[usize])) {
    let n = items.len();
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    let mut chosen = vec![0usize; size];
    loop {
        for (c, &i) in chosen.iter_mut().zip(&idx) {
            *c = items[i];
        }
        f(&chosen);
        let Some(pos) = (0..size).rev().find(|&p| idx[p] != p + n - size) else {
            return;
        };
        idx[pos] += 1;
        for q in pos + 1..size {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// If the rows indexed by `sigma` carry a minimal-support null vector with
/// support exactly `sigma`, returns it embedded in `R^d`.
fn circuit_on(spec: &SystemSpec, sigma: &[usize]) -> Option<NullVector> {
    let local = linalg::left_null_space(&rows_of(spec, sigma), spec.dprime());
    if local.len() != 1 || local[0].iter().any(Zero::is_zero) {
        return None;
    }
    let mut full = vec![BigInt::zero(); spec.d()];
    for (&i, v) in sigma.iter().zip(&local[0]) {
        full[i] = v.clone();
    }
    Some(NullVector::from_ints(&full))
}

/// Enumerates the team of minimal-support null vectors.
pub fn team(spec: &SystemSpec, opts: TeamOptions) -> Result<NullTeam, NullspaceError> {
    let basis = kernel_basis(spec);
    let k = basis.len();
    let coords: Vec<usize> = (0..spec.d())
        .filter(|&i| basis.iter().any(|b| !b.entries()[i].is_zero()))
        .collect();
    let rank_k = coords.len() - left_nullity(spec, &coords);
    let mut bound = (rank_k + 1).min(coords.len());
    if let Some(m) = opts.max_support {
        bound = bound.min(m);
    }
    let candidates: u128 = (1..=bound).map(|s| binomial(coords.len(), s)).sum();
    if candidates > opts.subset_cap as u128 {
        return Err(NullspaceError::TooLarge {
            candidates: u64::try_from(candidates).unwrap_or(u64::MAX),
            cap: opts.subset_cap,
        });
    }

    let mut members: Vec<NullVector> = Vec::new();
    for size in 1..=bound {
        let mut found = Vec::new();
        for_each_subset(&coords, size, |sigma| {
            // a proper superset of a member's support is never minimal
            if members.iter().any(|m| m.support().iter().all(|i| sigma.contains(i))) {
                return;
            }
            if let Some(v) = circuit_on(spec, sigma) {
                found.push(v);
            }
        });
        members.extend(found);
    }
    let kernel_coordinates: BTreeSet<usize> = members.iter().flat_map(|m| m.support().iter().copied()).collect();
    Ok(NullTeam {
        k,
        basis,
        members,
        kernel_coordinates: kernel_coordinates.into_iter().collect(),
        generic_count: if coords.is_empty() { 0 } else { binomial(coords.len(), rank_k + 1) },
        support_bound: bound,
    })
}

/// Returns `ν` or `-ν`, whichever has `ν·C < 0`.
pub fn orient(nu: &NullVector, c: &[BigRational]) -> Result<NullVector, NullspaceError> {
    if nu.is_zero() {
        return Err(NullspaceError::ZeroVector);
    }
    let rate = nu.dot(c);
    if rate.is_zero() {
        Err(NullspaceError::Balanced)
    } else if rate.is_negative() {
        Ok(nu.clone())
    } else {
        Ok(nu.negated())
    }
}

/// A minimal-support null vector vanishing on every index of `avoid` (0-based).
pub fn cover_vector(spec: &SystemSpec, basis: &[NullVector], avoid: &[usize]) -> Result<NullVector, NullspaceError> {
    let k = basis.len();
    if avoid.len() >= k {
        return Err(NullspaceError::NotEnoughKernel { j: avoid.len(), k });
    }
    if let Some(&bad) = avoid.iter().find(|&&j| j >= spec.d()) {
        return Err(NullspaceError::BadIndex(bad));
    }
    // coefficients x with sum_l x_l basis_l[j] = 0 for every j in avoid
    let constraints: Vec<Vec<BigRational>> =
        avoid.iter().map(|&j| basis.iter().map(|b| b.entries()[j].clone()).collect()).collect();
    let coeffs = if constraints.is_empty() {
        let mut e = vec![BigInt::zero(); k];
        e[0] = BigInt::one();
        e
    } else {
        linalg::null_space(&constraints, k).into_iter().next().expect("|J| < k leaves a free coefficient")
    };
    let mut entries = vec![BigRational::zero(); spec.d()];
    for (x, b) in coeffs.iter().zip(basis) {
        if x.is_zero() {
            continue;
        }
        let x = BigRational::from_integer(x.clone());
        for (e, v) in entries.iter_mut().zip(b.entries()) {
            *e += &x * v;
        }
    }
    let mut nu = NullVector::new(entries);
    debug_assert!(!nu.is_zero());

    // shrink until the support carries a one-dimensional left kernel
    loop {
        let sup = nu.support().to_vec();
        let local = linalg::left_null_space(&rows_of(spec, &sup), spec.dprime());
        if local.len() <= 1 {
            break;
        }
        let (a, b) = (&local[0], &local[1]);
        let p = a.iter().position(|x| !x.is_zero()).expect("basis vector is nonzero");
        let w: Vec<BigInt> = a.iter().zip(b).map(|(ai, bi)| &b[p] * ai - &a[p] * bi).collect();
        let mut full = vec![BigRational::zero(); spec.d()];
        for (&i, v) in sup.iter().zip(&w) {
            full[i] = BigRational::from_integer(v.clone());
        }
        nu = NullVector::new(full);
    }
    Ok(nu.canonical_form())
}

/// Restricts a square system to focal rows `focal` and resource columns
/// `resources` (0-based), provided focal rows touch no other columns.
pub fn restrict_system(full: &SystemSpec, focal: &[usize], resources: &[usize]) -> Result<SystemSpec, NullspaceError> {
    if let Some(&bad) = focal.iter().chain(resources).find(|&&i| i >= full.d().max(full.dprime())) {
        return Err(NullspaceError::BadIndex(bad));
    }
    let in_r: BTreeSet<usize> = resources.iter().copied().collect();
    for &i in focal {
        for j in 0..full.dprime() {
            if !in_r.contains(&j) && !full.s[i][j].is_zero() {
                return Err(NullspaceError::NotClosed { i, j });
            }
        }
    }
    let c = focal.iter().map(|&i| full.c[i].clone()).collect();
    let s = focal
        .iter()
        .map(|&i| resources.iter().map(|&j| full.s[i][j].clone()).collect())
        .collect();
    Ok(SystemSpec::new(c, s, resources.len()).expect("restriction keeps shapes consistent"))
}
