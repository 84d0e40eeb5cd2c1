//! Independent oracles: plain rational Gaussian elimination and exhaustive
//! subset testing, sharing no code with the library's elimination.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Reduced row echelon form over Q; returns pivot columns.
pub fn rref(m: &mut [Vec<Q>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let inv = Q::one() / &m[r][c];
        for x in m[r].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..m.len() {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..ncols {
                    let sub = &f * &m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == m.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &[Vec<Q>], ncols: usize) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m, ncols).len()
}

/// Basis of `{y : y A = 0}` for the rows `A`.
pub fn left_kernel(rows: &[Vec<Q>], ncols: usize) -> Vec<Vec<Q>> {
    let n = rows.len();
    let mut t: Vec<Vec<Q>> = (0..ncols).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect();
    let pivots = rref(&mut t, n);
    (0..n)
        .filter(|f| !pivots.contains(f))
        .map(|f| {
            let mut y = vec![Q::zero(); n];
            y[f] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                y[p] = -t[i][f].clone();
            }
            y
        })
        .collect()
}

/// Integer entries, coprime, first nonzero positive, as strings.
pub fn canonical(v: &[Q]) -> Vec<String> {
    use num_integer::Integer;
    let l = v.iter().fold(BigInt::one(), |a, x| a.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    let g = ints.iter().fold(BigInt::zero(), |a, x| a.gcd(x));
    let neg = ints.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if neg { -g } else { g };
    ints.iter().map(|x| (x / &g).to_string()).collect()
}

/// Exhaustive team: every support σ whose rows have a null vector while no
/// proper subset does; the vector is the unique one on σ.
pub fn brute_force_team(s: &[Vec<Q>], dprime: usize) -> BTreeSet<Vec<String>> {
    let d = s.len();
    let nullity = |mask: u32| -> usize {
        let rows: Vec<Vec<Q>> = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| s[i].clone()).collect();
        rows.len() - rank(&rows, dprime)
    };
    let mut out = BTreeSet::new();
    for mask in 1u32..(1 << d) {
        if nullity(mask) == 0 {
            continue;
        }
        // every proper subset is contained in some mask with one bit removed
        let minimal = (0..d).filter(|i| mask >> i & 1 == 1).all(|i| nullity(mask & !(1 << i)) == 0);
        if !minimal {
            continue;
        }
        let idx: Vec<usize> = (0..d).filter(|i| mask >> i & 1 == 1).collect();
        let rows: Vec<Vec<Q>> = idx.iter().map(|&i| s[i].clone()).collect();
        let local = left_kernel(&rows, dprime);
        assert_eq!(local.len(), 1, "a minimal dependent set has nullity 1");
        let mut full = vec![Q::zero(); d];
        for (&i, v) in idx.iter().zip(&local[0]) {
            full[i] = v.clone();
        }
        out.insert(canonical(&full));
    }
    out
}

/// A random `d x dprime` rational matrix with small entries and many zeros,
/// so that degenerate supports appear often.
pub fn random_matrix<R: Rng>(rng: &mut R, d: usize, dprime: usize) -> Vec<Vec<Q>> {
    (0..d)
        .map(|_| {
            (0..dprime)
                .map(|_| if rng.gen_bool(0.4) { Q::zero() } else { q(rng.gen_range(-3..=3), rng.gen_range(1..=3)) })
                .collect()
        })
        .collect()
}

pub fn to_strings(m: &[Vec<Q>]) -> Vec<Vec<String>> {
    m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}
