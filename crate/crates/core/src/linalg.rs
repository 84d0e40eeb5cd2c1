//! Exact linear algebra over the rationals by fraction-free (Bareiss)
//! Gauss-Jordan elimination on integer-scaled matrices.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Dense row-major integer matrix.
pub type IntMatrix = Vec<Vec<BigInt>>;

/// Reduced echelon form where every pivot equals the same determinant `det`.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub rows: IntMatrix,
    pub pivots: Vec<usize>,
    pub ncols: usize,
    pub det: BigInt,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Integer basis of `{x : A x = 0}`, one vector per free column.
    pub fn null_space(&self) -> Vec<Vec<BigInt>> {
        let mut is_pivot = vec![false; self.ncols];
        for &p in &self.pivots {
            is_pivot[p] = true;
        }
        (0..self.ncols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut x = vec![BigInt::zero(); self.ncols];
                x[f] = self.det.clone();
                for (i, &p) in self.pivots.iter().enumerate() {
                    x[p] = -self.rows[i][f].clone();
                }
                canonical_ints(&x)
            })
            .collect()
    }
}

/// Fraction-free Gauss-Jordan elimination. Every intermediate division is exact.
pub fn echelon(mut a: IntMatrix, ncols: usize) -> Echelon {
    let nrows = a.len();
    let mut prev = BigInt::one();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let piv = a[r][c].clone();
        let (head, rest) = a.split_at_mut(r);
        let (pivot_row, tail) = rest.split_first_mut().expect("pivot row");
        for row in head.iter_mut().chain(tail.iter_mut()) {
            let f = std::mem::take(&mut row[c]);
            for j in 0..ncols {
                if j == c {
                    continue;
                }
                let v = &piv * &row[j] - &f * &pivot_row[j];
                let (quo, rem) = v.div_rem(&prev);
                assert!(rem.is_zero(), "Bareiss division must be exact");
                row[j] = quo;
            }
        }
        prev = piv;
        pivots.push(c);
        r += 1;
    }
    // Rows above the last pivot were rescaled along the way; every pivot now equals `prev`.
    debug_assert!(pivots.iter().enumerate().all(|(i, &p)| a[i][p] == prev));
    Echelon { rows: a, pivots, ncols, det: prev }
}

/// Scales each row by the lcm of its denominators, which leaves the row
/// space unchanged.
pub fn integer_rows(rows: &[Vec<BigRational>]) -> IntMatrix {
    rows.iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            row.iter().map(|x| x.numer() * (&l / x.denom())).collect()
        })
        .collect()
}

pub fn transpose<T: Clone>(rows: &[Vec<T>], ncols: usize) -> Vec<Vec<T>> {
    (0..ncols).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn rank(rows: &[Vec<BigRational>], ncols: usize) -> usize {
    echelon(integer_rows(rows), ncols).rank()
}

/// Integer basis of the right kernel `{x : A x = 0}` of an `nrows x ncols` matrix.
pub fn null_space(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigInt>> {
    echelon(integer_rows(rows), ncols).null_space()
}

/// Integer basis of the left kernel `{y : y A = 0}` of an `nrows x ncols` matrix.
pub fn left_null_space(rows: &[Vec<BigRational>], ncols: usize) -> Vec<Vec<BigInt>> {
    null_space(&transpose(rows, ncols), rows.len())
}

/// Coprime integers with the first nonzero entry positive; zero stays zero.
pub fn canonical_ints(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let first_neg = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    let g = if first_neg { -g } else { g };
    v.iter().map(|x| x / &g).collect()
}

/// Clears denominators and canonicalizes a rational vector.
pub fn canonical_rational(v: &[BigRational]) -> Vec<BigInt> {
    let l = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| x.numer() * (&l / x.denom())).collect();
    canonical_ints(&ints)
}

/// `v · A` for a row vector `v` and a `len(v) x ncols` matrix.
pub fn row_times(v: &[BigRational], a: &[Vec<BigRational>], ncols: usize) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); ncols];
    for (vi, row) in v.iter().zip(a) {
        if vi.is_zero() {
            continue;
        }
        for (o, x) in out.iter_mut().zip(row) {
            *o += vi * x;
        }
    }
    out
}

pub fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn ints_to_rationals(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().cloned().map(BigRational::from_integer).collect()
}
