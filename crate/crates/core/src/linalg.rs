//! Small dense linear algebra used by conic fitting: fraction-free integer
//! elimination for the exact backend and an SVD nullspace for floats.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::{Field, Scalar};

/// Clears denominators of a rational row.
pub fn integer_row(row: &[BigRational]) -> Vec<BigInt> {
    let lcm = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| x.numer() * (&lcm / x.denom())).collect()
}

/// Exact rows of a generic matrix, or `None` on the float backend.
pub fn exact_rows<F: Field>(rows: &[Vec<F>]) -> Option<Vec<Vec<BigInt>>> {
    rows.iter()
        .map(|r| {
            let q: Option<Vec<BigRational>> = r
                .iter()
                .map(|x| match x.to_scalar() {
                    Scalar::Exact(q) => Some(q),
                    Scalar::Float(_) => None,
                })
                .collect();
            q.map(|q| integer_row(&q))
        })
        .collect()
}

/// Determinant by Bareiss elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &m[i][j] * &m[k][k] - &m[i][k] * &m[k][j];
                m[i][j] = v / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * &m[n - 1][n - 1]
}

/// Rank by fraction-free row reduction.
pub fn bigint_rank(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut prev = BigInt::one();
    for c in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        for i in rank + 1..rows {
            for j in c + 1..cols {
                let v = &m[i][j] * &m[rank][c] - &m[i][c] * &m[rank][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[rank][c].clone();
        rank += 1;
    }
    rank
}

/// Null vector of an integer `n x (n+1)` matrix via signed maximal minors.
/// Fails with [`Error::NoUniqueConic`] when the rank is below `n`.
pub fn exact_null_vector(m: &[Vec<BigInt>]) -> Result<Vec<BigInt>> {
    let cols = m.len() + 1;
    let mut v: Vec<BigInt> = (0..cols)
        .map(|skip| {
            let minor: Vec<Vec<BigInt>> = m
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let d = bareiss_det(minor);
            if skip % 2 == 0 {
                d
            } else {
                -d
            }
        })
        .collect();
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return Err(Error::NoUniqueConic);
    }
    for x in v.iter_mut() {
        *x /= &g;
    }
    Ok(v)
}

/// Float null vector of a `k x 6` system (`k <= 6`) with row-normalized
/// input. Returns the unit singular vector of least singular value and the
/// singular values in decreasing order.
pub fn float_null_vector(rows: &[[f64; 6]]) -> (Vec<f64>, Vec<f64>) {
    let mut m = nalgebra::DMatrix::<f64>::zeros(rows.len().max(6), 6);
    for (i, r) in rows.iter().enumerate() {
        let n = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        let n = if n > 0.0 { n } else { 1.0 };
        for j in 0..6 {
            m[(i, j)] = r[j] / n;
        }
    }
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let last = *order.last().unwrap();
    let v = (0..6).map(|j| vt[(last, j)]).collect();
    let s = order.iter().map(|&i| svd.singular_values[i]).collect();
    (v, s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
            .collect()
    }

    #[test]
    fn determinants() {
        assert_eq!(bareiss_det(m(&[&[2, 0], &[0, 3]])), BigInt::from(6));
        assert_eq!(bareiss_det(m(&[&[0, 1], &[1, 0]])), BigInt::from(-1));
        assert_eq!(
            bareiss_det(m(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]])),
            BigInt::from(-3)
        );
        assert_eq!(bareiss_det(m(&[&[1, 2], &[2, 4]])), BigInt::zero());
    }

    #[test]
    fn ranks() {
        assert_eq!(bigint_rank(m(&[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]])), 2);
        assert_eq!(bigint_rank(m(&[&[0, 0], &[0, 0]])), 0);
        assert_eq!(bigint_rank(m(&[&[0, 1, 2], &[1, 0, 0], &[1, 1, 2]])), 2);
    }

    #[test]
    fn null_vectors() {
        let a = m(&[&[1, 0, -1], &[0, 1, -1]]);
        let v = exact_null_vector(&a).unwrap();
        assert_eq!(v, vec![BigInt::from(1); 3]);
        assert_eq!(
            exact_null_vector(&m(&[&[1, 1, 1], &[2, 2, 2]])),
            Err(Error::NoUniqueConic)
        );
    }

    #[test]
    fn float_null() {
        let rows = [
            [1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
            [0.0, 1.0, 0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0, -1.0],
            [0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 1.0, 0.0],
        ];
        let (v, s) = float_null_vector(&rows);
        let scale = v[0];
        assert!((v[5] - scale).abs() < 1e-12 && (v[2] - scale).abs() < 1e-12);
        assert!(s[5] < 1e-12 && s[4] > 0.1);
    }
}
