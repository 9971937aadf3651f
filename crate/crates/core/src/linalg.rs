//! Dense Gaussian elimination over any [`Scalar`].

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Solves `a · x = b` in place. `a` is row-major, `n × n`.
///
/// Pivots on the entry of largest magnitude; exact rationals do not need it
/// but it keeps the float path stable and costs nothing in correctness.
pub fn solve<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Result<Vec<S>> {
    let n = b.len();
    if a.len() != n {
        return Err(Error::LengthMismatch { left: a.len(), right: n });
    }
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(Error::LengthMismatch { left: row.len(), right: n });
    }
    let singular_floor = if S::is_exact() { S::zero() } else { S::from_ratio(1, 1_000_000_000_000) };

    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= singular_floor {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);

        let inv = S::one() / a[col][col].clone();
        for k in col..n {
            a[col][k] = a[col][k].clone() * inv.clone();
        }
        b[col] = b[col].clone() * inv;

        let (head, tail) = a.split_at_mut(col + 1);
        let pivot_row = &head[col];
        for (offset, row) in tail.iter_mut().enumerate() {
            let factor = row[col].clone();
            if factor.is_zero() {
                continue;
            }
            for k in col..n {
                if !pivot_row[k].is_zero() {
                    row[k] = row[k].clone() - factor.clone() * pivot_row[k].clone();
                }
            }
            let r = col + 1 + offset;
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }

    let mut x = vec![S::zero(); n];
    for i in (0..n).rev() {
        let mut acc = b[i].clone();
        for k in i + 1..n {
            if !a[i][k].is_zero() {
                acc = acc - a[i][k].clone() * x[k].clone();
            }
        }
        x[i] = acc;
    }
    Ok(x)
}

/// Inverse by Gauss-Jordan elimination with the same pivoting as [`solve`].
pub fn invert<S: Scalar>(mut a: Vec<Vec<S>>) -> Result<Vec<Vec<S>>> {
    let n = a.len();
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(Error::LengthMismatch { left: row.len(), right: n });
    }
    let singular_floor = if S::is_exact() { S::zero() } else { S::from_ratio(1, 1_000_000_000_000) };
    let mut inv: Vec<Vec<S>> = (0..n).map(|i| (0..n).map(|j| if i == j { S::one() } else { S::zero() }).collect()).collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= singular_floor {
            return Err(Error::SingularSystem);
        }
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let scale = S::one() / a[col][col].clone();
        for k in 0..n {
            a[col][k] = a[col][k].clone() * scale.clone();
            inv[col][k] = inv[col][k].clone() * scale.clone();
        }
        let (pa, pi) = (a[col].clone(), inv[col].clone());
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for k in 0..n {
                if !pa[k].is_zero() {
                    a[r][k] = a[r][k].clone() - factor.clone() * pa[k].clone();
                }
                if !pi[k].is_zero() {
                    inv[r][k] = inv[r][k].clone() - factor.clone() * pi[k].clone();
                }
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rational, Rational};

    #[test]
    fn solves_small_rational_system() {
        // 2x + y = 3, x + 3y = 5  =>  x = 4/5, y = 7/5
        let a = vec![vec![rational(2, 1), rational(1, 1)], vec![rational(1, 1), rational(3, 1)]];
        let b = vec![rational(3, 1), rational(5, 1)];
        let x = solve(a, b).unwrap();
        assert_eq!(x, vec![rational(4, 5), rational(7, 5)]);
    }

    #[test]
    fn needs_pivoting() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let x = solve(a, vec![2.0, 3.0]).unwrap();
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = vec![vec![rational(1, 1), rational(2, 1)], vec![rational(2, 1), rational(4, 1)]];
        let err = solve::<Rational>(a, vec![rational(1, 1), rational(2, 1)]).unwrap_err();
        assert_eq!(err, Error::SingularSystem);
    }

    #[test]
    fn inverse_times_matrix_is_identity() {
        let a = vec![
            vec![rational(2, 1), rational(1, 1), rational(0, 1)],
            vec![rational(1, 3), rational(0, 1), rational(5, 1)],
            vec![rational(0, 1), rational(4, 1), rational(1, 2)],
        ];
        let inv = invert(a.clone()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let dot: Rational = (0..3).map(|k| a[i][k].clone() * inv[k][j].clone()).sum();
                assert_eq!(dot, rational((i == j) as i64, 1));
            }
        }
        assert_eq!(invert(vec![vec![1.0, 2.0], vec![2.0, 4.0]]), Err(Error::SingularSystem));
    }

    #[test]
    fn shape_mismatch() {
        let a = vec![vec![1.0, 2.0]];
        assert!(matches!(solve(a, vec![1.0, 2.0]), Err(Error::LengthMismatch { .. })));
    }
}
