//! Exact rank, reduced row echelon form and nullspaces over the rationals.
//!
//! Rank computations run fraction-free over the integers: rows are cleared
//! of denominators, then eliminated with pivoting in column order (first
//! nonzero row wins, updated rows are divided by their gcd to keep entries
//! small). An i64 fast path covers the typical 0/±1 evaluation matrices and
//! falls back to BigInt arithmetic on any overflow, so results are always
//! exact.

use crate::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

/// Rank of an integer matrix given as rows. Tries i64, falls back to BigInt.
pub fn rank_i64_rows(rows: &[Vec<i64>]) -> usize {
    let mut work = rows.to_vec();
    match try_rank_i64(&mut work) {
        Some(r) => r,
        None => {
            let big: Vec<Vec<BigInt>> = rows
                .iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect();
            rank_bigint_rows(big)
        }
    }
}

/// Rank of a rational matrix given as rows.
pub fn rank_rat_rows(rows: &[Vec<Rat>]) -> usize {
    let cleared: Vec<Vec<BigInt>> = rows.iter().map(|r| clear_denominators(r)).collect();
    if let Some(small) = to_i64_matrix(&cleared) {
        if let Some(rank) = try_rank_i64(&mut small.clone()) {
            return rank;
        }
    }
    rank_bigint_rows(cleared)
}

fn clear_denominators(row: &[Rat]) -> Vec<BigInt> {
    let mut lcm = BigInt::one();
    for x in row {
        if !x.is_zero() {
            lcm = lcm.lcm(x.denom());
        }
    }
    row.iter()
        .map(|x| {
            if x.is_zero() {
                BigInt::zero()
            } else {
                x.numer() * (&lcm / x.denom())
            }
        })
        .collect()
}

fn to_i64_matrix(rows: &[Vec<BigInt>]) -> Option<Vec<Vec<i64>>> {
    rows.iter()
        .map(|r| {
            r.iter()
                .map(|x| i64::try_from(x).ok())
                .collect::<Option<Vec<i64>>>()
        })
        .collect()
}

/// Integer elimination with per-row gcd normalization. Returns None on
/// i64 overflow so the caller can redo the work in BigInt.
// Elimination touches the pivot row and the target row in one pass, so
// explicit column indices beat iterator chains here.
#[allow(clippy::needless_range_loop)]
fn try_rank_i64(m: &mut [Vec<i64>]) -> Option<usize> {
    let rows = m.len();
    if rows == 0 {
        return Some(0);
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| m[r][col] != 0) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col];
        for r in rank + 1..rows {
            let lead = m[r][col];
            if lead == 0 {
                continue;
            }
            let mut g: i64 = 0;
            for c in col..cols {
                let a = pivot.checked_mul(m[r][c])?;
                let b = lead.checked_mul(m[rank][c])?;
                let v = a.checked_sub(b)?;
                m[r][c] = v;
                g = gcd_i64(g, v);
            }
            if g > 1 {
                for c in col..cols {
                    m[r][c] /= g;
                }
            }
        }
        rank += 1;
    }
    Some(rank)
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[allow(clippy::needless_range_loop)]
fn rank_bigint_rows(mut m: Vec<Vec<BigInt>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in rank + 1..rows {
            if m[r][col].is_zero() {
                continue;
            }
            let lead = m[r][col].clone();
            let mut g = BigInt::zero();
            for c in col..cols {
                let v = &pivot * &m[r][c] - &lead * &m[rank][c];
                g = g.gcd(&v);
                m[r][c] = v;
            }
            if g > BigInt::one() {
                for c in col..cols {
                    m[r][c] /= &g;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// In-place Gauss-Jordan over the rationals; returns the pivot columns.
#[allow(clippy::needless_range_loop)]
pub fn rref_rat(m: &mut [Vec<Rat>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(rank, p);
        let inv = m[rank][col].recip();
        for c in col..cols {
            let v = &m[rank][c] * &inv;
            m[rank][c] = v;
        }
        for r in 0..rows {
            if r == rank || m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].clone();
            for c in col..cols {
                let v = &m[r][c] - &factor * &m[rank][c];
                m[r][c] = v;
            }
        }
        pivots.push(col);
        rank += 1;
    }
    pivots
}

/// Basis of `{ x : M x = 0 }` for a matrix with `ncols` columns.
pub fn nullspace_rat(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut m: Vec<Vec<Rat>> = rows.to_vec();
    let pivots = rref_rat(&mut m);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|c| !pivot_set.contains(c)) {
        let mut v = vec![Rat::zero(); ncols];
        v[free] = Rat::one();
        for (row, &pcol) in pivots.iter().enumerate() {
            v[pcol] = -m[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Does `v` lie in the row span of `basis`?
pub fn in_row_span(basis: &[Vec<Rat>], v: &[Rat]) -> bool {
    let r0 = rank_rat_rows(basis);
    let mut stacked = basis.to_vec();
    stacked.push(v.to_vec());
    rank_rat_rows(&stacked) == r0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn ratv(xs: &[i64]) -> Vec<Rat> {
        xs.iter().map(|&x| rat(x)).collect()
    }

    #[test]
    fn small_ranks() {
        assert_eq!(rank_i64_rows(&[vec![0, 0], vec![0, 0]]), 0);
        assert_eq!(rank_i64_rows(&[vec![1, 2], vec![2, 4]]), 1);
        assert_eq!(rank_i64_rows(&[vec![1, 2], vec![2, 5]]), 2);
        assert_eq!(
            rank_i64_rows(&[vec![0, 1, 0], vec![1, 0, 0], vec![1, 1, 0]]),
            2
        );
        assert_eq!(rank_i64_rows(&[]), 0);
    }

    #[test]
    fn overflow_falls_back_to_bigint() {
        let big = i64::MAX / 2;
        let rows = vec![vec![big, 1], vec![1, big]];
        assert_eq!(rank_i64_rows(&rows), 2);
        let rows = vec![vec![big, 1], vec![big, 1]];
        assert_eq!(rank_i64_rows(&rows), 1);
    }

    #[test]
    fn rational_rank_clears_denominators() {
        let half = Rat::new(1.into(), 2.into());
        let third = Rat::new(1.into(), 3.into());
        let rows = vec![
            vec![half.clone(), third.clone()],
            vec![half * rat(3), third * rat(3)],
        ];
        assert_eq!(rank_rat_rows(&rows), 1);
    }

    #[test]
    fn rref_pivots_and_nullspace() {
        let rows = vec![ratv(&[1, 1, 0]), ratv(&[0, 0, 1])];
        let ns = nullspace_rat(&rows, 3);
        assert_eq!(ns.len(), 1);
        assert_eq!(ns[0], vec![-rat(1), rat(1), rat(0)]);
        // Every nullspace vector really is killed by the matrix.
        for v in &ns {
            for row in &rows {
                let dot: Rat = row.iter().zip(v).map(|(a, b)| a * b).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn span_membership() {
        let basis = vec![ratv(&[1, 0, 1]), ratv(&[0, 1, 1])];
        assert!(in_row_span(&basis, &ratv(&[1, 1, 2])));
        assert!(!in_row_span(&basis, &ratv(&[0, 0, 1])));
    }

    #[test]
    fn rank_agrees_with_rref() {
        let rows = vec![
            ratv(&[2, 4, 1, 3]),
            ratv(&[0, 1, 1, 1]),
            ratv(&[2, 5, 2, 4]),
            ratv(&[1, 0, 0, 0]),
        ];
        let mut m = rows.clone();
        assert_eq!(rank_rat_rows(&rows), rref_rat(&mut m).len());
    }
}
