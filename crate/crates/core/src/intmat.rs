//! Integer matrices: kernel lattices and Smith invariants.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn from_i64(rows: &[Vec<i64>]) -> IntMatrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn col_swap(m: &mut IntMatrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// `col[dst] += k * col[src]`
fn col_axpy(m: &mut IntMatrix, dst: usize, src: usize, k: &BigInt) {
    for row in m.iter_mut() {
        let add = &row[src] * k;
        row[dst] += add;
    }
}

fn col_neg(m: &mut IntMatrix, c: usize) {
    for row in m.iter_mut() {
        row[c] = -std::mem::take(&mut row[c]);
    }
}

/// A basis of the integer lattice `{x in Z^ncols : A x = 0}`.
///
/// Column reduction of `A` with the same operations applied to an identity
/// matrix `U`; the columns of `U` past the pivot columns span the kernel and
/// form a saturated basis since `U` is unimodular.
pub fn kernel_basis(a: &IntMatrix, ncols: usize) -> Vec<Vec<BigInt>> {
    let mut m = a.clone();
    let mut u: IntMatrix =
        (0..ncols).map(|i| (0..ncols).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
    let mut pivot = 0;
    for r in 0..m.len() {
        if pivot >= ncols {
            break;
        }
        loop {
            // smallest nonzero entry in row r among columns >= pivot
            let best = (pivot..ncols).filter(|&c| !m[r][c].is_zero()).min_by_key(|&c| m[r][c].abs());
            let Some(best) = best else { break };
            col_swap(&mut m, pivot, best);
            col_swap(&mut u, pivot, best);
            let mut done = true;
            for c in pivot + 1..ncols {
                if m[r][c].is_zero() {
                    continue;
                }
                let q = -m[r][c].div_floor(&m[r][pivot]);
                col_axpy(&mut m, c, pivot, &q);
                col_axpy(&mut u, c, pivot, &q);
                if !m[r][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if (pivot..ncols).any(|c| !m[r][c].is_zero()) {
            if m[r][pivot].is_negative() {
                col_neg(&mut m, pivot);
                col_neg(&mut u, pivot);
            }
            pivot += 1;
        }
    }
    (pivot..ncols).map(|c| u.iter().map(|row| row[c].clone()).collect()).collect()
}

/// Nonzero invariant factors `d1 | d2 | ...` of the Smith normal form.
pub fn smith_invariants(a: &IntMatrix) -> Vec<BigInt> {
    let mut m = a.clone();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() && best.is_none_or(|(bi, bj)| m[i][j].abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        m.swap(t, bi);
        col_swap(&mut m, t, bj);
        loop {
            let p = m[t][t].clone();
            let mut clean = true;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&p);
                for j in t..cols {
                    let sub = &m[t][j] * &q;
                    m[i][j] -= sub;
                }
                if !m[i][t].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = -m[t][j].div_floor(&p);
                col_axpy(&mut m, j, t, &q);
                if !m[t][j].is_zero() {
                    clean = false;
                }
            }
            if clean {
                // divisibility: fold any entry not divisible by the pivot into row t
                let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&m[i][j] % &p).is_zero()));
                match bad {
                    Some(i) => {
                        for j in t..cols {
                            let add = m[i][j].clone();
                            m[t][j] += add;
                        }
                        continue;
                    }
                    None => break,
                }
            }
            // move the smallest remaining entry of row/column t to the pivot
            let mut best = (t, t);
            for i in t..rows {
                if !m[i][t].is_zero() && m[i][t].abs() < m[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !m[t][j].is_zero() && m[t][j].abs() < m[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            m.swap(t, best.0);
            col_swap(&mut m, t, best.1);
        }
        diag.push(m[t][t].abs());
        t += 1;
    }
    diag
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).fold(BigInt::zero(), |acc, k| acc + &row[k] * &b[k][j]))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_small_matrix() {
        let a = from_i64(&[vec![1, 2, 3], vec![2, 4, 6]]);
        let k = kernel_basis(&a, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            for row in &a {
                let dot: BigInt = row.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!(dot.is_zero());
            }
        }
    }

    #[test]
    fn smith_examples() {
        let a = from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(smith_invariants(&a), vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        let b = from_i64(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(smith_invariants(&b), vec![BigInt::one(), BigInt::one()]);
        let c = from_i64(&[vec![1, 1]]);
        assert_eq!(smith_invariants(&c), vec![BigInt::one()]);
        let z = from_i64(&[vec![0, 0]]);
        assert!(smith_invariants(&z).is_empty());
    }
}
