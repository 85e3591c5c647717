//! Exact rational linear algebra for small polytopes.

use num::{Signed, Zero};

use crate::rational::{q, Q};

/// Unique solution of a square system, if any.
pub(crate) fn solve(a: &[Vec<Q>], b: &[Q]) -> Option<Vec<Q>> {
    let n = a.len();
    let mut m: Vec<Vec<Q>> =
        a.iter().zip(b).map(|(row, bi)| row.iter().cloned().chain([bi.clone()]).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in col..=n {
                    let d = &f * &m[col][c];
                    m[r][c] -= d;
                }
            }
        }
    }
    Some(m.into_iter().map(|row| row[n].clone()).collect())
}

fn for_each_subset(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Vertices of `{x : a·x + b ≥ 0}` by exhaustive choice of `dim` tight rows,
/// sorted and deduplicated.
pub(crate) fn vertices(dim: usize, rows: &[(Vec<Q>, Q)]) -> Vec<Vec<Q>> {
    let mut out: Vec<Vec<Q>> = Vec::new();
    if dim == 0 {
        return out;
    }
    for_each_subset(rows.len(), dim, &mut |idx| {
        let a: Vec<Vec<Q>> = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let b: Vec<Q> = idx.iter().map(|&i| -rows[i].1.clone()).collect();
        if let Some(x) = solve(&a, &b) {
            let feasible = rows.iter().all(|(a, c)| {
                let v: Q = a.iter().zip(&x).map(|(ai, xi)| ai * xi).sum::<Q>() + c;
                !v.is_negative()
            });
            if feasible {
                out.push(x);
            }
        }
    });
    out.sort();
    out.dedup();
    out
}

pub(crate) fn centroid(pts: &[Vec<Q>]) -> Vec<Q> {
    let n = pts[0].len();
    let k = q(pts.len() as i64);
    (0..n).map(|i| pts.iter().map(|p| p[i].clone()).sum::<Q>() / &k).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    #[test]
    fn solve_two_by_two() {
        let a = vec![vec![q(1), q(1)], vec![q(1), q(-1)]];
        assert_eq!(solve(&a, &[q(3), q(1)]), Some(vec![q(2), q(1)]));
        assert_eq!(solve(&[vec![q(1), q(1)], vec![q(2), q(2)]], &[q(1), q(2)]), None);
    }

    #[test]
    fn square_vertices() {
        let rows = vec![
            (vec![q(1), q(0)], q(0)),
            (vec![q(-1), q(0)], q(1)),
            (vec![q(0), q(1)], q(0)),
            (vec![q(0), q(-1)], q(1)),
        ];
        let v = vertices(2, &rows);
        assert_eq!(v.len(), 4);
        assert_eq!(centroid(&v), vec![qf(1, 2), qf(1, 2)]);
    }
}
