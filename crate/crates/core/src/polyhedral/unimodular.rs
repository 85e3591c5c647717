//! Unimodular integer matrices and the monomial change of variables
//! `t_j = Π_i s_i^{A_ij}`.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::gcd_vec;
use super::linalg::solve;
use crate::error::{Error, Result};
use crate::module::{DiffModule, Matrix};
use crate::rational::{fmt_q, q, Q};
use crate::valued::{Axis, LaurentElement};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct UnimodularMatrix {
    rows: Vec<Vec<i64>>,
}

impl TryFrom<Vec<Vec<i64>>> for UnimodularMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<UnimodularMatrix> for Vec<Vec<i64>> {
    fn from(m: UnimodularMatrix) -> Self {
        m.rows
    }
}

fn det_q(rows: &[Vec<Q>]) -> Q {
    let n = rows.len();
    let mut m = rows.to_vec();
    let mut det = Q::one();
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return Q::zero();
        };
        if piv != col {
            m.swap(col, piv);
            det = -det;
        }
        det *= &m[col][col];
        for r in col + 1..n {
            let f = &m[r][col] / &m[col][col];
            for c in col..n {
                let d = &f * &m[col][c];
                m[r][c] -= d;
            }
        }
    }
    det
}

impl UnimodularMatrix {
    pub fn new(rows: Vec<Vec<i64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Invalid("empty matrix".into()));
        }
        for r in &rows {
            if r.len() != n {
                return Err(Error::Dimension { expected: n, got: r.len() });
            }
        }
        let d = det_q(&to_q(&rows));
        if d.abs() != Q::one() {
            return Err(Error::NotUnimodular(fmt_q(&d)));
        }
        Ok(UnimodularMatrix { rows })
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
        UnimodularMatrix { rows }
    }

    /// A unimodular matrix whose first row is the primitive vector `z`,
    /// built by Euclidean row operations in column-pivot order.
    pub fn complete(z: &[i64]) -> Result<Self> {
        if z.is_empty() || gcd_vec(z) != 1 {
            return Err(Error::NotPrimitive(z.to_vec()));
        }
        let n = z.len();
        let mut a = Self::identity(n).rows;
        // invariant: Σ_i c_i·row_i(a) = z
        let mut c = z.to_vec();
        for j in 1..n {
            while c[j] != 0 {
                let quo = c[0] / c[j];
                c[0] -= quo * c[j];
                for k in 0..n {
                    a[j][k] += quo * a[0][k];
                }
                c.swap(0, j);
                a.swap(0, j);
            }
        }
        if c[0] == -1 {
            for x in a[0].iter_mut() {
                *x = -*x;
            }
        }
        debug_assert_eq!(a[0], z);
        Self::new(a)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<i64>] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.rows[i][j]
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let n = self.dim();
        if other.dim() != n {
            return Err(Error::Dimension { expected: n, got: other.dim() });
        }
        let rows = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.rows[i][k] * other.rows[k][j]).sum()).collect())
            .collect();
        Ok(UnimodularMatrix { rows })
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim();
        UnimodularMatrix { rows: (0..n).map(|i| (0..n).map(|j| self.rows[j][i]).collect()).collect() }
    }

    /// `A·e` on an integer exponent vector.
    pub fn apply(&self, e: &[i64]) -> Vec<i64> {
        self.rows.iter().map(|r| r.iter().zip(e).map(|(a, b)| a * b).sum()).collect()
    }

    /// The fiber `r_t = Aᵀ r_s` of the pulled-back module over `r_s`.
    pub fn fiber(&self, r_s: &[Q]) -> Vec<Q> {
        let n = self.dim();
        (0..n).map(|j| (0..n).map(|i| q(self.rows[i][j]) * &r_s[i]).sum()).collect()
    }

    /// The `r_s` lying over `r_t`.
    pub fn fiber_preimage(&self, r_t: &[Q]) -> Vec<Q> {
        let at = to_q(&self.transpose().rows);
        solve(&at, r_t).expect("unimodular matrices are invertible")
    }
}

fn to_q(rows: &[Vec<i64>]) -> Vec<Vec<Q>> {
    rows.iter().map(|r| r.iter().map(|x| q(*x)).collect()).collect()
}

/// Pullback along `t_j = Π_i s_i^{A_ij}`: entries substituted and each
/// `∂_{s_k} = Σ_i A_ki (t_i/s_k) ∂_{t_i}` applied to the connection.
/// Every geometric derivation must be present.
pub fn toroidal_pullback(m: &DiffModule, a: &UnimodularMatrix) -> Result<DiffModule> {
    let cfg = m.config();
    let n = cfg.n_geom;
    if a.dim() != n {
        return Err(Error::Dimension { expected: n, got: a.dim() });
    }
    for i in 0..n {
        m.matrix(Axis::Geom(i))?;
    }
    let nu = cfg.m_base();
    let subst = |x: &LaurentElement| x.map_geometric(n, |e| a.apply(e));
    let pulled: BTreeMap<Axis, Matrix> = m.matrices().iter().map(|(ax, mat)| (*ax, mat.map(subst))).collect();
    let mut out = BTreeMap::new();
    for (ax, mat) in &pulled {
        if let Axis::Base(_) = ax {
            out.insert(*ax, mat.clone());
        }
    }
    for k in 0..n {
        let mut acc = Matrix::zero(m.rank(), m.rank(), nu, n);
        for i in 0..n {
            let coef = a.get(k, i);
            if coef == 0 {
                continue;
            }
            // t_i/s_k = s^{column i of A − e_k}
            let mut e: Vec<i64> = vec![0; nu];
            e.extend((0..n).map(|l| a.get(l, i) - i64::from(l == k)));
            let term = pulled[&Axis::Geom(i)].map(|x| x.mul_monomial(&q(coef), &e));
            acc = acc.add(&term);
        }
        out.insert(Axis::Geom(k), acc);
    }
    DiffModule::new(cfg.clone(), m.rank(), out)
}
