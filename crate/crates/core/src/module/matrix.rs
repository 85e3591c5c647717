//! Dense matrices over the Laurent ring.

use num::One;

use crate::rational::Q;
use crate::valued::{Axis, LaurentElement, ValuationConfig, ValuationValue};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    nu: usize,
    nt: usize,
    data: Vec<LaurentElement>,
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize, nu: usize, nt: usize) -> Self {
        Matrix { rows, cols, nu, nt, data: vec![LaurentElement::zero(nu, nt); rows * cols] }
    }

    pub fn identity(n: usize, nu: usize, nt: usize) -> Self {
        let mut m = Self::zero(n, n, nu, nt);
        for i in 0..n {
            m.set(i, i, LaurentElement::one(nu, nt));
        }
        m
    }

    pub fn from_rows(nu: usize, nt: usize, rows: Vec<Vec<LaurentElement>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        Matrix { rows: r, cols: c, nu, nt, data }
    }

    /// Column matrix.
    pub fn column(nu: usize, nt: usize, v: Vec<LaurentElement>) -> Self {
        let rows = v.len();
        Matrix { rows, cols: 1, nu, nt, data: v }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn ring(&self) -> (usize, usize) {
        (self.nu, self.nt)
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: LaurentElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> impl Iterator<Item = &LaurentElement> {
        self.data.iter()
    }

    pub fn row(&self, i: usize) -> Vec<LaurentElement> {
        (0..self.cols).map(|j| self.get(i, j).clone()).collect()
    }

    pub fn col(&self, j: usize) -> Vec<LaurentElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<LaurentElement>> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(LaurentElement::is_zero)
    }

    pub fn map(&self, f: impl Fn(&LaurentElement) -> LaurentElement) -> Self {
        let data: Vec<LaurentElement> = self.data.iter().map(f).collect();
        let (nu, nt) = data.first().map_or((self.nu, self.nt), |x| (x.nu(), x.nt()));
        Matrix { rows: self.rows, cols: self.cols, nu, nt, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(self.rows == other.rows && self.cols == other.cols, "shape mismatch");
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a.add(b)).collect();
        Matrix { data, ..self.clone() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map(LaurentElement::neg)
    }

    pub fn scale(&self, c: &LaurentElement) -> Self {
        self.map(|x| x.mul(c))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let mut out = Self::zero(self.rows, other.cols, self.nu, self.nt);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let cur = out.get(i, j).add(&a.mul(b));
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[LaurentElement]) -> Vec<LaurentElement> {
        self.mul(&Matrix::column(self.nu, self.nt, v.to_vec())).data
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows, self.nu, self.nt);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn derive(&self, axis: Axis) -> Self {
        self.map(|x| x.derive(axis))
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.rows * other.rows, self.cols * other.cols, self.nu, self.nt);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a.mul(other.get(k, l)));
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal sum.
    pub fn block_diag(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.rows + other.rows, self.cols + other.cols, self.nu, self.nt);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out.set(self.rows + i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Submatrix on the given row and column indices.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zero(rows.len(), cols.len(), self.nu, self.nt);
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                out.set(a, b, self.get(i, j).clone());
            }
        }
        out
    }

    /// Least entry valuation at `r` (+∞ for the zero matrix).
    pub fn valuation(&self, cfg: &ValuationConfig, r: &[Q]) -> ValuationValue {
        self.data.iter().map(|x| x.valuation_unchecked(cfg, r)).min().unwrap_or(ValuationValue::Infinite)
    }

    pub fn prune(&self, cfg: &ValuationConfig, r: &[Q], bound: &Q) -> Self {
        self.map(|x| x.prune(cfg, r, bound))
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> LaurentElement {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return LaurentElement::one(self.nu, self.nt);
        }
        let mut a = self.to_rows();
        let mut sign = Q::one();
        let mut prev = LaurentElement::one(self.nu, self.nt);
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return LaurentElement::zero(self.nu, self.nt),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[i][j].mul(&a[k][k]).sub(&a[i][k].mul(&a[k][j]));
                    a[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
                }
                a[i][k] = LaurentElement::zero(self.nu, self.nt);
            }
            prev = a[k][k].clone();
        }
        a[n - 1][n - 1].scale(&sign)
    }

    /// Adjugate: `self · adj(self) = det(self) · I`.
    pub fn adjugate(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zero(n, n, self.nu, self.nt);
        if n == 1 {
            out.set(0, 0, LaurentElement::one(self.nu, self.nt));
            return out;
        }
        for i in 0..n {
            for j in 0..n {
                let rows: Vec<usize> = (0..n).filter(|&x| x != j).collect();
                let cols: Vec<usize> = (0..n).filter(|&x| x != i).collect();
                let minor = self.select(&rows, &cols).det();
                let c = if (i + j) % 2 == 0 { minor } else { minor.neg() };
                out.set(i, j, c);
            }
        }
        out
    }

    /// Indices grouped into blocks such that the matrices are simultaneously
    /// block diagonal (connected components of the nonzero pattern).
    pub fn common_blocks(ms: &[&Matrix], n: usize) -> Vec<Vec<usize>> {
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut x = x;
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for m in ms {
            for i in 0..n {
                for j in 0..n {
                    if !m.get(i, j).is_zero() {
                        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                        if a != b {
                            parent[a.max(b)] = a.min(b);
                        }
                    }
                }
            }
        }
        let mut blocks: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            match root_of[r] {
                Some(b) => blocks[b].push(i),
                None => {
                    root_of[r] = Some(blocks.len());
                    blocks.push(vec![i]);
                }
            }
        }
        blocks
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn c(x: i64) -> LaurentElement {
        LaurentElement::constant(0, 1, q(x))
    }

    fn t(e: i64) -> LaurentElement {
        LaurentElement::monomial(0, 1, q(1), &[], &[e])
    }

    #[test]
    fn determinant_and_adjugate() {
        let m = Matrix::from_rows(0, 1, vec![vec![t(1), c(2), c(0)], vec![c(1), t(-1), c(3)], vec![c(0), c(1), t(2)]]);
        let d = m.det();
        // t·(t^{-1}·t^2 − 3) − 2·(t^2) = t^2 − 3t − 2t^2 = −t^2 − 3t
        assert_eq!(d, t(2).neg().sub(&t(1).scale(&q(3))));
        let prod = m.mul(&m.adjugate());
        assert_eq!(prod, Matrix::identity(3, 0, 1).scale(&d));
    }

    #[test]
    fn zero_pivot_swaps() {
        let m = Matrix::from_rows(0, 1, vec![vec![c(0), c(1)], vec![c(1), c(0)]]);
        assert_eq!(m.det(), c(-1));
    }

    #[test]
    fn blocks_of_diagonal_pattern() {
        let m = Matrix::from_rows(0, 1, vec![vec![c(1), c(0), c(0)], vec![c(0), c(0), c(2)], vec![c(0), c(1), c(0)]]);
        assert_eq!(Matrix::common_blocks(&[&m], 3), vec![vec![0], vec![1, 2]]);
    }
}
