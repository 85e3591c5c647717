//! Cyclic vectors and the annihilating twisted polynomial.

use super::{DiffModule, Matrix};
use crate::error::{Error, Result};
use crate::rational::q;
use crate::twisted::TwistedPoly;
use crate::valued::{Axis, LaurentElement};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicVector {
    pub vector: Vec<LaurentElement>,
    /// Columns `v, ∇v, …, ∇^{d−1}v`.
    pub wronskian: Matrix,
    /// `det` of the Wronskian; nonzero certifies cyclicity.
    pub det: LaurentElement,
    /// `det·T^d − Σ det_i·T^i`, annihilating `v`; `det^{-1}` times it is monic.
    pub charpoly: TwistedPoly,
}

impl CyclicVector {
    /// Monic when the determinant is a constant.
    pub fn monic_charpoly(&self) -> Option<TwistedPoly> {
        let c = self.det.as_constant()?;
        let inv = LaurentElement::constant(self.det.nu(), self.det.nt(), c.recip());
        Some(self.charpoly.scale_left(&inv))
    }
}

/// Deterministic candidate list: `e_1`; `e_1 + x^k e_i`; `Σ_i x^{k(i−1)} e_i`.
fn candidates(m: &DiffModule, rounds: usize) -> Vec<Vec<LaurentElement>> {
    let cfg = m.config();
    let (nu, nt) = (cfg.m_base(), cfg.n_geom);
    let d = m.rank();
    let x_pow = |k: i64| -> LaurentElement {
        if nt > 0 {
            LaurentElement::t_power(cfg, q(1), 0, k)
        } else if nu > 0 {
            LaurentElement::u_power(cfg, q(1), 0, k)
        } else {
            LaurentElement::constant(nu, nt, q(2).pow(k as i32))
        }
    };
    let zero = LaurentElement::zero(nu, nt);
    let unit = |i: usize| -> Vec<LaurentElement> {
        (0..d).map(|j| if i == j { LaurentElement::one(nu, nt) } else { zero.clone() }).collect()
    };
    let mut out = vec![unit(0)];
    for k in 0..rounds as i64 {
        for i in 1..d {
            let mut v = unit(0);
            v[i] = x_pow(k);
            out.push(v);
        }
    }
    for k in 0..rounds as i64 {
        out.push((0..d).map(|i| x_pow(k * i as i64)).collect());
    }
    out
}

fn iterates(m: &DiffModule, axis: Axis, v: &[LaurentElement], count: usize) -> Result<Vec<Vec<LaurentElement>>> {
    let mut out = vec![v.to_vec()];
    for _ in 1..count {
        let next = m.apply_connection(axis, out.last().unwrap())?;
        out.push(next);
    }
    Ok(out)
}

pub fn cyclic_vector(m: &DiffModule, axis: Axis) -> Result<CyclicVector> {
    m.matrix(axis)?;
    let cfg = m.config();
    let (nu, nt) = (cfg.m_base(), cfg.n_geom);
    let d = m.rank();
    let cands = candidates(m, 2 * d + 4);
    let tried = cands.len();
    for v in cands {
        let its = iterates(m, axis, &v, d + 1)?;
        let cols: Vec<Vec<LaurentElement>> = its[..d].to_vec();
        let w = Matrix::from_rows(nu, nt, cols.clone()).transpose();
        let det = w.det();
        if det.is_zero() {
            continue;
        }
        // Cramer: ∇^d v = Σ (det_i/det) ∇^i v
        let mut coeffs = Vec::with_capacity(d + 1);
        for i in 0..d {
            let mut ci = cols.clone();
            ci[i] = its[d].clone();
            let di = Matrix::from_rows(nu, nt, ci).transpose().det();
            coeffs.push(di.neg());
        }
        coeffs.push(det.clone());
        let charpoly = TwistedPoly::new(Some(axis), nu, nt, coeffs);
        return Ok(CyclicVector { vector: v, wronskian: w, det, charpoly });
    }
    Err(Error::CyclicVectorSearch { tried })
}

/// Evaluates `P(∇)·v` (should vanish for the charpoly of `v`).
pub fn apply_operator(m: &DiffModule, p: &TwistedPoly, v: &[LaurentElement]) -> Result<Vec<LaurentElement>> {
    let axis = p.twist().ok_or(Error::DerivationMismatch)?;
    let its = iterates(m, axis, v, p.coeffs().len().max(1))?;
    let cfg = m.config();
    let mut acc = vec![LaurentElement::zero(cfg.m_base(), cfg.n_geom); m.rank()];
    for (c, w) in p.coeffs().iter().zip(its) {
        for (a, x) in acc.iter_mut().zip(w) {
            *a = a.add(&c.mul(&x));
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Q;
    use crate::valued::ValuationConfig;

    const T1: Axis = Axis::Geom(0);

    fn cfg() -> ValuationConfig {
        ValuationConfig::geometric(2)
    }

    fn t(c: i64, e: i64) -> LaurentElement {
        LaurentElement::t_power(&cfg(), Q::from_integer(c.into()), 0, e)
    }

    #[test]
    fn rank_one() {
        let m = DiffModule::rank_one(cfg(), &[(T1, t(1, -2))]).unwrap();
        let cv = cyclic_vector(&m, T1).unwrap();
        assert_eq!(cv.vector, vec![t(1, 0)]);
        let expect = TwistedPoly::from_coeffs(Some(T1), &cfg(), vec![t(-1, -2), t(1, 0)]);
        assert_eq!(cv.monic_charpoly().unwrap(), expect);
    }

    #[test]
    fn diagonal_needs_mixed_vector() {
        let z = LaurentElement::zero(0, 1);
        let n = Matrix::from_rows(0, 1, vec![vec![z.clone(), z.clone()], vec![z.clone(), t(1, -1)]]);
        let m = DiffModule::new(cfg(), 2, [(T1, n)].into()).unwrap();
        let cv = cyclic_vector(&m, T1).unwrap();
        assert_eq!(cv.vector, vec![t(1, 0), t(1, 0)]);
        assert!(!cv.det.is_zero());
        let res = apply_operator(&m, &cv.charpoly, &cv.vector).unwrap();
        assert!(res.iter().all(LaurentElement::is_zero));
    }

    #[test]
    fn companion_round_trip() {
        // companion matrix of T^2 − t: ∇e1 = e2, ∇e2 = t e1
        let z = LaurentElement::zero(0, 1);
        let n = Matrix::from_rows(0, 1, vec![vec![z.clone(), t(1, 1)], vec![t(1, 0), z]]);
        let m = DiffModule::new(cfg(), 2, [(T1, n)].into()).unwrap();
        let cv = cyclic_vector(&m, T1).unwrap();
        assert_eq!(cv.vector[0], t(1, 0));
        let expect = TwistedPoly::from_coeffs(Some(T1), &cfg(), vec![t(-1, 1), LaurentElement::zero(0, 1), t(1, 0)]);
        assert_eq!(cv.monic_charpoly().unwrap(), expect);
    }

    #[test]
    fn rank_three_diagonal() {
        let z = LaurentElement::zero(0, 1);
        let n = Matrix::from_rows(
            0,
            1,
            vec![
                vec![t(1, -2), z.clone(), z.clone()],
                vec![z.clone(), t(1, -3), z.clone()],
                vec![z.clone(), z.clone(), t(3, -2)],
            ],
        );
        let m = DiffModule::new(cfg(), 3, [(T1, n)].into()).unwrap();
        let cv = cyclic_vector(&m, T1).unwrap();
        let res = apply_operator(&m, &cv.charpoly, &cv.vector).unwrap();
        assert!(res.iter().all(LaurentElement::is_zero));
    }
}
