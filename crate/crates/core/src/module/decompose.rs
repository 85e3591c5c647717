//! Splitting a module at a fiber by its visible radii.
//!
//! With a cyclic vector `v` the module is `K{T}/K{T}P`. A factorization
//! `P = A·B` makes the left multiples of `B` a submodule isomorphic to
//! `K{T}/K{T}A`, spanned by `T^k B` for `k < deg A`. Factoring `P` directly
//! gives the high-slope part; factoring the adjoint gives the low-slope part.

use num::{Signed, Zero};

use super::radii::{RadiiKind, RadiiMultiset, RadiusEntry};
use super::{cyclic_vector, DiffModule, Matrix};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, q, Q};
use crate::twisted::{paper_slope, robba_factor, TwistedPoly};
use crate::valued::{Axis, LaurentElement, ValuationConfig, ValuationValue};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberPart {
    /// Extrinsic radii carried by this summand.
    pub radii: RadiiMultiset,
    pub projector: Matrix,
    /// `v_r(Π² − Π)`.
    pub idempotent_residual: ValuationValue,
    /// `v_r(∂Π + NΠ − ΠN)`.
    pub horizontal_residual: ValuationValue,
}

const ATTEMPTS: usize = 5;

/// Parts are ordered from smallest radius (largest value) to the capped remainder.
pub fn decompose_fiber(m: &DiffModule, axis: Axis, r: &[Q], precision: &Q) -> Result<Vec<FiberPart>> {
    let cfg = m.config();
    cfg.check_radius(r)?;
    let d = m.rank();
    let cv = cyclic_vector(m, axis)?;
    let np = cv.charpoly.newton_polygon(cfg, r)?;
    let weight = cfg.axis_weight(axis, r);
    let omega = cfg.omega();

    // visible groups in increasing paper slope, each with a split just above it
    let mut groups: Vec<(Q, usize, Q)> = Vec::new();
    let mut sigmas: Vec<(Q, usize)> = np.slopes.clone();
    sigmas.sort_by(|a, b| b.0.cmp(&a.0));
    let mut visible = 0;
    for (i, (s, len)) in sigmas.iter().enumerate() {
        if s <= &weight {
            break;
        }
        let here = paper_slope(s);
        let split = match sigmas.get(i + 1) {
            Some((next, _)) => (&here + paper_slope(next)) / q(2),
            None => &here + q(1),
        };
        groups.push((s.clone(), *len, split));
        visible += len;
    }
    let capped = d - visible;
    let n_parts = groups.len() + usize::from(capped > 0);
    if n_parts < 2 {
        return Err(Error::NoVisibleGap);
    }
    let mut radii: Vec<RadiiMultiset> = groups
        .iter()
        .map(|(s, len, _)| {
            RadiiMultiset::new(
                RadiiKind::Extrinsic,
                vec![RadiusEntry { value: &omega + s, multiplicity: *len, capped: false }],
            )
        })
        .collect();
    if capped > 0 {
        radii.push(RadiiMultiset::new(
            RadiiKind::Extrinsic,
            vec![RadiusEntry { value: &omega + &weight, multiplicity: capped, capped: true }],
        ));
    }
    let splits: Vec<Q> = groups.iter().take(n_parts - 1).map(|g| g.2.clone()).collect();

    let n = m.matrix(axis)?;
    let (nu, nt) = (cfg.m_base(), cfg.n_geom);
    let mut extra = q(8);
    let mut best = ValuationValue::Finite(Q::from_integer((-1_000_000).into()));
    for _ in 0..ATTEMPTS {
        let work = precision + &extra;
        extra = &extra * q(2);
        let attempt = (|| -> Result<Vec<Matrix>> {
            let det_inv = cv.det.truncated_inverse(cfg, r, &(&work + q(2) * value_or_zero(&cv.det, cfg, r).abs()))?;
            let p = cv.charpoly.map_coeffs(|c| c.mul(&det_inv).prune(cfg, r, &work));
            let p = TwistedPoly::new(p.twist(), nu, nt, monic_top(p.coeffs()));
            splits.iter().map(|s| low_projector(&p, &cv.wronskian, cfg, r, s, &work)).collect()
        })();
        let lows = match attempt {
            Ok(l) => l,
            Err(Error::NoConvergence { .. }) => continue,
            Err(e) => return Err(e),
        };
        let mut projs = Vec::with_capacity(n_parts);
        let mut prev = Matrix::zero(d, d, nu, nt);
        for low in &lows {
            projs.push(low.sub(&prev));
            prev = low.clone();
        }
        projs.push(Matrix::identity(d, nu, nt).sub(&prev));
        let parts: Vec<FiberPart> = projs
            .into_iter()
            .zip(radii.iter())
            .map(|(pi, rad)| {
                let pi = pi.prune(cfg, r, &work);
                let idem = pi.mul(&pi).sub(&pi).valuation(cfg, r);
                let horiz = pi.derive(axis).add(&n.mul(&pi)).sub(&pi.mul(n)).valuation(cfg, r);
                FiberPart { radii: rad.clone(), projector: pi, idempotent_residual: idem, horizontal_residual: horiz }
            })
            .collect();
        let worst =
            parts.iter().map(|p| p.idempotent_residual.clone().min(p.horizontal_residual.clone())).min().unwrap();
        if worst.at_least(precision) {
            return Ok(parts);
        }
        if worst > best {
            best = worst;
        }
    }
    Err(Error::NoConvergence { precision: fmt_q(precision), best: best.to_string() })
}

fn value_or_zero(x: &LaurentElement, cfg: &ValuationConfig, r: &[Q]) -> Q {
    x.valuation_unchecked(cfg, r).finite().cloned().unwrap_or_else(Q::zero)
}

/// The top coefficient of a det-normalized charpoly is `1` up to truncation.
fn monic_top(coeffs: &[LaurentElement]) -> Vec<LaurentElement> {
    let mut out = coeffs.to_vec();
    if let Some(last) = out.last_mut() {
        *last = LaurentElement::one(last.nu(), last.nt());
    }
    out
}

fn coefficient_column(p: &TwistedPoly, d: usize) -> Vec<LaurentElement> {
    (0..d).map(|i| p.coeff(i)).collect()
}

/// Projector onto the submodule with paper slopes below `split`, along the rest.
fn low_projector(
    p: &TwistedPoly,
    wronskian: &Matrix,
    cfg: &ValuationConfig,
    r: &[Q],
    split: &Q,
    work: &Q,
) -> Result<Matrix> {
    let d = p.degree().unwrap();
    let (nu, nt) = wronskian.ring();
    let twist = p.twist();

    // high part: P = H·L, spanned by T^k L for k < deg H
    let direct = robba_factor(p, cfg, r, split, work)?;
    let m_high = direct.high.degree().unwrap();
    // low part: P* = H₂·L₂, so P = ±L₂*·H₂*, spanned by T^k H₂* for k < deg L₂*
    let sign = if d.is_multiple_of(2) { q(1) } else { q(-1) };
    let adj = p.adjoint().map_coeffs(|c| c.scale(&sign));
    let mirrored = robba_factor(&adj, cfg, r, split, work)?;
    let right_low = mirrored.high.adjoint();
    let n_low = d - m_high;

    let mut cols: Vec<Vec<LaurentElement>> = Vec::with_capacity(d);
    for k in 0..n_low {
        let tk = TwistedPoly::t_power(twist, nu, nt, k);
        cols.push(coefficient_column(&tk.mul(&right_low)?, d));
    }
    for k in 0..m_high {
        let tk = TwistedPoly::t_power(twist, nu, nt, k);
        cols.push(coefficient_column(&tk.mul(&direct.low)?, d));
    }
    let b = Matrix::from_rows(nu, nt, cols).transpose();
    let c = wronskian.mul(&b);
    let det = c.det();
    if det.is_zero() {
        return Err(Error::Degenerate("factor spans are not complementary".into()));
    }
    let v_det = value_or_zero(&det, cfg, r);
    let v_c = c.valuation(cfg, r).finite().cloned().unwrap_or_else(Q::zero);
    let rel = work + q(2) * (v_det.abs() + v_c.abs() * q(d as i64));
    let det_inv = det.truncated_inverse(cfg, r, &rel)?;
    let mut diag = Matrix::zero(d, d, nu, nt);
    for i in 0..n_low {
        diag.set(i, i, LaurentElement::one(nu, nt));
    }
    let bound = work + q(2) * v_det.abs();
    Ok(c.mul(&diag).mul(&c.adjugate()).scale(&det_inv).prune(cfg, r, &bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valued::ValuationConfig;

    const T1: Axis = Axis::Geom(0);

    fn diag(cfg: &ValuationConfig, entries: Vec<LaurentElement>) -> DiffModule {
        let d = entries.len();
        let mut n = Matrix::zero(d, d, cfg.m_base(), cfg.n_geom);
        for (i, e) in entries.into_iter().enumerate() {
            n.set(i, i, e);
        }
        DiffModule::new(cfg.clone(), d, [(T1, n)].into()).unwrap()
    }

    fn block(d: usize, idx: &[usize]) -> Matrix {
        let mut e = Matrix::zero(d, d, 0, 1);
        for &i in idx {
            e.set(i, i, LaurentElement::one(0, 1));
        }
        e
    }

    #[test]
    fn direct_sum_of_two_rank_one() {
        let cfg = ValuationConfig::geometric(2);
        let m =
            diag(&cfg, vec![LaurentElement::t_power(&cfg, q(1), 0, -2), LaurentElement::t_power(&cfg, q(1), 0, -3)]);
        let prec = q(12);
        let parts = decompose_fiber(&m, T1, &[q(1)], &prec).unwrap();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].radii.entries()[0].value, q(4));
        assert_eq!(parts[1].radii.entries()[0].value, q(3));
        let exact = [block(2, &[1]), block(2, &[0])];
        for (part, e) in parts.iter().zip(&exact) {
            assert!(part.idempotent_residual.at_least(&prec));
            assert!(part.horizontal_residual.at_least(&prec));
            assert!(part.projector.sub(e).valuation(&cfg, &[q(1)]).at_least(&prec));
        }
    }

    #[test]
    fn pure_radii_has_no_gap() {
        let cfg = ValuationConfig::geometric(2);
        let c = LaurentElement::t_power(&cfg, q(1), 0, -2);
        let m = diag(&cfg, vec![c.clone(), c]);
        assert_eq!(decompose_fiber(&m, T1, &[q(1)], &q(8)), Err(Error::NoVisibleGap));
    }

    #[test]
    fn visible_against_capped() {
        let cfg = ValuationConfig::geometric(2);
        let m = diag(&cfg, vec![LaurentElement::zero_for(&cfg), LaurentElement::t_power(&cfg, q(1), 0, -2)]);
        let prec = q(10);
        let parts = decompose_fiber(&m, T1, &[q(1)], &prec).unwrap();
        assert_eq!(parts.len(), 2);
        assert!(parts[1].radii.has_capped());
        assert!(parts[0].projector.sub(&block(2, &[1])).valuation(&cfg, &[q(1)]).at_least(&prec));
    }

    #[test]
    fn three_parts_nest() {
        let cfg = ValuationConfig::geometric(2);
        let m = diag(
            &cfg,
            vec![
                LaurentElement::t_power(&cfg, q(1), 0, -3),
                LaurentElement::zero_for(&cfg),
                LaurentElement::t_power(&cfg, q(1), 0, -2),
            ],
        );
        let prec = q(10);
        let parts = decompose_fiber(&m, T1, &[q(1)], &prec).unwrap();
        let exact = [block(3, &[0]), block(3, &[2]), block(3, &[1])];
        for (part, e) in parts.iter().zip(&exact) {
            assert!(part.projector.sub(e).valuation(&cfg, &[q(1)]).at_least(&prec));
        }
    }
}
