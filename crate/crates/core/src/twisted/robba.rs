//! Slope factorization at a fixed fiber by successive approximation.

use num::{Signed, Zero};

use super::{hull_slope, TwistedPoly};
use crate::error::{Error, Result};
use crate::rational::{fmt_q, q, Q};
use crate::valued::{LaurentElement, ValuationConfig, ValuationValue};

pub const DEFAULT_BUDGET: usize = 64;

/// `P ≈ high · low`, where `low` carries the paper slopes below the split.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobbaFactorization {
    pub low: TwistedPoly,
    pub high: TwistedPoly,
    /// Exact coefficientwise valuation of `P − high·low` at the fiber.
    pub residual: ValuationValue,
    /// Residual after each iteration (nondecreasing when converging).
    pub history: Vec<ValuationValue>,
    /// The factors' polygons partition the polygon of `P` exactly.
    pub partition_ok: bool,
}

pub fn robba_factor(
    p: &TwistedPoly,
    cfg: &ValuationConfig,
    r: &[Q],
    split_slope: &Q,
    precision: &Q,
) -> Result<RobbaFactorization> {
    robba_factor_with_budget(p, cfg, r, split_slope, precision, DEFAULT_BUDGET)
}

pub fn robba_factor_with_budget(
    p: &TwistedPoly,
    cfg: &ValuationConfig,
    r: &[Q],
    split_slope: &Q,
    precision: &Q,
    budget: usize,
) -> Result<RobbaFactorization> {
    if p.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if !p.is_monic() {
        return Err(Error::NotMonic);
    }
    let np = p.newton_polygon(cfg, r)?;
    let d = p.degree().unwrap();
    let threshold = hull_slope(split_slope);
    // hull slopes > threshold (paper slopes < split) sit to the right of the vertex m
    let mut m = np.vertices[0].0;
    for (s, len) in &np.slopes {
        if s <= &threshold {
            m += len;
        }
    }
    let n = d - m;
    if m == 0 || n == 0 {
        return Err(Error::NoSeparatingVertex(fmt_q(split_slope)));
    }
    if let Some(axis) = p.twist() {
        let weight = cfg.axis_weight(axis, r);
        for (s, _) in &np.slopes {
            if s > &threshold && s <= &weight {
                return Err(Error::SlopeNotVisible { slope: fmt_q(&-s.clone()), threshold: fmt_q(&-weight.clone()) });
            }
        }
    }

    let (nu, nt, twist) = (p.coeffs()[0].nu(), p.coeffs()[0].nt(), p.twist());
    let vals: Vec<Q> = p.coeffs().iter().filter_map(|c| c.valuation_unchecked(cfg, r).finite().cloned()).collect();
    let spread = vals.iter().map(|v| v.abs()).max().unwrap_or_else(Q::zero);
    let weight = twist.map(|a| cfg.axis_weight(a, r).abs()).unwrap_or_else(Q::zero);
    let work = precision + q(2) * &spread + q(d as i64) * weight + q(4);

    let a_m = p.coeff(m);
    let l0_inv = a_m.truncated_inverse(cfg, r, &work)?;
    let mut low = TwistedPoly::new(twist, nu, nt, (0..=n).map(|j| p.coeff(m + j)).collect());
    let mut high_coeffs: Vec<LaurentElement> = (0..m).map(|i| p.coeff(i).mul(&l0_inv).prune(cfg, r, &work)).collect();
    high_coeffs.push(LaurentElement::one(nu, nt));
    let mut high = TwistedPoly::new(twist, nu, nt, high_coeffs);

    let mut history = Vec::new();
    let mut best: Option<(ValuationValue, TwistedPoly, TwistedPoly)> = None;
    for _ in 0..=budget {
        let e = p.sub(&high.mul(&low)?)?;
        let res = e.valuation(cfg, r);
        history.push(res.clone());
        if best.as_ref().is_none_or(|(b, _, _)| &res > b) {
            best = Some((res.clone(), low.clone(), high.clone()));
        }
        if res.at_least(precision) {
            break;
        }
        // correct the low factor from the top coefficients, the high factor from the bottom ones
        let dl: Vec<LaurentElement> = (0..n).map(|j| e.coeff(m + j).prune(cfg, r, &work)).collect();
        let dh: Vec<LaurentElement> = (0..m).map(|i| e.coeff(i).mul(&l0_inv).prune(cfg, r, &work)).collect();
        low = low.add(&TwistedPoly::new(twist, nu, nt, dl))?;
        high = high.add(&TwistedPoly::new(twist, nu, nt, dh))?;
    }
    let (residual, low, high) = best.unwrap();
    if !residual.at_least(precision) {
        return Err(Error::NoConvergence { precision: fmt_q(precision), best: residual.to_string() });
    }
    // twisted polygons are only additive below the visibility threshold
    let visible = |slopes: Vec<Q>| -> Vec<Q> {
        match twist {
            None => slopes,
            Some(a) => {
                let tau = -cfg.axis_weight(a, r);
                slopes.into_iter().filter(|s| s < &tau).collect()
            }
        }
    };
    let partition_ok = {
        let mut parts = visible(low.newton_polygon(cfg, r)?.paper_slopes());
        parts.extend(visible(high.newton_polygon(cfg, r)?.paper_slopes()));
        parts.sort();
        parts == visible(np.paper_slopes())
    };
    Ok(RobbaFactorization { low, high, residual, history, partition_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;
    use crate::valued::Axis;

    fn cfg(p: u32) -> ValuationConfig {
        ValuationConfig::geometric(p)
    }

    fn t(p: u32, c: Q, e: i64) -> LaurentElement {
        LaurentElement::t_power(&cfg(p), c, 0, e)
    }

    fn linear(twist: Option<Axis>, p: u32, root: LaurentElement) -> TwistedPoly {
        TwistedPoly::from_coeffs(twist, &cfg(p), vec![root.neg(), t(p, q(1), 0)])
    }

    #[test]
    fn commutative_exact_factors() {
        let c = cfg(3);
        let a = linear(None, 3, t(3, q(1), 0));
        let b = linear(None, 3, t(3, q(3), 0));
        let prod = a.mul(&b).unwrap();
        let f = robba_factor(&prod, &c, &[q(0)], &qf(1, 2), &q(10)).unwrap();
        assert!(f.residual.at_least(&q(10)));
        assert!(f.partition_ok);
        // low carries paper slope 0, i.e. the root 1
        assert_eq!(f.low.degree(), Some(1));
        assert_eq!(f.low.newton_polygon(&c, &[q(0)]).unwrap().paper_slopes(), vec![q(0)]);
        assert_eq!(f.high.newton_polygon(&c, &[q(0)]).unwrap().paper_slopes(), vec![q(1)]);
        assert!(f.history.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pure_slope_has_no_split() {
        let c = cfg(2);
        let p = TwistedPoly::from_coeffs(None, &c, vec![t(2, q(-1), 1), LaurentElement::zero(0, 1), t(2, q(1), 0)]);
        for s in [qf(1, 2), q(0), q(3)] {
            assert!(matches!(robba_factor(&p, &c, &[q(1)], &s, &q(5)), Err(Error::NoSeparatingVertex(_))));
        }
    }

    #[test]
    fn twisted_product_factors() {
        let c = cfg(2);
        let d = Some(Axis::Geom(0));
        let tt = TwistedPoly::t_power(d, 0, 1, 1);
        let b = linear(d, 2, t(2, q(1), -2));
        let prod = tt.mul(&b).unwrap();
        let f = robba_factor(&prod, &c, &[q(1)], &q(0), &q(10)).unwrap();
        let back = f.high.mul(&f.low).unwrap();
        assert!(prod.sub(&back).unwrap().valuation(&c, &[q(1)]).at_least(&q(10)));
        assert!(f.partition_ok);
    }

    #[test]
    fn invisible_low_slope_rejected() {
        let c = cfg(2);
        let d = Some(Axis::Geom(0));
        // paper slopes 2 and 0 at r = 1; the low slope 0 is above the threshold -1
        let a = linear(d, 2, t(2, q(1), 0));
        let b = linear(d, 2, t(2, q(4), 0));
        let prod = b.mul(&a).unwrap();
        let res = robba_factor(&prod, &c, &[q(1)], &q(1), &q(5));
        assert!(matches!(res, Err(Error::SlopeNotVisible { .. })), "{res:?}");
    }

    #[test]
    fn not_monic_rejected() {
        let c = cfg(2);
        let p = TwistedPoly::from_coeffs(None, &c, vec![t(2, q(1), 0), t(2, q(2), 0)]);
        assert_eq!(robba_factor(&p, &c, &[q(0)], &q(0), &q(5)), Err(Error::NotMonic));
    }
}
