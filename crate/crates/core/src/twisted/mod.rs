//! Twisted (Ore) polynomials `Σ a_i T^i` with `T·a = a·T + ∂(a)`, and their
//! Newton polygons.
//!
//! Hull orientation: points are `(i, v_r(a_i))`, slopes read left to right.
//! The paper-orientation slope is the negative; [`paper_slope`] owns that map.

mod parametric;
mod robba;

pub use parametric::{verify_newton_properties, SlopeFunctions};
pub use robba::{robba_factor, robba_factor_with_budget, RobbaFactorization, DEFAULT_BUDGET};

use num::{BigInt, One};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, Q};
use crate::valued::{Axis, LaurentElement, LaurentJson, ValuationConfig, ValuationValue};

/// Converts a hull slope (our orientation) to the paper's orientation.
pub fn paper_slope(sigma: &Q) -> Q {
    -sigma.clone()
}

/// Inverse of [`paper_slope`].
pub fn hull_slope(paper: &Q) -> Q {
    -paper.clone()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistedPoly {
    twist: Option<Axis>,
    nu: usize,
    nt: usize,
    coeffs: Vec<LaurentElement>,
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut out = BigInt::one();
    for i in 0..k {
        out = out * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    out
}

impl TwistedPoly {
    /// `twist = None` gives the commutative polynomial ring.
    pub fn new(twist: Option<Axis>, nu: usize, nt: usize, coeffs: Vec<LaurentElement>) -> Self {
        for c in &coeffs {
            assert!(c.nu() == nu && c.nt() == nt, "coefficient ring mismatch");
        }
        let mut p = TwistedPoly { twist, nu, nt, coeffs };
        p.normalize();
        p
    }

    pub fn from_coeffs(twist: Option<Axis>, cfg: &ValuationConfig, coeffs: Vec<LaurentElement>) -> Self {
        Self::new(twist, cfg.m_base(), cfg.n_geom, coeffs)
    }

    pub fn zero(twist: Option<Axis>, nu: usize, nt: usize) -> Self {
        Self::new(twist, nu, nt, Vec::new())
    }

    /// `T^k`.
    pub fn t_power(twist: Option<Axis>, nu: usize, nt: usize, k: usize) -> Self {
        let mut coeffs = vec![LaurentElement::zero(nu, nt); k];
        coeffs.push(LaurentElement::one(nu, nt));
        Self::new(twist, nu, nt, coeffs)
    }

    pub fn constant(twist: Option<Axis>, a: LaurentElement) -> Self {
        let (nu, nt) = (a.nu(), a.nt());
        Self::new(twist, nu, nt, vec![a])
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
    }

    pub fn twist(&self) -> Option<Axis> {
        self.twist
    }

    pub fn coeffs(&self) -> &[LaurentElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> LaurentElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| LaurentElement::zero(self.nu, self.nt))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&LaurentElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    fn check_twist(&self, other: &Self) -> Result<()> {
        if self.twist != other.twist {
            return Err(Error::DerivationMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_twist(other)?;
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect();
        Ok(Self::new(self.twist, self.nu, self.nt, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let coeffs = self.coeffs.iter().map(LaurentElement::neg).collect();
        Self::new(self.twist, self.nu, self.nt, coeffs)
    }

    /// `a·P` (left scalar multiplication).
    pub fn scale_left(&self, a: &LaurentElement) -> Self {
        let coeffs = self.coeffs.iter().map(|c| a.mul(c)).collect();
        Self::new(self.twist, self.nu, self.nt, coeffs)
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&LaurentElement) -> LaurentElement) -> Self {
        let coeffs = self.coeffs.iter().map(f).collect();
        Self::new(self.twist, self.nu, self.nt, coeffs)
    }

    /// `T^i · b = Σ_k C(i,k) ∂^k(b) T^{i−k}`.
    fn t_power_times(&self, i: usize, b: &LaurentElement) -> Vec<(usize, LaurentElement)> {
        match self.twist {
            None => vec![(i, b.clone())],
            Some(axis) => {
                let mut out = Vec::with_capacity(i + 1);
                let mut d = b.clone();
                for k in 0..=i {
                    if d.is_zero() {
                        break;
                    }
                    out.push((i - k, d.scale(&Q::from_integer(binomial(i, k)))));
                    d = d.derive(axis);
                }
                out
            }
        }
    }

    /// Product in the twisted polynomial ring.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_twist(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.twist, self.nu, self.nt));
        }
        let deg = self.coeffs.len() + other.coeffs.len() - 1;
        let mut coeffs = vec![LaurentElement::zero(self.nu, self.nt); deg];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                for (e, c) in self.t_power_times(i, b) {
                    coeffs[e + j] = coeffs[e + j].add(&a.mul(&c));
                }
            }
        }
        Ok(Self::new(self.twist, self.nu, self.nt, coeffs))
    }

    /// Formal adjoint `Σ (−T)^i a_i`, rewritten with coefficients on the left.
    /// It reverses products: `(PQ)* = Q*·P*`.
    pub fn adjoint(&self) -> Self {
        let mut coeffs = vec![LaurentElement::zero(self.nu, self.nt); self.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            let sign = if i % 2 == 0 { Q::one() } else { -Q::one() };
            for (e, c) in self.t_power_times(i, a) {
                coeffs[e] = coeffs[e].add(&c.scale(&sign));
            }
        }
        Self::new(self.twist, self.nu, self.nt, coeffs)
    }

    /// Coefficientwise minimum Gauss valuation at `r`.
    pub fn valuation(&self, cfg: &ValuationConfig, r: &[Q]) -> ValuationValue {
        self.coeffs.iter().map(|c| c.valuation_unchecked(cfg, r)).min().unwrap_or(ValuationValue::Infinite)
    }

    /// Newton polygon at the log-radius vector `r`.
    pub fn newton_polygon(&self, cfg: &ValuationConfig, r: &[Q]) -> Result<NewtonPolygon> {
        cfg.check_radius(r)?;
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        let points: Vec<(usize, Q)> = self
            .coeffs
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.gauss_valuation(cfg, r).ok()?.finite().map(|v| (i, v.clone())))
            .collect();
        Ok(NewtonPolygon::from_points(&points))
    }

    pub fn to_json(&self) -> TwistedPolyJson {
        TwistedPolyJson { derivation: self.twist, coeffs: self.coeffs.iter().map(LaurentElement::to_json).collect() }
    }
}

/// Serialized twisted polynomial; `derivation` is `null` for the commutative ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistedPolyJson {
    pub derivation: Option<Axis>,
    pub coeffs: Vec<LaurentJson>,
}

impl TwistedPolyJson {
    pub fn into_poly(self, cfg: &ValuationConfig) -> Result<TwistedPoly> {
        if let Some(a) = self.derivation {
            cfg.check_axis(a)?;
        }
        let coeffs =
            self.coeffs.into_iter().map(|c| c.into_element(cfg.m_base(), cfg.n_geom)).collect::<Result<Vec<_>>>()?;
        Ok(TwistedPoly::from_coeffs(self.derivation, cfg, coeffs))
    }
}

/// Lower convex hull of `(i, v_r(a_i))`, our orientation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    /// Hull corners, strictly increasing in x.
    pub vertices: Vec<(usize, Q)>,
    /// Segment slopes left to right with their horizontal lengths.
    pub slopes: Vec<(Q, usize)>,
}

/// Indices of the lower-hull corners of points sorted by x (collinear points dropped).
pub(crate) fn lower_hull_indices(points: &[(usize, Q)]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::with_capacity(points.len());
    for (idx, (x, y)) in points.iter().enumerate() {
        while hull.len() >= 2 {
            let (x1, y1) = &points[hull[hull.len() - 2]];
            let (x2, y2) = &points[hull[hull.len() - 1]];
            // drop the middle point unless it lies strictly below the chord
            let lhs = (y2 - y1) * Q::from_integer(BigInt::from(x - x1));
            let rhs = (y - y1) * Q::from_integer(BigInt::from(x2 - x1));
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(idx);
    }
    hull
}

impl NewtonPolygon {
    pub fn from_points(points: &[(usize, Q)]) -> Self {
        let idx = lower_hull_indices(points);
        let vertices: Vec<(usize, Q)> = idx.iter().map(|&i| points[i].clone()).collect();
        let slopes = vertices
            .windows(2)
            .map(|w| {
                let len = w[1].0 - w[0].0;
                ((&w[1].1 - &w[0].1) / Q::from_integer(BigInt::from(len)), len)
            })
            .collect();
        NewtonPolygon { vertices, slopes }
    }

    pub fn width(&self) -> usize {
        match (self.vertices.first(), self.vertices.last()) {
            (Some(a), Some(b)) => b.0 - a.0,
            _ => 0,
        }
    }

    /// Hull slopes (our orientation), one per unit of width, left to right.
    pub fn unit_slopes(&self) -> Vec<Q> {
        self.slopes.iter().flat_map(|(s, m)| std::iter::repeat_n(s.clone(), *m)).collect()
    }

    /// Paper-orientation slopes in increasing order, with multiplicity.
    pub fn paper_slopes(&self) -> Vec<Q> {
        let mut out: Vec<Q> = self.unit_slopes().iter().map(paper_slope).collect();
        out.sort();
        out
    }

    pub fn is_vertex(&self, x: usize) -> bool {
        self.vertices.iter().any(|(vx, _)| *vx == x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "vertices": self.vertices.iter().map(|(x, y)| serde_json::json!([x, fmt_q(y)])).collect::<Vec<_>>(),
            "slopes": self.slopes.iter().map(|(s, m)| serde_json::json!([fmt_q(s), m])).collect::<Vec<_>>(),
        })
    }
}

/// `true` when every coefficient is free of negative powers of `t_k`.
pub(crate) fn no_negative_powers(p: &TwistedPoly, k: usize) -> bool {
    p.coeffs().iter().all(|c| c.t_degree_range(k).is_none_or(|(lo, _)| lo >= 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn cfg() -> ValuationConfig {
        ValuationConfig::geometric(2)
    }

    fn t(c: Q, e: i64) -> LaurentElement {
        LaurentElement::t_power(&cfg(), c, 0, e)
    }

    fn poly(twist: Option<Axis>, coeffs: Vec<LaurentElement>) -> TwistedPoly {
        TwistedPoly::from_coeffs(twist, &cfg(), coeffs)
    }

    const D: Option<Axis> = Some(Axis::Geom(0));

    #[test]
    fn twist_rule() {
        let tt = poly(D, vec![LaurentElement::zero(0, 1), t(q(1), 0)]);
        let tv = poly(D, vec![t(q(1), 1)]);
        // T·t = tT + 1
        assert_eq!(tt.mul(&tv).unwrap(), poly(D, vec![t(q(1), 0), t(q(1), 1)]));
        assert_eq!(tt.mul(&tt).unwrap(), TwistedPoly::t_power(D, 0, 1, 2));
    }

    #[test]
    fn product_by_hand() {
        let a = poly(D, vec![t(q(-1), 1), t(q(1), 0)]);
        let b = poly(D, vec![t(q(1), 1), t(q(1), 0)]);
        // (T − t)(T + t) = T^2 + 1 − t^2
        let expect = poly(D, vec![t(q(1), 0).sub(&t(q(1), 2)), LaurentElement::zero(0, 1), t(q(1), 0)]);
        assert_eq!(a.mul(&b).unwrap(), expect);
        assert_eq!(a.mul(&TwistedPoly::zero(None, 0, 1)), Err(Error::DerivationMismatch));
    }

    #[test]
    fn adjoint_reverses_products() {
        let a = poly(D, vec![t(q(3), -2), t(q(1), 1), t(q(1), 0)]);
        let b = poly(D, vec![t(qf(1, 2), 3), t(q(1), 0)]);
        let lhs = a.mul(&b).unwrap().adjoint();
        let rhs = b.adjoint().mul(&a.adjoint()).unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(a.adjoint().adjoint(), a);
    }

    #[test]
    fn newton_polygon_examples() {
        let c = cfg();
        // T − c with v(c) = 1
        let p = poly(None, vec![t(q(-2), 0), t(q(1), 0)]);
        let np = p.newton_polygon(&c, &[q(0)]).unwrap();
        assert_eq!(np.vertices, vec![(0, q(1)), (1, q(0))]);
        assert_eq!(np.slopes, vec![(q(-1), 1)]);
        assert_eq!(np.paper_slopes(), vec![q(1)]);
        // T^2 − t at r = 1
        let p = poly(None, vec![t(q(-1), 1), LaurentElement::zero(0, 1), t(q(1), 0)]);
        let np = p.newton_polygon(&c, &[q(1)]).unwrap();
        assert_eq!(np.vertices, vec![(0, q(1)), (2, q(0))]);
        assert_eq!(np.paper_slopes(), vec![qf(1, 2), qf(1, 2)]);
        // T^d
        let np = TwistedPoly::t_power(None, 0, 1, 3).newton_polygon(&c, &[q(5)]).unwrap();
        assert_eq!(np.vertices, vec![(3, q(0))]);
        assert!(np.slopes.is_empty());
        assert_eq!(TwistedPoly::zero(None, 0, 1).newton_polygon(&c, &[q(0)]), Err(Error::ZeroPolynomial));
    }

    #[test]
    fn collinear_points_merge() {
        let np = NewtonPolygon::from_points(&[(0, q(2)), (1, q(1)), (2, q(0))]);
        assert_eq!(np.vertices.len(), 2);
        assert_eq!(np.slopes, vec![(q(-1), 2)]);
    }
}
