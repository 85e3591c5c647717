//! Laurent polynomials over Q in base parameters `u_j` and geometric
//! variables `t_k`, with Gauss valuations parameterized by log-radii.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pw_affine::{Affine, Envelope, PiecewiseAffine};
use crate::rational::{add_assign_q, fmt_q, is_prime, mul_q, ord_p, q, round_p_adic, serde_q, Q};

/// A derivation axis: `Base(j)` is d/du_{j+1}, `Geom(k)` is d/dt_{k+1}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Axis {
    Base(usize),
    Geom(usize),
}

impl Axis {
    pub fn is_geometric(&self) -> bool {
        matches!(self, Axis::Geom(_))
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::Base(j) => write!(f, "u{}", j + 1),
            Axis::Geom(k) => write!(f, "t{}", k + 1),
        }
    }
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = || Error::ParseAxis(s.to_string());
        let (kind, idx) = s.split_at(s.char_indices().nth(1).map(|(i, _)| i).ok_or_else(err)?);
        let idx: usize = idx.parse().map_err(|_| err())?;
        if idx == 0 {
            return Err(err());
        }
        match kind {
            "u" => Ok(Axis::Base(idx - 1)),
            "t" => Ok(Axis::Geom(idx - 1)),
            _ => Err(err()),
        }
    }
}

impl Serialize for Axis {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Residue characteristic, base-parameter weights and geometric dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValuationConfig {
    pub p: u32,
    pub u_weights: Vec<Q>,
    pub n_geom: usize,
}

impl ValuationConfig {
    pub fn new(p: u32, u_weights: Vec<Q>, n_geom: usize) -> Result<Self> {
        if p != 0 && !is_prime(p as u64) {
            return Err(Error::BadPrime(p as u64));
        }
        Ok(ValuationConfig { p, u_weights, n_geom })
    }

    /// One geometric variable, no base parameters.
    pub fn geometric(p: u32) -> Self {
        ValuationConfig::new(p, Vec::new(), 1).expect("valid prime")
    }

    pub fn m_base(&self) -> usize {
        self.u_weights.len()
    }

    /// v(ω): 1/(p−1), or 0 when p = 0.
    pub fn omega(&self) -> Q {
        if self.p == 0 {
            Q::zero()
        } else {
            Q::new(1.into(), (self.p - 1).into())
        }
    }

    /// The pure value p/(p−1).
    pub fn pure_value(&self) -> Q {
        if self.p == 0 {
            Q::zero()
        } else {
            Q::new(self.p.into(), (self.p - 1).into())
        }
    }

    pub fn axes(&self) -> Vec<Axis> {
        (0..self.m_base()).map(Axis::Base).chain((0..self.n_geom).map(Axis::Geom)).collect()
    }

    pub fn check_axis(&self, axis: Axis) -> Result<()> {
        let ok = match axis {
            Axis::Base(j) => j < self.m_base(),
            Axis::Geom(k) => k < self.n_geom,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::UnknownAxis(axis))
        }
    }

    pub fn check_radius(&self, r: &[Q]) -> Result<()> {
        if r.len() != self.n_geom {
            return Err(Error::Dimension { expected: self.n_geom, got: r.len() });
        }
        Ok(())
    }

    /// Valuation of the variable differentiated by `axis` at log-radius `r`;
    /// the operator valuation of the derivation is its negative.
    pub fn axis_weight(&self, axis: Axis, r: &[Q]) -> Q {
        match axis {
            Axis::Base(j) => self.u_weights[j].clone(),
            Axis::Geom(k) => r[k].clone(),
        }
    }

    /// v(|∂|_sp,K) = v(ω) − weight.
    pub fn base_spectral(&self, axis: Axis, r: &[Q]) -> Q {
        self.omega() - self.axis_weight(axis, r)
    }
}

/// A valuation: a rational or +∞ for zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ValuationValue {
    Finite(Q),
    Infinite,
}

impl ValuationValue {
    pub fn finite(&self) -> Option<&Q> {
        match self {
            ValuationValue::Finite(v) => Some(v),
            ValuationValue::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ValuationValue::Infinite)
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self, other) {
            (ValuationValue::Finite(a), ValuationValue::Finite(b)) => ValuationValue::Finite(a + b),
            _ => ValuationValue::Infinite,
        }
    }

    /// `self ≥ bound` with +∞ above everything.
    pub fn at_least(&self, bound: &Q) -> bool {
        match self {
            ValuationValue::Finite(v) => v >= bound,
            ValuationValue::Infinite => true,
        }
    }
}

impl PartialOrd for ValuationValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ValuationValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ValuationValue::Finite(a), ValuationValue::Finite(b)) => a.cmp(b),
            (ValuationValue::Finite(_), ValuationValue::Infinite) => Ordering::Less,
            (ValuationValue::Infinite, ValuationValue::Finite(_)) => Ordering::Greater,
            (ValuationValue::Infinite, ValuationValue::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ValuationValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValuationValue::Finite(v) => write!(f, "{}", fmt_q(v)),
            ValuationValue::Infinite => write!(f, "inf"),
        }
    }
}

/// Exponent vector: base exponents first, then geometric exponents.
pub type Exponent = Vec<i64>;

/// Finite sum of monomials `c·u^e·t^i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentElement {
    nu: usize,
    nt: usize,
    terms: BTreeMap<Exponent, Q>,
}

impl LaurentElement {
    pub fn zero(nu: usize, nt: usize) -> Self {
        LaurentElement { nu, nt, terms: BTreeMap::new() }
    }

    pub fn constant(nu: usize, nt: usize, c: Q) -> Self {
        Self::monomial(nu, nt, c, &vec![0; nu], &vec![0; nt])
    }

    pub fn one(nu: usize, nt: usize) -> Self {
        Self::constant(nu, nt, Q::one())
    }

    pub fn monomial(nu: usize, nt: usize, c: Q, u: &[i64], t: &[i64]) -> Self {
        assert_eq!(u.len(), nu, "base exponent length");
        assert_eq!(t.len(), nt, "geometric exponent length");
        let mut out = Self::zero(nu, nt);
        if !c.is_zero() {
            let key: Exponent = u.iter().chain(t.iter()).copied().collect();
            out.terms.insert(key, c);
        }
        out
    }

    pub fn zero_for(cfg: &ValuationConfig) -> Self {
        Self::zero(cfg.m_base(), cfg.n_geom)
    }

    pub fn one_for(cfg: &ValuationConfig) -> Self {
        Self::one(cfg.m_base(), cfg.n_geom)
    }

    pub fn constant_for(cfg: &ValuationConfig, c: Q) -> Self {
        Self::constant(cfg.m_base(), cfg.n_geom, c)
    }

    /// `c·t_k^e` in the ring of `cfg`.
    pub fn t_power(cfg: &ValuationConfig, c: Q, k: usize, e: i64) -> Self {
        let mut t = vec![0; cfg.n_geom];
        t[k] = e;
        Self::monomial(cfg.m_base(), cfg.n_geom, c, &vec![0; cfg.m_base()], &t)
    }

    /// `c·u_j^e` in the ring of `cfg`.
    pub fn u_power(cfg: &ValuationConfig, c: Q, j: usize, e: i64) -> Self {
        let mut u = vec![0; cfg.m_base()];
        u[j] = e;
        Self::monomial(cfg.m_base(), cfg.n_geom, c, &u, &vec![0; cfg.n_geom])
    }

    /// Builds from `(coefficient, exponent)` pairs, summing repeated keys.
    pub fn from_terms(nu: usize, nt: usize, terms: impl IntoIterator<Item = (Q, Exponent)>) -> Self {
        let mut out = Self::zero(nu, nt);
        for (c, e) in terms {
            assert_eq!(e.len(), nu + nt, "exponent length");
            out.add_term(e, c);
        }
        out
    }

    fn add_term(&mut self, e: Exponent, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(x) => {
                add_assign_q(x, &c);
                if x.is_zero() {
                    self.terms.remove(&e);
                }
            }
            None => {
                self.terms.insert(e, c);
            }
        }
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Q)> {
        self.terms.iter()
    }

    pub fn coeff(&self, e: &[i64]) -> Q {
        self.terms.get(e).cloned().unwrap_or_else(Q::zero)
    }

    /// The constant coefficient when the element is a constant.
    pub fn as_constant(&self) -> Option<Q> {
        match self.terms.len() {
            0 => Some(Q::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|x| *x == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    fn same_ring(&self, other: &Self) {
        assert!(self.nu == other.nu && self.nt == other.nt, "ring mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_ring(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nu, self.nt);
        }
        let terms = self.terms.iter().map(|(e, x)| (e.clone(), mul_q(x, c))).collect();
        LaurentElement { nu: self.nu, nt: self.nt, terms }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_ring(other);
        let mut out = Self::zero(self.nu, self.nt);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, mul_q(c1, c2));
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::one(self.nu, self.nt);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    /// Multiplies by the monomial `c·x^e`.
    pub fn mul_monomial(&self, c: &Q, e: &[i64]) -> Self {
        if c.is_zero() {
            return Self::zero(self.nu, self.nt);
        }
        let terms =
            self.terms.iter().map(|(k, x)| (k.iter().zip(e).map(|(a, b)| a + b).collect(), mul_q(x, c))).collect();
        LaurentElement { nu: self.nu, nt: self.nt, terms }
    }

    fn axis_slot(&self, axis: Axis) -> usize {
        match axis {
            Axis::Base(j) => j,
            Axis::Geom(k) => self.nu + k,
        }
    }

    /// Exact formal partial derivative along `axis`.
    pub fn derive(&self, axis: Axis) -> Self {
        let slot = self.axis_slot(axis);
        let mut out = Self::zero(self.nu, self.nt);
        for (e, c) in &self.terms {
            let k = e[slot];
            if k != 0 {
                let mut e2 = e.clone();
                e2[slot] -= 1;
                out.add_term(e2, mul_q(c, &q(k)));
            }
        }
        out
    }

    /// Rewrites geometric exponents through `map`, keeping base exponents.
    pub fn map_geometric(&self, nt_out: usize, map: impl Fn(&[i64]) -> Vec<i64>) -> Self {
        let mut out = Self::zero(self.nu, nt_out);
        for (e, c) in &self.terms {
            let t = map(&e[self.nu..]);
            assert_eq!(t.len(), nt_out, "mapped exponent length");
            let key: Exponent = e[..self.nu].iter().copied().chain(t).collect();
            out.add_term(key, c.clone());
        }
        out
    }

    fn term_valuation(cfg: &ValuationConfig, nu: usize, e: &[i64], c: &Q, r: &[Q]) -> Q {
        let mut v = q(ord_p(c, cfg.p));
        for (j, w) in cfg.u_weights.iter().enumerate() {
            v += w * q(e[j]);
        }
        for (k, rk) in r.iter().enumerate() {
            v += rk * q(e[nu + k]);
        }
        v
    }

    fn check_cfg(&self, cfg: &ValuationConfig) -> Result<()> {
        if cfg.m_base() != self.nu {
            return Err(Error::Dimension { expected: cfg.m_base(), got: self.nu });
        }
        if cfg.n_geom != self.nt {
            return Err(Error::Dimension { expected: cfg.n_geom, got: self.nt });
        }
        Ok(())
    }

    /// Gauss valuation at log-radius vector `r`.
    pub fn gauss_valuation(&self, cfg: &ValuationConfig, r: &[Q]) -> Result<ValuationValue> {
        self.check_cfg(cfg)?;
        cfg.check_radius(r)?;
        Ok(self.valuation_unchecked(cfg, r))
    }

    pub(crate) fn valuation_unchecked(&self, cfg: &ValuationConfig, r: &[Q]) -> ValuationValue {
        self.terms
            .iter()
            .map(|(e, c)| Self::term_valuation(cfg, self.nu, e, c, r))
            .min()
            .map_or(ValuationValue::Infinite, ValuationValue::Finite)
    }

    /// One affine function of `r_k` per term, other coordinates frozen.
    pub fn valuation_lines(&self, cfg: &ValuationConfig, k: usize, frozen: &[Q]) -> Vec<Affine> {
        let mut base = frozen.to_vec();
        base[k] = Q::zero();
        self.terms
            .iter()
            .map(|(e, c)| Affine::new(q(e[self.nu + k]), Self::term_valuation(cfg, self.nu, e, c, &base)))
            .collect()
    }

    /// `r_k ↦ v_r(x)` on `[lo, hi]` with the other coordinates taken from `frozen`.
    pub fn valuation_function(
        &self,
        cfg: &ValuationConfig,
        axis: Axis,
        lo: &Q,
        hi: &Q,
        frozen: &[Q],
    ) -> Result<PiecewiseAffine> {
        self.check_cfg(cfg)?;
        cfg.check_radius(frozen)?;
        let k = match axis {
            Axis::Geom(k) if k < cfg.n_geom => k,
            other => return Err(Error::UnknownAxis(other)),
        };
        if self.is_zero() {
            return Err(Error::ZeroElement);
        }
        if lo > hi {
            return Err(Error::EmptyWindow { lo: fmt_q(lo), hi: fmt_q(hi) });
        }
        let lines = self.valuation_lines(cfg, k, frozen);
        PiecewiseAffine::envelope(lo.clone(), hi.clone(), &lines, Envelope::Min)
    }

    /// `true` iff the valuation function has no breakpoint in the open window.
    pub fn is_unit_on_annulus(&self, cfg: &ValuationConfig, axis: Axis, lo: &Q, hi: &Q, frozen: &[Q]) -> Result<bool> {
        Ok(self.valuation_function(cfg, axis, lo, hi, frozen)?.is_affine())
    }

    /// The unique term of least valuation at `r`, if there is one.
    pub fn dominant_term(&self, cfg: &ValuationConfig, r: &[Q]) -> Option<(Exponent, Q, Q)> {
        let mut best: Option<(Exponent, Q, Q)> = None;
        let mut tie = false;
        for (e, c) in &self.terms {
            let v = Self::term_valuation(cfg, self.nu, e, c, r);
            match &best {
                Some((_, _, bv)) if v > *bv => {}
                Some((_, _, bv)) if v == *bv => tie = true,
                _ => {
                    best = Some((e.clone(), c.clone(), v));
                    tie = false;
                }
            }
        }
        if tie {
            None
        } else {
            best
        }
    }

    /// Drops terms with valuation ≥ `bound` at `r` and rounds the remaining
    /// coefficients p-adically; the total change has valuation ≥ `bound`.
    pub fn prune(&self, cfg: &ValuationConfig, r: &[Q], bound: &Q) -> Self {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            let tv = Self::term_valuation(cfg, self.nu, e, c, r);
            if tv >= *bound {
                continue;
            }
            let c = if cfg.p == 0 {
                c.clone()
            } else {
                let v = ord_p(c, cfg.p);
                let k = (bound - (&tv - q(v))).ceil().to_integer();
                round_p_adic(c, cfg.p, i64::try_from(k).expect("precision fits in i64"))
            };
            terms.insert(e.clone(), c);
        }
        LaurentElement { nu: self.nu, nt: self.nt, terms }
    }

    /// An approximate inverse `y` at the fiber `r` with
    /// `v_r(x·y − 1) ≥ precision`. Requires a unique dominant term.
    pub fn truncated_inverse(&self, cfg: &ValuationConfig, r: &[Q], precision: &Q) -> Result<Self> {
        let (e, c, _) = self.dominant_term(cfg, r).ok_or(Error::NotAUnit)?;
        let inv_e: Vec<i64> = e.iter().map(|x| -x).collect();
        let lead_inv = Self::from_terms(self.nu, self.nt, [(c.recip(), inv_e.clone())]);
        // x = lead·(1 + eps) with v_r(eps) > 0
        let eps = self.mul_monomial(&c.recip(), &inv_e).sub(&Self::one(self.nu, self.nt));
        let one = Self::one(self.nu, self.nt);
        let series = match eps.valuation_unchecked(cfg, r) {
            ValuationValue::Infinite => one,
            ValuationValue::Finite(ve) => {
                let k = (precision / &ve).ceil().to_integer().to_u32().unwrap_or(u32::MAX).max(1);
                let mut sum = one.clone();
                let mut power = one;
                let minus_eps = eps.neg();
                for _ in 0..k {
                    power = power.mul(&minus_eps).prune(cfg, r, precision);
                    if power.is_zero() {
                        break;
                    }
                    sum = sum.add(&power);
                }
                sum.prune(cfg, r, precision)
            }
        };
        Ok(series.mul(&lead_inv))
    }

    /// Exact division in the Laurent ring, `None` when `other` does not divide.
    pub fn exact_div(&self, other: &Self) -> Option<Self> {
        self.same_ring(other);
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(self.clone());
        }
        let (lead_e, lead_c) = other.terms.iter().next_back().unwrap();
        let (min_b, _) = other.terms.iter().next().unwrap();
        let (min_a, _) = self.terms.iter().next().unwrap();
        let floor: Exponent = min_a.iter().zip(min_b).map(|(a, b)| a - b).collect();
        let mut rem = self.clone();
        let mut quo = Self::zero(self.nu, self.nt);
        while let Some((e, c)) = rem.terms.iter().next_back() {
            let qe: Exponent = e.iter().zip(lead_e).map(|(a, b)| a - b).collect();
            if qe < floor {
                return None;
            }
            let qc = c / lead_c;
            rem = rem.sub(&other.mul_monomial(&qc, &qe));
            quo.add_term(qe, qc);
        }
        Some(quo)
    }

    /// Largest absolute exponent appearing along geometric slot `k`.
    pub fn t_degree_range(&self, k: usize) -> Option<(i64, i64)> {
        let vals: Vec<i64> = self.terms.keys().map(|e| e[self.nu + k]).collect();
        Some((*vals.iter().min()?, *vals.iter().max()?))
    }

    pub fn to_json(&self) -> LaurentJson {
        LaurentJson {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| TermJson { c: c.clone(), u: e[..self.nu].to_vec(), t: e[self.nu..].to_vec() })
                .collect(),
        }
    }
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            let mut body = String::new();
            for (i, x) in e.iter().enumerate() {
                if *x == 0 {
                    continue;
                }
                let name = if i < self.nu { format!("u{}", i + 1) } else { format!("t{}", i - self.nu + 1) };
                if !body.is_empty() {
                    body.push('*');
                }
                if *x == 1 {
                    body.push_str(&name);
                } else {
                    body.push_str(&format!("{name}^{x}"));
                }
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match (body.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{}", fmt_q(&mag))?,
                (false, true) => write!(f, "{body}")?,
                (false, false) => write!(f, "{}*{body}", fmt_q(&mag))?,
            }
        }
        Ok(())
    }
}

/// Serialized monomial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    #[serde(with = "serde_q")]
    pub c: Q,
    #[serde(default)]
    pub u: Vec<i64>,
    #[serde(default)]
    pub t: Vec<i64>,
}

/// Serialized Laurent element; dimensions come from the enclosing config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LaurentJson {
    pub terms: Vec<TermJson>,
}

impl LaurentJson {
    pub fn into_element(self, nu: usize, nt: usize) -> Result<LaurentElement> {
        let mut terms = Vec::with_capacity(self.terms.len());
        for t in self.terms {
            if t.u.len() != nu {
                return Err(Error::Dimension { expected: nu, got: t.u.len() });
            }
            if t.t.len() != nt {
                return Err(Error::Dimension { expected: nt, got: t.t.len() });
            }
            terms.push((t.c, t.u.into_iter().chain(t.t).collect()));
        }
        Ok(LaurentElement::from_terms(nu, nt, terms))
    }
}
