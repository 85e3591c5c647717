//! Subsidiary radii at a fiber, read from the Newton polygon of a cyclic
//! vector's annihilator.

use num::Zero;
use serde::Serialize;

use super::{cyclic_vector, DiffModule};
use crate::error::Result;
use crate::rational::{fmt_q, Q};
use crate::valued::Axis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RadiiKind {
    Extrinsic,
    Intrinsic,
}

/// A log-radius `f = −log_p R` with multiplicity. A capped entry stands for
/// radii at or beyond the visibility cap: its value is the cap itself.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RadiusEntry {
    pub value: Q,
    pub multiplicity: usize,
    pub capped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiiMultiset {
    pub kind: RadiiKind,
    entries: Vec<RadiusEntry>,
}

impl RadiiMultiset {
    /// Merges equal values and sorts by increasing value (uncapped first on ties).
    pub fn new(kind: RadiiKind, entries: Vec<RadiusEntry>) -> Self {
        let mut entries: Vec<RadiusEntry> = entries.into_iter().filter(|e| e.multiplicity > 0).collect();
        entries.sort_by(|a, b| a.value.cmp(&b.value).then(a.capped.cmp(&b.capped)));
        let mut merged: Vec<RadiusEntry> = Vec::with_capacity(entries.len());
        for e in entries {
            match merged.last_mut() {
                Some(last) if last.value == e.value && last.capped == e.capped => last.multiplicity += e.multiplicity,
                _ => merged.push(e),
            }
        }
        RadiiMultiset { kind, entries: merged }
    }

    /// Uncapped values with multiplicity one each.
    pub fn from_values(kind: RadiiKind, values: &[Q]) -> Self {
        Self::new(
            kind,
            values.iter().map(|v| RadiusEntry { value: v.clone(), multiplicity: 1, capped: false }).collect(),
        )
    }

    pub fn entries(&self) -> &[RadiusEntry] {
        &self.entries
    }

    pub fn rank(&self) -> usize {
        self.entries.iter().map(|e| e.multiplicity).sum()
    }

    pub fn has_capped(&self) -> bool {
        self.entries.iter().any(|e| e.capped)
    }

    /// Every value repeated by multiplicity, decreasing (largest log-radius first).
    pub fn expanded(&self) -> Vec<(Q, bool)> {
        let mut out: Vec<(Q, bool)> = self
            .entries
            .iter()
            .flat_map(|e| std::iter::repeat_n((e.value.clone(), e.capped), e.multiplicity))
            .collect();
        out.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)));
        out
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.entries.clone();
        all.extend(other.entries.iter().cloned());
        Self::new(self.kind, all)
    }

    /// Shifts every value by `−offset` (extrinsic to intrinsic with the axis weight).
    pub fn shifted(&self, offset: &Q, kind: RadiiKind) -> Self {
        Self::new(kind, self.entries.iter().map(|e| RadiusEntry { value: &e.value - offset, ..e.clone() }).collect())
    }

    /// Largest value (smallest radius) and whether it is capped.
    pub fn max_entry(&self) -> Option<&RadiusEntry> {
        self.entries.iter().max_by(|a, b| a.value.cmp(&b.value).then(a.capped.cmp(&b.capped)))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "kind": self.kind,
            "entries": self.entries.iter().map(|e| serde_json::json!([fmt_q(&e.value), e.multiplicity, e.capped])).collect::<Vec<_>>(),
        })
    }
}

/// Extrinsic radii along `axis` at `r`: visible Newton slopes give
/// `v(ω) + σ`; the remaining rank becomes one capped entry at `v(ω) + weight`.
pub fn visible_radii(m: &DiffModule, axis: Axis, r: &[Q]) -> Result<RadiiMultiset> {
    let cfg = m.config();
    cfg.check_radius(r)?;
    let cv = cyclic_vector(m, axis)?;
    let np = cv.charpoly.newton_polygon(cfg, r)?;
    let weight = cfg.axis_weight(axis, r);
    let omega = cfg.omega();
    let mut entries = Vec::new();
    let mut seen = 0;
    for (s, len) in &np.slopes {
        if s > &weight {
            entries.push(RadiusEntry { value: &omega + s, multiplicity: *len, capped: false });
            seen += len;
        }
    }
    if seen < m.rank() {
        entries.push(RadiusEntry { value: &omega + &weight, multiplicity: m.rank() - seen, capped: true });
    }
    Ok(RadiiMultiset::new(RadiiKind::Extrinsic, entries))
}

/// Intrinsic radii along `axis`: extrinsic minus the axis weight. An axis
/// whose matrix vanishes is exactly trivial (all values 0, uncapped).
pub fn axis_intrinsic_values(m: &DiffModule, axis: Axis, r: &[Q]) -> Result<RadiiMultiset> {
    if m.matrix(axis)?.is_zero() {
        return Ok(RadiiMultiset::new(
            RadiiKind::Intrinsic,
            vec![RadiusEntry { value: Q::zero(), multiplicity: m.rank(), capped: false }],
        ));
    }
    let ext = visible_radii(m, axis, r)?;
    Ok(ext.shifted(&m.config().axis_weight(axis, r), RadiiKind::Intrinsic))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntrinsicMulti {
    /// `max_j` of the largest intrinsic value along `∂_j` (min of IR).
    pub value: Q,
    /// The value is a cap bound rather than exact.
    pub capped: bool,
    pub dominant: Vec<Axis>,
}

pub fn intrinsic_radius_multi(m: &DiffModule, r: &[Q]) -> Result<IntrinsicMulti> {
    let mut per_axis = Vec::new();
    for axis in m.axes() {
        let rad = axis_intrinsic_values(m, axis, r)?;
        let top = rad.max_entry().expect("nonempty multiset").clone();
        per_axis.push((axis, top));
    }
    let best = per_axis.iter().map(|(_, e)| e.value.clone()).max().unwrap_or_else(Q::zero);
    let dominant: Vec<Axis> = per_axis.iter().filter(|(_, e)| e.value == best).map(|(a, _)| *a).collect();
    let capped = per_axis.iter().filter(|(_, e)| e.value == best).all(|(_, e)| e.capped);
    Ok(IntrinsicMulti { value: best, capped, dominant })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::Matrix;
    use crate::rational::{q, qf};
    use crate::valued::{LaurentElement, ValuationConfig};

    const T1: Axis = Axis::Geom(0);

    fn t(cfg: &ValuationConfig, c: Q, e: i64) -> LaurentElement {
        LaurentElement::t_power(cfg, c, 0, e)
    }

    #[test]
    fn rank_one_t_minus_two() {
        let cfg = ValuationConfig::geometric(2);
        let m = DiffModule::rank_one(cfg.clone(), &[(T1, t(&cfg, q(1), -2))]).unwrap();
        let ext = visible_radii(&m, T1, &[q(1)]).unwrap();
        assert_eq!(ext.entries(), &[RadiusEntry { value: q(3), multiplicity: 1, capped: false }]);
        let int = axis_intrinsic_values(&m, T1, &[q(1)]).unwrap();
        assert_eq!(int.entries()[0].value, q(2));
    }

    #[test]
    fn trivial_is_capped() {
        let cfg = ValuationConfig::geometric(3);
        let m = DiffModule::trivial(cfg, 3, &[T1]).unwrap();
        let ext = visible_radii(&m, T1, &[q(0)]).unwrap();
        assert_eq!(ext.entries(), &[RadiusEntry { value: qf(1, 2), multiplicity: 3, capped: true }]);
        let multi = intrinsic_radius_multi(&m, &[q(0)]).unwrap();
        assert_eq!(multi.value, q(0));
        assert_eq!(multi.dominant, vec![T1]);
    }

    #[test]
    fn wn_module_value() {
        let cfg = ValuationConfig::new(2, vec![q(0)], 1).unwrap();
        let u = Axis::Base(0);
        let c = LaurentElement::u_power(&cfg, qf(1, 2), 0, -2);
        let m = DiffModule::rank_one(cfg.clone(), &[(u, c), (T1, LaurentElement::zero_for(&cfg))]).unwrap();
        let int = axis_intrinsic_values(&m, u, &[q(0)]).unwrap();
        assert_eq!(int.entries()[0], RadiusEntry { value: q(2), multiplicity: 1, capped: false });
        let multi = intrinsic_radius_multi(&m, &[q(0)]).unwrap();
        assert_eq!(multi.value, q(2));
        assert_eq!(multi.dominant, vec![u]);
    }

    #[test]
    fn dominant_geometric_axis() {
        let cfg = ValuationConfig::new(2, vec![], 2).unwrap();
        let c1 = LaurentElement::t_power(&cfg, q(1), 0, -2);
        let m =
            DiffModule::rank_one(cfg.clone(), &[(Axis::Geom(0), c1), (Axis::Geom(1), LaurentElement::zero_for(&cfg))])
                .unwrap();
        let multi = intrinsic_radius_multi(&m, &[q(1), q(0)]).unwrap();
        assert_eq!(multi.dominant, vec![Axis::Geom(0)]);
        assert_eq!(multi.value, q(2));
    }

    #[test]
    fn direct_sum_is_union() {
        let cfg = ValuationConfig::geometric(2);
        let a = DiffModule::rank_one(cfg.clone(), &[(T1, t(&cfg, q(1), -2))]).unwrap();
        let b = DiffModule::rank_one(cfg.clone(), &[(T1, t(&cfg, q(1), -3))]).unwrap();
        let r = [q(1)];
        let sum = visible_radii(&a.direct_sum(&b).unwrap(), T1, &r).unwrap();
        let expect = visible_radii(&a, T1, &r).unwrap().union(&visible_radii(&b, T1, &r).unwrap());
        assert_eq!(sum, expect);
        assert_eq!(visible_radii(&a.dual(), T1, &r).unwrap(), visible_radii(&a, T1, &r).unwrap());
        let _ = Matrix::identity(1, 0, 1);
    }
}
