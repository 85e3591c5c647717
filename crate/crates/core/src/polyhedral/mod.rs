//! Transintegral polyhedral sets and functions, their reconstruction from
//! one-dimensional slices, and toroidal changes of variables.

mod linalg;
mod multidim;
mod reconstruct;
mod unimodular;

pub use multidim::{multidim_loci, multidim_profile, slice_profile, ModuleOracle, MultidimReport, RegionLocus, Slice};
pub use reconstruct::{reconstruct_polyhedral, SliceOracle, SyntheticOracle};
pub use unimodular::{toroidal_pullback, UnimodularMatrix};

use num::{BigInt, Integer, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, serde_q, Q};
use linalg::{centroid, vertices};

/// `λ(x) = a·x + b` with integer slope `a`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AffineFunctional {
    pub slope: Vec<i64>,
    #[serde(with = "serde_q")]
    pub constant: Q,
}

impl AffineFunctional {
    pub fn new(slope: Vec<i64>, constant: Q) -> Self {
        AffineFunctional { slope, constant }
    }

    pub fn dim(&self) -> usize {
        self.slope.len()
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.slope.iter().zip(x).fold(self.constant.clone(), |acc, (a, xi)| acc + q(*a) * xi)
    }

    /// Derivative along an integer direction.
    pub fn along(&self, z: &[i64]) -> i64 {
        self.slope.iter().zip(z).map(|(a, b)| a * b).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.constant.is_integer()
    }

    pub fn homogeneous(&self) -> Vec<i64> {
        self.slope.clone()
    }

    /// `Σ c_i λ_i` for integer coefficients.
    pub fn combine(terms: &[(i64, &AffineFunctional)], dim: usize) -> Self {
        let mut slope = vec![0; dim];
        let mut constant = Q::zero();
        for (c, f) in terms {
            for (s, a) in slope.iter_mut().zip(&f.slope) {
                *s += c * a;
            }
            constant += q(*c) * &f.constant;
        }
        AffineFunctional { slope, constant }
    }

    fn row(&self) -> (Vec<Q>, Q) {
        (self.slope.iter().map(|a| q(*a)).collect(), self.constant.clone())
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Dimension { expected, got });
    }
    Ok(())
}

/// `{x : λ_s(x) ≥ 0 for all s}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TRPSet {
    pub dim: usize,
    pub constraints: Vec<AffineFunctional>,
}

impl TRPSet {
    pub fn new(dim: usize, constraints: Vec<AffineFunctional>) -> Result<Self> {
        for c in &constraints {
            check_dim(dim, c.dim())?;
        }
        Ok(TRPSet { dim, constraints })
    }

    /// `Π [lo_k, hi_k]` with integer bounds.
    pub fn cube(bounds: &[(i64, i64)]) -> Self {
        let n = bounds.len();
        let mut constraints = Vec::with_capacity(2 * n);
        for (k, (lo, hi)) in bounds.iter().enumerate() {
            let mut e = vec![0; n];
            e[k] = 1;
            constraints.push(AffineFunctional::new(e.clone(), q(-lo)));
            e[k] = -1;
            constraints.push(AffineFunctional::new(e, q(*hi)));
        }
        TRPSet { dim: n, constraints }
    }

    pub fn with(&self, extra: impl IntoIterator<Item = AffineFunctional>) -> Result<Self> {
        let mut constraints = self.constraints.clone();
        for c in extra {
            if !constraints.contains(&c) {
                constraints.push(c);
            }
        }
        Self::new(self.dim, constraints)
    }

    pub fn contains(&self, x: &[Q]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.constraints.iter().all(|c| !c.eval(x).is_negative()))
    }

    pub fn interior(&self, x: &[Q]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.constraints.iter().all(|c| c.eval(x).is_positive()))
    }

    /// Homogeneous parts of the constraints active at `x`.
    pub fn angle_cone(&self, x: &[Q]) -> Result<Cone> {
        if !self.contains(x)? {
            return Err(Error::OutsideSet);
        }
        let active = self.constraints.iter().filter(|c| c.eval(x).is_zero()).map(|c| c.homogeneous());
        Ok(Cone { dim: self.dim, constraints: active.collect() })
    }

    /// Homogeneous parts of all constraints; the recession cone.
    pub fn small_cone(&self) -> Cone {
        Cone { dim: self.dim, constraints: self.constraints.iter().map(|c| c.homogeneous()).collect() }
    }

    pub fn is_compact(&self) -> bool {
        self.small_cone().is_zero()
    }

    fn rows(&self) -> Vec<(Vec<Q>, Q)> {
        self.constraints.iter().map(AffineFunctional::row).collect()
    }

    /// Vertices in a deterministic order; meaningful for compact sets.
    pub fn vertices(&self) -> Vec<Vec<Q>> {
        vertices(self.dim, &self.rows())
    }

    /// The centroid of the vertices, which is interior for a compact set
    /// with nonempty interior.
    pub fn interior_point(&self) -> Result<Vec<Q>> {
        if !self.is_compact() {
            return Err(Error::NotCompact);
        }
        let vs = self.vertices();
        if vs.is_empty() {
            return Err(Error::NotCompact);
        }
        let c = centroid(&vs);
        if !self.interior(&c)? {
            return Err(Error::NotCompact);
        }
        Ok(c)
    }

    pub fn has_interior(&self) -> bool {
        self.interior_point().is_ok()
    }

    /// `{s : x + s·z ∈ C}` for `x ∈ C` and nonzero `z`.
    pub fn line_interval(&self, x: &[Q], z: &[i64]) -> Result<(Q, Q)> {
        check_dim(self.dim, z.len())?;
        if !self.contains(x)? {
            return Err(Error::OutsideSet);
        }
        let (mut lo, mut hi): (Option<Q>, Option<Q>) = (None, None);
        for c in &self.constraints {
            let a = c.along(z);
            if a == 0 {
                continue;
            }
            // c(x) + a s ≥ 0
            let t = -c.eval(x) / q(a);
            if a > 0 {
                if lo.as_ref().is_none_or(|l| &t > l) {
                    lo = Some(t);
                }
            } else if hi.as_ref().is_none_or(|h| &t < h) {
                hi = Some(t);
            }
        }
        match (lo, hi) {
            (Some(l), Some(h)) => Ok((l, h)),
            _ => Err(Error::NotCompact),
        }
    }
}

/// `{z : ⟨a_s, z⟩ ≥ 0 for all s}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cone {
    pub dim: usize,
    pub constraints: Vec<Vec<i64>>,
}

impl Cone {
    pub fn contains(&self, z: &[Q]) -> Result<bool> {
        check_dim(self.dim, z.len())?;
        Ok(self.constraints.iter().all(|a| {
            let v: Q = a.iter().zip(z).map(|(ai, zi)| q(*ai) * zi).sum();
            !v.is_negative()
        }))
    }

    pub fn is_full(&self) -> bool {
        self.constraints.iter().all(|a| a.iter().all(|x| *x == 0))
    }

    /// The cone meets the unit cube in a polytope whose vertices generate it.
    fn generators(&self) -> Vec<Vec<Q>> {
        let mut rows: Vec<(Vec<Q>, Q)> =
            self.constraints.iter().map(|a| (a.iter().map(|x| q(*x)).collect(), Q::zero())).collect();
        rows.extend(TRPSet::cube(&vec![(-1, 1); self.dim]).rows());
        vertices(self.dim, &rows)
    }

    pub fn is_zero(&self) -> bool {
        self.generators().iter().all(|v| v.iter().all(Zero::is_zero))
    }

    pub fn is_subset_of(&self, other: &Cone) -> Result<bool> {
        check_dim(self.dim, other.dim)?;
        for g in self.generators() {
            if !other.contains(&g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// `x ↦ max_s λ_s(x)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyFunc {
    pub functionals: Vec<AffineFunctional>,
}

impl PolyFunc {
    pub fn new(functionals: Vec<AffineFunctional>) -> Result<Self> {
        let first = functionals.first().ok_or_else(|| Error::Invalid("empty functional list".into()))?;
        let n = first.dim();
        for f in &functionals {
            check_dim(n, f.dim())?;
        }
        Ok(PolyFunc { functionals })
    }

    pub fn dim(&self) -> usize {
        self.functionals[0].dim()
    }

    pub fn eval(&self, x: &[Q]) -> Q {
        self.functionals.iter().map(|f| f.eval(x)).max().unwrap()
    }

    /// Where `λ_j` attains the maximum inside `c`.
    pub fn region(&self, j: usize, c: &TRPSet) -> Result<TRPSet> {
        let lj = &self.functionals[j];
        let n = self.dim();
        let extra = self
            .functionals
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, lk)| AffineFunctional::combine(&[(1, lj), (-1, lk)], n));
        c.with(extra)
    }

    /// Keeps, per slope, the largest constant, then drops every functional
    /// that is not the maximum on an open subset of `c`. Sorted.
    pub fn canonical(&self, c: &TRPSet) -> Result<Self> {
        check_dim(c.dim, self.dim())?;
        let mut best: std::collections::BTreeMap<Vec<i64>, Q> = Default::default();
        for f in &self.functionals {
            let e = best.entry(f.slope.clone()).or_insert_with(|| f.constant.clone());
            if f.constant > *e {
                *e = f.constant.clone();
            }
        }
        let dedup = PolyFunc { functionals: best.into_iter().map(|(s, b)| AffineFunctional::new(s, b)).collect() };
        let mut kept = Vec::new();
        for (j, f) in dedup.functionals.iter().enumerate() {
            if dedup.region(j, c)?.has_interior() {
                kept.push(f.clone());
            }
        }
        if kept.is_empty() {
            return Err(Error::NotCompact);
        }
        Ok(PolyFunc { functionals: kept })
    }
}

/// Primitive integer vector on the ray through a nonzero rational vector.
pub fn primitive_direction(d: &[Q]) -> Option<Vec<i64>> {
    if d.iter().all(Zero::is_zero) {
        return None;
    }
    let l = d.iter().fold(BigInt::from(1), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = d.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    ints.iter().map(|x| i64::try_from(x / &g).ok()).collect()
}

pub(crate) fn gcd_vec(z: &[i64]) -> i64 {
    z.iter().fold(0i64, |acc, x| acc.gcd(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn simplex() -> TRPSet {
        TRPSet::new(
            2,
            vec![
                AffineFunctional::new(vec![1, 0], q(0)),
                AffineFunctional::new(vec![0, 1], q(0)),
                AffineFunctional::new(vec![-1, -1], q(1)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn membership_examples() {
        let sq = TRPSet::cube(&[(0, 1), (0, 1)]);
        assert!(sq.contains(&[q(0), q(0)]).unwrap());
        assert!(!sq.interior(&[q(0), q(0)]).unwrap());
        let s = simplex();
        assert!(s.interior(&[qf(1, 3), qf(1, 3)]).unwrap());
        assert!(!s.contains(&[q(2), q(0)]).unwrap());
        assert!(s.contains(&[q(1)]).is_err());
    }

    #[test]
    fn cones() {
        let sq = TRPSet::cube(&[(0, 1), (0, 1)]);
        assert!(sq.angle_cone(&[qf(1, 2), qf(1, 2)]).unwrap().is_full());
        let corner = sq.angle_cone(&[q(0), q(0)]).unwrap();
        assert_eq!(corner.constraints, vec![vec![1, 0], vec![0, 1]]);
        assert!(corner.contains(&[q(1), q(2)]).unwrap());
        assert!(!corner.contains(&[q(-1), q(2)]).unwrap());
        assert!(simplex().small_cone().is_zero());
        assert!(!corner.is_zero());
        assert_eq!(simplex().angle_cone(&[q(2), q(0)]), Err(Error::OutsideSet));
        for x in simplex().vertices() {
            let a = simplex().angle_cone(&x).unwrap();
            assert!(simplex().small_cone().is_subset_of(&a).unwrap());
        }
    }

    #[test]
    fn compactness_and_chords() {
        let half = TRPSet::new(2, vec![AffineFunctional::new(vec![1, 0], q(0))]).unwrap();
        assert!(!half.is_compact());
        assert_eq!(half.interior_point(), Err(Error::NotCompact));
        let s = simplex();
        assert_eq!(s.vertices().len(), 3);
        assert_eq!(s.interior_point().unwrap(), vec![qf(1, 3), qf(1, 3)]);
        assert_eq!(s.line_interval(&[q(0), q(0)], &[1, 1]).unwrap(), (q(0), qf(1, 2)));
        let flat =
            TRPSet::new(1, vec![AffineFunctional::new(vec![1], q(0)), AffineFunctional::new(vec![-1], q(0))]).unwrap();
        assert!(flat.is_compact());
        assert!(!flat.has_interior());
    }

    #[test]
    fn canonical_drops_dominated() {
        let sq = TRPSet::cube(&[(-1, 1), (-1, 1)]);
        let f = PolyFunc::new(vec![
            AffineFunctional::new(vec![1, 0], q(0)),
            AffineFunctional::new(vec![0, 0], q(5)),
            AffineFunctional::new(vec![1, 0], q(-1)),
        ])
        .unwrap();
        let c = f.canonical(&sq).unwrap();
        assert_eq!(c.functionals, vec![AffineFunctional::new(vec![0, 0], q(5))]);
        assert_eq!(primitive_direction(&[qf(2, 3), qf(-4, 3)]), Some(vec![1, -2]));
    }
}
