//! Exact piecewise-affine functions of one rational variable, and the
//! radius-profile machinery built on them.

mod profile;
mod verify;

pub use profile::{build_radius_profile, ProfileAxis, ProfileKind, RadiusProfile};
pub use verify::{
    decomposition_loci, swan_breaks, verify_variation, AxisClass, Locus, Mode, SwanReport, VariationReport,
};

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, midpoint, serde_q, Q};

/// The affine function `r ↦ slope·r + intercept`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Affine {
    pub slope: Q,
    pub intercept: Q,
}

impl Affine {
    pub fn new(slope: Q, intercept: Q) -> Self {
        Affine { slope, intercept }
    }

    pub fn constant(c: Q) -> Self {
        Affine::new(Q::zero(), c)
    }

    /// The affine function with the given slope passing through `(x, y)`.
    pub fn through(slope: Q, x: &Q, y: &Q) -> Self {
        let intercept = y - &slope * x;
        Affine { slope, intercept }
    }

    pub fn eval(&self, r: &Q) -> Q {
        &self.slope * r + &self.intercept
    }

    pub fn add(&self, other: &Affine) -> Affine {
        Affine::new(&self.slope + &other.slope, &self.intercept + &other.intercept)
    }

    pub fn sub(&self, other: &Affine) -> Affine {
        Affine::new(&self.slope - &other.slope, &self.intercept - &other.intercept)
    }

    pub fn scale(&self, c: &Q) -> Affine {
        Affine::new(&self.slope * c, &self.intercept * c)
    }

    pub fn neg(&self) -> Affine {
        Affine::new(-&self.slope, -&self.intercept)
    }

    /// The unique crossing point with `other`, if the slopes differ.
    pub fn crossing(&self, other: &Affine) -> Option<Q> {
        let ds = &self.slope - &other.slope;
        if ds.is_zero() {
            None
        } else {
            Some((&other.intercept - &self.intercept) / ds)
        }
    }
}

/// One cell of a piecewise-affine function.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Piece {
    #[serde(with = "serde_q")]
    pub slope: Q,
    #[serde(with = "serde_q")]
    pub value_at_left: Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    Min,
    Max,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombineOp {
    Sum,
    Min,
    Max,
}

/// A continuous piecewise-affine function on a closed rational interval.
///
/// Invariants: breakpoints lie strictly inside the domain and increase,
/// adjacent pieces agree at their common breakpoint, and no two adjacent
/// pieces share a slope. A degenerate domain `lo == hi` is allowed and
/// carries a single piece.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseAffine {
    lo: Q,
    hi: Q,
    breakpoints: Vec<Q>,
    pieces: Vec<Piece>,
}

impl PiecewiseAffine {
    pub fn affine(lo: Q, hi: Q, f: &Affine) -> Result<Self> {
        Self::from_cells(lo, hi, &[], vec![f.clone()])
    }

    pub fn constant(lo: Q, hi: Q, c: Q) -> Result<Self> {
        Self::affine(lo, hi, &Affine::constant(c))
    }

    /// Builds a function from per-cell affine pieces separated by `cuts`.
    pub fn from_cells(lo: Q, hi: Q, cuts: &[Q], affines: Vec<Affine>) -> Result<Self> {
        if lo > hi {
            return Err(Error::EmptyWindow { lo: fmt_q(&lo), hi: fmt_q(&hi) });
        }
        if affines.len() != cuts.len() + 1 {
            return Err(Error::Invalid(format!("{} pieces for {} cuts", affines.len(), cuts.len())));
        }
        let mut prev = &lo;
        for c in cuts {
            if c <= prev || c >= &hi {
                return Err(Error::Invalid(format!("cut {} outside or out of order", fmt_q(c))));
            }
            prev = c;
        }
        for (i, c) in cuts.iter().enumerate() {
            if affines[i].eval(c) != affines[i + 1].eval(c) {
                return Err(Error::Discontinuous(fmt_q(c)));
            }
        }
        let mut breakpoints = Vec::new();
        let mut kept: Vec<Affine> = vec![affines[0].clone()];
        for (i, c) in cuts.iter().enumerate() {
            let next = &affines[i + 1];
            if next.slope != kept.last().unwrap().slope {
                breakpoints.push(c.clone());
                kept.push(next.clone());
            }
        }
        let mut pieces = Vec::with_capacity(kept.len());
        for (i, a) in kept.iter().enumerate() {
            let left = if i == 0 { &lo } else { &breakpoints[i - 1] };
            pieces.push(Piece { slope: a.slope.clone(), value_at_left: a.eval(left) });
        }
        Ok(PiecewiseAffine { lo, hi, breakpoints, pieces })
    }

    /// Builds from serialized parts, validating continuity and canonical form.
    pub fn from_parts(lo: Q, hi: Q, breakpoints: Vec<Q>, pieces: Vec<Piece>) -> Result<Self> {
        if pieces.len() != breakpoints.len() + 1 {
            return Err(Error::Invalid("piece count must be breakpoint count + 1".into()));
        }
        let affines = pieces
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let left = if i == 0 { &lo } else { &breakpoints[i - 1] };
                Affine::through(p.slope.clone(), left, &p.value_at_left)
            })
            .collect();
        Self::from_cells(lo, hi, &breakpoints, affines)
    }

    /// Lower (`Min`) or upper (`Max`) envelope of finitely many affine functions.
    pub fn envelope(lo: Q, hi: Q, lines: &[Affine], which: Envelope) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::Invalid("envelope of no functions".into()));
        }
        let mut cuts: Vec<Q> = Vec::new();
        for (i, a) in lines.iter().enumerate() {
            for b in &lines[i + 1..] {
                if let Some(x) = a.crossing(b) {
                    if x > lo && x < hi {
                        cuts.push(x);
                    }
                }
            }
        }
        cuts.sort();
        cuts.dedup();
        let affines = cells_of(&lo, &hi, &cuts)
            .into_iter()
            .map(|(a, b)| {
                let m = midpoint(&a, &b);
                pick(lines, &m, which).clone()
            })
            .collect();
        Self::from_cells(lo, hi, &cuts, affines)
    }

    pub fn lo(&self) -> &Q {
        &self.lo
    }

    pub fn hi(&self) -> &Q {
        &self.hi
    }

    pub fn breakpoints(&self) -> &[Q] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    pub fn is_affine(&self) -> bool {
        self.breakpoints.is_empty()
    }

    pub fn contains(&self, r: &Q) -> bool {
        r >= &self.lo && r <= &self.hi
    }

    pub fn affine_pieces(&self) -> Vec<Affine> {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| Affine::through(p.slope.clone(), self.cell_left(i), &p.value_at_left))
            .collect()
    }

    fn cell_left(&self, i: usize) -> &Q {
        if i == 0 {
            &self.lo
        } else {
            &self.breakpoints[i - 1]
        }
    }

    /// `(left, right, affine)` for each cell.
    pub fn cells(&self) -> Vec<(Q, Q, Affine)> {
        let bounds = cells_of(&self.lo, &self.hi, &self.breakpoints);
        bounds.into_iter().zip(self.affine_pieces()).map(|((a, b), f)| (a, b, f)).collect()
    }

    fn index_right_of(&self, r: &Q) -> usize {
        // cell whose half-open range [left, right) contains r
        self.breakpoints.partition_point(|b| b <= r)
    }

    fn index_left_of(&self, r: &Q) -> usize {
        // cell whose range (left, right] contains r
        self.breakpoints.partition_point(|b| b < r)
    }

    pub fn eval(&self, r: &Q) -> Q {
        let i = self.index_right_of(r).min(self.pieces.len() - 1);
        let p = &self.pieces[i];
        &p.value_at_left + &p.slope * (r - self.cell_left(i))
    }

    /// The affine piece governing a right neighbourhood of `r`.
    pub fn affine_right_of(&self, r: &Q) -> Affine {
        let i = self.index_right_of(r).min(self.pieces.len() - 1);
        self.affine_pieces().swap_remove(i)
    }

    /// The affine piece governing a left neighbourhood of `r`.
    pub fn affine_left_of(&self, r: &Q) -> Affine {
        let i = self.index_left_of(r).min(self.pieces.len() - 1);
        self.affine_pieces().swap_remove(i)
    }

    pub fn slope_right_of(&self, r: &Q) -> Q {
        self.affine_right_of(r).slope
    }

    pub fn slope_left_of(&self, r: &Q) -> Q {
        self.affine_left_of(r).slope
    }

    pub fn same_domain(&self, other: &Self) -> bool {
        self.lo == other.lo && self.hi == other.hi
    }

    /// Rewrites the function on the refinement given by `cuts` (which must
    /// contain all breakpoints); returns the affine piece of each refined cell.
    pub fn refined_affines(&self, cuts: &[Q]) -> Vec<Affine> {
        let pieces = self.affine_pieces();
        cells_of(&self.lo, &self.hi, cuts)
            .into_iter()
            .map(|(a, b)| {
                let m = midpoint(&a, &b);
                let i = self.index_right_of(&m).min(pieces.len() - 1);
                pieces[i].clone()
            })
            .collect()
    }

    pub fn combine(op: CombineOp, f: &Self, g: &Self) -> Result<Self> {
        if !f.same_domain(g) {
            return Err(Error::DomainMismatch);
        }
        let mut cuts = merge_cuts(&[f.breakpoints(), g.breakpoints()]);
        let fa = f.refined_affines(&cuts);
        let ga = g.refined_affines(&cuts);
        if op != CombineOp::Sum {
            let cells = cells_of(&f.lo, &f.hi, &cuts);
            let mut extra = Vec::new();
            for ((a, b), (x, y)) in cells.iter().zip(fa.iter().zip(ga.iter())) {
                if let Some(c) = x.crossing(y) {
                    if &c > a && &c < b {
                        extra.push(c);
                    }
                }
            }
            if !extra.is_empty() {
                extra.extend(cuts);
                cuts = merge_cuts(&[&extra]);
            }
        }
        let fa = f.refined_affines(&cuts);
        let ga = g.refined_affines(&cuts);
        let cells = cells_of(&f.lo, &f.hi, &cuts);
        let out = cells
            .iter()
            .zip(fa.iter().zip(ga.iter()))
            .map(|((a, b), (x, y))| match op {
                CombineOp::Sum => x.add(y),
                CombineOp::Min | CombineOp::Max => {
                    let m = midpoint(a, b);
                    let lt = x.eval(&m) < y.eval(&m);
                    let pick_x = if op == CombineOp::Min { lt } else { !lt };
                    if pick_x {
                        x.clone()
                    } else {
                        y.clone()
                    }
                }
            })
            .collect();
        Self::from_cells(f.lo.clone(), f.hi.clone(), &cuts, out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Self::combine(CombineOp::Sum, self, other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::combine(CombineOp::Sum, self, &other.neg())
    }

    pub fn min(&self, other: &Self) -> Result<Self> {
        Self::combine(CombineOp::Min, self, other)
    }

    pub fn max(&self, other: &Self) -> Result<Self> {
        Self::combine(CombineOp::Max, self, other)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Q::from_integer(1.into()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let affines = self.affine_pieces().iter().map(|a| a.scale(c)).collect();
        Self::from_cells(self.lo.clone(), self.hi.clone(), &self.breakpoints, affines)
            .expect("scaling preserves continuity")
    }

    pub fn add_affine(&self, a: &Affine) -> Self {
        let affines = self.affine_pieces().iter().map(|p| p.add(a)).collect();
        Self::from_cells(self.lo.clone(), self.hi.clone(), &self.breakpoints, affines)
            .expect("adding an affine function preserves continuity")
    }

    /// `τ ↦ self(offset + factor·τ)` on the preimage of the domain.
    pub fn reparametrize(&self, offset: &Q, factor: &Q) -> Result<Self> {
        if factor.is_zero() {
            return Err(Error::Invalid("zero reparametrization factor".into()));
        }
        let map = |r: &Q| (r - offset) / factor;
        let mut cuts: Vec<Q> = self.breakpoints.iter().map(map).collect();
        let mut affines: Vec<Affine> =
            self.affine_pieces().iter().map(|a| Affine::new(&a.slope * factor, a.eval(offset))).collect();
        let (mut lo, mut hi) = (map(&self.lo), map(&self.hi));
        if factor.is_negative() {
            cuts.reverse();
            affines.reverse();
            std::mem::swap(&mut lo, &mut hi);
        }
        Self::from_cells(lo, hi, &cuts, affines)
    }

    pub fn restrict(&self, lo: &Q, hi: &Q) -> Result<Self> {
        if lo < &self.lo || hi > &self.hi || lo > hi {
            return Err(Error::DomainMismatch);
        }
        let pieces = self.affine_pieces();
        let mut cuts = Vec::new();
        let mut affines = vec![self.affine_right_of(lo)];
        for (i, b) in self.breakpoints.iter().enumerate() {
            if b > lo && b < hi {
                cuts.push(b.clone());
                affines.push(pieces[i + 1].clone());
            }
        }
        Self::from_cells(lo.clone(), hi.clone(), &cuts, affines)
    }

    pub fn is_convex(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].slope <= w[1].slope)
    }

    pub fn is_concave(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].slope >= w[1].slope)
    }

    pub fn min_value(&self) -> Q {
        let mut pts = vec![self.lo.clone(), self.hi.clone()];
        pts.extend(self.breakpoints.iter().cloned());
        pts.iter().map(|r| self.eval(r)).min().unwrap()
    }
}

fn pick<'a>(lines: &'a [Affine], at: &Q, which: Envelope) -> &'a Affine {
    let key = |a: &&Affine| a.eval(at);
    match which {
        Envelope::Min => lines.iter().min_by_key(key).unwrap(),
        Envelope::Max => lines.iter().max_by_key(key).unwrap(),
    }
}

/// Consecutive `(left, right)` pairs of the subdivision of `[lo, hi]` by `cuts`.
pub fn cells_of(lo: &Q, hi: &Q, cuts: &[Q]) -> Vec<(Q, Q)> {
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut left = lo.clone();
    for c in cuts {
        out.push((left, c.clone()));
        left = c.clone();
    }
    out.push((left, hi.clone()));
    out
}

/// Sorted, deduplicated union of several cut lists.
pub fn merge_cuts(lists: &[&[Q]]) -> Vec<Q> {
    let mut all: Vec<Q> = lists.iter().flat_map(|l| l.iter().cloned()).collect();
    all.sort();
    all.dedup();
    all
}

/// Pointwise sort of functions on a common domain: output `k` is the
/// `k`-th largest (`descending`) or smallest value at every point.
pub fn pointwise_sorted(fs: &[PiecewiseAffine], descending: bool) -> Result<Vec<PiecewiseAffine>> {
    if fs.is_empty() {
        return Ok(Vec::new());
    }
    let (lo, hi) = (fs[0].lo.clone(), fs[0].hi.clone());
    if fs.iter().any(|f| !f.same_domain(&fs[0])) {
        return Err(Error::DomainMismatch);
    }
    let base: Vec<&[Q]> = fs.iter().map(|f| f.breakpoints()).collect();
    let base_cuts = merge_cuts(&base);
    let refined: Vec<Vec<Affine>> = fs.iter().map(|f| f.refined_affines(&base_cuts)).collect();
    let mut cuts = base_cuts.clone();
    for (ci, (a, b)) in cells_of(&lo, &hi, &base_cuts).iter().enumerate() {
        for i in 0..fs.len() {
            for j in i + 1..fs.len() {
                if let Some(c) = refined[i][ci].crossing(&refined[j][ci]) {
                    if &c > a && &c < b {
                        cuts.push(c);
                    }
                }
            }
        }
    }
    let cuts = merge_cuts(&[&cuts]);
    let refined: Vec<Vec<Affine>> = fs.iter().map(|f| f.refined_affines(&cuts)).collect();
    let cells = cells_of(&lo, &hi, &cuts);
    let mut columns: Vec<Vec<Affine>> = vec![Vec::with_capacity(cells.len()); fs.len()];
    for (ci, (a, b)) in cells.iter().enumerate() {
        let m = midpoint(a, b);
        let mut here: Vec<&Affine> = refined.iter().map(|r| &r[ci]).collect();
        here.sort_by(|x, y| {
            let o = x.eval(&m).cmp(&y.eval(&m));
            if descending {
                o.reverse()
            } else {
                o
            }
        });
        for (k, a) in here.into_iter().enumerate() {
            columns[k].push(a.clone());
        }
    }
    columns.into_iter().map(|col| PiecewiseAffine::from_cells(lo.clone(), hi.clone(), &cuts, col)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn line(s: i64, b: i64) -> Affine {
        Affine::new(q(s), q(b))
    }

    #[test]
    fn sum_with_zero_is_identity() {
        let f = PiecewiseAffine::envelope(q(0), q(2), &[line(1, 0), line(0, 1)], Envelope::Min).unwrap();
        let z = PiecewiseAffine::constant(q(0), q(2), q(0)).unwrap();
        assert_eq!(f.add(&z).unwrap(), f);
    }

    #[test]
    fn min_of_r_and_one() {
        let r = PiecewiseAffine::affine(q(0), q(2), &line(1, 0)).unwrap();
        let one = PiecewiseAffine::constant(q(0), q(2), q(1)).unwrap();
        let m = r.min(&one).unwrap();
        assert_eq!(m.breakpoints(), &[q(1)]);
        assert_eq!(m.pieces()[0].slope, q(1));
        assert_eq!(m.pieces()[1].slope, q(0));
        assert!(m.is_concave());
    }

    #[test]
    fn max_of_crossing_lines() {
        let a = PiecewiseAffine::affine(q(0), q(2), &line(1, 0)).unwrap();
        let b = PiecewiseAffine::affine(q(0), q(2), &line(-1, 2)).unwrap();
        let m = a.max(&b).unwrap();
        assert_eq!(m.eval(&q(0)), q(2));
        assert_eq!(m.eval(&q(1)), q(1));
        assert_eq!(m.eval(&q(2)), q(2));
        assert_eq!(m.breakpoints(), &[q(1)]);
        assert!(m.is_convex());
    }

    #[test]
    fn discontinuity_rejected() {
        let err = PiecewiseAffine::from_cells(q(0), q(2), &[q(1)], vec![line(0, 0), line(0, 1)]);
        assert!(matches!(err, Err(Error::Discontinuous(_))));
    }

    #[test]
    fn canonical_merges_equal_slopes() {
        let f = PiecewiseAffine::from_cells(q(0), q(2), &[q(1)], vec![line(2, 1), line(2, 1)]).unwrap();
        assert!(f.is_affine());
    }

    #[test]
    fn reparametrize_reverses() {
        let f = PiecewiseAffine::envelope(q(0), q(2), &[line(1, 0), line(0, 1)], Envelope::Min).unwrap();
        let g = f.reparametrize(&q(2), &q(-1)).unwrap();
        assert_eq!(g.lo(), &q(0));
        assert_eq!(g.hi(), &q(2));
        for k in 0..=8 {
            let t = qf(k, 4);
            assert_eq!(g.eval(&t), f.eval(&(q(2) - &t)));
        }
    }

    #[test]
    fn pointwise_sort_of_crossing_lines() {
        let a = PiecewiseAffine::affine(q(0), q(2), &line(1, 0)).unwrap();
        let b = PiecewiseAffine::affine(q(0), q(2), &line(-1, 2)).unwrap();
        let s = pointwise_sorted(&[a.clone(), b.clone()], true).unwrap();
        assert_eq!(s[0], a.max(&b).unwrap());
        assert_eq!(s[1], a.min(&b).unwrap());
    }

    #[test]
    fn degenerate_domain() {
        let f = PiecewiseAffine::envelope(q(1), q(1), &[line(1, 0), line(0, 1)], Envelope::Min).unwrap();
        assert_eq!(f.eval(&q(1)), q(1));
    }
}
