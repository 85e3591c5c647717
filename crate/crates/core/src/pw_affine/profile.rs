//! Exact subsidiary-radius profiles over an annulus.

use num::{BigInt, Zero};
use serde::Serialize;

use super::{cells_of, merge_cuts, Affine, PiecewiseAffine};
use crate::error::{Error, Result};
use crate::module::{cyclic_vector, DiffModule, Matrix};
use crate::rational::{fmt_q, midpoint, Q};
use crate::valued::{Axis, ValuationConfig};

/// Which radii a profile tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ProfileKind {
    /// Extrinsic radii of one derivation.
    Derivation(Axis),
    /// Intrinsic radii of all derivations together.
    Intrinsic,
}

/// The varied coordinate: the geometric index `k`, with `r_k` running over the window.
pub type ProfileAxis = usize;

/// One function with the closed intervals where it sits at the visibility cap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Track {
    pub f: PiecewiseAffine,
    pub capped: Vec<(Q, Q)>,
}

impl Track {
    fn exact(f: PiecewiseAffine) -> Self {
        Track { f, capped: Vec::new() }
    }

    fn capped_at(&self, x: &Q) -> bool {
        self.capped.iter().any(|(a, b)| a <= x && x <= b)
    }
}

/// Cuts refining every track's breakpoints, cap boundaries and mutual crossings.
fn common_cuts(lo: &Q, hi: &Q, tracks: &[Track]) -> Vec<Q> {
    let mut base: Vec<Q> = tracks.iter().flat_map(|t| t.f.breakpoints().iter().cloned()).collect();
    for t in tracks {
        for (a, b) in &t.capped {
            base.push(a.clone());
            base.push(b.clone());
        }
    }
    base.retain(|x| x > lo && x < hi);
    let base = merge_cuts(&[&base]);
    let refined: Vec<Vec<Affine>> = tracks.iter().map(|t| t.f.refined_affines(&base)).collect();
    let mut cuts = base.clone();
    for (ci, (a, b)) in cells_of(lo, hi, &base).iter().enumerate() {
        for i in 0..tracks.len() {
            for j in i + 1..tracks.len() {
                if let Some(c) = refined[i][ci].crossing(&refined[j][ci]) {
                    if &c > a && &c < b {
                        cuts.push(c);
                    }
                }
            }
        }
    }
    merge_cuts(&[&cuts])
}

/// Per cell, the `(affine, capped)` data of every track.
fn cell_data(lo: &Q, hi: &Q, cuts: &[Q], tracks: &[Track]) -> Vec<Vec<(Affine, bool)>> {
    let refined: Vec<Vec<Affine>> = tracks.iter().map(|t| t.f.refined_affines(cuts)).collect();
    cells_of(lo, hi, cuts)
        .iter()
        .enumerate()
        .map(|(ci, (a, b))| {
            let m = midpoint(a, b);
            tracks.iter().zip(&refined).map(|(t, r)| (r[ci].clone(), t.capped_at(&m))).collect()
        })
        .collect()
}

fn intervals_of(cells: &[(Q, Q)], flags: &[bool]) -> Vec<(Q, Q)> {
    let mut out: Vec<(Q, Q)> = Vec::new();
    for ((a, b), &on) in cells.iter().zip(flags) {
        if !on {
            continue;
        }
        match out.last_mut() {
            Some(last) if &last.1 == a => last.1 = b.clone(),
            _ => out.push((a.clone(), b.clone())),
        }
    }
    out
}

fn assemble(lo: &Q, hi: &Q, cuts: &[Q], per_cell: Vec<Vec<(Affine, bool)>>) -> Result<Vec<Track>> {
    let n = per_cell.first().map_or(0, Vec::len);
    let cells = cells_of(lo, hi, cuts);
    (0..n)
        .map(|j| {
            let affs: Vec<Affine> = per_cell.iter().map(|c| c[j].0.clone()).collect();
            let flags: Vec<bool> = per_cell.iter().map(|c| c[j].1).collect();
            Ok(Track {
                f: PiecewiseAffine::from_cells(lo.clone(), hi.clone(), cuts, affs)?,
                capped: intervals_of(&cells, &flags),
            })
        })
        .collect()
}

/// Pointwise decreasing order; at equal values exact entries come first.
pub(crate) fn sort_tracks(lo: &Q, hi: &Q, tracks: &[Track]) -> Result<Vec<Track>> {
    if tracks.is_empty() {
        return Ok(Vec::new());
    }
    let cuts = common_cuts(lo, hi, tracks);
    let cells = cells_of(lo, hi, &cuts);
    let mut data = cell_data(lo, hi, &cuts, tracks);
    for (cell, (a, b)) in data.iter_mut().zip(&cells) {
        let m = midpoint(a, b);
        cell.sort_by(|x, y| y.0.eval(&m).cmp(&x.0.eval(&m)).then(x.1.cmp(&y.1)));
    }
    assemble(lo, hi, &cuts, data)
}

/// Pointwise maximum; the result is capped only where every maximizer is.
pub(crate) fn max_tracks(lo: &Q, hi: &Q, tracks: &[Track]) -> Result<Track> {
    let cuts = common_cuts(lo, hi, tracks);
    let cells = cells_of(lo, hi, &cuts);
    let data = cell_data(lo, hi, &cuts, tracks);
    let picked: Vec<Vec<(Affine, bool)>> = data
        .into_iter()
        .zip(&cells)
        .map(|(cell, (a, b))| {
            let m = midpoint(a, b);
            let best = cell.iter().map(|(f, _)| f.eval(&m)).max().unwrap();
            let top: Vec<&(Affine, bool)> = cell.iter().filter(|(f, _)| f.eval(&m) == best).collect();
            let exact = top.iter().find(|(_, c)| !c);
            vec![(*exact.unwrap_or(&top[0])).clone()]
        })
        .collect();
    Ok(assemble(lo, hi, &cuts, picked)?.remove(0))
}

fn weight_function(
    cfg: &ValuationConfig,
    axis: Axis,
    var: usize,
    lo: &Q,
    hi: &Q,
    frozen: &[Q],
) -> Result<PiecewiseAffine> {
    if axis == Axis::Geom(var) {
        PiecewiseAffine::affine(lo.clone(), hi.clone(), &Affine::new(Q::from_integer(BigInt::from(1)), Q::zero()))
    } else {
        PiecewiseAffine::constant(lo.clone(), hi.clone(), cfg.axis_weight(axis, frozen))
    }
}

/// Extrinsic radii of one derivation as `r_var` varies, decreasing.
pub(crate) fn extrinsic_tracks(
    m: &DiffModule,
    axis: Axis,
    var: usize,
    lo: &Q,
    hi: &Q,
    frozen: &[Q],
) -> Result<Vec<Track>> {
    let cfg = m.config();
    let cv = cyclic_vector(m, axis)?;
    let sf = cv.charpoly.slope_functions(cfg, Axis::Geom(var), lo, hi, frozen)?;
    let w = weight_function(cfg, axis, var, lo, hi, frozen)?;
    let omega = Affine::constant(cfg.omega());
    let mut tracks = Vec::with_capacity(m.rank());
    for s in sf.sigma.iter().rev() {
        let top = s.max(&w)?;
        let cuts = merge_cuts(&[top.breakpoints(), s.breakpoints()]);
        let cells = cells_of(lo, hi, &cuts);
        let flags: Vec<bool> = cells
            .iter()
            .map(|(a, b)| {
                let x = midpoint(a, b);
                s.eval(&x) <= w.eval(&x)
            })
            .collect();
        tracks.push(Track { f: top.add_affine(&omega), capped: intervals_of(&cells, &flags) });
    }
    while tracks.len() < m.rank() {
        tracks.push(Track { f: w.add_affine(&omega), capped: vec![(lo.clone(), hi.clone())] });
    }
    Ok(tracks)
}

fn intrinsic_axis_tracks(m: &DiffModule, axis: Axis, var: usize, lo: &Q, hi: &Q, frozen: &[Q]) -> Result<Vec<Track>> {
    if m.matrix(axis)?.is_zero() {
        let zero = PiecewiseAffine::constant(lo.clone(), hi.clone(), Q::zero())?;
        return Ok(vec![Track::exact(zero); m.rank()]);
    }
    let w = weight_function(m.config(), axis, var, lo, hi, frozen)?;
    extrinsic_tracks(m, axis, var, lo, hi, frozen)?
        .into_iter()
        .map(|t| Ok(Track { f: t.f.sub(&w)?, capped: t.capped }))
        .collect()
}

fn block_module(m: &DiffModule, block: &[usize]) -> Result<DiffModule> {
    let matrices = m.matrices().iter().map(|(a, n)| (*a, n.select(block, block))).collect();
    DiffModule::new(m.config().clone(), block.len(), matrices)
}

/// Intrinsic radii: blocks of a common block-diagonal shape are treated
/// separately; within a block the per-derivation lists are combined by
/// pointwise maximum (smallest intrinsic radius).
pub(crate) fn intrinsic_tracks(m: &DiffModule, var: usize, lo: &Q, hi: &Q, frozen: &[Q]) -> Result<Vec<Track>> {
    let mats: Vec<&Matrix> = m.matrices().values().collect();
    let mut all = Vec::with_capacity(m.rank());
    for block in Matrix::common_blocks(&mats, m.rank()) {
        let sub = block_module(m, &block)?;
        let per_axis: Vec<Vec<Track>> = sub
            .axes()
            .into_iter()
            .map(|a| intrinsic_axis_tracks(&sub, a, var, lo, hi, frozen))
            .collect::<Result<_>>()?;
        for i in 0..block.len() {
            let column: Vec<Track> = per_axis.iter().map(|ts| ts[i].clone()).collect();
            all.push(max_tracks(lo, hi, &column)?);
        }
    }
    Ok(all)
}

pub(crate) fn partial_sums(fs: &[PiecewiseAffine]) -> Result<Vec<PiecewiseAffine>> {
    let mut out: Vec<PiecewiseAffine> = Vec::with_capacity(fs.len());
    for g in fs {
        let next = match out.last() {
            None => g.clone(),
            Some(prev) => prev.add(g)?,
        };
        out.push(next);
    }
    Ok(out)
}

/// `f_1 ≥ … ≥ f_d` in log units with partial sums `F_i`, exact on every
/// cell, with cap flags per cell and index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RadiusProfile {
    pub kind: ProfileKind,
    pub var: ProfileAxis,
    pub cfg: ValuationConfig,
    lo: Q,
    hi: Q,
    f: Vec<PiecewiseAffine>,
    big_f: Vec<PiecewiseAffine>,
    cuts: Vec<Q>,
    /// `capped[cell][i]` for `f_{i+1}`.
    capped: Vec<Vec<bool>>,
}

impl RadiusProfile {
    /// From explicit functions (listed `f_1, f_2, …`) and per-function capped intervals.
    pub fn new(
        kind: ProfileKind,
        var: ProfileAxis,
        cfg: ValuationConfig,
        f: Vec<PiecewiseAffine>,
        capped: Vec<Vec<(Q, Q)>>,
    ) -> Result<Self> {
        let first = f.first().ok_or_else(|| Error::Invalid("profile of rank 0".into()))?;
        let (lo, hi) = (first.lo().clone(), first.hi().clone());
        if f.iter().any(|g| !g.same_domain(first)) {
            return Err(Error::DomainMismatch);
        }
        if capped.len() != f.len() {
            return Err(Error::Dimension { expected: f.len(), got: capped.len() });
        }
        let tracks: Vec<Track> = f.into_iter().zip(capped).map(|(f, capped)| Track { f, capped }).collect();
        Self::from_tracks(kind, var, cfg, &lo, &hi, tracks)
    }

    fn from_tracks(
        kind: ProfileKind,
        var: ProfileAxis,
        cfg: ValuationConfig,
        lo: &Q,
        hi: &Q,
        tracks: Vec<Track>,
    ) -> Result<Self> {
        let mut cuts: Vec<Q> = tracks.iter().flat_map(|t| t.f.breakpoints().iter().cloned()).collect();
        for t in &tracks {
            for (a, b) in &t.capped {
                cuts.push(a.clone());
                cuts.push(b.clone());
            }
        }
        cuts.retain(|x| x > lo && x < hi);
        let cuts = merge_cuts(&[&cuts]);
        let capped = cells_of(lo, hi, &cuts)
            .iter()
            .map(|(a, b)| {
                let m = midpoint(a, b);
                tracks.iter().map(|t| t.capped_at(&m)).collect()
            })
            .collect();
        let f: Vec<PiecewiseAffine> = tracks.into_iter().map(|t| t.f).collect();
        let big_f = partial_sums(&f)?;
        Ok(RadiusProfile { kind, var, cfg, lo: lo.clone(), hi: hi.clone(), f, big_f, cuts, capped })
    }

    pub fn lo(&self) -> &Q {
        &self.lo
    }

    pub fn hi(&self) -> &Q {
        &self.hi
    }

    pub fn rank(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self) -> &[PiecewiseAffine] {
        &self.f
    }

    pub fn big_f(&self) -> &[PiecewiseAffine] {
        &self.big_f
    }

    /// Interior cell boundaries common to every `f_i`, `F_i` and cap flag.
    pub fn cuts(&self) -> &[Q] {
        &self.cuts
    }

    pub fn cells(&self) -> Vec<(Q, Q)> {
        cells_of(&self.lo, &self.hi, &self.cuts)
    }

    /// `f_{i+1}` on `cell` is a cap bound.
    pub fn is_capped(&self, cell: usize, i: usize) -> bool {
        self.capped[cell][i]
    }

    /// `F_{i+1}` on `cell` involves a capped entry.
    pub fn big_f_capped(&self, cell: usize, i: usize) -> bool {
        self.capped[cell][..=i].iter().any(|&c| c)
    }

    pub fn any_capped(&self) -> bool {
        self.capped.iter().flatten().any(|&c| c)
    }

    /// Index of the cell containing `r` (right-continuous except at `hi`).
    pub fn cell_of(&self, r: &Q) -> usize {
        self.cuts.partition_point(|c| c <= r).min(self.cuts.len())
    }

    /// `(f_i(r), capped)` for every `i`.
    pub fn eval(&self, r: &Q) -> Vec<(Q, bool)> {
        let c = self.cell_of(r);
        self.f.iter().enumerate().map(|(i, g)| (g.eval(r), self.capped[c][i])).collect()
    }

    /// The same profile in the coordinate `τ = r − offset`.
    pub fn shifted(&self, offset: &Q) -> Result<Self> {
        let one = Q::from_integer(BigInt::from(1));
        let f = self.f.iter().map(|g| g.reparametrize(offset, &one)).collect::<Result<Vec<_>>>()?;
        let cells: Vec<(Q, Q)> = self.cells().into_iter().map(|(a, b)| (a - offset, b - offset)).collect();
        let capped = (0..self.rank())
            .map(|i| {
                let flags: Vec<bool> = self.capped.iter().map(|c| c[i]).collect();
                intervals_of(&cells, &flags)
            })
            .collect();
        Self::new(self.kind, self.var, self.cfg.clone(), f, capped)
    }

    /// `r_left, r_right, slope_i…, value_i…, capped_i…` with values at `r_left`.
    pub fn to_csv(&self) -> String {
        let d = self.rank();
        let mut head = vec!["r_left".to_string(), "r_right".to_string()];
        head.extend((1..=d).map(|i| format!("slope_{i}")));
        head.extend((1..=d).map(|i| format!("value_{i}")));
        head.extend((1..=d).map(|i| format!("capped_{i}")));
        let mut out = head.join(",");
        out.push('\n');
        for (ci, (a, b)) in self.cells().iter().enumerate() {
            let m = midpoint(a, b);
            let mut row = vec![fmt_q(a), fmt_q(b)];
            row.extend(self.f.iter().map(|g| fmt_q(&g.slope_right_of(&m))));
            row.extend(self.f.iter().map(|g| fmt_q(&g.eval(a))));
            row.extend(self.capped[ci].iter().map(|c| c.to_string()));
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let kind = match self.kind {
            ProfileKind::Derivation(a) => a.to_string(),
            ProfileKind::Intrinsic => "intrinsic".to_string(),
        };
        let cells: Vec<serde_json::Value> = self
            .cells()
            .iter()
            .enumerate()
            .map(|(ci, (a, b))| {
                let m = midpoint(a, b);
                serde_json::json!({
                    "r_left": fmt_q(a),
                    "r_right": fmt_q(b),
                    "slopes": self.f.iter().map(|g| fmt_q(&g.slope_right_of(&m))).collect::<Vec<_>>(),
                    "values": self.f.iter().map(|g| fmt_q(&g.eval(a))).collect::<Vec<_>>(),
                    "capped": self.capped[ci],
                })
            })
            .collect();
        serde_json::json!({
            "kind": kind,
            "var": format!("t{}", self.var + 1),
            "lo": fmt_q(&self.lo),
            "hi": fmt_q(&self.hi),
            "cells": cells,
        })
    }
}

/// Exact profile of `M` along `r_var ∈ [lo, hi]`, other radii from `frozen`
/// (its entry at `var` is ignored).
pub fn build_radius_profile(
    m: &DiffModule,
    kind: ProfileKind,
    var: ProfileAxis,
    lo: &Q,
    hi: &Q,
    frozen: &[Q],
) -> Result<RadiusProfile> {
    let cfg = m.config();
    if lo >= hi {
        return Err(Error::EmptyWindow { lo: fmt_q(lo), hi: fmt_q(hi) });
    }
    cfg.check_axis(Axis::Geom(var))?;
    cfg.check_radius(frozen)?;
    let tracks = match kind {
        ProfileKind::Derivation(axis) => {
            m.matrix(axis)?;
            extrinsic_tracks(m, axis, var, lo, hi, frozen)?
        }
        ProfileKind::Intrinsic => intrinsic_tracks(m, var, lo, hi, frozen)?,
    };
    let sorted = sort_tracks(lo, hi, &tracks)?;
    RadiusProfile::from_tracks(kind, var, cfg.clone(), lo, hi, sorted)
}
