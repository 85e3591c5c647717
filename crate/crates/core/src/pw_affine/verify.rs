//! Verifier suites on exact profiles: variation clauses, decomposition loci
//! and Swan breaks.

use num::{BigInt, One, Signed, Zero};
use serde::Serialize;

use super::profile::ProfileKind;
use super::RadiusProfile;
use crate::error::{Error, Result};
use crate::rational::{fmt_q, in_fractional_lattice, midpoint, serde_q, Q};
use crate::report::{CheckStatus, ClauseResult, Report, Witness};
use crate::valued::Axis;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Disc,
    Annulus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisClass {
    Geometric,
    Base,
    Intrinsic,
}

pub type VariationReport = Report;

const MAX_LEVEL: u32 = 64;

/// Least `n ≥ 0` with `value > 1/(p^n (p−1)) + w`; `Some(0)` when `p = 0`.
fn base_level(value: &Q, p: u32, w: &Q) -> Option<u32> {
    if p == 0 {
        return Some(0);
    }
    let pm1 = Q::from_integer(BigInt::from(p - 1));
    (0..=MAX_LEVEL).find(|&n| {
        let pn = Q::from_integer(BigInt::from(p).pow(n));
        value > &(Q::one() / (pn * &pm1) + w)
    })
}

fn scale_by_p_power(x: &Q, p: u32, n: u32) -> Q {
    x * Q::from_integer(BigInt::from(p).pow(n))
}

struct Ctx<'a> {
    prof: &'a RadiusProfile,
    cells: Vec<(Q, Q)>,
    class: AxisClass,
    p: u32,
    w: Q,
}

impl Ctx<'_> {
    fn d(&self) -> usize {
        self.prof.rank()
    }

    fn value(&self, i: usize, x: &Q) -> Q {
        self.prof.f()[i].eval(x)
    }

    /// `f_i > f_{i+1}` at `x`, or `i` is last; a visible entry over a capped one counts.
    fn separated(&self, i: usize, x: &Q, cell: usize) -> bool {
        if i + 1 == self.d() {
            return true;
        }
        let (a, b) = (self.value(i, x), self.value(i + 1, x));
        a > b || (!self.prof.is_capped(cell, i) && self.prof.is_capped(cell, i + 1))
    }

    /// Lattice exponent for slopes at a point where `f_i` has the given value.
    fn level(&self, value: &Q) -> Option<u32> {
        match self.class {
            AxisClass::Base => base_level(value, self.p, &self.w),
            _ => Some(0),
        }
    }
}

fn continuity(ctx: &Ctx) -> ClauseResult {
    let mut fails = Vec::new();
    for (i, g) in ctx.prof.f().iter().chain(ctx.prof.big_f()).enumerate() {
        for b in g.breakpoints() {
            if g.affine_left_of(b).eval(b) != g.affine_right_of(b).eval(b) {
                fails.push(Witness::new(b, b, Some(i % ctx.d() + 1), "jump"));
            }
        }
    }
    ClauseResult::from_failures("continuity", fails)
}

fn ordering(ctx: &Ctx) -> ClauseResult {
    let mut fails = Vec::new();
    for (a, b) in &ctx.cells {
        let m = midpoint(a, b);
        for i in 0..ctx.d().saturating_sub(1) {
            for x in [a, &m, b] {
                if ctx.value(i, x) < ctx.value(i + 1, x) {
                    fails.push(Witness::new(a, b, Some(i + 1), format!("f_{} < f_{} at {}", i + 1, i + 2, fmt_q(x))));
                    break;
                }
            }
        }
    }
    ClauseResult::from_failures("ordering", fails)
}

fn with_skips(mut c: ClauseResult, skipped: usize) -> ClauseResult {
    if skipped > 0 && c.status == CheckStatus::Pass && c.witnesses.is_empty() {
        c.witnesses.push(Witness {
            lo: String::new(),
            hi: String::new(),
            index: None,
            detail: format!("{skipped} capped cell entries not evaluated"),
        });
    }
    c
}

fn convexity(ctx: &Ctx) -> ClauseResult {
    let mut fails = Vec::new();
    let mut skipped = 0;
    let cuts = ctx.prof.cuts();
    for i in 0..ctx.d() {
        let g = &ctx.prof.big_f()[i];
        for (k, c) in cuts.iter().enumerate() {
            if ctx.prof.big_f_capped(k, i) || ctx.prof.big_f_capped(k + 1, i) {
                skipped += 1;
                continue;
            }
            if g.slope_left_of(c) > g.slope_right_of(c) {
                fails.push(Witness::new(c, c, Some(i + 1), format!("F_{} slope decreases", i + 1)));
            }
        }
    }
    with_skips(ClauseResult::from_failures("convexity", fails), skipped)
}

fn integrality(ctx: &Ctx) -> ClauseResult {
    let mut fails = Vec::new();
    let mut skipped = 0;
    let cuts = ctx.prof.cuts();
    // probes: each cell midpoint checks its own cell, each cut checks both neighbours
    let mut probes: Vec<(Q, Vec<usize>)> = Vec::new();
    for (ci, (a, b)) in ctx.cells.iter().enumerate() {
        probes.push((midpoint(a, b), vec![ci]));
        if ci < cuts.len() {
            probes.push((b.clone(), vec![ci, ci + 1]));
        }
    }
    for (x, cells) in &probes {
        for i in 0..ctx.d() {
            for &cell in cells {
                if ctx.prof.big_f_capped(cell, i) {
                    skipped += 1;
                    continue;
                }
                if !ctx.separated(i, x, cell) {
                    continue;
                }
                let Some(n) = ctx.level(&ctx.value(i, x)) else {
                    skipped += 1;
                    continue;
                };
                let (a, b) = &ctx.cells[cell];
                let s = ctx.prof.big_f()[i].slope_right_of(&midpoint(a, b));
                if !scale_by_p_power(&s, ctx.p.max(1), n).is_integer() {
                    let w = Witness::new(a, b, Some(i + 1), format!("F_{} slope {}", i + 1, fmt_q(&s)));
                    if !fails.contains(&w) {
                        fails.push(w);
                    }
                }
            }
        }
    }
    with_skips(ClauseResult::from_failures("integrality", fails), skipped)
}

fn f_slopes(ctx: &Ctx) -> ClauseResult {
    let mut fails = Vec::new();
    let mut skipped = 0;
    for (ci, (a, b)) in ctx.cells.iter().enumerate() {
        let m = midpoint(a, b);
        for i in 0..ctx.d() {
            if ctx.prof.is_capped(ci, i) {
                skipped += 1;
                continue;
            }
            let Some(n) = ctx.level(&ctx.value(i, &m)) else {
                skipped += 1;
                continue;
            };
            let s = ctx.prof.f()[i].slope_right_of(&m);
            if !in_fractional_lattice(&scale_by_p_power(&s, ctx.p.max(1), n), ctx.d()) {
                fails.push(Witness::new(a, b, Some(i + 1), format!("f_{} slope {}", i + 1, fmt_q(&s))));
            }
        }
    }
    with_skips(ClauseResult::from_failures("f_slopes", fails), skipped)
}

fn monotonicity(ctx: &Ctx, mode: Mode) -> ClauseResult {
    if mode == Mode::Annulus {
        return ClauseResult::not_applicable("monotonicity", "annulus mode");
    }
    let mut fails = Vec::new();
    let mut skipped = 0;
    for (ci, (a, b)) in ctx.cells.iter().enumerate() {
        let m = midpoint(a, b);
        for i in 0..ctx.d() {
            if ctx.prof.big_f_capped(ci, i) {
                skipped += 1;
                continue;
            }
            let s = ctx.prof.big_f()[i].slope_right_of(&m);
            if s.is_positive() {
                fails.push(Witness::new(a, b, Some(i + 1), format!("F_{} slope {}", i + 1, fmt_q(&s))));
            }
        }
    }
    with_skips(ClauseResult::from_failures("monotonicity", fails), skipped)
}

/// Checks the variation clauses on every cell; capped cells are skipped and
/// counted in the clause notes.
pub fn verify_variation(profile: &RadiusProfile, mode: Mode, class: AxisClass) -> VariationReport {
    let w = match profile.kind {
        ProfileKind::Derivation(Axis::Base(j)) => profile.cfg.u_weights.get(j).cloned().unwrap_or_else(Q::zero),
        _ => Q::zero(),
    };
    let ctx = Ctx { prof: profile, cells: profile.cells(), class, p: profile.cfg.p, w };
    let mut report = Report::default();
    report.push(continuity(&ctx));
    report.push(ordering(&ctx));
    report.push(convexity(&ctx));
    report.push(integrality(&ctx));
    report.push(f_slopes(&ctx));
    report.push(monotonicity(&ctx, mode));
    report
}

/// An open interval on which the first `index` radii split off.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Locus {
    pub index: usize,
    #[serde(with = "serde_q")]
    pub lo: Q,
    #[serde(with = "serde_q")]
    pub hi: Q,
}

/// Maximal open intervals where `F_i` is affine and `f_i > f_{i+1}`.
pub fn decomposition_loci(profile: &RadiusProfile) -> Vec<Locus> {
    let d = profile.rank();
    let cells = profile.cells();
    let mut out = Vec::new();
    for i in 0..d.saturating_sub(1) {
        let big = &profile.big_f()[i];
        let gap = |x: &Q| profile.f()[i].eval(x) - profile.f()[i + 1].eval(x);
        // positive part of the gap on each usable cell, as a closed-open description
        let mut runs: Vec<(Q, Q)> = Vec::new();
        for (ci, (a, b)) in cells.iter().enumerate() {
            if profile.big_f_capped(ci, i) || profile.is_capped(ci, i) {
                continue;
            }
            let (ga, gb) = (gap(a), gap(b));
            let upper_capped = profile.is_capped(ci, i + 1);
            let (lo, hi) = if upper_capped || (ga.is_positive() && gb.is_positive()) {
                (a.clone(), b.clone())
            } else if !ga.is_positive() && !gb.is_positive() {
                continue;
            } else {
                // gap affine on the cell: one sign change at its root
                let root = a + (b - a) * &ga / (&ga - &gb);
                if ga.is_positive() {
                    (a.clone(), root)
                } else {
                    (root, b.clone())
                }
            };
            if lo >= hi {
                continue;
            }
            match runs.last_mut() {
                Some(last) if last.1 == lo && gap(&lo).is_positive() && !big.breakpoints().contains(&lo) => last.1 = hi,
                Some(last) if last.1 == lo && upper_capped && !big.breakpoints().contains(&lo) => last.1 = hi,
                _ => runs.push((lo, hi)),
            }
        }
        out.extend(runs.into_iter().map(|(lo, hi)| Locus { index: i + 1, lo, hi }));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwanReport {
    /// `(b, rank)` grouped by equal break, increasing.
    pub breaks: Vec<(Q, usize)>,
    pub report: Report,
}

/// Breaks read as right slopes at the window's left end, where every
/// intrinsic `f_i` must vanish.
pub fn swan_breaks(profile: &RadiusProfile) -> Result<SwanReport> {
    let lo = profile.lo();
    let mut slopes = Vec::with_capacity(profile.rank());
    for (i, g) in profile.f().iter().enumerate() {
        let v = g.eval(lo);
        if !v.is_zero() {
            return Err(Error::NotSolvable(format!("f_{}({}) = {}", i + 1, fmt_q(lo), fmt_q(&v))));
        }
        let s = g.slope_right_of(lo);
        if profile.is_capped(0, i) && !s.is_zero() {
            return Err(Error::NotSolvable(format!("f_{} capped near {}", i + 1, fmt_q(lo))));
        }
        slopes.push(s);
    }
    slopes.sort();
    let mut breaks: Vec<(Q, usize)> = Vec::new();
    for s in slopes {
        match breaks.last_mut() {
            Some(last) if last.0 == s => last.1 += 1,
            _ => breaks.push((s, 1)),
        }
    }
    let mut report = Report::default();
    let neg: Vec<Witness> = breaks
        .iter()
        .filter(|(b, _)| b.is_negative())
        .map(|(b, _)| Witness::new(lo, lo, None, format!("break {}", fmt_q(b))))
        .collect();
    report.push(ClauseResult::from_failures("nonnegativity", neg));
    let total: Q = breaks.iter().map(|(b, r)| b * Q::from_integer(BigInt::from(*r))).sum();
    let integ = if total.is_integer() {
        Vec::new()
    } else {
        vec![Witness::new(lo, lo, None, format!("sum {}", fmt_q(&total)))]
    };
    report.push(ClauseResult::from_failures("integrality", integ));
    Ok(SwanReport { breaks, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pw_affine::{Affine, PiecewiseAffine, ProfileKind};
    use crate::rational::{q, qf};
    use crate::valued::ValuationConfig;

    fn line(lo: i64, hi: i64, s: Q, c: Q) -> PiecewiseAffine {
        PiecewiseAffine::affine(q(lo), q(hi), &Affine::new(s, c)).unwrap()
    }

    fn prof(fs: Vec<PiecewiseAffine>) -> RadiusProfile {
        let n = fs.len();
        RadiusProfile::new(ProfileKind::Intrinsic, 0, ValuationConfig::geometric(2), fs, vec![Vec::new(); n]).unwrap()
    }

    #[test]
    fn half_slope_fails_integrality() {
        let p = prof(vec![line(0, 2, qf(1, 2), q(1))]);
        let r = verify_variation(&p, Mode::Annulus, AxisClass::Geometric);
        assert_eq!(r.status("integrality"), Some(CheckStatus::Fail));
        assert!(!r.get("integrality").unwrap().witnesses.is_empty());
        assert_eq!(r.status("convexity"), Some(CheckStatus::Pass));
    }

    #[test]
    fn disc_monotonicity() {
        let p = prof(vec![line(0, 2, q(1), q(0))]);
        let r = verify_variation(&p, Mode::Disc, AxisClass::Intrinsic);
        assert_eq!(r.status("monotonicity"), Some(CheckStatus::Fail));
        let r = verify_variation(&p, Mode::Annulus, AxisClass::Intrinsic);
        assert_eq!(r.status("monotonicity"), Some(CheckStatus::NotApplicable));
    }

    #[test]
    fn base_level_threshold() {
        // p = 2, w = 0: thresholds 1, 1/2, 1/4, …
        assert_eq!(base_level(&qf(3, 4), 2, &q(0)), Some(1));
        assert_eq!(base_level(&q(2), 2, &q(0)), Some(0));
        assert_eq!(base_level(&q(0), 2, &q(0)), None);
    }

    #[test]
    fn loci_whole_interior_and_crossing() {
        let p = prof(vec![line(1, 2, q(2), q(1)), line(1, 2, q(1), q(2))]);
        // 2r+1 vs r+2 cross at r = 1 (the left end), gap positive inside
        assert_eq!(decomposition_loci(&p), vec![Locus { index: 1, lo: q(1), hi: q(2) }]);

        let up = PiecewiseAffine::envelope(
            q(0),
            q(4),
            &[Affine::new(q(1), q(0)), Affine::new(q(-1), q(4))],
            crate::pw_affine::Envelope::Max,
        )
        .unwrap();
        let down = PiecewiseAffine::envelope(
            q(0),
            q(4),
            &[Affine::new(q(1), q(0)), Affine::new(q(-1), q(4))],
            crate::pw_affine::Envelope::Min,
        )
        .unwrap();
        let p = prof(vec![up, down]);
        assert_eq!(
            decomposition_loci(&p),
            vec![Locus { index: 1, lo: q(0), hi: q(2) }, Locus { index: 1, lo: q(2), hi: q(4) }]
        );
    }

    #[test]
    fn pure_profile_has_no_locus() {
        let p = prof(vec![line(0, 1, q(1), q(1)), line(0, 1, q(1), q(1))]);
        assert!(decomposition_loci(&p).is_empty());
    }

    #[test]
    fn swan_examples() {
        let s = swan_breaks(&prof(vec![line(0, 1, q(1), q(0))])).unwrap();
        assert_eq!(s.breaks, vec![(q(1), 1)]);
        let s = swan_breaks(&prof(vec![line(0, 1, q(0), q(0))])).unwrap();
        assert_eq!(s.breaks, vec![(q(0), 1)]);
        let s =
            swan_breaks(&prof(vec![line(0, 1, q(1), q(0)), line(0, 1, qf(1, 2), q(0)), line(0, 1, qf(1, 2), q(0))]))
                .unwrap();
        assert_eq!(s.breaks, vec![(qf(1, 2), 2), (q(1), 1)]);
        assert!(s.report.all_passed());
        let bad = swan_breaks(&prof(vec![line(0, 1, qf(1, 2), q(0))])).unwrap();
        assert_eq!(bad.report.status("integrality"), Some(CheckStatus::Fail));
        assert!(matches!(swan_breaks(&prof(vec![line(0, 1, q(1), q(1))])), Err(Error::NotSolvable(_))));
    }
}
