//! Newton polygons along a one-parameter family of Gauss valuations.

use num::{BigInt, Zero};

use super::{no_negative_powers, TwistedPoly};
use crate::error::{Error, Result};
use crate::pw_affine::{cells_of, merge_cuts, Affine, PiecewiseAffine};
use crate::rational::{fmt_q, in_fractional_lattice, midpoint, Q};
use crate::report::{ClauseResult, Report, Witness};
use crate::valued::{Axis, ValuationConfig};

/// Slopes of `NP_r(P)` as exact functions of `r` on a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlopeFunctions {
    /// Smallest index with a nonzero coefficient.
    pub x_min: usize,
    /// Hull slopes per unit of width, left to right (our orientation).
    pub sigma: Vec<PiecewiseAffine>,
    /// Paper-orientation slopes in increasing order: `f[0]` is `f_1`.
    pub f: Vec<PiecewiseAffine>,
    /// Partial sums `F_i = f_1 + … + f_i`.
    pub big_f: Vec<PiecewiseAffine>,
}

impl SlopeFunctions {
    pub fn count(&self) -> usize {
        self.f.len()
    }

    pub fn lo(&self) -> &Q {
        self.f[0].lo()
    }

    pub fn hi(&self) -> &Q {
        self.f[0].hi()
    }

    /// Paper slopes at `r`, increasing.
    pub fn eval(&self, r: &Q) -> Vec<Q> {
        self.f.iter().map(|g| g.eval(r)).collect()
    }
}

fn frac(n: usize) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parametric lower hull: `points[j] = (x_j, y_j(r))` with concave piecewise
/// affine `y_j`. Returns one hull-slope function per unit of width.
pub(crate) fn parametric_hull(lo: &Q, hi: &Q, points: &[(usize, PiecewiseAffine)]) -> Result<Vec<PiecewiseAffine>> {
    if points.len() < 2 {
        return Ok(Vec::new());
    }
    let base: Vec<&[Q]> = points.iter().map(|(_, y)| y.breakpoints()).collect();
    let base_cuts = merge_cuts(&base);
    let affines: Vec<Vec<Affine>> = points.iter().map(|(_, y)| y.refined_affines(&base_cuts)).collect();
    let mut cuts = base_cuts.clone();
    for (ci, (a, b)) in cells_of(lo, hi, &base_cuts).iter().enumerate() {
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                for k in j + 1..points.len() {
                    let (xi, xj, xk) = (points[i].0, points[j].0, points[k].0);
                    let yi = &affines[i][ci];
                    let yj = &affines[j][ci];
                    let yk = &affines[k][ci];
                    // (y_j − y_i)(x_k − x_i) − (y_k − y_i)(x_j − x_i)
                    let g = yj.sub(yi).scale(&frac(xk - xi)).sub(&yk.sub(yi).scale(&frac(xj - xi)));
                    if let Some(root) = g.crossing(&Affine::constant(Q::zero())) {
                        if &root > a && &root < b {
                            cuts.push(root);
                        }
                    }
                }
            }
        }
    }
    let cuts = merge_cuts(&[&cuts]);
    let affines: Vec<Vec<Affine>> = points.iter().map(|(_, y)| y.refined_affines(&cuts)).collect();
    let x0 = points[0].0;
    let width = points[points.len() - 1].0 - x0;
    let mut columns: Vec<Vec<Affine>> = vec![Vec::new(); width];
    for (ci, (a, b)) in cells_of(lo, hi, &cuts).iter().enumerate() {
        let m = midpoint(a, b);
        let at_mid: Vec<(usize, Q)> = points.iter().zip(&affines).map(|((x, _), aff)| (*x, aff[ci].eval(&m))).collect();
        let hull = super::lower_hull_indices(&at_mid);
        for w in hull.windows(2) {
            let (ia, ib) = (w[0], w[1]);
            let len = frac(points[ib].0 - points[ia].0);
            let slope = affines[ib][ci].sub(&affines[ia][ci]).scale(&(Q::from_integer(1.into()) / &len));
            for x in points[ia].0..points[ib].0 {
                columns[x - x0].push(slope.clone());
            }
        }
    }
    columns.into_iter().map(|col| PiecewiseAffine::from_cells(lo.clone(), hi.clone(), &cuts, col)).collect()
}

impl TwistedPoly {
    /// Exact `f_i(P, r)` and `F_i(P, r)` as `r_k` ranges over `[lo, hi]`.
    pub fn slope_functions(
        &self,
        cfg: &ValuationConfig,
        axis: Axis,
        lo: &Q,
        hi: &Q,
        frozen: &[Q],
    ) -> Result<SlopeFunctions> {
        if self.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if lo > hi {
            return Err(Error::EmptyWindow { lo: fmt_q(lo), hi: fmt_q(hi) });
        }
        let mut points = Vec::new();
        for (i, c) in self.coeffs().iter().enumerate() {
            if !c.is_zero() {
                points.push((i, c.valuation_function(cfg, axis, lo, hi, frozen)?));
            }
        }
        let x_min = points[0].0;
        let sigma = parametric_hull(lo, hi, &points)?;
        let f: Vec<PiecewiseAffine> = sigma.iter().rev().map(|s| s.neg()).collect();
        let big_f = partial_sums(&f)?;
        Ok(SlopeFunctions { x_min, sigma, f, big_f })
    }
}

/// Probe points: window ends, every breakpoint, every cell midpoint.
pub(crate) fn probe_points(fs: &[&PiecewiseAffine]) -> Vec<Q> {
    let (lo, hi) = (fs[0].lo().clone(), fs[0].hi().clone());
    let lists: Vec<&[Q]> = fs.iter().map(|f| f.breakpoints()).collect();
    let cuts = merge_cuts(&lists);
    let mut pts = vec![lo.clone()];
    for (a, b) in cells_of(&lo, &hi, &cuts) {
        pts.push(midpoint(&a, &b));
        pts.push(b);
    }
    pts.dedup();
    pts
}

fn concavity_failures(fs: &[PiecewiseAffine], label: &str) -> Vec<Witness> {
    let mut out = Vec::new();
    for (i, g) in fs.iter().enumerate() {
        for (w, b) in g.pieces().windows(2).zip(g.breakpoints()) {
            if w[0].slope < w[1].slope {
                out.push(Witness::new(b, b, Some(i + 1), format!("{label}_{} slope increases", i + 1)));
            }
        }
    }
    out
}

fn monotonicity_failures(fs: &[PiecewiseAffine], label: &str) -> Vec<Witness> {
    let mut out = Vec::new();
    for (i, g) in fs.iter().enumerate() {
        for (a, b, aff) in g.cells() {
            if aff.slope < Q::zero() {
                out.push(Witness::new(&a, &b, Some(i + 1), format!("{label}_{} slope {}", i + 1, fmt_q(&aff.slope))));
            }
        }
    }
    out
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

/// Checks the Newton-polygon variation properties on the exact slope
/// functions: linearity, integrality, monotonicity, concavity, truncation.
pub fn verify_newton_properties(
    p: &TwistedPoly,
    cfg: &ValuationConfig,
    axis: Axis,
    lo: &Q,
    hi: &Q,
    frozen: &[Q],
    truncations: &[(Q, Q)],
) -> Result<Report> {
    let sf = p.slope_functions(cfg, axis, lo, hi, frozen)?;
    let k = match axis {
        Axis::Geom(k) => k,
        other => return Err(Error::UnknownAxis(other)),
    };
    let mut report = Report::default();
    let d = sf.count();
    if d == 0 {
        report.push(ClauseResult::not_applicable("linearity", "polygon has no slopes"));
        return Ok(report);
    }
    let all: Vec<&PiecewiseAffine> = sf.f.iter().chain(sf.big_f.iter()).collect();
    let probes = probe_points(&all);

    // linearity: the exact functions agree with direct hulls everywhere they could bend
    let mut fails = Vec::new();
    for r0 in &probes {
        let mut r = frozen.to_vec();
        r[k] = r0.clone();
        let np = p.newton_polygon(cfg, &r)?.paper_slopes();
        if np != sf.eval(r0) {
            fails.push(Witness::new(r0, r0, None, "slope functions disagree with the polygon"));
        }
    }
    report.push(ClauseResult::from_failures("linearity", fails));

    // integrality
    let mut fails = Vec::new();
    for r0 in &probes {
        let vals = sf.eval(r0);
        for i in 0..d {
            if i + 1 < d && vals[i] >= vals[i + 1] {
                continue;
            }
            let g = &sf.big_f[i];
            for s in [g.slope_left_of(r0), g.slope_right_of(r0)] {
                if !s.is_integer() {
                    fails.push(Witness::new(r0, r0, Some(i + 1), format!("F slope {}", fmt_q(&s))));
                }
            }
        }
    }
    for (i, g) in sf.f.iter().enumerate() {
        for pc in g.pieces() {
            if !in_fractional_lattice(&pc.slope, d) {
                fails.push(Witness::new(g.lo(), g.hi(), Some(i + 1), format!("f slope {}", fmt_q(&pc.slope))));
            }
        }
    }
    fails.dedup();
    report.push(ClauseResult::from_failures("integrality", fails));

    let monic = p.is_monic();
    let disc = monic && no_negative_powers(p, k);
    if disc {
        report.push(ClauseResult::from_failures("monotonicity", monotonicity_failures(&sf.big_f, "F")));
    } else {
        report.push(ClauseResult::not_applicable(
            "monotonicity",
            "requires a monic polynomial without negative powers of the varied variable",
        ));
    }
    if monic {
        report.push(ClauseResult::from_failures("concavity", concavity_failures(&sf.big_f, "F")));
    } else {
        report.push(ClauseResult::not_applicable("concavity", "requires a monic polynomial"));
    }

    for (a, b) in truncations {
        let label = format!("truncation({},{})", fmt_q(a), fmt_q(b));
        if a <= &Q::zero() {
            report.push(ClauseResult::not_applicable(&label, "requires a > 0"));
            continue;
        }
        let cap = PiecewiseAffine::affine(lo.clone(), hi.clone(), &Affine::new(a.clone(), b.clone()))?;
        let g: Vec<PiecewiseAffine> = sf.f.iter().map(|fi| fi.min(&cap)).collect::<Result<_>>()?;
        let big_g = partial_sums(&g)?;
        let mut fails = Vec::new();
        if monic {
            fails.extend(concavity_failures(&big_g, "G"));
        }
        if disc {
            fails.extend(monotonicity_failures(&big_g, "G"));
        }
        report.push(ClauseResult::from_failures(&label, fails));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};
    use crate::report::CheckStatus;
    use crate::valued::LaurentElement;

    fn cfg() -> ValuationConfig {
        ValuationConfig::geometric(2)
    }

    fn t(c: i64, e: i64) -> LaurentElement {
        LaurentElement::t_power(&cfg(), q(c), 0, e)
    }

    fn example() -> TwistedPoly {
        // T^2 + T + t
        TwistedPoly::from_coeffs(None, &cfg(), vec![t(1, 1), t(1, 0), t(1, 0)])
    }

    #[test]
    fn hand_parametric_hull() {
        let sf = example().slope_functions(&cfg(), Axis::Geom(0), &q(-1), &q(1), &[q(0)]).unwrap();
        let f1 = &sf.f[0];
        let f2 = &sf.f[1];
        assert_eq!(f1.breakpoints(), &[q(0)]);
        assert_eq!(f1.pieces()[0].slope, qf(1, 2));
        assert_eq!(f1.pieces()[1].slope, q(0));
        assert_eq!(f2.pieces()[0].slope, qf(1, 2));
        assert_eq!(f2.pieces()[1].slope, q(1));
        assert!(sf.big_f[1].is_affine());
        assert_eq!(sf.big_f[1].eval(&qf(1, 3)), qf(1, 3));
        assert_eq!(f1.eval(&q(-1)), qf(-1, 2));
    }

    #[test]
    fn two_point_hull_is_affine() {
        let p = TwistedPoly::from_coeffs(None, &cfg(), vec![t(-1, 3), t(1, 0)]);
        let sf = p.slope_functions(&cfg(), Axis::Geom(0), &q(-2), &q(2), &[q(0)]).unwrap();
        assert_eq!(sf.f.len(), 1);
        assert!(sf.f[0].is_affine());
        assert_eq!(sf.f[0].pieces()[0].slope, q(3));
    }

    #[test]
    fn constant_coefficients_give_constant_slopes() {
        let p = TwistedPoly::from_coeffs(None, &cfg(), vec![t(4, 0), t(3, 0), t(1, 0)]);
        let sf = p.slope_functions(&cfg(), Axis::Geom(0), &q(-2), &q(2), &[q(0)]).unwrap();
        assert!(sf.f.iter().all(|g| g.is_affine() && g.pieces()[0].slope.is_zero()));
    }

    #[test]
    fn example_passes_all_checks() {
        let rep = verify_newton_properties(&example(), &cfg(), Axis::Geom(0), &q(-1), &q(1), &[q(0)], &[(q(1), q(0))])
            .unwrap();
        assert!(rep.all_passed(), "{rep:?}");
        assert_eq!(rep.status("concavity"), Some(CheckStatus::Pass));
        assert_eq!(rep.status("monotonicity"), Some(CheckStatus::Pass));
    }

    #[test]
    fn non_monic_is_not_applicable() {
        let p = TwistedPoly::from_coeffs(None, &cfg(), vec![t(1, 1), t(1, 0), t(3, 1)]);
        let rep = verify_newton_properties(&p, &cfg(), Axis::Geom(0), &q(-1), &q(1), &[q(0)], &[]).unwrap();
        assert_eq!(rep.status("monotonicity"), Some(CheckStatus::NotApplicable));
        assert_eq!(rep.status("concavity"), Some(CheckStatus::NotApplicable));
    }

    #[test]
    fn degenerate_window() {
        let sf = example().slope_functions(&cfg(), Axis::Geom(0), &q(1), &q(1), &[q(0)]).unwrap();
        assert_eq!(sf.eval(&q(1)), vec![q(0), q(1)]);
    }
}
