//! Intrinsic radius profiles of a module over a polyannulus, sliced along
//! integer directions through toroidal changes of variables.

use num::Zero;

use super::reconstruct::{reconstruct_polyhedral, SliceOracle};
use super::unimodular::{toroidal_pullback, UnimodularMatrix};
use super::{gcd_vec, AffineFunctional, PolyFunc, TRPSet};
use crate::error::{Error, Result};
use crate::module::DiffModule;
use crate::pw_affine::{
    build_radius_profile, verify_variation, AxisClass, Mode, PiecewiseAffine, ProfileKind, RadiusProfile,
};
use crate::rational::{factorial, fmt_q, q, Q};
use crate::report::{CheckStatus, ClauseResult, Report, Witness};

/// The profile along `s ↦ base + s·direction` over the chord through `base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Slice {
    pub base: Vec<Q>,
    pub direction: Vec<i64>,
    /// Unimodular completion with `direction` as first row.
    pub transform: UnimodularMatrix,
    pub profile: RadiusProfile,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultidimReport {
    pub rank: usize,
    pub domain: TRPSet,
    pub slices: Vec<Slice>,
    pub verdict: Report,
    /// `d!·F_l` for `l = 1, …, d`, when requested and fully visible.
    pub reconstructed: Option<Vec<PolyFunc>>,
}

/// Intrinsic profile along `base + s·z` for `s ∈ [lo, hi]`, with primitive `z`.
pub fn slice_profile(
    m: &DiffModule,
    base: &[Q],
    z: &[i64],
    lo: &Q,
    hi: &Q,
) -> Result<(UnimodularMatrix, RadiusProfile)> {
    let a = UnimodularMatrix::complete(z)?;
    let pulled = toroidal_pullback(m, &a)?;
    let r0 = a.fiber_preimage(base);
    let off = r0[0].clone();
    let prof = build_radius_profile(&pulled, ProfileKind::Intrinsic, 0, &(&off + lo), &(&off + hi), &r0)?;
    Ok((a, prof.shifted(&off)?))
}

/// `d!·F_l` of the intrinsic radii, sliced through the module.
pub struct ModuleOracle<'a> {
    pub module: &'a DiffModule,
    /// 1-based.
    pub l: usize,
}

impl SliceOracle for ModuleOracle<'_> {
    fn slice(&self, x: &[Q], z: &[i64], lo: &Q, hi: &Q) -> Result<PiecewiseAffine> {
        let g = gcd_vec(z);
        if g == 0 {
            return Err(Error::NotPrimitive(z.to_vec()));
        }
        let z0: Vec<i64> = z.iter().map(|c| c / g).collect();
        let gq = q(g);
        let (_, prof) = slice_profile(self.module, x, &z0, &(lo * &gq), &(hi * &gq))?;
        for (ci, (a, b)) in prof.cells().iter().enumerate() {
            if prof.big_f_capped(ci, self.l - 1) {
                return Err(Error::InsufficientCoverage(format!(
                    "F_{} capped on [{}, {}] along {:?} from {:?}",
                    self.l,
                    fmt_q(a),
                    fmt_q(b),
                    z0,
                    x.iter().map(fmt_q).collect::<Vec<_>>()
                )));
            }
        }
        let scale = Q::from_integer(factorial(prof.rank()));
        prof.big_f()[self.l - 1].scale(&scale).reparametrize(&Q::zero(), &gq)
    }
}

/// `d!·F_l` slopes are integers and `F_d` slopes are integers on visible cells.
fn transintegral_clause(name: &str, prof: &RadiusProfile) -> ClauseResult {
    let d = prof.rank();
    let fact = Q::from_integer(factorial(d));
    let mut fails = Vec::new();
    for (ci, (a, b)) in prof.cells().iter().enumerate() {
        let m = (a + b) / q(2);
        for i in 0..d {
            if prof.big_f_capped(ci, i) {
                continue;
            }
            let s = prof.big_f()[i].slope_right_of(&m);
            let ok = (&s * &fact).is_integer() && (i + 1 < d || s.is_integer());
            if !ok {
                fails.push(Witness::new(a, b, Some(i), format!("slope {}", fmt_q(&s))));
            }
        }
    }
    ClauseResult::from_failures(name, fails)
}

/// Slices through `c` for each `(base, primitive direction)`, with the
/// variation and transintegrality clauses checked on each. With
/// `reconstruct`, `d!·F_l` is rebuilt on `c` from module slices.
pub fn multidim_profile(
    m: &DiffModule,
    c: &TRPSet,
    directions: &[(Vec<Q>, Vec<i64>)],
    reconstruct: bool,
) -> Result<MultidimReport> {
    let n = m.config().n_geom;
    if c.dim != n {
        return Err(Error::Dimension { expected: n, got: c.dim });
    }
    let mut slices = Vec::with_capacity(directions.len());
    let mut verdict = Report::default();
    for (i, (base, z)) in directions.iter().enumerate() {
        if gcd_vec(z) != 1 {
            return Err(Error::NotPrimitive(z.clone()));
        }
        let (lo, hi) = c.line_interval(base, z)?;
        if lo >= hi {
            return Err(Error::Invalid(format!("slice {i} meets the domain in a point")));
        }
        let (a, prof) = slice_profile(m, base, z, &lo, &hi)?;
        for cl in verify_variation(&prof, Mode::Annulus, AxisClass::Intrinsic).clauses {
            verdict.push(ClauseResult { clause: format!("slice[{i}].{}", cl.clause), ..cl });
        }
        verdict.push(transintegral_clause(&format!("slice[{i}].transintegral"), &prof));
        slices.push(Slice { base: base.clone(), direction: z.clone(), transform: a, profile: prof });
    }
    let mut reconstructed = None;
    if reconstruct {
        let rebuilt: Result<Vec<PolyFunc>> =
            (1..=m.rank()).map(|l| reconstruct_polyhedral(c, &ModuleOracle { module: m, l })).collect();
        match rebuilt {
            Ok(fs) => {
                verdict.push(ClauseResult::pass("reconstruction"));
                reconstructed = Some(fs);
            }
            Err(e @ Error::InsufficientCoverage(_)) => verdict.push(ClauseResult {
                clause: "reconstruction".into(),
                status: CheckStatus::NotEvaluated,
                witnesses: vec![Witness::new(&Q::zero(), &Q::zero(), None, e.to_string())],
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(MultidimReport { rank: m.rank(), domain: c.clone(), slices, verdict, reconstructed })
}

/// The open set `interior(region)` where the first `index` radii separate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionLocus {
    pub index: usize,
    pub region: TRPSet,
}

/// Regions where `F_l` is affine and `f_l > f_{l+1}`, read off the
/// reconstructed `d!·F_l`: inside the cell of a functional `λ` of `d!·F_l`,
/// `2λ − μ − ν > 0` for every functional `μ` of `d!·F_{l−1}` and `ν` of
/// `d!·F_{l+1}`, with `F_0 = 0`.
pub fn multidim_loci(report: &MultidimReport) -> Result<Vec<RegionLocus>> {
    let rec = report
        .reconstructed
        .as_ref()
        .ok_or_else(|| Error::InsufficientCoverage("no reconstructed partial sums".into()))?;
    let c = &report.domain;
    let n = c.dim;
    let zero = PolyFunc { functionals: vec![AffineFunctional::new(vec![0; n], Q::zero())] };
    let mut out = Vec::new();
    for l in 1..report.rank {
        let cur = &rec[l - 1];
        let prev = if l == 1 { &zero } else { &rec[l - 2] };
        let next = &rec[l];
        'cells: for (j, lam) in cur.functionals.iter().enumerate() {
            let mut strict = Vec::new();
            for mu in &prev.functionals {
                for nu in &next.functionals {
                    let gap = AffineFunctional::combine(&[(2, lam), (-1, mu), (-1, nu)], n);
                    if gap.slope.iter().all(|a| *a == 0) {
                        if gap.constant > Q::zero() {
                            continue;
                        }
                        continue 'cells;
                    }
                    strict.push(gap);
                }
            }
            let region = cur.region(j, c)?.with(strict)?;
            if region.has_interior() {
                out.push(RegionLocus { index: l, region });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::module::intrinsic_radius_multi;
    use crate::pw_affine::build_radius_profile;
    use crate::rational::qf;
    use crate::valued::{Axis, LaurentElement, ValuationConfig};

    fn cfg2() -> ValuationConfig {
        ValuationConfig::new(2, vec![], 2).unwrap()
    }

    fn exp_twist(cfg: &ValuationConfig, c: Q, m: [i64; 2]) -> DiffModule {
        let twists: Vec<(Axis, LaurentElement)> = (0..2)
            .map(|i| {
                let mut e = m.to_vec();
                e[i] -= 1;
                (Axis::Geom(i), LaurentElement::monomial(0, 2, &c * q(m[i]), &[], &e))
            })
            .collect();
        DiffModule::rank_one(cfg.clone(), &twists).unwrap()
    }

    #[test]
    fn axis_slices_match_one_variable() {
        let cfg = cfg2();
        let m = exp_twist(&cfg, q(1), [-1, -2]);
        let base = vec![q(1), q(1)];
        let (_, along1) = slice_profile(&m, &base, &[1, 0], &q(0), &q(1)).unwrap();
        let direct = build_radius_profile(&m, ProfileKind::Intrinsic, 0, &q(1), &q(2), &base).unwrap();
        assert_eq!(along1, direct.shifted(&q(1)).unwrap());
        for s in [q(0), qf(1, 3), q(1)] {
            let r = vec![q(1) + &s, q(1)];
            let exact = intrinsic_radius_multi(&m, &r).unwrap();
            assert_eq!(along1.eval(&s)[0], (exact.value, exact.capped));
        }
        let (_, diag) = slice_profile(&m, &base, &[1, 1], &q(0), &q(1)).unwrap();
        for s in [q(0), qf(1, 2), q(1)] {
            let r = vec![q(1) + &s, q(1) + &s];
            assert_eq!(diag.eval(&s)[0].0, intrinsic_radius_multi(&m, &r).unwrap().value);
        }
    }

    #[test]
    fn trivial_module_passes_vacuously() {
        let cfg = cfg2();
        let m = DiffModule::trivial(cfg, 2, &[Axis::Geom(0), Axis::Geom(1)]).unwrap();
        let c = TRPSet::cube(&[(0, 1), (0, 1)]);
        let dirs = vec![(vec![qf(1, 2), qf(1, 2)], vec![1, 0]), (vec![qf(1, 2), qf(1, 2)], vec![1, 1])];
        let rep = multidim_profile(&m, &c, &dirs, true).unwrap();
        assert!(rep.verdict.all_passed());
        assert!(multidim_loci(&rep).unwrap().is_empty());
        assert_eq!(
            multidim_profile(&m, &c, &[(vec![q(0), q(0)], vec![2, 2])], false),
            Err(Error::NotPrimitive(vec![2, 2]))
        );
    }

    #[test]
    fn distinct_summands_separate_everywhere() {
        let cfg = cfg2();
        let a = exp_twist(&cfg, q(1), [-1, 0]);
        let b = exp_twist(&cfg, qf(1, 8), [-1, 0]);
        let m = a.direct_sum(&b).unwrap();
        let c = TRPSet::cube(&[(1, 2), (1, 2)]);
        let dirs = vec![(vec![q(1), q(1)], vec![1, 1])];
        let rep = multidim_profile(&m, &c, &dirs, true).unwrap();
        assert!(rep.verdict.all_passed(), "{:?}", rep.verdict);
        let loci = multidim_loci(&rep).unwrap();
        assert_eq!(loci.len(), 1);
        assert_eq!(loci[0].index, 1);
        assert_eq!(loci[0].region.vertices(), c.vertices());
    }

    #[test]
    fn crossing_gives_two_halves() {
        let cfg = cfg2();
        let a = exp_twist(&cfg, q(1), [-1, 0]);
        let b = exp_twist(&cfg, q(1), [0, -1]);
        let m = a.direct_sum(&b).unwrap();
        let c = TRPSet::cube(&[(1, 3), (1, 3)]);
        let rep = multidim_profile(&m, &c, &[], true).unwrap();
        let loci = multidim_loci(&rep).unwrap();
        assert_eq!(loci.len(), 2);
        let (above, below) = ([q(2), qf(3, 2)], [qf(3, 2), q(2)]);
        for l in &loci {
            assert_eq!(l.index, 1);
            assert!(!l.region.interior(&[q(2), q(2)]).unwrap());
        }
        assert!(loci[0].region.interior(&above).unwrap() != loci[0].region.interior(&below).unwrap());
        assert!(loci[1].region.interior(&above).unwrap() != loci[1].region.interior(&below).unwrap());
    }
}
