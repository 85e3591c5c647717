//! Recovering a convex transintegral polyhedral function from its
//! restrictions to lines.
//!
//! Functionals are read off as gradients at points of differentiability.
//! A candidate `g = max λ_j` never exceeds `f`; on each cell of `g` the
//! convex `f` is bounded by the affine `λ_j` as soon as it is at the
//! cell's vertices, so agreement at all cell vertices certifies `f = g`.

use std::collections::BTreeMap;

use num::{Signed, Zero};

use super::{primitive_direction, AffineFunctional, PolyFunc, TRPSet};
use crate::error::{Error, Result};
use crate::pw_affine::{Affine, Envelope, PiecewiseAffine};
use crate::rational::{fmt_q, q, Q};

/// Restrictions of a function to segments of a polyhedral set.
pub trait SliceOracle {
    /// `s ↦ f(x + s·z)` on `[lo, hi]`.
    fn slice(&self, x: &[Q], z: &[i64], lo: &Q, hi: &Q) -> Result<PiecewiseAffine>;
}

impl<F> SliceOracle for F
where
    F: Fn(&[Q], &[i64], &Q, &Q) -> Result<PiecewiseAffine>,
{
    fn slice(&self, x: &[Q], z: &[i64], lo: &Q, hi: &Q) -> Result<PiecewiseAffine> {
        self(x, z, lo, hi)
    }
}

/// Slices of a known polyhedral function.
pub struct SyntheticOracle<'a>(pub &'a PolyFunc);

impl SliceOracle for SyntheticOracle<'_> {
    fn slice(&self, x: &[Q], z: &[i64], lo: &Q, hi: &Q) -> Result<PiecewiseAffine> {
        let lines: Vec<Affine> = self.0.functionals.iter().map(|f| Affine::new(q(f.along(z)), f.eval(x))).collect();
        PiecewiseAffine::envelope(lo.clone(), hi.clone(), &lines, Envelope::Max)
    }
}

const MAX_FUNCTIONALS: usize = 4096;
const MAX_PROBES: i64 = 64;

struct Prober<'a, O: SliceOracle + ?Sized> {
    c: &'a TRPSet,
    oracle: &'a O,
    center: Vec<Q>,
    values: BTreeMap<Vec<Q>, Q>,
}

fn shift(x: &[Q], z: &[i64], s: &Q) -> Vec<Q> {
    x.iter().zip(z).map(|(xi, zi)| xi + s * q(*zi)).collect()
}

fn fmt_point(x: &[Q]) -> Vec<String> {
    x.iter().map(fmt_q).collect()
}

impl<O: SliceOracle + ?Sized> Prober<'_, O> {
    fn inconsistent(&self, x: &[Q], z: &[i64], reason: impl Into<String>) -> Error {
        Error::OracleInconsistent { point: fmt_point(x), direction: z.to_vec(), reason: reason.into() }
    }

    fn query(&self, x: &[Q], z: &[i64]) -> Result<PiecewiseAffine> {
        let (lo, hi) = self.c.line_interval(x, z)?;
        let g = self.oracle.slice(x, z, &lo, &hi)?;
        if g.lo() != &lo || g.hi() != &hi {
            return Err(self.inconsistent(x, z, "slice domain differs from the chord"));
        }
        if !g.is_convex() {
            return Err(self.inconsistent(x, z, "slice is not convex"));
        }
        if let Some(p) = g.pieces().iter().find(|p| !p.slope.is_integer()) {
            return Err(self.inconsistent(x, z, format!("non-integer slope {}", fmt_q(&p.slope))));
        }
        Ok(g)
    }

    fn value(&mut self, x: &[Q]) -> Result<Q> {
        if let Some(v) = self.values.get(x) {
            return Ok(v.clone());
        }
        let d: Vec<Q> = self.center.iter().zip(x).map(|(c, xi)| c - xi).collect();
        let z = primitive_direction(&d).unwrap_or_else(|| {
            let mut e = vec![0; x.len()];
            e[0] = 1;
            e
        });
        let v = self.query(x, &z)?.eval(&Q::zero());
        self.values.insert(x.to_vec(), v.clone());
        Ok(v)
    }

    /// The functional active at a point of differentiability near the
    /// interior point `y`, keeping `f > g` when a candidate is given.
    fn gradient_near(&self, y: &[Q], g: Option<&PolyFunc>) -> Result<AffineFunctional> {
        let n = y.len();
        for big in 2..MAX_PROBES {
            let z: Vec<i64> = (0..n as u32).map(|k| big.pow(k)).collect();
            let slice = self.query(y, &z)?;
            let end = slice.breakpoints().iter().find(|b| b.is_positive()).unwrap_or(slice.hi()).clone();
            let mut s = &end / q(2);
            if let Some(g) = g {
                let mut tries = 0;
                while slice.eval(&s) <= g.eval(&shift(y, &z, &s)) {
                    s /= q(2);
                    tries += 1;
                    if tries > 256 {
                        return Err(self.inconsistent(y, &z, "excess over the candidate vanishes"));
                    }
                }
            }
            let yp = shift(y, &z, &s);
            let mut slope = Vec::with_capacity(n);
            for k in 0..n {
                let mut e = vec![0; n];
                e[k] = 1;
                let line = self.query(&yp, &e)?;
                let (l, r) = (line.slope_left_of(&Q::zero()), line.slope_right_of(&Q::zero()));
                if l != r {
                    break;
                }
                slope.push(r.to_integer());
            }
            if slope.len() < n {
                continue;
            }
            let slope: Vec<i64> = slope
                .iter()
                .map(|s| i64::try_from(s).map_err(|_| self.inconsistent(&yp, &z, "slope out of range")))
                .collect::<Result<_>>()?;
            let partial = AffineFunctional::new(slope, Q::zero());
            let constant = slice.eval(&s) - partial.eval(&yp);
            return Ok(AffineFunctional::new(partial.slope, constant));
        }
        Err(self.inconsistent(y, &[], "no point of differentiability found"))
    }

    /// A cell vertex where `f` exceeds the candidate, if any.
    fn discrepancy(&mut self, g: &PolyFunc) -> Result<Option<(Vec<Q>, Vec<Q>)>> {
        for j in 0..g.functionals.len() {
            let cell = g.region(j, self.c)?;
            let inner = cell.interior_point()?;
            for v in cell.vertices() {
                let fv = self.value(&v)?;
                let gv = g.eval(&v);
                if fv < gv {
                    let z = primitive_direction(&inner.iter().zip(&v).map(|(a, b)| a - b).collect::<Vec<_>>());
                    return Err(self.inconsistent(&v, &z.unwrap_or_default(), "value below a supporting functional"));
                }
                if fv > gv {
                    return Ok(Some((v, inner)));
                }
            }
        }
        Ok(None)
    }
}

/// Exact reconstruction on a compact set with nonempty interior.
pub fn reconstruct_polyhedral<O: SliceOracle + ?Sized>(c: &TRPSet, oracle: &O) -> Result<PolyFunc> {
    let center = c.interior_point()?;
    let mut pr = Prober { c, oracle, center: center.clone(), values: BTreeMap::new() };
    let mut found = vec![pr.gradient_near(&center, None)?];
    loop {
        let g = PolyFunc::new(found.clone())?;
        let Some((v, inner)) = pr.discrepancy(&g)? else {
            return g.canonical(c);
        };
        let d: Vec<Q> = inner.iter().zip(&v).map(|(a, b)| a - b).collect();
        let z = primitive_direction(&d).expect("vertex differs from an interior point");
        let line = pr.query(&v, &z)?;
        // parameter of `inner` on the line through `v`
        let k = d.iter().zip(&z).find(|(_, zi)| **zi != 0).map(|(di, zi)| di / q(*zi)).unwrap();
        let mut s = k / q(2);
        let mut tries = 0;
        while line.eval(&s) <= g.eval(&shift(&v, &z, &s)) {
            s /= q(2);
            tries += 1;
            if tries > 256 {
                return Err(pr.inconsistent(&v, &z, "excess over the candidate vanishes"));
            }
        }
        let y = shift(&v, &z, &s);
        let next = pr.gradient_near(&y, Some(&g))?;
        if found.contains(&next) {
            return Err(pr.inconsistent(&y, &z, "gradient repeats a known functional"));
        }
        found.push(next);
        if found.len() > MAX_FUNCTIONALS {
            return Err(pr.inconsistent(&center, &[], "functional count exceeds the search bound"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn af(a: &[i64], b: Q) -> AffineFunctional {
        AffineFunctional::new(a.to_vec(), b)
    }

    fn round_trip(c: &TRPSet, f: &PolyFunc) -> PolyFunc {
        let got = reconstruct_polyhedral(c, &SyntheticOracle(f)).unwrap();
        assert_eq!(got, f.canonical(c).unwrap());
        got
    }

    #[test]
    fn max_of_coordinates_and_zero() {
        let c = TRPSet::cube(&[(-1, 1), (-1, 1)]);
        let f = PolyFunc::new(vec![af(&[1, 0], q(0)), af(&[0, 1], q(0)), af(&[0, 0], q(0))]).unwrap();
        assert_eq!(round_trip(&c, &f).functionals.len(), 3);
    }

    #[test]
    fn affine_is_single() {
        let c = TRPSet::cube(&[(0, 2), (-1, 3)]);
        let f = PolyFunc::new(vec![af(&[2, -3], qf(7, 5))]).unwrap();
        assert_eq!(round_trip(&c, &f).functionals.len(), 1);
    }

    #[test]
    fn transintegral_constant_kept() {
        let c = TRPSet::new(2, vec![af(&[1, 0], q(0)), af(&[0, 1], q(0)), af(&[-1, -1], q(1))]).unwrap();
        let f = PolyFunc::new(vec![af(&[1, 0], qf(1, 2)), af(&[0, 2], q(0))]).unwrap();
        let got = round_trip(&c, &f);
        assert_eq!(got.functionals.len(), 2);
        assert!(got.functionals.iter().any(|l| l.constant == qf(1, 2) && !l.is_integral()));
    }

    #[test]
    fn inconsistent_oracle_reported() {
        let c = TRPSet::cube(&[(-1, 1)]);
        let concave = |_: &[Q], z: &[i64], lo: &Q, hi: &Q| {
            let lines = [Affine::new(q(z[0]), q(0)), Affine::new(q(-z[0]), q(0))];
            PiecewiseAffine::envelope(lo.clone(), hi.clone(), &lines, Envelope::Min)
        };
        assert!(matches!(reconstruct_polyhedral(&c, &concave), Err(Error::OracleInconsistent { .. })));
        let half = |_: &[Q], z: &[i64], lo: &Q, hi: &Q| {
            PiecewiseAffine::affine(lo.clone(), hi.clone(), &Affine::new(qf(z[0], 2), q(0)))
        };
        assert!(matches!(reconstruct_polyhedral(&c, &half), Err(Error::OracleInconsistent { .. })));
    }
}
