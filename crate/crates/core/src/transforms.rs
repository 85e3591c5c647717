//! Radius-level Frobenius transforms and the generic-rotation combination.
//!
//! All values are intrinsic log-radii `f = −log_p IR`; the threshold
//! `1/(p−1)` and the pure value `p/(p−1)` separate the regimes.

use num::{BigInt, Zero};
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::module::{RadiiKind, RadiiMultiset, RadiusEntry};
use crate::rational::{fmt_q, is_prime, parse_q, Q};
use crate::report::{CheckStatus, ClauseResult, Report, Witness};
use crate::valued::Axis;

fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn check_p(p: u32) -> Result<()> {
    if p == 0 {
        return Err(Error::ZeroCharacteristic);
    }
    if !is_prime(p as u64) {
        return Err(Error::BadPrime(p as u64));
    }
    Ok(())
}

/// `1/(p−1)`.
pub fn threshold(p: u32) -> Q {
    Q::new(1.into(), BigInt::from(p - 1))
}

/// `p/(p−1)`.
pub fn pure_value(p: u32) -> Q {
    Q::new(BigInt::from(p), BigInt::from(p - 1))
}

fn uncapped(radii: &RadiiMultiset) -> Result<()> {
    if radii.has_capped() {
        return Err(Error::CappedEntry);
    }
    Ok(())
}

fn entry(value: Q, multiplicity: usize) -> RadiusEntry {
    RadiusEntry { value, multiplicity, capped: false }
}

fn push_one(f: &Q, mult: usize, p: u32) -> Vec<RadiusEntry> {
    let pq = qi(p as i64);
    if *f < threshold(p) {
        vec![entry(&pq * f, mult), entry(pure_value(p), mult * (p as usize - 1))]
    } else {
        vec![entry(f + qi(1), mult * p as usize)]
    }
}

fn pull_one(f: &Q, p: u32) -> Result<Q> {
    if *f == pure_value(p) {
        return Err(Error::AmbiguousPureValue(fmt_q(f)));
    }
    let a = f / qi(p as i64);
    let b = f - qi(1);
    Ok(if a > b { a } else { b })
}

/// Pushforward along the `∂`-Frobenius: rank is multiplied by `p`.
pub fn frob_push(radii: &RadiiMultiset, p: u32) -> Result<RadiiMultiset> {
    check_p(p)?;
    uncapped(radii)?;
    let out = radii.entries().iter().flat_map(|e| push_one(&e.value, e.multiplicity, p)).collect();
    Ok(RadiiMultiset::new(RadiiKind::Intrinsic, out))
}

/// Pullback: `f' ↦ max(f'/p, f' − 1)`, refused at the pure value.
pub fn frob_pull(radii: &RadiiMultiset, p: u32) -> Result<RadiiMultiset> {
    check_p(p)?;
    uncapped(radii)?;
    let out = radii
        .entries()
        .iter()
        .map(|e| Ok(entry(pull_one(&e.value, p)?, e.multiplicity)))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadiiMultiset::new(RadiiKind::Intrinsic, out))
}

/// Antecedent: `f ↦ p·f`, defined only for `f < 1/(p−1)`.
pub fn frob_antecedent(radii: &RadiiMultiset, p: u32) -> Result<RadiiMultiset> {
    check_p(p)?;
    uncapped(radii)?;
    let bound = threshold(p);
    let out = radii
        .entries()
        .iter()
        .map(|e| {
            if e.value >= bound {
                return Err(Error::OutOfRegime { value: fmt_q(&e.value), bound: fmt_q(&bound) });
            }
            Ok(entry(qi(p as i64) * &e.value, e.multiplicity))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RadiiMultiset::new(RadiiKind::Intrinsic, out))
}

/// Intrinsic value of `W_n`: `0` for `n = 0`, else the pure value.
pub fn wn_radius(n: i64, p: u32) -> Result<Q> {
    check_p(p)?;
    if n < 0 || n >= p as i64 {
        return Err(Error::ResidueOutOfRange { n, p });
    }
    Ok(if n == 0 { Q::zero() } else { pure_value(p) })
}

/// Log form of `min{η·IR_0, η₊·IR_j}`: the largest of `f_0 + r` and
/// `f_j + r_plus` over the remaining axes. The first pair is `∂_0`.
pub fn rotation_radius(intrinsic_by_axis: &[(Axis, Q)], r: &Q, r_plus: &Q) -> Result<Q> {
    let mut it = intrinsic_by_axis.iter().map(|(_, f)| f);
    let f0 = it.next().ok_or(Error::EmptyAxisMap)?;
    let mut best = f0 + r;
    for fj in it {
        let c = fj + r_plus;
        if c > best {
            best = c;
        }
    }
    Ok(best)
}

/// Multiset identities relating push and pull, one pair of clauses per entry.
///
/// `pull_push[i]`: pulling back the pushforward of entry `i` returns it, on the
/// unambiguous outputs. `push_pull[i]`: pushing forward the pullback matches the
/// twists by `W_0, …, W_{p−1}`, whose values follow the tensor max rule.
pub fn check_push_pull_laws(radii: &RadiiMultiset, p: u32) -> Result<Report> {
    check_p(p)?;
    uncapped(radii)?;
    let mut report = Report::default();
    let pure = pure_value(p);
    for (i, e) in radii.entries().iter().enumerate() {
        let f = &e.value;
        let pushed = push_one(f, 1, p);
        let mut fails = Vec::new();
        let mut skipped = 0;
        for out in &pushed {
            match pull_one(&out.value, p) {
                Ok(back) if back == *f => {}
                Ok(back) => fails.push(Witness::new(f, f, Some(i), format!("pull gives {}", fmt_q(&back)))),
                Err(_) => skipped += out.multiplicity,
            }
        }
        let mut c = ClauseResult::from_failures(&format!("pull_push[{i}]"), fails);
        if skipped > 0 && c.status == CheckStatus::Pass {
            c.witnesses.push(Witness::new(f, f, Some(i), format!("{skipped} copies at the pure value not evaluated")));
        }
        report.push(c);

        let name = format!("push_pull[{i}]");
        if *f == pure {
            report.push(ClauseResult {
                clause: name,
                status: CheckStatus::NotEvaluated,
                witnesses: vec![Witness::new(f, f, Some(i), "ambiguous at the pure value")],
            });
            continue;
        }
        let g = pull_one(f, p)?;
        let got = RadiiMultiset::new(RadiiKind::Intrinsic, push_one(&g, 1, p));
        let twisted = if *f > pure { f.clone() } else { pure.clone() };
        let predicted =
            RadiiMultiset::new(RadiiKind::Intrinsic, vec![entry(f.clone(), 1), entry(twisted, p as usize - 1)]);
        let fails = if got == predicted {
            Vec::new()
        } else {
            vec![Witness::new(f, f, Some(i), format!("push∘pull {:?} vs {:?}", values(&got), values(&predicted)))]
        };
        report.push(ClauseResult::from_failures(&name, fails));
    }
    Ok(report)
}

fn values(m: &RadiiMultiset) -> Vec<(String, usize)> {
    m.entries().iter().map(|e| (fmt_q(&e.value), e.multiplicity)).collect()
}

/// `{"p": 2, "entries": [["1/2", 1], …]}`.
#[derive(Clone, Debug, Deserialize)]
pub struct MultisetJson {
    pub p: u32,
    pub entries: Vec<(String, usize)>,
}

impl MultisetJson {
    pub fn parse(s: &str) -> Result<(u32, RadiiMultiset)> {
        let j: MultisetJson = serde_json::from_str(s).map_err(|e| Error::Json(e.to_string()))?;
        let entries = j.entries.iter().map(|(v, m)| Ok(entry(parse_q(v)?, *m))).collect::<Result<Vec<_>>>()?;
        Ok((j.p, RadiiMultiset::new(RadiiKind::Intrinsic, entries)))
    }
}

/// `{"entries": [[value, multiplicity], …]}` in increasing value.
pub fn multiset_json(m: &RadiiMultiset) -> serde_json::Value {
    serde_json::json!({
        "entries": m.entries().iter().map(|e| serde_json::json!([fmt_q(&e.value), e.multiplicity])).collect::<Vec<_>>(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};

    fn ms(vals: &[Q]) -> RadiiMultiset {
        RadiiMultiset::from_values(RadiiKind::Intrinsic, vals)
    }

    #[test]
    fn push_examples() {
        assert_eq!(frob_push(&ms(&[qf(1, 2)]), 2).unwrap(), ms(&[q(1), q(2)]));
        assert_eq!(frob_push(&ms(&[q(2)]), 2).unwrap(), ms(&[q(3), q(3)]));
        assert_eq!(frob_push(&ms(&[q(0)]), 3).unwrap(), ms(&[q(0), qf(3, 2), qf(3, 2)]));
        assert_eq!(frob_push(&ms(&[q(0)]), 0), Err(Error::ZeroCharacteristic));
    }

    #[test]
    fn pull_examples() {
        assert_eq!(frob_pull(&ms(&[q(3)]), 2).unwrap(), ms(&[q(2)]));
        assert_eq!(frob_pull(&ms(&[q(1)]), 2).unwrap(), ms(&[qf(1, 2)]));
        assert!(matches!(frob_pull(&ms(&[q(2)]), 2), Err(Error::AmbiguousPureValue(_))));
    }

    #[test]
    fn antecedent_examples() {
        assert_eq!(frob_antecedent(&ms(&[qf(1, 4)]), 3).unwrap(), ms(&[qf(3, 4)]));
        assert_eq!(frob_antecedent(&ms(&[q(0)]), 2).unwrap(), ms(&[q(0)]));
        assert!(matches!(frob_antecedent(&ms(&[q(1)]), 2), Err(Error::OutOfRegime { .. })));
    }

    #[test]
    fn wn_values() {
        assert_eq!(wn_radius(0, 5).unwrap(), q(0));
        assert_eq!(wn_radius(1, 2).unwrap(), q(2));
        assert_eq!(wn_radius(4, 5).unwrap(), qf(5, 4));
        assert!(wn_radius(5, 5).is_err());
    }

    #[test]
    fn rotation_examples() {
        assert_eq!(rotation_radius(&[(Axis::Geom(0), q(0))], &q(3), &q(5)).unwrap(), q(3));
        let two = [(Axis::Geom(0), q(1)), (Axis::Base(0), q(0))];
        assert_eq!(rotation_radius(&two, &q(0), &q(0)).unwrap(), q(1));
        let eq = [(Axis::Geom(0), q(2)), (Axis::Base(0), q(2))];
        assert_eq!(rotation_radius(&eq, &q(1), &q(1)).unwrap(), q(3));
        assert_eq!(rotation_radius(&[], &q(0), &q(0)), Err(Error::EmptyAxisMap));
    }

    #[test]
    fn law_report() {
        let r = check_push_pull_laws(&ms(&[q(3)]), 2).unwrap();
        assert!(r.all_passed());
        let r = check_push_pull_laws(&ms(&[qf(1, 2)]), 2).unwrap();
        assert_eq!(r.status("push_pull[0]"), Some(CheckStatus::Pass));
        let r = check_push_pull_laws(&ms(&[q(2)]), 2).unwrap();
        assert_eq!(r.status("push_pull[0]"), Some(CheckStatus::NotEvaluated));
    }

    #[test]
    fn json_round_trip() {
        let (p, m) = MultisetJson::parse(r#"{"p":2,"entries":[["1/2",1]]}"#).unwrap();
        let out = multiset_json(&frob_push(&m, p).unwrap());
        assert_eq!(out.to_string(), r#"{"entries":[["1",1],["2",1]]}"#);
    }
}
