//! Iterates `D_{n+1} = ∂(D_n) + N·D_n` and the spectral valuation estimate.

use num::{BigInt, Zero};

use super::{DiffModule, Matrix};
use crate::error::Result;
use crate::rational::Q;
use crate::valued::{Axis, ValuationValue};

/// `(n, v_r(D_n))` for `n = 1..=n_max`.
pub fn iterate_dn(m: &DiffModule, axis: Axis, n_max: usize, r: &[Q]) -> Result<Vec<(usize, ValuationValue)>> {
    let cfg = m.config();
    cfg.check_radius(r)?;
    let n = m.matrix(axis)?;
    let (nu, nt) = (cfg.m_base(), cfg.n_geom);
    let mut d = Matrix::identity(m.rank(), nu, nt);
    let mut out = Vec::with_capacity(n_max);
    for k in 1..=n_max {
        d = d.derive(axis).add(&n.mul(&d));
        out.push((k, d.valuation(cfg, r)));
        if d.is_zero() {
            out.extend((k + 1..=n_max).map(|j| (j, ValuationValue::Infinite)));
            break;
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralEstimate {
    /// Estimated valuation of the spectral norm of `∂` on the module.
    pub estimate: Q,
    /// Spread of `v(D_n)/n` over the tail (a convergence indicator, not a bound).
    pub window: Q,
}

/// `min(v(|∂|_sp,K), max over the last n_max/4 of v(D_n)/n)`.
pub fn spectral_valuation_estimate(m: &DiffModule, axis: Axis, r: &[Q], n_max: usize) -> Result<SpectralEstimate> {
    let base = m.config().base_spectral(axis, r);
    let seq = iterate_dn(m, axis, n_max, r)?;
    let tail_len = (n_max / 4).max(1);
    let tail: Vec<Q> = seq[seq.len().saturating_sub(tail_len)..]
        .iter()
        .filter_map(|(k, v)| v.finite().map(|x| x / Q::from_integer(BigInt::from(*k))))
        .collect();
    if tail.is_empty() {
        return Ok(SpectralEstimate { estimate: base, window: Q::zero() });
    }
    let hi = tail.iter().max().unwrap().clone();
    let lo = tail.iter().min().unwrap().clone();
    let estimate = if hi < base { hi.clone() } else { base };
    Ok(SpectralEstimate { estimate, window: hi - lo })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qf};
    use crate::valued::{LaurentElement, ValuationConfig};

    const T1: Axis = Axis::Geom(0);

    #[test]
    fn trivial_module_gives_base_value() {
        let m = DiffModule::trivial(ValuationConfig::geometric(2), 2, &[T1]).unwrap();
        let seq = iterate_dn(&m, T1, 4, &[q(0)]).unwrap();
        assert!(seq.iter().all(|(_, v)| v.is_infinite()));
        let e = spectral_valuation_estimate(&m, T1, &[q(3)], 16).unwrap();
        assert_eq!(e.estimate, q(1) - q(3));
        assert_eq!(e.window, q(0));
    }

    #[test]
    fn constant_twist_growth() {
        let cfg = ValuationConfig::geometric(2);
        let c = LaurentElement::constant_for(&cfg, qf(1, 8));
        let m = DiffModule::rank_one(cfg, &[(T1, c)]).unwrap();
        let seq = iterate_dn(&m, T1, 10, &[q(0)]).unwrap();
        assert_eq!(seq[9].1, ValuationValue::Finite(q(-30)));
    }

    #[test]
    fn dominated_constant_gives_base_value() {
        let cfg = ValuationConfig::geometric(2);
        let m = DiffModule::rank_one(cfg.clone(), &[(T1, LaurentElement::one_for(&cfg))]).unwrap();
        let e = spectral_valuation_estimate(&m, T1, &[q(2)], 32).unwrap();
        assert_eq!(e.estimate, q(-1));
    }
}
