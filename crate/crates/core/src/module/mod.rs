//! Differential modules given by connection matrices on a fixed basis:
//! `∇_a(v) = ∂_a(v) + N_a·v`.

mod cyclic;
mod decompose;
mod matrix;
mod radii;
mod spectral;

pub use cyclic::{apply_operator, cyclic_vector, CyclicVector};
pub use decompose::{decompose_fiber, FiberPart};
pub use matrix::Matrix;
pub use radii::{
    axis_intrinsic_values, intrinsic_radius_multi, visible_radii, IntrinsicMulti, RadiiKind, RadiiMultiset, RadiusEntry,
};
pub use spectral::{iterate_dn, spectral_valuation_estimate, SpectralEstimate};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{q, serde_q_vec, Q};
use crate::valued::{Axis, LaurentElement, LaurentJson, ValuationConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffModule {
    cfg: ValuationConfig,
    rank: usize,
    matrices: BTreeMap<Axis, Matrix>,
}

impl DiffModule {
    /// Validates shapes, ring dimensions and integrability.
    pub fn new(cfg: ValuationConfig, rank: usize, matrices: BTreeMap<Axis, Matrix>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Invalid("rank must be positive".into()));
        }
        for (axis, m) in &matrices {
            cfg.check_axis(*axis)?;
            if m.rows() != rank || m.cols() != rank {
                return Err(Error::Dimension { expected: rank, got: m.rows().max(m.cols()) });
            }
            if m.ring() != (cfg.m_base(), cfg.n_geom) {
                return Err(Error::Invalid(format!("matrix for {axis} lives in another ring")));
            }
        }
        let module = DiffModule { cfg, rank, matrices };
        module.check_integrability()?;
        Ok(module)
    }

    /// Rank-1 module with `∂_a v = c_a v` for each listed axis.
    pub fn rank_one(cfg: ValuationConfig, twists: &[(Axis, LaurentElement)]) -> Result<Self> {
        let (nu, nt) = (cfg.m_base(), cfg.n_geom);
        let matrices = twists.iter().map(|(a, c)| (*a, Matrix::from_rows(nu, nt, vec![vec![c.clone()]]))).collect();
        Self::new(cfg, 1, matrices)
    }

    /// Trivial module of rank `d` on the given axes.
    pub fn trivial(cfg: ValuationConfig, rank: usize, axes: &[Axis]) -> Result<Self> {
        let (nu, nt) = (cfg.m_base(), cfg.n_geom);
        let matrices = axes.iter().map(|a| (*a, Matrix::zero(rank, rank, nu, nt))).collect();
        Self::new(cfg, rank, matrices)
    }

    pub fn config(&self) -> &ValuationConfig {
        &self.cfg
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn axes(&self) -> Vec<Axis> {
        self.matrices.keys().copied().collect()
    }

    pub fn matrices(&self) -> &BTreeMap<Axis, Matrix> {
        &self.matrices
    }

    pub fn matrix(&self, axis: Axis) -> Result<&Matrix> {
        self.matrices.get(&axis).ok_or(Error::UnknownAxis(axis))
    }

    /// `∂_a N_b − ∂_b N_a + N_a N_b − N_b N_a = 0` for every pair of axes.
    pub fn check_integrability(&self) -> Result<()> {
        let axes = self.axes();
        for (i, &a) in axes.iter().enumerate() {
            for &b in &axes[i + 1..] {
                let (na, nb) = (&self.matrices[&a], &self.matrices[&b]);
                let curv = nb.derive(a).sub(&na.derive(b)).add(&na.mul(nb)).sub(&nb.mul(na));
                if !curv.is_zero() {
                    return Err(Error::NotIntegrable(a, b));
                }
            }
        }
        Ok(())
    }

    /// `∂(v) + N·v`.
    pub fn apply_connection(&self, axis: Axis, v: &[LaurentElement]) -> Result<Vec<LaurentElement>> {
        if v.len() != self.rank {
            return Err(Error::Dimension { expected: self.rank, got: v.len() });
        }
        let n = self.matrix(axis)?;
        let nv = n.mul_vec(v);
        Ok(v.iter().zip(nv).map(|(x, y)| x.derive(axis).add(&y)).collect())
    }

    /// Dual module, matrices `−N^T`.
    pub fn dual(&self) -> Self {
        let matrices = self.matrices.iter().map(|(a, m)| (*a, m.transpose().neg())).collect();
        DiffModule { cfg: self.cfg.clone(), rank: self.rank, matrices }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.cfg != other.cfg {
            return Err(Error::Invalid("modules over different rings".into()));
        }
        if self.axes() != other.axes() {
            return Err(Error::Invalid("modules carry different derivations".into()));
        }
        Ok(())
    }

    /// Tensor product, matrices `N ⊗ I + I ⊗ N'`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let (nu, nt) = (self.cfg.m_base(), self.cfg.n_geom);
        let i1 = Matrix::identity(self.rank, nu, nt);
        let i2 = Matrix::identity(other.rank, nu, nt);
        let matrices = self.matrices.iter().map(|(a, m)| (*a, m.kron(&i2).add(&i1.kron(&other.matrices[a])))).collect();
        Self::new(self.cfg.clone(), self.rank * other.rank, matrices)
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let matrices = self.matrices.iter().map(|(a, m)| (*a, m.block_diag(&other.matrices[a]))).collect();
        Self::new(self.cfg.clone(), self.rank + other.rank, matrices)
    }

    /// Pullback along `t_k = s^n`: entries substituted, and the `t_k`
    /// matrix rescaled by the chain rule `d/ds = n s^{n−1} d/dt`.
    /// Fibers correspond via `r_t = n·r_s`.
    pub fn tame_pullback(&self, axis: Axis, n: i64) -> Result<Self> {
        let k = match axis {
            Axis::Geom(k) if k < self.cfg.n_geom => k,
            other => return Err(Error::UnknownAxis(other)),
        };
        if n == 0 || (self.cfg.p != 0 && n.rem_euclid(self.cfg.p as i64) == 0) {
            return Err(Error::BadTameExponent { n, p: self.cfg.p });
        }
        let nt = self.cfg.n_geom;
        let subst = |x: &LaurentElement| {
            x.map_geometric(nt, |e| {
                let mut e = e.to_vec();
                e[k] *= n;
                e
            })
        };
        let mut chain_exp = vec![0; nt];
        chain_exp[k] = n - 1;
        let chain_exp: Vec<i64> = vec![0; self.cfg.m_base()].into_iter().chain(chain_exp).collect();
        let matrices = self
            .matrices
            .iter()
            .map(|(a, m)| {
                let m2 = m.map(subst);
                if *a == axis {
                    (*a, m2.map(|x| x.mul_monomial(&q(n), &chain_exp)))
                } else {
                    (*a, m2)
                }
            })
            .collect();
        Self::new(self.cfg.clone(), self.rank, matrices)
    }

    pub fn to_json(&self) -> ModuleJson {
        ModuleJson {
            rank: self.rank,
            p: self.cfg.p,
            u_weights: self.cfg.u_weights.clone(),
            n_geom: Some(self.cfg.n_geom),
            matrices: self
                .matrices
                .iter()
                .map(|(a, m)| {
                    let rows =
                        m.to_rows().into_iter().map(|r| r.iter().map(LaurentElement::to_json).collect()).collect();
                    (a.to_string(), rows)
                })
                .collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: ModuleJson = serde_json::from_str(s)?;
        raw.into_module()
    }
}

/// `{"rank":d,"p":p,"u_weights":[...],"matrices":{"t1":[[...]],...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleJson {
    pub rank: usize,
    pub p: u32,
    #[serde(default, with = "serde_q_vec")]
    pub u_weights: Vec<Q>,
    /// Number of geometric variables; inferred from the largest `t` axis when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_geom: Option<usize>,
    pub matrices: BTreeMap<String, Vec<Vec<LaurentJson>>>,
}

impl ModuleJson {
    pub fn into_module(self) -> Result<DiffModule> {
        let mut axes = Vec::new();
        for name in self.matrices.keys() {
            axes.push(name.parse::<Axis>()?);
        }
        let n_geom = match self.n_geom {
            Some(n) => n,
            None => axes
                .iter()
                .filter_map(|a| match a {
                    Axis::Geom(k) => Some(k + 1),
                    _ => None,
                })
                .max()
                .unwrap_or(1),
        };
        let cfg = ValuationConfig::new(self.p, self.u_weights, n_geom)?;
        let (nu, nt) = (cfg.m_base(), cfg.n_geom);
        let mut matrices = BTreeMap::new();
        for (axis, (_, rows)) in axes.into_iter().zip(self.matrices) {
            if rows.len() != self.rank {
                return Err(Error::Dimension { expected: self.rank, got: rows.len() });
            }
            let mut out = Vec::with_capacity(rows.len());
            for row in rows {
                if row.len() != self.rank {
                    return Err(Error::Dimension { expected: self.rank, got: row.len() });
                }
                out.push(row.into_iter().map(|x| x.into_element(nu, nt)).collect::<Result<Vec<_>>>()?);
            }
            matrices.insert(axis, Matrix::from_rows(nu, nt, out));
        }
        DiffModule::new(cfg, self.rank, matrices)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::qf;

    fn cfg() -> ValuationConfig {
        ValuationConfig::geometric(2)
    }

    fn t(c: Q, e: i64) -> LaurentElement {
        LaurentElement::t_power(&cfg(), c, 0, e)
    }

    const T1: Axis = Axis::Geom(0);

    #[test]
    fn apply_connection_examples() {
        let triv = DiffModule::trivial(cfg(), 1, &[T1]).unwrap();
        assert_eq!(triv.apply_connection(T1, &[t(q(5), 0)]).unwrap(), vec![LaurentElement::zero(0, 1)]);
        let m = DiffModule::rank_one(cfg(), &[(T1, t(q(1), -1))]).unwrap();
        assert_eq!(m.apply_connection(T1, &[t(q(1), 0)]).unwrap(), vec![t(q(1), -1)]);
        let z = LaurentElement::zero(0, 1);
        let n = Matrix::from_rows(0, 1, vec![vec![z.clone(), t(q(1), 0)], vec![z.clone(), z.clone()]]);
        let m = DiffModule::new(cfg(), 2, [(T1, n)].into()).unwrap();
        assert_eq!(m.apply_connection(T1, &[z.clone(), t(q(1), 0)]).unwrap(), vec![t(q(1), 0), z]);
        assert!(m.apply_connection(T1, &[t(q(1), 0)]).is_err());
    }

    #[test]
    fn integrability_detected() {
        let c = ValuationConfig::new(2, vec![], 2).unwrap();
        let t1 = LaurentElement::t_power(&c, q(1), 0, 1);
        // ∂_{t1} v = 0, ∂_{t2} v = t1 v fails: ∂_{t1}(t1) = 1 ≠ 0
        let bad = DiffModule::rank_one(c.clone(), &[(Axis::Geom(0), LaurentElement::zero(0, 2)), (Axis::Geom(1), t1)]);
        assert_eq!(bad, Err(Error::NotIntegrable(Axis::Geom(0), Axis::Geom(1))));
        let a = LaurentElement::t_power(&c, q(1), 0, -1);
        let b = LaurentElement::t_power(&c, q(1), 1, -1);
        assert!(DiffModule::rank_one(c, &[(Axis::Geom(0), a), (Axis::Geom(1), b)]).is_ok());
    }

    #[test]
    fn tame_pullback_examples() {
        let m = DiffModule::rank_one(cfg(), &[(T1, t(q(1), -1))]).unwrap();
        assert_eq!(m.tame_pullback(T1, 1).unwrap(), m);
        let c3 = ValuationConfig::geometric(3);
        let m3 = DiffModule::rank_one(c3.clone(), &[(T1, LaurentElement::t_power(&c3, q(1), 0, -1))]).unwrap();
        let pulled = m3.tame_pullback(T1, 2).unwrap();
        assert_eq!(pulled.matrix(T1).unwrap().get(0, 0), &LaurentElement::t_power(&c3, q(2), 0, -1));
        let m2 = DiffModule::rank_one(cfg(), &[(T1, t(qf(3, 2), -3).add(&t(q(1), 2)))]).unwrap();
        assert_eq!(m2.tame_pullback(T1, -1).unwrap().tame_pullback(T1, -1).unwrap(), m2);
        assert!(matches!(m.tame_pullback(T1, 2), Err(Error::BadTameExponent { .. })));
        assert!(matches!(m.tame_pullback(T1, 0), Err(Error::BadTameExponent { .. })));
    }

    #[test]
    fn dual_and_tensor_shapes() {
        let m = DiffModule::rank_one(cfg(), &[(T1, t(q(1), -2))]).unwrap();
        let d = m.dual();
        assert_eq!(d.matrix(T1).unwrap().get(0, 0), &t(q(-1), -2));
        let prod = m.tensor(&d).unwrap();
        assert!(prod.matrix(T1).unwrap().is_zero());
        assert_eq!(m.direct_sum(&d).unwrap().rank(), 2);
    }

    #[test]
    fn json_round_trip() {
        let m = DiffModule::rank_one(cfg(), &[(T1, t(qf(1, 2), -2))]).unwrap();
        let s = serde_json::to_string(&m.to_json()).unwrap();
        assert_eq!(DiffModule::from_json_str(&s).unwrap(), m);
        let s = r#"{"rank":1,"p":2,"matrices":{"t1":[[{"terms":[{"c":"1","t":[-2]}]}]]}}"#;
        assert_eq!(DiffModule::from_json_str(s).unwrap().rank(), 1);
    }
}
