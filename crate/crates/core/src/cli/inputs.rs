//! JSON input shapes accepted by the command line.

use serde::Deserialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::module::{DiffModule, ModuleJson};
use crate::polyhedral::{PolyFunc, TRPSet};
use crate::pw_affine::{Affine, PiecewiseAffine, ProfileKind, RadiusProfile};
use crate::rational::{parse_q, serde_q_vec, Q};
use crate::twisted::{TwistedPoly, TwistedPolyJson};
use crate::valued::{Axis, ValuationConfig};

pub enum Input {
    Module(DiffModule),
    Profile(RadiusProfile),
    Poly(ValuationConfig, TwistedPoly),
}

/// An explicit profile: each function as its vertex list `[[r, value], …]`.
#[derive(Deserialize)]
struct ProfileJson {
    p: u32,
    #[serde(default, with = "serde_q_vec")]
    u_weights: Vec<Q>,
    #[serde(default = "one")]
    n_geom: usize,
    kind: String,
    #[serde(default = "t1")]
    var: String,
    functions: Vec<Vec<(String, String)>>,
    #[serde(default)]
    capped: Vec<Vec<(String, String)>>,
}

fn one() -> usize {
    1
}

fn t1() -> String {
    "t1".into()
}

#[derive(Deserialize)]
struct PolyJson {
    p: u32,
    #[serde(default, with = "serde_q_vec")]
    u_weights: Vec<Q>,
    #[serde(default = "one")]
    n_geom: usize,
    poly: TwistedPolyJson,
}

fn from_vertices(points: &[(String, String)]) -> Result<PiecewiseAffine> {
    let pts: Vec<(Q, Q)> = points.iter().map(|(r, v)| Ok((parse_q(r)?, parse_q(v)?))).collect::<Result<_>>()?;
    if pts.len() < 2 {
        return Err(Error::Invalid("a profile function needs at least two vertices".into()));
    }
    let mut affines = Vec::with_capacity(pts.len() - 1);
    for w in pts.windows(2) {
        let ((a, fa), (b, fb)) = (&w[0], &w[1]);
        if b <= a {
            return Err(Error::Invalid("profile vertices must increase".into()));
        }
        affines.push(Affine::through((fb - fa) / (b - a), a, fa));
    }
    let cuts: Vec<Q> = pts[1..pts.len() - 1].iter().map(|(r, _)| r.clone()).collect();
    PiecewiseAffine::from_cells(pts[0].0.clone(), pts[pts.len() - 1].0.clone(), &cuts, affines)
}

impl ProfileJson {
    fn into_profile(self) -> Result<RadiusProfile> {
        let cfg = ValuationConfig::new(self.p, self.u_weights, self.n_geom)?;
        let kind =
            if self.kind == "intrinsic" { ProfileKind::Intrinsic } else { ProfileKind::Derivation(self.kind.parse()?) };
        let var = match self.var.parse::<Axis>()? {
            Axis::Geom(k) => k,
            other => return Err(Error::Invalid(format!("profile variable must be geometric, got {other}"))),
        };
        let f = self.functions.iter().map(|pts| from_vertices(pts)).collect::<Result<Vec<_>>>()?;
        let mut capped: Vec<Vec<(Q, Q)>> = self
            .capped
            .iter()
            .map(|iv| iv.iter().map(|(a, b)| Ok((parse_q(a)?, parse_q(b)?))).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        capped.resize(f.len(), Vec::new());
        RadiusProfile::new(kind, var, cfg, f, capped)
    }
}

impl Input {
    pub fn parse(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let has = |k: &str| v.get(k).is_some();
        if has("matrices") {
            Ok(Input::Module(DiffModule::from_json_str(s)?))
        } else if has("functions") {
            Ok(Input::Profile(serde_json::from_str::<ProfileJson>(s)?.into_profile()?))
        } else if has("poly") {
            let pj: PolyJson = serde_json::from_str(s)?;
            let cfg = ValuationConfig::new(pj.p, pj.u_weights, pj.n_geom)?;
            let poly = pj.poly.into_poly(&cfg)?;
            Ok(Input::Poly(cfg, poly))
        } else {
            Err(Error::Invalid("unrecognized input: expected matrices, functions or poly".into()))
        }
    }
}

#[derive(Deserialize)]
pub struct DirectionJson {
    pub base: Vec<String>,
    pub direction: Vec<i64>,
}

pub fn directions(ds: &[DirectionJson]) -> Result<Vec<(Vec<Q>, Vec<i64>)>> {
    ds.iter()
        .map(|d| Ok((d.base.iter().map(|x| parse_q(x)).collect::<Result<Vec<_>>>()?, d.direction.clone())))
        .collect()
}

/// `{"domain": …, "directions": [{"base": [...], "direction": [...]}]}`.
#[derive(Deserialize)]
pub struct Geometry {
    pub domain: TRPSet,
    #[serde(default)]
    pub directions: Vec<DirectionJson>,
}

#[derive(Deserialize)]
#[serde(untagged)]
pub enum PolyhedralInput {
    Synthetic {
        domain: TRPSet,
        function: PolyFunc,
    },
    Module {
        domain: TRPSet,
        module: ModuleJson,
        #[serde(default)]
        directions: Vec<DirectionJson>,
    },
}
