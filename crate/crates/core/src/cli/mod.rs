//! Command-line front end. Every input is JSON; every number written out
//! is an exact rational string, except SVG coordinates.

mod inputs;
mod svg;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::module::{decompose_fiber, DiffModule, FiberPart};
use crate::polyhedral::{multidim_loci, multidim_profile, reconstruct_polyhedral, SyntheticOracle};
use crate::pw_affine::{
    build_radius_profile, decomposition_loci, verify_variation, AxisClass, Mode, ProfileKind, RadiusProfile,
};
use crate::rational::{fmt_q, parse_q, Q};
use crate::report::Report;
use crate::transforms::{check_push_pull_laws, frob_antecedent, frob_pull, frob_push, multiset_json, MultisetJson};
use crate::twisted::robba_factor;
use crate::valued::Axis;
use inputs::{Geometry, Input, PolyhedralInput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nadir", version, about = "Exact radius invariants of nonarchimedean differential modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Radius profile of a module over a window.
    Radii(Job),
    /// Variation-theorem clauses on a module's profile or an explicit profile.
    Verify(Job),
    /// Frobenius transforms of an intrinsic radius multiset.
    Frobenius(Job),
    /// Slope factorization of a twisted polynomial, or fiber decomposition of a module.
    Factor(Job),
    /// Polyhedral reconstruction from a synthetic or module-backed oracle.
    Polyhedral(Job),
    /// Loci where leading subsidiary radii separate.
    Loci(Job),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FrobOp {
    Push,
    Pull,
    Antecedent,
    Laws,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Disc,
    Annulus,
}

#[derive(Debug, Args)]
pub struct Job {
    /// JSON input file.
    pub input: PathBuf,
    /// Window endpoints for the varied log-radius.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_hyphen_values = true)]
    pub window: Option<Vec<String>>,
    /// `t<k>`, `u<j>` or `intrinsic`.
    #[arg(long, default_value = "t1")]
    pub axis: String,
    /// Varied geometric variable; defaults to the axis when geometric, else `t1`.
    #[arg(long)]
    pub var: Option<String>,
    #[arg(long, default_value = "10")]
    pub precision: String,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Log-radii of the geometric variables, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub frozen: Option<Vec<String>>,
    /// Fiber for `factor`; defaults to `--frozen`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub radius: Option<Vec<String>>,
    /// Split between paper slopes for `factor` on a twisted polynomial.
    #[arg(long, allow_hyphen_values = true)]
    pub split: Option<String>,
    #[arg(long, value_enum, default_value = "annulus")]
    pub mode: ModeArg,
    #[arg(long, value_enum, default_value = "push")]
    pub op: FrobOp,
    /// JSON file with `domain` and `directions` for polyannulus jobs.
    #[arg(long)]
    pub geometry: Option<PathBuf>,
    /// Write the artifact here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Artifact text and whether a verifier failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub failed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, failed: false }
    }

    fn json(v: &Value) -> Self {
        Outcome::ok(pretty(v))
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed {
            EXIT_VERIFY
        } else {
            EXIT_OK
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

fn q_list(xs: &[String]) -> Result<Vec<Q>> {
    xs.iter().map(|s| parse_q(s)).collect()
}

impl Job {
    fn read(&self) -> Result<String> {
        std::fs::read_to_string(&self.input).map_err(|e| Error::Invalid(format!("{}: {e}", self.input.display())))
    }

    fn window(&self) -> Result<(Q, Q)> {
        let w = self.window.as_ref().ok_or_else(|| Error::Invalid("--window is required".into()))?;
        Ok((parse_q(&w[0])?, parse_q(&w[1])?))
    }

    fn precision(&self) -> Result<Q> {
        let p = parse_q(&self.precision)?;
        if p <= Q::from_integer(0.into()) {
            return Err(Error::Invalid("--precision must be positive".into()));
        }
        Ok(p)
    }

    fn kind(&self) -> Result<ProfileKind> {
        if self.axis == "intrinsic" {
            Ok(ProfileKind::Intrinsic)
        } else {
            Ok(ProfileKind::Derivation(self.axis.parse()?))
        }
    }

    fn var(&self) -> Result<usize> {
        match &self.var {
            Some(v) => match v.parse::<Axis>()? {
                Axis::Geom(k) => Ok(k),
                other => Err(Error::Invalid(format!("--var must be geometric, got {other}"))),
            },
            None => match self.kind()? {
                ProfileKind::Derivation(Axis::Geom(k)) => Ok(k),
                _ => Ok(0),
            },
        }
    }

    fn frozen(&self, n_geom: usize) -> Result<Vec<Q>> {
        match &self.frozen {
            Some(v) => q_list(v),
            None => Ok(vec![Q::from_integer(0.into()); n_geom]),
        }
    }

    fn class(&self) -> Result<AxisClass> {
        Ok(match self.kind()? {
            ProfileKind::Intrinsic => AxisClass::Intrinsic,
            ProfileKind::Derivation(Axis::Geom(_)) => AxisClass::Geometric,
            ProfileKind::Derivation(Axis::Base(_)) => AxisClass::Base,
        })
    }

    fn profile(&self, m: &DiffModule) -> Result<RadiusProfile> {
        let (lo, hi) = self.window()?;
        let frozen = self.frozen(m.config().n_geom)?;
        build_radius_profile(m, self.kind()?, self.var()?, &lo, &hi, &frozen)
    }

    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            return Err(Error::Invalid(format!("format {f:?} is not available for this command")));
        }
        Ok(f)
    }

    fn geometry(&self) -> Result<Option<Geometry>> {
        match &self.geometry {
            None => Ok(None),
            Some(path) => {
                let s =
                    std::fs::read_to_string(path).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
                Ok(Some(serde_json::from_str(&s)?))
            }
        }
    }
}

fn render_profile(p: &RadiusProfile, f: Format) -> String {
    match f {
        Format::Csv => p.to_csv(),
        Format::Json => pretty(&p.to_json()),
        Format::Svg => svg::render(p),
    }
}

fn report_outcome(report: &Report, extra: Value) -> Outcome {
    let mut v = json!({ "passed": report.all_passed(), "report": report });
    if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
        base.extend(more);
    }
    Outcome { text: pretty(&v), failed: !report.all_passed() }
}

fn radii(job: &Job) -> Result<Outcome> {
    let m = DiffModule::from_json_str(&job.read()?)?;
    let fmt = job.format(Format::Csv, &[Format::Csv, Format::Json, Format::Svg])?;
    Ok(Outcome::ok(render_profile(&job.profile(&m)?, fmt)))
}

fn verify(job: &Job) -> Result<Outcome> {
    job.format(Format::Json, &[Format::Json])?;
    let (profile, class) = match Input::parse(&job.read()?)? {
        Input::Module(m) => (job.profile(&m)?, job.class()?),
        Input::Profile(p) => {
            let class = match p.kind {
                ProfileKind::Intrinsic => AxisClass::Intrinsic,
                ProfileKind::Derivation(Axis::Geom(_)) => AxisClass::Geometric,
                ProfileKind::Derivation(Axis::Base(_)) => AxisClass::Base,
            };
            (p, class)
        }
        _ => return Err(Error::Invalid("verify expects a module or a profile".into())),
    };
    let mode = match job.mode {
        ModeArg::Disc => Mode::Disc,
        ModeArg::Annulus => Mode::Annulus,
    };
    let report = verify_variation(&profile, mode, class);
    Ok(report_outcome(&report, json!({ "mode": mode, "class": class })))
}

fn frobenius(job: &Job) -> Result<Outcome> {
    job.format(Format::Json, &[Format::Json])?;
    let (p, m) = MultisetJson::parse(&job.read()?)?;
    let out = match job.op {
        FrobOp::Push => frob_push(&m, p)?,
        FrobOp::Pull => frob_pull(&m, p)?,
        FrobOp::Antecedent => frob_antecedent(&m, p)?,
        FrobOp::Laws => return Ok(report_outcome(&check_push_pull_laws(&m, p)?, json!({}))),
    };
    Ok(Outcome::ok(format!("{}\n", multiset_json(&out))))
}

fn part_json(part: &FiberPart) -> Value {
    let rows: Vec<Vec<Value>> = part
        .projector
        .to_rows()
        .iter()
        .map(|r| r.iter().map(|x| serde_json::to_value(x.to_json()).expect("serializes")).collect())
        .collect();
    json!({
        "radii": part.radii.to_json(),
        "projector": rows,
        "idempotent_residual": part.idempotent_residual.to_string(),
        "horizontal_residual": part.horizontal_residual.to_string(),
    })
}

fn factor(job: &Job) -> Result<Outcome> {
    job.format(Format::Json, &[Format::Json])?;
    let prec = job.precision()?;
    let fiber = |n_geom: usize| -> Result<Vec<Q>> {
        match &job.radius {
            Some(r) => q_list(r),
            None => job.frozen(n_geom),
        }
    };
    match Input::parse(&job.read()?)? {
        Input::Module(m) => {
            let axis = match job.kind()? {
                ProfileKind::Derivation(a) => a,
                ProfileKind::Intrinsic => return Err(Error::Invalid("factor needs a derivation axis".into())),
            };
            let r = fiber(m.config().n_geom)?;
            let parts = decompose_fiber(&m, axis, &r, &prec)?;
            Ok(Outcome::json(&json!({ "parts": parts.iter().map(part_json).collect::<Vec<_>>() })))
        }
        Input::Poly(cfg, poly) => {
            let r = fiber(cfg.n_geom)?;
            let split = parse_q(job.split.as_deref().ok_or_else(|| Error::Invalid("--split is required".into()))?)?;
            let fac = robba_factor(&poly, &cfg, &r, &split, &prec)?;
            Ok(Outcome::json(&json!({
                "low": fac.low.to_json(),
                "high": fac.high.to_json(),
                "residual": fac.residual.to_string(),
                "partition_ok": fac.partition_ok,
                "low_polygon": fac.low.newton_polygon(&cfg, &r)?.to_json(),
                "high_polygon": fac.high.newton_polygon(&cfg, &r)?.to_json(),
            })))
        }
        _ => Err(Error::Invalid("factor expects a module or a twisted polynomial".into())),
    }
}

fn multidim_json(rep: &crate::polyhedral::MultidimReport) -> Value {
    json!({
        "slices": rep.slices.iter().map(|s| json!({
            "base": s.base.iter().map(fmt_q).collect::<Vec<_>>(),
            "direction": s.direction,
            "transform": s.transform,
            "profile": s.profile.to_json(),
        })).collect::<Vec<_>>(),
        "reconstructed": rep.reconstructed,
    })
}

fn polyhedral(job: &Job) -> Result<Outcome> {
    job.format(Format::Json, &[Format::Json])?;
    let raw: Value = serde_json::from_str(&job.read()?)?;
    match serde_json::from_value::<PolyhedralInput>(raw)? {
        PolyhedralInput::Synthetic { domain, function } => {
            let got = reconstruct_polyhedral(&domain, &SyntheticOracle(&function))?;
            Ok(Outcome::json(&json!({ "function": got })))
        }
        PolyhedralInput::Module { domain, module, directions } => {
            let m = module.into_module()?;
            let dirs = inputs::directions(&directions)?;
            let rep = multidim_profile(&m, &domain, &dirs, true)?;
            Ok(report_outcome(&rep.verdict, multidim_json(&rep)))
        }
    }
}

fn loci(job: &Job) -> Result<Outcome> {
    job.format(Format::Json, &[Format::Json])?;
    let m = DiffModule::from_json_str(&job.read()?)?;
    match job.geometry()? {
        Some(g) => {
            let dirs = inputs::directions(&g.directions)?;
            let rep = multidim_profile(&m, &g.domain, &dirs, true)?;
            let found = multidim_loci(&rep)?;
            let loci: Vec<Value> = found.iter().map(|l| json!({ "index": l.index, "interior_of": l.region })).collect();
            Ok(report_outcome(&rep.verdict, json!({ "loci": loci })))
        }
        None => {
            let prof = job.profile(&m)?;
            Ok(Outcome::json(&json!({ "loci": decomposition_loci(&prof) })))
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    let (job, out) = match &cli.command {
        Command::Radii(j) => (j, radii(j)),
        Command::Verify(j) => (j, verify(j)),
        Command::Frobenius(j) => (j, frobenius(j)),
        Command::Factor(j) => (j, factor(j)),
        Command::Polyhedral(j) => (j, polyhedral(j)),
        Command::Loci(j) => (j, loci(j)),
    };
    let out = out?;
    if let Some(path) = &job.output {
        std::fs::write(path, &out.text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        return Ok(Outcome { text: String::new(), failed: out.failed });
    }
    Ok(out)
}

/// Parses arguments, runs the job and returns `(exit code, stdout, stderr)`.
pub fn run<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            return if e.use_stderr() {
                (EXIT_INPUT, String::new(), e.to_string())
            } else {
                (EXIT_OK, e.to_string(), String::new())
            };
        }
    };
    match execute(&cli) {
        Ok(o) => (o.exit_code(), o.text, String::new()),
        Err(e) => (EXIT_INPUT, String::new(), format!("error: {e}\n")),
    }
}
