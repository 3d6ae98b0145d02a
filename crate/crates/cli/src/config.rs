//! Experiment configuration files.

use std::path::PathBuf;

use bmolab::domain::DomainSpec;
use bmolab::profile::{BoundaryProfile, ProfileKind};
use bmolab::semigroup::{KernelKind, SpaceTimePoint, TestFunction};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: line {line}, column {column}: {msg}")]
    Syntax { path: String, line: usize, column: usize, msg: String },
    #[error("{file}: key `{key}`: {msg}")]
    Key { file: String, key: String, msg: String },
    #[error("{0}: {1}")]
    Io(String, std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Envelope,
    Extend,
    Norm,
    Simulate,
    Constants,
    Jn,
    Transfer,
    Ball,
}

impl Kind {
    pub const ALL: [Kind; 8] =
        [Kind::Envelope, Kind::Extend, Kind::Norm, Kind::Simulate, Kind::Constants, Kind::Jn, Kind::Transfer, Kind::Ball];

    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Envelope => "envelope",
            Kind::Extend => "extend",
            Kind::Norm => "norm",
            Kind::Simulate => "simulate",
            Kind::Constants => "constants",
            Kind::Jn => "jn",
            Kind::Transfer => "transfer",
            Kind::Ball => "ball",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    /// Report file name inside the output directory; defaults to `<name>.report.json`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    /// CSV dump of solved grids (envelope experiments).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub kind: Kind,
    #[serde(default)]
    pub params: Value,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputPaths,
}

/// A boundary profile by name (`"square"`, `"identity"`, `"exp"`,
/// `"exp_abs"`) or as a tagged object such as `{"kind": "indicator", "lambda": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileSpec {
    Name(String),
    Kind(ProfileKind),
}

impl ProfileSpec {
    pub fn build(&self) -> bmolab::Result<BoundaryProfile> {
        match self {
            ProfileSpec::Kind(k) => BoundaryProfile::from_kind(*k),
            ProfileSpec::Name(n) => match n.as_str() {
                "square" => Ok(BoundaryProfile::square()),
                "identity" => Ok(BoundaryProfile::identity()),
                "exp" => Ok(BoundaryProfile::exp()),
                "exp_abs" | "expabs" => Ok(BoundaryProfile::exp_abs()),
                other => Err(bmolab::Error::Parse(format!("unknown profile `{other}`"))),
            },
        }
    }
}

/// A list of dimensions or an inclusive range `"a..b"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Dims {
    List(Vec<usize>),
    Range(String),
}

impl Dims {
    pub fn expand(&self) -> Result<Vec<usize>, String> {
        let v = match self {
            Dims::List(v) => v.clone(),
            Dims::Range(s) => {
                let (a, b) = s.split_once("..").ok_or_else(|| format!("range `{s}` is not of the form a..b"))?;
                let a: usize = a.trim().parse().map_err(|_| format!("range start `{a}`"))?;
                let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| format!("range end `{b}`"))?;
                (a..=b).collect()
            }
        };
        if v.is_empty() || v.contains(&0) {
            return Err("dimensions must be a nonempty list of positive integers".into());
        }
        Ok(v)
    }
}

/// Transform applied to a test function before extension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformSpec {
    Identity,
    Square,
    Log,
    Power(f64),
}

fn grid_size<'de, D: serde::Deserializer<'de>>(d: D) -> Result<[usize; 2], D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum G {
        Pair([usize; 2]),
        Text(String),
    }
    match G::deserialize(d)? {
        G::Pair(p) => Ok(p),
        G::Text(s) => {
            let parse = |t: &str| t.trim().parse::<usize>().ok();
            match s.split_once(['x', 'X']) {
                Some((a, b)) => match (parse(a), parse(b)) {
                    (Some(a), Some(b)) => Ok([a, b]),
                    _ => Err(serde::de::Error::custom(format!("grid `{s}` is not of the form NxM"))),
                },
                None => Err(serde::de::Error::custom(format!("grid `{s}` is not of the form NxM"))),
            }
        }
    }
}

fn default_tol() -> f64 {
    1e-6
}
fn default_directions() -> usize {
    17
}
fn default_exact_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvelopeCheck {
    /// Compare every node of the window with `x1` or `x2`.
    Exact {
        expr: String,
        #[serde(default = "default_exact_tol")]
        tolerance: f64,
    },
    /// `max_v U(u, v) ≤ bound + tolerance`.
    UpperBound { u: f64, bound: f64, tolerance: f64 },
    /// `U(u, v) ≥ bound − tolerance`.
    LowerBound { u: f64, v: f64, bound: f64, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeParams {
    pub domain: DomainSpec,
    pub f: ProfileSpec,
    /// `[nu, nv]` or `"nuxnv"`.
    #[serde(deserialize_with = "grid_size")]
    pub grid: [usize; 2],
    pub window: [f64; 2],
    #[serde(default)]
    pub margin: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
    #[serde(default)]
    pub checks: Vec<EnvelopeCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendParams {
    pub kernel: KernelKind,
    pub phi: TestFunction,
    #[serde(default = "identity")]
    pub transform: TransformSpec,
    pub points: Vec<SpaceTimePoint>,
    /// Expected values, one per point; `null` entries are not compared.
    #[serde(default)]
    pub expect: Vec<Option<f64>>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// The extension is expected to diverge.
    #[serde(default)]
    pub divergent: bool,
}

fn identity() -> TransformSpec {
    TransformSpec::Identity
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProbeSpec {
    /// Scale ray plus 1000 Halton points.
    Default,
    Ray { from: i32, to: i32 },
    Halton { count: usize, half_width: f64, t_range: [f64; 2] },
}

fn default_probe() -> ProbeSpec {
    ProbeSpec::Default
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    Bmo,
    /// `[w]_p`; `null` or a missing value gives `p = ∞`.
    Ap(Option<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormParams {
    pub kernel: KernelKind,
    pub phi: TestFunction,
    pub measure: Measure,
    #[serde(default = "default_probe")]
    pub probe: ProbeSpec,
    /// Pass iff the value is at most this; absent means "finite".
    #[serde(default)]
    pub max: Option<f64>,
    /// Pass iff the supremum is unbounded.
    #[serde(default)]
    pub expect_unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SimCheck {
    Representation,
    /// `U = x2 − x1²` (`"variance"`) or `U = x2` (`"x2"`) along paths of `scale·g`.
    Supermartingale { u: String, scale: f64, checkpoints: Vec<f64> },
}

fn default_dt() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateParams {
    pub kernel: KernelKind,
    pub z0: SpaceTimePoint,
    pub paths: usize,
    pub g: TestFunction,
    pub check: SimCheck,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstantsCheck {
    Polygamma,
    HeatBall,
    HeatBallConstant,
    NormRatio,
}

fn default_radii() -> Vec<f64> {
    vec![1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsParams {
    pub check: ConstantsCheck,
    pub n: Dims,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub kernel: Option<KernelKind>,
    /// Largest allowed max/min spread of `ratio/√n` for `norm_ratio`.
    #[serde(default)]
    pub max_spread: Option<f64>,
}

fn default_e() -> f64 {
    std::f64::consts::E
}
fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JnParams {
    pub phi: bmolab::semigroup::Shape,
    pub kernel: KernelKind,
    pub n: usize,
    /// Number of random `(z, λ)` pairs.
    pub lambdas: usize,
    #[serde(default = "default_lambda_max")]
    pub lambda_max: f64,
    #[serde(default = "default_e", rename = "C")]
    pub c: f64,
    #[serde(default = "one")]
    pub eps: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default = "default_probe")]
    pub probe: ProbeSpec,
}

fn default_lambda_max() -> f64 {
    6.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferParams {
    pub count: usize,
    pub mu: f64,
    pub mu_tilde: f64,
    pub profiles: Vec<ProfileSpec>,
    pub dims: Vec<usize>,
    pub window: [f64; 2],
    /// Fine grid; the coarse comparison grid halves both counts.
    #[serde(deserialize_with = "grid_size")]
    pub grid: [usize; 2],
    #[serde(default)]
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallParams {
    pub phi: bmolab::semigroup::Shape,
    pub n: usize,
    pub f: ProfileSpec,
    /// `C_f(μ)`.
    pub c_f: f64,
    pub mu: f64,
    /// Fraction of `μ/√n` assigned to `‖cφ‖_*`.
    #[serde(default = "half")]
    pub c_star: f64,
    /// `[offset, radius]` pairs.
    pub balls: Vec<[f64; 2]>,
}

fn half() -> f64 {
    0.5
}

/// Parameters after validation.
#[derive(Debug, Clone)]
pub enum Params {
    Envelope(EnvelopeParams),
    Extend(ExtendParams),
    Norm(NormParams),
    Simulate(SimulateParams),
    Constants(ConstantsParams),
    Jn(JnParams),
    Transfer(TransferParams),
    Ball(BallParams),
}

fn typed<T: DeserializeOwned>(file: &str, v: &Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let p = e.path().to_string();
        let key = if p == "." { "params".to_string() } else { format!("params.{p}") };
        ConfigError::Key { file: file.into(), key, msg: e.into_inner().to_string() }
    })
}

fn key_err(file: &str, key: &str, msg: impl std::fmt::Display) -> ConfigError {
    ConfigError::Key { file: file.into(), key: key.into(), msg: msg.to_string() }
}

impl ExperimentConfig {
    pub fn from_str(text: &str, file: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Syntax {
                path: if path == "." { file.to_string() } else { format!("{file} [{path}]") },
                line: inner.line(),
                column: inner.column(),
                msg: inner.to_string(),
            }
        })?;
        if cfg.name.trim().is_empty() {
            return Err(key_err(file, "name", "must not be empty"));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.display().to_string(), e))?;
        Self::from_str(&text, &path.display().to_string())
    }

    /// Parses and checks the kind-specific parameters.
    pub fn validate(&self, file: &str) -> Result<Params, ConfigError> {
        let v = &self.params;
        let p = match self.kind {
            Kind::Envelope => {
                let p: EnvelopeParams = typed(file, v)?;
                p.domain.validated().map_err(|e| key_err(file, "params.domain", e))?;
                p.f.build().map_err(|e| key_err(file, "params.f", e))?;
                if p.grid[0] < 3 || p.grid[1] < 2 {
                    return Err(key_err(file, "params.grid", "need at least 3 columns and 2 rows"));
                }
                if !(p.window[1] > p.window[0]) {
                    return Err(key_err(file, "params.window", "must be an increasing pair"));
                }
                if !(p.tol > 0.0) {
                    return Err(key_err(file, "params.tol", "must be positive"));
                }
                for (k, c) in p.checks.iter().enumerate() {
                    if let EnvelopeCheck::Exact { expr, .. } = c {
                        if expr != "x1" && expr != "x2" {
                            return Err(key_err(file, &format!("params.checks[{k}].expr"), "must be \"x1\" or \"x2\""));
                        }
                    }
                }
                Params::Envelope(p)
            }
            Kind::Extend => {
                let p: ExtendParams = typed(file, v)?;
                check_fn(file, "params.phi", &p.phi)?;
                if p.points.is_empty() {
                    return Err(key_err(file, "params.points", "at least one point"));
                }
                for (k, z) in p.points.iter().enumerate() {
                    SpaceTimePoint::new(z.y.clone(), z.t).map_err(|e| key_err(file, &format!("params.points[{k}]"), e))?;
                    if z.dim() != p.phi.n {
                        return Err(key_err(file, &format!("params.points[{k}].y"), "dimension differs from phi.n"));
                    }
                }
                if !p.expect.is_empty() && p.expect.len() != p.points.len() {
                    return Err(key_err(file, "params.expect", "one entry per point"));
                }
                Params::Extend(p)
            }
            Kind::Norm => {
                let p: NormParams = typed(file, v)?;
                check_fn(file, "params.phi", &p.phi)?;
                if let Measure::Ap(Some(q)) = p.measure {
                    if !(q > 1.0) {
                        return Err(key_err(file, "params.measure.ap", "exponent must exceed 1"));
                    }
                }
                Params::Norm(p)
            }
            Kind::Simulate => {
                let p: SimulateParams = typed(file, v)?;
                check_fn(file, "params.g", &p.g)?;
                if p.g.n != p.z0.dim() {
                    return Err(key_err(file, "params.z0.y", "dimension differs from g.n"));
                }
                if p.paths == 0 {
                    return Err(key_err(file, "params.paths", "must be positive"));
                }
                if let SimCheck::Supermartingale { u, checkpoints, .. } = &p.check {
                    if u != "variance" && u != "x2" {
                        return Err(key_err(file, "params.check.supermartingale.u", "must be \"variance\" or \"x2\""));
                    }
                    if checkpoints.is_empty() {
                        return Err(key_err(file, "params.check.supermartingale.checkpoints", "at least one"));
                    }
                }
                Params::Simulate(p)
            }
            Kind::Constants => {
                let p: ConstantsParams = typed(file, v)?;
                p.n.expand().map_err(|e| key_err(file, "params.n", e))?;
                if p.radii.iter().any(|r| !(*r > 0.0)) {
                    return Err(key_err(file, "params.radii", "radii must be positive"));
                }
                Params::Constants(p)
            }
            Kind::Jn => {
                let p: JnParams = typed(file, v)?;
                TestFunction::new(p.phi.clone(), p.n).map_err(|e| key_err(file, "params.phi", e))?;
                if p.lambdas == 0 || !(p.lambda_max > 0.0) {
                    return Err(key_err(file, "params.lambdas", "need a positive count and lambda_max"));
                }
                Params::Jn(p)
            }
            Kind::Transfer => {
                let p: TransferParams = typed(file, v)?;
                if !(p.mu_tilde > 0.0 && p.mu_tilde < p.mu) {
                    return Err(key_err(file, "params.mu_tilde", "must lie in (0, mu)"));
                }
                DomainSpec::bmo(p.mu).map_err(|e| key_err(file, "params.mu", e))?;
                if p.profiles.is_empty() || p.dims.is_empty() || p.dims.contains(&0) {
                    return Err(key_err(file, "params.profiles", "need profiles and positive dimensions"));
                }
                for (k, f) in p.profiles.iter().enumerate() {
                    f.build().map_err(|e| key_err(file, &format!("params.profiles[{k}]"), e))?;
                }
                if !(p.window[1] > p.window[0]) || p.grid[0] < 6 || p.grid[1] < 4 {
                    return Err(key_err(file, "params.grid", "window must increase and the grid must halve cleanly"));
                }
                Params::Transfer(p)
            }
            Kind::Ball => {
                let p: BallParams = typed(file, v)?;
                let phi = TestFunction::new(p.phi.clone(), p.n).map_err(|e| key_err(file, "params.phi", e))?;
                if !phi.is_radial() {
                    return Err(key_err(file, "params.phi", "must be radial"));
                }
                p.f.build().map_err(|e| key_err(file, "params.f", e))?;
                if p.balls.is_empty() || p.balls.iter().any(|b| !(b[1] > 0.0 && b[0] >= 0.0)) {
                    return Err(key_err(file, "params.balls", "need [offset ≥ 0, radius > 0] pairs"));
                }
                Params::Ball(p)
            }
        };
        Ok(p)
    }
}

fn check_fn(file: &str, key: &str, g: &TestFunction) -> Result<(), ConfigError> {
    TestFunction::new(g.shape.clone(), g.n).map(|_| ()).map_err(|e| key_err(file, key, e))
}
