//! JSON run configuration.
//!
//! Documents carry `"version": 1`; unknown keys are rejected everywhere.
//! Operators, sets and maps are tagged by `"kind"`.

use std::fmt;
use std::path::{Path, PathBuf};

use monodr_core::demiclosedness::Tolerances;
use monodr_core::operators::OperatorMap;
use monodr_core::sampling::DEFAULT_SEED;
use monodr_core::splitting::{DEFAULT_MAX_ITER, DEFAULT_TOL};
use monodr_core::{AffineSubspace, ConvexSet, MonotoneOperator, Vector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column} ({path}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {reason}")]
    Schema { field: String, reason: String },
}

impl ConfigError {
    fn schema(field: impl Into<String>, reason: impl fmt::Display) -> Self {
        ConfigError::Schema {
            field: field.into(),
            reason: reason.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Demo,
    Solve,
    Consensus,
    Check,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lower: Vec<f64>, upper: Vec<f64> },
    Affine {
        anchor: Vec<f64>,
        #[serde(default)]
        directions: Vec<Vec<f64>>,
    },
    Halfspace { normal: Vec<f64>, offset: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorSpec {
    // braces so that unknown keys next to the tag are still rejected
    Zero {},
    LinearMonotone { matrix: Vec<Vec<f64>> },
    NormalCone { set: SetSpec },
    SubdiffAbsSum { weight: f64 },
    SubdiffQuadratic { q: Vec<Vec<f64>>, b: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Identity {},
    Scale { factor: f64 },
    Resolvent { operator: OperatorSpec },
    Reflector { operator: OperatorSpec },
    Projector { set: SetSpec },
    ComplementProjector { set: SetSpec },
    DouglasRachford { a: OperatorSpec, b: OperatorSpec },
    Averaged { map: Box<MapSpec> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Theorem22,
    FirmPrinciple,
    NonexpPrinciple,
    Classical,
    MultiFirm,
    MultiNonexp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceSpec {
    pub anchor: Vec<f64>,
    #[serde(default)]
    pub directions: Vec<Vec<f64>>,
}

/// Certificate run over recorded sequences.
///
/// `theorem22` reads `sequences[0]` as `x_n` and `sequences[1]` as `u_n`;
/// the single-map certificates read `sequences[0]` as `z_n`; the
/// multi-operator ones take one sequence per map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckSpec {
    pub certificate: CertificateKind,
    #[serde(default)]
    pub maps: Vec<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<Vec<Vec<f64>>>>,
    /// JSON file holding the sequences, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences_file: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<SubspaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<SubspaceSpec>,
    /// Strong limit of `z_n - T z_n` for the classical certificate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(default = "default_cert_tol")]
    pub hyp_tol: f64,
    #[serde(default = "default_cert_tol")]
    pub concl_tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DemoKind {
    Zarantonello,
    Counterexample,
    Svaiter,
    Feasibility,
}

/// Seed written either as a JSON integer or as a hex string.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Seed(pub u64);

impl Default for Seed {
    fn default() -> Self {
        Seed(DEFAULT_SEED)
    }
}

pub fn parse_hex_seed(s: &str) -> Result<u64, String> {
    let digits = s.trim().trim_start_matches("0x").trim_start_matches("0X");
    u64::from_str_radix(digits, 16).map_err(|e| format!("bad hex seed `{s}`: {e}"))
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("0x{:X}", self.0))
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Hex(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Seed(v)),
            Raw::Hex(s) => parse_hex_seed(&s).map(Seed).map_err(serde::de::Error::custom),
        }
    }
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}

fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}

fn default_cert_tol() -> f64 {
    monodr_core::demiclosedness::DEFAULT_HYP_TOL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub demo: Option<DemoKind>,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    /// Sets for the feasibility demo.
    #[serde(default)]
    pub sets: Vec<SetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Vec<f64>>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<Vec<usize>>,
    /// Sequence length for the unit-vector demos.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: Seed,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check: Option<CheckSpec>,
}

impl RunConfig {
    /// A config with every default filled in.
    pub fn new(command: CommandKind) -> Self {
        RunConfig {
            version: SCHEMA_VERSION,
            command,
            demo: None,
            operators: Vec::new(),
            sets: Vec::new(),
            z0: None,
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            probes: None,
            n: None,
            out: None,
            seed: Seed::default(),
            check: None,
        }
    }

    /// Checks everything that does not need the operator payloads.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != SCHEMA_VERSION {
            return Err(ConfigError::schema("version", format!("expected {SCHEMA_VERSION}, found {}", self.version)));
        }
        if !(self.tol.is_finite() && self.tol >= 0.0) {
            return Err(ConfigError::schema("tol", "must be finite and >= 0"));
        }
        if self.max_iter == 0 {
            return Err(ConfigError::schema("max_iter", "must be positive"));
        }
        if self.n == Some(0) {
            return Err(ConfigError::schema("n", "must be at least 1"));
        }
        for (i, op) in self.operators.iter().enumerate() {
            op.build().map_err(|e| e.under(&format!("operators[{i}]")))?;
        }
        for (i, s) in self.sets.iter().enumerate() {
            s.build().map_err(|e| e.under(&format!("sets[{i}]")))?;
        }
        match self.command {
            CommandKind::Solve if self.operators.len() != 2 => {
                Err(ConfigError::schema("operators", "solve needs exactly two operators"))
            }
            CommandKind::Consensus if self.operators.len() < 2 => {
                Err(ConfigError::schema("operators", "consensus needs at least two operators"))
            }
            CommandKind::Check if self.check.is_none() => Err(ConfigError::schema("check", "missing")),
            _ => Ok(()),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_named(text, "<config>")
}

fn parse_config_named(text: &str, name: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ConfigError::Parse {
            path: if path == "." { name.to_string() } else { path },
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut cfg = parse_config_named(&text, &path.display().to_string())?;
    if let Some(check) = cfg.check.as_mut() {
        if let Some(file) = check.sequences_file.as_mut() {
            if file.is_relative() {
                if let Some(dir) = path.parent() {
                    *file = dir.join(&*file);
                }
            }
        }
    }
    Ok(cfg)
}

pub fn to_json(cfg: &RunConfig) -> String {
    serde_json::to_string_pretty(cfg).expect("config serializes")
}

/// Error raised while turning a spec into a core value.
#[derive(Debug)]
pub struct BuildError {
    field: String,
    reason: String,
}

impl BuildError {
    pub(crate) fn under(self, prefix: &str) -> ConfigError {
        let field = if self.field.is_empty() {
            prefix.to_string()
        } else {
            format!("{prefix}.{}", self.field)
        };
        ConfigError::schema(field, self.reason)
    }

    fn nest(self, prefix: &str) -> BuildError {
        BuildError {
            field: if self.field.is_empty() {
                prefix.to_string()
            } else {
                format!("{prefix}.{}", self.field)
            },
            reason: self.reason,
        }
    }
}

impl From<monodr_core::Error> for BuildError {
    fn from(e: monodr_core::Error) -> Self {
        match e {
            monodr_core::Error::InvalidParameter { field, reason } => BuildError {
                field: field.to_string(),
                reason,
            },
            other => BuildError {
                field: String::new(),
                reason: other.to_string(),
            },
        }
    }
}

fn vector(field: &str, c: &[f64]) -> Result<Vector, BuildError> {
    Vector::new(c.to_vec()).map_err(|e| BuildError::from(e).nest(field))
}

impl SetSpec {
    pub fn build(&self) -> Result<ConvexSet, BuildError> {
        Ok(match self {
            SetSpec::Ball { center, radius } => ConvexSet::ball(vector("center", center)?, *radius)?,
            SetSpec::Box { lower, upper } => ConvexSet::boxed(vector("lower", lower)?, vector("upper", upper)?)?,
            SetSpec::Affine { anchor, directions } => ConvexSet::affine(subspace(anchor, directions)?),
            SetSpec::Halfspace { normal, offset } => ConvexSet::halfspace(vector("normal", normal)?, *offset)?,
        })
    }
}

fn subspace(anchor: &[f64], directions: &[Vec<f64>]) -> Result<AffineSubspace, BuildError> {
    let anchor = vector("anchor", anchor)?;
    let dirs = directions
        .iter()
        .enumerate()
        .map(|(i, d)| vector(&format!("directions[{i}]"), d))
        .collect::<Result<Vec<_>, _>>()?;
    AffineSubspace::new(anchor, dirs).map_err(|e| BuildError::from(e).nest("directions"))
}

impl SubspaceSpec {
    pub fn build(&self) -> Result<AffineSubspace, BuildError> {
        subspace(&self.anchor, &self.directions)
    }
}

impl OperatorSpec {
    pub fn build(&self) -> Result<MonotoneOperator, BuildError> {
        Ok(match self {
            OperatorSpec::Zero {} => MonotoneOperator::Zero,
            OperatorSpec::LinearMonotone { matrix } => {
                MonotoneOperator::linear(matrix).map_err(|e| BuildError::from(e).nest("matrix"))?
            }
            OperatorSpec::NormalCone { set } => {
                MonotoneOperator::normal_cone(set.build().map_err(|e| e.nest("set"))?)?
            }
            OperatorSpec::SubdiffAbsSum { weight } => MonotoneOperator::abs_sum(*weight)?,
            OperatorSpec::SubdiffQuadratic { q, b } => MonotoneOperator::quadratic(q, vector("b", b)?)?,
        })
    }
}

impl MapSpec {
    pub fn build(&self) -> Result<OperatorMap, BuildError> {
        Ok(match self {
            MapSpec::Identity {} => OperatorMap::Identity,
            MapSpec::Scale { factor } => OperatorMap::Scale(*factor),
            MapSpec::Resolvent { operator } => OperatorMap::Resolvent(operator.build().map_err(|e| e.nest("operator"))?),
            MapSpec::Reflector { operator } => OperatorMap::Reflector(operator.build().map_err(|e| e.nest("operator"))?),
            MapSpec::Projector { set } => OperatorMap::Projector(set.build().map_err(|e| e.nest("set"))?),
            MapSpec::ComplementProjector { set } => {
                OperatorMap::ComplementProjector(set.build().map_err(|e| e.nest("set"))?)
            }
            MapSpec::DouglasRachford { a, b } => OperatorMap::DouglasRachford(
                a.build().map_err(|e| e.nest("a"))?,
                b.build().map_err(|e| e.nest("b"))?,
            ),
            MapSpec::Averaged { map } => OperatorMap::averaged(map.build().map_err(|e| e.nest("map"))?),
        })
    }
}

impl CheckSpec {
    pub fn tolerances(&self, probes: Option<Vec<usize>>) -> Tolerances {
        Tolerances {
            window: self.window,
            hyp_tol: self.hyp_tol,
            concl_tol: self.concl_tol,
            probes,
        }
    }

    pub fn maps(&self) -> Result<Vec<OperatorMap>, ConfigError> {
        self.maps
            .iter()
            .enumerate()
            .map(|(i, m)| m.build().map_err(|e| e.under(&format!("check.maps[{i}]"))))
            .collect()
    }

    pub fn operator(&self) -> Result<Option<MonotoneOperator>, ConfigError> {
        self.operator
            .as_ref()
            .map(|o| o.build().map_err(|e| e.under("check.operator")))
            .transpose()
    }

    pub fn subspace(&self, which: &str) -> Result<AffineSubspace, ConfigError> {
        let spec = if which == "c" { &self.c } else { &self.d };
        let spec = spec
            .as_ref()
            .ok_or_else(|| ConfigError::schema(format!("check.{which}"), "missing"))?;
        spec.build().map_err(|e| e.under(&format!("check.{which}")))
    }

    /// Sequences from the inline field or the side file.
    pub fn load_sequences(&self) -> Result<Vec<Vec<Vector>>, ConfigError> {
        let raw = match (&self.sequences, &self.sequences_file) {
            (Some(s), None) => s.clone(),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                let de = &mut serde_json::Deserializer::from_str(&text);
                serde_path_to_error::deserialize(de).map_err(|e| {
                    let path = e.path().to_string();
                    let inner = e.into_inner();
                    ConfigError::Parse {
                        path,
                        line: inner.line(),
                        column: inner.column(),
                        message: inner.to_string(),
                    }
                })?
            }
            _ => {
                return Err(ConfigError::schema(
                    "check.sequences",
                    "give exactly one of `sequences` and `sequences_file`",
                ))
            }
        };
        raw.into_iter()
            .enumerate()
            .map(|(i, seq)| {
                seq.into_iter()
                    .enumerate()
                    .map(|(n, c)| {
                        Vector::new(c).map_err(|e| ConfigError::schema(format!("check.sequences[{i}][{n}]"), e))
                    })
                    .collect()
            })
            .collect()
    }
}
