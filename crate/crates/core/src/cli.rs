//! Command-line front end: argument and config-file parsing, validation,
//! dispatch, and report assembly. Writing files is left to the binary.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::approx::{BoundCheck, DeltaSolver};
use crate::concentration::{ConcentrationProblem, Lemma1Check, C_GRID};
use crate::constructions::{FactorWidths, SharpExample, Theorem2Family};
use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::lattice::DiscreteSet;
use crate::linalg::{frobenius_sq, singular_values};
use crate::pipeline::{self, PipelineParams};
use crate::spectrum::SpectrumSet;
use crate::width::{extract_subspace, weyl_check, PerturbedBasis};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn config_err<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

/// Evaluates `+ - * /` expressions over numbers, `pi` and `sqrt(...)`.
pub fn parse_real(s: &str) -> Result<f64> {
    let tokens = tokenize(s)?;
    let mut p = ExprParser { tokens: &tokens, pos: 0 };
    let v = p.sum()?;
    if p.pos != tokens.len() {
        return config_err(format!("unexpected trailing input in `{s}`"));
    }
    if !v.is_finite() {
        return config_err(format!("`{s}` is not a finite number"));
    }
    Ok(v)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Op(char),
    Sqrt,
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = s.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c == 'π' {
            out.push(Tok::Num(PI));
            i += 1;
        } else if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_alphabetic() {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            if word.eq_ignore_ascii_case("pi") {
                out.push(Tok::Num(PI));
            } else if word == "sqrt" {
                out.push(Tok::Sqrt);
            } else {
                return config_err(format!("unknown name `{word}` in `{s}`"));
            }
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            match text.parse::<f64>() {
                Ok(v) => out.push(Tok::Num(v)),
                Err(_) => return config_err(format!("bad number `{text}` in `{s}`")),
            }
        } else {
            return config_err(format!("unexpected `{c}` in `{s}`"));
        }
    }
    Ok(out)
}

struct ExprParser<'a> {
    tokens: &'a [Tok],
    pos: usize,
}

impl ExprParser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn sum(&mut self) -> Result<f64> {
        let mut v = self.product()?;
        while let Some(Tok::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.product()?;
            v = if op == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn product(&mut self) -> Result<f64> {
        let mut v = self.unary()?;
        while let Some(Tok::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            v = if op == '*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn unary(&mut self) -> Result<f64> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<f64> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                // implicit product, as in `2pi`
                if let Some(Tok::Num(_)) | Some(Tok::Op('(')) = self.peek() {
                    return Ok(v * self.atom()?);
                }
                Ok(v)
            }
            Some(Tok::Sqrt) => {
                self.pos += 1;
                if self.peek() != Some(&Tok::Op('(')) {
                    return config_err("`sqrt` needs parentheses");
                }
                Ok(self.atom()?.sqrt())
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(&Tok::Op(')')) {
                    return config_err("missing `)`");
                }
                self.pos += 1;
                Ok(v)
            }
            other => config_err(format!("expected a number, found {other:?}")),
        }
    }
}

/// A real number given as a literal or an expression such as `pi/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl FromStr for Real {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_real(s).map(Real)
    }
}

impl Serialize for Real {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrText {
    Num(f64),
    Text(String),
}

impl NumOrText {
    fn value(self) -> Result<f64> {
        match self {
            NumOrText::Num(v) => Ok(v),
            NumOrText::Text(t) => parse_real(&t),
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        NumOrText::deserialize(de)?.value().map(Real).map_err(serde::de::Error::custom)
    }
}

/// Comma-separated list of reals, or an array in config files.
#[derive(Debug, Clone, PartialEq)]
pub struct RealList(pub Vec<f64>);

impl FromStr for RealList {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches('[').trim_end_matches(']');
        inner.split(',').filter(|p| !p.trim().is_empty()).map(parse_real).collect::<Result<_>>().map(RealList)
    }
}

impl Serialize for RealList {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RealList {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<NumOrText>),
            Text(String),
        }
        let parsed = match Raw::deserialize(de)? {
            Raw::List(items) => items.into_iter().map(NumOrText::value).collect::<Result<_>>().map(RealList),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// `[[lo, hi], ...]` in radians; entries may be expressions. A bare
/// number `a` stands for `[-a, a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumArg(pub SpectrumSet);

impl FromStr for SpectrumArg {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if !t.starts_with('[') {
            let a = parse_real(t)?;
            return SpectrumSet::symmetric(a).map(SpectrumArg).map_err(|e| Error::Config(e.to_string()));
        }
        if !t.ends_with(']') || t.matches('[').count() != t.matches(']').count() {
            return config_err(format!("unbalanced brackets in `{s}`"));
        }
        let body = &t[1..t.len() - 1];
        let groups: Vec<&str> = if body.contains('[') {
            body.split(']')
                .map(|g| g.trim().trim_start_matches(',').trim())
                .filter(|g| !g.is_empty())
                .map(|g| g.strip_prefix('[').ok_or_else(|| Error::Config(format!("malformed interval `{g}` in `{s}`"))))
                .collect::<Result<_>>()?
        } else {
            vec![body]
        };
        let mut pairs = Vec::new();
        for g in groups {
            let ends: Vec<&str> = g.split(',').collect();
            if ends.len() != 2 {
                return config_err(format!("interval `[{g}]` needs two endpoints"));
            }
            pairs.push((parse_real(ends[0])?, parse_real(ends[1])?));
        }
        SpectrumSet::from_pairs(&pairs).map(SpectrumArg).map_err(|e| Error::Config(e.to_string()))
    }
}

impl Serialize for SpectrumArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.0.intervals().iter().map(|iv| [iv.lo(), iv.hi()]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpectrumArg {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Pairs(Vec<[NumOrText; 2]>),
            Num(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(de)? {
            Raw::Pairs(pairs) => pairs
                .into_iter()
                .map(|[lo, hi]| Ok((lo.value()?, hi.value()?)))
                .collect::<Result<Vec<_>>>()
                .and_then(|p| SpectrumSet::from_pairs(&p))
                .map(SpectrumArg),
            Raw::Num(a) => SpectrumSet::symmetric(a).map(SpectrumArg),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// Point-set generators:
/// `integers(M)` (ℤ ∩ [−M, M]), `integers(lo, hi)`, `perturbed_integers(R, M)`,
/// `arithmetic(start, step, count)`, `list(x1, x2, ...)` and `file:path`
/// (one real per line, `#` comments).
#[derive(Debug, Clone, PartialEq)]
pub enum PointsArg {
    Integers(i64, i64),
    PerturbedIntegers(f64, i64),
    Arithmetic(f64, f64, usize),
    List(Vec<f64>),
    File(PathBuf),
}

impl PointsArg {
    pub fn build(&self) -> Result<DiscreteSet> {
        let set = match self {
            PointsArg::Integers(lo, hi) => DiscreteSet::integers(*lo, *hi),
            PointsArg::PerturbedIntegers(r, m) => DiscreteSet::perturbed_integers(*r, *m),
            PointsArg::Arithmetic(s, h, n) => DiscreteSet::arithmetic(*s, *h, *n),
            PointsArg::List(v) => DiscreteSet::new(v.clone()),
            PointsArg::File(path) => DiscreteSet::new(read_points(path)?),
        };
        set.map_err(|e| Error::Config(e.to_string()))
    }
}

fn read_points(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read points file {}: {e}", path.display())))?;
    text.lines().map(|l| l.split('#').next().unwrap().trim()).filter(|l| !l.is_empty()).map(parse_real).collect()
}

fn as_int(v: f64, what: &str) -> Result<i64> {
    if v.fract() != 0.0 || v.abs() > 1e15 {
        return config_err(format!("{what} must be an integer, got {v}"));
    }
    Ok(v as i64)
}

impl FromStr for PointsArg {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(path) = t.strip_prefix("file:") {
            return Ok(PointsArg::File(PathBuf::from(path.trim())));
        }
        let open = t.find('(').ok_or_else(|| Error::Config(format!("point set `{s}` is not `name(args)`")))?;
        if !t.ends_with(')') {
            return config_err(format!("point set `{s}` is missing `)`"));
        }
        let name = t[..open].trim();
        let args: Vec<f64> = t[open + 1..t.len() - 1]
            .split(',')
            .filter(|a| !a.trim().is_empty())
            .map(parse_real)
            .collect::<Result<_>>()?;
        match (name, args.as_slice()) {
            ("integers", [m]) => {
                let m = as_int(*m, "integers(M)")?;
                Ok(PointsArg::Integers(-m, m))
            }
            ("integers", [lo, hi]) => Ok(PointsArg::Integers(as_int(*lo, "lo")?, as_int(*hi, "hi")?)),
            ("perturbed_integers", [r, m]) => Ok(PointsArg::PerturbedIntegers(*r, as_int(*m, "M")?)),
            ("arithmetic", [start, step, count]) => {
                let n = as_int(*count, "count")?;
                if n < 0 {
                    return config_err("arithmetic count must be nonnegative");
                }
                Ok(PointsArg::Arithmetic(*start, *step, n as usize))
            }
            ("list", v) => Ok(PointsArg::List(v.to_vec())),
            _ => config_err(format!("unknown point set `{s}`")),
        }
    }
}

impl fmt::Display for PointsArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointsArg::Integers(lo, hi) => write!(f, "integers({lo}, {hi})"),
            PointsArg::PerturbedIntegers(r, m) => write!(f, "perturbed_integers({r:?}, {m})"),
            PointsArg::Arithmetic(s, h, n) => write!(f, "arithmetic({s:?}, {h:?}, {n})"),
            PointsArg::List(v) => {
                let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
                write!(f, "list({})", items.join(", "))
            }
            PointsArg::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl Serialize for PointsArg {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PointsArg {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<NumOrText>),
            Text(String),
        }
        let parsed = match Raw::deserialize(de)? {
            Raw::List(items) => items.into_iter().map(NumOrText::value).collect::<Result<_>>().map(PointsArg::List),
            Raw::Text(t) => t.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Parser)]
#[command(name = "pwlab", version, about = "Sampling, interpolation and density experiments for Paley–Wiener spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML config; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// JSON report path; CSV tables go next to it. Defaults to stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized trials
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Progress messages on stderr
    #[arg(long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Density estimates D⁺, D⁻, D* of a point set.
    Density(DensityArgs),
    /// Norm-budgeted or ridge approximation of δ_ξ on a window.
    Approx(ApproxArgs),
    /// Sinc atoms on ℤ with spectrum [−a, a].
    Sharpness(SharpnessArgs),
    /// Randomized check of the well-conditioned subspace construction.
    Width(WidthArgs),
    /// Spectrum of the band-then-time limiting operator.
    Concentration(ConcentrationArgs),
    /// Two-sideband family on perturbed integers.
    Theorem2(Theorem2Args),
    /// m(S) ≥ 2π(1 − d²)·density.
    BoundCheck(BoundCheckArgs),
    /// Finite-window run of the density argument.
    Pipeline(PipelineArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Density(_) => "density",
            Command::Approx(_) => "approx",
            Command::Sharpness(_) => "sharpness",
            Command::Width(_) => "width",
            Command::Concentration(_) => "concentration",
            Command::Theorem2(_) => "theorem2",
            Command::BoundCheck(_) => "bound-check",
            Command::Pipeline(_) => "pipeline",
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct DensityArgs {
    #[arg(long)]
    pub points: Option<PointsArg>,
    /// Window length for D⁺ and D⁻.
    #[arg(long)]
    pub r: Option<Real>,
    /// Half-width of the range [−a, a] used for D⁻ and D*.
    #[arg(long)]
    pub a: Option<Real>,
    /// Values of a for a D* curve (CSV).
    #[arg(long)]
    pub a_grid: Option<RealList>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ApproxArgs {
    #[arg(long)]
    pub spectrum: Option<SpectrumArg>,
    #[arg(long)]
    pub points: Option<PointsArg>,
    /// Target point; the nearest point of the window is used.
    #[arg(long)]
    pub xi: Option<Real>,
    /// Norm budget R.
    #[arg(long)]
    pub budget: Option<Real>,
    /// Ridge weights, descending.
    #[arg(long)]
    pub mu_grid: Option<RealList>,
    /// Keep only points within this distance of ξ.
    #[arg(long)]
    pub window: Option<Real>,
    /// Include the coefficient vector in the report.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub coefficients: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SharpnessArgs {
    #[arg(long)]
    pub a: Option<Real>,
    /// Partial-sum cutoff for the lattice error.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct WidthArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<Real>,
    #[arg(long)]
    pub alpha: Option<Real>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Config-file seed; `--seed` overrides it.
    #[arg(skip)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConcentrationArgs {
    #[arg(long)]
    pub spectrum: Option<SpectrumArg>,
    /// Time window Q; a bare number T means [−T, T].
    #[arg(long)]
    pub window: Option<SpectrumArg>,
    #[arg(long)]
    pub c_grid: Option<RealList>,
    /// Quadrature nodes per spectrum interval.
    #[arg(long)]
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Theorem2Args {
    #[arg(long)]
    pub eps: Option<Real>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub base: Option<Real>,
    #[arg(long)]
    pub n_max: Option<i64>,
    /// Window half-width in lattice steps.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<i64>,
    /// `shared` (default) or `per-index`.
    #[arg(long)]
    pub widths: Option<String>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct BoundCheckArgs {
    #[arg(long)]
    pub measure: Option<Real>,
    /// Alternative to --measure.
    #[arg(long)]
    pub spectrum: Option<SpectrumArg>,
    #[arg(long)]
    pub d: Option<Real>,
    #[arg(long)]
    pub d_sq: Option<Real>,
    #[arg(long)]
    pub density: Option<Real>,
    /// Mark the inputs as finite-window estimates.
    #[arg(long)]
    #[serde(default, skip_serializing_if = "is_false")]
    pub finite_window: bool,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PipelineArgs {
    #[arg(long)]
    pub spectrum: Option<SpectrumArg>,
    #[arg(long)]
    pub points: Option<PointsArg>,
    #[arg(long)]
    pub d: Option<Real>,
    #[arg(long)]
    pub d_sq: Option<Real>,
    #[arg(long)]
    pub alpha: Option<Real>,
    #[arg(long)]
    pub delta: Option<Real>,
    #[arg(long)]
    pub eps: Option<Real>,
    #[arg(long)]
    pub r: Option<Real>,
    #[arg(long)]
    pub center: Option<Real>,
    /// Atoms are scale·K_S(· − ξ).
    #[arg(long)]
    pub scale: Option<Real>,
}

/// Contents of a `--config` file. Top-level `spectrum` and `points` fill in
/// for subcommand tables that omit them.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub spectrum: Option<SpectrumArg>,
    pub points: Option<PointsArg>,
    pub density: Option<DensityArgs>,
    pub approx: Option<ApproxArgs>,
    pub sharpness: Option<SharpnessArgs>,
    pub width: Option<WidthArgs>,
    pub concentration: Option<ConcentrationArgs>,
    pub theorem2: Option<Theorem2Args>,
    pub bound_check: Option<BoundCheckArgs>,
    pub pipeline: Option<PipelineArgs>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Layers `flags` over `table` over the config's top-level defaults.
fn overlay<T: Serialize + DeserializeOwned>(table: Option<&T>, flags: &T, top: &[(&str, Value)]) -> Result<T> {
    let to_map = |v: Value| match v {
        Value::Object(m) => m,
        _ => serde_json::Map::new(),
    };
    let mut merged = serde_json::Map::new();
    for (k, v) in top {
        if !v.is_null() {
            merged.insert((*k).to_string(), v.clone());
        }
    }
    if let Some(t) = table {
        let m = to_map(serde_json::to_value(t).map_err(|e| Error::Config(e.to_string()))?);
        merged.extend(m.into_iter().filter(|(_, v)| !v.is_null()));
    }
    let m = to_map(serde_json::to_value(flags).map_err(|e| Error::Config(e.to_string()))?);
    merged.extend(m.into_iter().filter(|(_, v)| !v.is_null()));
    serde_json::from_value(Value::Object(merged)).map_err(|e| Error::Config(e.to_string()))
}

fn required<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::Config(format!("missing required parameter `{name}`")))
}

/// Fully resolved and validated invocation.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: Command,
    pub seed: u64,
    pub verbose: bool,
}

impl Resolved {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Self::merge(&cli.command, cli.seed, cli.verbose, &file)
    }

    pub fn merge(command: &Command, seed: Option<u64>, verbose: bool, file: &ConfigFile) -> Result<Self> {
        let spectrum = serde_json::to_value(&file.spectrum).unwrap_or(Value::Null);
        let points = serde_json::to_value(&file.points).unwrap_or(Value::Null);
        let both = [("spectrum", spectrum.clone()), ("points", points.clone())];
        let pts = [("points", points)];
        let spec = [("spectrum", spectrum)];
        let command = match command {
            Command::Density(a) => Command::Density(overlay(file.density.as_ref(), a, &pts)?),
            Command::Approx(a) => Command::Approx(overlay(file.approx.as_ref(), a, &both)?),
            Command::Sharpness(a) => Command::Sharpness(overlay(file.sharpness.as_ref(), a, &[])?),
            Command::Width(a) => Command::Width(overlay(file.width.as_ref(), a, &[])?),
            Command::Concentration(a) => Command::Concentration(overlay(file.concentration.as_ref(), a, &spec)?),
            Command::Theorem2(a) => Command::Theorem2(overlay(file.theorem2.as_ref(), a, &[])?),
            Command::BoundCheck(a) => Command::BoundCheck(overlay(file.bound_check.as_ref(), a, &[])?),
            Command::Pipeline(a) => Command::Pipeline(overlay(file.pipeline.as_ref(), a, &both)?),
        };
        let table_seed = match &command {
            Command::Width(w) => w.seed,
            _ => None,
        };
        let seed = seed.or(table_seed).or(file.seed).unwrap_or(0);
        let resolved = Self { command, seed, verbose };
        resolved.validate()?;
        Ok(resolved)
    }

    /// Checks presence and ranges of every parameter before any work starts.
    fn validate(&self) -> Result<()> {
        match &self.command {
            Command::Density(a) => {
                required(&a.points, "points")?;
                positive(required(&a.r, "r")?, "r")?;
                positive(required(&a.a, "a")?, "a")?;
                if let Some(g) = &a.a_grid {
                    g.0.iter().try_for_each(|&v| positive(Real(v), "a-grid").map(|_| ()))?;
                }
            }
            Command::Approx(a) => {
                required(&a.spectrum, "spectrum")?;
                required(&a.points, "points")?;
                if a.budget.is_some() && a.mu_grid.is_some() {
                    return config_err("give either `budget` or `mu-grid`, not both");
                }
                if let Some(b) = a.budget {
                    positive(b, "budget")?;
                }
                if let Some(g) = &a.mu_grid {
                    if g.0.is_empty() || g.0.iter().any(|&m| !(m > 0.0)) || g.0.windows(2).any(|w| w[0] <= w[1]) {
                        return config_err("`mu-grid` must be positive and strictly descending");
                    }
                }
                if let Some(w) = a.window {
                    positive(w, "window")?;
                }
            }
            Command::Sharpness(a) => {
                let v = required(&a.a, "a")?.0;
                if !(v > 0.0 && v < PI) {
                    return config_err(format!("`a` must lie in (0, π), got {v}"));
                }
                if a.k == Some(0) {
                    return config_err("`K` must be positive");
                }
            }
            Command::Width(a) => {
                let n = required(&a.n, "n")?;
                let d = required(&a.d, "d")?.0;
                let alpha = required(&a.alpha, "alpha")?.0;
                if n == 0 {
                    return config_err("`n` must be positive");
                }
                if !(d > 0.0 && d < 1.0) || !(alpha > 1.0 && alpha * d < 1.0) {
                    return config_err(format!("need 0 < d < 1 and 1 < α < 1/d, got d = {d}, α = {alpha}"));
                }
                if a.trials == Some(0) {
                    return config_err("`trials` must be positive");
                }
            }
            Command::Concentration(a) => {
                required(&a.spectrum, "spectrum")?;
                required(&a.window, "window")?;
                if let Some(g) = &a.c_grid {
                    if g.0.is_empty() || g.0.iter().any(|&c| !(c > 0.0 && c < 1.0)) {
                        return config_err("`c-grid` values must lie in (0, 1)");
                    }
                }
            }
            Command::Theorem2(a) => {
                let eps = required(&a.eps, "eps")?.0;
                let r = required(&a.base, "R")?.0;
                if !(eps > 0.0 && eps < PI / 2.0) || !(r > 1.0) {
                    return config_err(format!("need 0 < ε < π/2 and R > 1, got ε = {eps}, R = {r}"));
                }
                let n_max = a.n_max.unwrap_or(crate::constructions::DEFAULT_N_MAX);
                let k = a.k.unwrap_or(crate::constructions::DEFAULT_WINDOW);
                if n_max < 0 || k < 2 * n_max {
                    return config_err(format!("need n-max ≥ 0 and K ≥ 2·n-max, got n-max = {n_max}, K = {k}"));
                }
                parse_widths(a.widths.as_deref())?;
            }
            Command::BoundCheck(a) => {
                if a.measure.is_some() == a.spectrum.is_some() {
                    return config_err("give exactly one of `measure` and `spectrum`");
                }
                if a.d.is_some() == a.d_sq.is_some() {
                    return config_err("give exactly one of `d` and `d-sq`");
                }
                required(&a.density, "density")?;
            }
            Command::Pipeline(a) => {
                required(&a.spectrum, "spectrum")?;
                required(&a.points, "points")?;
                if a.d.is_some() == a.d_sq.is_some() {
                    return config_err("give exactly one of `d` and `d-sq`");
                }
                for (v, name) in [(&a.alpha, "alpha"), (&a.delta, "delta"), (&a.eps, "eps"), (&a.r, "r")] {
                    required(v, name)?;
                }
            }
        }
        Ok(())
    }
}

fn positive(v: Real, name: &str) -> Result<f64> {
    if !(v.0 > 0.0) {
        return config_err(format!("`{name}` must be positive, got {}", v.0));
    }
    Ok(v.0)
}

fn parse_widths(s: Option<&str>) -> Result<FactorWidths> {
    match s.unwrap_or("shared") {
        "shared" => Ok(FactorWidths::Shared),
        "per-index" => Ok(FactorWidths::PerIndex),
        other => config_err(format!("`widths` must be `shared` or `per-index`, got `{other}`")),
    }
}

/// JSON report written for every run.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub command: &'static str,
    pub config: Value,
    pub result: Value,
    pub timing_ms: f64,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    /// `(name, contents)` of CSV side tables.
    pub tables: Vec<(String, String)>,
    /// False when an internal certificate failed; the report is still written.
    pub certified: bool,
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn verbose(on: bool, msg: impl FnOnce() -> String) {
    if on {
        eprintln!("pwlab: {}", msg());
    }
}

pub fn execute(r: &Resolved) -> Result<Outcome> {
    let start = Instant::now();
    let mut config = match &r.command {
        Command::Density(a) => to_json(a),
        Command::Approx(a) => to_json(a),
        Command::Sharpness(a) => to_json(a),
        Command::Width(a) => to_json(a),
        Command::Concentration(a) => to_json(a),
        Command::Theorem2(a) => to_json(a),
        Command::BoundCheck(a) => to_json(a),
        Command::Pipeline(a) => to_json(a),
    };
    if let Value::Object(m) = &mut config {
        m.retain(|_, v| !v.is_null());
        if matches!(r.command, Command::Width(_)) {
            m.insert("seed".into(), json!(r.seed));
        }
    }
    verbose(r.verbose, || format!("running {} with {config}", r.command.name()));
    let (result, tables, certified) = match &r.command {
        Command::Density(a) => run_density(a)?,
        Command::Approx(a) => run_approx(a, r.verbose)?,
        Command::Sharpness(a) => run_sharpness(a)?,
        Command::Width(a) => run_width(a, r.seed, r.verbose)?,
        Command::Concentration(a) => run_concentration(a)?,
        Command::Theorem2(a) => run_theorem2(a, r.verbose)?,
        Command::BoundCheck(a) => run_bound_check(a)?,
        Command::Pipeline(a) => run_pipeline(a)?,
    };
    let timing_ms = start.elapsed().as_secs_f64() * 1e3;
    verbose(r.verbose, || format!("done in {timing_ms:.1} ms"));
    Ok(Outcome {
        report: Report { version: VERSION, command: r.command.name(), config, result, timing_ms },
        tables,
        certified,
    })
}

type Run = Result<(Value, Vec<(String, String)>, bool)>;

fn run_density(a: &DensityArgs) -> Run {
    let set = required(&a.points, "points")?.build()?;
    let rep = set.density_report(required(&a.r, "r")?.0, required(&a.a, "a")?.0)?;
    let mut tables = Vec::new();
    let mut curve = Value::Null;
    if let Some(g) = &a.a_grid {
        let c = set.density_star_curve(&g.0)?;
        let mut csv = String::from("a,dstar\n");
        for (x, v) in &c {
            csv.push_str(&format!("{x:e},{v:e}\n"));
        }
        tables.push(("dstar".into(), csv));
        curve = to_json(&c);
    }
    let result = json!({
        "points": set.len(),
        "separation": set.separation(),
        "density": rep,
        "dstar_curve": curve,
    });
    Ok((result, tables, true))
}

fn run_approx(a: &ApproxArgs, verbose_on: bool) -> Run {
    let spectrum = required(&a.spectrum, "spectrum")?.0;
    let all = required(&a.points, "points")?.build()?;
    let xi = a.xi.map_or(0.0, |v| v.0);
    let set = match a.window {
        Some(w) => all.window(xi, w.0)?,
        None => all,
    };
    let idx = set.nearest_index(xi).ok_or_else(|| Error::Config(format!("no points near ξ = {xi}")))?;
    verbose(verbose_on, || format!("Gram matrix of size {}", set.len()));
    let gram = GramMatrix::build(&set, &spectrum)?;
    let solver = DeltaSolver::new(&gram);
    let mut tables = Vec::new();
    let mut curve = Value::Null;
    let sol = if let Some(g) = &a.mu_grid {
        let c = solver.tradeoff(idx, &g.0)?;
        tables.push(("tradeoff".into(), c.to_csv()));
        curve = to_json(&c.points);
        solver.solve_delta(idx, *g.0.last().unwrap())?
    } else if let Some(b) = a.budget {
        solver.min_error_with_budget(idx, b.0)?
    } else {
        solver.solve_delta(idx, 0.0)?
    };
    let (re_error, re_norm) = sol.recompute(&gram);
    let coefficients = if a.coefficients {
        to_json(&sol.coefficients.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
    } else {
        Value::Null
    };
    let result = json!({
        "xi": set.points()[idx],
        "xi_index": idx,
        "window_size": set.len(),
        "error": sol.error,
        "error_sq": sol.error * sol.error,
        "norm": sol.norm,
        "mu": sol.mu,
        "rank_deficient": sol.rank_deficient,
        "recomputed_error": re_error,
        "recomputed_norm": re_norm,
        "bessel_constant": gram.bessel_constant(),
        "frame_lower_bound": gram.frame_lower_bound(),
        "tradeoff": curve,
        "coefficients": coefficients,
    });
    let consistent = (re_error - sol.error).abs() <= 1e-8 * sol.norm.max(1.0)
        && (re_norm - sol.norm).abs() <= 1e-8 * sol.norm.max(1.0);
    Ok((result, tables, consistent))
}

fn run_sharpness(a: &SharpnessArgs) -> Run {
    let ex = SharpExample::new(required(&a.a, "a")?.0)?;
    let k = a.k.unwrap_or(100_000);
    let (numeric, tail) = ex.numeric_error_sq(k);
    let analytic = ex.analytic_error_sq();
    let check = BoundCheck::from_d_sq(2.0 * ex.a, analytic, 1.0, false)?;
    let shown = k.min(64) as i64;
    let mut csv = String::from("k,f0\n");
    for j in -shown..=shown {
        csv.push_str(&format!("{j},{:e}\n", ex.atom(0, j as f64)));
    }
    let gap = (numeric - analytic).abs();
    let result = json!({
        "a": ex.a,
        "K": k,
        "analytic_error_sq": analytic,
        "numeric_error_sq": numeric,
        "tail_bound": tail,
        "norm_sq": ex.norm_sq(),
        "bound_check": check,
    });
    let certified = gap <= tail + 1e-12 && check.margin.abs() <= 1e-9;
    Ok((result, vec![("atom".into(), csv)], certified))
}

#[derive(Serialize)]
struct WidthTrial {
    trial: usize,
    k: usize,
    sigma_k: f64,
    bound: f64,
    dimension_bound: f64,
    hs_defect: f64,
    weyl_worst: f64,
    pass: bool,
}

fn run_width(a: &WidthArgs, seed: u64, verbose_on: bool) -> Run {
    let n = required(&a.n, "n")?;
    let d = required(&a.d, "d")?.0;
    let alpha = required(&a.alpha, "alpha")?.0;
    let trials = a.trials.unwrap_or(10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for t in 0..trials {
        let basis = PerturbedBasis::saturating_random(n, d, &mut rng)?;
        let t2 = basis.defect();
        let hs: f64 = singular_values(&t2).iter().map(|s| s * s).sum();
        let hs_defect = (hs - frobenius_sq(&t2)).abs();
        let weyl = weyl_check(basis.matrix(), &t2, 1e-9)?;
        let trial = match extract_subspace(&basis, alpha) {
            Ok(c) => WidthTrial {
                trial: t,
                k: c.k,
                sigma_k: c.certified_sigma,
                bound: c.sigma_bound(),
                dimension_bound: c.dimension_bound(),
                hs_defect,
                weyl_worst: weyl.worst_violation,
                pass: c.holds() && weyl.holds && hs_defect <= 1e-9 * hs.max(1.0),
            },
            Err(Error::Certificate(msg)) => {
                verbose(verbose_on, || format!("trial {t}: {msg}"));
                WidthTrial {
                    trial: t,
                    k: n - (alpha * alpha * d * d * n as f64).floor() as usize,
                    sigma_k: f64::NAN,
                    bound: 1.0 - 1.0 / alpha,
                    dimension_bound: (1.0 - alpha * alpha * d * d) * n as f64 - 1.0,
                    hs_defect,
                    weyl_worst: weyl.worst_violation,
                    pass: false,
                }
            }
            Err(e) => return Err(e),
        };
        out.push(trial);
    }
    let passed = out.iter().filter(|t| t.pass).count();
    let result = json!({ "n": n, "d": d, "alpha": alpha, "passed": passed, "trials": out });
    Ok((result, Vec::new(), passed == trials))
}

fn run_concentration(a: &ConcentrationArgs) -> Run {
    let band = required(&a.spectrum, "spectrum")?.0;
    let time = required(&a.window, "window")?.0;
    let problem = match a.nodes {
        Some(n) => ConcentrationProblem::with_nodes(&band, &time, vec![n; band.intervals().len()])?,
        None => ConcentrationProblem::new(&band, &time)?,
    };
    let sp = problem.spectrum()?;
    let grid = a.c_grid.as_ref().map_or(C_GRID.to_vec(), |g| g.0.clone());
    let checks: Vec<Lemma1Check> = grid.iter().map(|&c| sp.lemma1(c)).collect();
    let certified = checks.iter().all(|c| c.satisfied && c.verify(sp.time_bandwidth));
    let result = json!({
        "time_bandwidth": sp.time_bandwidth,
        "trace": sp.trace,
        "trace_rel_error": sp.trace_rel_error(),
        "raw_min": sp.raw_min,
        "raw_max": sp.raw_max,
        "nodes_per_interval": problem.nodes_per_interval(),
        "counts": checks,
    });
    Ok((result, vec![("eigenvalues".into(), sp.to_csv())], certified))
}

/// Interpolation conditions are certified to this absolute tolerance.
const INTERPOLATION_TOL: f64 = 1e-8;

fn run_theorem2(a: &Theorem2Args, verbose_on: bool) -> Run {
    let n_max = a.n_max.unwrap_or(crate::constructions::DEFAULT_N_MAX);
    let k = a.k.unwrap_or(crate::constructions::DEFAULT_WINDOW);
    let fam = Theorem2Family::with_widths(
        required(&a.eps, "eps")?.0,
        required(&a.base, "R")?.0,
        n_max,
        parse_widths(a.widths.as_deref())?,
    )?;
    let mut rows = Vec::new();
    let mut csv = String::from("n");
    for j in -k..=k {
        csv.push_str(&format!(",{j}"));
    }
    csv.push('\n');
    let mut certified = true;
    let mut worst_error: f64 = 0.0;
    for n in -n_max..=n_max {
        verbose(verbose_on, || format!("n = {n}"));
        let e = fam.error(n, k)?;
        csv.push_str(&n.to_string());
        for &(j, r) in &e.residuals {
            let v = if j == n { r + 1.0 } else { r };
            csv.push_str(&format!(",{v:e}"));
        }
        csv.push('\n');
        let ratio = if k > 2 * n.abs() + 1 { Some(fam.edge_tail_ratio(n, k)?) } else { None };
        let support = fam.support_check(n, 1e-6)?;
        let at_node = (fam.eval_at_node(n, n)? - 1.0).abs();
        let ok = at_node.max(e.interpolation_defect) <= INTERPOLATION_TOL && support.passed;
        certified &= ok;
        worst_error = worst_error.max(e.error);
        rows.push(json!({
            "n": n,
            "error": e.error,
            "growth_proxy": e.growth_proxy,
            "edge_tail_ratio": ratio,
            "interpolation_defect": e.interpolation_defect.max(at_node),
            "fitted_constant": fam.fitted_constant(n, k)?,
            "total_bandwidth": fam.total_bandwidth(n),
            "support_outside_fraction": support.outside_fraction,
            "support_passed": support.passed,
        }));
    }
    // with sub-exponential norm growth this would have to hold; here it does not
    let check = BoundCheck::new(fam.spectrum().measure(), worst_error.clamp(1e-300, 1.0 - 1e-16), 1.0, true)?;
    let result = json!({
        "eps": fam.eps,
        "R": fam.base,
        "n_max": n_max,
        "K": k,
        "widths": fam.widths,
        "measure": fam.spectrum().measure(),
        "max_error": worst_error,
        "rows": rows,
        "bound_check_dstar": check,
    });
    Ok((result, vec![("values".into(), csv)], certified))
}

fn run_bound_check(a: &BoundCheckArgs) -> Run {
    let measure = match (&a.measure, &a.spectrum) {
        (Some(m), _) => m.0,
        (None, Some(s)) => s.0.measure(),
        _ => return config_err("give exactly one of `measure` and `spectrum`"),
    };
    let density = required(&a.density, "density")?.0;
    let check = match (a.d, a.d_sq) {
        (Some(d), None) => BoundCheck::new(measure, d.0, density, a.finite_window)?,
        (None, Some(d2)) => BoundCheck::from_d_sq(measure, d2.0, density, a.finite_window)?,
        _ => return config_err("give exactly one of `d` and `d-sq`"),
    };
    let verified = check.verify();
    Ok((to_json(&check), Vec::new(), verified))
}

fn run_pipeline(a: &PipelineArgs) -> Run {
    let d = match (a.d, a.d_sq) {
        (Some(d), None) => d.0,
        (None, Some(d2)) if d2.0 > 0.0 => d2.0.sqrt(),
        _ => return config_err("give exactly one of `d` and a positive `d-sq`"),
    };
    let mut params = PipelineParams::new(
        required(&a.spectrum, "spectrum")?.0,
        required(&a.points, "points")?.build()?,
        d,
        required(&a.alpha, "alpha")?.0,
        required(&a.delta, "delta")?.0,
        required(&a.eps, "eps")?.0,
        required(&a.r, "r")?.0,
    );
    if let Some(c) = a.center {
        params.center = c.0;
    }
    if let Some(s) = a.scale {
        params.scale = s.0;
    }
    let rep = pipeline::run(&params)?;
    let passed = rep.passed;
    Ok((to_json(&rep), Vec::new(), passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expressions() {
        assert_eq!(parse_real("pi/2").unwrap(), PI / 2.0);
        assert_eq!(parse_real("-pi").unwrap(), -PI);
        assert_eq!(parse_real("2*pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_real("2pi").unwrap(), 2.0 * PI);
        assert_eq!(parse_real("π/4").unwrap(), PI / 4.0);
        assert_eq!(parse_real("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_real("-pi-0.1").unwrap(), -PI - 0.1);
        assert_eq!(parse_real("(1+2)*3").unwrap(), 9.0);
        assert_eq!(parse_real("sqrt(0.5)").unwrap(), 0.5f64.sqrt());
        assert!(parse_real("sqrt(-1)").is_err());
        assert!(parse_real("sqrt 2").is_err());
        assert!(parse_real("pie").is_err());
        assert!(parse_real("1/0").is_err());
        assert!(parse_real("2 3 )").is_err());
    }

    #[test]
    fn spectrum_literals() {
        let s: SpectrumArg = "[[-pi/2, pi/2]]".parse().unwrap();
        assert_eq!(s.0, SpectrumSet::symmetric(PI / 2.0).unwrap());
        let two: SpectrumArg = "[[-pi-0.1,-pi+0.1],[pi-0.1,pi+0.1]]".parse().unwrap();
        assert_eq!(two.0.intervals().len(), 2);
        let bare: SpectrumArg = "8".parse().unwrap();
        assert_eq!(bare.0, SpectrumSet::symmetric(8.0).unwrap());
        let single: SpectrumArg = "[0, 1]".parse().unwrap();
        assert_eq!(single.0.measure(), 1.0);
        assert!("[[1, 0]]".parse::<SpectrumArg>().is_err());
        assert!("[[0, 1, 2]]".parse::<SpectrumArg>().is_err());
        assert!("[[0, 1]".parse::<SpectrumArg>().is_err());
    }

    #[test]
    fn point_specs() {
        let p: PointsArg = "integers(3)".parse().unwrap();
        assert_eq!(p.build().unwrap().len(), 7);
        let p: PointsArg = "arithmetic(0, 0.5, 4)".parse().unwrap();
        assert_eq!(p.build().unwrap().points(), &[0.0, 0.5, 1.0, 1.5]);
        let p: PointsArg = "perturbed_integers(20, 2)".parse().unwrap();
        assert_eq!(p.build().unwrap().len(), 5);
        let p: PointsArg = "list(1, 2, pi)".parse().unwrap();
        assert_eq!(p.build().unwrap().points()[2], PI);
        assert!("integers(1.5)".parse::<PointsArg>().is_err());
        assert!("squares(4)".parse::<PointsArg>().is_err());
        let round: PointsArg = p.to_string().parse().unwrap();
        assert_eq!(round, p);
    }

    #[test]
    fn config_overlay_and_unknown_keys() {
        let file = ConfigFile::parse(
            "seed = 7\nspectrum = [[\"-pi/2\", \"pi/2\"]]\n[bound-check]\nmeasure = 1.0\nd-sq = 0.5\ndensity = 1\n",
        )
        .unwrap();
        let flags = BoundCheckArgs { measure: Some(Real(PI)), ..Default::default() };
        let r = Resolved::merge(&Command::BoundCheck(flags), None, false, &file).unwrap();
        match &r.command {
            Command::BoundCheck(b) => {
                assert_eq!(b.measure, Some(Real(PI)));
                assert_eq!(b.d_sq, Some(Real(0.5)));
                assert!(b.spectrum.is_none());
            }
            _ => unreachable!(),
        }
        assert!(ConfigFile::parse("[width]\nn = 3\nbogus = 1\n").is_err());
        assert!(ConfigFile::parse("unknown = 1\n").is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::parse("[width]\nn = 100\nd = 0.1\nalpha = 2\ntrials = 10\nseed = 7\n").unwrap();
        let flags = WidthArgs { trials: Some(3), ..Default::default() };
        let r = Resolved::merge(&Command::Width(flags), None, false, &file).unwrap();
        assert_eq!(r.seed, 7);
        match &r.command {
            Command::Width(w) => {
                assert_eq!(w.trials, Some(3));
                assert_eq!(w.n, Some(100));
            }
            _ => unreachable!(),
        }
        let r = Resolved::merge(&Command::Width(WidthArgs::default()), Some(9), false, &file).unwrap();
        assert_eq!(r.seed, 9);
    }

    #[test]
    fn missing_parameters_rejected() {
        let file = ConfigFile::default();
        let e = Resolved::merge(&Command::Sharpness(SharpnessArgs::default()), None, false, &file).unwrap_err();
        assert!(e.to_string().contains("`a`"));
        let bad = ApproxArgs {
            spectrum: Some("1".parse().unwrap()),
            points: Some("integers(3)".parse().unwrap()),
            budget: Some(Real(1.0)),
            mu_grid: Some("1,0.1".parse().unwrap()),
            ..Default::default()
        };
        assert!(Resolved::merge(&Command::Approx(bad), None, false, &file).is_err());
    }
}
