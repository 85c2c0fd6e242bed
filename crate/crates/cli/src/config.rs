//! Run configuration: defaults, then the config file (global keys, then the
//! subcommand's section), then flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hebundle::contfrac::Parity;
use hebundle::farey::PrimitiveVector;
use hebundle::stability::KClass;
use hebundle::torus::DiffScheme;
use num_rational::BigRational;
use serde::{Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::theta::ThetaSpec;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Command {
    Lagrange,
    Convergents,
    Farey,
    Stability,
    Sequence,
    TorusHe,
    ChernWeil,
    Donaldson,
    Coulomb,
    Density,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::Lagrange,
        Command::Convergents,
        Command::Farey,
        Command::Stability,
        Command::Sequence,
        Command::TorusHe,
        Command::ChernWeil,
        Command::Donaldson,
        Command::Coulomb,
        Command::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Lagrange => "lagrange",
            Command::Convergents => "convergents",
            Command::Farey => "farey",
            Command::Stability => "stability",
            Command::Sequence => "sequence",
            Command::TorusHe => "torus-he",
            Command::ChernWeil => "chern-weil",
            Command::Donaldson => "donaldson",
            Command::Coulomb => "coulomb",
            Command::Density => "density",
        }
    }

    /// Keys the command reads, with their defaults (`None`: required or optional without default).
    fn keys(self) -> &'static [(&'static str, Option<&'static str>)] {
        match self {
            Command::Lagrange => &[
                ("theta", Some("periodic:1|1")),
                ("parity", Some("even")),
                ("depth", Some("200")),
                ("tol", Some("1e-12")),
            ],
            Command::Convergents => &[
                ("theta", Some("periodic:1|1")),
                ("depth", Some("200")),
                ("count", Some("20")),
            ],
            Command::Farey => &[("triangle", None), ("qmax", Some("60"))],
            Command::Stability => &[
                ("theta", Some("periodic:1|1")),
                ("depth", Some("200")),
                ("L", Some("1")),
                ("genus", Some("1")),
                ("sub", None),
                ("sub0", None),
            ],
            Command::Sequence => &[
                ("theta", Some("periodic:1|1")),
                ("depth", Some("200")),
                ("L", Some("1")),
                ("count", Some("10")),
            ],
            Command::TorusHe => &[
                ("rank", Some("2")),
                ("degree", Some("1")),
                ("N", Some("64")),
                ("tau", Some("0,1")),
                ("scheme", Some("fd4")),
                ("tol", Some("1e-10")),
            ],
            Command::ChernWeil => &[
                ("rank", Some("2")),
                ("degree", Some("1")),
                ("N", Some("128")),
                ("tau", Some("0,1")),
                ("scheme", Some("fd4")),
                ("floor", Some("1e-8")),
                ("tol", Some("1e-3")),
            ],
            Command::Donaldson => &[
                ("rank", Some("2")),
                ("degree", Some("1")),
                ("N", Some("64")),
                ("tau", Some("0,1")),
                ("scheme", Some("spectral")),
                ("seed", Some("0")),
                ("modes", Some("2")),
                ("bound", Some("0.5")),
                ("step", Some("1")),
                ("precond", Some("1")),
                ("max_iter", Some("1000")),
                ("tol", Some("1e-6")),
            ],
            Command::Coulomb => &[
                ("rank", Some("2")),
                ("N", Some("64")),
                ("seed", Some("0")),
                ("samples", Some("50")),
                ("eps", Some("0.05")),
                ("gauge", Some("0.5")),
                ("max_iter", Some("100")),
                ("tol", Some("1e-6")),
            ],
            Command::Density => &[
                ("samples", Some("100000")),
                ("depth", Some("200")),
                ("digit", Some("1")),
                ("parity", Some("odd")),
                ("seed", Some("0")),
                ("burn_in", Some("16")),
                ("tol", Some("3")),
            ],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::UnknownCommand(s.to_string()))
    }
}

impl Serialize for Command {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

fn display<T: fmt::Display, S: Serializer>(v: &Option<T>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.collect_str(x),
        None => s.serialize_none(),
    }
}

fn kclass<S: Serializer>(v: &Option<KClass>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(k) => s.collect_str(&format_args!("{},{}", k.deg, k.rk)),
        None => s.serialize_none(),
    }
}

fn triangle<S: Serializer>(v: &Option<[PrimitiveVector; 3]>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some([a, b, c]) => s.collect_str(&format_args!("{a},{b},{c}")),
        None => s.serialize_none(),
    }
}

/// Typed parameters; only the keys of the active command are filled.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Params {
    #[serde(serialize_with = "display", skip_serializing_if = "Option::is_none")]
    pub theta: Option<ThetaSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parity: Option<Parity>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(rename = "L", serialize_with = "display", skip_serializing_if = "Option::is_none")]
    pub l: Option<BigRational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub genus: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<DiffScheme>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub digit: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qmax: Option<i64>,
    #[serde(serialize_with = "triangle", skip_serializing_if = "Option::is_none")]
    pub triangle: Option<[PrimitiveVector; 3]>,
    #[serde(serialize_with = "kclass", skip_serializing_if = "Option::is_none")]
    pub sub: Option<KClass>,
    #[serde(serialize_with = "kclass", skip_serializing_if = "Option::is_none")]
    pub sub0: Option<KClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub floor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modes: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// `Some(None)`: preconditioner disabled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub precond: Option<Option<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gauge: Option<f64>,
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: fmt::Display,
{
    v.trim().parse().map_err(|e: T::Err| CliError::Value {
        key: key.to_string(),
        value: v.to_string(),
        msg: e.to_string(),
    })
}

fn value_err(key: &str, v: &str, msg: impl Into<String>) -> CliError {
    CliError::Value {
        key: key.to_string(),
        value: v.to_string(),
        msg: msg.into(),
    }
}

fn parse_positive(key: &str, v: &str) -> Result<f64, CliError> {
    let x: f64 = parse(key, v)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(value_err(key, v, "must be a positive number"))
    }
}

/// `re,im` or `a+bi`.
fn parse_tau(v: &str) -> Result<[f64; 2], CliError> {
    let s: String = v.chars().filter(|c| !c.is_whitespace()).collect();
    let pair = if let Some((a, b)) = s.split_once(',') {
        (parse::<f64>("tau", a)?, parse::<f64>("tau", b)?)
    } else if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not an exponent sign
        let cut = body
            .char_indices()
            .rev()
            .find(|&(k, c)| (c == '+' || c == '-') && k > 0 && !body[..k].ends_with(['e', 'E']))
            .map(|(k, _)| k);
        match cut {
            Some(k) => {
                let im = &body[k..];
                let im = if im == "+" || im == "-" { format!("{im}1") } else { im.to_string() };
                (parse::<f64>("tau", &body[..k])?, parse::<f64>("tau", &im)?)
            }
            None if body.is_empty() => (0.0, 1.0),
            None => (0.0, parse::<f64>("tau", body)?),
        }
    } else {
        return Err(value_err("tau", v, "expected `re,im` or `a+bi`"));
    };
    if !(pair.1 > 0.0) || !pair.0.is_finite() || !pair.1.is_finite() {
        return Err(value_err("tau", v, "Im τ must be positive"));
    }
    Ok([pair.0, pair.1])
}

fn parse_kclass(key: &str, v: &str) -> Result<KClass, CliError> {
    let (d, r) = v
        .split_once(',')
        .ok_or_else(|| value_err(key, v, "expected `deg,rk`"))?;
    KClass::new(parse(key, d)?, parse(key, r)?).map_err(|e| value_err(key, v, e.to_string()))
}

fn parse_triangle(v: &str) -> Result<[PrimitiveVector; 3], CliError> {
    let parts: Vec<&str> = v.split(',').collect();
    if parts.len() != 3 {
        return Err(value_err("triangle", v, "expected three fractions a/b,c/d,e/f"));
    }
    let mut out = [PrimitiveVector::INFINITY; 3];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = parse("triangle", p)?;
    }
    Ok(out)
}

impl Params {
    fn set(&mut self, key: &str, v: &str) -> Result<(), CliError> {
        match key {
            "theta" => self.theta = Some(v.trim().parse()?),
            "parity" => self.parity = Some(parse(key, v)?),
            "depth" => {
                let d: usize = parse(key, v)?;
                if d == 0 {
                    return Err(value_err(key, v, "depth must be positive"));
                }
                self.depth = Some(d)
            }
            "L" => {
                let l: BigRational = parse(key, v)?;
                if l < BigRational::from_integer(1.into()) {
                    return Err(value_err(key, v, "L must be at least 1"));
                }
                self.l = Some(l)
            }
            "genus" => self.genus = Some(parse(key, v)?),
            "rank" => {
                let r: usize = parse(key, v)?;
                if r == 0 {
                    return Err(value_err(key, v, "rank must be positive"));
                }
                self.rank = Some(r)
            }
            "degree" => self.degree = Some(parse(key, v)?),
            "N" => self.n = Some(parse(key, v)?),
            "tau" => self.tau = Some(parse_tau(v)?),
            "scheme" => self.scheme = Some(parse(key, v)?),
            "tol" => self.tol = Some(parse_positive(key, v)?),
            "seed" => self.seed = Some(parse(key, v)?),
            "samples" => self.samples = Some(parse(key, v)?),
            "digit" => {
                let d: u64 = parse(key, v)?;
                if d == 0 {
                    return Err(value_err(key, v, "digits are positive"));
                }
                self.digit = Some(d)
            }
            "burn_in" => self.burn_in = Some(parse(key, v)?),
            "count" => self.count = Some(parse(key, v)?),
            "qmax" => self.qmax = Some(parse(key, v)?),
            "triangle" => self.triangle = Some(parse_triangle(v)?),
            "sub" => self.sub = Some(parse_kclass(key, v)?),
            "sub0" => self.sub0 = Some(parse_kclass(key, v)?),
            "floor" => self.floor = Some(parse(key, v)?),
            "modes" => self.modes = Some(parse(key, v)?),
            "bound" => self.bound = Some(parse_positive(key, v)?),
            "step" => self.step = Some(parse_positive(key, v)?),
            "precond" => {
                self.precond = Some(match v.trim() {
                    "none" | "off" => None,
                    _ => Some(parse_positive(key, v)?),
                })
            }
            "max_iter" => self.max_iter = Some(parse(key, v)?),
            "eps" => self.eps = Some(parse_positive(key, v)?),
            "gauge" => self.gauge = Some(parse(key, v)?),
            other => return Err(CliError::UnknownKey(other.to_string())),
        }
        Ok(())
    }
}

/// Raw `key = value` entries by section; `""` holds keys before any section header.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    pub sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut sections: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
        let mut current = String::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |msg: String| CliError::ConfigSyntax { line: k + 1, msg };
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| at(format!("unterminated section header {line:?}")))?
                    .trim();
                name.parse::<Command>()
                    .map_err(|_| at(format!("section [{name}] is not a subcommand")))?;
                current = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at(format!("expected `key = value`, got {line:?}")))?;
            let (key, value) = (key.trim(), value.trim());
            let entry = sections.entry(current.clone()).or_default();
            if let Some(prev) = entry.insert(key.to_string(), value.to_string()) {
                return Err(CliError::Conflict {
                    key: key.to_string(),
                    first: prev,
                    second: value.to_string(),
                });
            }
        }
        Ok(Self { sections })
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.to_path_buf(),
            source: e,
        })?;
        Self::parse(&text)
    }
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    /// Journal to append to.
    #[serde(skip)]
    pub out: Option<PathBuf>,
    /// CSV dump of the final grid field (torus subcommands).
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

impl RunConfig {
    /// SHA-256 of the canonical JSON of the command and its resolved parameters.
    ///
    /// Output paths are not hashed: they do not change the numbers.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn resolved(&self) -> serde_json::Value {
        serde_json::to_value(&self.params).expect("params serialize")
    }
}

/// Resolves `command` from defaults, the optional file, and flag overrides.
///
/// Flags for keys the command does not read are rejected; file keys outside the
/// command's section are ignored unless they sit in that section.
pub fn load_config(
    command: &str,
    file: Option<&ConfigFile>,
    flags: &BTreeMap<String, String>,
) -> Result<RunConfig, CliError> {
    let command: Command = command.parse()?;
    let keys = command.keys();
    let known = |k: &str| keys.iter().any(|(name, _)| *name == k);
    let mut merged: BTreeMap<&str, String> = BTreeMap::new();
    for (k, d) in keys {
        if let Some(d) = d {
            merged.insert(k, d.to_string());
        }
    }
    if let Some(file) = file {
        if let Some(global) = file.sections.get("") {
            for (k, v) in global {
                if let Some((name, _)) = keys.iter().find(|(name, _)| name == k) {
                    merged.insert(name, v.clone());
                }
            }
        }
        if let Some(sec) = file.sections.get(command.name()) {
            for (k, v) in sec {
                let Some((name, _)) = keys.iter().find(|(name, _)| name == k) else {
                    return Err(CliError::Irrelevant {
                        key: k.clone(),
                        command: command.name(),
                    });
                };
                merged.insert(name, v.clone());
            }
        }
    }
    for (k, v) in flags {
        if !known(k) {
            return Err(CliError::Irrelevant {
                key: k.clone(),
                command: command.name(),
            });
        }
        let name = keys.iter().find(|(name, _)| name == k).unwrap().0;
        merged.insert(name, v.clone());
    }
    let mut params = Params::default();
    for (k, v) in &merged {
        params.set(k, v)?;
    }
    Ok(RunConfig {
        command,
        params,
        out: None,
        csv: None,
    })
}

impl Params {
    pub fn need<'a, T>(v: &'a Option<T>, key: &'static str) -> Result<&'a T, CliError> {
        v.as_ref().ok_or(CliError::Missing(key))
    }
}
