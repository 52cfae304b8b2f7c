//! Scenario documents: flat `key = value` lines with dotted keys, read with a
//! TOML parser. See `docs/config.md` for the grammar and every key.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use amrtriad::{Engine, Error as CoreError, ModelParams, TimeGrid};
use serde::Serialize;
use thiserror::Error;
use toml::Value;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{0}: unknown key")]
    Unknown(String),
    #[error("{0}: required key is missing")]
    Missing(&'static str),
    #[error("{key}: expected {expected}, found {found}")]
    Type {
        key: String,
        expected: &'static str,
        found: String,
    },
    #[error("{key}: {message}")]
    Invalid { key: String, message: String },
}

type Result<T> = std::result::Result<T, ConfigError>;

fn invalid(key: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        message: message.into(),
    }
}

/// Every accepted key, in serialization order.
pub const KEYS: &[&str] = &[
    "name",
    "engine",
    "seed",
    "model.N",
    "model.mu",
    "model.beta",
    "model.gamma",
    "model.epsilon",
    "model.sigma",
    "model.alpha",
    "initial.R0",
    "grid.t0",
    "grid.t_end",
    "grid.dt",
    "grid.stride",
    "sweep.parameter",
    "sweep.values",
    "ensemble.n_paths",
    "ensemble.base_seed",
    "ensemble.burn_in",
    "ensemble.n_bins",
    "ensemble.paths_in_csv",
    "output.csv",
    "output.svg",
    "output.report",
];

pub const DEFAULT_T_END: f64 = 50.0;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    Gamma,
    Sigma,
    Alpha,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Gamma => "gamma",
            SweepParameter::Sigma => "sigma",
            SweepParameter::Alpha => "alpha",
        }
    }

    pub fn apply(self, p: ModelParams, value: f64) -> ModelParams {
        match self {
            SweepParameter::Gamma => p.with_plasmid_loss(value),
            SweepParameter::Sigma => p.with_noise(value),
            SweepParameter::Alpha => p.with_order(value),
        }
    }

    /// Whether `engine` depends on this parameter at all.
    pub fn affects(self, engine: Engine) -> bool {
        match self {
            SweepParameter::Gamma => true,
            SweepParameter::Sigma => engine == Engine::Sde,
            SweepParameter::Alpha => engine == Engine::Fde,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnsembleSpec {
    pub n_paths: usize,
    pub base_seed: u64,
    pub burn_in: f64,
    pub n_bins: usize,
    /// How many individual paths go into the trajectory CSV.
    pub paths_in_csv: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outputs {
    pub csv: String,
    pub svg: String,
    pub report: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub name: String,
    pub engines: Vec<Engine>,
    pub seed: u64,
    pub params: ModelParams,
    pub r0: f64,
    pub grid: TimeGrid,
    pub sweep: Option<Sweep>,
    pub ensemble: Option<EnsembleSpec>,
    pub outputs: Outputs,
}

const ALL_ENGINES: [Engine; 3] = [Engine::Ode, Engine::Sde, Engine::Fde];

fn describe(v: &Value) -> String {
    format!("{} `{v}`", v.type_str())
}

struct Doc {
    map: BTreeMap<String, Value>,
}

impl Doc {
    fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    fn f64(&self, key: &'static str) -> Result<Option<f64>> {
        self.get(key).map(|v| number(key, v)).transpose()
    }

    fn f64_or(&self, key: &'static str, default: f64) -> Result<f64> {
        Ok(self.f64(key)?.unwrap_or(default))
    }

    fn usize_or(&self, key: &'static str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(v) => Err(ConfigError::Type {
                key: key.into(),
                expected: "a non-negative integer",
                found: describe(v),
            }),
        }
    }

    fn u64(&self, key: &'static str) -> Result<Option<u64>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as u64)),
            Some(Value::String(s)) if s.parse::<u64>().is_ok() => Ok(s.parse().ok()),
            Some(v) => Err(ConfigError::Type {
                key: key.into(),
                expected: "an unsigned 64-bit integer",
                found: describe(v),
            }),
        }
    }

    fn string(&self, key: &'static str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(v) => Err(ConfigError::Type {
                key: key.into(),
                expected: "a string",
                found: describe(v),
            }),
        }
    }
}

fn number(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        other => Err(ConfigError::Type {
            key: key.into(),
            expected: "a number",
            found: describe(other),
        }),
    }
}

fn flatten(prefix: &str, table: toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(inner) => flatten(&key, inner, out),
            other => {
                out.insert(key, other);
            }
        }
    }
}

/// Parses a document into its flat key map, rejecting unknown keys.
pub fn parse_flat(text: &str) -> Result<BTreeMap<String, Value>> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| ConfigError::Syntax(e.message().to_string()))?;
    let mut map = BTreeMap::new();
    flatten("", table, &mut map);
    if let Some(unknown) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(ConfigError::Unknown(unknown.clone()));
    }
    Ok(map)
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    from_flat(parse_flat(text)?)
}

/// The environment variable that overrides `key`, e.g. `AMRTRIAD_GRID_T_END`.
pub fn env_name(key: &str) -> String {
    format!("AMRTRIAD_{}", key.to_uppercase().replace('.', "_"))
}

/// Variables read by the command line itself rather than the document.
pub const FLAG_VARIABLES: &[&str] = &["AMRTRIAD_CONFIG", "AMRTRIAD_OUT", "AMRTRIAD_THREADS"];

/// Applies `AMRTRIAD_*` overrides from `vars`. Values are read as TOML
/// values, falling back to a plain string.
pub fn apply_env<I>(map: &mut BTreeMap<String, Value>, vars: I) -> Result<()>
where
    I: IntoIterator<Item = (String, String)>,
{
    for (name, raw) in vars {
        if !name.starts_with("AMRTRIAD_") || FLAG_VARIABLES.contains(&name.as_str()) {
            continue;
        }
        let key = KEYS
            .iter()
            .find(|k| env_name(k) == name)
            .ok_or_else(|| ConfigError::Unknown(name.clone()))?;
        let value = format!("v = {raw}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or(Value::String(raw));
        map.insert((*key).to_string(), value);
    }
    Ok(())
}

fn parse_engines(v: &Value) -> Result<Vec<Engine>> {
    let one = |s: &str| -> Result<Vec<Engine>> {
        match s {
            "ode" => Ok(vec![Engine::Ode]),
            "sde" => Ok(vec![Engine::Sde]),
            "fde" => Ok(vec![Engine::Fde]),
            "all" => Ok(ALL_ENGINES.to_vec()),
            "none" => Ok(vec![]),
            other => Err(invalid(
                "engine",
                format!("`{other}` is not one of ode, sde, fde, all, none"),
            )),
        }
    };
    match v {
        Value::String(s) => one(s),
        Value::Array(items) => {
            let mut out = Vec::new();
            for item in items {
                match item {
                    Value::String(s) if s != "all" && s != "none" => {
                        for e in one(s)? {
                            if out.contains(&e) {
                                return Err(invalid("engine", format!("`{s}` listed twice")));
                            }
                            out.push(e);
                        }
                    }
                    other => {
                        return Err(ConfigError::Type {
                            key: "engine".into(),
                            expected: "an engine name",
                            found: describe(other),
                        });
                    }
                }
            }
            Ok(out)
        }
        other => Err(ConfigError::Type {
            key: "engine".into(),
            expected: "a string or an array of strings",
            found: describe(other),
        }),
    }
}

/// Maps a parameter validation failure to the key that caused it.
fn param_error(prefix: &str, e: CoreError) -> ConfigError {
    let key = match &e {
        CoreError::Domain { name, .. } => match *name {
            "N" => "N",
            "mu" => "mu",
            "beta" => "beta",
            "gamma" => "gamma",
            "epsilon" => "epsilon",
            "sigma" => "sigma",
            "alpha" => "alpha",
            _ => "",
        },
        _ => "",
    };
    let key = if key.is_empty() {
        prefix.trim_end_matches('.').to_string()
    } else {
        format!("{prefix}{key}")
    };
    invalid(key, e.to_string())
}

pub fn from_flat(map: BTreeMap<String, Value>) -> Result<ScenarioConfig> {
    if let Some(unknown) = map.keys().find(|k| !KEYS.contains(&k.as_str())) {
        return Err(ConfigError::Unknown(unknown.clone()));
    }
    let doc = Doc { map };

    let name = doc.string("name")?.unwrap_or_else(|| "scenario".into());
    if name.is_empty() || name.contains(['/', '\\']) {
        return Err(invalid("name", "must be a non-empty file-name-safe string"));
    }
    let engines = parse_engines(doc.get("engine").ok_or(ConfigError::Missing("engine"))?)?;
    let seed = doc.u64("seed")?.unwrap_or(DEFAULT_SEED);

    let sweep = match (doc.string("sweep.parameter")?, doc.get("sweep.values")) {
        (None, None) => None,
        (None, Some(_)) => return Err(ConfigError::Missing("sweep.parameter")),
        (Some(_), None) => return Err(ConfigError::Missing("sweep.values")),
        (Some(param), Some(values)) => {
            let parameter = match param.as_str() {
                "gamma" => SweepParameter::Gamma,
                "sigma" => SweepParameter::Sigma,
                "alpha" => SweepParameter::Alpha,
                other => {
                    return Err(invalid(
                        "sweep.parameter",
                        format!("`{other}` is not one of gamma, sigma, alpha"),
                    ));
                }
            };
            let Value::Array(items) = values else {
                return Err(ConfigError::Type {
                    key: "sweep.values".into(),
                    expected: "an array of numbers",
                    found: describe(values),
                });
            };
            if items.is_empty() {
                return Err(invalid("sweep.values", "needs at least one value"));
            }
            let values = items
                .iter()
                .enumerate()
                .map(|(i, v)| number(&format!("sweep.values[{i}]"), v))
                .collect::<Result<Vec<f64>>>()?;
            Some(Sweep { parameter, values })
        }
    };
    let swept = |p: SweepParameter| sweep.as_ref().is_some_and(|s| s.parameter == p);

    let gamma = match doc.f64("model.gamma")? {
        Some(g) => g,
        None if swept(SweepParameter::Gamma) => sweep.as_ref().unwrap().values[0],
        None => return Err(ConfigError::Missing("model.gamma")),
    };
    let params = ModelParams {
        population: doc.f64_or("model.N", 1e6)?,
        turnover: doc.f64_or("model.mu", 0.1)?,
        conjugation: doc.f64_or("model.beta", 5e-7)?,
        plasmid_loss: gamma,
        saturation: doc.f64_or("model.epsilon", 1e-6)?,
        noise: doc.f64_or("model.sigma", 0.0)?,
        order: doc.f64_or("model.alpha", 1.0)?,
    };
    params.validate().map_err(|e| param_error("model.", e))?;
    if let Some(s) = &sweep {
        for (i, &v) in s.values.iter().enumerate() {
            s.parameter
                .apply(params, v)
                .validate()
                .map_err(|e| invalid(format!("sweep.values[{i}]"), e.to_string()))?;
        }
    }

    let r0 = doc.f64("initial.R0")?.ok_or(ConfigError::Missing("initial.R0"))?;
    if !params.in_open_domain(r0) {
        return Err(invalid("initial.R0", format!("{r0} is outside (0, N)")));
    }

    let grid = TimeGrid::new(
        doc.f64_or("grid.t0", 0.0)?,
        doc.f64_or("grid.t_end", DEFAULT_T_END)?,
        doc.f64_or("grid.dt", amrtriad::ode::DEFAULT_DT)?,
    )
    .map_err(|e| invalid("grid", e.to_string()))?;
    let grid = grid
        .with_stride(doc.usize_or("grid.stride", 1)?)
        .map_err(|e| invalid("grid.stride", e.to_string()))?;

    let has_ensemble = doc.map.keys().any(|k| k.starts_with("ensemble."));
    let ensemble = if has_ensemble {
        if engines != [Engine::Sde] {
            return Err(invalid("ensemble", "ensembles need engine = \"sde\""));
        }
        let spec = EnsembleSpec {
            n_paths: doc.usize_or("ensemble.n_paths", 100)?,
            base_seed: doc.u64("ensemble.base_seed")?.unwrap_or(seed),
            burn_in: doc.f64_or("ensemble.burn_in", amrtriad::analysis::DEFAULT_BURN_IN)?,
            n_bins: doc.usize_or("ensemble.n_bins", amrtriad::analysis::DEFAULT_BINS)?,
            paths_in_csv: doc.usize_or("ensemble.paths_in_csv", 10)?,
        };
        if spec.n_paths == 0 {
            return Err(invalid("ensemble.n_paths", "must be at least 1"));
        }
        if !(0.0..1.0).contains(&spec.burn_in) {
            return Err(invalid("ensemble.burn_in", "must lie in [0, 1)"));
        }
        if spec.n_bins < 2 {
            return Err(invalid("ensemble.n_bins", "must be at least 2"));
        }
        Some(spec)
    } else {
        None
    };

    let outputs = Outputs {
        csv: doc.string("output.csv")?.unwrap_or_else(|| name.clone()),
        svg: doc.string("output.svg")?.unwrap_or_else(|| name.clone()),
        report: doc
            .string("output.report")?
            .unwrap_or_else(|| format!("{name}.report.json")),
    };
    for (key, v) in [
        ("output.csv", &outputs.csv),
        ("output.svg", &outputs.svg),
        ("output.report", &outputs.report),
    ] {
        if v.is_empty() || v.contains(['/', '\\']) {
            return Err(invalid(key, "must be a plain file name inside the output directory"));
        }
    }

    Ok(ScenarioConfig {
        name,
        engines,
        seed,
        params,
        r0,
        grid,
        sweep,
        ensemble,
        outputs,
    })
}

fn float(v: f64) -> Value {
    Value::Float(v)
}

pub fn seed_value(s: u64) -> Value {
    match i64::try_from(s) {
        Ok(i) => Value::Integer(i),
        Err(_) => Value::String(s.to_string()),
    }
}

/// Every key with its effective value, defaults included.
pub fn to_flat(cfg: &ScenarioConfig) -> BTreeMap<String, Value> {
    let mut m = BTreeMap::new();
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    put("name", Value::String(cfg.name.clone()));
    let engine = if cfg.engines == ALL_ENGINES {
        Value::String("all".into())
    } else if cfg.engines.is_empty() {
        Value::String("none".into())
    } else if cfg.engines.len() == 1 {
        Value::String(cfg.engines[0].name().into())
    } else {
        Value::Array(cfg.engines.iter().map(|e| Value::String(e.name().into())).collect())
    };
    put("engine", engine);
    put("seed", seed_value(cfg.seed));
    let p = &cfg.params;
    put("model.N", float(p.population));
    put("model.mu", float(p.turnover));
    put("model.beta", float(p.conjugation));
    put("model.gamma", float(p.plasmid_loss));
    put("model.epsilon", float(p.saturation));
    put("model.sigma", float(p.noise));
    put("model.alpha", float(p.order));
    put("initial.R0", float(cfg.r0));
    put("grid.t0", float(cfg.grid.t0));
    put("grid.t_end", float(cfg.grid.t_end));
    put("grid.dt", float(cfg.grid.dt));
    put("grid.stride", Value::Integer(cfg.grid.stride as i64));
    if let Some(s) = &cfg.sweep {
        put("sweep.parameter", Value::String(s.parameter.name().into()));
        put(
            "sweep.values",
            Value::Array(s.values.iter().map(|&v| float(v)).collect()),
        );
    }
    if let Some(e) = &cfg.ensemble {
        put("ensemble.n_paths", Value::Integer(e.n_paths as i64));
        put("ensemble.base_seed", seed_value(e.base_seed));
        put("ensemble.burn_in", float(e.burn_in));
        put("ensemble.n_bins", Value::Integer(e.n_bins as i64));
        put("ensemble.paths_in_csv", Value::Integer(e.paths_in_csv as i64));
    }
    put("output.csv", Value::String(cfg.outputs.csv.clone()));
    put("output.svg", Value::String(cfg.outputs.svg.clone()));
    put("output.report", Value::String(cfg.outputs.report.clone()));
    m
}

/// Renders the configuration as a document `parse_config` reads back to
/// an equal value.
pub fn serialize(cfg: &ScenarioConfig) -> String {
    let flat = to_flat(cfg);
    let mut out = String::new();
    for key in KEYS {
        if let Some(v) = flat.get(*key) {
            writeln!(out, "{key} = {v}").unwrap();
        }
    }
    out
}
