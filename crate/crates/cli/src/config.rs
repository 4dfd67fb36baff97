//! Run configuration: JSON schema, defaults, validation and presets.

use clap::ValueEnum;
use ringbdg::double_well::{PotentialShape, DEFAULT_SPACING, MIN_GRID_POINTS};
use ringbdg::{CouplingSign, Parity};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::f64::consts::TAU;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    StabilityMap,
    Evolve,
    DwellSolve,
    DwellSweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::StabilityMap => "stability-map",
            Command::Evolve => "evolve",
            Command::DwellSolve => "dwell-solve",
            Command::DwellSweep => "dwell-sweep",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        <Self as ValueEnum>::from_str(s, false).ok()
    }
}

pub const PRESETS: [(&str, &str); 3] = [
    ("fig1", include_str!("../presets/fig1.json")),
    ("fig2", include_str!("../presets/fig2.json")),
    (
        "paper-instability",
        include_str!("../presets/paper-instability.json"),
    ),
];

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config must be a JSON object")]
    NotAnObject,
    #[error("invalid `{key}`: {reason}")]
    Key { key: String, reason: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
}

fn key_error(key: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Key {
        key: key.into(),
        reason: reason.into(),
    }
}

/// A JSON scalar or array, read as a list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn neg() -> i32 {
    -1
}
fn sym() -> Parity {
    Parity::Symmetric
}
fn eps_default() -> f64 {
    2.0
}
fn kappa_default() -> f64 {
    1.5
}
fn m_max_default() -> i32 {
    6
}
fn ten() -> f64 {
    10.0
}
fn hundred() -> usize {
    100
}
fn tau() -> f64 {
    TAU
}
fn n_points_default() -> usize {
    128
}
fn dt_default() -> f64 {
    1e-4
}
fn noise_default() -> f64 {
    1e-4
}
fn modes_default() -> Vec<i32> {
    vec![1, 2, 3]
}
fn xi0_default() -> f64 {
    5.0
}
fn h_default() -> OneOrMany<f64> {
    OneOrMany::One(0.05)
}
fn g_solve_default() -> OneOrMany<f64> {
    OneOrMany::One(0.0)
}
fn g_sweep_default() -> Vec<f64> {
    (0..=10).map(|i| 30.0 * f64::from(i)).collect()
}
fn both_parities() -> OneOrMany<Parity> {
    OneOrMany::Many(vec![Parity::Symmetric, Parity::Antisymmetric])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "eps_default")]
    pub eps: f64,
    #[serde(default = "kappa_default")]
    pub kappa_mag: f64,
    #[serde(default = "neg")]
    pub kappa_sign: i32,
    #[serde(default = "sym")]
    pub parity: Parity,
    #[serde(default = "m_max_default")]
    pub m_max: i32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapConfig {
    #[serde(default)]
    pub eps_min: f64,
    #[serde(default = "ten")]
    pub eps_max: f64,
    #[serde(default = "hundred")]
    pub n_eps: usize,
    #[serde(default)]
    pub kappa_min: f64,
    #[serde(default = "ten")]
    pub kappa_max: f64,
    #[serde(default = "hundred")]
    pub n_kappa: usize,
    #[serde(default = "neg")]
    pub kappa_sign: i32,
    #[serde(default = "sym")]
    pub parity: Parity,
    #[serde(default = "m_max_default")]
    pub m_max: i32,
}

impl MapConfig {
    pub fn eps_values(&self) -> Vec<f64> {
        linspace(self.eps_min, self.eps_max, self.n_eps)
    }

    pub fn kappa_values(&self) -> Vec<f64> {
        linspace(self.kappa_min, self.kappa_max, self.n_kappa)
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    #[serde(default = "eps_default")]
    pub eps: f64,
    #[serde(default = "kappa_default")]
    pub kappa_mag: f64,
    #[serde(default = "neg")]
    pub kappa_sign: i32,
    #[serde(default = "sym")]
    pub parity: Parity,
    /// Atoms per ring; the interaction is rescaled to keep `eps` fixed.
    #[serde(default = "tau")]
    pub n0: f64,
    #[serde(default = "n_points_default")]
    pub n_points: usize,
    #[serde(default = "dt_default")]
    pub dt: f64,
    #[serde(default = "ten")]
    pub tau_max: f64,
    #[serde(default = "hundred")]
    pub record_every: usize,
    #[serde(default = "noise_default")]
    pub noise: f64,
    #[serde(default = "modes_default")]
    pub modes: Vec<i32>,
}

impl EvolveConfig {
    pub fn n_steps(&self) -> usize {
        (self.tau_max / self.dt).round() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Quartic,
    Harmonic,
}

impl From<Shape> for PotentialShape {
    fn from(s: Shape) -> Self {
        match s {
            Shape::Quartic => PotentialShape::Quartic,
            Shape::Harmonic => PotentialShape::Harmonic,
        }
    }
}

fn quartic() -> Shape {
    Shape::Quartic
}

/// Resolve the domain keys shared by the double-well commands: fill the
/// default half length (`2 xi0`, or 10 for the harmonic shape) and turn a
/// spacing into an odd point count.
fn resolve_domain(
    half_length: &mut Option<f64>,
    spacing: &mut Option<f64>,
    n_grid: &mut Option<usize>,
    shape: Shape,
    xi0: f64,
) -> Result<(), ConfigError> {
    let l = *half_length.get_or_insert(match shape {
        Shape::Quartic => 2.0 * xi0,
        Shape::Harmonic => 10.0,
    });
    positive("half_length", l)?;
    if shape == Shape::Quartic && l <= xi0 {
        return Err(key_error(
            "half_length",
            format!("must exceed xi0 = {xi0}, got {l}"),
        ));
    }
    match (*n_grid, *spacing) {
        (Some(_), Some(_)) => Err(key_error(
            "spacing",
            "give either spacing or n_grid, not both",
        )),
        (Some(n), None) => {
            if n < MIN_GRID_POINTS || n.is_multiple_of(2) {
                return Err(key_error(
                    "n_grid",
                    format!("must be odd and >= {MIN_GRID_POINTS}, got {n}"),
                ));
            }
            Ok(())
        }
        (None, s) => {
            let s = s.unwrap_or(DEFAULT_SPACING);
            positive("spacing", s)?;
            let mut cells = (2.0 * l / s).round() as usize;
            cells += cells % 2;
            let n = cells + 1;
            if n < MIN_GRID_POINTS {
                return Err(key_error(
                    "spacing",
                    format!("gives {n} points, need >= {MIN_GRID_POINTS}"),
                ));
            }
            *spacing = None;
            *n_grid = Some(n);
            Ok(())
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    #[serde(default = "quartic")]
    pub shape: Shape,
    #[serde(default = "xi0_default")]
    pub xi0: f64,
    #[serde(default = "h_default")]
    pub h: OneOrMany<f64>,
    #[serde(default = "g_solve_default")]
    pub g_tilde: OneOrMany<f64>,
    #[serde(default = "both_parities")]
    pub parities: OneOrMany<Parity>,
    /// Defaults to `2 xi0` (10 for the harmonic shape).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    /// Grid spacing, converted to `n_grid` during validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "xi0_default")]
    pub xi0: f64,
    #[serde(default = "h_default")]
    pub h: OneOrMany<f64>,
    #[serde(default = "g_sweep_default")]
    pub g_values: Vec<f64>,
    /// Defaults to `2 xi0` (10 for the harmonic shape).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_length: Option<f64>,
    /// Grid spacing, converted to `n_grid` during validation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Job {
    Spectrum(SpectrumConfig),
    StabilityMap(MapConfig),
    Evolve(EvolveConfig),
    DwellSolve(SolveConfig),
    DwellSweep(SweepConfig),
}

/// A validated configuration with every default filled in.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub job: Job,
}

impl RunConfig {
    /// Flat JSON echo of the resolved configuration.
    pub fn to_json(&self) -> Value {
        let mut v = serde_json::to_value(&self.job).expect("config serializes");
        let obj = v.as_object_mut().expect("object");
        obj.insert("command".into(), self.command.name().into());
        obj.insert("seed".into(), self.seed.into());
        if let Some(out) = &self.out {
            obj.insert("out".into(), out.display().to_string().into());
        }
        v
    }
}

pub fn preset(name: &str) -> Result<&'static str, ConfigError> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
}

/// Parse a JSON document into an object, reporting syntax errors with
/// their position.
pub fn parse_object(text: &str) -> Result<Map<String, Value>, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Syntax {
        line: e.line(),
        column: e.column(),
        message: {
            let m = e.to_string();
            match m.rfind(" at line ") {
                Some(i) => m[..i].to_string(),
                None => m,
            }
        },
    })?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(ConfigError::NotAnObject),
    }
}

/// Validate a configuration object. `command`, when given, must agree with
/// the document's `command` key and fills it in if absent.
pub fn parse_config(
    mut map: Map<String, Value>,
    command: Option<Command>,
) -> Result<RunConfig, ConfigError> {
    let declared = match map.remove("command") {
        None => None,
        Some(Value::String(s)) => Some(
            Command::parse(&s)
                .ok_or_else(|| key_error("command", format!("unknown command `{s}`")))?,
        ),
        Some(other) => {
            return Err(key_error(
                "command",
                format!("expected a string, got {other}"),
            ))
        }
    };
    let command = match (declared, command) {
        (Some(a), Some(b)) if a != b => {
            return Err(key_error(
                "command",
                format!(
                    "config is for `{}` but `{}` was requested",
                    a.name(),
                    b.name()
                ),
            ))
        }
        (Some(c), _) | (None, Some(c)) => c,
        (None, None) => return Err(key_error("command", "missing")),
    };
    let seed = match map.remove("seed") {
        None => 0,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| key_error("seed", format!("expected an unsigned integer, got {v}")))?,
    };
    let out = match map.remove("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(v) => return Err(key_error("out", format!("expected a string, got {v}"))),
    };
    let value = Value::Object(map);
    let job = match command {
        Command::Spectrum => Job::Spectrum(validate_spectrum(typed(value)?)?),
        Command::StabilityMap => Job::StabilityMap(validate_map(typed(value)?)?),
        Command::Evolve => Job::Evolve(validate_evolve(typed(value)?)?),
        Command::DwellSolve => Job::DwellSolve(validate_solve(typed(value)?)?),
        Command::DwellSweep => Job::DwellSweep(validate_sweep(typed(value)?)?),
    };
    Ok(RunConfig {
        command,
        seed,
        out,
        job,
    })
}

fn typed<T: DeserializeOwned>(value: Value) -> Result<T, ConfigError> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().to_string();
        // unknown keys surface with the offending name in the message
        let key = match inner.strip_prefix("unknown field `") {
            Some(rest) => rest.split('`').next().unwrap_or(&path).to_string(),
            None => path,
        };
        key_error(key, inner)
    })
}

fn finite(key: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(key_error(key, format!("must be finite, got {x}")))
    }
}

fn positive(key: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(key_error(key, format!("must be > 0, got {x}")))
    }
}

fn nonnegative(key: &str, x: f64) -> Result<(), ConfigError> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(key_error(key, format!("must be >= 0, got {x}")))
    }
}

fn sign(key: &str, s: i32) -> Result<CouplingSign, ConfigError> {
    CouplingSign::try_from(s).map_err(|_| key_error(key, format!("must be -1 or +1, got {s}")))
}

fn m_max(m: i32) -> Result<(), ConfigError> {
    if (1..=1024).contains(&m) {
        Ok(())
    } else {
        Err(key_error("m_max", format!("must be in 1..=1024, got {m}")))
    }
}

fn validate_spectrum(c: SpectrumConfig) -> Result<SpectrumConfig, ConfigError> {
    finite("eps", c.eps)?;
    nonnegative("kappa_mag", c.kappa_mag)?;
    sign("kappa_sign", c.kappa_sign)?;
    m_max(c.m_max)?;
    Ok(c)
}

fn validate_map(c: MapConfig) -> Result<MapConfig, ConfigError> {
    finite("eps_min", c.eps_min)?;
    finite("eps_max", c.eps_max)?;
    nonnegative("kappa_min", c.kappa_min)?;
    nonnegative("kappa_max", c.kappa_max)?;
    if c.eps_max < c.eps_min {
        return Err(key_error("eps_max", "must be >= eps_min"));
    }
    if c.kappa_max < c.kappa_min {
        return Err(key_error("kappa_max", "must be >= kappa_min"));
    }
    for (key, n) in [("n_eps", c.n_eps), ("n_kappa", c.n_kappa)] {
        if n == 0 || n > 100_000 {
            return Err(key_error(key, format!("must be in 1..=100000, got {n}")));
        }
    }
    sign("kappa_sign", c.kappa_sign)?;
    m_max(c.m_max)?;
    Ok(c)
}

fn validate_evolve(c: EvolveConfig) -> Result<EvolveConfig, ConfigError> {
    finite("eps", c.eps)?;
    nonnegative("kappa_mag", c.kappa_mag)?;
    sign("kappa_sign", c.kappa_sign)?;
    positive("n0", c.n0)?;
    if c.n_points < 16 || !c.n_points.is_power_of_two() {
        return Err(key_error(
            "n_points",
            format!("must be a power of two >= 16, got {}", c.n_points),
        ));
    }
    positive("dt", c.dt)?;
    positive("tau_max", c.tau_max)?;
    if c.n_steps() == 0 {
        return Err(key_error("tau_max", "shorter than one time step"));
    }
    if c.record_every == 0 {
        return Err(key_error("record_every", "must be >= 1"));
    }
    nonnegative("noise", c.noise)?;
    let half = (c.n_points / 2) as i32;
    if let Some(m) = c.modes.iter().find(|&&m| !(-half..half).contains(&m)) {
        return Err(key_error(
            "modes",
            format!("m = {m} is not resolved by {} points", c.n_points),
        ));
    }
    Ok(c)
}

fn validate_h(h: &OneOrMany<f64>) -> Result<(), ConfigError> {
    let v = h.to_vec();
    if v.is_empty() {
        return Err(key_error("h", "must not be empty"));
    }
    v.iter().try_for_each(|&x| positive("h", x))
}

fn validate_solve(mut c: SolveConfig) -> Result<SolveConfig, ConfigError> {
    positive("xi0", c.xi0)?;
    validate_h(&c.h)?;
    let g = c.g_tilde.to_vec();
    if g.is_empty() {
        return Err(key_error("g_tilde", "must not be empty"));
    }
    g.iter().try_for_each(|&x| finite("g_tilde", x))?;
    if c.parities.to_vec().is_empty() {
        return Err(key_error("parities", "must not be empty"));
    }
    resolve_domain(
        &mut c.half_length,
        &mut c.spacing,
        &mut c.n_grid,
        c.shape,
        c.xi0,
    )?;
    Ok(c)
}

fn validate_sweep(mut c: SweepConfig) -> Result<SweepConfig, ConfigError> {
    positive("xi0", c.xi0)?;
    validate_h(&c.h)?;
    if c.g_values.is_empty() {
        return Err(key_error("g_values", "must not be empty"));
    }
    c.g_values.iter().try_for_each(|&x| finite("g_values", x))?;
    if c.g_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(key_error("g_values", "must be strictly ascending"));
    }
    resolve_domain(
        &mut c.half_length,
        &mut c.spacing,
        &mut c.n_grid,
        Shape::Quartic,
        c.xi0,
    )?;
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig, ConfigError> {
        parse_config(parse_object(text)?, None)
    }

    fn key_of(e: ConfigError) -> String {
        match e {
            ConfigError::Key { key, .. } => key,
            other => panic!("expected a key error, got {other:?}"),
        }
    }

    #[test]
    fn spectrum_example_is_valid() {
        let c = parse(
            r#"{"command":"spectrum","eps":2.0,"kappa_mag":1.5,"kappa_sign":-1,"parity":"antisymmetric","m_max":4}"#,
        )
        .unwrap();
        assert_eq!(c.command, Command::Spectrum);
        let Job::Spectrum(s) = c.job else { panic!() };
        assert_eq!(s.parity, Parity::Antisymmetric);
        assert_eq!(s.m_max, 4);
    }

    #[test]
    fn negative_kappa_is_rejected_by_name() {
        let e = parse(r#"{"command":"spectrum","kappa_mag":-1}"#).unwrap_err();
        assert_eq!(key_of(e), "kappa_mag");
    }

    #[test]
    fn sweep_example_fills_defaults() {
        let c = parse(r#"{"command":"dwell-sweep","xi0":5,"h":0.05,"g_values":[30,300]}"#).unwrap();
        let Job::DwellSweep(s) = c.job else { panic!() };
        assert_eq!(s.h.to_vec(), vec![0.05]);
        assert_eq!(s.g_values, vec![30.0, 300.0]);
        assert_eq!(s.half_length, Some(10.0));
        assert_eq!(s.n_grid, Some(2001));
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse("{\n  \"command\": \"spectrum\",\n  \"eps\": 2.0,,\n}") {
            Err(ConfigError::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 14)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_and_mistyped_keys_are_named() {
        assert_eq!(
            key_of(parse(r#"{"command":"spectrum","epsilon":1}"#).unwrap_err()),
            "epsilon"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"evolve","dt":"small"}"#).unwrap_err()),
            "dt"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"evolve","parity":"odd"}"#).unwrap_err()),
            "parity"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"dwell-solve","bogus":1}"#).unwrap_err()),
            "bogus"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"spectrum","kappa_sign":0}"#).unwrap_err()),
            "kappa_sign"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"evolve","n_points":100}"#).unwrap_err()),
            "n_points"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"dwell-sweep","g_values":[30,0]}"#).unwrap_err()),
            "g_values"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"dwell-solve","half_length":4}"#).unwrap_err()),
            "half_length"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"spectrum","seed":-3}"#).unwrap_err()),
            "seed"
        );
        assert_eq!(
            key_of(parse(r#"{"command":"warp"}"#).unwrap_err()),
            "command"
        );
    }

    #[test]
    fn command_must_agree_with_request() {
        let map = parse_object(r#"{"command":"spectrum"}"#).unwrap();
        assert_eq!(
            key_of(parse_config(map, Some(Command::Evolve)).unwrap_err()),
            "command"
        );
        let map = parse_object("{}").unwrap();
        assert_eq!(
            parse_config(map, Some(Command::Evolve)).unwrap().command,
            Command::Evolve
        );
    }

    #[test]
    fn presets_parse() {
        for (name, text) in PRESETS {
            let c = parse(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(c.to_json().get("command").is_some());
        }
    }

    #[test]
    fn echo_round_trips() {
        let c = parse(preset("paper-instability").unwrap()).unwrap();
        let again = parse(&c.to_json().to_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn odd_grid_from_spacing() {
        let c = parse(r#"{"command":"dwell-solve","half_length":10.005,"spacing":0.01}"#).unwrap();
        let Job::DwellSolve(s) = c.job else { panic!() };
        assert_eq!(s.n_grid.unwrap() % 2, 1);
    }
}
