//! Run configuration: JSON in, validated `RunConfig` out.
//!
//! Every section uses fixed field names and rejects unknown keys. Fields that a
//! mode does not read are rejected too, so a config means one thing only.

use csvortex_core::model::{sharp_k_factor, Coupling, Vortex, VortexSet};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RadialTopological,
    RadialNontopological,
    RadialSweep,
    Torus,
    Plane,
    LambdaCritical,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::RadialTopological,
        Mode::RadialNontopological,
        Mode::RadialSweep,
        Mode::Torus,
        Mode::Plane,
        Mode::LambdaCritical,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::RadialTopological => "radial-topological",
            Mode::RadialNontopological => "radial-nontopological",
            Mode::RadialSweep => "radial-sweep",
            Mode::Torus => "torus",
            Mode::Plane => "plane",
            Mode::LambdaCritical => "lambda-critical",
        }
    }

    pub fn is_radial(&self) -> bool {
        matches!(self, Mode::RadialTopological | Mode::RadialNontopological | Mode::RadialSweep)
    }

    pub fn is_torus(&self) -> bool {
        matches!(self, Mode::Torus | Mode::LambdaCritical)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| ConfigError::Schema {
                path: "mode".into(),
                message: format!("unknown mode `{s}`"),
            })
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("constraint violated at `{path}`: {message}")]
    Constraint { path: String, message: String },
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::Json(_) => "config-json",
            ConfigError::Schema { .. } => "config-schema",
            ConfigError::Constraint { .. } => "config-constraint",
        }
    }

    fn schema(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    fn constraint(path: &str, message: impl Into<String>) -> Self {
        ConfigError::Constraint {
            path: path.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexConfig {
    pub x: f64,
    pub y: f64,
    pub n: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainConfig {
    #[serde(rename = "Lx", default, skip_serializing_if = "Option::is_none")]
    pub lx: Option<f64>,
    #[serde(rename = "Ly", default, skip_serializing_if = "Option::is_none")]
    pub ly: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(rename = "R_schedule", default, skip_serializing_if = "Option::is_none")]
    pub r_schedule: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(rename = "K_factor", default, skip_serializing_if = "Option::is_none")]
    pub k_factor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetsConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Absolute shooting parameters `[lo, hi]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_range: Option<[f64; 2]>,
    /// Offsets `[lo, hi]` from the topological parameter, both negative.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_offset_range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_width: Option<f64>,
}

/// A validated run configuration. Optional fields are filled with mode defaults
/// by [`parse_config`], so the serialized form is the normalized document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<CouplingConfig>,
    #[serde(default)]
    pub vortices: Vec<VortexConfig>,
    #[serde(default)]
    pub domain: DomainConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub targets: TargetsConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

pub const TORUS_K_FACTOR: f64 = 6.0;
pub const FAST_K_FACTOR: f64 = 0.08;

impl RunConfig {
    pub fn coupling(&self) -> Option<Coupling> {
        let c = self.coupling.as_ref()?;
        match (c.kappa, c.lambda) {
            (Some(k), None) => Coupling::from_kappa(k).ok(),
            (None, Some(l)) => Coupling::from_lambda(l).ok(),
            _ => None,
        }
    }

    pub fn vortex_set(&self) -> VortexSet {
        VortexSet::new(self.vortices.iter().map(|v| Vortex { x: v.x, y: v.y, n: v.n }).collect())
            .expect("validated at parse time")
    }

    pub fn total_winding(&self) -> u32 {
        self.vortices.iter().map(|v| v.n).sum()
    }

    /// Replace the coupling by `λ`, dropping any `κ`.
    pub fn override_lambda(&mut self, lambda: f64) -> Result<(), ConfigError> {
        if self.mode == Mode::LambdaCritical {
            return Err(ConfigError::schema("coupling", "lambda-critical takes no coupling"));
        }
        self.coupling = Some(CouplingConfig {
            kappa: None,
            lambda: Some(lambda),
        });
        validate(self)
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("plain data")
    }
}

/// Parse and validate; the document must name its mode.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_for(text, None)
}

/// Parse with the mode supplied on the command line. A `mode` in the document must agree.
pub fn parse_config_for(text: &str, mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let value = with_mode(value, mode)?;
    let mut cfg: RunConfig = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::schema(&path, e.into_inner().to_string())
    })?;
    fill_defaults(&mut cfg);
    validate(&cfg)?;
    Ok(cfg)
}

fn with_mode(value: Value, mode: Option<Mode>) -> Result<Value, ConfigError> {
    let Value::Object(mut obj) = value else {
        return Err(ConfigError::schema(".", "expected a JSON object"));
    };
    match (obj.get("mode"), mode) {
        (Some(Value::String(s)), Some(m)) => {
            if s != m.as_str() {
                return Err(ConfigError::schema("mode", format!("config says `{s}`, command line says `{m}`")));
            }
        }
        (None, Some(m)) => {
            obj.insert("mode".into(), Value::String(m.as_str().into()));
        }
        (None, None) => return Err(ConfigError::schema("mode", "missing field `mode`")),
        _ => {}
    }
    Ok(Value::Object(obj))
}

fn fill_defaults(cfg: &mut RunConfig) {
    let d = &mut cfg.domain;
    let s = &mut cfg.solver;
    let t = &mut cfg.targets;
    match cfg.mode {
        Mode::RadialTopological | Mode::RadialNontopological | Mode::RadialSweep => {
            d.t_max.get_or_insert(40.0);
            s.tol.get_or_insert(1e-13);
            if cfg.mode == Mode::RadialSweep {
                t.samples.get_or_insert(20);
            }
        }
        Mode::Torus | Mode::LambdaCritical => {
            if let Some(lx) = d.lx {
                d.ly.get_or_insert(lx);
            }
            if let Some(nx) = d.nx {
                d.ny.get_or_insert(nx);
            }
            if cfg.mode == Mode::Torus {
                s.k_factor.get_or_insert(TORUS_K_FACTOR);
                s.max_iter.get_or_insert(5000);
            } else {
                s.k_factor.get_or_insert(FAST_K_FACTOR);
                s.max_iter.get_or_insert(20000);
                t.rel_width.get_or_insert(1e-3);
            }
            s.tol.get_or_insert(1e-10);
        }
        Mode::Plane => {
            s.k_factor.get_or_insert(FAST_K_FACTOR);
            s.tol.get_or_insert(1e-9);
            s.max_iter.get_or_insert(3000);
        }
    }
}

fn deny(present: bool, path: &str, mode: Mode) -> Result<(), ConfigError> {
    if present {
        Err(ConfigError::schema(path, format!("not used by mode `{mode}`")))
    } else {
        Ok(())
    }
}

fn require<T: Copy>(v: Option<T>, path: &str) -> Result<T, ConfigError> {
    v.ok_or_else(|| ConfigError::schema(path, "missing field"))
}

fn positive(v: f64, path: &str) -> Result<(), ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::constraint(path, format!("must be positive and finite, got {v}")))
    }
}

/// Check a config against the rules of its mode.
pub fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    let mode = cfg.mode;
    let d = &cfg.domain;
    let s = &cfg.solver;
    let t = &cfg.targets;

    // coupling
    match (&cfg.coupling, mode) {
        (None, Mode::LambdaCritical) => {}
        (Some(_), Mode::LambdaCritical) => deny(true, "coupling", mode)?,
        (None, _) => return Err(ConfigError::schema("coupling", "missing field")),
        (Some(c), _) => match (c.kappa, c.lambda) {
            (Some(k), None) => positive(k, "coupling.kappa")?,
            (None, Some(l)) => positive(l, "coupling.lambda")?,
            (Some(_), Some(_)) => return Err(ConfigError::schema("coupling", "give exactly one of `kappa`, `lambda`, not both")),
            (None, None) => return Err(ConfigError::schema("coupling", "give exactly one of `kappa`, `lambda`")),
        },
    }

    // vortices
    for (k, v) in cfg.vortices.iter().enumerate() {
        let p = format!("vortices[{k}]");
        if v.n == 0 {
            return Err(ConfigError::constraint(&format!("{p}.n"), "multiplicity must be at least 1"));
        }
        if !(v.x.is_finite() && v.y.is_finite()) {
            return Err(ConfigError::constraint(&p, "coordinates must be finite"));
        }
        if cfg.vortices[..k].iter().any(|w| w.x == v.x && w.y == v.y) {
            return Err(ConfigError::constraint(&p, "two vortices share a point; merge them into one with the summed n"));
        }
    }
    if mode.is_radial() && cfg.vortices.len() > 1 {
        return Err(ConfigError::constraint(
            "vortices",
            "radial modes take a single vortex (its multiplicity is N)",
        ));
    }
    if !mode.is_radial() && cfg.vortices.is_empty() && mode == Mode::LambdaCritical {
        return Err(ConfigError::constraint("vortices", "lambda-critical needs at least one vortex"));
    }

    // domain
    let radial_fields = d.t_start.is_some() || d.t_max.is_some();
    let torus_fields = d.lx.is_some() || d.ly.is_some() || d.nx.is_some() || d.ny.is_some();
    let plane_fields = d.r_schedule.is_some() || d.n.is_some();
    if mode.is_radial() {
        deny(torus_fields, "domain.Lx", mode)?;
        deny(plane_fields, "domain.R_schedule", mode)?;
        if let Some(ts) = d.t_start {
            if !ts.is_finite() {
                return Err(ConfigError::constraint("domain.t_start", "must be finite"));
            }
        }
        let tm = require(d.t_max, "domain.t_max")?;
        positive(tm, "domain.t_max")?;
        if let Some(ts) = d.t_start {
            if ts >= tm {
                return Err(ConfigError::constraint("domain.t_start", "must lie below t_max"));
            }
        }
    } else if mode.is_torus() {
        deny(radial_fields, "domain.t_max", mode)?;
        deny(plane_fields, "domain.R_schedule", mode)?;
        let lx = require(d.lx, "domain.Lx")?;
        let ly = require(d.ly, "domain.Ly")?;
        positive(lx, "domain.Lx")?;
        positive(ly, "domain.Ly")?;
        for (v, p) in [(require(d.nx, "domain.nx")?, "domain.nx"), (require(d.ny, "domain.ny")?, "domain.ny")] {
            if v < 16 || v % 2 != 0 {
                return Err(ConfigError::constraint(p, format!("must be even and at least 16, got {v}")));
            }
        }
        for (k, v) in cfg.vortices.iter().enumerate() {
            if !(0.0..lx).contains(&v.x) || !(0.0..ly).contains(&v.y) {
                return Err(ConfigError::constraint(&format!("vortices[{k}]"), "must lie in [0, Lx) x [0, Ly)"));
            }
        }
    } else {
        deny(radial_fields, "domain.t_max", mode)?;
        deny(torus_fields, "domain.Lx", mode)?;
        let rs = d
            .r_schedule
            .as_ref()
            .ok_or_else(|| ConfigError::schema("domain.R_schedule", "missing field"))?;
        if rs.is_empty() {
            return Err(ConfigError::constraint("domain.R_schedule", "must not be empty"));
        }
        for (k, &r) in rs.iter().enumerate() {
            positive(r, &format!("domain.R_schedule[{k}]"))?;
            if k > 0 && r <= rs[k - 1] {
                return Err(ConfigError::constraint("domain.R_schedule", "must be strictly increasing"));
            }
        }
        let n = require(d.n, "domain.n")?;
        if n < 3 {
            return Err(ConfigError::constraint("domain.n", "need at least 3 interior nodes"));
        }
        let h = 2.0 * rs[rs.len() - 1] / (n as f64 + 1.0);
        for (k, v) in cfg.vortices.iter().enumerate() {
            if v.x.abs() >= rs[0] - h || v.y.abs() >= rs[0] - h {
                return Err(ConfigError::constraint(
                    &format!("vortices[{k}]"),
                    "must lie strictly inside the smallest square",
                ));
            }
        }
    }

    // solver
    if mode.is_radial() {
        deny(s.k_factor.is_some(), "solver.K_factor", mode)?;
        deny(s.max_iter.is_some(), "solver.max_iter", mode)?;
    } else {
        let k = require(s.k_factor, "solver.K_factor")?;
        if !(k.is_finite() && k >= sharp_k_factor()) {
            return Err(ConfigError::constraint(
                "solver.K_factor",
                format!("must be at least the order-preserving bound {}, got {k}", sharp_k_factor()),
            ));
        }
        if require(s.max_iter, "solver.max_iter")? == 0 {
            return Err(ConfigError::constraint("solver.max_iter", "must be positive"));
        }
    }
    positive(require(s.tol, "solver.tol")?, "solver.tol")?;

    // targets
    let n_total = cfg.total_winding();
    deny(t.beta.is_some() && mode != Mode::RadialNontopological, "targets.beta", mode)?;
    deny(
        (t.a_range.is_some() || t.a_offset_range.is_some() || t.samples.is_some()) && mode != Mode::RadialSweep,
        "targets.a_range",
        mode,
    )?;
    deny(t.rel_width.is_some() && mode != Mode::LambdaCritical, "targets.rel_width", mode)?;
    match mode {
        Mode::RadialNontopological => {
            let b = require(t.beta, "targets.beta")?;
            let min = 2.0 * n_total as f64 + 4.0;
            if !(b.is_finite() && b > min) {
                return Err(ConfigError::constraint(
                    "targets.beta",
                    format!("non-topological solutions exist for every beta > 2N + 4 = {min} and no other; got {b}"),
                ));
            }
        }
        Mode::RadialSweep => {
            let range = match (t.a_range, t.a_offset_range) {
                (Some(r), None) => r,
                (None, Some(r)) => {
                    if !(r[1] < 0.0) {
                        return Err(ConfigError::constraint("targets.a_offset_range", "offsets must be negative"));
                    }
                    r
                }
                (Some(_), Some(_)) => {
                    return Err(ConfigError::schema("targets", "give exactly one of `a_range`, `a_offset_range`"))
                }
                (None, None) => return Err(ConfigError::schema("targets.a_range", "missing field")),
            };
            if !(range[0].is_finite() && range[1].is_finite() && range[0] < range[1]) {
                return Err(ConfigError::constraint("targets.a_range", "need finite lo < hi"));
            }
            if require(t.samples, "targets.samples")? < 2 {
                return Err(ConfigError::constraint("targets.samples", "need at least 2 samples"));
            }
        }
        Mode::LambdaCritical => {
            let w = require(t.rel_width, "targets.rel_width")?;
            if !(w > 0.0 && w < 1.0) {
                return Err(ConfigError::constraint("targets.rel_width", "must lie in (0, 1)"));
            }
        }
        _ => {}
    }
    Ok(())
}

/// Float-valued paths. Integers in the input are rewritten as floats there.
const FLOAT_FIELDS: [&[&str]; 12] = [
    &["coupling", "kappa"],
    &["coupling", "lambda"],
    &["domain", "Lx"],
    &["domain", "Ly"],
    &["domain", "R_schedule"],
    &["domain", "t_start"],
    &["domain", "t_max"],
    &["solver", "K_factor"],
    &["solver", "tol"],
    &["targets", "beta"],
    &["targets", "a_range"],
    &["targets", "a_offset_range"],
];

fn floatify(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if let Some(num) = serde_json::Number::from_f64(f) {
                    *v = Value::Number(num);
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(floatify),
        _ => {}
    }
}

fn section<'a>(obj: &'a mut Map<String, Value>, key: &str) -> &'a mut Map<String, Value> {
    let entry = obj.entry(key.to_string()).or_insert_with(|| Value::Object(Map::new()));
    entry.as_object_mut().expect("section is an object")
}

fn set_default(m: &mut Map<String, Value>, key: &str, v: Value) {
    m.entry(key.to_string()).or_insert(v);
}

/// Canonical form of a valid config document, computed on the JSON tree: insert
/// the mode and the mode defaults, write floats as floats, drop an absent output.
pub fn normalize(text: &str, mode: Option<Mode>) -> Result<Value, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let Value::Object(mut obj) = with_mode(value, mode)? else {
        unreachable!("with_mode returns an object");
    };
    let mode: Mode = obj
        .get("mode")
        .and_then(|m| m.as_str())
        .ok_or_else(|| ConfigError::schema("mode", "expected a string"))?
        .parse()?;
    obj.entry("vortices".to_string()).or_insert_with(|| Value::Array(Vec::new()));
    {
        let d = section(&mut obj, "domain");
        if mode.is_radial() {
            set_default(d, "t_max", Value::from(40.0));
        }
        if mode.is_torus() {
            if let Some(lx) = d.get("Lx").cloned() {
                set_default(d, "Ly", lx);
            }
            if let Some(nx) = d.get("nx").cloned() {
                set_default(d, "ny", nx);
            }
        }
    }
    {
        let s = section(&mut obj, "solver");
        match mode {
            Mode::Torus => {
                set_default(s, "K_factor", Value::from(TORUS_K_FACTOR));
                set_default(s, "max_iter", Value::from(5000));
                set_default(s, "tol", Value::from(1e-10));
            }
            Mode::LambdaCritical => {
                set_default(s, "K_factor", Value::from(FAST_K_FACTOR));
                set_default(s, "max_iter", Value::from(20000));
                set_default(s, "tol", Value::from(1e-10));
            }
            Mode::Plane => {
                set_default(s, "K_factor", Value::from(FAST_K_FACTOR));
                set_default(s, "max_iter", Value::from(3000));
                set_default(s, "tol", Value::from(1e-9));
            }
            _ => set_default(s, "tol", Value::from(1e-13)),
        }
    }
    {
        let t = section(&mut obj, "targets");
        if mode == Mode::RadialSweep {
            set_default(t, "samples", Value::from(20));
        }
        if mode == Mode::LambdaCritical {
            set_default(t, "rel_width", Value::from(1e-3));
        }
    }
    if obj.get("output") == Some(&Value::Null) {
        obj.remove("output");
    }
    for path in FLOAT_FIELDS {
        if let Some(Value::Object(sec)) = obj.get_mut(path[0]) {
            if let Some(v) = sec.get_mut(path[1]) {
                floatify(v);
            }
        }
    }
    if let Some(Value::Array(vs)) = obj.get_mut("vortices") {
        for v in vs {
            if let Value::Object(m) = v {
                for key in ["x", "y"] {
                    if let Some(x) = m.get_mut(key) {
                        floatify(x);
                    }
                }
            }
        }
    }
    Ok(Value::Object(obj))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"mode":"radial-topological","coupling":{"kappa":1},"vortices":[{"x":0,"y":0,"n":1}]}"#;

    #[test]
    fn kappa_gives_lambda_twelve() {
        let c = parse_config(MINIMAL).unwrap();
        assert!((c.coupling().unwrap().lambda() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn both_couplings_rejected() {
        let t = r#"{"mode":"torus","coupling":{"kappa":1,"lambda":2},"vortices":[],"domain":{"Lx":6,"nx":32}}"#;
        match parse_config(t) {
            Err(ConfigError::Schema { path, .. }) => assert_eq!(path, "coupling"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_has_path() {
        let t = r#"{"mode":"torus","coupling":{"lambda":2},"domain":{"Lx":6,"nx":32,"nz":3}}"#;
        match parse_config(t) {
            Err(ConfigError::Schema { path, .. }) => assert_eq!(path, "domain.nz"),
            other => panic!("{other:?}"),
        }
        let t = r#"{"mode":"torus","coupling":{"lambda":"two"},"domain":{"Lx":6,"nx":32}}"#;
        match parse_config(t) {
            Err(ConfigError::Schema { path, .. }) => assert_eq!(path, "coupling.lambda"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn beta_at_bound_rejected() {
        let t = r#"{"mode":"radial-nontopological","coupling":{"lambda":1},"vortices":[{"x":0,"y":0,"n":1}],"targets":{"beta":6}}"#;
        assert!(matches!(parse_config(t), Err(ConfigError::Constraint { .. })));
        let t = t.replace("\"beta\":6", "\"beta\":6.5");
        assert!(parse_config(&t).is_ok());
    }

    #[test]
    fn mode_mismatch() {
        assert!(parse_config_for(MINIMAL, Some(Mode::Torus)).is_err());
        assert!(parse_config_for(MINIMAL, Some(Mode::RadialTopological)).is_ok());
    }

    #[test]
    fn round_trip_minimal() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.to_value(), normalize(MINIMAL, None).unwrap());
    }
}
