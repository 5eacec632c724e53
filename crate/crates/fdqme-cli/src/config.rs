//! Scenario configuration: TOML with `[params]`, `[grid.frequency]`,
//! `[grid.time]`, `[grid.sweep]` and `[output]` sections, validated strictly.
//! All problems are collected before reporting.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use fdqme::baths::{Bath, SqueezedBathParams, ThermalBathParams};
use fdqme::waveguide::WaveguideParams;
use toml::{Table, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScenarioKind {
    ThermalSpectrum,
    SqueezedSpectrum,
    WaveguideSpectrum,
    MeasureSweep,
    BlpCompare,
    Positivity,
    OracleCompare,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 7] = [
        Self::ThermalSpectrum,
        Self::SqueezedSpectrum,
        Self::WaveguideSpectrum,
        Self::MeasureSweep,
        Self::BlpCompare,
        Self::Positivity,
        Self::OracleCompare,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Self::ThermalSpectrum => "thermal-spectrum",
            Self::SqueezedSpectrum => "squeezed-spectrum",
            Self::WaveguideSpectrum => "waveguide-spectrum",
            Self::MeasureSweep => "measure-sweep",
            Self::BlpCompare => "blp-compare",
            Self::Positivity => "positivity",
            Self::OracleCompare => "oracle-compare",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Self::ThermalSpectrum => "FD and Markovian emission spectra of a qubit in a thermal cavity",
            Self::SqueezedSpectrum => "FD and Markovian emission spectra of a qubit in a squeezed cavity",
            Self::WaveguideSpectrum => "conditional spectrum of two emitters with delayed feedback",
            Self::MeasureSweep => "spectral measure N_S over a parameter sweep",
            Self::BlpCompare => "BLP measure from Redfield dynamics next to N_S over a sweep",
            Self::Positivity => "purity of Redfield and FD trajectories for a squeezed bath",
            Self::OracleCompare => "FD spectrum against the joint qubit-cavity simulation",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.tag() == tag)
    }

    fn grids(self) -> GridRules {
        use Need::*;
        let (frequency, time, sweep) = match self {
            Self::ThermalSpectrum | Self::SqueezedSpectrum | Self::WaveguideSpectrum => (Optional, Forbidden, Forbidden),
            Self::MeasureSweep => (Forbidden, Forbidden, Required),
            Self::BlpCompare => (Forbidden, Required, Required),
            Self::Positivity => (Forbidden, Required, Forbidden),
            Self::OracleCompare => (Required, Forbidden, Forbidden),
        };
        GridRules {
            frequency,
            time,
            sweep,
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Need {
    Required,
    Optional,
    Forbidden,
}

struct GridRules {
    frequency: Need,
    time: Need,
    sweep: Need,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BathKind {
    Thermal,
    Squeezed,
    Waveguide,
}

impl BathKind {
    fn from_tag(s: &str) -> Option<Self> {
        match s {
            "thermal" => Some(Self::Thermal),
            "squeezed" => Some(Self::Squeezed),
            "waveguide" => Some(Self::Waveguide),
            _ => None,
        }
    }

    /// Numeric keys, with defaults for the optional ones. Keys in an
    /// `either` pair are handled separately.
    fn numeric_keys(self) -> &'static [(&'static str, Option<f64>)] {
        match self {
            Self::Thermal => &[
                ("g", Some(1.0)),
                ("omega_q", None),
                ("kappa", None),
                ("nbar", None),
                ("delta", Some(f64::NAN)),
                ("omega_c", Some(f64::NAN)),
            ],
            Self::Squeezed => &[
                ("g", Some(1.0)),
                ("delta_q", None),
                ("delta_c", None),
                ("r", None),
                ("kappa", None),
            ],
            Self::Waveguide => &[
                ("omega0", None),
                ("gamma", None),
                ("beta", None),
                ("eta", Some(f64::NAN)),
                ("n", Some(f64::NAN)),
            ],
        }
    }

    /// Pairs of which exactly one key must be given.
    fn either(self) -> Option<(&'static str, &'static str)> {
        match self {
            Self::Thermal => Some(("delta", "omega_c")),
            Self::Squeezed => None,
            Self::Waveguide => Some(("eta", "n")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Log,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                if k == 0 {
                    return self.start;
                }
                if k == n - 1 {
                    return self.stop;
                }
                match self.spacing {
                    Spacing::Linear => self.start + (self.stop - self.start) * s,
                    Spacing::Log => (self.start.ln() + (self.stop / self.start).ln() * s).exp(),
                }
            })
            .collect()
    }

    fn to_table(&self) -> Table {
        let mut t = Table::new();
        t.insert("start".into(), Value::Float(self.start));
        t.insert("stop".into(), Value::Float(self.stop));
        t.insert("points".into(), Value::Integer(self.points as i64));
        let s = match self.spacing {
            Spacing::Linear => "linear",
            Spacing::Log => "log",
        };
        t.insert("spacing".into(), Value::String(s.into()));
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub parameter: String,
    pub grid: GridSpec,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub prefix: String,
    pub format: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Text(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub params: BTreeMap<String, ParamValue>,
    pub frequency: Option<GridSpec>,
    pub time: Option<GridSpec>,
    pub sweep: Option<SweepSpec>,
    pub output: OutputSpec,
}

/// A fully resolved physical system at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub enum System {
    Qubit(Bath),
    Waveguide(WaveguideParams),
}

impl ScenarioConfig {
    pub fn number(&self, key: &str) -> Option<f64> {
        match self.params.get(key) {
            Some(ParamValue::Number(x)) => Some(*x),
            _ => None,
        }
    }

    pub fn text(&self, key: &str) -> Option<&str> {
        match self.params.get(key) {
            Some(ParamValue::Text(s)) => Some(s),
            _ => None,
        }
    }

    pub fn bath_kind(&self) -> BathKind {
        bath_kind_of(self.scenario, self.text("bath"))
    }

    /// Physical system with `overrides` (a sweep point) applied.
    pub fn system(&self, overrides: &[(&str, f64)]) -> Result<System, String> {
        let get = |k: &str| {
            overrides
                .iter()
                .find(|(n, _)| *n == k)
                .map(|(_, v)| *v)
                .or_else(|| self.number(k))
        };
        let req = |k: &str| get(k).ok_or_else(|| format!("missing parameter `{k}`"));
        let kind = self.bath_kind();
        let g = get("g").unwrap_or(1.0);
        let err = |e: fdqme::Error| e.to_string();
        match kind {
            BathKind::Thermal => {
                let (wq, kappa, nbar) = (req("omega_q")?, req("kappa")?, req("nbar")?);
                let p = match (get("delta"), get("omega_c")) {
                    (Some(d), None) => ThermalBathParams::with_detuning(g, wq, d, kappa, nbar),
                    (None, Some(wc)) => ThermalBathParams::new(g, wq, wc, kappa, nbar),
                    _ => return Err("exactly one of `delta` and `omega_c` is required".into()),
                }
                .map_err(err)?;
                Ok(System::Qubit(Bath::Thermal(p)))
            }
            BathKind::Squeezed => {
                let p = SqueezedBathParams::new(g, req("delta_q")?, req("delta_c")?, req("r")?, req("kappa")?)
                    .map_err(err)?;
                Ok(System::Qubit(Bath::Squeezed(p)))
            }
            BathKind::Waveguide => {
                let (w0, gamma, beta) = (req("omega0")?, req("gamma")?, req("beta")?);
                let p = match (get("eta"), get("n")) {
                    (Some(eta), None) => WaveguideParams::new(w0, gamma, beta, eta),
                    (None, Some(n)) => {
                        // Sweep grids land within rounding of the integers.
                        let k = n.round();
                        if !(k >= 0.0 && (n - k).abs() <= 1e-9 * k.max(1.0) && k <= u32::MAX as f64) {
                            return Err(format!("`n` must be a non-negative integer, got {n}"));
                        }
                        WaveguideParams::resonant(w0, gamma, beta, k as u32)
                    }
                    _ => return Err("exactly one of `eta` and `n` is required".into()),
                }
                .map_err(err)?;
                Ok(System::Waveguide(p))
            }
        }
    }

    /// Sweep points, or a single empty override set without a sweep.
    pub fn sweep_points(&self) -> Vec<Vec<(&str, f64)>> {
        match &self.sweep {
            Some(s) => s
                .grid
                .values()
                .into_iter()
                .map(|v| vec![(s.parameter.as_str(), v)])
                .collect(),
            None => vec![vec![]],
        }
    }

    /// Canonical TOML rendering; parsing it gives back `self`.
    pub fn echo(&self) -> String {
        let mut root = Table::new();
        root.insert("scenario".into(), Value::String(self.scenario.tag().into()));
        let mut params = Table::new();
        for (k, v) in &self.params {
            let v = match v {
                ParamValue::Number(x) => Value::Float(*x),
                ParamValue::Text(s) => Value::String(s.clone()),
            };
            params.insert(k.clone(), v);
        }
        root.insert("params".into(), Value::Table(params));
        let mut grid = Table::new();
        if let Some(f) = &self.frequency {
            grid.insert("frequency".into(), Value::Table(f.to_table()));
        }
        if let Some(t) = &self.time {
            grid.insert("time".into(), Value::Table(t.to_table()));
        }
        if let Some(s) = &self.sweep {
            let mut t = s.grid.to_table();
            t.insert("parameter".into(), Value::String(s.parameter.clone()));
            grid.insert("sweep".into(), Value::Table(t));
        }
        if !grid.is_empty() {
            root.insert("grid".into(), Value::Table(grid));
        }
        let mut out = Table::new();
        out.insert("dir".into(), Value::String(self.output.dir.display().to_string()));
        out.insert("prefix".into(), Value::String(self.output.prefix.clone()));
        out.insert("format".into(), Value::String(self.output.format.clone()));
        root.insert("output".into(), Value::Table(out));
        root.to_string()
    }
}

fn bath_kind_of(scenario: ScenarioKind, bath: Option<&str>) -> BathKind {
    match scenario {
        ScenarioKind::ThermalSpectrum => BathKind::Thermal,
        ScenarioKind::SqueezedSpectrum | ScenarioKind::Positivity => BathKind::Squeezed,
        ScenarioKind::WaveguideSpectrum => BathKind::Waveguide,
        _ => bath.and_then(BathKind::from_tag).unwrap_or(BathKind::Thermal),
    }
}

/// Text-valued keys of a scenario: `(key, allowed values, default)`.
fn text_keys(s: ScenarioKind) -> &'static [(&'static str, &'static [&'static str], Option<&'static str>)] {
    match s {
        ScenarioKind::MeasureSweep => &[("bath", &["thermal", "squeezed", "waveguide"], None)],
        ScenarioKind::BlpCompare => &[
            ("bath", &["thermal", "squeezed"], Some("thermal")),
            ("dynamics", &["br", "bm"], Some("br")),
            ("states", &["sigma_z", "sigma_x"], Some("sigma_z")),
        ],
        ScenarioKind::Positivity => &[(
            "initial",
            &["sigma_y_minus", "sigma_y_plus", "sigma_x_plus", "sigma_x_minus", "ground", "excited"],
            Some("sigma_y_minus"),
        )],
        ScenarioKind::OracleCompare => &[("bath", &["thermal", "squeezed"], None)],
        _ => &[],
    }
}

/// Numeric keys beyond the bath parameters.
fn extra_numeric_keys(s: ScenarioKind) -> &'static [&'static str] {
    match s {
        ScenarioKind::OracleCompare => &["n_fock"],
        _ => &[],
    }
}

fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Float(x) => Some(*x),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn parse_grid(table: &Value, name: &str, sweep: bool, errors: &mut Vec<String>) -> Option<(GridSpec, Option<String>)> {
    let Some(t) = table.as_table() else {
        errors.push(format!("[grid.{name}] must be a table"));
        return None;
    };
    let mut allowed = vec!["start", "stop", "points", "spacing"];
    if sweep {
        allowed.push("parameter");
    }
    for k in t.keys() {
        if !allowed.contains(&k.as_str()) {
            errors.push(format!("[grid.{name}]: unknown key `{k}`"));
        }
    }
    let n_before = errors.len();
    let mut num = |k: &str| match t.get(k) {
        None => {
            errors.push(format!("[grid.{name}]: missing key `{k}`"));
            None
        }
        Some(v) => {
            let x = as_number(v);
            if x.is_none() || !x.unwrap().is_finite() {
                errors.push(format!("[grid.{name}]: `{k}` must be a finite number"));
            }
            x
        }
    };
    let start = num("start");
    let stop = num("stop");
    let points = match t.get("points") {
        None => {
            errors.push(format!("[grid.{name}]: missing key `points`"));
            None
        }
        Some(Value::Integer(i)) if *i >= 2 => Some(*i as usize),
        Some(_) => {
            errors.push(format!("[grid.{name}]: `points` must be an integer >= 2"));
            None
        }
    };
    let spacing = match t.get("spacing").map(|v| v.as_str()) {
        None => Some(Spacing::Linear),
        Some(Some("linear")) => Some(Spacing::Linear),
        Some(Some("log")) => Some(Spacing::Log),
        Some(_) => {
            errors.push(format!("[grid.{name}]: `spacing` must be \"linear\" or \"log\""));
            None
        }
    };
    let parameter = if sweep {
        match t.get("parameter").map(|v| v.as_str()) {
            Some(Some(p)) => Some(p.to_string()),
            Some(None) => {
                errors.push(format!("[grid.{name}]: `parameter` must be a string"));
                None
            }
            None => {
                errors.push(format!("[grid.{name}]: missing key `parameter`"));
                None
            }
        }
    } else {
        None
    };
    if errors.len() > n_before {
        return None;
    }
    let (start, stop, points, spacing) = (start?, stop?, points?, spacing?);
    if !(stop > start) {
        errors.push(format!("[grid.{name}]: need start < stop for a monotone grid (got {start}, {stop})"));
        return None;
    }
    if spacing == Spacing::Log && !(start > 0.0) {
        errors.push(format!("[grid.{name}]: log spacing needs start > 0"));
        return None;
    }
    if name == "time" && start < 0.0 {
        errors.push(format!("[grid.{name}]: times must be non-negative"));
        return None;
    }
    Some((
        GridSpec {
            start,
            stop,
            points,
            spacing,
        },
        parameter,
    ))
}

/// Parses and validates a configuration for `scenario`. A top-level
/// `scenario` key, if present, must name the same scenario.
pub fn parse_config(text: &str, scenario: ScenarioKind) -> Result<ScenarioConfig, Vec<String>> {
    let root: Table = text.parse().map_err(|e: toml::de::Error| vec![format!("syntax: {}", e.message())])?;
    let mut errors = Vec::new();

    for (k, v) in &root {
        match k.as_str() {
            "scenario" => match v.as_str() {
                Some(tag) => match ScenarioKind::from_tag(tag) {
                    None => errors.push(format!("unknown scenario `{tag}`")),
                    Some(s) if s != scenario => {
                        errors.push(format!("config is for `{tag}` but `{scenario}` was requested"))
                    }
                    Some(_) => {}
                },
                None => errors.push("`scenario` must be a string".into()),
            },
            "params" | "grid" | "output" => {
                if !v.is_table() {
                    errors.push(format!("`{k}` must be a section"));
                }
            }
            _ => errors.push(format!("unknown section or key `{k}`")),
        }
    }

    // Grids.
    let rules = scenario.grids();
    let empty = Table::new();
    let grid = root.get("grid").and_then(Value::as_table).unwrap_or(&empty);
    for k in grid.keys() {
        if !["frequency", "time", "sweep"].contains(&k.as_str()) {
            errors.push(format!("unknown grid `[grid.{k}]`"));
        }
    }
    let mut take = |name: &str, need: Need, sweep: bool| -> Option<(GridSpec, Option<String>)> {
        match (grid.get(name), need) {
            (None, Need::Required) => {
                errors.push(format!("`{scenario}` requires [grid.{name}]"));
                None
            }
            (Some(_), Need::Forbidden) => {
                errors.push(format!("`{scenario}` does not use [grid.{name}]"));
                None
            }
            (Some(v), _) => parse_grid(v, name, sweep, &mut errors),
            (None, _) => None,
        }
    };
    let frequency = take("frequency", rules.frequency, false).map(|g| g.0);
    let time = take("time", rules.time, false).map(|g| g.0);
    let sweep = take("sweep", rules.sweep, true).and_then(|(g, p)| p.map(|parameter| SweepSpec { parameter, grid: g }));

    // Params.
    let params_in = root.get("params").and_then(Value::as_table).unwrap_or(&empty);
    let mut params = BTreeMap::new();
    let texts = text_keys(scenario);
    for (key, allowed, default) in texts {
        match params_in.get(*key) {
            Some(Value::String(s)) if allowed.contains(&s.as_str()) => {
                params.insert(key.to_string(), ParamValue::Text(s.clone()));
            }
            Some(Value::String(s)) => errors.push(format!("[params]: `{key}` = \"{s}\" is not one of {allowed:?}")),
            Some(_) => errors.push(format!("[params]: `{key}` must be a string")),
            None => match default {
                Some(d) => {
                    params.insert(key.to_string(), ParamValue::Text(d.to_string()));
                }
                None => errors.push(format!("[params]: missing key `{key}`")),
            },
        }
    }
    let kind = bath_kind_of(scenario, params.get("bath").and_then(|v| match v {
        ParamValue::Text(s) => Some(s.as_str()),
        _ => None,
    }));
    let swept = sweep.as_ref().map(|s| s.parameter.as_str());
    let numeric = kind.numeric_keys();
    let extras = extra_numeric_keys(scenario);
    if let Some(p) = swept {
        if !numeric.iter().any(|(k, _)| *k == p) {
            let names: Vec<_> = numeric.iter().map(|(k, _)| *k).collect();
            errors.push(format!("[grid.sweep]: `{p}` is not a parameter of this bath (one of {names:?})"));
        }
        if params_in.contains_key(p) {
            errors.push(format!("[params]: `{p}` is set by [grid.sweep] and must not also be given"));
        }
    }
    for (key, default) in numeric {
        match params_in.get(*key) {
            Some(v) => match as_number(v) {
                Some(x) if x.is_finite() => {
                    params.insert(key.to_string(), ParamValue::Number(x));
                }
                _ => errors.push(format!("[params]: `{key}` must be a finite number")),
            },
            None if Some(*key) == swept => {}
            None => match default {
                Some(d) if !d.is_nan() => {
                    params.insert(key.to_string(), ParamValue::Number(*d));
                }
                Some(_) => {}
                None => errors.push(format!("[params]: missing key `{key}`")),
            },
        }
    }
    for key in extras {
        if let Some(v) = params_in.get(*key) {
            match v {
                Value::Integer(i) if *i >= 4 => {
                    params.insert(key.to_string(), ParamValue::Number(*i as f64));
                }
                _ => errors.push(format!("[params]: `{key}` must be an integer >= 4")),
            }
        }
    }
    if let Some((a, b)) = kind.either() {
        let has = |k: &str| params_in.contains_key(k) || swept == Some(k);
        if has(a) == has(b) {
            errors.push(format!("[params]: exactly one of `{a}` and `{b}` is required"));
        }
    }
    for k in params_in.keys() {
        let known = numeric.iter().any(|(n, _)| n == k)
            || texts.iter().any(|(n, _, _)| n == k)
            || extras.contains(&k.as_str());
        if !known {
            errors.push(format!("[params]: unknown key `{k}`"));
        }
    }

    // Output.
    let out_in = root.get("output").and_then(Value::as_table).unwrap_or(&empty);
    let mut output = OutputSpec {
        dir: PathBuf::from("."),
        prefix: scenario.tag().to_string(),
        format: "csv".into(),
    };
    for (k, v) in out_in {
        match (k.as_str(), v.as_str()) {
            ("dir", Some(s)) => output.dir = PathBuf::from(s),
            ("prefix", Some(s)) if !s.is_empty() && !s.contains(['/', '\\']) => output.prefix = s.into(),
            ("prefix", Some(s)) => errors.push(format!("[output]: invalid prefix `{s}`")),
            ("format", Some("csv")) => {}
            ("format", Some(s)) => errors.push(format!("[output]: unsupported format `{s}` (only \"csv\")")),
            ("dir" | "prefix" | "format", None) => errors.push(format!("[output]: `{k}` must be a string")),
            _ => errors.push(format!("[output]: unknown key `{k}`")),
        }
    }

    if !errors.is_empty() {
        return Err(errors);
    }
    let cfg = ScenarioConfig {
        scenario,
        params,
        frequency,
        time,
        sweep,
        output,
    };

    // Physical constraints at every sweep point; repeated messages once.
    let mut seen = std::collections::BTreeSet::new();
    for point in cfg.sweep_points() {
        if let Err(e) = cfg.system(&point) {
            let at = point.iter().map(|(k, v)| format!(" at {k} = {v}")).collect::<String>();
            if seen.insert(e.clone()) {
                errors.push(format!("constraint violated{at}: {e}"));
            }
        }
    }
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(errors)
    }
}
