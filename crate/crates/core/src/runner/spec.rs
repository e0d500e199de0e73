//! Run descriptions in the flat `key = value` format.
//!
//! One assignment per line; `#` starts a comment. Keys are case-sensitive and
//! each may appear once. A `preset = <name>` line expands to that preset's
//! keys first, and every other line overrides them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::integrators::{Predictor, Scheme, StepperConfig};
use crate::models::{InitialCondition, ModelKind, ModelParams};

use super::presets::{preset, Preset};

/// Every accepted key, in manifest order.
pub const KEYS: &[&str] = &[
    "preset",
    "model",
    "epsilon",
    "lambda",
    "gamma0",
    "a",
    "b",
    "c",
    "Lx",
    "Ly",
    "Nx",
    "Ny",
    "ic",
    "amplitude",
    "seed",
    "radius",
    "center",
    "scheme",
    "stages",
    "order",
    "dt",
    "predictor",
    "max_corrector_iters",
    "eps0",
    "eps_stage",
    "max_stage_iters",
    "eps_lin",
    "max_linear_iters",
    "T",
    "record_every",
    "snapshot_times",
    "output_dir",
    "volume",
];

/// A fully resolved run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub preset: Option<String>,
    pub model: ModelKind,
    pub params: ModelParams,
    pub grid: Grid2D,
    pub initial: InitialCondition,
    pub stepper: StepperConfig,
    pub t_end: f64,
    /// Steps between trace rows.
    pub record_every: usize,
    pub snapshot_times: Vec<f64>,
    /// Relative paths resolve against the output root.
    pub output_dir: PathBuf,
    /// Adds a `volume` column (`∫ (1 + φ)/2`) to the trace.
    pub volume: bool,
    /// Keys whose preset values are not given by the source experiment.
    pub defaulted: Vec<String>,
}

struct Entry {
    value: String,
    line: Option<usize>,
}

impl Entry {
    fn err(&self, key: &str, message: impl Into<String>) -> Error {
        let message = message.into();
        Error::Validation {
            key: key.to_string(),
            message: match self.line {
                Some(l) => format!("{message} (line {l})"),
                None => message,
            },
        }
    }
}

/// Splits `text` into `(key, value, line)` triples.
fn lines(text: &str) -> Result<Vec<(String, String, usize)>> {
    let mut out: Vec<(String, String, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Parse {
            line,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse {
                line,
                message: "missing key".into(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(Error::Parse {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        if value.is_empty() {
            return Err(Error::Parse {
                line,
                message: format!("missing value for `{key}`"),
            });
        }
        if let Some((_, _, first)) = out.iter().find(|(k, _, _)| k == key) {
            return Err(Error::Parse {
                line,
                message: format!("`{key}` already set on line {first}"),
            });
        }
        out.push((key.to_string(), value.to_string(), line));
    }
    Ok(out)
}

pub fn parse_runspec(text: &str) -> Result<RunSpec> {
    let user = lines(text)?;
    let mut map: BTreeMap<String, Entry> = BTreeMap::new();
    let mut defaulted: Vec<String> = Vec::new();
    if let Some((_, name, line)) = user.iter().find(|(k, _, _)| k == "preset") {
        let p: &Preset = preset(name).ok_or_else(|| Error::Validation {
            key: "preset".into(),
            message: format!("unknown preset `{name}` (line {line})"),
        })?;
        for (k, v, _) in lines(p.text)? {
            map.insert(k, Entry { value: v, line: None });
        }
        defaulted = p.defaulted.iter().map(|s| s.to_string()).collect();
    }
    for (k, v, line) in user {
        defaulted.retain(|d| *d != k);
        map.insert(k, Entry { value: v, line: Some(line) });
    }
    Resolver { map, used: Vec::new() }.resolve(defaulted)
}

struct Resolver {
    map: BTreeMap<String, Entry>,
    used: Vec<&'static str>,
}

impl Resolver {
    fn raw(&mut self, key: &'static str) -> Option<&Entry> {
        self.used.push(key);
        self.map.get(key)
    }

    fn required(&mut self, key: &'static str) -> Result<&Entry> {
        self.used.push(key);
        self.map.get(key).ok_or_else(|| Error::Validation {
            key: key.to_string(),
            message: "required".into(),
        })
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &'static str, what: &str) -> Result<Option<T>> {
        match self.raw(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|_| e.err(key, format!("expected {what}, found `{}`", e.value))),
        }
    }

    fn real(&mut self, key: &'static str) -> Result<Option<f64>> {
        let v: Option<f64> = self.parsed(key, "a number")?;
        match v {
            Some(x) if !x.is_finite() => Err(self.map[key].err(key, "must be finite")),
            other => Ok(other),
        }
    }

    fn positive(&mut self, key: &'static str) -> Result<Option<f64>> {
        match self.real(key)? {
            Some(x) if x <= 0.0 => Err(self.map[key].err(key, "must be > 0")),
            other => Ok(other),
        }
    }

    fn count(&mut self, key: &'static str) -> Result<Option<usize>> {
        match self.parsed::<usize>(key, "a non-negative integer")? {
            Some(0) => Err(self.map[key].err(key, "must be >= 1")),
            other => Ok(other),
        }
    }

    fn reals(&mut self, key: &'static str) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.raw(key) else { return Ok(None) };
        e.value
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| e.err(key, format!("bad number `{}`", s.trim())))
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }

    /// Rejects a key that was given but is meaningless in this context.
    fn forbid(&self, key: &str, why: &str) -> Result<()> {
        match self.map.get(key) {
            Some(e) => Err(e.err(key, format!("not used {why}"))),
            None => Ok(()),
        }
    }

    fn resolve(mut self, defaulted: Vec<String>) -> Result<RunSpec> {
        let preset = self.raw("preset").map(|e| e.value.clone());

        let e = self.required("model")?;
        let model: ModelKind = e
            .value
            .parse()
            .map_err(|_| e.err("model", format!("unknown model `{}`", e.value)))?;

        let mut params = ModelParams::default();
        let uses: &[&str] = match model {
            ModelKind::CahnHilliard | ModelKind::AllenCahn | ModelKind::Mbe => &["epsilon", "lambda", "gamma0"],
            ModelKind::Pfc => &["a", "b", "c", "lambda", "gamma0"],
            ModelKind::Linear => &["lambda", "gamma0"],
        };
        for key in ["epsilon", "lambda", "gamma0", "a", "b", "c"] {
            if !uses.contains(&key) {
                self.forbid(key, &format!("by model = {model}"))?;
            }
        }
        if let Some(v) = self.real("epsilon")? {
            params.epsilon = v;
        }
        if let Some(v) = self.positive("lambda")? {
            params.lambda = v;
        }
        if let Some(v) = self.real("gamma0")? {
            params.gamma0 = v;
        }
        for (key, slot) in [("a", &mut params.a), ("b", &mut params.b), ("c", &mut params.c)] {
            if let Some(v) = self.real(key)? {
                *slot = v;
            }
        }
        if let Err(Error::InvalidParameter { name, reason }) = params.validate() {
            return Err(Error::Validation { key: name, message: reason });
        }

        let lx = self.positive("Lx")?.ok_or_else(|| missing("Lx"))?;
        let ly = self.positive("Ly")?.unwrap_or(lx);
        let nx = self.count("Nx")?.ok_or_else(|| missing("Nx"))?;
        let ny = self.count("Ny")?.unwrap_or(nx);
        for (key, n) in [("Nx", nx), ("Ny", ny)] {
            if n % 2 != 0 || n < 4 {
                let msg = format!("grid size must be even and >= 4, found {n}");
                return Err(match self.map.get(key) {
                    Some(e) => e.err(key, msg),
                    None => Error::Validation { key: key.into(), message: msg },
                });
            }
        }
        let grid = Grid2D::new(lx, ly, nx, ny).map_err(|e| Error::Validation {
            key: "Nx".into(),
            message: e.to_string(),
        })?;

        let initial = self.initial(&grid, &params)?;
        let stepper = self.stepper()?;

        let t_end = self.positive("T")?.ok_or_else(|| missing("T"))?;
        let steps = t_end / stepper.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) || steps.round() < 1.0 {
            return Err(self.map["T"].err("T", format!("must be a positive multiple of dt = {}", stepper.dt)));
        }
        let record_every = self
            .count("record_every")?
            .unwrap_or(if t_end <= 10.0 { 1 } else { 10 });
        let mut snapshot_times = self.reals("snapshot_times")?.unwrap_or_default();
        snapshot_times.sort_by(f64::total_cmp);
        snapshot_times.dedup();
        if snapshot_times.iter().any(|&s| s < 0.0 || s > t_end * (1.0 + 1e-12)) {
            return Err(self.map["snapshot_times"].err("snapshot_times", format!("times must lie in [0, T = {t_end}]")));
        }
        let output_dir = match self.raw("output_dir") {
            Some(e) => PathBuf::from(&e.value),
            None => PathBuf::from(format!(
                "{}-{}",
                preset.as_deref().unwrap_or(model.name()),
                stepper.scheme
            )),
        };
        let volume = match self.raw("volume") {
            None => matches!(initial, InitialCondition::Disk { .. }),
            Some(e) => match e.value.as_str() {
                "true" => true,
                "false" => false,
                v => return Err(e.err("volume", format!("expected true or false, found `{v}`"))),
            },
        };

        if let Some(k) = self.map.keys().find(|k| !self.used.contains(&k.as_str())) {
            return Err(self.map[k].err(k, "not used by this configuration"));
        }
        Ok(RunSpec {
            preset,
            model,
            params,
            grid,
            initial,
            stepper,
            t_end,
            record_every,
            snapshot_times,
            output_dir,
            volume,
            defaulted,
        })
    }

    fn initial(&mut self, grid: &Grid2D, params: &ModelParams) -> Result<InitialCondition> {
        let e = self.required("ic")?;
        let name = e.value.clone();
        let ic = match name.as_str() {
            "sine" => InitialCondition::Sine,
            "mbe-waves" => InitialCondition::MbeWaves,
            "random" => InitialCondition::Random {
                amplitude: self.positive("amplitude")?.ok_or_else(|| missing("amplitude"))?,
                seed: self.parsed("seed", "a non-negative integer")?.unwrap_or(0),
            },
            "disk" => {
                let radius = self.positive("radius")?.ok_or_else(|| missing("radius"))?;
                let center = match self.reals("center")? {
                    None => (grid.lx() / 2.0, grid.ly() / 2.0),
                    Some(c) if c.len() == 2 => (c[0], c[1]),
                    Some(_) => return Err(self.map["center"].err("center", "expected `x, y`")),
                };
                InitialCondition::Disk { radius, center }
            }
            "pfc-seed" => InitialCondition::pfc_default(grid, params.a).map_err(|e| Error::Validation {
                key: "a".into(),
                message: e.to_string(),
            })?,
            other => {
                return Err(self.map["ic"].err(
                    "ic",
                    format!("unknown initial condition `{other}` (known: {})", InitialCondition::NAMES.join(", ")),
                ))
            }
        };
        Ok(ic)
    }

    fn stepper(&mut self) -> Result<StepperConfig> {
        let e = self.required("scheme")?;
        let name = e.value.clone();
        let bad = |e: &Entry, err: Error| e.err("scheme", err.to_string());
        let scheme = match name.as_str() {
            "gauss" => {
                let s = self.count("stages")?.ok_or_else(|| missing("stages"))?;
                format!("gauss{s}").parse::<Scheme>().map_err(|err| self.map["stages"].err("stages", err.to_string()))?
            }
            "bdf" => {
                let k = self.count("order")?.ok_or_else(|| missing("order"))?;
                format!("bdf{k}").parse::<Scheme>().map_err(|err| self.map["order"].err("order", err.to_string()))?
            }
            other => {
                self.forbid("stages", "unless scheme = gauss")?;
                self.forbid("order", "unless scheme = bdf")?;
                other.parse::<Scheme>().map_err(|err| bad(&self.map["scheme"], err))?
            }
        };
        let dt = self.positive("dt")?.ok_or_else(|| missing("dt"))?;
        let mut cfg = StepperConfig::new(scheme, dt);
        if let Some(case) = self.parsed::<u32>("predictor", "1, 2 or 3")? {
            cfg.predictor = Predictor::from_case(case).map_err(|err| self.map["predictor"].err("predictor", err.to_string()))?;
        }
        if let Some(v) = self.count("max_corrector_iters")? {
            cfg.max_corrector_iters = v;
        }
        if let Some(v) = self.positive("eps0")? {
            cfg.eps0 = v;
        }
        if let Some(v) = self.positive("eps_stage")? {
            cfg.eps_stage = v;
        }
        if let Some(v) = self.count("max_stage_iters")? {
            cfg.max_stage_iters = v;
        }
        if let Some(v) = self.positive("eps_lin")? {
            cfg.linear.eps = v;
        }
        if let Some(v) = self.count("max_linear_iters")? {
            cfg.linear.max_iters = v;
        }
        Ok(cfg)
    }
}

/// Shortest round-trip form, in exponent notation outside `[1e-4, 1e15)`.
pub(crate) fn real(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}

fn missing(key: &str) -> Error {
    Error::Validation {
        key: key.to_string(),
        message: "required".into(),
    }
}

impl RunSpec {
    pub fn from_preset(name: &str) -> Result<RunSpec> {
        parse_runspec(&format!("preset = {name}\n"))
    }

    /// The spec as `key = value` text with every value spelled out. Parsing
    /// it back gives the same spec; defaulted preset values carry a
    /// `# defaulted:` comment.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = write!(out, "{key} = {value}");
            if self.defaulted.iter().any(|d| d == key) {
                out.push_str("  # defaulted: not stated by the source experiment");
            }
            out.push('\n');
        };
        put("model", self.model.to_string());
        let p = &self.params;
        let params: &[(&str, f64)] = match self.model {
            ModelKind::CahnHilliard | ModelKind::AllenCahn | ModelKind::Mbe => {
                &[("epsilon", p.epsilon), ("lambda", p.lambda), ("gamma0", p.gamma0)]
            }
            ModelKind::Pfc => &[("a", p.a), ("b", p.b), ("c", p.c), ("lambda", p.lambda), ("gamma0", p.gamma0)],
            ModelKind::Linear => &[("lambda", p.lambda), ("gamma0", p.gamma0)],
        };
        for (k, v) in params {
            put(k, real(*v));
        }
        let g = &self.grid;
        put("Lx", real(g.lx()));
        put("Ly", real(g.ly()));
        put("Nx", g.nx().to_string());
        put("Ny", g.ny().to_string());
        put("ic", self.initial.name().to_string());
        match &self.initial {
            InitialCondition::Random { amplitude, seed } => {
                put("amplitude", real(*amplitude));
                put("seed", seed.to_string());
            }
            InitialCondition::Disk { radius, center } => {
                put("radius", real(*radius));
                put("center", format!("{}, {}", real(center.0), real(center.1)));
            }
            _ => {}
        }
        let s = &self.stepper;
        match s.scheme {
            Scheme::Gauss(n) => {
                put("scheme", "gauss".into());
                put("stages", n.to_string());
            }
            Scheme::Bdf(k) => {
                put("scheme", "bdf".into());
                put("order", k.to_string());
            }
            other => put("scheme", other.to_string()),
        }
        put("dt", real(s.dt));
        put("predictor", s.predictor.case().to_string());
        put("max_corrector_iters", s.max_corrector_iters.to_string());
        put("eps0", real(s.eps0));
        put("eps_stage", real(s.eps_stage));
        put("max_stage_iters", s.max_stage_iters.to_string());
        put("eps_lin", real(s.linear.eps));
        put("max_linear_iters", s.linear.max_iters.to_string());
        put("T", real(self.t_end));
        put("record_every", self.record_every.to_string());
        if !self.snapshot_times.is_empty() {
            let t: Vec<String> = self.snapshot_times.iter().map(|&v| real(v)).collect();
            put("snapshot_times", t.join(", "));
        }
        put("output_dir", self.output_dir.display().to_string());
        put("volume", self.volume.to_string());
        if let Some(p) = &self.preset {
            out.insert_str(0, &format!("# expanded from preset {p}\n"));
        }
        out
    }

    /// Number of steps to reach `T`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.stepper.dt).round() as usize
    }
}
