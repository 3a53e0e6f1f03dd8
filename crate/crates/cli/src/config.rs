//! Experiment specification and its plain-text configuration format.
//!
//! One `key = value` per line, `#` starts a comment, lists are comma
//! separated. See `configs/example.conf` for every key.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fsorelay_core::channel::{check_xi, LinkParams};
use fsorelay_core::composition::GainMode;
use fsorelay_core::montecarlo::{BerModel, Combiner, SimConfig, SimLevel, MIN_TRIALS};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig1,
    Fig2,
    Fig3,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Outage,
    Ber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::ClosedForm, Method::Quadrature, Method::MonteCarlo];
}

macro_rules! text_enum {
    ($ty:ty, $what:literal, { $($variant:path => $name:literal $(| $alias:literal)*),+ $(,)? }) => {
        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $($variant => $name),+ })
            }
        }

        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name $(| $alias)* => Ok($variant),)+
                    other => Err(format!(concat!("unknown ", $what, " '{}'"), other)),
                }
            }
        }
    };
}

text_enum!(Preset, "preset", {
    Preset::Fig1 => "fig1",
    Preset::Fig2 => "fig2",
    Preset::Fig3 => "fig3",
    Preset::Custom => "custom",
});

text_enum!(Metric, "metric", {
    Metric::Outage => "outage",
    Metric::Ber => "ber",
});

text_enum!(Method, "method", {
    Method::ClosedForm => "closed-form" | "closed",
    Method::Quadrature => "quadrature" | "quad",
    Method::MonteCarlo => "monte-carlo" | "mc",
});

/// Inclusive γ_avg sweep in dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaSweep {
    pub start_db: f64,
    pub step_db: f64,
    pub stop_db: f64,
}

impl GammaSweep {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop_db - self.start_db) / self.step_db + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start_db + i as f64 * self.step_db).collect()
    }
}

impl FromStr for GammaSweep {
    type Err = String;

    /// `start:step:stop`, or a single value.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
        let sweep = match parts.as_slice() {
            [one] => {
                let v = num(one)?;
                GammaSweep {
                    start_db: v,
                    step_db: 1.0,
                    stop_db: v,
                }
            }
            [a, b, c] => GammaSweep {
                start_db: num(a)?,
                step_db: num(b)?,
                stop_db: num(c)?,
            },
            _ => return Err(format!("expected start:step:stop, got '{s}'")),
        };
        if ![sweep.start_db, sweep.step_db, sweep.stop_db].iter().all(|v| v.is_finite()) {
            return Err("sweep bounds must be finite".into());
        }
        if sweep.step_db <= 0.0 || sweep.stop_db < sweep.start_db {
            return Err(format!("need step > 0 and stop >= start, got '{s}'"));
        }
        Ok(sweep)
    }
}

/// One sweep: the γ_avg axis crossed with every family list.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub preset: Preset,
    pub metric: Metric,
    pub modes: Vec<GainMode>,
    pub users: Vec<u32>,
    pub relays: Vec<u32>,
    pub lambdas: Vec<f64>,
    pub xi: f64,
    pub a0: f64,
    pub eta: f64,
    pub c_gain: f64,
    pub gamma_th_db: f64,
    pub gamma_avg_db: GammaSweep,
    pub methods: Vec<Method>,
    pub sim: SimConfig,
    pub out: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn preset(preset: Preset) -> Self {
        let base = ExperimentSpec {
            preset,
            metric: Metric::Outage,
            modes: GainMode::ALL.to_vec(),
            users: vec![2],
            relays: vec![2],
            lambdas: vec![1.0],
            xi: 1.45,
            a0: 1.0,
            eta: 1.0,
            c_gain: 1.0,
            gamma_th_db: 10.0,
            gamma_avg_db: GammaSweep {
                start_db: 0.0,
                step_db: 5.0,
                stop_db: 40.0,
            },
            methods: Method::ALL.to_vec(),
            sim: SimConfig::default(),
            out: None,
        };
        let outage_sim = SimConfig {
            trials: 10_000_000,
            ..base.sim
        };
        match preset {
            Preset::Custom => base,
            Preset::Fig1 => ExperimentSpec {
                users: vec![1, 2, 4],
                sim: outage_sim,
                ..base
            },
            Preset::Fig2 => ExperimentSpec {
                lambdas: lambdas_from_variances(&[0.5, 1.0, 2.0]),
                sim: outage_sim,
                ..base
            },
            Preset::Fig3 => ExperimentSpec {
                metric: Metric::Ber,
                relays: vec![1, 2, 3],
                ..base
            },
        }
    }

    /// Link parameters at one sweep point.
    pub fn link_params(&self, lambda: f64, gamma_avg_db: f64) -> LinkParams {
        let avg = db_to_linear(gamma_avg_db);
        LinkParams {
            gamma_bar_rf: avg,
            gamma_bar_fso: avg,
            lambda,
            a0: self.a0,
            xi: self.xi,
            eta: self.eta,
            c_gain: self.c_gain,
            gamma_th: db_to_linear(self.gamma_th_db),
        }
    }

    pub fn wants(&self, method: Method) -> bool {
        self.methods.contains(&method)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Turbulence variance 1/λ² to rate λ.
pub fn lambdas_from_variances(v: &[f64]) -> Vec<f64> {
    v.iter().map(|x| 1.0 / x.sqrt()).collect()
}

/// Where a setting came from, for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Line(usize),
    Flag,
    Combined,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Flag => f.write_str("command line"),
            Origin::Combined => f.write_str("configuration"),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{origin}: invalid `{key}`: {message}")]
    Invalid { origin: Origin, key: String, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A `key = value` setting and where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Setting {
    pub key: String,
    pub value: String,
    pub origin: Origin,
}

impl Setting {
    pub fn flag(key: &str, value: impl Into<String>) -> Self {
        Setting {
            key: key.to_string(),
            value: value.into(),
            origin: Origin::Flag,
        }
    }
}

/// Splits configuration text into settings. Only syntax is checked here.
pub fn parse_settings(text: &str) -> Result<Vec<Setting>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        if body.trim().is_empty() {
            continue;
        }
        let Some(eq) = body.find('=') else {
            let column = body.len() - body.trim_start().len() + 1;
            return Err(ConfigError::Parse {
                line,
                column,
                message: "expected `key = value`".into(),
            });
        };
        let key = body[..eq].trim();
        let value = body[eq + 1..].trim();
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(ConfigError::Parse {
                line,
                column: body.len() - body.trim_start().len() + 1,
                message: format!("bad key '{key}'"),
            });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                column: eq + 2,
                message: format!("missing value for `{key}`"),
            });
        }
        out.push(Setting {
            key: key.to_ascii_lowercase(),
            value: value.to_string(),
            origin: Origin::Line(line),
        });
    }
    Ok(out)
}

/// Parses and validates configuration text on top of its preset.
pub fn validate_config(text: &str) -> Result<ExperimentSpec, ConfigError> {
    build_spec(&parse_settings(text)?, &[])
}

/// Starts from the preset named by `overrides` or `settings` (custom if
/// neither), applies `settings` in order, then `overrides`, then checks the
/// combined spec.
pub fn build_spec(settings: &[Setting], overrides: &[Setting]) -> Result<ExperimentSpec, ConfigError> {
    let all: Vec<&Setting> = settings.iter().chain(overrides).collect();
    let mut preset = Preset::Custom;
    for s in all.iter().filter(|s| s.key == "preset") {
        preset = s.value.parse().map_err(|m| invalid(s, m))?;
    }
    let mut spec = ExperimentSpec::preset(preset);
    for s in all.iter().filter(|s| s.key != "preset") {
        apply(&mut spec, s)?;
    }
    check(&spec)?;
    Ok(spec)
}

fn invalid(s: &Setting, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        origin: s.origin,
        key: s.key.clone(),
        message: message.into(),
    }
}

fn list<T: FromStr>(s: &Setting) -> Result<Vec<T>, ConfigError>
where
    T::Err: fmt::Display,
{
    let items: Result<Vec<T>, _> = s
        .value
        .split(',')
        .map(str::trim)
        .map(|t| t.parse::<T>().map_err(|e| invalid(s, format!("'{t}': {e}"))))
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(invalid(s, "empty list"));
    }
    Ok(items)
}

fn one<T: FromStr>(s: &Setting) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    s.value.trim().parse::<T>().map_err(|e| invalid(s, format!("'{}': {e}", s.value)))
}

fn positive(s: &Setting) -> Result<f64, ConfigError> {
    let v: f64 = one(s)?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(s, "must be a positive number"))
    }
}

fn positive_list(s: &Setting) -> Result<Vec<f64>, ConfigError> {
    let v: Vec<f64> = list(s)?;
    if v.iter().all(|x| x.is_finite() && *x > 0.0) {
        Ok(v)
    } else {
        Err(invalid(s, "all values must be positive"))
    }
}

fn counts(s: &Setting) -> Result<Vec<u32>, ConfigError> {
    let v: Vec<u32> = list(s)?;
    if v.contains(&0) {
        return Err(invalid(s, "counts must be at least 1"));
    }
    Ok(v)
}

fn apply(spec: &mut ExperimentSpec, s: &Setting) -> Result<(), ConfigError> {
    match s.key.as_str() {
        "metric" => spec.metric = one(s)?,
        "mode" | "modes" => {
            spec.modes = if s.value.trim().eq_ignore_ascii_case("both") {
                GainMode::ALL.to_vec()
            } else {
                list::<GainMode>(s)?
            }
        }
        "users" => spec.users = counts(s)?,
        "relays" => spec.relays = counts(s)?,
        "lambda" => spec.lambdas = positive_list(s)?,
        "variance" => spec.lambdas = lambdas_from_variances(&positive_list(s)?),
        "xi" => {
            let xi = positive(s)?;
            check_xi(xi).map_err(|e| invalid(s, e.to_string()))?;
            spec.xi = xi;
        }
        "a0" => {
            let a0 = positive(s)?;
            if a0 > 1.0 {
                return Err(invalid(s, "A0 must not exceed 1"));
            }
            spec.a0 = a0;
        }
        "eta" => spec.eta = positive(s)?,
        "c_gain" | "c" => spec.c_gain = positive(s)?,
        "gamma_th_db" => {
            let v: f64 = one(s)?;
            if !v.is_finite() {
                return Err(invalid(s, "must be finite"));
            }
            spec.gamma_th_db = v;
        }
        "gamma_avg_db" => spec.gamma_avg_db = one(s)?,
        "methods" => {
            let mut m: Vec<Method> = if s.value.trim().eq_ignore_ascii_case("all") {
                Method::ALL.to_vec()
            } else {
                list(s)?
            };
            m.sort();
            m.dedup();
            spec.methods = m;
        }
        "trials" => {
            let t: u64 = one(s)?;
            if t < MIN_TRIALS {
                return Err(invalid(s, format!("must be at least {MIN_TRIALS}")));
            }
            spec.sim.trials = t;
        }
        "seed" => spec.sim.seed = one(s)?,
        "workers" => spec.sim.workers = one(s)?,
        "ber_model" => spec.sim.ber_model = one::<BerModel>(s)?,
        "level" => spec.sim.level = one::<SimLevel>(s)?,
        "combiner" => spec.sim.combiner = one::<Combiner>(s)?,
        "out" => spec.out = Some(PathBuf::from(s.value.trim())),
        other => return Err(invalid(s, format!("unknown key '{other}'"))),
    }
    Ok(())
}

/// Checks every sweep point against the link invariants.
fn check(spec: &ExperimentSpec) -> Result<(), ConfigError> {
    let fail = |key: &str, message: String| ConfigError::Invalid {
        origin: Origin::Combined,
        key: key.to_string(),
        message,
    };
    if spec.modes.is_empty() {
        return Err(fail("mode", "no gain mode selected".into()));
    }
    if spec.methods.is_empty() {
        return Err(fail("methods", "no method selected".into()));
    }
    for &lambda in &spec.lambdas {
        for db in spec.gamma_avg_db.values() {
            spec.link_params(lambda, db)
                .validate()
                .map_err(|e| fail("lambda", format!("at λ = {lambda}, γ_avg = {db} dB: {e}")))?;
        }
    }
    Ok(())
}
