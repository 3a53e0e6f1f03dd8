//! Sweep execution and the CSV result format.

use std::io::{Read, Write};
use std::path::Path;

use fsorelay_core::closed_form::{ber_closed, ber_quadrature, outage_closed_at, DEFAULT_N_MAX};
use fsorelay_core::composition::{outage_semianalytic_at, FirstSegment, GainMode, Topology};
use fsorelay_core::montecarlo::{simulate_ber, simulate_outage};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ExperimentSpec, Method, Metric, Preset};

pub const COLUMNS: [&str; 17] = [
    "preset",
    "mode",
    "metric",
    "n_users",
    "m_relays",
    "xi",
    "lambda",
    "gamma_th_db",
    "gamma_avg_db",
    "closed_form",
    "quadrature",
    "mc_mean",
    "mc_ci_low",
    "mc_ci_high",
    "mc_n",
    "seed",
    "error",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McColumns {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub preset: Preset,
    pub mode: GainMode,
    pub metric: Metric,
    pub n_users: u32,
    pub m_relays: u32,
    pub xi: f64,
    pub lambda: f64,
    pub gamma_th_db: f64,
    pub gamma_avg_db: f64,
    pub closed_form: Option<f64>,
    pub quadrature: Option<f64>,
    pub mc: Option<McColumns>,
    pub seed: u64,
    pub error: Option<String>,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot start worker pool: {0}")]
    Pool(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad CSV row {row}: {message}")]
    Row { row: usize, message: String },
}

/// Sweep points in output order: mode, users, relays, λ, then γ_avg.
fn points(spec: &ExperimentSpec) -> Vec<(GainMode, u32, u32, f64, f64)> {
    let mut out = Vec::new();
    for &mode in &spec.modes {
        for &n in &spec.users {
            for &m in &spec.relays {
                for &lambda in &spec.lambdas {
                    for db in spec.gamma_avg_db.values() {
                        out.push((mode, n, m, lambda, db));
                    }
                }
            }
        }
    }
    out
}

/// Runs every requested method at every sweep point. Method failures land
/// in the row's `error` field; the sweep always completes.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<CurvePoint>, RunError> {
    let run = || {
        points(spec)
            .into_par_iter()
            .map(|(mode, n, m, lambda, db)| evaluate(spec, mode, n, m, lambda, db))
            .collect::<Vec<_>>()
    };
    if spec.sim.workers == 0 {
        Ok(run())
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(spec.sim.workers)
            .build()
            .map_err(|e| RunError::Pool(e.to_string()))?;
        Ok(pool.install(run))
    }
}

fn evaluate(spec: &ExperimentSpec, mode: GainMode, n: u32, m: u32, lambda: f64, db: f64) -> CurvePoint {
    let params = spec.link_params(lambda, db);
    let mut errors = Vec::new();
    let mut row = CurvePoint {
        preset: spec.preset,
        mode,
        metric: spec.metric,
        n_users: n,
        m_relays: m,
        xi: spec.xi,
        lambda,
        gamma_th_db: spec.gamma_th_db,
        gamma_avg_db: db,
        closed_form: None,
        quadrature: None,
        mc: None,
        seed: spec.sim.seed,
        error: None,
    };
    let topology = match Topology::new(n, m, mode) {
        Ok(t) => t,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    let th = params.gamma_th;
    if spec.wants(Method::ClosedForm) {
        let r = match spec.metric {
            Metric::Outage => outage_closed_at(th, &topology, &params),
            Metric::Ber => ber_closed(&topology, &params, DEFAULT_N_MAX).map(|v| v.value),
        };
        match r {
            Ok(v) => row.closed_form = Some(v),
            Err(e) => errors.push(format!("closed-form: {e}")),
        }
    }
    if spec.wants(Method::Quadrature) {
        let curve = |g: f64| outage_semianalytic_at(g, &topology, &params, FirstSegment::Analysis);
        let r = match spec.metric {
            Metric::Outage => curve(th),
            Metric::Ber => ber_quadrature(curve).map(|v| v.value),
        };
        match r {
            Ok(v) => row.quadrature = Some(v),
            Err(e) => errors.push(format!("quadrature: {e}")),
        }
    }
    if spec.wants(Method::MonteCarlo) {
        let r = match spec.metric {
            Metric::Outage => simulate_outage(&topology, &params, &spec.sim),
            Metric::Ber => simulate_ber(&topology, &params, &spec.sim),
        };
        match r {
            Ok(e) => {
                row.mc = Some(McColumns {
                    mean: e.mean,
                    ci_low: e.ci_low,
                    ci_high: e.ci_high,
                    n: e.n,
                })
            }
            Err(e) => errors.push(format!("monte-carlo: {e}")),
        }
    }
    if !errors.is_empty() {
        row.error = Some(errors.join("; "));
    }
    row
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

fn record(p: &CurvePoint) -> Vec<String> {
    vec![
        p.preset.to_string(),
        p.mode.to_string(),
        p.metric.to_string(),
        p.n_users.to_string(),
        p.m_relays.to_string(),
        p.xi.to_string(),
        p.lambda.to_string(),
        p.gamma_th_db.to_string(),
        p.gamma_avg_db.to_string(),
        num(p.closed_form),
        num(p.quadrature),
        num(p.mc.map(|m| m.mean)),
        num(p.mc.map(|m| m.ci_low)),
        num(p.mc.map(|m| m.ci_high)),
        p.mc.map(|m| m.n.to_string()).unwrap_or_default(),
        p.seed.to_string(),
        p.error.clone().unwrap_or_default(),
    ]
}

pub fn write_csv<W: Write>(points: &[CurvePoint], writer: W) -> Result<(), RunError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    for p in points {
        w.write_record(record(p))?;
    }
    w.flush().map_err(|source| RunError::Io {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

pub fn to_csv_bytes(points: &[CurvePoint]) -> Result<Vec<u8>, RunError> {
    let mut buf = Vec::new();
    write_csv(points, &mut buf)?;
    Ok(buf)
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_csv_atomic(points: &[CurvePoint], path: &Path) -> Result<(), RunError> {
    let io = |source| RunError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(&to_csv_bytes(points)?).map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn read_csv<R: Read>(reader: R) -> Result<Vec<CurvePoint>, RunError> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(RunError::Row {
            row: 0,
            message: "unexpected header".into(),
        });
    }
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = i + 1;
        let bad = |message: String| RunError::Row { row, message };
        let field = |k: usize| rec.get(k).unwrap_or("");
        fn parse<T: std::str::FromStr>(s: &str, name: &str) -> Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            s.parse::<T>().map_err(|e| format!("{name}: {e}"))
        }
        let opt = |k: usize| -> Result<Option<f64>, String> {
            let s = field(k);
            if s.is_empty() {
                Ok(None)
            } else {
                parse::<f64>(s, COLUMNS[k]).map(Some)
            }
        };
        let point = (|| -> Result<CurvePoint, String> {
            let mc = match (opt(11)?, opt(12)?, opt(13)?, field(14)) {
                (Some(mean), Some(ci_low), Some(ci_high), n) => Some(McColumns {
                    mean,
                    ci_low,
                    ci_high,
                    n: parse(n, "mc_n")?,
                }),
                _ => None,
            };
            Ok(CurvePoint {
                preset: parse(field(0), "preset")?,
                mode: parse(field(1), "mode")?,
                metric: parse(field(2), "metric")?,
                n_users: parse(field(3), "n_users")?,
                m_relays: parse(field(4), "m_relays")?,
                xi: parse(field(5), "xi")?,
                lambda: parse(field(6), "lambda")?,
                gamma_th_db: parse(field(7), "gamma_th_db")?,
                gamma_avg_db: parse(field(8), "gamma_avg_db")?,
                closed_form: opt(9)?,
                quadrature: opt(10)?,
                mc,
                seed: parse(field(15), "seed")?,
                error: Some(field(16).to_string()).filter(|s| !s.is_empty()),
            })
        })()
        .map_err(bad)?;
        out.push(point);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    #[test]
    fn single_quadrature_point_gives_one_row() {
        let spec = validate_config("mode = fixed\ngamma_avg_db = 20\nmethods = quadrature\n").unwrap();
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert!(r.quadrature.is_some() && r.closed_form.is_none() && r.mc.is_none());
        assert_eq!(r.error, None);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let spec = validate_config("users = 1, 2\ngamma_avg_db = 0:20:40\ntrials = 2000\n").unwrap();
        let rows = run_experiment(&spec).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 3);
        let bytes = to_csv_bytes(&rows).unwrap();
        assert_eq!(read_csv(bytes.as_slice()).unwrap(), rows);
    }

    #[test]
    fn errors_are_recorded_per_row() {
        let mut row = CurvePoint {
            preset: Preset::Custom,
            mode: GainMode::FixedGain,
            metric: Metric::Ber,
            n_users: 1,
            m_relays: 1,
            xi: 1.45,
            lambda: 1.0,
            gamma_th_db: 10.0,
            gamma_avg_db: 0.0,
            closed_form: None,
            quadrature: Some(0.25),
            mc: None,
            seed: 7,
            error: Some("closed-form: did not converge, \"x\"".into()),
        };
        let back = read_csv(to_csv_bytes(std::slice::from_ref(&row)).unwrap().as_slice()).unwrap();
        assert_eq!(back[0], row);
        row.error = None;
        assert_eq!(read_csv(to_csv_bytes(&[row.clone()]).unwrap().as_slice()).unwrap()[0], row);
    }
}
