//! Manifest files: JSON descriptions of a domain metric, a Hermitian target,
//! a map and the checks to run on it.
//!
//! ```json
//! {
//!   "name": "example1",
//!   "domain": { "dim": 2, "metric": "euclidean" },
//!   "target": { "cdim": 3, "hermitian": "flat", "kaehler": true },
//!   "map": { "components": ["3*(x1 + i*x2)", "..."] },
//!   "checks": ["phwc", "tension", { "name": "hwc", "expect": "fail" }],
//!   "sample": { "count": 100, "seed": 1, "box": [[-1, 1], [-1, 1]] }
//! }
//! ```
//!
//! Domain metrics are `"euclidean"`, `{"conformal": sigma}` or a full matrix
//! of expressions. Targets are `"flat"`, `"fubini_study"`, `{"potential": K}`
//! or a full matrix of `h_{a bbar}` expressions. An optional `flow` block
//! holds `dims`, `dt`, `max_steps`, `stop_tol`, `energy_backtrack` and
//! `snapshot`.

use std::fmt::Write as _;

use phwc::flow::FlowConfig;
use phwc::geometry::{HermitianMetricField, MetricField};
use phwc::jet::{parse, Expr};
use phwc::maps::SmoothMap;
use phwc::Error;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::checks::{CheckKind, CheckSpec, Expect};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub struct Manifest {
    pub name: String,
    pub metric: MetricField,
    pub target: HermitianMetricField,
    /// Target entered as a raw matrix with the Kaehler flag set, so the
    /// claim is audited at every sample.
    pub kaehler_gate: bool,
    pub map: SmoothMap,
    pub checks: Vec<CheckSpec>,
    pub sample: Sample,
    pub flow: Option<FlowSpec>,
    /// Hex SHA-256 of the manifest text.
    pub hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub count: usize,
    pub seed: Option<u64>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSpec {
    pub dims: Vec<usize>,
    pub config: FlowConfig,
    pub snapshot: Option<String>,
}

impl Manifest {
    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    pub fn cdim(&self) -> usize {
        self.map.cdim()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn parse_manifest(text: &str) -> CliResult<Manifest> {
    let root: Value = serde_json::from_str(text).map_err(|e| CliError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let top = object(&root, "manifest")?;
    known_keys(
        top,
        "manifest",
        &[
            "name", "domain", "target", "map", "checks", "sample", "flow",
        ],
    )?;
    let name = match top.get("name") {
        Some(v) => string(v, "name")?.to_string(),
        None => "manifest".to_string(),
    };

    let domain = object(required(top, "domain", "manifest")?, "domain")?;
    known_keys(domain, "domain", &["dim", "metric"])?;
    let dim = positive(required(domain, "dim", "domain")?, "domain.dim")?;
    let metric = domain_metric(domain.get("metric"), dim)?;

    let target = object(required(top, "target", "manifest")?, "target")?;
    known_keys(target, "target", &["cdim", "hermitian", "kaehler"])?;
    let cdim = positive(required(target, "cdim", "target")?, "target.cdim")?;
    let kaehler = match target.get("kaehler") {
        Some(v) => v
            .as_bool()
            .ok_or_else(|| CliError::validation("target.kaehler", "expected true or false"))?,
        None => true,
    };
    let (hermitian, kaehler_gate) = target_metric(target.get("hermitian"), cdim, kaehler)?;

    let map = object(required(top, "map", "manifest")?, "map")?;
    known_keys(map, "map", &["components"])?;
    let comps = array(required(map, "components", "map")?, "map.components")?;
    if comps.len() != cdim {
        return Err(CliError::validation(
            "map.components",
            format!(
                "target.cdim is {cdim} but {} components are given",
                comps.len()
            ),
        ));
    }
    let components = comps
        .iter()
        .enumerate()
        .map(|(a, v)| expression(v, &format!("map.components[{a}]"), dim))
        .collect::<CliResult<Vec<_>>>()?;
    let map =
        SmoothMap::new(dim, components).map_err(|e| CliError::validation("map", e.to_string()))?;

    let checks = match top.get("checks") {
        Some(v) => array(v, "checks")?
            .iter()
            .enumerate()
            .map(|(k, c)| check(c, &format!("checks[{k}]")))
            .collect::<CliResult<Vec<_>>>()?,
        None => Vec::new(),
    };

    let sample = match top.get("sample") {
        Some(v) => sample(v, dim)?,
        None => Sample {
            count: 0,
            seed: None,
            bounds: vec![(-1.0, 1.0); dim],
        },
    };

    let flow = top.get("flow").map(|v| flow(v, dim)).transpose()?;

    Ok(Manifest {
        name,
        metric,
        target: hermitian,
        kaehler_gate,
        map,
        checks,
        sample,
        flow,
        hash: sha256_hex(text.as_bytes()),
    })
}

fn object<'a>(v: &'a Value, path: &str) -> CliResult<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| CliError::validation(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> CliResult<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| CliError::validation(path, "expected an array"))
}

fn string<'a>(v: &'a Value, path: &str) -> CliResult<&'a str> {
    v.as_str()
        .ok_or_else(|| CliError::validation(path, "expected a string"))
}

fn number(v: &Value, path: &str) -> CliResult<f64> {
    v.as_f64()
        .ok_or_else(|| CliError::validation(path, "expected a number"))
}

fn positive(v: &Value, path: &str) -> CliResult<usize> {
    match v.as_u64() {
        Some(n) if n > 0 => Ok(n as usize),
        _ => Err(CliError::validation(path, "expected a positive integer")),
    }
}

fn required<'a>(m: &'a Map<String, Value>, key: &str, path: &str) -> CliResult<&'a Value> {
    m.get(key)
        .ok_or_else(|| CliError::validation(join(path, key), "missing required field"))
}

fn join(path: &str, key: &str) -> String {
    if path == "manifest" {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn known_keys(m: &Map<String, Value>, path: &str, keys: &[&str]) -> CliResult<()> {
    for k in m.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(CliError::validation(
                join(path, k),
                format!("unknown field (expected one of: {})", keys.join(", ")),
            ));
        }
    }
    Ok(())
}

/// A string expression or a bare number, in at most `arity` variables.
fn expression(v: &Value, path: &str, arity: usize) -> CliResult<Expr> {
    let e = match v {
        Value::Number(n) => Expr::real(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => parse(s).map_err(|e| match e {
            Error::Parse { column, message } => CliError::Expression {
                path: path.to_string(),
                column,
                message,
            },
            other => CliError::validation(path, other.to_string()),
        })?,
        _ => return Err(CliError::validation(path, "expected an expression string")),
    };
    if e.arity() > arity {
        return Err(CliError::validation(
            path,
            format!(
                "uses x{} but only {arity} variables are available",
                e.arity()
            ),
        ));
    }
    Ok(e)
}

fn matrix(v: &Value, path: &str, n: usize, arity: usize) -> CliResult<Vec<Vec<Expr>>> {
    let rows = array(v, path)?;
    if rows.len() != n {
        return Err(CliError::validation(
            path,
            format!("expected {n} rows, found {}", rows.len()),
        ));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let rp = format!("{path}[{i}]");
            let row = array(row, &rp)?;
            if row.len() != n {
                return Err(CliError::validation(
                    &rp,
                    format!("expected {n} entries, found {}", row.len()),
                ));
            }
            row.iter()
                .enumerate()
                .map(|(j, e)| expression(e, &format!("{rp}[{j}]"), arity))
                .collect()
        })
        .collect()
}

fn domain_metric(v: Option<&Value>, dim: usize) -> CliResult<MetricField> {
    let path = "domain.metric";
    match v {
        None => Ok(MetricField::euclidean(dim)),
        Some(Value::String(s)) if s == "euclidean" => Ok(MetricField::euclidean(dim)),
        Some(Value::String(s)) => Err(CliError::validation(
            path,
            format!("unknown builtin metric '{s}' (expected: euclidean)"),
        )),
        Some(Value::Object(m)) => {
            known_keys(m, path, &["conformal"])?;
            let sigma = expression(
                required(m, "conformal", path)?,
                "domain.metric.conformal",
                dim,
            )?;
            Ok(MetricField::conformal(dim, sigma))
        }
        Some(v @ Value::Array(_)) => {
            let rows = matrix(v, path, dim, dim)?;
            MetricField::new(rows).map_err(|e| CliError::validation(path, e.to_string()))
        }
        Some(_) => Err(CliError::validation(
            path,
            "expected a builtin name, object or matrix",
        )),
    }
}

fn target_metric(
    v: Option<&Value>,
    cdim: usize,
    kaehler: bool,
) -> CliResult<(HermitianMetricField, bool)> {
    let path = "target.hermitian";
    let builtin = |h: HermitianMetricField| Ok((h.with_kaehler_claim(kaehler), false));
    match v {
        None => builtin(HermitianMetricField::flat(cdim)),
        Some(Value::String(s)) => match s.as_str() {
            "flat" => builtin(HermitianMetricField::flat(cdim)),
            "fubini_study" => builtin(HermitianMetricField::fubini_study(cdim)),
            _ => Err(CliError::validation(
                path,
                format!("unknown builtin metric '{s}' (expected one of: flat, fubini_study)"),
            )),
        },
        Some(Value::Object(m)) => {
            known_keys(m, path, &["potential"])?;
            let k = expression(
                required(m, "potential", path)?,
                "target.hermitian.potential",
                2 * cdim,
            )?;
            builtin(HermitianMetricField::from_potential(cdim, &k))
        }
        Some(v @ Value::Array(_)) => {
            let rows = matrix(v, path, cdim, 2 * cdim)?;
            let h = HermitianMetricField::new(rows, kaehler)
                .map_err(|e| CliError::validation(path, e.to_string()))?;
            Ok((h, kaehler))
        }
        Some(_) => Err(CliError::validation(
            path,
            "expected a builtin name, object or matrix",
        )),
    }
}

fn check(v: &Value, path: &str) -> CliResult<CheckSpec> {
    let kind = |name: &str| {
        CheckKind::from_name(name).ok_or_else(|| {
            let mut valid = String::new();
            for (k, c) in CheckKind::ALL.iter().enumerate() {
                let _ = write!(valid, "{}{}", if k == 0 { "" } else { ", " }, c.name());
            }
            CliError::validation(
                path,
                format!("unknown check '{name}' (valid checks: {valid})"),
            )
        })
    };
    match v {
        Value::String(s) => Ok(CheckSpec::new(kind(s)?)),
        Value::Object(m) => {
            known_keys(m, path, &["name", "tol", "expect", "rank"])?;
            let mut spec = CheckSpec::new(kind(string(
                required(m, "name", path)?,
                &join(path, "name"),
            )?)?);
            if let Some(t) = m.get("tol") {
                let tol = number(t, &join(path, "tol"))?;
                if !(tol >= 0.0) {
                    return Err(CliError::validation(
                        join(path, "tol"),
                        "must be non-negative",
                    ));
                }
                spec.tol = tol;
            }
            if let Some(e) = m.get("expect") {
                spec.expect = match string(e, &join(path, "expect"))? {
                    "pass" => Expect::Pass,
                    "fail" => Expect::Fail,
                    other => {
                        return Err(CliError::validation(
                            join(path, "expect"),
                            format!("expected \"pass\" or \"fail\", found \"{other}\""),
                        ))
                    }
                };
            }
            if let Some(r) = m.get("rank") {
                if spec.kind != CheckKind::Fstructure {
                    return Err(CliError::validation(
                        join(path, "rank"),
                        "only the fstructure check takes an expected rank",
                    ));
                }
                spec.rank = Some(r.as_u64().ok_or_else(|| {
                    CliError::validation(join(path, "rank"), "expected an integer")
                })? as usize);
            }
            Ok(spec)
        }
        _ => Err(CliError::validation(
            path,
            "expected a check name or object",
        )),
    }
}

fn sample(v: &Value, dim: usize) -> CliResult<Sample> {
    let m = object(v, "sample")?;
    known_keys(m, "sample", &["count", "seed", "box"])?;
    let count = match m.get("count") {
        Some(c) => c.as_u64().ok_or_else(|| {
            CliError::validation("sample.count", "expected a non-negative integer")
        })? as usize,
        None => 0,
    };
    let seed = match m.get("seed") {
        Some(s) => Some(s.as_u64().ok_or_else(|| {
            CliError::validation("sample.seed", "expected a non-negative integer")
        })?),
        None => None,
    };
    if count > 0 && seed.is_none() {
        return Err(CliError::validation(
            "sample.seed",
            "a seed is required when count > 0",
        ));
    }
    let bounds = match m.get("box") {
        None => vec![(-1.0, 1.0); dim],
        Some(b) => {
            let axes = array(b, "sample.box")?;
            if axes.len() != dim {
                return Err(CliError::validation(
                    "sample.box",
                    format!("domain.dim is {dim} but {} intervals are given", axes.len()),
                ));
            }
            axes.iter()
                .enumerate()
                .map(|(k, iv)| {
                    let p = format!("sample.box[{k}]");
                    let iv = array(iv, &p)?;
                    if iv.len() != 2 {
                        return Err(CliError::validation(&p, "expected [lo, hi]"));
                    }
                    let (lo, hi) = (number(&iv[0], &p)?, number(&iv[1], &p)?);
                    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                        return Err(CliError::validation(&p, "expected finite lo <= hi"));
                    }
                    Ok((lo, hi))
                })
                .collect::<CliResult<Vec<_>>>()?
        }
    };
    Ok(Sample {
        count,
        seed,
        bounds,
    })
}

fn flow(v: &Value, dim: usize) -> CliResult<FlowSpec> {
    let m = object(v, "flow")?;
    known_keys(
        m,
        "flow",
        &[
            "dims",
            "dt",
            "max_steps",
            "stop_tol",
            "energy_backtrack",
            "snapshot",
        ],
    )?;
    let dims = array(required(m, "dims", "flow")?, "flow.dims")?
        .iter()
        .enumerate()
        .map(|(k, d)| positive(d, &format!("flow.dims[{k}]")))
        .collect::<CliResult<Vec<_>>>()?;
    if dims.len() != dim {
        return Err(CliError::validation(
            "flow.dims",
            format!("domain.dim is {dim} but {} axes are given", dims.len()),
        ));
    }
    let mut config = FlowConfig::default();
    if let Some(x) = m.get("dt") {
        config.dt = number(x, "flow.dt")?;
    }
    if let Some(x) = m.get("max_steps") {
        config.max_steps = x
            .as_u64()
            .ok_or_else(|| CliError::validation("flow.max_steps", "expected an integer"))?
            as usize;
    }
    if let Some(x) = m.get("stop_tol") {
        config.stop_tol = number(x, "flow.stop_tol")?;
    }
    if let Some(x) = m.get("energy_backtrack") {
        config.energy_backtrack = x.as_bool().ok_or_else(|| {
            CliError::validation("flow.energy_backtrack", "expected true or false")
        })?;
    }
    let snapshot = m
        .get("snapshot")
        .map(|s| string(s, "flow.snapshot").map(str::to_string))
        .transpose()?;
    Ok(FlowSpec {
        dims,
        config,
        snapshot,
    })
}
