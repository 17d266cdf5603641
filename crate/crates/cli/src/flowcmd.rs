//! `flow`: runs the tension flow on a manifest's map sampled over the torus.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;

use phwc::flow::{run_flow, trigonometric_interpolant, write_snapshot, FlowResult, GridMap};
use phwc::maps::harmonic_residual;
use rayon::prelude::*;

use crate::checks::{sample_points, Expect};
use crate::error::{CliError, CliResult};
use crate::manifest::Manifest;
use crate::report::{Provenance, Record, Report};

/// Fourier coefficients below this are left out of the interpolant.
const DROP_TOL: f64 = 1e-13;

pub struct FlowRun {
    pub report: Report,
    pub result: FlowResult,
}

/// Flows `m.map` sampled on `flow.dims` and reports energy monotonicity,
/// convergence and the harmonicity of the interpolated limit at `count`
/// seeded points of the torus.
pub fn flow_manifest(
    m: &Manifest,
    count: usize,
    seed: u64,
    snapshot: Option<&str>,
) -> CliResult<FlowRun> {
    let spec = m
        .flow
        .as_ref()
        .ok_or_else(|| CliError::validation("flow", "manifest has no flow block"))?;
    let u0 = GridMap::sample(&m.map, spec.dims.clone())?;
    let result = run_flow(&u0, &m.target, &spec.config)?;
    let cfg = spec.config;

    let rise = result
        .trace
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(0.0, f64::max);
    let last = result.trace.last().expect("trace holds the initial state");
    let mut records = vec![
        Record::judged(
            None,
            Vec::new(),
            "flow.energy_monotone",
            Ok(rise),
            1e-12,
            Expect::Pass,
        ),
        Record::judged(
            None,
            Vec::new(),
            "flow.converged",
            Ok(last.max_tension),
            cfg.stop_tol,
            Expect::Pass,
        ),
    ];
    let limit = trigonometric_interpolant(&result.map, DROP_TOL);
    let torus = vec![(0.0, TAU); m.dim()];
    let g = &m.metric;
    records.extend(
        sample_points(&torus, count, seed)
            .into_par_iter()
            .map(|p| {
                let r = harmonic_residual(&limit, g, &m.target, &p);
                Record::judged(
                    None,
                    p,
                    "flow.harmonic",
                    r,
                    10.0 * cfg.stop_tol,
                    Expect::Pass,
                )
            })
            .collect::<Vec<_>>(),
    );

    if let Some(path) = snapshot.or(spec.snapshot.as_deref()) {
        write_snapshot(&result.map, BufWriter::new(File::create(path)?))?;
    }
    Ok(FlowRun {
        report: Report::new(
            Provenance {
                manifest_sha256: m.hash.clone(),
                seed,
                version: env!("CARGO_PKG_VERSION").to_string(),
            },
            records,
        ),
        result,
    })
}
