//! Check catalogue and the sampled sweep behind `check` and `sweep`.

use phwc::fstruct::{
    associated_f_structure, domega_12_residual, kernel_residual, met_residual, nijenhuis_residual,
    parallel_residual, plus_generators, round_trip, AssociatedField, DEFAULT_H_STEP,
    DEFAULT_RANK_TOL,
};
use phwc::maps::{
    differential, harmonic_residual, hwc_report, isotropy_residual, phwc_residual_commutator,
    phwc_residual_coord,
};
use phwc::{Error, Result};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::Manifest;
use crate::report::{Provenance, Record, Report};

/// Threshold for the Kaehler audit of raw target matrices.
pub const KAEHLER_GATE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CheckKind {
    Phwc,
    Isotropy,
    Commutator,
    Tension,
    Hwc,
    Kaehler,
    Fstructure,
    Roundtrip,
    Kernel,
    Nijenhuis,
    Parallel,
    Met,
    Domega12,
}

impl CheckKind {
    pub const ALL: [CheckKind; 13] = [
        CheckKind::Phwc,
        CheckKind::Isotropy,
        CheckKind::Commutator,
        CheckKind::Tension,
        CheckKind::Hwc,
        CheckKind::Kaehler,
        CheckKind::Fstructure,
        CheckKind::Roundtrip,
        CheckKind::Kernel,
        CheckKind::Nijenhuis,
        CheckKind::Parallel,
        CheckKind::Met,
        CheckKind::Domega12,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Phwc => "phwc",
            CheckKind::Isotropy => "isotropy",
            CheckKind::Commutator => "commutator",
            CheckKind::Tension => "tension",
            CheckKind::Hwc => "hwc",
            CheckKind::Kaehler => "kaehler",
            CheckKind::Fstructure => "fstructure",
            CheckKind::Roundtrip => "roundtrip",
            CheckKind::Kernel => "kernel",
            CheckKind::Nijenhuis => "nijenhuis",
            CheckKind::Parallel => "parallel",
            CheckKind::Met => "met",
            CheckKind::Domega12 => "domega12",
        }
    }

    pub fn from_name(name: &str) -> Option<CheckKind> {
        CheckKind::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn default_tol(self) -> f64 {
        match self {
            CheckKind::Hwc => 1e-8,
            CheckKind::Roundtrip => 1e-8,
            CheckKind::Nijenhuis | CheckKind::Parallel | CheckKind::Met | CheckKind::Domega12 => {
                1e-6
            }
            _ => 1e-10,
        }
    }

    fn needs_kaehler(self) -> bool {
        matches!(
            self,
            CheckKind::Tension | CheckKind::Commutator | CheckKind::Hwc
        )
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    #[default]
    Pass,
    /// The residual is expected to exceed the tolerance.
    Fail,
}

impl Expect {
    pub fn is_pass(&self) -> bool {
        *self == Expect::Pass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSpec {
    pub kind: CheckKind,
    pub tol: f64,
    pub expect: Expect,
    /// Expected f-structure rank (fstructure only).
    pub rank: Option<usize>,
}

impl CheckSpec {
    pub fn new(kind: CheckKind) -> CheckSpec {
        CheckSpec {
            kind,
            tol: kind.default_tol(),
            expect: Expect::Pass,
            rank: None,
        }
    }
}

/// Uniform samples in the manifest box, determined by `seed`.
pub fn sample_points(bounds: &[(f64, f64)], count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = phwc::families::rng(seed);
    (0..count)
        .map(|_| {
            bounds
                .iter()
                .map(|&(lo, hi)| {
                    if lo == hi {
                        lo
                    } else {
                        rng.random_range(lo..=hi)
                    }
                })
                .collect()
        })
        .collect()
}

fn kaehler_audit(m: &Manifest, p: &[f64]) -> Result<f64> {
    let dp = differential(&m.map, p)?;
    Ok(m.target.at(&dp.target_point())?.kaehler_residual())
}

fn evaluate(m: &Manifest, field: &AssociatedField, spec: &CheckSpec, p: &[f64]) -> Record {
    let (g, h, phi) = (&m.metric, &m.target, &m.map);
    let mut rank = None;
    let value = (|| -> Result<f64> {
        if m.kaehler_gate && spec.kind.needs_kaehler() {
            let r = kaehler_audit(m, p)?;
            if r > KAEHLER_GATE {
                return Err(Error::KaehlerClaimViolated {
                    residual: r,
                    point: p.to_vec(),
                });
            }
        }
        match spec.kind {
            CheckKind::Phwc => phwc_residual_coord(phi, g, p),
            CheckKind::Isotropy => isotropy_residual(phi, g, p),
            CheckKind::Commutator => phwc_residual_commutator(phi, g, h, p),
            CheckKind::Tension => harmonic_residual(phi, g, h, p),
            CheckKind::Hwc => Ok(hwc_report(phi, g, h, p)?.defect),
            CheckKind::Kaehler => kaehler_audit(m, p),
            CheckKind::Fstructure => {
                let fs = associated_f_structure(phi, g, p, DEFAULT_RANK_TOL)?;
                rank = Some(fs.rank);
                Ok(fs.algebra_residuals(&g.at(p)?.g).max())
            }
            CheckKind::Roundtrip => {
                let fs = associated_f_structure(phi, g, p, DEFAULT_RANK_TOL)?;
                let metric = g.at(p)?;
                let rt = round_trip(&fs, &metric.g, &plus_generators(phi, &metric, p)?);
                Ok(rt.isotropy.max(rt.angle_sine))
            }
            CheckKind::Kernel => {
                let fs = associated_f_structure(phi, g, p, DEFAULT_RANK_TOL)?;
                kernel_residual(phi, &fs, p)
            }
            CheckKind::Nijenhuis => nijenhuis_residual(field, p, DEFAULT_H_STEP),
            CheckKind::Parallel => parallel_residual(field, p, DEFAULT_H_STEP),
            CheckKind::Met => met_residual(field, p, DEFAULT_H_STEP),
            CheckKind::Domega12 => domega_12_residual(field, p, DEFAULT_H_STEP),
        }
    })();
    let mut rec = Record::judged(
        None,
        p.to_vec(),
        spec.kind.name(),
        value,
        spec.tol,
        spec.expect,
    );
    rec.rank = rank;
    if let (Some(want), Some(got)) = (spec.rank, rank) {
        rec.pass &= want == got;
    }
    rec
}

/// Evaluates every check at every sampled point. Points run in parallel;
/// records come out point-major in sample order.
pub fn run_checks(m: &Manifest, checks: &[CheckSpec], count: usize, seed: u64) -> Report {
    let points = sample_points(&m.sample.bounds, count, seed);
    let field = AssociatedField::new(m.map.clone(), m.metric.clone());
    let records: Vec<Record> = points
        .par_iter()
        .map(|p| {
            checks
                .iter()
                .map(|c| evaluate(m, &field, c, p))
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Report::new(
        Provenance {
            manifest_sha256: m.hash.clone(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        records,
    )
}
