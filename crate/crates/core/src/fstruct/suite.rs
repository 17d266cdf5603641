//! Implication harness: parallel or (integrable, met, d omega^{1,2} = 0)
//! f-structures must come with harmonic maps.

use rayon::prelude::*;

use super::{
    domega_12_residual, met_residual, nijenhuis_residual, parallel_residual, AssociatedField,
    DEFAULT_H_STEP, DEFAULT_RANK_TOL, PHWC_GATE,
};
use crate::error::{Error, Result};
use crate::families;
use crate::geometry::{HermitianMetricField, MetricField};
use crate::jet::{parse, Expr};
use crate::maps::{example1, example2, harmonic_residual, phwc_residual_coord, SmoothMap};

/// One map with its metrics and sample points.
#[derive(Debug, Clone)]
pub struct SuiteCase {
    pub name: String,
    pub phi: SmoothMap,
    pub g: MetricField,
    pub h: HermitianMetricField,
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    /// Threshold below which a structural residual counts as zero.
    pub eps: f64,
    /// Threshold above which the tension counts as nonzero.
    pub delta: f64,
    pub rank_tol: f64,
    pub h_step: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            eps: 1e-8,
            delta: 1e-6,
            rank_tol: DEFAULT_RANK_TOL,
            h_step: DEFAULT_H_STEP,
        }
    }
}

/// All residuals evaluated at one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub phwc: f64,
    pub parallel: f64,
    pub nijenhuis: f64,
    pub met: f64,
    pub domega_12: f64,
    pub harmonic: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRecord {
    pub case: String,
    pub point_index: usize,
    pub point: Vec<f64>,
    /// `Err` for skipped samples (PHWC gate, rank problems, metric errors).
    pub outcome: Result<Diagnostics>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub case: String,
    pub point_index: usize,
    pub point: Vec<f64>,
    /// `"parallel"` or `"integrable+met+domega12"`.
    pub implication: &'static str,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub records: Vec<SuiteRecord>,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteReport {
    pub fn skipped(&self) -> usize {
        self.records.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn evaluated(&self) -> usize {
        self.records.len() - self.skipped()
    }
}

fn diagnose(case: &SuiteCase, p: &[f64], cfg: &SuiteConfig) -> Result<Diagnostics> {
    let phwc = phwc_residual_coord(&case.phi, &case.g, p)?;
    if phwc > PHWC_GATE {
        return Err(Error::NotPhwcAtPoint { residual: phwc });
    }
    let field = AssociatedField {
        phi: case.phi.clone(),
        g: case.g.clone(),
        rank_tol: cfg.rank_tol,
    };
    Ok(Diagnostics {
        phwc,
        parallel: parallel_residual(&field, p, cfg.h_step)?,
        nijenhuis: nijenhuis_residual(&field, p, cfg.h_step)?,
        met: met_residual(&field, p, cfg.h_step)?,
        domega_12: domega_12_residual(&field, p, cfg.h_step)?,
        harmonic: harmonic_residual(&case.phi, &case.g, &case.h, p)?,
    })
}

/// Evaluates every case at every point (in parallel) and collects the
/// samples where a hypothesis holds but the map is not harmonic. Records
/// keep case and point order.
pub fn theorem_suite(cases: &[SuiteCase], cfg: &SuiteConfig) -> SuiteReport {
    let jobs: Vec<(usize, usize)> = cases
        .iter()
        .enumerate()
        .flat_map(|(c, case)| (0..case.points.len()).map(move |k| (c, k)))
        .collect();
    let records: Vec<SuiteRecord> = jobs
        .par_iter()
        .map(|&(c, k)| {
            let case = &cases[c];
            SuiteRecord {
                case: case.name.clone(),
                point_index: k,
                point: case.points[k].clone(),
                outcome: diagnose(case, &case.points[k], cfg),
            }
        })
        .collect();
    let mut counterexamples = Vec::new();
    for r in &records {
        let Ok(d) = r.outcome else { continue };
        if d.harmonic <= cfg.delta {
            continue;
        }
        let mut push = |implication| {
            counterexamples.push(Counterexample {
                case: r.case.clone(),
                point_index: r.point_index,
                point: r.point.clone(),
                implication,
                diagnostics: d,
            })
        };
        if d.parallel <= cfg.eps {
            push("parallel");
        }
        if d.nijenhuis <= cfg.eps && d.met <= cfg.eps && d.domega_12 <= cfg.eps {
            push("integrable+met+domega12");
        }
    }
    SuiteReport {
        records,
        counterexamples,
    }
}

fn sampled_case(
    name: String,
    phi: SmoothMap,
    g: MetricField,
    h: HermitianMetricField,
    seed: u64,
    count: usize,
) -> SuiteCase {
    let m = phi.dim();
    SuiteCase {
        name,
        phi,
        g,
        h,
        points: families::points(&mut families::rng(seed), count, m, -1.0, 1.0),
    }
}

/// The two examples, 20 holomorphic composites with them (flat target) and
/// 5 holomorphic maps of a conformal plane into Fubini-Study `CP^2`, each
/// with `points` seeded samples in `[-1, 1]^m`.
pub fn standard_cases(seed: u64, points: usize) -> Vec<SuiteCase> {
    let mut rng = families::rng(seed);
    let mut cases = vec![
        sampled_case(
            "example1".into(),
            example1(),
            MetricField::euclidean(2),
            HermitianMetricField::flat(3),
            seed ^ 1,
            points,
        ),
        sampled_case(
            "example2".into(),
            example2(),
            MetricField::euclidean(4),
            HermitianMetricField::flat(2),
            seed ^ 2,
            points,
        ),
    ];
    for k in 0..20u64 {
        let phi = families::holomorphic_composite(&mut rng, 1 + (k as usize) % 2);
        let (m, n) = (phi.dim(), phi.cdim());
        cases.push(sampled_case(
            format!("composite{k}"),
            phi,
            MetricField::euclidean(m),
            HermitianMetricField::flat(n),
            seed.wrapping_add(100 + k),
            points,
        ));
    }
    for k in 0..5u64 {
        let (phi, g) = families::phwc_pair(&mut rng, 2, 2);
        cases.push(sampled_case(
            format!("fubini{k}"),
            phi,
            g,
            HermitianMetricField::fubini_study(2),
            seed.wrapping_add(200 + k),
            points,
        ));
    }
    cases
}

/// Example 1 into `C^3` with `h_{1 1bar} = 1 + re z2`, which is not Kaehler
/// but claims to be. Its mixed connection symbols make the map non-harmonic
/// while its f-structure stays parallel.
pub fn forged_kaehler_case(points: Vec<Vec<f64>>) -> SuiteCase {
    let one = || Expr::real(1.0);
    let zero = || Expr::real(0.0);
    let h = HermitianMetricField::new(
        vec![
            vec![parse("1 + x3").expect("literal"), zero(), zero()],
            vec![zero(), one(), zero()],
            vec![zero(), zero(), one()],
        ],
        false,
    )
    .expect("hermitian by construction")
    .with_kaehler_claim(true);
    SuiteCase {
        name: "forged-kaehler".into(),
        phi: example1(),
        g: MetricField::euclidean(2),
        h,
        points,
    }
}
