//! `verify-paper`: both examples plus the randomized suites, folded into one
//! report.

use phwc::families::{self, point, points};
use phwc::fstruct::{
    associated_f_structure, forged_kaehler_case, plus_generators, round_trip, standard_cases,
    theorem_suite, SuiteConfig, DEFAULT_RANK_TOL,
};
use phwc::geometry::{laplace_beltrami_complex, HermitianMetricField, MetricField};
use phwc::jet::parse;
use phwc::maps::{
    compose, example1, harmonic_residual, hwc_report, isotropy_residual, phwc_residual_commutator,
    phwc_residual_coord, SmoothMap,
};
use rand::Rng;
use rayon::prelude::*;

use crate::checks::{run_checks, Expect};
use crate::manifest::{parse_manifest, sha256_hex};
use crate::report::{Provenance, Record, Report};
use crate::{BUILTIN_MANIFESTS, EXAMPLE1, EXAMPLE2};

/// Suite sizes.
const EQUIVALENCE_TRIPLES: usize = 200;
const COMPOSITES: usize = 20;
const PULLBACKS: usize = 20;
const POINTS_PER_MAP: usize = 50;
const ALGEBRA_MAPS: usize = 60;
const THEOREM_POINTS: usize = 5;

fn with_case(mut records: Vec<Record>, case: &str) -> Vec<Record> {
    for r in &mut records {
        r.case = Some(case.to_string());
        r.check = format!("{case}.{}", r.check);
    }
    records
}

fn examples(seed: u64) -> Vec<Record> {
    let mut out = Vec::new();
    for (name, text) in [("example1", EXAMPLE1), ("example2", EXAMPLE2)] {
        let m = parse_manifest(text).expect("builtin manifest is valid");
        let report = run_checks(&m, &m.checks, m.sample.count, seed);
        out.extend(with_case(report.records, name));
    }
    out
}

fn equivalence(seed: u64) -> Vec<Record> {
    let mut rng = families::rng(seed);
    let triples: Vec<_> = (0..EQUIVALENCE_TRIPLES)
        .map(|k| {
            let n = rng.random_range(1..=3);
            let (phi, g) = if k % 2 == 0 {
                let m = rng.random_range(2..=4);
                (
                    families::generic_map(&mut rng, m, n),
                    families::spd_metric(&mut rng, m),
                )
            } else {
                let m = [2, 4][rng.random_range(0..2)];
                families::phwc_pair(&mut rng, m, n)
            };
            let h = if rng.random_bool(0.5) {
                HermitianMetricField::flat(n)
            } else {
                HermitianMetricField::fubini_study(n)
            };
            let p = point(&mut rng, phi.dim(), -1.0, 1.0);
            (phi, g, h, p)
        })
        .collect();
    triples
        .par_iter()
        .enumerate()
        .map(|(k, (phi, g, h, p))| {
            let case = Some(format!("triple{k}"));
            let coord = phwc_residual_coord(phi, g, p);
            let iso = isotropy_residual(phi, g, p);
            let agree = match (&coord, &iso) {
                (Ok(a), Ok(b)) => Ok((a - b).abs()),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            };
            let expect = match coord {
                Ok(c) if c <= 1e-8 => Expect::Pass,
                _ => Expect::Fail,
            };
            vec![
                Record::judged(
                    case.clone(),
                    p.clone(),
                    "equivalence.coord_vs_isotropy",
                    agree,
                    1e-12,
                    Expect::Pass,
                ),
                Record::judged(
                    case,
                    p.clone(),
                    "equivalence.commutator",
                    phwc_residual_commutator(phi, g, h, p),
                    1e-8,
                    expect,
                ),
            ]
        })
        .flatten()
        .collect()
}

fn composition(seed: u64) -> Vec<Record> {
    let mut rng = families::rng(seed);
    let mut jobs = Vec::new();
    for base in [1, 2] {
        let m = if base == 1 { 2 } else { 4 };
        for k in 0..COMPOSITES {
            let phi = families::holomorphic_composite(&mut rng, base);
            let pts = points(&mut rng, POINTS_PER_MAP, m, -1.0, 1.0);
            jobs.push((format!("psi{k}.example{base}"), phi, pts, Expect::Pass));
        }
    }
    let psi = SmoothMap::new(
        6,
        ["(x1 + i*x2)^2", "(x3 + i*x4)*(x5 - i*x6)", "x5 + i*x6"]
            .iter()
            .map(|t| parse(t).expect("literal"))
            .collect(),
    )
    .expect("six real variables");
    let control = compose(&psi, &example1()).expect("dimensions match").map;
    jobs.push((
        "control.example1".into(),
        control,
        points(&mut rng, POINTS_PER_MAP, 2, 0.2, 1.0),
        Expect::Fail,
    ));

    jobs.par_iter()
        .map(|(case, phi, pts, expect)| {
            let g = MetricField::euclidean(phi.dim());
            let h = HermitianMetricField::flat(phi.cdim());
            let mut out = Vec::new();
            for p in pts {
                let c = Some(case.clone());
                if *expect == Expect::Fail {
                    let v = phwc_residual_coord(phi, &g, p);
                    out.push(Record::judged(
                        c,
                        p.clone(),
                        "composition.control_phwc",
                        v,
                        1e-3,
                        Expect::Fail,
                    ));
                    continue;
                }
                let v = phwc_residual_coord(phi, &g, p);
                out.push(Record::judged(
                    c.clone(),
                    p.clone(),
                    "composition.phwc",
                    v,
                    1e-10,
                    Expect::Pass,
                ));
                let t = harmonic_residual(phi, &g, &h, p);
                out.push(Record::judged(
                    c,
                    p.clone(),
                    "composition.tension",
                    t,
                    1e-9,
                    Expect::Pass,
                ));
            }
            out
        })
        .flatten()
        .collect()
}

fn pullback(seed: u64) -> Vec<Record> {
    let mut rng = families::rng(seed);
    let g = MetricField::euclidean(2);
    let flat = HermitianMetricField::flat(1);
    let mut jobs = Vec::new();
    for k in 0..PULLBACKS {
        let f = families::holomorphic_map(&mut rng, 3, 1, 3);
        jobs.push((format!("holomorphic{k}"), f, true));
    }
    for k in 0..PULLBACKS {
        let f = SmoothMap::new(6, vec![families::pluriharmonic_function(&mut rng, 3)])
            .expect("six real variables");
        jobs.push((format!("pluriharmonic{k}"), f, false));
    }
    let pts = points(&mut rng, POINTS_PER_MAP, 2, -1.0, 1.0);
    jobs.par_iter()
        .map(|(case, f, holomorphic)| {
            let pulled = compose(f, &example1()).expect("dimensions match").map;
            let kind = if *holomorphic {
                "holomorphic"
            } else {
                "pluriharmonic"
            };
            let mut out = Vec::new();
            for p in &pts {
                let c = Some(case.clone());
                let lap =
                    laplace_beltrami_complex(&pulled.components()[0], &g, p).map(|l| l.norm());
                out.push(Record::judged(
                    c.clone(),
                    p.clone(),
                    format!("pullback.{kind}.laplacian"),
                    lap,
                    1e-9,
                    Expect::Pass,
                ));
                if *holomorphic {
                    let d = hwc_report(&pulled, &g, &flat, p).map(|r| r.defect);
                    out.push(Record::judged(
                        c,
                        p.clone(),
                        "pullback.holomorphic.hwc",
                        d,
                        1e-9,
                        Expect::Pass,
                    ));
                }
            }
            out
        })
        .flatten()
        .collect()
}

fn algebra(seed: u64) -> Vec<Record> {
    let mut rng = families::rng(seed);
    let jobs: Vec<(SmoothMap, MetricField, Vec<f64>)> = (0..ALGEBRA_MAPS)
        .map(|k| {
            let (phi, g) = match k % 3 {
                0 | 1 => {
                    let n = rng.random_range(1..=3);
                    families::phwc_pair(&mut rng, if k % 3 == 0 { 2 } else { 4 }, n)
                }
                _ => {
                    let base = rng.random_range(1..=2);
                    let phi = families::holomorphic_composite(&mut rng, base);
                    let g = families::conformal_metric(&mut rng, phi.dim());
                    (phi, g)
                }
            };
            let p = point(&mut rng, phi.dim(), -1.0, 1.0);
            (phi, g, p)
        })
        .collect();
    jobs.par_iter()
        .enumerate()
        .map(|(k, (phi, g, p))| {
            let case = Some(format!("map{k}"));
            let fs = associated_f_structure(phi, g, p, DEFAULT_RANK_TOL);
            let metric = g.at(p);
            let (alg, rt) = match (fs, metric) {
                (Ok(fs), Ok(metric)) => {
                    let alg = fs.algebra_residuals(&metric.g).max();
                    let rt = plus_generators(phi, &metric, p).map(|gens| {
                        let rt = round_trip(&fs, &metric.g, &gens);
                        rt.isotropy.max(rt.angle_sine)
                    });
                    (Ok(alg), rt)
                }
                (Err(e), _) | (_, Err(e)) => (Err(e.clone()), Err(e)),
            };
            vec![
                Record::judged(
                    case.clone(),
                    p.clone(),
                    "fstructure.algebra",
                    alg,
                    1e-10,
                    Expect::Pass,
                ),
                Record::judged(
                    case,
                    p.clone(),
                    "fstructure.roundtrip",
                    rt,
                    1e-8,
                    Expect::Pass,
                ),
            ]
        })
        .flatten()
        .collect()
}

fn theorems(seed: u64) -> Vec<Record> {
    let cfg = SuiteConfig::default();
    let report = theorem_suite(&standard_cases(seed, THEOREM_POINTS), &cfg);
    let mut out: Vec<Record> = report
        .records
        .iter()
        .map(|r| {
            let hits = report
                .counterexamples
                .iter()
                .filter(|c| c.case == r.case && c.point_index == r.point_index)
                .count();
            let value = r.outcome.clone().map(|_| hits as f64);
            Record::judged(
                Some(r.case.clone()),
                r.point.clone(),
                "theorem.counterexamples",
                value,
                0.0,
                Expect::Pass,
            )
        })
        .collect();
    let pts = points(
        &mut families::rng(seed ^ 0xf0),
        THEOREM_POINTS,
        2,
        -1.0,
        1.0,
    );
    let forged = theorem_suite(&[forged_kaehler_case(pts)], &cfg);
    out.push(Record::judged(
        Some("forged-kaehler".into()),
        Vec::new(),
        "theorem.forged_control",
        Ok(forged.counterexamples.len() as f64),
        0.0,
        Expect::Fail,
    ));
    out
}

/// Runs every suite with seeds derived from `seed`. The manifest hash in the
/// provenance covers the builtin manifests.
pub fn verify_paper(seed: u64) -> Report {
    let mut records = examples(seed);
    records.extend(equivalence(seed.wrapping_add(1)));
    records.extend(composition(seed.wrapping_add(2)));
    records.extend(pullback(seed.wrapping_add(3)));
    records.extend(algebra(seed.wrapping_add(4)));
    records.extend(theorems(seed.wrapping_add(5)));
    let all: String = BUILTIN_MANIFESTS.iter().map(|(_, t)| *t).collect();
    Report::new(
        Provenance {
            manifest_sha256: sha256_hex(all.as_bytes()),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        records,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_sections_pass() {
        let recs = examples(7);
        assert_eq!(recs.len(), 100 * 3 + 100 * 6);
        assert!(
            recs.iter().all(|r| r.pass),
            "{:?}",
            recs.iter().find(|r| !r.pass)
        );
        assert!(recs
            .iter()
            .filter(|r| r.check == "example2.fstructure")
            .all(|r| r.rank == Some(2)));
    }

    #[test]
    fn theorem_section_has_a_failing_control_only_when_expected() {
        let recs = theorems(11);
        let control = recs.last().unwrap();
        assert!(control.pass && control.value.unwrap() >= 1.0);
        assert!(recs.iter().all(|r| r.pass));
    }
}
