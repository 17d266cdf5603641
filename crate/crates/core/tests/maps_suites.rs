use num_complex::Complex64;
use phwc::families::{self, point, points};
use phwc::geometry::{laplace_beltrami_complex, HermitianMetricField, MetricField};
use phwc::jet::{eval_jet2, Expr};
use phwc::maps::{
    compose, differential, example1, example2, hwc_report, isotropy_residual,
    phwc_residual_commutator, phwc_residual_coord, tension, SmoothMap,
};
use rand::Rng;

struct Triple {
    phi: SmoothMap,
    g: MetricField,
    h: HermitianMetricField,
    p: Vec<f64>,
}

fn random_triples(seed: u64, count: usize) -> Vec<Triple> {
    let mut rng = families::rng(seed);
    (0..count)
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
            Triple { phi, g, h, p }
        })
        .collect()
}

#[test]
fn three_phwc_residuals_agree() {
    let mut phwc_count = 0;
    for t in random_triples(17, 200) {
        let coord = phwc_residual_coord(&t.phi, &t.g, &t.p).unwrap();
        let iso = isotropy_residual(&t.phi, &t.g, &t.p).unwrap();
        let comm = phwc_residual_commutator(&t.phi, &t.g, &t.h, &t.p).unwrap();
        assert!((coord - iso).abs() <= 1e-12, "{coord} {iso}");
        assert_eq!(coord <= 1e-8, comm <= 1e-8, "{coord} {comm}");
        phwc_count += usize::from(coord <= 1e-8);
    }
    assert_eq!(phwc_count, 100);
}

#[test]
fn hwc_implies_phwc_and_coincides_for_curves() {
    let mut rng = families::rng(23);
    let mut hwc_seen = 0;
    for k in 0..120 {
        let (phi, g) = match k % 3 {
            0 => families::phwc_pair(&mut rng, 2, 1),
            1 => families::phwc_pair(&mut rng, 4, 1),
            _ => {
                let m = rng.random_range(2..=4);
                (
                    families::generic_map(&mut rng, m, 1),
                    families::spd_metric(&mut rng, m),
                )
            }
        };
        let h = HermitianMetricField::flat(1);
        let p = point(&mut rng, phi.dim(), -1.0, 1.0);
        let defect = hwc_report(&phi, &g, &h, &p).unwrap().defect;
        let coord = phwc_residual_coord(&phi, &g, &p).unwrap();
        if defect <= 1e-10 {
            hwc_seen += 1;
            assert!(coord <= 1e-8);
            assert!(phwc_residual_commutator(&phi, &g, &h, &p).unwrap() <= 1e-8);
        }
        assert_eq!(coord <= 1e-10, defect <= 1e-8, "{coord:e} {defect:e}");
    }
    assert!(hwc_seen >= 40);
}

#[test]
fn holomorphic_functions_pull_back_to_harmonic_morphisms() {
    let mut rng = families::rng(31);
    let phi = example1();
    let g = MetricField::euclidean(2);
    let pts = points(&mut rng, 50, 2, -1.0, 1.0);
    for _ in 0..20 {
        let f = families::holomorphic_map(&mut rng, 3, 1, 3);
        let pulled = compose(&f, &phi).unwrap().map;
        let h = HermitianMetricField::flat(1);
        for p in &pts {
            let lap = laplace_beltrami_complex(&pulled.components()[0], &g, p).unwrap();
            assert!(lap.re.abs() + lap.im.abs() <= 1e-9);
            assert!(hwc_report(&pulled, &g, &h, p).unwrap().defect <= 1e-9);
        }
    }
}

#[test]
fn pluriharmonic_functions_pull_back_to_harmonic_functions() {
    let mut rng = families::rng(37);
    let pts = points(&mut rng, 50, 2, -1.0, 1.0);
    let g = MetricField::euclidean(2);
    for _ in 0..20 {
        let f = SmoothMap::new(6, vec![families::pluriharmonic_function(&mut rng, 3)]).unwrap();
        let pulled = compose(&f, &example1()).unwrap().map;
        for p in &pts {
            let lap = laplace_beltrami_complex(&pulled.components()[0], &g, p).unwrap();
            assert!(lap.norm() <= 1e-9);
        }
    }
}

#[test]
fn quadratic_witnesses_detect_non_phwc_maps() {
    // for a linear map, f = re(conj(P_ab) z_a z_b) pulls back to a function
    // with Laplacian 2 |P_ab|^2
    let mut rng = families::rng(41);
    let g = MetricField::euclidean(3);
    for _ in 0..20 {
        let components = (0..2)
            .map(|_| {
                (0..3).fold(Expr::real(0.0), |acc, i| {
                    acc + Expr::Const(families::complex(&mut rng, 1.0)) * Expr::var(i)
                })
            })
            .collect();
        let phi = SmoothMap::new(3, components).unwrap();
        let p = point(&mut rng, 3, -1.0, 1.0);
        let dp = differential(&phi, &p).unwrap();
        let pm = &dp.dphi * dp.dphi.transpose();
        let (mut a, mut b) = (0, 0);
        for i in 0..2 {
            for j in 0..2 {
                if pm[(i, j)].norm() > pm[(a, b)].norm() {
                    (a, b) = (i, j);
                }
            }
        }
        let f = (Expr::Const(pm[(a, b)].conj())
            * Expr::complex_coordinate(a)
            * Expr::complex_coordinate(b))
        .re();
        let pulled = compose(&SmoothMap::new(4, vec![f]).unwrap(), &phi)
            .unwrap()
            .map;
        let lap = laplace_beltrami_complex(&pulled.components()[0], &g, &p).unwrap();
        assert!((lap.re - 2.0 * pm[(a, b)].norm_sqr()).abs() < 1e-10);
        assert!(lap.re > 0.0);
    }
}

#[test]
fn holomorphic_composites_are_pseudo_harmonic_morphisms() {
    let mut rng = families::rng(43);
    for base in [1, 2] {
        let m = if base == 1 { 2 } else { 4 };
        let g = MetricField::euclidean(m);
        let pts = points(&mut rng, 50, m, -1.0, 1.0);
        for _ in 0..20 {
            let phi = families::holomorphic_composite(&mut rng, base);
            let h = HermitianMetricField::flat(phi.cdim());
            for p in &pts {
                assert!(phwc_residual_coord(&phi, &g, p).unwrap() <= 1e-10);
                assert!(tension(&phi, &g, &h, p).unwrap().harmonic_residual() <= 1e-9);
            }
        }
    }
}

#[test]
fn holomorphic_maps_into_fubini_study_are_harmonic() {
    // conformal surface domain, curved Kaehler target
    let mut rng = families::rng(47);
    for _ in 0..20 {
        let (phi, g) = families::phwc_pair(&mut rng, 2, 2);
        let h = HermitianMetricField::fubini_study(2);
        let p = point(&mut rng, 2, -1.0, 1.0);
        let t = tension(&phi, &g, &h, &p).unwrap();
        assert!(t.harmonic_residual() <= 1e-9, "{}", t.harmonic_residual());
    }
}

#[test]
fn chain_rule_for_the_laplacian() {
    // Lap(f o phi) = df(tau) + g^ij d_a d_b f d_i y^a d_j y^b, y = (re phi, im phi)
    let mut rng = families::rng(53);
    for _ in 0..50 {
        let m = rng.random_range(2..=3);
        let n = rng.random_range(1..=2);
        let phi = families::generic_map(&mut rng, m, n);
        let f = families::expression(&mut rng, 2 * n, 3).re();
        let g = MetricField::euclidean(m);
        let h = HermitianMetricField::flat(n);
        let p = point(&mut rng, m, -1.0, 1.0);
        let pulled = compose(&SmoothMap::new(2 * n, vec![f.clone()]).unwrap(), &phi)
            .unwrap()
            .map;
        let lhs = laplace_beltrami_complex(&pulled.components()[0], &g, &p)
            .unwrap()
            .re;
        let dp = differential(&phi, &p).unwrap();
        let y = dp.target_point();
        let fj = eval_jet2(&f, &y).unwrap();
        let tau = tension(&phi, &g, &h, &p).unwrap().real_vector();
        let dy = |a: usize, i: usize| -> f64 {
            let c: Complex64 = dp.dphi[(a / 2, i)];
            if a % 2 == 0 {
                c.re
            } else {
                c.im
            }
        };
        let mut rhs = 0.0;
        for a in 0..2 * n {
            rhs += fj.grad[a].re * tau[a];
            for b in 0..2 * n {
                for i in 0..m {
                    rhs += fj.hess(a, b).re * dy(a, i) * dy(b, i);
                }
            }
        }
        assert!(
            (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
            "{lhs} {rhs}"
        );
    }
}

#[test]
fn example_fixtures_over_sampled_points() {
    let mut rng = families::rng(59);
    for (phi, m, n) in [(example1(), 2, 3), (example2(), 4, 2)] {
        let g = MetricField::euclidean(m);
        let h = HermitianMetricField::flat(n);
        for p in points(&mut rng, 100, m, -3.0, 3.0) {
            assert!(phwc_residual_coord(&phi, &g, &p).unwrap() <= 1e-12);
            assert!(tension(&phi, &g, &h, &p).unwrap().harmonic_residual() <= 1e-12);
            assert!(hwc_report(&phi, &g, &h, &p).unwrap().defect >= 1.0);
        }
    }
}
