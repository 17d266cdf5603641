//! Seeded random inputs for the property suites: polynomial metrics,
//! holomorphic and pluriharmonic functions, generic and PHWC maps, and random
//! expression trees.

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::MetricField;
use crate::jet::Expr;
use crate::maps::{compose, example1, example2, SmoothMap};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng, scale: f64) -> Complex64 {
    Complex64::new(
        rng.random_range(-scale..=scale),
        rng.random_range(-scale..=scale),
    )
}

/// Uniform point in `[lo, hi]^m`.
pub fn point(rng: &mut impl Rng, m: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..m).map(|_| rng.random_range(lo..=hi)).collect()
}

pub fn points(rng: &mut impl Rng, count: usize, m: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..count).map(|_| point(rng, m, lo, hi)).collect()
}

/// Random real polynomial of degree at most two in `m` variables whose
/// coefficients have absolute sum at most `bound`, so that `|p| <= bound` on
/// `[-1, 1]^m`.
pub fn bounded_quadratic(rng: &mut impl Rng, m: usize, bound: f64) -> Expr {
    let terms = rng.random_range(1..=3);
    let mut weights: Vec<f64> = (0..terms).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let total: f64 = weights.iter().map(|w| w.abs()).sum::<f64>().max(1e-3);
    for w in weights.iter_mut() {
        *w *= bound / total;
    }
    let mut p = Expr::real(0.0);
    for w in weights {
        let i = rng.random_range(0..m);
        let monomial = if rng.random_bool(0.5) {
            Expr::var(i)
        } else {
            Expr::var(i) * Expr::var(rng.random_range(0..m))
        };
        p = p + Expr::real(w) * monomial;
    }
    p
}

/// `e^{2 sigma} Id` with a small polynomial `sigma`.
pub fn conformal_metric(rng: &mut impl Rng, m: usize) -> MetricField {
    MetricField::conformal(m, bounded_quadratic(rng, m, 0.3))
}

/// Polynomial metric that is diagonally dominant, hence SPD, on `[-1, 1]^m`.
pub fn spd_metric(rng: &mut impl Rng, m: usize) -> MetricField {
    let off = 0.5 / m.max(2) as f64;
    let mut entries = Vec::with_capacity(m * m);
    for i in 0..m {
        for j in i..m {
            let e = if i == j {
                Expr::real(1.5) + bounded_quadratic(rng, m, 0.3)
            } else {
                bounded_quadratic(rng, m, off)
            };
            entries.push(((i, j), e));
        }
    }
    MetricField::from_upper(m, |i, j| {
        entries
            .iter()
            .find(|(k, _)| *k == (i, j))
            .map(|(_, e)| e.clone())
            .expect("every upper entry generated")
    })
}

/// `sum c * prod z_a^{e_a}` in the complex variables `z_a = x_{2a} + i x_{2a+1}`,
/// `a < k`, with total degree between 1 and `degree`.
pub fn holomorphic_polynomial(rng: &mut impl Rng, k: usize, degree: u32) -> Expr {
    let terms = rng.random_range(1..=3);
    let mut p = Expr::Const(complex(rng, 0.5));
    for _ in 0..terms {
        let mut monomial = Expr::Const(complex(rng, 1.0));
        let d = rng.random_range(1..=degree);
        for _ in 0..d {
            monomial = monomial * Expr::complex_coordinate(rng.random_range(0..k));
        }
        p = p + monomial;
    }
    p
}

/// Holomorphic polynomial map `C^k -> C^r`, as a map on `R^{2k}`.
pub fn holomorphic_map(rng: &mut impl Rng, k: usize, r: usize, degree: u32) -> SmoothMap {
    let components = (0..r)
        .map(|_| holomorphic_polynomial(rng, k, degree))
        .collect();
    SmoothMap::new(2 * k, components).expect("holomorphic polynomial uses chart variables")
}

/// `re P + c re Q` for holomorphic polynomials `P, Q` and real `c`.
pub fn pluriharmonic_function(rng: &mut impl Rng, k: usize) -> Expr {
    let c = rng.random_range(-2.0..=2.0);
    holomorphic_polynomial(rng, k, 3).re() + Expr::real(c) * holomorphic_polynomial(rng, k, 3).re()
}

/// Map `R^m -> C^n` with complex polynomial components of degree at most two.
pub fn generic_map(rng: &mut impl Rng, m: usize, n: usize) -> SmoothMap {
    let components = (0..n)
        .map(|_| {
            let mut e = Expr::Const(complex(rng, 0.5));
            for _ in 0..rng.random_range(1..=4) {
                let i = rng.random_range(0..m);
                let monomial = if rng.random_bool(0.5) {
                    Expr::var(i)
                } else {
                    Expr::var(i) * Expr::var(rng.random_range(0..m))
                };
                e = e + Expr::Const(complex(rng, 1.0)) * monomial;
            }
            e
        })
        .collect();
    SmoothMap::new(m, components).expect("polynomial in domain variables")
}

/// PHWC map on `R^m` (`m` even) with a metric it is PHWC for: a holomorphic
/// map in `x1 + i x2, x3 + i x4, ..` and a conformally flat metric.
pub fn phwc_pair(rng: &mut impl Rng, m: usize, n: usize) -> (SmoothMap, MetricField) {
    assert!(m % 2 == 0, "PHWC family needs an even-dimensional domain");
    (holomorphic_map(rng, m / 2, n, 3), conformal_metric(rng, m))
}

/// `psi o phi` for `phi` one of the two built-in examples and `psi` a random
/// holomorphic polynomial map of the target.
pub fn holomorphic_composite(rng: &mut impl Rng, base: usize) -> SmoothMap {
    let phi = if base == 1 { example1() } else { example2() };
    let r = rng.random_range(1..=3);
    let psi = holomorphic_map(rng, phi.cdim(), r, 3);
    compose(&psi, &phi)
        .expect("dimensions match by construction")
        .map
}

/// Random expression tree in `m` variables of depth at most `depth`, built
/// so that every denominator has modulus at least one and every exponent
/// argument stays bounded on bounded boxes.
pub fn expression<R: Rng>(rng: &mut R, m: usize, depth: u32) -> Expr {
    if depth == 0 || rng.random_bool(0.2) {
        return if rng.random_bool(0.75) {
            Expr::var(rng.random_range(0..m))
        } else {
            Expr::Const(complex(rng, 1.0))
        };
    }
    let sub = |rng: &mut R| expression(rng, m, depth - 1);
    let ops = [
        "add", "sub", "mul", "div", "neg", "pow", "sin", "cos", "exp", "conj", "re", "im",
    ];
    match *ops.choose(rng).expect("non-empty") {
        "add" => sub(rng) + sub(rng),
        "sub" => sub(rng) - sub(rng),
        "mul" => sub(rng) * sub(rng),
        "div" => sub(rng) / safe_denominator(sub(rng)),
        "neg" => -sub(rng),
        "pow" => {
            let n = *[2, 3, -1, -2].choose(rng).expect("non-empty");
            if n < 0 {
                safe_denominator(sub(rng)).powi(n)
            } else {
                sub(rng).powi(n)
            }
        }
        "sin" => sub(rng).sin(),
        "cos" => sub(rng).cos(),
        "exp" => (Expr::real(0.5) * sub(rng).sin()).exp(),
        "conj" => sub(rng).conj(),
        "re" => sub(rng).re(),
        _ => sub(rng).im(),
    }
}

/// `1 + re(b)^2 + im(b)^2`.
fn safe_denominator(b: Expr) -> Expr {
    Expr::real(1.0) + b.clone().re().powi(2) + b.im().powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{holomorphy_residual, phwc_residual_coord};

    #[test]
    fn generators_are_deterministic() {
        let a = expression(&mut rng(7), 3, 4);
        let b = expression(&mut rng(7), 3, 4);
        assert_eq!(a, b);
        assert_eq!(spd_metric(&mut rng(3), 4), spd_metric(&mut rng(3), 4));
    }

    #[test]
    fn spd_metrics_are_spd_on_the_box() {
        let mut r = rng(11);
        for _ in 0..50 {
            let g = spd_metric(&mut r, 4);
            let p = point(&mut r, 4, -1.0, 1.0);
            g.at(&p).unwrap();
        }
    }

    #[test]
    fn phwc_family_is_phwc() {
        let mut r = rng(5);
        for _ in 0..20 {
            let (phi, g) = phwc_pair(&mut r, 4, 2);
            let p = point(&mut r, 4, -1.0, 1.0);
            assert!(phwc_residual_coord(&phi, &g, &p).unwrap() < 1e-10);
            let psi = holomorphic_map(&mut r, 2, 2, 3);
            assert!(holomorphy_residual(&psi, &p).unwrap() < 1e-13);
        }
    }
}
