use num_complex::Complex64;

use super::check_dim;
use crate::error::{Error, Result};
use crate::jet::{eval_jet2, Expr, Jet2};
use crate::linalg::{hpd_inverse, CMat};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `d/dz^a = 1/2 (d/dx_{2a} - i d/dx_{2a+1})` applied to a jet.
pub fn wirtinger_dz(jet: &Jet2, a: usize) -> Complex64 {
    0.5 * (jet.grad[2 * a] - Complex64::i() * jet.grad[2 * a + 1])
}

/// `d/dzbar^a = 1/2 (d/dx_{2a} + i d/dx_{2a+1})` applied to a jet.
pub fn wirtinger_dzbar(jet: &Jet2, a: usize) -> Complex64 {
    0.5 * (jet.grad[2 * a] + Complex64::i() * jet.grad[2 * a + 1])
}

/// `d^2 / dz^a dzbar^b`.
pub fn wirtinger_dz_dzbar(jet: &Jet2, a: usize, b: usize) -> Complex64 {
    let i = Complex64::i();
    let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
    0.25 * (jet.hess(xa, xb) + i * jet.hess(xa, yb) - i * jet.hess(ya, xb) + jet.hess(ya, yb))
}

/// Hermitian metric `h_{a bbar}(z)` on a chart of `C^n`.
///
/// `kaehler` is a claim made by whoever built the field; it gates the
/// operations that need a Kaehler target and can be audited with
/// [`HermitianMetricField::verify_kaehler`]. The flat metric `Id` is the
/// Euclidean metric of `R^{2n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMetricField {
    cdim: usize,
    components: Vec<Expr>,
    kaehler: bool,
}

impl HermitianMetricField {
    pub fn new(components: Vec<Vec<Expr>>, kaehler: bool) -> Result<Self> {
        let n = components.len();
        for row in &components {
            check_dim("hermitian metric row length", n, row.len())?;
        }
        for row in &components {
            for e in row {
                if e.arity() > 2 * n {
                    return Err(Error::VariableIndexOutOfRange {
                        index: e.arity() - 1,
                        dim: 2 * n,
                    });
                }
            }
        }
        Ok(HermitianMetricField {
            cdim: n,
            components: components.into_iter().flatten().collect(),
            kaehler,
        })
    }

    pub fn flat(n: usize) -> Self {
        let components = (0..n * n)
            .map(|k| Expr::real(if k / n == k % n { 1.0 } else { 0.0 }))
            .collect();
        HermitianMetricField {
            cdim: n,
            components,
            kaehler: true,
        }
    }

    /// `h_{a bbar} = d^2 K / dz^a dzbar^b` for a real potential `K` in the
    /// chart's real variables. Always Kaehler.
    pub fn from_potential(n: usize, potential: &Expr) -> Self {
        let i = Expr::i();
        let mut components = Vec::with_capacity(n * n);
        for a in 0..n {
            let ka = potential.diff(2 * a);
            let kb = potential.diff(2 * a + 1);
            for b in 0..n {
                let (x, y) = (2 * b, 2 * b + 1);
                // 1/4 (K_{xa xb} + i K_{xa yb} - i K_{ya xb} + K_{ya yb})
                let e = ka.diff(x) + i.clone() * ka.diff(y) - i.clone() * kb.diff(x) + kb.diff(y);
                components.push(Expr::real(0.25) * e);
            }
        }
        HermitianMetricField {
            cdim: n,
            components,
            kaehler: true,
        }
    }

    /// Fubini-Study metric in an affine chart:
    /// `((1 + |z|^2) delta_ab - zbar_a z_b) / (1 + |z|^2)^2`.
    pub fn fubini_study(n: usize) -> Self {
        let z = |a: usize| Expr::complex_coordinate(a);
        let mut norm_sq = Expr::real(1.0);
        for a in 0..n {
            norm_sq = norm_sq + Expr::var(2 * a).powi(2) + Expr::var(2 * a + 1).powi(2);
        }
        let denom = norm_sq.clone().powi(-2);
        let mut components = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                let mut num = -(z(a).conj() * z(b));
                if a == b {
                    num = norm_sq.clone() + num;
                }
                components.push(num * denom.clone());
            }
        }
        HermitianMetricField {
            cdim: n,
            components,
            kaehler: true,
        }
    }

    /// Same components with a different Kaehler claim. Used to build negative
    /// controls where the claim is deliberately false.
    pub fn with_kaehler_claim(mut self, kaehler: bool) -> Self {
        self.kaehler = kaehler;
        self
    }

    pub fn cdim(&self) -> usize {
        self.cdim
    }

    pub fn is_kaehler(&self) -> bool {
        self.kaehler
    }

    pub fn component(&self, a: usize, b: usize) -> &Expr {
        &self.components[a * self.cdim + b]
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Expr::is_constant)
    }

    /// Components `h_{a bbar}(z)` only, without the positivity check.
    pub fn components_at(&self, z: &[f64]) -> Result<CMat> {
        let n = self.cdim;
        check_dim("target point (real coordinates)", 2 * n, z.len())?;
        let mut h = CMat::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                h[(a, b)] = crate::jet::eval(self.component(a, b), z)?;
            }
        }
        Ok(h)
    }

    /// Components, inverse and Wirtinger derivatives at the chart point `z`
    /// (real coordinates, length `2n`).
    pub fn at(&self, z: &[f64]) -> Result<HermitianPoint> {
        let n = self.cdim;
        check_dim("target point (real coordinates)", 2 * n, z.len())?;
        let mut h = CMat::zeros(n, n);
        let mut dz = vec![CMat::zeros(n, n); n];
        let mut dzbar = vec![CMat::zeros(n, n); n];
        for a in 0..n {
            for b in 0..n {
                let e = self.component(a, b);
                if e.is_constant() {
                    h[(a, b)] = crate::jet::eval(e, z)?;
                    continue;
                }
                let jet = eval_jet2(e, z)?;
                h[(a, b)] = jet.value;
                for c in 0..n {
                    dz[c][(a, b)] = wirtinger_dz(&jet, c);
                    dzbar[c][(a, b)] = wirtinger_dzbar(&jet, c);
                }
            }
        }
        let h_inv = hpd_inverse(&h)?;
        Ok(HermitianPoint {
            h,
            h_inv,
            dz,
            dzbar,
        })
    }

    /// Checks the Kaehler claim at the given chart points.
    pub fn verify_kaehler(&self, points: &[Vec<f64>], tol: f64) -> Result<()> {
        if !self.kaehler {
            return Err(Error::TargetNotKaehler);
        }
        for z in points {
            let residual = self.at(z)?.kaehler_residual();
            if residual > tol {
                return Err(Error::KaehlerClaimViolated {
                    residual,
                    point: z.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A Hermitian metric evaluated at a point.
#[derive(Debug, Clone)]
pub struct HermitianPoint {
    /// `h[(a, b)] = h_{a bbar}`.
    pub h: CMat,
    pub h_inv: CMat,
    /// `dz[c][(a, b)] = d h_{a bbar} / dz^c`.
    pub dz: Vec<CMat>,
    /// `dzbar[c][(a, b)] = d h_{a bbar} / dzbar^c`.
    pub dzbar: Vec<CMat>,
}

impl HermitianPoint {
    pub fn cdim(&self) -> usize {
        self.h.nrows()
    }

    /// `max |d_a h_{b cbar} - d_b h_{a cbar}|`.
    pub fn kaehler_residual(&self) -> f64 {
        let n = self.cdim();
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    worst = worst.max((self.dz[a][(b, c)] - self.dz[b][(a, c)]).norm());
                }
            }
        }
        worst
    }

    /// `Gamma^a_{bc} = h^{a dbar} d_b h_{c dbar}` where `h^{a dbar}` is the
    /// inverse with `h^{a dbar} h_{c dbar} = delta^a_c`.
    pub fn christoffel_kaehler(&self) -> ChristoffelKaehler {
        let n = self.cdim();
        // G = (h^T)^{-1} = (h^{-1})^T
        let g = self.h_inv.transpose();
        let mut data = vec![ZERO; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let mut s = ZERO;
                    for d in 0..n {
                        s += g[(a, d)] * self.dz[b][(c, d)];
                    }
                    data[(a * n + b) * n + c] = s;
                }
            }
        }
        ChristoffelKaehler { cdim: n, data }
    }

    /// Complex-bilinear extension of the underlying Riemannian metric in the
    /// basis `(d/dz^1..d/dz^n, d/dzbar^1..d/dzbar^n)`: `h(d_a, d_bbar) = h_{a bbar} / 2`.
    pub fn bilinear(&self) -> CMat {
        let n = self.cdim();
        let mut g = CMat::zeros(2 * n, 2 * n);
        for a in 0..n {
            for b in 0..n {
                g[(a, n + b)] = 0.5 * self.h[(a, b)];
                g[(n + b, a)] = 0.5 * self.h[(a, b)];
            }
        }
        g
    }

    /// Inverse of [`HermitianPoint::bilinear`].
    pub fn bilinear_inverse(&self) -> CMat {
        let n = self.cdim();
        let mut g = CMat::zeros(2 * n, 2 * n);
        // [[0, H/2], [H^T/2, 0]]^{-1} = [[0, 2 (H^T)^{-1}], [2 H^{-1}, 0]]
        for a in 0..n {
            for b in 0..n {
                g[(a, n + b)] = 2.0 * self.h_inv[(b, a)];
                g[(n + a, b)] = 2.0 * self.h_inv[(a, b)];
            }
        }
        g
    }

    /// Levi-Civita symbols of the underlying Riemannian metric in complex
    /// coordinates, all index types. For a Kaehler metric only the pure
    /// symbols `Gamma^a_{bc}` and their conjugates survive.
    pub fn levi_civita(&self) -> ComplexChristoffel {
        let n = self.cdim();
        let big = 2 * n;
        let inv = self.bilinear_inverse();
        // d_D of the bilinear metric components
        let deriv = |d: usize, r: usize, c: usize| -> Complex64 {
            let dh = if d < n {
                &self.dz[d]
            } else {
                &self.dzbar[d - n]
            };
            match (r < n, c < n) {
                (true, false) => 0.5 * dh[(r, c - n)],
                (false, true) => 0.5 * dh[(c, r - n)],
                _ => ZERO,
            }
        };
        let mut data = vec![ZERO; big * big * big];
        for a in 0..big {
            for b in 0..big {
                for c in b..big {
                    let mut s = ZERO;
                    for d in 0..big {
                        let w = inv[(a, d)];
                        if w == ZERO {
                            continue;
                        }
                        s += w * (deriv(b, d, c) + deriv(c, d, b) - deriv(d, b, c));
                    }
                    data[(a * big + b) * big + c] = 0.5 * s;
                    data[(a * big + c) * big + b] = 0.5 * s;
                }
            }
        }
        ComplexChristoffel { cdim: n, data }
    }
}

/// `Gamma^a_{bc}` of a Hermitian metric with holomorphic indices only.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelKaehler {
    cdim: usize,
    data: Vec<Complex64>,
}

impl ChristoffelKaehler {
    pub fn zero(cdim: usize) -> Self {
        ChristoffelKaehler {
            cdim,
            data: vec![ZERO; cdim * cdim * cdim],
        }
    }

    pub fn cdim(&self) -> usize {
        self.cdim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.data[(a * self.cdim + b) * self.cdim + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Christoffel symbols over the index set `(1..n, 1bar..nbar)`; index
/// `n + a` stands for `abar`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChristoffel {
    cdim: usize,
    data: Vec<Complex64>,
}

impl ComplexChristoffel {
    pub fn zero(cdim: usize) -> Self {
        let big = 2 * cdim;
        ComplexChristoffel {
            cdim,
            data: vec![ZERO; big * big * big],
        }
    }

    pub fn cdim(&self) -> usize {
        self.cdim
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> Complex64 {
        let big = 2 * self.cdim;
        self.data[(a * big + b) * big + c]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

pub fn christoffel_kaehler(h: &HermitianMetricField, z: &[f64]) -> Result<ChristoffelKaehler> {
    Ok(h.at(z)?.christoffel_kaehler())
}

pub fn kaehler_residual(h: &HermitianMetricField, z: &[f64]) -> Result<f64> {
    Ok(h.at(z)?.kaehler_residual())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::parse;

    fn non_kaehler() -> HermitianMetricField {
        HermitianMetricField::new(
            vec![
                vec![parse("1 + x3").unwrap(), Expr::real(0.0)],
                vec![Expr::real(0.0), Expr::real(1.0)],
            ],
            false,
        )
        .unwrap()
    }

    #[test]
    fn flat_metric() {
        let h = HermitianMetricField::flat(2);
        let z = [0.1, 0.2, -0.3, 0.4];
        assert_eq!(christoffel_kaehler(&h, &z).unwrap().max_abs(), 0.0);
        assert_eq!(kaehler_residual(&h, &z).unwrap(), 0.0);
        assert_eq!(h.at(&z).unwrap().levi_civita().max_abs(), 0.0);
    }

    #[test]
    fn fubini_study_one_dimensional() {
        let h = HermitianMetricField::fubini_study(1);
        let p = h.at(&[1.0, 0.0]).unwrap();
        assert!((p.h[(0, 0)] - Complex64::new(0.25, 0.0)).norm() < 1e-15);
        let gamma = p.christoffel_kaehler();
        assert!((gamma.get(0, 0, 0) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        // -2 zbar / (1 + |z|^2) at z = 0.5 - 0.25 i
        let p = h.at(&[0.5, -0.25]).unwrap();
        let z = Complex64::new(0.5, -0.25);
        let expected = -2.0 * z.conj() / (1.0 + z.norm_sqr());
        assert!((p.christoffel_kaehler().get(0, 0, 0) - expected).norm() < 1e-14);
    }

    #[test]
    fn potential_metric_is_kaehler() {
        // K = |z1|^2 + |z1|^2 |z2|^2
        let k = parse("(x1^2 + x2^2) + (x1^2 + x2^2)*(x3^2 + x4^2)").unwrap();
        let h = HermitianMetricField::from_potential(2, &k);
        let z = [0.3, -0.7, 0.2, 0.5];
        let p = h.at(&z).unwrap();
        assert!(p.kaehler_residual() <= 1e-12);
        // h_{1 1bar} = 1 + |z2|^2, h_{1 2bar} = zbar1 z2
        assert!((p.h[(0, 0)] - Complex64::new(1.0 + 0.04 + 0.25, 0.0)).norm() < 1e-14);
        let z1 = Complex64::new(0.3, -0.7);
        let z2 = Complex64::new(0.2, 0.5);
        assert!((p.h[(0, 1)] - z1.conj() * z2).norm() < 1e-14);
    }

    #[test]
    fn hand_built_non_kaehler() {
        let h = non_kaehler();
        assert!(kaehler_residual(&h, &[0.0; 4]).unwrap() > 0.4);
        assert_eq!(
            h.verify_kaehler(&[vec![0.0; 4]], 1e-10),
            Err(Error::TargetNotKaehler)
        );
        let forged = h.with_kaehler_claim(true);
        assert!(matches!(
            forged.verify_kaehler(&[vec![0.0; 4]], 1e-10),
            Err(Error::KaehlerClaimViolated { .. })
        ));
    }

    #[test]
    fn levi_civita_matches_kaehler_symbols() {
        let h = HermitianMetricField::fubini_study(2);
        let p = h.at(&[0.3, -0.2, 0.6, 0.1]).unwrap();
        let lc = p.levi_civita();
        let k = p.christoffel_kaehler();
        let n = 2;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    assert!((lc.get(a, b, c) - k.get(a, b, c)).norm() < 1e-14);
                    // mixed symbols vanish for Kaehler metrics
                    assert!(lc.get(a, b, n + c).norm() < 1e-14);
                    assert!(lc.get(a, n + b, n + c).norm() < 1e-14);
                    // conjugate block
                    assert!((lc.get(n + a, n + b, n + c) - k.get(a, b, c).conj()).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn mixed_symbols_detect_non_kaehler() {
        let p = non_kaehler().at(&[0.0; 4]).unwrap();
        let lc = p.levi_civita();
        // Gamma^1_{1 2bar} = 1/2 h^{1 1bar} dzbar_2 h_{1 1bar} = 1/4
        assert!((lc.get(0, 0, 3) - Complex64::new(0.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn not_positive_definite() {
        let h = HermitianMetricField::new(vec![vec![parse("x1").unwrap()]], true).unwrap();
        assert!(matches!(h.at(&[-1.0, 0.0]), Err(Error::MetricNotPd { .. })));
    }
}
