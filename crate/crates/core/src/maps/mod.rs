//! Maps `phi: (R^m, g) -> (C^n, h)` and their pointwise residuals.

mod fixtures;

pub use fixtures::{example1, example2};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{
    check_dim, wirtinger_dz, wirtinger_dz_dzbar, wirtinger_dzbar, ChristoffelDomain,
    ComplexChristoffel, HermitianMetricField, MetricField, MetricPoint,
};
use crate::jet::{eval, eval_jet2, Expr};
use crate::linalg::{frobenius, max_abs, to_complex, CMat};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `phi = (phi^1, .., phi^n)`, each component an expression in `x1..xm`.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothMap {
    dim: usize,
    components: Vec<Expr>,
}

impl SmoothMap {
    pub fn new(dim: usize, components: Vec<Expr>) -> Result<Self> {
        for e in &components {
            if e.arity() > dim {
                return Err(Error::VariableIndexOutOfRange {
                    index: e.arity() - 1,
                    dim,
                });
            }
        }
        Ok(SmoothMap { dim, components })
    }

    pub fn constant(dim: usize, values: &[Complex64]) -> Self {
        SmoothMap {
            dim,
            components: values.iter().map(|&c| Expr::Const(c)).collect(),
        }
    }

    /// Domain dimension `m`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Target complex dimension `n`.
    pub fn cdim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn value(&self, p: &[f64]) -> Result<Vec<Complex64>> {
        check_dim("domain point", self.dim, p.len())?;
        self.components.iter().map(|e| eval(e, p)).collect()
    }

    /// `phi(p)` as a real target point `(re phi^1, im phi^1, ..)`.
    pub fn target_point(&self, p: &[f64]) -> Result<Vec<f64>> {
        Ok(self.value(p)?.iter().flat_map(|c| [c.re, c.im]).collect())
    }
}

/// First and second partials of a map at a point.
#[derive(Debug, Clone)]
pub struct DifferentialPoint {
    pub value: Vec<Complex64>,
    /// `dphi[(a, i)] = d phi^a / dx^i`.
    pub dphi: CMat,
    /// `second[a][(i, j)] = d^2 phi^a / dx^i dx^j`.
    pub second: Vec<CMat>,
}

impl DifferentialPoint {
    pub fn target_point(&self) -> Vec<f64> {
        self.value.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    /// `2n x m` matrix with rows `d phi^a` followed by `d conj(phi^a)`.
    pub fn doubled(&self) -> CMat {
        let (n, m) = self.dphi.shape();
        let mut d = CMat::zeros(2 * n, m);
        d.view_mut((0, 0), (n, m)).copy_from(&self.dphi);
        d.view_mut((n, 0), (n, m))
            .copy_from(&self.dphi.map(|c| c.conj()));
        d
    }
}

pub fn differential(phi: &SmoothMap, p: &[f64]) -> Result<DifferentialPoint> {
    check_dim("domain point", phi.dim, p.len())?;
    let (n, m) = (phi.cdim(), phi.dim);
    let mut value = Vec::with_capacity(n);
    let mut dphi = CMat::zeros(n, m);
    let mut second = Vec::with_capacity(n);
    for (a, e) in phi.components.iter().enumerate() {
        let jet = eval_jet2(e, p)?;
        value.push(jet.value);
        for i in 0..m {
            dphi[(a, i)] = jet.grad[i];
        }
        second.push(CMat::from_row_slice(m, m, jet.hessian()));
    }
    Ok(DifferentialPoint {
        value,
        dphi,
        second,
    })
}

/// `P_ab = g^ij d_i phi^a d_j phi^b` (holomorphic-holomorphic block).
pub fn phwc_matrix(dp: &DifferentialPoint, metric: &MetricPoint) -> CMat {
    &dp.dphi * to_complex(&metric.g_inv) * dp.dphi.transpose()
}

/// `max_ab |g^ij d_i phi^a d_j phi^b|`.
pub fn phwc_residual_coord(phi: &SmoothMap, g: &MetricField, p: &[f64]) -> Result<f64> {
    check_dim("map domain vs metric", g.dim(), phi.dim)?;
    let metric = g.at(p)?;
    let dp = differential(phi, p)?;
    Ok(max_abs(&phwc_matrix(&dp, &metric)))
}

/// Metric duals `v_a = g^{-1} d phi^a`, one per column.
pub fn dual_vectors(dp: &DifferentialPoint, metric: &MetricPoint) -> CMat {
    to_complex(&metric.g_inv) * dp.dphi.transpose()
}

/// Largest entry of the complex-bilinear Gram matrix `g(v_a, v_b)`.
pub fn isotropy_residual(phi: &SmoothMap, g: &MetricField, p: &[f64]) -> Result<f64> {
    check_dim("map domain vs metric", g.dim(), phi.dim)?;
    let metric = g.at(p)?;
    let dp = differential(phi, p)?;
    let v = dual_vectors(&dp, &metric);
    let gram = v.transpose() * to_complex(&metric.g) * &v;
    Ok(max_abs(&gram))
}

/// `dphi o dphi*` on the complexified target tangent space in the basis
/// `(d/dz, d/dzbar)`.
pub fn dphi_adjoint(
    dp: &DifferentialPoint,
    metric: &MetricPoint,
    target: &crate::geometry::HermitianPoint,
) -> CMat {
    let d = dp.doubled();
    &d * to_complex(&metric.g_inv) * d.transpose() * target.bilinear()
}

/// Frobenius norm of `[dphi o dphi*, J]`.
pub fn phwc_residual_commutator(
    phi: &SmoothMap,
    g: &MetricField,
    h: &HermitianMetricField,
    p: &[f64],
) -> Result<f64> {
    check_dim("map domain vs metric", g.dim(), phi.dim)?;
    check_dim("map target vs hermitian metric", h.cdim(), phi.cdim())?;
    let metric = g.at(p)?;
    let dp = differential(phi, p)?;
    let target = h.at(&dp.target_point())?;
    let a = dphi_adjoint(&dp, &metric, &target);
    let n = phi.cdim();
    let mut j = CMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(k, k)] = Complex64::i();
        j[(n + k, n + k)] = -Complex64::i();
    }
    Ok(frobenius(&(&a * &j - &j * &a)))
}

/// Least-squares dilation fit for `g^ij d_i phi^A d_j phi^B = lambda^2 h^AB`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HWCReport {
    pub lambda_sq: f64,
    pub defect: f64,
}

pub fn hwc_report(
    phi: &SmoothMap,
    g: &MetricField,
    h: &HermitianMetricField,
    p: &[f64],
) -> Result<HWCReport> {
    check_dim("map domain vs metric", g.dim(), phi.dim)?;
    check_dim("map target vs hermitian metric", h.cdim(), phi.cdim())?;
    let metric = g.at(p)?;
    let dp = differential(phi, p)?;
    if dp.dphi.iter().all(|c| *c == ZERO) {
        return Ok(HWCReport {
            lambda_sq: 0.0,
            defect: 0.0,
        });
    }
    let target = h.at(&dp.target_point())?;
    let d = dp.doubled();
    let lhs = &d * to_complex(&metric.g_inv) * d.transpose();
    let rhs = target.bilinear_inverse();
    let num: f64 = lhs
        .iter()
        .zip(rhs.iter())
        .map(|(a, b)| (b.conj() * a).re)
        .sum();
    let den: f64 = rhs.iter().map(|b| b.norm_sqr()).sum();
    let lambda_sq = (num / den).max(0.0);
    let defect = frobenius(&(lhs - rhs * Complex64::new(lambda_sq, 0.0)));
    Ok(HWCReport { lambda_sq, defect })
}

/// Tension field components `tau^a`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensionPoint {
    pub tau: Vec<Complex64>,
}

impl TensionPoint {
    pub fn harmonic_residual(&self) -> f64 {
        self.tau.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Real tension vector in target coordinates `(re, im)`.
    pub fn real_vector(&self) -> Vec<f64> {
        self.tau.iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

/// `tau^a = g^ij (d_ij phi^a - Gamma^k_ij d_k phi^a + Gamma^a_BC d_i phi^B d_j phi^C)`
/// with `B, C` running over holomorphic and antiholomorphic indices.
pub fn tension_from_parts(
    dp: &DifferentialPoint,
    metric: &MetricPoint,
    gamma: &ChristoffelDomain,
    target_gamma: &ComplexChristoffel,
) -> TensionPoint {
    let (n, m) = dp.dphi.shape();
    let d = dp.doubled();
    let mut tau = vec![ZERO; n];
    for (a, t) in tau.iter_mut().enumerate() {
        for i in 0..m {
            for j in 0..m {
                let w = metric.g_inv[(i, j)];
                if w == 0.0 {
                    continue;
                }
                let mut inner = dp.second[a][(i, j)];
                for k in 0..m {
                    inner -= dp.dphi[(a, k)] * gamma.get(k, i, j);
                }
                for b in 0..2 * n {
                    for c in 0..2 * n {
                        let gbc = target_gamma.get(a, b, c);
                        if gbc != ZERO {
                            inner += gbc * d[(b, i)] * d[(c, j)];
                        }
                    }
                }
                *t += inner * w;
            }
        }
    }
    TensionPoint { tau }
}

pub fn tension(
    phi: &SmoothMap,
    g: &MetricField,
    h: &HermitianMetricField,
    p: &[f64],
) -> Result<TensionPoint> {
    check_dim("map domain vs metric", g.dim(), phi.dim)?;
    check_dim("map target vs hermitian metric", h.cdim(), phi.cdim())?;
    if !h.is_kaehler() {
        return Err(Error::TargetNotKaehler);
    }
    let metric = g.at(p)?;
    let gamma = metric.christoffel();
    let dp = differential(phi, p)?;
    let target = h.at(&dp.target_point())?;
    Ok(tension_from_parts(
        &dp,
        &metric,
        &gamma,
        &target.levi_civita(),
    ))
}

pub fn harmonic_residual(
    phi: &SmoothMap,
    g: &MetricField,
    h: &HermitianMetricField,
    p: &[f64],
) -> Result<f64> {
    Ok(tension(phi, g, h, p)?.harmonic_residual())
}

/// Residual of the pluriharmonicity equation for `f` on a Kaehler chart of
/// `C^k` (real variables `re z1, im z1, ..`). With `target = None` the
/// components are treated as scalar functions.
pub fn pluriharmonic_residual(
    f: &SmoothMap,
    source: &HermitianMetricField,
    target: Option<&HermitianMetricField>,
    z: &[f64],
) -> Result<f64> {
    let k = source.cdim();
    check_dim("map domain vs source chart", 2 * k, f.dim)?;
    check_dim("source point", 2 * k, z.len())?;
    if !source.is_kaehler() {
        return Err(Error::SourceNotKaehler);
    }
    let r = f.cdim();
    let jets = f
        .components
        .iter()
        .map(|e| eval_jet2(e, z))
        .collect::<Result<Vec<_>>>()?;
    let target_gamma = match target {
        Some(t) => {
            check_dim("map target vs hermitian metric", t.cdim(), r)?;
            if !t.is_kaehler() {
                return Err(Error::TargetNotKaehler);
            }
            let w: Vec<f64> = jets.iter().flat_map(|j| [j.value.re, j.value.im]).collect();
            Some(t.at(&w)?.levi_civita())
        }
        None => None,
    };
    // d f^J / dz^a and d f^J / dzbar^b for J over (f, conj f)
    let dz = |jj: usize, a: usize| -> Complex64 {
        if jj < r {
            wirtinger_dz(&jets[jj], a)
        } else {
            wirtinger_dzbar(&jets[jj - r], a).conj()
        }
    };
    let dzbar = |jj: usize, b: usize| -> Complex64 {
        if jj < r {
            wirtinger_dzbar(&jets[jj], b)
        } else {
            wirtinger_dz(&jets[jj - r], b).conj()
        }
    };
    let mut worst: f64 = 0.0;
    for (c, jet) in jets.iter().enumerate() {
        for a in 0..k {
            for b in 0..k {
                let mut v = wirtinger_dz_dzbar(jet, a, b);
                if let Some(gamma) = &target_gamma {
                    for jj in 0..2 * r {
                        for ll in 0..2 * r {
                            let gm = gamma.get(c, jj, ll);
                            if gm != ZERO {
                                v += gm * dz(jj, a) * dzbar(ll, b);
                            }
                        }
                    }
                }
                worst = worst.max(v.norm());
            }
        }
    }
    Ok(worst)
}

/// `max |d psi^a / dzbar^b|` at the real target point `w`.
pub fn holomorphy_residual(psi: &SmoothMap, w: &[f64]) -> Result<f64> {
    wirtinger_max(psi, w, false)
}

/// `max |d psi^a / dz^b|` at the real target point `w`.
pub fn antiholomorphy_residual(psi: &SmoothMap, w: &[f64]) -> Result<f64> {
    wirtinger_max(psi, w, true)
}

fn wirtinger_max(psi: &SmoothMap, w: &[f64], holomorphic_part: bool) -> Result<f64> {
    check_dim("target point (real coordinates)", psi.dim, w.len())?;
    let k = psi.dim / 2;
    let mut worst: f64 = 0.0;
    for e in &psi.components {
        let jet = eval_jet2(e, w)?;
        for b in 0..k {
            let d = if holomorphic_part {
                wirtinger_dz(&jet, b)
            } else {
                wirtinger_dzbar(&jet, b)
            };
            worst = worst.max(d.norm());
        }
    }
    Ok(worst)
}

/// `psi o phi` together with its factors.
#[derive(Debug, Clone)]
pub struct Composite {
    pub map: SmoothMap,
    pub outer: SmoothMap,
    pub inner: SmoothMap,
}

impl Composite {
    /// Holomorphy residual of the outer map at `phi(p)`.
    pub fn holomorphy_residual(&self, p: &[f64]) -> Result<f64> {
        holomorphy_residual(&self.outer, &self.inner.target_point(p)?)
    }

    pub fn antiholomorphy_residual(&self, p: &[f64]) -> Result<f64> {
        antiholomorphy_residual(&self.outer, &self.inner.target_point(p)?)
    }
}

/// Substitutes `re phi^a, im phi^a` for the real variables of `psi`.
pub fn compose(psi: &SmoothMap, phi: &SmoothMap) -> Result<Composite> {
    check_dim(
        "outer map domain (2 x inner target)",
        2 * phi.cdim(),
        psi.dim,
    )?;
    let vars: Vec<Expr> = phi
        .components
        .iter()
        .flat_map(|c| [c.clone().re(), c.clone().im()])
        .collect();
    let components = psi.components.iter().map(|e| e.substitute(&vars)).collect();
    Ok(Composite {
        map: SmoothMap {
            dim: phi.dim,
            components,
        },
        outer: psi.clone(),
        inner: phi.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::parse;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn map(dim: usize, texts: &[&str]) -> SmoothMap {
        SmoothMap::new(dim, texts.iter().map(|t| parse(t).unwrap()).collect()).unwrap()
    }

    #[test]
    fn example_differentials() {
        let dp = differential(&example1(), &[0.3, -1.1]).unwrap();
        for a in 0..3 {
            assert_eq!(dp.dphi[(a, 0)], c(1.0, 0.0));
            assert_eq!(dp.dphi[(a, 1)], c(0.0, 1.0));
        }
        let dp = differential(&example2(), &[0.3, -1.1, 2.0, 0.5]).unwrap();
        for a in 0..2 {
            let row: Vec<_> = dp.dphi.row(a).iter().copied().collect();
            assert_eq!(
                row,
                vec![c(0.0, 1.0), c(0.0, 1.0), c(1.0, 0.0), c(1.0, 0.0)]
            );
        }
        let constant = SmoothMap::constant(2, &[c(1.0, 2.0)]);
        let dp = differential(&constant, &[0.0, 0.0]).unwrap();
        assert_eq!(max_abs(&dp.dphi), 0.0);
        assert_eq!(max_abs(&dp.second[0]), 0.0);
    }

    #[test]
    fn identity_into_c2_is_not_phwc() {
        let phi = map(2, &["x1", "x2"]);
        let g = MetricField::euclidean(2);
        let h = HermitianMetricField::flat(2);
        let p = [0.2, 0.9];
        assert_eq!(phwc_residual_coord(&phi, &g, &p).unwrap(), 1.0);
        assert_eq!(isotropy_residual(&phi, &g, &p).unwrap(), 1.0);
        assert!(phwc_residual_commutator(&phi, &g, &h, &p).unwrap() > 0.5);
    }

    #[test]
    fn examples_are_phwc() {
        let p = [0.4, -0.6];
        let g = MetricField::euclidean(2);
        let h = HermitianMetricField::flat(3);
        assert_eq!(phwc_residual_coord(&example1(), &g, &p).unwrap(), 0.0);
        assert_eq!(
            phwc_residual_commutator(&example1(), &g, &h, &p).unwrap(),
            0.0
        );
        let p = [0.4, -0.6, 1.0, 0.1];
        let g = MetricField::euclidean(4);
        let h = HermitianMetricField::flat(2);
        assert_eq!(phwc_residual_coord(&example2(), &g, &p).unwrap(), 0.0);
        assert_eq!(
            tension(&example2(), &g, &h, &p)
                .unwrap()
                .harmonic_residual(),
            0.0
        );
    }

    #[test]
    fn hwc_of_examples() {
        let r = hwc_report(
            &example1(),
            &MetricField::euclidean(2),
            &HermitianMetricField::flat(3),
            &[0.0, 0.0],
        )
        .unwrap();
        assert!((r.lambda_sq - 1.0).abs() < 1e-14);
        assert!((r.defect - 48f64.sqrt()).abs() < 1e-12);
        let r = hwc_report(
            &example2(),
            &MetricField::euclidean(4),
            &HermitianMetricField::flat(2),
            &[0.0; 4],
        )
        .unwrap();
        assert!((r.lambda_sq - 2.0).abs() < 1e-14);
        assert!((r.defect - 8.0).abs() < 1e-12);
    }

    #[test]
    fn hwc_linear_conformal() {
        let phi = map(2, &["2*x1 + 2*i*x2"]);
        let r = hwc_report(
            &phi,
            &MetricField::euclidean(2),
            &HermitianMetricField::flat(1),
            &[0.3, 0.1],
        )
        .unwrap();
        assert!((r.lambda_sq - 4.0).abs() < 1e-14);
        assert!(r.defect <= 1e-12);
        let constant = SmoothMap::constant(2, &[c(1.0, 0.0)]);
        let r = hwc_report(
            &constant,
            &MetricField::euclidean(2),
            &HermitianMetricField::flat(1),
            &[0.0, 0.0],
        )
        .unwrap();
        assert_eq!(
            r,
            HWCReport {
                lambda_sq: 0.0,
                defect: 0.0
            }
        );
    }

    #[test]
    fn tension_needs_kaehler_flag() {
        let h = HermitianMetricField::flat(3).with_kaehler_claim(false);
        let r = tension(&example1(), &MetricField::euclidean(2), &h, &[0.0, 0.0]);
        assert_eq!(r, Err(Error::TargetNotKaehler));
    }

    #[test]
    fn tension_of_polar_coordinates() {
        // z = x1 e^{i x2} on the half plane x1 > 0 with metric dx1^2 + x1^2 dx2^2
        // is the identity of the punctured plane in polar coordinates
        let phi = map(2, &["x1*cos(x2) + i*x1*sin(x2)"]);
        let g = MetricField::diagonal(vec![Expr::real(1.0), Expr::var(0).powi(2)]);
        let h = HermitianMetricField::flat(1);
        let t = tension(&phi, &g, &h, &[1.3, 0.4]).unwrap();
        assert!(t.harmonic_residual() < 1e-14);
        assert!(phwc_residual_coord(&phi, &g, &[1.3, 0.4]).unwrap() < 1e-14);
    }

    #[test]
    fn pluriharmonic_examples() {
        let flat = HermitianMetricField::flat(2);
        let z = [0.3, -0.4, 0.7, 0.2];
        let f = map(4, &["re((x1 + i*x2)^3)"]);
        assert!(pluriharmonic_residual(&f, &flat, None, &z).unwrap() < 1e-14);
        let f = map(4, &["x1^2 + x2^2"]);
        assert!((pluriharmonic_residual(&f, &flat, None, &z).unwrap() - 1.0).abs() < 1e-14);
        let f = map(4, &["x1*x3"]);
        assert!((pluriharmonic_residual(&f, &flat, None, &z).unwrap() - 0.25).abs() < 1e-14);
        let not_kaehler = flat.clone().with_kaehler_claim(false);
        assert_eq!(
            pluriharmonic_residual(&f, &not_kaehler, None, &z),
            Err(Error::SourceNotKaehler)
        );
    }

    #[test]
    fn holomorphic_into_curved_target_is_pluriharmonic() {
        let source = HermitianMetricField::flat(1);
        let target = HermitianMetricField::fubini_study(1);
        let f = map(2, &["(x1 + i*x2)^2 + 0.5"]);
        let z = [0.3, -0.2];
        assert!(pluriharmonic_residual(&f, &source, Some(&target), &z).unwrap() < 1e-14);
        // conj(z) z is not pluriharmonic for either target
        let f = map(2, &["x1^2 + x2^2"]);
        assert!(pluriharmonic_residual(&f, &source, Some(&target), &z).unwrap() > 0.5);
    }

    #[test]
    fn composition() {
        let psi = map(6, &["(x1 + i*x2) + (x3 + i*x4)^2", "x5 + i*x6"]);
        let comp = compose(&psi, &example1()).unwrap();
        let g = MetricField::euclidean(2);
        let p = [0.37, -1.2];
        assert!(phwc_residual_coord(&comp.map, &g, &p).unwrap() < 1e-13);
        assert_eq!(comp.holomorphy_residual(&p).unwrap(), 0.0);
        let z = c(0.37, -1.2);
        let v = comp.map.value(&p).unwrap();
        assert!((v[0] - (z + z * z)).norm() < 1e-14);

        let anti = map(2, &["x1 - i*x2"]);
        let single = SmoothMap::new(2, vec![example1().components()[0].clone()]).unwrap();
        let comp = compose(&anti, &single).unwrap();
        assert!(phwc_residual_coord(&comp.map, &g, &p).unwrap() < 1e-15);
        assert_eq!(comp.antiholomorphy_residual(&p).unwrap(), 0.0);

        let bad = map(2, &["2*x1"]);
        let comp = compose(&bad, &single).unwrap();
        assert!(phwc_residual_coord(&comp.map, &g, &p).unwrap() > 1e-3);
        assert!(matches!(
            compose(&bad, &example1()),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
