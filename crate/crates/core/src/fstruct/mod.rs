//! The f-structure `F` attached to a PHWC map and the conditions on it that
//! force harmonicity.
//!
//! `F` is real with `F[(k, j)] = F^k_j`. Its `+i` eigenspace is spanned by
//! the conjugates of `v_a = g^{-1} d phi^a`, so that `dphi` carries `T+` into
//! `T^{1,0}` of the target.

mod suite;

pub use suite::{
    forged_kaehler_case, standard_cases, theorem_suite, Counterexample, Diagnostics, SuiteCase,
    SuiteConfig, SuiteRecord, SuiteReport,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{check_dim, MetricField, MetricPoint};
use crate::linalg::{
    euclidean_orthonormal, max_abs, max_principal_angle_sine, null_space, pivoted_gram_schmidt,
    to_complex, CMat, CVec, RMat,
};
use crate::maps::{differential, dual_vectors, phwc_matrix, SmoothMap};

pub const DEFAULT_RANK_TOL: f64 = 1e-8;
pub const DEFAULT_H_STEP: f64 = 1e-4;
/// Largest PHWC residual accepted before building `F`.
pub const PHWC_GATE: f64 = 1e-8;

/// An f-structure at a point together with its eigenprojectors.
#[derive(Debug, Clone)]
pub struct FStructurePoint {
    pub f: RMat,
    pub plus: CMat,
    pub minus: CMat,
    pub zero: CMat,
    pub rank: usize,
    /// Basis of `T+`, orthonormal for `<X, Y> = X^T g conj(Y)`.
    pub plus_basis: Vec<CVec>,
    /// Real Euclidean-orthonormal basis of `T0`.
    pub zero_basis: Vec<CVec>,
    /// `max |Im i (P+ - P-)|`.
    pub imag: f64,
}

/// Algebraic invariants of an [`FStructurePoint`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraResiduals {
    pub cubic: f64,
    pub skew: f64,
    pub projectors: f64,
    pub imag: f64,
}

impl AlgebraResiduals {
    pub fn max(&self) -> f64 {
        self.cubic
            .max(self.skew)
            .max(self.projectors)
            .max(self.imag)
    }
}

impl FStructurePoint {
    /// Builds the f-structure whose `+i` eigenspace is the span of
    /// `generators`, which must be isotropic for the bilinear extension of `g`.
    pub fn from_generators(g: &RMat, generators: &[CVec], rank_tol: f64) -> Result<Self> {
        let m = g.nrows();
        let gc = to_complex(g);
        let inner = |x: &CVec, y: &CVec| (x.transpose() * &gc * y.conjugate())[(0, 0)];
        let gs = pivoted_gram_schmidt(generators, inner, rank_tol)?;
        let mut plus = CMat::zeros(m, m);
        for e in &gs.basis {
            plus += e * (e.adjoint() * &gc);
        }
        let minus = plus.map(|c| c.conj());
        let zero = CMat::identity(m, m) - &plus - &minus;
        let fc = (&plus - &minus) * Complex64::i();
        let imag = fc.iter().map(|c| c.im.abs()).fold(0.0, f64::max);
        let f = fc.map(|c| c.re);
        let k = gs.basis.len();
        let columns: Vec<CVec> = (0..m)
            .map(|j| zero.column(j).map(|c| Complex64::new(c.re, 0.0)))
            .collect();
        let zero_basis = pick_basis(&columns, m - 2 * k);
        Ok(FStructurePoint {
            f,
            plus,
            minus,
            zero,
            rank: 2 * k,
            plus_basis: gs.basis,
            zero_basis,
            imag,
        })
    }

    pub fn dim(&self) -> usize {
        self.f.nrows()
    }

    pub fn minus_basis(&self) -> Vec<CVec> {
        self.plus_basis
            .iter()
            .map(|e| e.map(|c| c.conj()))
            .collect()
    }

    pub fn algebra_residuals(&self, g: &RMat) -> AlgebraResiduals {
        let m = self.dim();
        let f = &self.f;
        let cubic = (f * f * f + f).abs().max();
        let gf = g * f;
        let skew = (&gf + gf.transpose()).abs().max();
        let id = CMat::identity(m, m);
        let (p, q, z) = (&self.plus, &self.minus, &self.zero);
        let mut projectors = max_abs(&(p + q + z - &id));
        for a in [p, q, z] {
            projectors = projectors.max(max_abs(&(a * a - a)));
            for b in [p, q, z] {
                if !std::ptr::eq(a, b) {
                    projectors = projectors.max(max_abs(&(a * b)));
                }
            }
        }
        let fc = to_complex(f) - (p - q) * Complex64::i();
        projectors = projectors.max(max_abs(&fc));
        AlgebraResiduals {
            cubic,
            skew,
            projectors,
            imag: self.imag,
        }
    }
}

/// Greedy pivoted selection of `count` Euclidean-orthonormal vectors from the
/// span of `vectors`.
fn pick_basis(vectors: &[CVec], count: usize) -> Vec<CVec> {
    let mut rest = vectors.to_vec();
    let mut basis: Vec<CVec> = Vec::with_capacity(count);
    while basis.len() < count {
        let Some((k, _)) = rest
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
        else {
            break;
        };
        let v = rest.swap_remove(k);
        let e = &v / Complex64::new(v.norm(), 0.0);
        for _ in 0..2 {
            for w in rest.iter_mut() {
                let c = e.dotc(w);
                *w -= &e * c;
            }
        }
        basis.push(e);
    }
    basis
}

/// Generators `conj(v_a)` of `T+` for `phi` at a point.
pub fn plus_generators(phi: &SmoothMap, metric: &MetricPoint, p: &[f64]) -> Result<Vec<CVec>> {
    let dp = differential(phi, p)?;
    let residual = max_abs(&phwc_matrix(&dp, metric));
    if residual > PHWC_GATE {
        return Err(Error::NotPhwcAtPoint { residual });
    }
    let v = dual_vectors(&dp, metric);
    Ok((0..v.ncols())
        .map(|a| v.column(a).map(|c| c.conj()))
        .collect())
}

/// The f-structure associated to a PHWC map at `p`.
pub fn associated_f_structure(
    phi: &SmoothMap,
    g: &MetricField,
    p: &[f64],
    rank_tol: f64,
) -> Result<FStructurePoint> {
    check_dim("map domain vs metric", g.dim(), phi.dim())?;
    let metric = g.at(p)?;
    let generators = plus_generators(phi, &metric, p)?;
    FStructurePoint::from_generators(&metric.g, &generators, rank_tol)
}

/// `max |(dphi F)^a_j - i dphi^a_j|`.
pub fn f_holomorphy_residual(phi: &SmoothMap, fs: &FStructurePoint, p: &[f64]) -> Result<f64> {
    let dp = differential(phi, p)?;
    let lhs = &dp.dphi * to_complex(&fs.f);
    Ok(max_abs(&(lhs - &dp.dphi * Complex64::i())))
}

/// `max |dphi P0|`.
pub fn kernel_residual(phi: &SmoothMap, fs: &FStructurePoint, p: &[f64]) -> Result<f64> {
    let dp = differential(phi, p)?;
    Ok(max_abs(&(&dp.dphi * &fs.zero)))
}

/// Recovery of `T+` from `F` alone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrip {
    /// Dimension of `ker(F - i)`.
    pub dim: usize,
    /// Largest entry of the bilinear Gram matrix of that kernel.
    pub isotropy: f64,
    /// Sine of the largest principal angle to the span of the generators.
    pub angle_sine: f64,
}

pub fn round_trip(fs: &FStructurePoint, g: &RMat, generators: &[CVec]) -> RoundTrip {
    let m = fs.dim();
    let shifted = to_complex(&fs.f) - CMat::identity(m, m) * Complex64::i();
    let scale = fs.f.abs().max().max(1.0);
    let kernel = null_space(&shifted, 1e-8 * scale);
    let gc = to_complex(g);
    let mut isotropy: f64 = 0.0;
    for x in &kernel {
        for y in &kernel {
            isotropy = isotropy.max((x.transpose() * &gc * y)[(0, 0)].norm());
        }
    }
    let span = euclidean_orthonormal(generators, 1e-10);
    RoundTrip {
        dim: kernel.len(),
        isotropy,
        angle_sine: max_principal_angle_sine(&span, &kernel),
    }
}

/// A field of f-structures over a Riemannian chart.
pub trait FField: Sync {
    fn metric(&self) -> &MetricField;
    fn at(&self, p: &[f64]) -> Result<FStructurePoint>;

    fn dim(&self) -> usize {
        self.metric().dim()
    }
}

/// `F^phi` as a field.
#[derive(Debug, Clone)]
pub struct AssociatedField {
    pub phi: SmoothMap,
    pub g: MetricField,
    pub rank_tol: f64,
}

impl AssociatedField {
    pub fn new(phi: SmoothMap, g: MetricField) -> Self {
        AssociatedField {
            phi,
            g,
            rank_tol: DEFAULT_RANK_TOL,
        }
    }
}

impl FField for AssociatedField {
    fn metric(&self) -> &MetricField {
        &self.g
    }

    fn at(&self, p: &[f64]) -> Result<FStructurePoint> {
        associated_f_structure(&self.phi, &self.g, p, self.rank_tol)
    }
}

/// The f-structure with `T+` spanned by fixed coordinate vectors.
#[derive(Debug, Clone)]
pub struct FixedField {
    pub g: MetricField,
    pub generators: Vec<CVec>,
}

impl FixedField {
    /// `T+` spanned by `d_{2a} - i d_{2a+1}` for `a < k`.
    pub fn standard(g: MetricField, k: usize) -> Self {
        let m = g.dim();
        let generators = (0..k)
            .map(|a| {
                let mut v = CVec::zeros(m);
                v[2 * a] = Complex64::new(1.0, 0.0);
                v[2 * a + 1] = Complex64::new(0.0, -1.0);
                v
            })
            .collect();
        FixedField { g, generators }
    }
}

impl FField for FixedField {
    fn metric(&self) -> &MetricField {
        &self.g
    }

    fn at(&self, p: &[f64]) -> Result<FStructurePoint> {
        let metric = self.g.at(p)?;
        FStructurePoint::from_generators(&metric.g, &self.generators, DEFAULT_RANK_TOL)
    }
}

/// `F` at `p` and its central-difference partials `dF[l] = d F / dx^l`.
pub struct Stencil {
    pub center: FStructurePoint,
    pub df: Vec<RMat>,
}

fn shifted(p: &[f64], l: usize, delta: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[l] += delta;
    q
}

pub fn stencil(field: &dyn FField, p: &[f64], h_step: f64) -> Result<Stencil> {
    check_dim("domain point", field.dim(), p.len())?;
    let center = field.at(p)?;
    let mut df = Vec::with_capacity(p.len());
    for l in 0..p.len() {
        let fwd = field.at(&shifted(p, l, h_step))?;
        let bwd = field.at(&shifted(p, l, -h_step))?;
        for nb in [&fwd, &bwd] {
            if nb.rank != center.rank {
                return Err(Error::RankJumpOnStencil {
                    center: center.rank,
                    neighbour: nb.rank,
                });
            }
        }
        df.push((&fwd.f - &bwd.f) / (2.0 * h_step));
    }
    Ok(Stencil { center, df })
}

/// `max |N^k_ij|` for the coordinate Nijenhuis tensor of `F`.
pub fn nijenhuis_residual(field: &dyn FField, p: &[f64], h_step: f64) -> Result<f64> {
    let Stencil { center, df } = stencil(field, p, h_step)?;
    let f = &center.f;
    let m = f.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut n = 0.0;
                for l in 0..m {
                    n += f[(l, i)] * df[l][(k, j)] - f[(l, j)] * df[l][(k, i)];
                    n -= f[(k, l)] * (df[i][(l, j)] - df[j][(l, i)]);
                }
                worst = worst.max(n.abs());
            }
        }
    }
    Ok(worst)
}

/// `max |(nabla_i F)^k_j|` for the Levi-Civita connection.
pub fn parallel_residual(field: &dyn FField, p: &[f64], h_step: f64) -> Result<f64> {
    let Stencil { center, df } = stencil(field, p, h_step)?;
    let gamma = field.metric().at(p)?.christoffel();
    let f = &center.f;
    let m = f.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut v = df[i][(k, j)];
                for l in 0..m {
                    v += gamma.get(k, i, l) * f[(l, j)] - gamma.get(l, i, j) * f[(k, l)];
                }
                worst = worst.max(v.abs());
            }
        }
    }
    Ok(worst)
}

/// Fundamental 2-form `omega_ij = g_ik F^k_j` and its exterior derivative.
#[derive(Debug, Clone)]
pub struct TwoFormPoint {
    pub omega: RMat,
    dim: usize,
    domega: Vec<f64>,
}

impl TwoFormPoint {
    /// `(d omega)_ijk`.
    pub fn domega(&self, i: usize, j: usize, k: usize) -> f64 {
        self.domega[(i * self.dim + j) * self.dim + k]
    }

    pub fn domega_max_abs(&self) -> f64 {
        self.domega.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// `d omega (u, v, w)` for complex vectors.
    pub fn eval_domega(&self, u: &CVec, v: &CVec, w: &CVec) -> Complex64 {
        let m = self.dim;
        let mut s = Complex64::new(0.0, 0.0);
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let d = self.domega(i, j, k);
                    if d != 0.0 {
                        s += u[i] * v[j] * w[k] * d;
                    }
                }
            }
        }
        s
    }
}

fn omega_at(field: &dyn FField, p: &[f64]) -> Result<(RMat, FStructurePoint)> {
    let g = field.metric().at(p)?.g;
    let fs = field.at(p)?;
    Ok((&g * &fs.f, fs))
}

pub fn fundamental_two_form(field: &dyn FField, p: &[f64], h_step: f64) -> Result<TwoFormPoint> {
    Ok(two_form_with_center(field, p, h_step)?.0)
}

fn two_form_with_center(
    field: &dyn FField,
    p: &[f64],
    h_step: f64,
) -> Result<(TwoFormPoint, FStructurePoint)> {
    check_dim("domain point", field.dim(), p.len())?;
    let m = p.len();
    let (omega, center) = omega_at(field, p)?;
    let mut d_omega = Vec::with_capacity(m);
    for l in 0..m {
        let (fwd, fa) = omega_at(field, &shifted(p, l, h_step))?;
        let (bwd, fb) = omega_at(field, &shifted(p, l, -h_step))?;
        for nb in [&fa, &fb] {
            if nb.rank != center.rank {
                return Err(Error::RankJumpOnStencil {
                    center: center.rank,
                    neighbour: nb.rank,
                });
            }
        }
        d_omega.push((fwd - bwd) / (2.0 * h_step));
    }
    let mut domega = vec![0.0; m * m * m];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                domega[(i * m + j) * m + k] =
                    d_omega[i][(j, k)] - d_omega[j][(i, k)] + d_omega[k][(i, j)];
            }
        }
    }
    Ok((
        TwoFormPoint {
            omega,
            dim: m,
            domega,
        },
        center,
    ))
}

/// `max |d omega(u, v, w)|` over basis vectors with `u, v` of one type and
/// `w` of another, types taken from the eigenspaces at `p`.
pub fn domega_12_residual(field: &dyn FField, p: &[f64], h_step: f64) -> Result<f64> {
    let (form, center) = two_form_with_center(field, p, h_step)?;
    let types = [
        center.plus_basis.clone(),
        center.minus_basis(),
        center.zero_basis.clone(),
    ];
    let mut worst: f64 = 0.0;
    for (s, same) in types.iter().enumerate() {
        for (t, other) in types.iter().enumerate() {
            if s == t {
                continue;
            }
            for u in same {
                for v in same {
                    for w in other {
                        worst = worst.max(form.eval_domega(u, v, w).norm());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Size of the `T*0` component of `nabla_X theta` for `X` in `T0` and
/// `theta` in a local frame of `T*+`.
pub fn met_residual(field: &dyn FField, p: &[f64], h_step: f64) -> Result<f64> {
    check_dim("domain point", field.dim(), p.len())?;
    let m = p.len();
    let center = field.at(p)?;
    if center.zero_basis.is_empty() || center.plus_basis.is_empty() {
        return Ok(0.0);
    }
    let metric = field.metric().at(p)?;
    let gamma = metric.christoffel();
    let gc = to_complex(&metric.g);
    // theta_b(p) = g conj(e_b); extended to nearby points by P+(q)^T
    let seeds: Vec<CVec> = center
        .plus_basis
        .iter()
        .map(|e| &gc * e.map(|c| c.conj()))
        .collect();
    let mut d_theta: Vec<Vec<CVec>> = vec![Vec::with_capacity(m); seeds.len()];
    for l in 0..m {
        let fwd = field.at(&shifted(p, l, h_step))?;
        let bwd = field.at(&shifted(p, l, -h_step))?;
        for nb in [&fwd, &bwd] {
            if nb.rank != center.rank {
                return Err(Error::RankJumpOnStencil {
                    center: center.rank,
                    neighbour: nb.rank,
                });
            }
        }
        for (b, seed) in seeds.iter().enumerate() {
            let d = (fwd.plus.transpose() * seed - bwd.plus.transpose() * seed)
                / Complex64::new(2.0 * h_step, 0.0);
            d_theta[b].push(d);
        }
    }
    let zero_t = center.zero.transpose();
    let mut worst: f64 = 0.0;
    for (b, seed) in seeds.iter().enumerate() {
        let theta = center.plus.transpose() * seed;
        for x in &center.zero_basis {
            let mut cov = CVec::zeros(m);
            for j in 0..m {
                let mut s = Complex64::new(0.0, 0.0);
                for i in 0..m {
                    let mut nabla = d_theta[b][i][j];
                    for k in 0..m {
                        nabla -= theta[k] * gamma.get(k, i, j);
                    }
                    s += x[i] * nabla;
                }
                cov[j] = s;
            }
            worst = worst.max((&zero_t * cov).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{parse, Expr};
    use crate::maps::{example1, example2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn example1_structure() {
        let g = MetricField::euclidean(2);
        let fs = associated_f_structure(&example1(), &g, &[0.2, 0.3], DEFAULT_RANK_TOL).unwrap();
        assert_eq!(fs.rank, 2);
        // F d1 = d2, F d2 = -d1
        let expected = RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        assert!((&fs.f - expected).abs().max() < 1e-15);
        let v = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, 1.0)]);
        // v = g^{-1} d phi is the -i eigenvector
        assert!((to_complex(&fs.f) * &v + &v * Complex64::i()).norm() < 1e-15);
        assert!(fs.zero_basis.is_empty());
        assert!(fs.algebra_residuals(&RMat::identity(2, 2)).max() < 1e-15);
        assert!(f_holomorphy_residual(&example1(), &fs, &[0.2, 0.3]).unwrap() < 1e-15);
    }

    #[test]
    fn constant_map_has_trivial_structure() {
        let phi = SmoothMap::constant(3, &[c(1.0, 1.0), c(0.0, 2.0)]);
        let fs = associated_f_structure(&phi, &MetricField::euclidean(3), &[0.0; 3], 1e-8).unwrap();
        assert_eq!(fs.rank, 0);
        assert_eq!(fs.f, RMat::zeros(3, 3));
        assert!(max_abs(&(&fs.zero - CMat::identity(3, 3))) == 0.0);
    }

    #[test]
    fn example2_structure() {
        let g = MetricField::euclidean(4);
        let p = [0.1, 0.2, -0.3, 0.4];
        let fs = associated_f_structure(&example2(), &g, &p, DEFAULT_RANK_TOL).unwrap();
        assert_eq!(fs.rank, 2);
        assert_eq!(fs.zero_basis.len(), 2);
        assert!(kernel_residual(&example2(), &fs, &p).unwrap() < 1e-15);
        assert!(f_holomorphy_residual(&example2(), &fs, &p).unwrap() < 1e-15);
        assert!(fs.algebra_residuals(&RMat::identity(4, 4)).max() < 1e-14);
    }

    #[test]
    fn non_phwc_is_rejected() {
        let phi = SmoothMap::new(2, vec![parse("x1").unwrap(), parse("x2").unwrap()]).unwrap();
        let r = associated_f_structure(&phi, &MetricField::euclidean(2), &[0.0, 0.0], 1e-8);
        assert!(matches!(r, Err(Error::NotPhwcAtPoint { .. })));
    }

    #[test]
    fn ambiguous_rank_is_flagged() {
        // second generator is e1 - i e2 plus a tiny independent isotropic part
        let g = RMat::identity(4, 4);
        let a = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let b = CVec::from_vec(vec![c(1.0, 0.0), c(0.0, -1.0), c(3e-9, 0.0), c(0.0, -3e-9)]);
        let r = FStructurePoint::from_generators(&g, &[a, b], 1e-8);
        assert!(matches!(r, Err(Error::RankDeficiencyAmbiguous { .. })));
    }

    #[test]
    fn round_trip_recovers_generators() {
        let g = MetricField::conformal(2, parse("0.3*x1 - x2").unwrap());
        let p = [0.4, 0.1];
        let metric = g.at(&p).unwrap();
        let phi = example1();
        let generators = plus_generators(&phi, &metric, &p).unwrap();
        let fs = FStructurePoint::from_generators(&metric.g, &generators, 1e-8).unwrap();
        assert!(fs.algebra_residuals(&metric.g).max() < 1e-12);
        let rt = round_trip(&fs, &metric.g, &generators);
        assert_eq!(rt.dim, 1);
        assert!(rt.isotropy < 1e-12);
        assert!(rt.angle_sine < 1e-12);
    }

    #[test]
    fn constant_structures_are_integrable_and_parallel() {
        let std4 = FixedField::standard(MetricField::euclidean(4), 2);
        let p = [0.3, -0.2, 0.5, 1.0];
        assert!(nijenhuis_residual(&std4, &p, 1e-4).unwrap() < 1e-12);
        assert!(parallel_residual(&std4, &p, 1e-4).unwrap() < 1e-12);
        assert!(domega_12_residual(&std4, &p, 1e-4).unwrap() < 1e-12);
        assert_eq!(met_residual(&std4, &p, 1e-4).unwrap(), 0.0);
        let ex2 = AssociatedField::new(example2(), MetricField::euclidean(4));
        assert!(parallel_residual(&ex2, &p, 1e-4).unwrap() < 1e-12);
        assert!(domega_12_residual(&ex2, &p, 1e-4).unwrap() < 1e-12);
        assert!(met_residual(&ex2, &p, 1e-4).unwrap() < 1e-12);
    }

    #[test]
    fn conformal_two_form() {
        let g = MetricField::conformal(2, Expr::var(0));
        let field = AssociatedField::new(example1(), g);
        let p = [0.3, -0.5];
        let form = fundamental_two_form(&field, &p, 1e-4).unwrap();
        // omega_12 = g_11 F^1_2 = -e^{2 x1}
        assert!((form.omega[(0, 1)] + (0.6f64).exp()).abs() < 1e-13);
        assert!((form.omega[(1, 0)] - (0.6f64).exp()).abs() < 1e-13);
        assert!(form.domega_max_abs() < 1e-12);
        // F itself is constant up to rounding, and a conformal structure on a
        // surface is Kaehler
        let n = nijenhuis_residual(&field, &p, 1e-4).unwrap();
        let par = parallel_residual(&field, &p, 1e-4).unwrap();
        assert!(n < 1e-10 && par < 1e-10, "{n} {par}");
    }

    #[test]
    fn met_on_block_metrics() {
        // F acts on (x1, x2); T0 = span(d3, d4)
        let p = [0.2, -0.1, 0.4, 0.3];
        let product = MetricField::diagonal(vec![
            Expr::real(1.0),
            Expr::real(1.0),
            parse("exp(2*x3)").unwrap(),
            parse("exp(2*x3)").unwrap(),
        ]);
        let field = FixedField::standard(product, 1);
        assert!(met_residual(&field, &p, 1e-4).unwrap() < 1e-9);
        // T0 block depending on a T- direction violates the condition; in
        // adapted coordinates the obstruction is d g_33 / dzbar = e^{2 x1}
        let twisted = MetricField::diagonal(vec![
            Expr::real(1.0),
            Expr::real(1.0),
            parse("exp(2*x1)").unwrap(),
            parse("exp(2*x1)").unwrap(),
        ]);
        let field = FixedField::standard(twisted, 1);
        let r = met_residual(&field, &p, 1e-4).unwrap();
        assert!(r > 0.1, "{r}");
    }

    #[test]
    fn rank_jump_is_reported() {
        // z^2 is critical at the origin
        let phi = SmoothMap::new(2, vec![parse("(x1 + i*x2)^2").unwrap()]).unwrap();
        let field = AssociatedField::new(phi, MetricField::euclidean(2));
        let r = nijenhuis_residual(&field, &[0.0, 0.0], 1e-3);
        assert_eq!(
            r,
            Err(Error::RankJumpOnStencil {
                center: 0,
                neighbour: 2
            })
        );
    }
}
