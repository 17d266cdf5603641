//! Metric data on the domain chart `R^m` and on the Hermitian target chart
//! `C^n`.
//!
//! Target charts use real coordinates ordered `(re z1, im z1, re z2, ...)`.

mod hermitian;

pub use hermitian::{
    christoffel_kaehler, kaehler_residual, wirtinger_dz, wirtinger_dz_dzbar, wirtinger_dzbar,
    ChristoffelKaehler, ComplexChristoffel, HermitianMetricField, HermitianPoint,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::{eval_jet2, Expr, Jet2};
use crate::linalg::{spd_inverse, RMat};

pub(crate) fn check_dim(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            what,
            expected,
            found,
        })
    }
}

/// Riemannian metric `g_ij(x)` on `R^m`, symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    dim: usize,
    components: Vec<Expr>,
}

impl MetricField {
    /// From a full component matrix; the matrix must be structurally symmetric.
    pub fn new(components: Vec<Vec<Expr>>) -> Result<Self> {
        let dim = components.len();
        for row in &components {
            check_dim("metric row length", dim, row.len())?;
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                if components[i][j] != components[j][i] {
                    return Err(Error::AsymmetricMetric { row: i, col: j });
                }
            }
        }
        Ok(MetricField {
            dim,
            components: components.into_iter().flatten().collect(),
        })
    }

    /// Builds the metric from its upper triangle `entry(i, j)`, `i <= j`.
    pub fn from_upper(dim: usize, mut entry: impl FnMut(usize, usize) -> Expr) -> Self {
        let mut components = vec![Expr::real(0.0); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let e = entry(i, j);
                components[j * dim + i] = e.clone();
                components[i * dim + j] = e;
            }
        }
        MetricField { dim, components }
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::from_upper(dim, |i, j| Expr::real(if i == j { 1.0 } else { 0.0 }))
    }

    /// `e^{2 sigma} Id`.
    pub fn conformal(dim: usize, sigma: Expr) -> Self {
        let factor = (Expr::real(2.0) * sigma).exp();
        Self::from_upper(dim, |i, j| {
            if i == j {
                factor.clone()
            } else {
                Expr::real(0.0)
            }
        })
    }

    pub fn diagonal(entries: Vec<Expr>) -> Self {
        let dim = entries.len();
        Self::from_upper(dim, |i, j| {
            if i == j {
                entries[i].clone()
            } else {
                Expr::real(0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn component(&self, i: usize, j: usize) -> &Expr {
        &self.components[i * self.dim + j]
    }

    pub fn is_constant(&self) -> bool {
        self.components.iter().all(Expr::is_constant)
    }

    /// Components, inverse and first derivatives at `p`.
    pub fn at(&self, p: &[f64]) -> Result<MetricPoint> {
        check_dim("domain point", self.dim, p.len())?;
        let m = self.dim;
        let mut g = RMat::zeros(m, m);
        let mut dg = vec![RMat::zeros(m, m); m];
        for i in 0..m {
            for j in i..m {
                let jet = eval_jet2(self.component(i, j), p)?;
                if jet.value.im.abs() > 1e-12 * jet.value.re.abs().max(1.0) {
                    return Err(Error::ComplexMetricComponent {
                        row: i,
                        col: j,
                        imag: jet.value.im,
                    });
                }
                g[(i, j)] = jet.value.re;
                g[(j, i)] = jet.value.re;
                for (k, d) in dg.iter_mut().enumerate() {
                    d[(i, j)] = jet.grad[k].re;
                    d[(j, i)] = jet.grad[k].re;
                }
            }
        }
        let g_inv = spd_inverse(&g)?;
        Ok(MetricPoint { g, g_inv, dg })
    }
}

/// A metric evaluated at a point.
#[derive(Debug, Clone)]
pub struct MetricPoint {
    pub g: RMat,
    pub g_inv: RMat,
    /// `dg[k][(i, j)] = d g_ij / d x^k`.
    pub dg: Vec<RMat>,
}

impl MetricPoint {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn christoffel(&self) -> ChristoffelDomain {
        let m = self.dim();
        let mut data = vec![0.0; m * m * m];
        // lowered symbols [ij, l] = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
        for i in 0..m {
            for j in i..m {
                for k in 0..m {
                    let mut s = 0.0;
                    for l in 0..m {
                        let lowered = self.dg[i][(l, j)] + self.dg[j][(l, i)] - self.dg[l][(i, j)];
                        s += self.g_inv[(k, l)] * lowered;
                    }
                    data[(k * m + i) * m + j] = 0.5 * s;
                    data[(k * m + j) * m + i] = 0.5 * s;
                }
            }
        }
        ChristoffelDomain { dim: m, data }
    }
}

/// Levi-Civita symbols `Gamma^k_ij` of the domain metric at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelDomain {
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelDomain {
    pub fn zero(dim: usize) -> Self {
        ChristoffelDomain {
            dim,
            data: vec![0.0; dim * dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Gamma^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

pub fn christoffel_domain(g: &MetricField, p: &[f64]) -> Result<ChristoffelDomain> {
    Ok(g.at(p)?.christoffel())
}

/// `g^ij (d_i d_j f - Gamma^k_ij d_k f)` from a jet of `f`.
pub fn laplacian_of_jet(jet: &Jet2, metric: &MetricPoint, gamma: &ChristoffelDomain) -> Complex64 {
    let m = metric.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..m {
        for j in 0..m {
            let mut inner = jet.hess(i, j);
            for k in 0..m {
                inner -= jet.grad[k] * gamma.get(k, i, j);
            }
            s += inner * metric.g_inv[(i, j)];
        }
    }
    s
}

/// Laplace-Beltrami operator applied to a complex-valued function.
pub fn laplace_beltrami_complex(f: &Expr, g: &MetricField, p: &[f64]) -> Result<Complex64> {
    let metric = g.at(p)?;
    let gamma = metric.christoffel();
    let jet = eval_jet2(f, p)?;
    Ok(laplacian_of_jet(&jet, &metric, &gamma))
}

/// Laplace-Beltrami operator of a real scalar function (real part of the
/// complex result).
pub fn laplace_beltrami(f: &Expr, g: &MetricField, p: &[f64]) -> Result<f64> {
    Ok(laplace_beltrami_complex(f, g, p)?.re)
}
