//! Second-order forward-mode differentiation of complex-valued expressions
//! in real variables.
//!
//! A [`Jet2`] carries the value, gradient and Hessian of an expression at a
//! point. Every derivative used elsewhere in the crate (map differentials,
//! metric derivatives, Wirtinger derivatives) is read off a `Jet2`.

mod expr;
mod parse;

pub use expr::Expr;
pub use parse::parse;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Division (and negative power) guard: operands of smaller modulus are
/// rejected instead of producing infinities.
pub const DIV_EPS: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Value, gradient and Hessian of a scalar expression at a point.
///
/// The Hessian is stored row-major and is filled from its upper triangle,
/// so `hess(i, j) == hess(j, i)` holds bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet2 {
    pub value: Complex64,
    pub grad: Vec<Complex64>,
    hess: Vec<Complex64>,
}

impl Jet2 {
    pub fn constant(value: Complex64, dim: usize) -> Self {
        Jet2 {
            value,
            grad: vec![ZERO; dim],
            hess: vec![ZERO; dim * dim],
        }
    }

    /// Seed for the real variable `index` taking value `at`.
    pub fn variable(index: usize, at: f64, dim: usize) -> Self {
        let mut j = Jet2::constant(Complex64::new(at, 0.0), dim);
        j.grad[index] = ONE;
        j
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn hess(&self, i: usize, j: usize) -> Complex64 {
        self.hess[i * self.dim() + j]
    }

    /// Row-major Hessian.
    pub fn hessian(&self) -> &[Complex64] {
        &self.hess
    }

    fn symmetric(dim: usize, mut entry: impl FnMut(usize, usize) -> Complex64) -> Vec<Complex64> {
        let mut h = vec![ZERO; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = entry(i, j);
                h[i * dim + j] = v;
                h[j * dim + i] = v;
            }
        }
        h
    }

    /// Applies a scalar function given its value and first two derivatives
    /// at `self.value`.
    fn chain(&self, f0: Complex64, f1: Complex64, f2: Complex64) -> Jet2 {
        let n = self.dim();
        let g = &self.grad;
        Jet2 {
            value: f0,
            grad: g.iter().map(|gi| f1 * gi).collect(),
            hess: Self::symmetric(n, |i, j| f1 * self.hess[i * n + j] + f2 * g[i] * g[j]),
        }
    }

    fn zip(&self, other: &Jet2, op: impl Fn(Complex64, Complex64) -> Complex64) -> Jet2 {
        let n = self.dim();
        Jet2 {
            value: op(self.value, other.value),
            grad: self
                .grad
                .iter()
                .zip(&other.grad)
                .map(|(a, b)| op(*a, *b))
                .collect(),
            hess: Self::symmetric(n, |i, j| op(self.hess[i * n + j], other.hess[i * n + j])),
        }
    }

    pub fn add(&self, other: &Jet2) -> Jet2 {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Jet2) -> Jet2 {
        self.zip(other, |a, b| a - b)
    }

    pub fn neg(&self) -> Jet2 {
        self.scale(-ONE)
    }

    pub fn scale(&self, c: Complex64) -> Jet2 {
        Jet2 {
            value: c * self.value,
            grad: self.grad.iter().map(|g| c * g).collect(),
            hess: self.hess.iter().map(|h| c * h).collect(),
        }
    }

    pub fn mul(&self, other: &Jet2) -> Jet2 {
        let n = self.dim();
        let (a, b) = (self, other);
        Jet2 {
            value: a.value * b.value,
            grad: a
                .grad
                .iter()
                .zip(&b.grad)
                .map(|(ga, gb)| ga * b.value + a.value * gb)
                .collect(),
            hess: Self::symmetric(n, |i, j| {
                a.hess[i * n + j] * b.value
                    + a.value * b.hess[i * n + j]
                    + a.grad[i] * b.grad[j]
                    + a.grad[j] * b.grad[i]
            }),
        }
    }

    pub fn recip(&self) -> Result<Jet2> {
        let u = self.value;
        if u.norm() < DIV_EPS {
            return Err(Error::DivisionNearZero { modulus: u.norm() });
        }
        let r = u.inv();
        Ok(self.chain(r, -r * r, 2.0 * r * r * r))
    }

    pub fn div(&self, other: &Jet2) -> Result<Jet2> {
        Ok(self.mul(&other.recip()?))
    }

    pub fn powi(&self, n: i32) -> Result<Jet2> {
        let u = self.value;
        match n {
            0 => return Ok(Jet2::constant(ONE, self.dim())),
            1 => return Ok(self.clone()),
            _ => {}
        }
        if n < 0 && u.norm() < DIV_EPS {
            return Err(Error::DivisionNearZero { modulus: u.norm() });
        }
        let nf = f64::from(n);
        let (f0, f1, f2) = if n >= 2 {
            let low = u.powi(n - 2);
            (low * u * u, nf * low * u, nf * (nf - 1.0) * low)
        } else {
            let p = u.powi(n);
            let r = u.inv();
            (p, nf * p * r, nf * (nf - 1.0) * p * r * r)
        };
        Ok(self.chain(f0, f1, f2))
    }

    pub fn sin(&self) -> Jet2 {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(&self) -> Jet2 {
        let (s, c) = (self.value.sin(), self.value.cos());
        self.chain(c, -s, -c)
    }

    pub fn exp(&self) -> Jet2 {
        let e = self.value.exp();
        self.chain(e, e, e)
    }

    /// Componentwise conjugate. Derivatives are taken in real variables, so
    /// conjugation commutes with them.
    pub fn conj(&self) -> Jet2 {
        self.map(|c| c.conj())
    }

    pub fn re(&self) -> Jet2 {
        self.map(|c| Complex64::new(c.re, 0.0))
    }

    pub fn im(&self) -> Jet2 {
        self.map(|c| Complex64::new(c.im, 0.0))
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Jet2 {
        Jet2 {
            value: f(self.value),
            grad: self.grad.iter().map(|g| f(*g)).collect(),
            hess: self.hess.iter().map(|h| f(*h)).collect(),
        }
    }

    /// Largest modulus over value, gradient and Hessian.
    pub fn max_abs(&self) -> f64 {
        std::iter::once(&self.value)
            .chain(&self.grad)
            .chain(&self.hess)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Componentwise complex conjugate of a jet.
pub fn conj_jet(j: &Jet2) -> Jet2 {
    j.conj()
}

fn check_arity(e: &Expr, dim: usize) -> Result<()> {
    let arity = e.arity();
    if arity > dim {
        return Err(Error::VariableIndexOutOfRange {
            index: arity - 1,
            dim,
        });
    }
    Ok(())
}

/// Evaluates `e` together with its exact first and second partial
/// derivatives at `p`.
pub fn eval_jet2(e: &Expr, p: &[f64]) -> Result<Jet2> {
    check_arity(e, p.len())?;
    jet_rec(e, p)
}

fn jet_rec(e: &Expr, p: &[f64]) -> Result<Jet2> {
    let dim = p.len();
    Ok(match e {
        Expr::Const(c) => Jet2::constant(*c, dim),
        Expr::Var(i) => Jet2::variable(*i, p[*i], dim),
        Expr::Add(a, b) => jet_rec(a, p)?.add(&jet_rec(b, p)?),
        Expr::Sub(a, b) => jet_rec(a, p)?.sub(&jet_rec(b, p)?),
        Expr::Mul(a, b) => jet_rec(a, p)?.mul(&jet_rec(b, p)?),
        Expr::Div(a, b) => jet_rec(a, p)?.div(&jet_rec(b, p)?)?,
        Expr::Neg(a) => jet_rec(a, p)?.neg(),
        Expr::Pow(a, n) => jet_rec(a, p)?.powi(*n)?,
        Expr::Sin(a) => jet_rec(a, p)?.sin(),
        Expr::Cos(a) => jet_rec(a, p)?.cos(),
        Expr::Exp(a) => jet_rec(a, p)?.exp(),
        Expr::Conj(a) => jet_rec(a, p)?.conj(),
        Expr::Re(a) => jet_rec(a, p)?.re(),
        Expr::Im(a) => jet_rec(a, p)?.im(),
    })
}

/// Value-only evaluation with the same guards as [`eval_jet2`].
pub fn eval(e: &Expr, p: &[f64]) -> Result<Complex64> {
    check_arity(e, p.len())?;
    value_rec(e, p)
}

fn guard(u: Complex64) -> Result<Complex64> {
    if u.norm() < DIV_EPS {
        Err(Error::DivisionNearZero { modulus: u.norm() })
    } else {
        Ok(u)
    }
}

fn value_rec(e: &Expr, p: &[f64]) -> Result<Complex64> {
    Ok(match e {
        Expr::Const(c) => *c,
        Expr::Var(i) => Complex64::new(p[*i], 0.0),
        Expr::Add(a, b) => value_rec(a, p)? + value_rec(b, p)?,
        Expr::Sub(a, b) => value_rec(a, p)? - value_rec(b, p)?,
        Expr::Mul(a, b) => value_rec(a, p)? * value_rec(b, p)?,
        Expr::Div(a, b) => value_rec(a, p)? / guard(value_rec(b, p)?)?,
        Expr::Neg(a) => -value_rec(a, p)?,
        Expr::Pow(a, n) => {
            let u = value_rec(a, p)?;
            if *n < 0 {
                guard(u)?.powi(*n)
            } else {
                u.powi(*n)
            }
        }
        Expr::Sin(a) => value_rec(a, p)?.sin(),
        Expr::Cos(a) => value_rec(a, p)?.cos(),
        Expr::Exp(a) => value_rec(a, p)?.exp(),
        Expr::Conj(a) => value_rec(a, p)?.conj(),
        Expr::Re(a) => Complex64::new(value_rec(a, p)?.re, 0.0),
        Expr::Im(a) => Complex64::new(value_rec(a, p)?.im, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn product_of_variables() {
        let e = Expr::var(0) * Expr::var(1);
        let j = eval_jet2(&e, &[3.0, 5.0]).unwrap();
        assert_eq!(j.value, c(15.0, 0.0));
        assert_eq!(j.grad, vec![c(5.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(j.hess(0, 1), c(1.0, 0.0));
        assert_eq!(j.hess(1, 0), c(1.0, 0.0));
        assert_eq!(j.hess(0, 0), c(0.0, 0.0));
    }

    #[test]
    fn complex_coordinate_has_gradient_one_i() {
        let e = Expr::complex_coordinate(0);
        let j = eval_jet2(&e, &[0.3, -1.7]).unwrap();
        assert_eq!(j.value, c(0.3, -1.7));
        assert_eq!(j.grad, vec![c(1.0, 0.0), c(0.0, 1.0)]);
        assert!(j.hessian().iter().all(|h| *h == c(0.0, 0.0)));
    }

    #[test]
    fn conjugation() {
        let j = eval_jet2(&Expr::complex_coordinate(0), &[1.0, 2.0]).unwrap();
        let cj = conj_jet(&j);
        assert_eq!(cj.grad, vec![c(1.0, 0.0), c(0.0, -1.0)]);
        assert_eq!(conj_jet(&cj), j);

        let real = Expr::var(0) * Expr::var(1).sin();
        let rj = eval_jet2(&real, &[0.4, 0.9]).unwrap();
        assert_eq!(conj_jet(&rj), rj);
    }

    #[test]
    fn division_guard() {
        let e = Expr::real(1.0) / Expr::var(0);
        assert!(matches!(
            eval_jet2(&e, &[0.0]),
            Err(Error::DivisionNearZero { .. })
        ));
        assert!(matches!(
            eval(&e, &[1e-13]),
            Err(Error::DivisionNearZero { .. })
        ));
        let neg_pow = Expr::var(0).powi(-2);
        assert!(eval_jet2(&neg_pow, &[0.0]).is_err());
        let j = eval_jet2(&neg_pow, &[2.0]).unwrap();
        assert!((j.value - c(0.25, 0.0)).norm() < 1e-15);
        assert!((j.grad[0] - c(-0.25, 0.0)).norm() < 1e-15);
        assert!((j.hess(0, 0) - c(6.0 / 16.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn power_at_zero_is_finite() {
        for n in 0..5 {
            let j = eval_jet2(&Expr::var(0).powi(n), &[0.0]).unwrap();
            assert!(j.max_abs().is_finite(), "n = {n}");
        }
        let j = eval_jet2(&Expr::Pow(Box::new(Expr::var(0)), 2), &[0.0]).unwrap();
        assert_eq!(j.hess(0, 0), c(2.0, 0.0));
    }

    #[test]
    fn variable_out_of_range() {
        let e = Expr::var(2);
        assert_eq!(
            eval_jet2(&e, &[1.0, 2.0]),
            Err(Error::VariableIndexOutOfRange { index: 2, dim: 2 })
        );
    }

    #[test]
    fn real_tree_has_no_imaginary_parts() {
        let e = (Expr::var(0) * Expr::var(1)).exp() / (Expr::real(2.0) + Expr::var(0).cos());
        let j = eval_jet2(&e, &[0.3, 0.7]).unwrap();
        assert_eq!(j.value.im, 0.0);
        assert!(j.grad.iter().all(|g| g.im == 0.0));
        assert!(j.hessian().iter().all(|h| h.im == 0.0));
    }

    #[test]
    fn symbolic_diff_agrees_with_jet() {
        let e = (Expr::var(0) * Expr::var(1)).sin() * Expr::var(0).powi(3)
            / (Expr::real(2.0) + Expr::var(1).conj().cos());
        let p = [0.4, -0.8];
        let j = eval_jet2(&e, &p).unwrap();
        for k in 0..2 {
            let d = eval(&e.diff(k), &p).unwrap();
            assert!((d - j.grad[k]).norm() < 1e-13);
            for l in 0..2 {
                let dd = eval(&e.diff(k).diff(l), &p).unwrap();
                assert!((dd - j.hess(k, l)).norm() < 1e-12);
            }
        }
    }
}
