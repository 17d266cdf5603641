use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Expression tree over complex literals and real variables `x1..xm`.
///
/// Variables are stored zero-based; `Var(0)` prints as `x1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    Exp(Box<Expr>),
    Conj(Box<Expr>),
    Re(Box<Expr>),
    Im(Box<Expr>),
}

impl Expr {
    pub fn real(v: f64) -> Self {
        Expr::Const(Complex64::new(v, 0.0))
    }

    pub fn complex(re: f64, im: f64) -> Self {
        Expr::Const(Complex64::new(re, im))
    }

    pub fn constant(c: Complex64) -> Self {
        Expr::Const(c)
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Expr::complex(0.0, 1.0)
    }

    /// Zero-based variable.
    pub fn var(index: usize) -> Self {
        Expr::Var(index)
    }

    /// `x_{2a} + i x_{2a+1}`: the a-th complex coordinate of a chart whose real
    /// variables are ordered `(re z1, im z1, re z2, im z2, ...)`.
    pub fn complex_coordinate(a: usize) -> Self {
        Expr::var(2 * a) + Expr::i() * Expr::var(2 * a + 1)
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Expr::real(1.0),
            1 => self,
            _ if self.is_zero() && n > 0 => Expr::real(0.0),
            _ => Expr::Pow(Box::new(self), n),
        }
    }

    pub fn sin(self) -> Self {
        Expr::Sin(Box::new(self))
    }

    pub fn cos(self) -> Self {
        Expr::Cos(Box::new(self))
    }

    pub fn exp(self) -> Self {
        Expr::Exp(Box::new(self))
    }

    pub fn conj(self) -> Self {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Var(_) => self,
            other => Expr::Conj(Box::new(other)),
        }
    }

    pub fn re(self) -> Self {
        match self {
            Expr::Const(c) => Expr::real(c.re),
            Expr::Var(_) => self,
            other => Expr::Re(Box::new(other)),
        }
    }

    pub fn im(self) -> Self {
        match self {
            Expr::Const(c) => Expr::real(c.im),
            Expr::Var(_) => Expr::real(0.0),
            other => Expr::Im(Box::new(other)),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(0.0, 0.0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if *c == Complex64::new(1.0, 0.0))
    }

    /// Number of real variables the expression needs (largest index + 1).
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.arity().max(b.arity())
            }
            Expr::Neg(a)
            | Expr::Pow(a, _)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Conj(a)
            | Expr::Re(a)
            | Expr::Im(a) => a.arity(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.arity() == 0
    }

    /// Replaces every `Var(i)` with `vars[i]`.
    ///
    /// Panics if the expression references a variable beyond `vars`; callers
    /// check arity first.
    pub fn substitute(&self, vars: &[Expr]) -> Expr {
        let sub = |e: &Expr| Box::new(e.substitute(vars));
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(i) => vars[*i].clone(),
            Expr::Add(a, b) => Expr::Add(sub(a), sub(b)),
            Expr::Sub(a, b) => Expr::Sub(sub(a), sub(b)),
            Expr::Mul(a, b) => Expr::Mul(sub(a), sub(b)),
            Expr::Div(a, b) => Expr::Div(sub(a), sub(b)),
            Expr::Neg(a) => Expr::Neg(sub(a)),
            Expr::Pow(a, n) => Expr::Pow(sub(a), *n),
            Expr::Sin(a) => Expr::Sin(sub(a)),
            Expr::Cos(a) => Expr::Cos(sub(a)),
            Expr::Exp(a) => Expr::Exp(sub(a)),
            Expr::Conj(a) => Expr::Conj(sub(a)),
            Expr::Re(a) => Expr::Re(sub(a)),
            Expr::Im(a) => Expr::Im(sub(a)),
        }
    }

    /// Symbolic partial derivative with respect to the real variable `var`.
    ///
    /// Only zero and one factors are pruned; no further simplification.
    pub fn diff(&self, var: usize) -> Expr {
        match self {
            Expr::Const(_) => Expr::real(0.0),
            Expr::Var(i) => Expr::real(if *i == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => a.diff(var) + b.diff(var),
            Expr::Sub(a, b) => a.diff(var) - b.diff(var),
            Expr::Mul(a, b) => a.diff(var) * (**b).clone() + (**a).clone() * b.diff(var),
            Expr::Div(a, b) => {
                let num = a.diff(var) * (**b).clone() - (**a).clone() * b.diff(var);
                if num.is_zero() {
                    num
                } else {
                    num / (**b).clone().powi(2)
                }
            }
            Expr::Neg(a) => -a.diff(var),
            Expr::Pow(a, n) => Expr::real(f64::from(*n)) * (**a).clone().powi(n - 1) * a.diff(var),
            Expr::Sin(a) => (**a).clone().cos() * a.diff(var),
            Expr::Cos(a) => -((**a).clone().sin() * a.diff(var)),
            Expr::Exp(a) => self.clone() * a.diff(var),
            Expr::Conj(a) => a.diff(var).conj(),
            Expr::Re(a) => a.diff(var).re(),
            Expr::Im(a) => a.diff(var).im(),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Expr::Neg(a)
            | Expr::Pow(a, _)
            | Expr::Sin(a)
            | Expr::Cos(a)
            | Expr::Exp(a)
            | Expr::Conj(a)
            | Expr::Re(a)
            | Expr::Im(a) => 1 + a.size(),
        }
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::real(v)
    }
}

impl From<Complex64> for Expr {
    fn from(c: Complex64) -> Self {
        Expr::Const(c)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            rhs
        } else if rhs.is_zero() {
            self
        } else {
            Expr::Add(Box::new(self), Box::new(rhs))
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_zero() {
            self
        } else if self.is_zero() {
            -rhs
        } else {
            Expr::Sub(Box::new(self), Box::new(rhs))
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            Expr::real(0.0)
        } else if self.is_one() {
            rhs
        } else if rhs.is_one() {
            self
        } else {
            Expr::Mul(Box::new(self), Box::new(rhs))
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        if rhs.is_one() {
            self
        } else {
            Expr::Div(Box::new(self), Box::new(rhs))
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Neg(inner) => *inner,
            other => Expr::Neg(Box::new(other)),
        }
    }
}

fn fmt_real(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

/// Prints in the grammar accepted by [`crate::jet::parse`], fully
/// parenthesised so that re-parsing reproduces the same tree shape.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.im == 0.0 {
                    fmt_real(c.re, f)
                } else {
                    write!(f, "(")?;
                    fmt_real(c.re, f)?;
                    write!(f, "+")?;
                    fmt_real(c.im, f)?;
                    write!(f, "*i)")
                }
            }
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Pow(a, n) => write!(f, "({a})^{n}"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Conj(a) => write!(f, "conj({a})"),
            Expr::Re(a) => write!(f, "re({a})"),
            Expr::Im(a) => write!(f, "im({a})"),
        }
    }
}
