//! Recursive-descent parser for the expression text grammar:
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := unary (('*'|'/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' '-'? int)?
//! base   := number | 'i' | 'x' int | func '(' expr ')' | '(' expr ')'
//! func   := sin | cos | exp | conj | re | im
//! ```
//!
//! Columns in errors are 1-based character positions.

use num_complex::Complex64;

use super::Expr;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn err(column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        column,
        message: message.into(),
    }
}

impl Lexer {
    fn new(text: &str) -> Result<Self> {
        let chars: Vec<char> = text.chars().collect();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let ch = chars[i];
            let col = i + 1;
            if ch.is_whitespace() {
                i += 1;
                continue;
            }
            let single = match ch {
                '+' => Some(Tok::Plus),
                '-' => Some(Tok::Minus),
                '*' => Some(Tok::Star),
                '/' => Some(Tok::Slash),
                '^' => Some(Tok::Caret),
                '(' => Some(Tok::LParen),
                ')' => Some(Tok::RParen),
                _ => None,
            };
            if let Some(t) = single {
                toks.push((t, col));
                i += 1;
            } else if ch.is_ascii_digit() || ch == '.' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent only when followed by a digit (or sign and digit)
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut k = i + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        i = k;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let v: f64 = s
                    .parse()
                    .map_err(|_| err(col, format!("malformed number `{s}`")))?;
                toks.push((Tok::Num(v), col));
            } else if ch.is_ascii_alphabetic() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                toks.push((Tok::Ident(chars[start..i].iter().collect()), col));
            } else {
                return Err(err(col, format!("unexpected character `{ch}`")));
            }
        }
        toks.push((Tok::End, chars.len() + 1));
        Ok(Lexer { toks })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(err(self.col(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = fold(Expr::Add(Box::new(lhs), Box::new(self.term()?)));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = fold(Expr::Sub(Box::new(lhs), Box::new(self.term()?)));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = fold(Expr::Mul(Box::new(lhs), Box::new(self.unary()?)));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(fold(Expr::Neg(Box::new(self.unary()?))));
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let col = self.col();
        match self.bump() {
            Tok::Num(v) if v.fract() == 0.0 && v.abs() <= f64::from(i32::MAX) => {
                let n = v as i32;
                Ok(Expr::Pow(Box::new(base), if negative { -n } else { n }))
            }
            _ => Err(err(col, "expected integer exponent")),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let col = self.col();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::real(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(&name, col),
            Tok::End => Err(err(col, "unexpected end of expression")),
            t => Err(err(col, format!("unexpected `{}`", describe(&t)))),
        }
    }

    fn ident(&mut self, name: &str, col: usize) -> Result<Expr> {
        if name == "i" {
            return Ok(Expr::Const(Complex64::new(0.0, 1.0)));
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit()) {
                let k: usize = digits
                    .parse()
                    .map_err(|_| err(col, "variable index too large"))?;
                if k == 0 {
                    return Err(err(col, "variables are numbered from x1"));
                }
                return Ok(Expr::Var(k - 1));
            }
        }
        let wrap: fn(Box<Expr>) -> Expr = match name {
            "sin" => Expr::Sin,
            "cos" => Expr::Cos,
            "exp" => Expr::Exp,
            "conj" => Expr::Conj,
            "re" => Expr::Re,
            "im" => Expr::Im,
            _ => return Err(err(col, format!("unknown identifier `{name}`"))),
        };
        self.expect(Tok::LParen, "`(` after function name")?;
        let arg = self.expr()?;
        self.expect(Tok::RParen, "`)`")?;
        Ok(wrap(Box::new(arg)))
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => v.to_string(),
        Tok::Ident(s) => s.clone(),
        Tok::Plus => "+".into(),
        Tok::Minus => "-".into(),
        Tok::Star => "*".into(),
        Tok::Slash => "/".into(),
        Tok::Caret => "^".into(),
        Tok::LParen => "(".into(),
        Tok::RParen => ")".into(),
        Tok::End => "end of input".into(),
    }
}

/// Parses expression text into an [`Expr`].
pub fn parse(text: &str) -> Result<Expr> {
    let lexer = Lexer::new(text)?;
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(err(
            p.col(),
            format!("unexpected `{}` after expression", describe(p.peek())),
        ));
    }
    Ok(e)
}

/// Collapses `+`, `-`, `*` and negation of literal constants so that printed
/// complex constants read back as single constants.
fn fold(e: Expr) -> Expr {
    match e {
        Expr::Add(a, b) => match (*a, *b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
            (a, b) => Expr::Add(Box::new(a), Box::new(b)),
        },
        Expr::Sub(a, b) => match (*a, *b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        },
        Expr::Mul(a, b) => match (*a, *b) {
            (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        },
        Expr::Neg(a) => match *a {
            Expr::Const(x) => Expr::Const(-x),
            a => Expr::Neg(Box::new(a)),
        },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::eval;

    fn val(text: &str, p: &[f64]) -> Complex64 {
        eval(&parse(text).unwrap(), p).unwrap()
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(val("1 + 2*3", &[]), Complex64::new(7.0, 0.0));
        assert_eq!(val("2*x1^3 - x2", &[2.0, 1.0]), Complex64::new(15.0, 0.0));
        assert_eq!(val("x1 + i*x2", &[1.0, 2.0]), Complex64::new(1.0, 2.0));
        assert_eq!(
            val("conj(x1 + i*x2)", &[1.0, 2.0]),
            Complex64::new(1.0, -2.0)
        );
        assert_eq!(val("re(i) + im(3*i)", &[]), Complex64::new(3.0, 0.0));
        assert_eq!(val("-x1^2", &[3.0]), Complex64::new(-9.0, 0.0));
        assert_eq!(val("(1 + x1)^-2", &[1.0]), Complex64::new(0.25, 0.0));
        assert_eq!(val("1.5e-1 * 2", &[]), Complex64::new(0.3, 0.0));
        assert!((val("exp(0) + sin(0) + cos(0)", &[]) - Complex64::new(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn malformed_expression_reports_column() {
        match parse("x1 + * 2") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("x0"), Err(Error::Parse { column: 1, .. })));
        assert!(matches!(parse("foo(x1)"), Err(Error::Parse { .. })));
        assert!(matches!(parse("(x1"), Err(Error::Parse { column: 4, .. })));
        assert!(matches!(
            parse("x1 ^ 1.5"),
            Err(Error::Parse { column: 6, .. })
        ));
        assert!(matches!(
            parse("x1 x2"),
            Err(Error::Parse { column: 4, .. })
        ));
        assert!(matches!(parse(""), Err(Error::Parse { .. })));
        assert!(matches!(
            parse("x1 $ 2"),
            Err(Error::Parse { column: 4, .. })
        ));
    }

    #[test]
    fn display_round_trips() {
        let texts = [
            "x1*x2 - (3 + x3)/exp(x1)",
            "conj(x1 + i*x2)^3 - re(sin(x2))*im(cos(x1))",
            "(-2.5) * x1^-2 + 1e-7",
        ];
        let p = [0.7, -1.3, 0.2];
        for t in texts {
            let e = parse(t).unwrap();
            let printed = e.to_string();
            let again = parse(&printed).unwrap();
            // printing is idempotent once parsed
            assert_eq!(again.to_string(), printed, "{t}");
            assert_eq!(eval(&e, &p).unwrap(), eval(&again, &p).unwrap(), "{t}");
        }
        let built = Expr::complex(-1.5, 0.25) * Expr::var(0) - Expr::real(-3.0);
        let again = parse(&built.to_string()).unwrap();
        assert_eq!(eval(&built, &p).unwrap(), eval(&again, &p).unwrap());
    }
}
