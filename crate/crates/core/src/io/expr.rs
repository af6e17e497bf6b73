//! A small expression language for bracket coefficients.
//!
//! Grammar: `+ - * / ^`, parentheses, numbers, `pi`, `theta` (or `θ`),
//! variables `x1 … xn` and the functions `cos sin exp log sqrt abs`.
//! Functions, divisors and real powers apply pointwise to subexpressions that
//! depend on `θ` only; polynomial powers of series need integer exponents.

use crate::error::{Error, Result};
use crate::periodic::PeriodicFn;
use crate::series::FormalSeries;

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text
                .parse()
                .map_err(|_| Error::Schema(format!("bad number '{text}' in '{src}'")))?;
            out.push(Token::Num(v));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^(),".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else {
            return Err(Error::Schema(format!("unexpected character '{c}' in '{src}'")));
        }
    }
    Ok(out)
}

/// Context in which expressions are evaluated.
#[derive(Clone, Copy, Debug)]
pub struct ExprContext {
    pub nvars: usize,
    pub order: usize,
    pub grid: usize,
}

impl ExprContext {
    fn constant(&self, c: PeriodicFn) -> FormalSeries {
        FormalSeries::constant(self.nvars, self.order, c)
    }

    fn scalar(&self, v: f64) -> FormalSeries {
        self.constant(PeriodicFn::constant(self.grid, v))
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    src: &'a str,
    ctx: ExprContext,
}

fn theta_only(s: &FormalSeries) -> Option<PeriodicFn> {
    s.terms()
        .all(|(p, _)| p.degree() == 0)
        .then(|| s.constant_term())
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Schema(format!("{msg} in '{}'", self.src))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<FormalSeries> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.try_add(&self.term()?)?;
            } else if self.eat('-') {
                acc = acc.try_sub(&self.term()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<FormalSeries> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.try_mul(&self.unary()?)?;
            } else if self.eat('/') {
                let d = self.unary()?;
                let d = theta_only(&d).ok_or_else(|| self.err("divisor depends on x"))?;
                acc = acc.mul_fn(&d.reciprocal()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<FormalSeries> {
        if self.eat('-') {
            Ok(self.unary()?.scale(-1.0))
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<FormalSeries> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let exp = self.unary()?;
        let exp = theta_only(&exp).ok_or_else(|| self.err("exponent depends on x"))?;
        if let Some(b) = theta_only(&base) {
            return Ok(self.ctx.constant(b.zip_with(&exp, f64::powf)));
        }
        let e = exp.samples()[0];
        if exp.variation() != 0.0 || e < 0.0 || e.fract() != 0.0 {
            return Err(self.err("series powers need a non-negative integer exponent"));
        }
        let mut acc = self.ctx.scalar(1.0);
        for _ in 0..e as usize {
            acc = acc.try_mul(&base)?;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<FormalSeries> {
        let tok = self.peek().cloned().ok_or_else(|| self.err("unexpected end"))?;
        self.pos += 1;
        match tok {
            Token::Num(v) => Ok(self.ctx.scalar(v)),
            Token::Op('(') => {
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("missing ')'"));
                }
                Ok(v)
            }
            Token::Op(c) => Err(self.err(&format!("unexpected '{c}'"))),
            Token::Ident(name) => self.ident(&name),
        }
    }

    fn ident(&mut self, name: &str) -> Result<FormalSeries> {
        match name {
            "pi" | "π" => return Ok(self.ctx.scalar(std::f64::consts::PI)),
            "theta" | "θ" => {
                return Ok(self.ctx.constant(PeriodicFn::from_fn(self.ctx.grid, |t| t)));
            }
            _ => {}
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            if idx == 0 || idx > self.ctx.nvars {
                return Err(self.err(&format!("variable {name} outside x1..x{}", self.ctx.nvars)));
            }
            return Ok(FormalSeries::variable(self.ctx.nvars, self.ctx.order, self.ctx.grid, idx - 1));
        }
        let f: fn(f64) -> f64 = match name {
            "cos" => f64::cos,
            "sin" => f64::sin,
            "exp" => f64::exp,
            "log" | "ln" => f64::ln,
            "sqrt" => f64::sqrt,
            "abs" => f64::abs,
            _ => return Err(self.err(&format!("unknown name '{name}'"))),
        };
        if !self.eat('(') {
            return Err(self.err(&format!("'{name}' needs an argument")));
        }
        let arg = self.expr()?;
        if !self.eat(')') {
            return Err(self.err("missing ')'"));
        }
        let arg = theta_only(&arg).ok_or_else(|| self.err(&format!("argument of {name} depends on x")))?;
        let v = arg.map(f);
        if let Some(k) = v.samples().iter().position(|s| !s.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(self.ctx.constant(v))
    }
}

/// Parses and evaluates an expression as a truncated series.
///
/// `θ`-dependent parts are sampled on the grid, so `theta` itself is the
/// sawtooth `θ ∈ [0, 2π)`; only periodic combinations of it are meaningful.
pub fn parse_expression(src: &str, ctx: ExprContext) -> Result<FormalSeries> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(Error::Schema("empty expression".into()));
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        src,
        ctx,
    };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(p.err("trailing input"));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::nodes;
    use crate::series::MultiIndex;

    const CTX: ExprContext = ExprContext {
        nvars: 2,
        order: 3,
        grid: 32,
    };

    fn coeff(s: &FormalSeries, e: &[u32]) -> Vec<f64> {
        s.coeff_or_zero(&MultiIndex::from_exponents(e)).samples().to_vec()
    }

    #[test]
    fn constants_and_precedence() {
        let s = parse_expression("1 + 2*3^2 - -4/2", CTX).unwrap();
        assert!(coeff(&s, &[0, 0]).iter().all(|&v| v == 21.0));
        let s = parse_expression("-2^2", CTX).unwrap();
        assert_eq!(coeff(&s, &[0, 0])[0], -4.0);
        let s = parse_expression("2^3^2", CTX).unwrap();
        assert_eq!(coeff(&s, &[0, 0])[0], 512.0);
        let s = parse_expression("1.5e1 + sqrt(2)^2 + pi", CTX).unwrap();
        assert!((coeff(&s, &[0, 0])[0] - 17.0 - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn trig_coefficients() {
        let s = parse_expression("sin(3*theta)*x1 + x1*x2*cos(θ)^2", CTX).unwrap();
        for (t, v) in nodes(32).zip(coeff(&s, &[1, 0])) {
            assert!((v - (3.0 * t).sin()).abs() < 1e-14);
        }
        for (t, v) in nodes(32).zip(coeff(&s, &[1, 1])) {
            assert!((v - t.cos().powi(2)).abs() < 1e-14);
        }
    }

    #[test]
    fn polynomial_powers_truncate() {
        let s = parse_expression("(x1 + x2)^2 / 2", CTX).unwrap();
        assert_eq!(coeff(&s, &[1, 1])[0], 1.0);
        assert_eq!(coeff(&s, &[2, 0])[0], 0.5);
        let s = parse_expression("x1^5", CTX).unwrap();
        assert_eq!(s.max_coeff(), 0.0);
    }

    #[test]
    fn rejections() {
        for bad in ["", "x3", "x0", "1/x1", "cos(x1)", "x1^0.5", "2 x1", "foo", "(1", "1)", "sin 1", "3 $"] {
            assert!(
                matches!(parse_expression(bad, CTX), Err(Error::Schema(_))),
                "accepted '{bad}'"
            );
        }
        assert!(parse_expression("1/(cos(theta)-cos(theta))", CTX).is_err());
    }
}
