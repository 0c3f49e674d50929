//! Infix text syntax for expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := primary ('^' ['-'] integer | '^' '(' ['-'] integer ')')?
//! primary := number | 'i' | ident | func '(' expr ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'exp' | 'conj'
//! ```
//!
//! `i` is the imaginary unit and cannot name a coordinate.

use super::coef::Coef;
use super::expr::Expr;
use super::SymError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
    End,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, SymError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut column) = (1, 1);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let (l0, c0) = (line, column);
        if c == '\n' {
            line += 1;
            column = 1;
            k += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            k += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            if k < chars.len() && (chars[k] == 'e' || chars[k] == 'E') {
                let mut j = k + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    k = j;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                }
            }
            let text: String = chars[start..k].iter().collect();
            column += k - start;
            out.push(Spanned {
                tok: Tok::Num(text),
                line: l0,
                column: c0,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = k;
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            let text: String = chars[start..k].iter().collect();
            column += k - start;
            out.push(Spanned {
                tok: Tok::Ident(text),
                line: l0,
                column: c0,
            });
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push(Spanned {
                tok: Tok::Op(c),
                line: l0,
                column: c0,
            });
            column += 1;
            k += 1;
            continue;
        }
        return Err(SymError::Parse {
            line: l0,
            column: c0,
            message: format!("unexpected character '{c}'"),
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        line,
        column,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Spanned {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, at: &Spanned, message: impl Into<String>) -> Result<T, SymError> {
        Err(SymError::Parse {
            line: at.line,
            column: at.column,
            message: message.into(),
        })
    }

    fn expect_op(&mut self, op: char) -> Result<(), SymError> {
        let t = self.bump();
        if t.tok == Tok::Op(op) {
            Ok(())
        } else {
            self.error(&t, format!("expected '{op}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr, SymError> {
        let mut terms = vec![self.term()?];
        loop {
            match self.peek().tok {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.term()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    terms.push(-self.term()?);
                }
                _ => break,
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, SymError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek().tok {
                Tok::Op('*') => {
                    self.bump();
                    acc = acc * self.unary()?;
                }
                Tok::Op('/') => {
                    let at = self.bump();
                    let rhs = self.unary()?;
                    if rhs.as_const().is_some_and(|c| c.is_zero()) {
                        return self.error(&at, "division by zero");
                    }
                    acc = acc / rhs;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, SymError> {
        match self.peek().tok {
            Tok::Op('-') => {
                self.bump();
                Ok(-self.unary()?)
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn exponent(&mut self) -> Result<i32, SymError> {
        let parenthesized = self.peek().tok == Tok::Op('(');
        if parenthesized {
            self.bump();
        }
        let negative = self.peek().tok == Tok::Op('-');
        if negative {
            self.bump();
        }
        let t = self.bump();
        let n: i32 = match &t.tok {
            Tok::Num(s) => match s.parse() {
                Ok(n) => n,
                Err(_) => return self.error(&t, "exponent must be an integer"),
            },
            _ => return self.error(&t, "exponent must be an integer"),
        };
        if parenthesized {
            self.expect_op(')')?;
        }
        Ok(if negative { -n } else { n })
    }

    fn power(&mut self) -> Result<Expr, SymError> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Op('^') {
            self.bump();
            let n = self.exponent()?;
            return Ok(base.powi(n));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, SymError> {
        let t = self.bump();
        match &t.tok {
            Tok::Num(s) => match Coef::from_decimal_str(s) {
                Some(c) => Ok(Expr::constant(c)),
                None => self.error(&t, format!("malformed number '{s}'")),
            },
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "i" => return Ok(Expr::i()),
                    "sin" | "cos" | "exp" | "conj" => Some(name.clone()),
                    _ => None,
                };
                match func {
                    Some(f) => {
                        self.expect_op('(')?;
                        let arg = self.expr()?;
                        self.expect_op(')')?;
                        Ok(match f.as_str() {
                            "sin" => arg.sin(),
                            "cos" => arg.cos(),
                            "exp" => arg.exp(),
                            _ => arg.conj(),
                        })
                    }
                    None => {
                        if self.peek().tok == Tok::Op('(') {
                            return self.error(&t, format!("unknown function '{name}'"));
                        }
                        Ok(Expr::sym(name))
                    }
                }
            }
            Tok::Op('(') => {
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Tok::End => self.error(&t, "unexpected end of input"),
            Tok::Op(c) => self.error(&t, format!("unexpected '{c}'")),
        }
    }
}

/// Parses the infix syntax described in the module docs.
pub fn parse(src: &str) -> Result<Expr, SymError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return p.error(&t, "trailing input");
    }
    Ok(e)
}
