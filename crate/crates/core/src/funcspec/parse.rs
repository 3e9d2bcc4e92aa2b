//! Recursive-descent parser for closed-form function expressions.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```

use super::expr::{BinOp, Expr, Func, Named, Var};
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
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut chars = src.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                let end = number_end(src, i);
                let text = &src[i..end];
                let v: f64 = text.parse().map_err(|_| Error::Syntax {
                    offset: i,
                    message: format!("malformed number `{text}`"),
                    expected: vec!["number".into()],
                })?;
                while chars.peek().is_some_and(|&(j, _)| j < end) {
                    chars.next();
                }
                out.push(Token {
                    tok: Tok::Num(v),
                    offset: i,
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i;
                while let Some(&(j, d)) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        end = j + d.len_utf8();
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    tok: Tok::Ident(src[i..end].to_string()),
                    offset: i,
                });
                continue;
            }
            other => {
                return Err(Error::Syntax {
                    offset: i,
                    message: format!("unexpected character `{other}`"),
                    expected: expected_operand(),
                })
            }
        };
        chars.next();
        out.push(Token { tok, offset: i });
    }
    out.push(Token {
        tok: Tok::Eof,
        offset: src.len(),
    });
    Ok(out)
}

fn number_end(src: &str, start: usize) -> usize {
    let bytes = src.as_bytes();
    let mut i = start;
    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
        i += 1;
    }
    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
        let mut j = i + 1;
        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
            j += 1;
        }
        if j < bytes.len() && bytes[j].is_ascii_digit() {
            while j < bytes.len() && bytes[j].is_ascii_digit() {
                j += 1;
            }
            i = j;
        }
    }
    i
}

fn expected_operand() -> Vec<String> {
    ["number", "identifier", "'('", "'-'"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, message: &str, expected: Vec<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.peek().offset,
            message: message.to_string(),
            expected,
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::raw_binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Minus {
            self.bump();
            return Ok(Expr::raw_neg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::raw_binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::num(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if self.peek().tok != Tok::LParen {
                        return self.fail(
                            &format!("function `{name}` needs an argument"),
                            vec!["'('".into()],
                        );
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::raw_call(func, arg));
                }
                match name.as_str() {
                    "x" => Ok(Expr::var(Var::X)),
                    "t" => Ok(Expr::var(Var::T)),
                    "pi" => Ok(Expr::named(Named::Pi)),
                    "l" => Ok(Expr::named(Named::L)),
                    "tau" => Ok(Expr::named(Named::Tau)),
                    _ => Err(Error::UnknownIdentifier {
                        name,
                        offset: tok.offset,
                    }),
                }
            }
            Tok::Eof => self.fail("unexpected end of input", expected_operand()),
            _ => self.fail("expected an operand", expected_operand()),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if self.peek().tok == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            let expected = vec!["')'".into(), "operator".into()];
            match self.peek().tok {
                Tok::Eof => self.fail("unclosed parenthesis", expected),
                _ => self.fail("expected `)`", expected),
            }
        }
    }
}

/// Parses `src` into an expression tree.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return p.fail(
            "unexpected trailing input",
            vec!["operator".into(), "end of input".into()],
        );
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::funcspec::expr::Env;

    fn ev(src: &str, x: f64, t: f64) -> f64 {
        parse_expr(src)
            .unwrap()
            .eval(&Env {
                x,
                t,
                l: Some(2.0),
                tau: Some(0.5),
            })
            .unwrap()
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1 + 2*3", 0.0, 0.0), 7.0);
        assert_eq!(ev("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(ev("-2^2", 0.0, 0.0), -4.0);
        assert_eq!(ev("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(ev("8/4/2", 0.0, 0.0), 1.0);
        assert_eq!(ev("5 - 3 - 1", 0.0, 0.0), 1.0);
        assert_eq!(ev("x*t + l/tau", 3.0, 4.0), 16.0);
    }

    #[test]
    fn unicode_minus_and_exponent_literals() {
        assert_eq!(ev("3 \u{2212} 1", 0.0, 0.0), 2.0);
        assert_eq!(ev("1.5e2 + 2E-1", 0.0, 0.0), 150.2);
    }

    #[test]
    fn unclosed_call_reports_offset() {
        match parse_expr("sin(") {
            Err(Error::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 4);
                assert!(expected.contains(&"number".to_string()));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        assert_eq!(
            parse_expr("x + foo").unwrap_err(),
            Error::UnknownIdentifier {
                name: "foo".into(),
                offset: 4
            }
        );
        assert!(matches!(parse_expr("bar(x)"), Err(Error::UnknownIdentifier { .. })));
    }

    #[test]
    fn trailing_garbage() {
        assert!(matches!(parse_expr("x )"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr("x $"), Err(Error::Syntax { offset: 2, .. })));
        assert!(matches!(parse_expr("sin x"), Err(Error::Syntax { offset: 4, .. })));
    }
}
