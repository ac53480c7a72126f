use std::f64::consts::{E, PI};

use super::{BinOp, Expr, Func, Var};

/// Malformed expression text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{message} at offset {offset} (expected {expected})")]
pub struct ParseError {
    /// Byte offset into the input; equals the input length for errors at end of input.
    pub offset: usize,
    pub message: String,
    pub expected: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
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

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(n) => format!("number {n}"),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Slash => "`/`".into(),
            Token::Caret => "`^`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::End => "end of input".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let single = match c {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push((start, tok));
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // exponent only when a digit follows, so `2e` stays `2` then `e`
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
            let lexeme = &text[start..i];
            let value: f64 = lexeme.parse().map_err(|_| ParseError {
                offset: start,
                message: format!("malformed number `{lexeme}`"),
                expected: "a decimal number".into(),
            })?;
            out.push((start, Token::Number(value)));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(text[start..i].to_string())));
            continue;
        }
        let ch = text[start..].chars().next().unwrap_or('?');
        return Err(ParseError {
            offset: start,
            message: format!("unexpected character `{ch}`"),
            expected: "an operator, number, identifier or parenthesis".into(),
        });
    }
    out.push((text.len(), Token::End));
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos].1.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, message: impl Into<String>, expected: &str) -> ParseError {
        ParseError {
            offset: self.offset(),
            message: message.into(),
            expected: expected.into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Token::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Const(c) => Expr::Const(-c),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Token::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let offset = self.offset();
        match self.bump() {
            Token::Number(n) => Ok(Expr::Const(n)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Token::LParen {
                        return Err(self.error(
                            format!("function `{name}` must be applied"),
                            "`(` after a function name",
                        ));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                let atom = match name.as_str() {
                    "x" => Expr::Var(Var::X),
                    "t" => Expr::Var(Var::T),
                    "pi" => Expr::Const(PI),
                    "e" => Expr::Const(E),
                    _ => {
                        return Err(ParseError {
                            offset,
                            message: format!("unknown identifier `{name}`"),
                            expected: "x, t, pi, e or a function name".into(),
                        })
                    }
                };
                if *self.peek() == Token::LParen {
                    return Err(self.error(format!("`{name}` is not a function"), "an operator"));
                }
                Ok(atom)
            }
            tok => Err(ParseError {
                offset,
                message: format!("unexpected {}", tok.describe()),
                expected: "a number, variable, function call or `(`".into(),
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Token::RParen {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().describe();
            Err(self.error(format!("unbalanced parenthesis, found {found}"), "`)`"))
        }
    }
}

/// Parse expression text in `x` and `t`.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError {
            offset: 0,
            message: "empty expression".into(),
            expected: "an expression".into(),
        });
    }
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    let expr = parser.expr()?;
    if *parser.peek() != Token::End {
        let found = parser.peek().describe();
        return Err(parser.error(format!("unexpected {found}"), "an operator or end of input"));
    }
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Box<Expr> {
        Box::new(Expr::Const(v))
    }

    #[test]
    fn polynomial_shape() {
        let e = parse("t^2+1").unwrap();
        let expected = Expr::Binary(
            BinOp::Add,
            Box::new(Expr::Binary(BinOp::Pow, Box::new(Expr::Var(Var::T)), c(2.0))),
            c(1.0),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn precedence_and_associativity() {
        // unary minus is looser than ^
        let e = parse("-x^2").unwrap();
        assert!(matches!(e, Expr::Neg(ref inner) if matches!(**inner, Expr::Binary(BinOp::Pow, ..))));
        assert_eq!(parse("2^3^2").unwrap().eval(0.0, 0.0).unwrap(), 512.0);
        assert_eq!(parse("8/4/2").unwrap().eval(0.0, 0.0).unwrap(), 1.0);
        assert_eq!(parse("1-2-3").unwrap().eval(0.0, 0.0).unwrap(), -4.0);
        assert_eq!(parse("2*-x").unwrap().eval(3.0, 0.0).unwrap(), -6.0);
        assert_eq!(parse("2^-1").unwrap().eval(0.0, 0.0).unwrap(), 0.5);
        assert_eq!(parse("1.5e2 + 2E-1").unwrap().eval(0.0, 0.0).unwrap(), 150.2);
    }

    #[test]
    fn named_constants() {
        assert_eq!(parse("pi").unwrap(), Expr::Const(PI));
        assert_eq!(parse("e").unwrap(), Expr::Const(E));
        assert!(parse("2e").is_err());
    }

    #[test]
    fn truncated_call_reports_end_offset() {
        let err = parse("tanh(").unwrap_err();
        assert_eq!(err.offset, 5);
    }

    #[test]
    fn rejects_malformed_input() {
        let err = parse("x + y").unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(err.message.contains("unknown identifier"));
        assert_eq!(parse("(x+1").unwrap_err().offset, 4);
        assert_eq!(parse("x+1)").unwrap_err().offset, 3);
        assert_eq!(parse("sin x").unwrap_err().offset, 4);
        assert!(parse("x(2)").is_err());
        assert!(parse("").is_err());
        assert!(parse("   ").is_err());
        assert!(parse("2 $ 3").unwrap_err().message.contains('$'));
        assert!(parse("x*").is_err());
    }

    #[test]
    fn offsets_stay_inside_input() {
        for s in ["tanh(", "(", "x+", "1 2", "x^", "sqrt(x", "@"] {
            let err = parse(s).unwrap_err();
            assert!(err.offset <= s.len(), "{s}: {err}");
        }
    }
}
