use std::fmt;

use super::ast::{BinaryOp, Branch, Constant, Expr, Guard, Relation, UnaryOp, Var};

/// A parse failure, located by character offset into the input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub position: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at offset {}: {}", self.position, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for ParseDiagnostic {}

#[derive(Clone, Debug, PartialEq)]
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
    Bar,
    Colon,
    Semi,
    Comma,
    Rel(Relation),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Bar => "`|`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Rel(r) => format!("`{}`", r.symbol()),
            Tok::End => "end of input".into(),
        }
    }
}

struct Lexer {
    chars: Vec<char>,
    pos: usize,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

// Glyphs that form a one-character identifier on their own.
fn is_glyph(c: char) -> bool {
    matches!(c, '∞' | '∂' | 'π' | 'ξ' | 'ν' | 'τ' | '√')
}

impl Lexer {
    fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseDiagnostic> {
        let mut lx = Lexer {
            chars: text.chars().collect(),
            pos: 0,
        };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.chars.len() && lx.chars[lx.pos].is_whitespace() {
                lx.pos += 1;
            }
            let start = lx.pos;
            let Some(&c) = lx.chars.get(lx.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            let tok = match c {
                '0'..='9' | '.' => lx.number()?,
                '+' => lx.single(Tok::Plus),
                '-' | '−' => lx.single(Tok::Minus),
                '*' | '·' | '×' => lx.single(Tok::Star),
                '/' => lx.single(Tok::Slash),
                '^' => lx.single(Tok::Caret),
                '(' => lx.single(Tok::LParen),
                ')' => lx.single(Tok::RParen),
                '|' => lx.single(Tok::Bar),
                ':' => lx.single(Tok::Colon),
                ';' => lx.single(Tok::Semi),
                ',' => lx.single(Tok::Comma),
                '≤' => lx.single(Tok::Rel(Relation::Le)),
                '≥' => lx.single(Tok::Rel(Relation::Ge)),
                '=' => lx.single(Tok::Rel(Relation::Eq)),
                '<' => {
                    lx.pos += 1;
                    if lx.chars.get(lx.pos) == Some(&'=') {
                        lx.pos += 1;
                        Tok::Rel(Relation::Le)
                    } else {
                        Tok::Rel(Relation::Lt)
                    }
                }
                '>' => {
                    lx.pos += 1;
                    if lx.chars.get(lx.pos) == Some(&'=') {
                        lx.pos += 1;
                        Tok::Rel(Relation::Ge)
                    } else {
                        Tok::Rel(Relation::Gt)
                    }
                }
                c if is_glyph(c) => {
                    lx.pos += 1;
                    Tok::Ident(c.to_string())
                }
                c if c.is_alphabetic() || c == '_' => {
                    while lx.pos < lx.chars.len()
                        && is_ident_char(lx.chars[lx.pos])
                        && !is_glyph(lx.chars[lx.pos])
                    {
                        lx.pos += 1;
                    }
                    Tok::Ident(lx.chars[start..lx.pos].iter().collect())
                }
                other => {
                    return Err(ParseDiagnostic {
                        position: start,
                        message: format!("unexpected character `{other}`"),
                        expected: vec![],
                    })
                }
            };
            out.push((tok, start));
        }
    }

    fn single(&mut self, t: Tok) -> Tok {
        self.pos += 1;
        t
    }

    fn number(&mut self) -> Result<Tok, ParseDiagnostic> {
        let start = self.pos;
        let digits = |lx: &mut Lexer| {
            while lx.pos < lx.chars.len() && lx.chars[lx.pos].is_ascii_digit() {
                lx.pos += 1;
            }
        };
        digits(self);
        if self.chars.get(self.pos) == Some(&'.') {
            self.pos += 1;
            digits(self);
        }
        // exponent only when digits follow, so `2e` stays a lexing error rather than `2·e`
        if matches!(self.chars.get(self.pos), Some('e') | Some('E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.chars.get(self.pos), Some('+') | Some('-')) {
                self.pos += 1;
            }
            if self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Tok::Num)
            .ok_or_else(|| ParseDiagnostic {
                position: start,
                message: format!("malformed number `{text}`"),
                expected: vec!["finite decimal literal".into()],
            })
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

const FUNCTIONS: &[(&str, UnaryOp)] = &[
    ("sqrt", UnaryOp::Sqrt),
    ("√", UnaryOp::Sqrt),
    ("exp", UnaryOp::Exp),
    ("ln", UnaryOp::Ln),
    ("log", UnaryOp::Ln),
    ("sin", UnaryOp::Sin),
    ("cos", UnaryOp::Cos),
    ("tan", UnaryOp::Tan),
    ("arctan", UnaryOp::Arctan),
    ("atan", UnaryOp::Arctan),
    ("abs", UnaryOp::Abs),
];

fn atom_for(name: &str) -> Option<Expr> {
    Some(match name {
        "∞" | "inf" | "ν" | "nu" => Expr::index(),
        "∂" | "del" => Expr::delta(),
        "π" | "pi" => Expr::pi(),
        "e" => Expr::Const(Constant::E),
        "ξ" | "xi" | "τ" | "tau" => Expr::arg(),
        "k" => Expr::Var(Var::Position),
        _ => return None,
    })
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn offset(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>, expected: &[&str]) -> Result<T, ParseDiagnostic> {
        Err(ParseDiagnostic {
            position: self.offset(),
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn expect(&mut self, t: Tok) -> Result<(), ParseDiagnostic> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            let found = self.peek().describe();
            self.fail(format!("found {found}"), &[&t.describe()])
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinaryOp::Add,
                Tok::Minus => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, ParseDiagnostic> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinaryOp::Mul,
                Tok::Slash => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::binary(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseDiagnostic> {
        if *self.peek() == Tok::Minus {
            self.bump();
            // `-3` is a negative literal unless the literal is a power base
            if let Tok::Num(v) = *self.peek() {
                if *self.peek_at(1) != Tok::Caret {
                    self.bump();
                    return Ok(Expr::Num(-v));
                }
            }
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseDiagnostic> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exponent = self.unary()?;
            return Ok(Expr::pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseDiagnostic> {
        let here = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Bar => {
                let e = self.expr()?;
                self.expect(Tok::Bar)?;
                Ok(Expr::unary(UnaryOp::Abs, e))
            }
            Tok::Ident(name) => {
                if name == "piecewise" {
                    return self.piecewise();
                }
                if let Some((_, op)) = FUNCTIONS.iter().find(|(n, _)| *n == name) {
                    self.expect(Tok::LParen)?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen)?;
                    return Ok(Expr::unary(*op, e));
                }
                atom_for(&name).ok_or_else(|| ParseDiagnostic {
                    position: here,
                    message: format!("unknown identifier `{name}`"),
                    expected: vec![
                        "∞/inf/ν/nu, ∂/del, π/pi, e, ξ/xi/τ/tau, k".into(),
                        "function name".into(),
                    ],
                })
            }
            other => Err(ParseDiagnostic {
                position: here,
                message: format!("found {}", other.describe()),
                expected: vec![
                    "number".into(),
                    "variable".into(),
                    "`(`".into(),
                    "`|`".into(),
                ],
            }),
        }
    }

    fn piecewise(&mut self) -> Result<Expr, ParseDiagnostic> {
        self.expect(Tok::LParen)?;
        let mut branches = Vec::new();
        let mut default = None;
        loop {
            if matches!(self.peek(), Tok::Ident(s) if s == "default") {
                self.bump();
                self.expect(Tok::Colon)?;
                default = Some(Box::new(self.expr()?));
                self.expect(Tok::RParen)?;
                break;
            }
            let lhs = self.expr()?;
            let rel = match self.bump() {
                Tok::Rel(r) => r,
                other => {
                    self.at -= 1;
                    return self.fail(
                        format!("found {}", other.describe()),
                        &["comparison `<`, `<=`, `=`, `>=`, `>`"],
                    );
                }
            };
            let rhs = self.expr()?;
            self.expect(Tok::Colon)?;
            let value = self.expr()?;
            branches.push(Branch {
                guard: Guard { lhs, rel, rhs },
                value,
            });
            match self.peek() {
                Tok::Semi => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    break;
                }
                other => {
                    let found = other.describe();
                    return self.fail(format!("found {found}"), &["`;`", "`)`"]);
                }
            }
        }
        if branches.is_empty() {
            return self.fail("piecewise needs at least one guarded branch", &["guard"]);
        }
        Ok(Expr::Piecewise { branches, default })
    }
}

/// Parses the expression language.
///
/// Precedence from tightest: `^` (right-associative), unary minus, `*` `/`,
/// then `+` `-`; binary operators of equal precedence associate left.
pub fn parse(text: &str) -> Result<Expr, ParseDiagnostic> {
    let toks = Lexer::tokenize(text)?;
    let mut p = Parser { toks, at: 0 };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        let found = p.peek().describe();
        return p.fail(
            format!("unexpected trailing {found}"),
            &["operator", "end of input"],
        );
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse("1 - 2 - 3").unwrap();
        assert_eq!(
            e,
            Expr::sub(Expr::sub(Expr::num(1.0), Expr::num(2.0)), Expr::num(3.0))
        );
        let e = parse("2^3^2").unwrap();
        assert_eq!(
            e,
            Expr::pow(Expr::num(2.0), Expr::pow(Expr::num(3.0), Expr::num(2.0)))
        );
        // pow binds tighter than unary minus
        let e = parse("-ξ^2").unwrap();
        assert_eq!(e, Expr::neg(Expr::pow(Expr::arg(), Expr::num(2.0))));
        let e = parse("-2^2").unwrap();
        assert_eq!(e, Expr::neg(Expr::pow(Expr::num(2.0), Expr::num(2.0))));
        let e = parse("ξ^-2").unwrap();
        assert_eq!(e, Expr::pow(Expr::arg(), Expr::num(-2.0)));
    }

    #[test]
    fn psi_family() {
        let e = parse("∞ / (1 + ∞^2 * ξ^2)").unwrap();
        let want = Expr::div(
            Expr::index(),
            Expr::add(
                Expr::num(1.0),
                Expr::mul(
                    Expr::pow(Expr::index(), Expr::num(2.0)),
                    Expr::pow(Expr::arg(), Expr::num(2.0)),
                ),
            ),
        );
        assert_eq!(e, want);
        assert_eq!(parse("inf/(1+inf^2*xi^2)").unwrap(), want);
    }

    #[test]
    fn identity_and_aliases() {
        assert_eq!(parse("ξ").unwrap(), Expr::arg());
        assert_eq!(parse("tau").unwrap(), Expr::arg());
        assert_eq!(parse("del").unwrap(), Expr::delta());
        assert_eq!(parse("nu").unwrap(), Expr::index());
    }

    #[test]
    fn chi_piecewise() {
        let e = parse("piecewise(|ξ| < 1/ν : ν/2 ; default : 0)").unwrap();
        match e {
            Expr::Piecewise { branches, default } => {
                assert_eq!(branches.len(), 1);
                assert_eq!(branches[0].guard.rel, Relation::Lt);
                assert_eq!(
                    branches[0].guard.lhs,
                    Expr::unary(UnaryOp::Abs, Expr::arg())
                );
                assert_eq!(*default.unwrap(), Expr::num(0.0));
            }
            other => panic!("not piecewise: {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_is_an_error() {
        let err = parse("1 + y").unwrap_err();
        assert_eq!(err.position, 4);
        assert!(err.message.contains("unknown identifier"));
    }

    #[test]
    fn diagnostics_point_inside_input() {
        for bad in ["", "1 +", "(1", "sin 2", "piecewise(ξ : 1)", "1 2", "3 $"] {
            let err = parse(bad).unwrap_err();
            assert!(err.position <= bad.chars().count(), "{bad:?} -> {err:?}");
        }
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1e-3").unwrap(), Expr::num(1e-3));
        assert_eq!(parse("2.5E+2").unwrap(), Expr::num(250.0));
        assert!(parse("2e").is_err());
    }
}
