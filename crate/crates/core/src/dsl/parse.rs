//! Recursive-descent parser for the constraint language.
//!
//! ```text
//! constraint := ["forall_ball" "(" number ")" ":"] formula
//! formula    := imp ("<->" imp)*
//! imp        := or ("->" imp)?
//! or         := and ("|" and)*
//! and        := unary ("&" unary)*
//! unary      := "!" unary | quant | "(" formula ")" | atom
//! quant      := ("all" | "any") vars "in" "[" tuple ("," tuple)* "]" "{" formula "}"
//! atom       := term cmp term | ident
//! cmp        := "<=" | "<" | ">=" | ">" | "==" | "!="
//! term       := product (("+" | "-") product)*
//! product    := signed (("*" | "/") signed)*
//! signed     := "-" signed | primary
//! primary    := number | "(" term ")" | "N(x0)[k]" | "N(xadv)[k]" | "x0[i]" | "xadv[i]"
//!             | "group(name)" | "group(name, x0)" | "inf_norm_diff()"
//! ```
//!
//! Unicode `∧ ∨ ¬ → ⇒ ↔ ⇔ ≤ ≥ ≠` are accepted as synonyms.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::ast::*;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    UnknownIdentifier(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ParseErrorKind::Syntax(msg) => {
                write!(f, "syntax error at {}:{}: {msg}", self.line, self.column)
            }
            ParseErrorKind::UnknownIdentifier(name) => {
                write!(f, "unknown identifier `{name}` at {}:{}", self.line, self.column)
            }
        }
    }
}

impl core::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Colon,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Cmp(CmpOp),
    Plus,
    Minus,
    Star,
    Slash,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n}"),
            Tok::Eof => "end of input".to_string(),
            Tok::Cmp(op) => format!("`{}`", op.symbol()),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::LBrace => "{",
                    Tok::RBrace => "}",
                    Tok::Comma => ",",
                    Tok::Colon => ":",
                    Tok::Not => "!",
                    Tok::And => "&",
                    Tok::Or => "|",
                    Tok::Implies => "->",
                    Tok::Iff => "<->",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    _ => "/",
                };
                format!("`{s}`")
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let starts = |i: usize, pat: &str| pat.chars().enumerate().all(|(k, c)| chars.get(i + k) == Some(&c));
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        let (line0, col0) = (line, col);
        let symbols: &[(&str, Tok)] = &[
            ("<->", Tok::Iff),
            ("<=>", Tok::Iff),
            ("->", Tok::Implies),
            ("=>", Tok::Implies),
            ("<=", Tok::Cmp(CmpOp::Le)),
            (">=", Tok::Cmp(CmpOp::Ge)),
            ("==", Tok::Cmp(CmpOp::Eq)),
            ("!=", Tok::Cmp(CmpOp::Ne)),
            ("&&", Tok::And),
            ("||", Tok::Or),
            ("<", Tok::Cmp(CmpOp::Lt)),
            (">", Tok::Cmp(CmpOp::Gt)),
            ("!", Tok::Not),
            ("&", Tok::And),
            ("|", Tok::Or),
            ("(", Tok::LParen),
            (")", Tok::RParen),
            ("[", Tok::LBracket),
            ("]", Tok::RBracket),
            ("{", Tok::LBrace),
            ("}", Tok::RBrace),
            (",", Tok::Comma),
            (":", Tok::Colon),
            ("+", Tok::Plus),
            ("-", Tok::Minus),
            ("*", Tok::Star),
            ("/", Tok::Slash),
            ("¬", Tok::Not),
            ("∧", Tok::And),
            ("∨", Tok::Or),
            ("→", Tok::Implies),
            ("⇒", Tok::Implies),
            ("↔", Tok::Iff),
            ("⇔", Tok::Iff),
            ("≤", Tok::Cmp(CmpOp::Le)),
            ("≥", Tok::Cmp(CmpOp::Ge)),
            ("≠", Tok::Cmp(CmpOp::Ne)),
        ];
        if let Some((pat, tok)) = symbols.iter().find(|(pat, _)| starts(i, pat)) {
            let n = pat.chars().count();
            i += n;
            col += n;
            out.push(Spanned { tok: tok.clone(), line: line0, column: col0 });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
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
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let v: f64 = text.parse().map_err(|_| ParseError {
                line: line0,
                column: col0,
                kind: ParseErrorKind::Syntax(format!("malformed number `{text}`")),
            })?;
            out.push(Spanned { tok: Tok::Number(v), line: line0, column: col0 });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: line0,
                column: col0,
            });
            continue;
        }
        return Err(ParseError {
            line,
            column: col,
            kind: ParseErrorKind::Syntax(format!("unexpected character `{c}`")),
        });
    }
    out.push(Spanned { tok: Tok::Eof, line, column: col });
    Ok(out)
}

const TERM_HEADS: [&str; 5] = ["N", "x0", "xadv", "group", "inf_norm_diff"];
const KEYWORDS: [&str; 4] = ["all", "any", "in", "forall_ball"];

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    /// Quantifier variables currently in scope.
    scope: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, column: s.column, kind }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        let found = self.peek().describe();
        self.error_here(ParseErrorKind::Syntax(format!("expected {expected}, found {found}")))
    }

    fn unknown(&self, name: &str) -> ParseError {
        self.error_here(ParseErrorKind::UnknownIdentifier(name.to_string()))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn constraint(&mut self) -> PResult<Constraint> {
        let mut epsilon = None;
        if *self.peek() == Tok::Ident("forall_ball".into()) {
            self.bump();
            self.expect(Tok::LParen, "`(`")?;
            let eps = self.number()?;
            if eps.is_nan() || eps <= 0.0 {
                return Err(self.error_here(ParseErrorKind::Syntax("ball radius must be positive".into())));
            }
            self.expect(Tok::RParen, "`)`")?;
            self.expect(Tok::Colon, "`:`")?;
            epsilon = Some(eps);
        }
        let formula = self.formula()?;
        if *self.peek() != Tok::Eof {
            return Err(self.unexpected("end of input"));
        }
        Ok(Constraint { epsilon, formula })
    }

    fn number(&mut self) -> PResult<f64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        match self.bump() {
            Tok::Number(v) => Ok(if neg { -v } else { v }),
            _ => {
                self.pos -= 1;
                Err(self.unexpected("a number"))
            }
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> PResult<Formula> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Ident(s) if s == "all" || s == "any" => self.quantifier(s == "all"),
            Tok::LParen => {
                // Either a parenthesised term starting a comparison or a
                // parenthesised formula; try the comparison first.
                let save = self.pos;
                match self.comparison() {
                    Ok(f) => Ok(f),
                    Err(term_err) => {
                        let term_pos = self.pos;
                        self.pos = save;
                        self.bump();
                        let inner = self.formula().and_then(|f| {
                            self.expect(Tok::RParen, "`)`")?;
                            Ok(f)
                        });
                        match inner {
                            Ok(f) => Ok(f),
                            Err(formula_err) => {
                                if term_pos > self.pos {
                                    Err(term_err)
                                } else {
                                    Err(formula_err)
                                }
                            }
                        }
                    }
                }
            }
            Tok::Ident(name) if !TERM_HEADS.contains(&name.as_str()) => {
                if KEYWORDS.contains(&name.as_str()) {
                    return Err(self.unexpected("a formula"));
                }
                if matches!(self.peek_at(1), Tok::LParen | Tok::LBracket) {
                    return Err(self.unknown(&name));
                }
                if matches!(
                    self.peek_at(1),
                    Tok::Cmp(_) | Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash
                ) {
                    return Err(self.unknown(&name));
                }
                self.bump();
                Ok(Formula::Prop(name))
            }
            _ => self.comparison(),
        }
    }

    fn comparison(&mut self) -> PResult<Formula> {
        let lhs = self.term()?;
        let op = match self.peek() {
            Tok::Cmp(op) => *op,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.term()?;
        Ok(Formula::Compare(op, lhs, rhs))
    }

    fn quantifier(&mut self, conjunctive: bool) -> PResult<Formula> {
        self.bump();
        let mut vars = Vec::new();
        if *self.peek() == Tok::LParen {
            self.bump();
            loop {
                vars.push(self.ident("a variable name")?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen, "`)`")?;
        } else {
            vars.push(self.ident("a variable name")?);
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(self.error_here(ParseErrorKind::Syntax(format!("variable `{v}` bound twice"))));
            }
        }
        match self.peek() {
            Tok::Ident(s) if s == "in" => {
                self.bump();
            }
            _ => return Err(self.unexpected("`in`")),
        }
        self.expect(Tok::LBracket, "`[`")?;
        let mut domain = Vec::new();
        loop {
            let tuple = if vars.len() == 1 && *self.peek() != Tok::LParen {
                alloc::vec![self.index_value()?]
            } else {
                self.expect(Tok::LParen, "`(`")?;
                let mut t = Vec::new();
                loop {
                    t.push(self.index_value()?);
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                t
            };
            if tuple.len() != vars.len() {
                return Err(self.error_here(ParseErrorKind::Syntax(format!(
                    "tuple has {} entries but {} variables are bound",
                    tuple.len(),
                    vars.len()
                ))));
            }
            domain.push(tuple);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::LBrace, "`{`")?;
        let depth = self.scope.len();
        self.scope.extend(vars.iter().cloned());
        let body = self.formula();
        self.scope.truncate(depth);
        let body = body?;
        self.expect(Tok::RBrace, "`}`")?;
        let q = Quantifier { vars, domain, body: Box::new(body) };
        Ok(if conjunctive { Formula::BigAnd(q) } else { Formula::BigOr(q) })
    }

    fn index_value(&mut self) -> PResult<IndexValue> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                to_index(v).map(IndexValue::Int).ok_or_else(|| {
                    self.pos -= 1;
                    self.unexpected("a non-negative integer")
                })
            }
            Tok::Ident(s) => {
                self.bump();
                Ok(IndexValue::Name(s))
            }
            _ => Err(self.unexpected("an integer or a name")),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Term::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.signed()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.signed()?;
            lhs = Term::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn signed(&mut self) -> PResult<Term> {
        if *self.peek() == Tok::Minus {
            self.bump();
            if let Tok::Number(v) = *self.peek() {
                self.bump();
                return Ok(Term::Const(-v));
            }
            return Ok(Term::Neg(Box::new(self.signed()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Term::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            Tok::Ident(name) => match name.as_str() {
                "N" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    let which = self.which()?;
                    self.expect(Tok::RParen, "`)`")?;
                    let k = self.bracket_index()?;
                    Ok(Term::NetOut(which, k))
                }
                "x0" | "xadv" => {
                    let which = self.which()?;
                    let k = self.bracket_index()?;
                    Ok(Term::Input(which, k))
                }
                "group" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    let g = self.ident("a group name")?;
                    let gref = if self.scope.contains(&g) { GroupRef::Var(g) } else { GroupRef::Name(g) };
                    let which = if *self.peek() == Tok::Comma {
                        self.bump();
                        self.which()?
                    } else {
                        Which::Xadv
                    };
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Term::GroupProb(which, gref))
                }
                "inf_norm_diff" => {
                    self.bump();
                    self.expect(Tok::LParen, "`(`")?;
                    self.expect(Tok::RParen, "`)`")?;
                    Ok(Term::InfNormDiff)
                }
                _ => Err(self.unknown(&name)),
            },
            _ => Err(self.unexpected("a term")),
        }
    }

    fn which(&mut self) -> PResult<Which> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "x0" => {
                self.bump();
                Ok(Which::X0)
            }
            Tok::Ident(s) if s == "xadv" => {
                self.bump();
                Ok(Which::Xadv)
            }
            Tok::Ident(s) => Err(self.unknown(&s)),
            _ => Err(self.unexpected("`x0` or `xadv`")),
        }
    }

    fn bracket_index(&mut self) -> PResult<Index> {
        self.expect(Tok::LBracket, "`[`")?;
        let idx = match self.peek().clone() {
            Tok::Number(v) => {
                let k = to_index(v).ok_or_else(|| self.unexpected("a non-negative integer index"))?;
                self.bump();
                Index::Lit(k)
            }
            Tok::Ident(s) => {
                if !self.scope.contains(&s) {
                    return Err(self.unknown(&s));
                }
                self.bump();
                Index::Var(s)
            }
            _ => return Err(self.unexpected("an index")),
        };
        self.expect(Tok::RBracket, "`]`")?;
        Ok(idx)
    }
}

fn to_index(v: f64) -> Option<usize> {
    if v >= 0.0 && libm::trunc(v) == v && v < (u32::MAX as f64) {
        Some(v as usize)
    } else {
        None
    }
}

/// Parses a constraint, including an optional `forall_ball(eps):` prefix.
pub fn parse_constraint(src: &str) -> Result<Constraint, ParseError> {
    let toks = lex(src)?;
    Parser { toks, pos: 0, scope: Vec::new() }.constraint()
}

/// Parses a bare formula; a `forall_ball` prefix is rejected.
pub fn parse(src: &str) -> Result<Formula, ParseError> {
    let c = parse_constraint(src)?;
    if c.epsilon.is_some() {
        return Err(ParseError {
            line: 1,
            column: 1,
            kind: ParseErrorKind::Syntax("`forall_ball` is only allowed in constraints".into()),
        });
    }
    Ok(c.formula)
}
