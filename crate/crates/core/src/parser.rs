//! Reader and writer for the Mace4-style input language.
//!
//! ```text
//! assign(domain_size, 7).
//! assign(max_models, -1).
//! set(arithmetic).
//!
//! formulas(assumptions).
//!   Dice1 != 0.
//!   all x (x < 4 -> s(x) = x + 1).
//! end_of_list.
//! ```
//!
//! Precedence, tightest first: negation `-`, `*`, `+` and binary `-`,
//! comparisons, `&`, `|`, then `->` and `<->`. `&`, `|`, `->` and `<->` group
//! to the right. A quantifier's body extends as far right as possible.
//!
//! An identifier is a variable only inside the scope of a quantifier that binds
//! it. Every other bare identifier is a constant. An identifier applied to
//! arguments is a function in term position and a predicate in atom position.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use crate::syntax::{ArithOp, Formula, ModelLimit, Rel, SignatureError, SymbolKind, Term, Theory};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceFile {
    pub text: String,
    pub origin: Option<PathBuf>,
}

impl SourceFile {
    pub fn in_memory(text: impl Into<String>) -> Self {
        SourceFile { text: text.into(), origin: None }
    }

    pub fn read(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let path = path.as_ref();
        Ok(SourceFile { text: std::fs::read_to_string(path)?, origin: Some(path.to_path_buf()) })
    }

    pub fn origin_name(&self) -> String {
        match &self.origin {
            Some(p) => p.display().to_string(),
            None => "<memory>".to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum MergeError {
    #[error("domain size {base} of the base theory differs from {extra}")]
    DomainMismatch { base: u32, extra: u32 },
    #[error(transparent)]
    ArityConflict(#[from] SignatureError),
}

/// Parses a theory file. Directives are optional, so a bare
/// `formulas(assumptions)` block parses too.
pub fn parse_theory(src: &SourceFile) -> Result<Theory, Vec<ParseDiagnostic>> {
    let (tokens, mut diagnostics) = lex(&src.text);
    let mut parser = Parser { tokens, pos: 0, scopes: Vec::new(), uses: Vec::new(), depth: 0 };
    let theory = parser.theory(&mut diagnostics);
    if diagnostics.is_empty() {
        Ok(theory)
    } else {
        Err(diagnostics)
    }
}

pub fn parse_str(text: &str) -> Result<Theory, Vec<ParseDiagnostic>> {
    parse_theory(&SourceFile::in_memory(text))
}

/// Appends `extra`'s formulas to `base`. An explicit `max_models` in `extra`
/// overrides the base's.
pub fn merge_theories(base: &Theory, extra: &Theory) -> Result<Theory, MergeError> {
    let domain_size = match (base.domain_size, extra.domain_size) {
        (Some(b), Some(e)) if b != e => return Err(MergeError::DomainMismatch { base: b, extra: e }),
        (b, e) => b.or(e),
    };
    let signature = base.signature.union(&extra.signature)?;
    let mut formulas = base.formulas.clone();
    formulas.extend(extra.formulas.iter().cloned());
    Ok(Theory { domain_size, max_models: extra.max_models.or(base.max_models), formulas, signature })
}

/// Renders a theory in the input language.
pub fn format_theory(th: &Theory) -> String {
    let mut out = String::new();
    if let Some(n) = th.domain_size {
        writeln!(out, "assign(domain_size, {n}).").unwrap();
    }
    if let Some(limit) = th.max_models {
        writeln!(out, "assign(max_models, {}).", limit.as_max_models()).unwrap();
    }
    out.push_str("\nformulas(assumptions).\n");
    for f in &th.formulas {
        writeln!(out, "  {}.", format_formula(f)).unwrap();
    }
    out.push_str("end_of_list.\n");
    out
}

pub fn format_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f, 0);
    out
}

pub fn format_term(t: &Term) -> String {
    let mut out = String::new();
    write_term(&mut out, t, 0);
    out
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_term(self))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_formula(self))
    }
}

fn formula_prec(f: &Formula) -> u8 {
    match f {
        Formula::ForAll(..) | Formula::Exists(..) => 0,
        Formula::Implies(..) | Formula::Iff(..) => 1,
        Formula::Or(..) => 2,
        Formula::And(..) => 3,
        Formula::Not(..) => 4,
        Formula::Compare(..) | Formula::Pred(..) => 5,
    }
}

fn write_formula(out: &mut String, f: &Formula, ctx: u8) {
    let prec = formula_prec(f);
    let paren = prec < ctx;
    if paren {
        out.push('(');
    }
    match f {
        Formula::Compare(rel, l, r) => {
            write_term(out, l, 0);
            write!(out, " {} ", rel.symbol()).unwrap();
            write_term(out, r, 0);
        }
        Formula::Pred(p, args) => write_application(out, p, args),
        Formula::Not(g) => {
            out.push('-');
            write_formula(out, g, 4);
        }
        Formula::And(l, r) => write_binary(out, l, "&", r, 3),
        Formula::Or(l, r) => write_binary(out, l, "|", r, 2),
        Formula::Implies(l, r) => write_binary(out, l, "->", r, 1),
        Formula::Iff(l, r) => write_binary(out, l, "<->", r, 1),
        Formula::ForAll(v, body) | Formula::Exists(v, body) => {
            let q = if matches!(f, Formula::ForAll(..)) { "all" } else { "exists" };
            write!(out, "{q} {v} ").unwrap();
            write_formula(out, body, 0);
        }
    }
    if paren {
        out.push(')');
    }
}

fn write_binary(out: &mut String, l: &Formula, op: &str, r: &Formula, prec: u8) {
    write_formula(out, l, prec + 1);
    write!(out, " {op} ").unwrap();
    write_formula(out, r, prec);
}

fn write_application(out: &mut String, name: &str, args: &[Term]) {
    out.push_str(name);
    if !args.is_empty() {
        out.push('(');
        for (k, a) in args.iter().enumerate() {
            if k > 0 {
                out.push_str(", ");
            }
            write_term(out, a, 0);
        }
        out.push(')');
    }
}

fn write_term(out: &mut String, t: &Term, ctx: u8) {
    match t {
        Term::Var(v) => out.push_str(v),
        Term::Int(v) if *v < 0 => write!(out, "({v})").unwrap(),
        Term::Int(v) => write!(out, "{v}").unwrap(),
        Term::Apply(f, args) => write_application(out, f, args),
        Term::Arith(op, l, r) => {
            let prec = if *op == ArithOp::Mul { 2 } else { 1 };
            let paren = prec < ctx;
            if paren {
                out.push('(');
            }
            write_term(out, l, prec);
            write!(out, " {} ", op.symbol()).unwrap();
            write_term(out, r, prec + 1);
            if paren {
                out.push(')');
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Plus,
    Minus,
    Star,
    Bar,
    Amp,
    Arrow,
    DoubleArrow,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) | Tok::Int(s) => return write!(f, "`{s}`"),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Gt => ">",
            Tok::Ge => ">=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Bar => "|",
            Tok::Amp => "&",
            Tok::Arrow => "->",
            Tok::DoubleArrow => "<->",
            Tok::Eof => return write!(f, "end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn lex(text: &str) -> (Vec<Token>, Vec<ParseDiagnostic>) {
    let mut tokens = Vec::new();
    let mut diagnostics = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut line, mut column) = (1, 1);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let pos = Pos { line, column };
        let peek = chars.get(k + 1).copied();
        let mut len = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                column = 1;
                k += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '%' => {
                while k + len < chars.len() && chars[k + len] != '\n' {
                    len += 1;
                }
                None
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while k + len < chars.len() && (chars[k + len].is_ascii_alphanumeric() || chars[k + len] == '_') {
                    len += 1;
                }
                Some(Tok::Ident(chars[k..k + len].iter().collect()))
            }
            c if c.is_ascii_digit() => {
                while k + len < chars.len() && chars[k + len].is_ascii_digit() {
                    len += 1;
                }
                Some(Tok::Int(chars[k..k + len].iter().collect()))
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            '.' => Some(Tok::Dot),
            '=' => Some(Tok::Eq),
            '+' => Some(Tok::Plus),
            '*' => Some(Tok::Star),
            '|' => Some(Tok::Bar),
            '&' => Some(Tok::Amp),
            '!' if peek == Some('=') => {
                len = 2;
                Some(Tok::Ne)
            }
            '-' if peek == Some('>') => {
                len = 2;
                Some(Tok::Arrow)
            }
            '-' => Some(Tok::Minus),
            '<' if peek == Some('-') && chars.get(k + 2) == Some(&'>') => {
                len = 3;
                Some(Tok::DoubleArrow)
            }
            '<' if peek == Some('=') => {
                len = 2;
                Some(Tok::Le)
            }
            '<' => Some(Tok::Lt),
            '>' if peek == Some('=') => {
                len = 2;
                Some(Tok::Ge)
            }
            '>' => Some(Tok::Gt),
            other => {
                diagnostics.push(ParseDiagnostic {
                    line,
                    column,
                    message: format!("unexpected character {other:?}"),
                });
                None
            }
        };
        if let Some(tok) = tok {
            tokens.push(Token { tok, pos });
        }
        k += len;
        column += len;
    }
    tokens.push(Token { tok: Tok::Eof, pos: Pos { line, column } });
    (tokens, diagnostics)
}

const MAX_NESTING: usize = 200;

type PResult<T> = Result<T, ParseDiagnostic>;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    /// Variables bound by enclosing quantifiers.
    scopes: Vec<String>,
    /// Symbol uses in the formula being parsed, checked once it is complete.
    uses: Vec<(String, SymbolKind, usize, Pos)>,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let k = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[k].tok
    }

    fn here(&self) -> Pos {
        self.tokens[self.pos].pos
    }

    fn bump(&mut self) -> Tok {
        let tok = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        tok
    }

    fn error_at(pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
        diag(pos, message)
    }

    fn error(&self, message: impl Into<String>) -> ParseDiagnostic {
        Self::error_at(self.here(), message)
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(format!("expected {tok}, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    /// Skips past the next `.`, or stops at end of input.
    fn recover(&mut self) {
        loop {
            match self.bump() {
                Tok::Dot | Tok::Eof => return,
                _ => {}
            }
        }
    }

    fn theory(&mut self, diagnostics: &mut Vec<ParseDiagnostic>) -> Theory {
        let mut th = Theory::default();
        loop {
            let start = self.here();
            let word = match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(word) => word,
                other => {
                    diagnostics.push(self.error(format!("unknown directive {other}")));
                    self.recover();
                    continue;
                }
            };
            // Syntax errors skip to the next `.`; semantic errors are reported
            // after the directive has been consumed.
            let outcome = match word.as_str() {
                "assign" => self.directive().map(|(_, args)| apply_assign(&mut th, start, args)),
                "set" | "clear" => self.directive().map(|(name, args)| check_flag(&name, args)),
                "formulas" => {
                    match self.directive() {
                        Ok((_, args)) => {
                            if let Err(d) = check_list(args) {
                                diagnostics.push(d);
                            }
                            self.formula_list(&mut th, diagnostics);
                        }
                        Err(d) => {
                            diagnostics.push(d);
                            self.recover();
                        }
                    }
                    continue;
                }
                _ => Err(self.error(format!("unknown directive `{word}`"))),
            };
            match outcome {
                Ok(Ok(())) => {}
                Ok(Err(d)) => diagnostics.push(d),
                Err(d) => {
                    diagnostics.push(d);
                    self.recover();
                }
            }
        }
        th
    }

    /// Reads `name(arg, ...).` where each argument is an identifier or an integer.
    fn directive(&mut self) -> PResult<(String, Vec<(DirectiveArg, Pos)>)> {
        let name = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut args = Vec::new();
        loop {
            let pos = self.here();
            let arg = match self.peek().clone() {
                Tok::Ident(s) => {
                    self.bump();
                    DirectiveArg::Name(s)
                }
                Tok::Minus | Tok::Int(_) => {
                    let negative = *self.peek() == Tok::Minus;
                    if negative {
                        self.bump();
                    }
                    match self.bump() {
                        Tok::Int(digits) => match parse_int(&digits, negative) {
                            Some(Term::Int(v)) => DirectiveArg::Int(v),
                            _ => return Err(Self::error_at(pos, format!("integer {digits} is too large"))),
                        },
                        other => return Err(Self::error_at(pos, format!("expected integer, found {other}"))),
                    }
                }
                other => return Err(self.error(format!("expected identifier or integer, found {other}"))),
            };
            args.push((arg, pos));
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RParen)?;
        self.expect(Tok::Dot)?;
        Ok((name, args))
    }

    fn formula_list(&mut self, th: &mut Theory, diagnostics: &mut Vec<ParseDiagnostic>) {
        loop {
            match self.peek() {
                Tok::Eof => {
                    diagnostics.push(self.error("missing `end_of_list`"));
                    return;
                }
                Tok::Ident(word) if word == "end_of_list" => {
                    self.bump();
                    if let Err(d) = self.expect(Tok::Dot) {
                        diagnostics.push(d);
                        self.recover();
                    }
                    return;
                }
                _ => {}
            }
            self.uses.clear();
            self.scopes.clear();
            self.depth = 0;
            let parsed = self.formula().and_then(|f| {
                self.expect(Tok::Dot)?;
                Ok(f)
            });
            match parsed {
                Ok(f) => {
                    let mut ok = true;
                    for (name, kind, arity, pos) in std::mem::take(&mut self.uses) {
                        if let Err(e) = th.signature.declare(&name, kind, arity) {
                            diagnostics.push(Self::error_at(pos, e.to_string()));
                            ok = false;
                        }
                    }
                    if ok {
                        th.formulas.push(f);
                    }
                }
                Err(d) => {
                    diagnostics.push(d);
                    self.recover();
                }
            }
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            Err(self.error("formula nested too deeply"))
        } else {
            Ok(())
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        self.enter()?;
        let left = self.disjunction()?;
        let f = match self.peek() {
            Tok::Arrow => {
                self.bump();
                Formula::implies(left, self.formula()?)
            }
            Tok::DoubleArrow => {
                self.bump();
                Formula::iff(left, self.formula()?)
            }
            _ => left,
        };
        self.depth -= 1;
        Ok(f)
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Bar {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(fold_right(parts, Formula::or))
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(fold_right(parts, Formula::and))
    }

    fn unary(&mut self) -> PResult<Formula> {
        self.enter()?;
        let f = match self.peek().clone() {
            Tok::Minus => {
                self.bump();
                Formula::not(self.unary()?)
            }
            Tok::Ident(q) if q == "all" || q == "exists" => {
                self.bump();
                let var = self.ident()?;
                self.scopes.push(var.clone());
                let body = self.formula();
                self.scopes.pop();
                let body = body?;
                if q == "all" {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                }
            }
            _ => self.atom()?,
        };
        self.depth -= 1;
        Ok(f)
    }

    /// Whether the parenthesized group starting at the cursor is followed by a
    /// term operator, which makes it a term rather than a subformula.
    fn paren_group_is_term(&self) -> bool {
        let mut depth = 0usize;
        let mut k = self.pos;
        loop {
            match &self.tokens[k].tok {
                Tok::LParen => depth += 1,
                Tok::RParen => {
                    depth -= 1;
                    if depth == 0 {
                        break;
                    }
                }
                Tok::Eof => return false,
                _ => {}
            }
            k += 1;
        }
        let next = &self.tokens[(k + 1).min(self.tokens.len() - 1)].tok;
        rel_of(next).is_some() || matches!(next, Tok::Plus | Tok::Minus | Tok::Star)
    }

    fn atom(&mut self) -> PResult<Formula> {
        if *self.peek() == Tok::LParen && !self.paren_group_is_term() {
            self.bump();
            let f = self.formula()?;
            self.expect(Tok::RParen)?;
            return Ok(f);
        }
        let start = self.here();
        let left = self.term()?;
        if let Some((rel, swap)) = rel_of(self.peek()) {
            self.bump();
            let right = self.term()?;
            return Ok(if swap { Formula::Compare(rel, right, left) } else { Formula::Compare(rel, left, right) });
        }
        match left {
            Term::Apply(name, args) => {
                // Term parsing recorded this symbol as a function; it is a predicate.
                if let Some(k) = self.uses.iter().rposition(|u| u.0 == name && u.3 == start) {
                    self.uses[k].1 = SymbolKind::Predicate;
                }
                Ok(Formula::Pred(name, args))
            }
            _ => Err(self.error(format!("expected a comparison, found {}", self.peek()))),
        }
    }

    fn term(&mut self) -> PResult<Term> {
        self.enter()?;
        let mut acc = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => break,
            };
            self.bump();
            acc = Term::arith(op, acc, self.product()?);
        }
        self.depth -= 1;
        Ok(acc)
    }

    fn product(&mut self) -> PResult<Term> {
        let mut acc = self.primary()?;
        while *self.peek() == Tok::Star {
            self.bump();
            acc = Term::arith(ArithOp::Mul, acc, self.primary()?);
        }
        Ok(acc)
    }

    fn primary(&mut self) -> PResult<Term> {
        let pos = self.here();
        match self.peek().clone() {
            Tok::Int(digits) => {
                self.bump();
                parse_int(&digits, false).ok_or_else(|| Self::error_at(pos, format!("integer {digits} is too large")))
            }
            Tok::Minus => match self.peek_at(1).clone() {
                Tok::Int(digits) => {
                    self.bump();
                    self.bump();
                    parse_int(&digits, true)
                        .ok_or_else(|| Self::error_at(pos, format!("integer -{digits} is too large")))
                }
                _ => Err(self.error("unary minus applies only to integer literals")),
            },
            Tok::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            Tok::Ident(name) => {
                if name == "all" || name == "exists" || name == "end_of_list" {
                    return Err(self.error(format!("`{name}` cannot be used as a term")));
                }
                self.bump();
                let bound = self.scopes.contains(&name);
                if *self.peek() != Tok::LParen {
                    if bound {
                        return Ok(Term::Var(name));
                    }
                    self.uses.push((name.clone(), SymbolKind::Function, 0, pos));
                    return Ok(Term::Apply(name, Vec::new()));
                }
                if bound {
                    return Err(Self::error_at(pos, format!("variable `{name}` cannot be applied")));
                }
                self.bump();
                let mut args = vec![self.term()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                self.uses.push((name.clone(), SymbolKind::Function, args.len(), pos));
                Ok(Term::Apply(name, args))
            }
            other => Err(self.error(format!("expected a term, found {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum DirectiveArg {
    Name(String),
    Int(i64),
}

fn diag(pos: Pos, message: impl Into<String>) -> ParseDiagnostic {
    ParseDiagnostic { line: pos.line, column: pos.column, message: message.into() }
}

fn apply_assign(th: &mut Theory, start: Pos, args: Vec<(DirectiveArg, Pos)>) -> PResult<()> {
    let (name, name_pos, value, value_pos) = match args.as_slice() {
        [(DirectiveArg::Name(name), np), (DirectiveArg::Int(v), vp)] => (name.as_str(), *np, *v, *vp),
        _ => return Err(diag(start, "expected `assign(parameter, integer)`")),
    };
    match name {
        "domain_size" => {
            let n = u32::try_from(value)
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| diag(value_pos, "domain_size must be a positive integer"))?;
            if th.domain_size.is_some() {
                return Err(diag(start, "domain_size assigned twice"));
            }
            th.domain_size = Some(n);
        }
        "max_models" => {
            let limit = ModelLimit::from_max_models(value)
                .ok_or_else(|| diag(value_pos, "max_models must be -1 or a positive integer"))?;
            if th.max_models.is_some() {
                return Err(diag(start, "max_models assigned twice"));
            }
            th.max_models = Some(limit);
        }
        other => return Err(diag(name_pos, format!("unknown parameter `{other}`"))),
    }
    Ok(())
}

// Arithmetic is always on, so `set(arithmetic)` is accepted and has no effect.
fn check_flag(directive: &str, args: Vec<(DirectiveArg, Pos)>) -> PResult<()> {
    match args.as_slice() {
        [(DirectiveArg::Name(name), _)] if directive == "set" && name == "arithmetic" => Ok(()),
        [(DirectiveArg::Name(name), pos)] => Err(diag(*pos, format!("unsupported flag `{directive}({name})`"))),
        [(_, pos), ..] => Err(diag(*pos, format!("expected a flag name in `{directive}`"))),
        [] => unreachable!("directives have at least one argument"),
    }
}

fn check_list(args: Vec<(DirectiveArg, Pos)>) -> PResult<()> {
    match args.as_slice() {
        [(DirectiveArg::Name(name), _)] if name == "assumptions" => Ok(()),
        [(DirectiveArg::Name(name), pos)] => Err(diag(*pos, format!("unsupported list `{name}`"))),
        [(_, pos), ..] => Err(diag(*pos, "expected a list name")),
        [] => unreachable!("directives have at least one argument"),
    }
}

fn parse_int(digits: &str, negative: bool) -> Option<Term> {
    let magnitude: i128 = digits.parse().ok()?;
    let value = if negative { -magnitude } else { magnitude };
    i64::try_from(value).ok().map(Term::Int)
}

/// Relation for a comparison token, and whether its operands must be swapped.
fn rel_of(tok: &Tok) -> Option<(Rel, bool)> {
    Some(match tok {
        Tok::Eq => (Rel::Eq, false),
        Tok::Ne => (Rel::Ne, false),
        Tok::Lt => (Rel::Lt, false),
        Tok::Le => (Rel::Le, false),
        Tok::Gt => (Rel::Lt, true),
        Tok::Ge => (Rel::Le, true),
        _ => return None,
    })
}

fn fold_right(mut parts: Vec<Formula>, join: fn(Formula, Formula) -> Formula) -> Formula {
    let mut acc = parts.pop().expect("at least one operand");
    while let Some(prev) = parts.pop() {
        acc = join(prev, acc);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::Signature;

    fn parse(text: &str) -> Theory {
        parse_str(text).unwrap_or_else(|d| panic!("{d:?}"))
    }

    fn one_formula(body: &str) -> Formula {
        let th = parse(&format!("formulas(assumptions). {body}. end_of_list."));
        assert_eq!(th.formulas.len(), 1);
        th.formulas[0].clone()
    }

    fn c(name: &str) -> Term {
        Term::constant(name)
    }

    #[test]
    fn two_decks_header_and_constants() {
        let th = parse(include_str!("../corpus/two_decks_all.in"));
        assert_eq!(th.domain_size, Some(52));
        assert_eq!(th.max_models, Some(ModelLimit::All));
        let names: Vec<_> = th.signature.functions().collect();
        assert_eq!(names, vec![("deck1", 0), ("deck2", 0)]);
        assert_eq!(th.signature.predicates().count(), 0);
    }

    #[test]
    fn empty_list() {
        let th = parse("assign(domain_size, 1). formulas(assumptions). end_of_list.");
        assert_eq!(th.domain_size, Some(1));
        assert!(th.formulas.is_empty());
        assert!(th.signature.is_empty());
    }

    #[test]
    fn missing_end_of_list_is_reported_at_end() {
        let d = parse_str("formulas(assumptions). Dice1 != 0.").unwrap_err();
        assert_eq!(d.len(), 1);
        assert!(d[0].message.contains("end_of_list"));
        assert_eq!((d[0].line, d[0].column), (1, 35));
    }

    #[test]
    fn unknown_directive() {
        let d = parse_str("assign(start_size, 2).\nfoo(bar).\n").unwrap_err();
        assert_eq!(d.len(), 2);
        assert_eq!((d[0].line, d[0].column), (1, 8));
        assert_eq!(d[1].line, 2);
    }

    #[test]
    fn unbalanced_parentheses() {
        let d = parse_str("formulas(assumptions). (a = b. end_of_list.").unwrap_err();
        assert!(!d.is_empty());
        let d = parse_str("formulas(assumptions). f(a)) = b. end_of_list.").unwrap_err();
        assert!(!d.is_empty());
    }

    #[test]
    fn arity_conflict_points_at_second_use() {
        let d = parse_str("formulas(assumptions).\n f(a) = a.\n f(a, a) = a.\nend_of_list.").unwrap_err();
        assert_eq!(d.len(), 1);
        assert_eq!((d[0].line, d[0].column), (3, 2));
        let d = parse_str("formulas(assumptions). p(a). p = a. end_of_list.").unwrap_err();
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn bad_directive_values() {
        assert!(parse_str("assign(domain_size, 0).").is_err());
        assert!(parse_str("assign(max_models, 0).").is_err());
        assert!(parse_str("assign(max_models, -2).").is_err());
        assert!(parse_str("assign(domain_size, 2). assign(domain_size, 3).").is_err());
        assert!(parse_str("set(print_models).").is_err());
        assert_eq!(parse("assign(max_models, 3).").max_models, Some(ModelLimit::AtMost(3)));
    }

    #[test]
    fn comparisons_normalize() {
        assert_eq!(one_formula("a > 7"), Formula::compare(Rel::Lt, Term::Int(7), c("a")));
        assert_eq!(one_formula("a >= b"), Formula::compare(Rel::Le, c("b"), c("a")));
        assert_eq!(one_formula("a != b"), Formula::compare(Rel::Ne, c("a"), c("b")));
    }

    #[test]
    fn arithmetic_precedence() {
        let f = one_formula("3 * W * (W - 1) = 6 * 5 + 2");
        let w = || c("W");
        let lhs = Term::arith(
            ArithOp::Mul,
            Term::arith(ArithOp::Mul, Term::Int(3), w()),
            Term::arith(ArithOp::Sub, w(), Term::Int(1)),
        );
        let rhs = Term::arith(ArithOp::Add, Term::arith(ArithOp::Mul, Term::Int(6), Term::Int(5)), Term::Int(2));
        assert_eq!(f, Formula::compare(Rel::Eq, lhs, rhs));
        let f = one_formula("a - b - c = 1");
        let lhs = Term::arith(ArithOp::Sub, Term::arith(ArithOp::Sub, c("a"), c("b")), c("c"));
        assert_eq!(f, Formula::compare(Rel::Eq, lhs, Term::Int(1)));
    }

    #[test]
    fn connective_precedence() {
        let p = |n: &str| Formula::pred(n, vec![]);
        assert_eq!(one_formula("p & q | r"), Formula::or(Formula::and(p("p"), p("q")), p("r")));
        assert_eq!(one_formula("p | q -> r"), Formula::implies(Formula::or(p("p"), p("q")), p("r")));
        assert_eq!(one_formula("-p & q"), Formula::and(Formula::not(p("p")), p("q")));
        assert_eq!(one_formula("p -> q -> r"), Formula::implies(p("p"), Formula::implies(p("q"), p("r"))));
        assert_eq!(one_formula("p | q | r"), Formula::or(p("p"), Formula::or(p("q"), p("r"))));
        assert_eq!(
            one_formula("-a = b"),
            Formula::not(Formula::compare(Rel::Eq, c("a"), c("b")))
        );
    }

    #[test]
    fn quantifier_scope_and_variables() {
        let f = one_formula("all x s(x) != x | p");
        let expected = Formula::forall(
            "x",
            Formula::or(
                Formula::compare(Rel::Ne, Term::apply("s", vec![Term::var("x")]), Term::var("x")),
                Formula::pred("p", vec![]),
            ),
        );
        assert_eq!(f, expected);
        // `y` is not bound, so it is a constant
        let f = one_formula("exists x (age(x) < age(y))");
        assert!(f.is_closed());
        let th = parse("formulas(assumptions). exists x (age(x) < age(y)). end_of_list.");
        assert_eq!(th.signature.get("y").map(|d| d.arity), Some(0));
    }

    #[test]
    fn parenthesized_terms_and_negative_literals() {
        assert_eq!(
            one_formula("(a + b) * 2 = c"),
            Formula::compare(
                Rel::Eq,
                Term::arith(ArithOp::Mul, Term::arith(ArithOp::Add, c("a"), c("b")), Term::Int(2)),
                c("c")
            )
        );
        assert_eq!(one_formula("(-3) = a"), Formula::compare(Rel::Eq, Term::Int(-3), c("a")));
        assert_eq!(one_formula("a = -3"), Formula::compare(Rel::Eq, c("a"), Term::Int(-3)));
        assert_eq!(one_formula("((a = b))"), Formula::compare(Rel::Eq, c("a"), c("b")));
    }

    #[test]
    fn predicates_are_declared_as_such() {
        let th = parse("formulas(assumptions). all x (a(x) <-> age(x) < age(s(x))). order. end_of_list.");
        let mut sig = Signature::new();
        sig.declare("a", SymbolKind::Predicate, 1).unwrap();
        sig.declare("age", SymbolKind::Function, 1).unwrap();
        sig.declare("s", SymbolKind::Function, 1).unwrap();
        sig.declare("order", SymbolKind::Predicate, 0).unwrap();
        assert_eq!(th.signature, sig);
        assert_eq!(th.signature.iter().map(|(n, _)| n).collect::<Vec<_>>(), vec!["a", "age", "s", "order"]);
    }

    #[test]
    fn errors_do_not_stop_parsing() {
        let d = parse_str("formulas(assumptions). a = . b = c. = d. end_of_list.").unwrap_err();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn merge_appends_and_unions() {
        let base = parse(include_str!("../corpus/3dice_all.in"));
        let extra = parse(include_str!("../corpus/swindler_fav.in"));
        let merged = merge_theories(&base, &extra).unwrap();
        assert_eq!(merged.formulas.len(), base.formulas.len() + extra.formulas.len());
        assert_eq!(&merged.formulas[..3], &base.formulas[..]);
        assert_eq!(merged.domain_size, Some(7));
        assert_eq!(merge_theories(&base, &Theory::default()).unwrap(), base);
    }

    #[test]
    fn merge_rejects_mismatches() {
        let base = parse("assign(domain_size, 3). formulas(assumptions). f(a) = a. end_of_list.");
        let other_size = parse("assign(domain_size, 4).");
        assert!(matches!(merge_theories(&base, &other_size), Err(MergeError::DomainMismatch { .. })));
        let clash = parse("formulas(assumptions). f = a. end_of_list.");
        assert!(matches!(merge_theories(&base, &clash), Err(MergeError::ArityConflict(_))));
    }

    #[test]
    fn format_empty_theory() {
        let th = Theory::new(3);
        assert_eq!(format_theory(&th), "assign(domain_size, 3).\n\nformulas(assumptions).\nend_of_list.\n");
    }

    #[test]
    fn format_keeps_iff() {
        let th = parse("formulas(assumptions). a <-> b. end_of_list.");
        assert!(format_theory(&th).contains("a <-> b"));
    }

    #[test]
    fn format_parenthesizes_where_needed() {
        let p = |n: &str| Formula::pred(n, vec![]);
        let f = Formula::and(Formula::not(Formula::forall("x", p("q"))), p("r"));
        assert_eq!(format_formula(&f), "-(all x q) & r");
        let f = Formula::and(Formula::or(p("p"), p("q")), p("r"));
        assert_eq!(format_formula(&f), "(p | q) & r");
        let t = Term::arith(ArithOp::Sub, c("a"), Term::arith(ArithOp::Sub, c("b"), c("c")));
        assert_eq!(format_term(&t), "a - (b - c)");
    }
}
