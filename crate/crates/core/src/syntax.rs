//! Abstract syntax of theories: terms, formulas, signatures.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;

/// Binary integer operators allowed inside terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
        }
    }
}

/// Comparison relations. `>` and `>=` are normalized to `<` and `<=` with the
/// operands swapped, so they never appear here.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Ne,
    Lt,
    Le,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Lt => "<",
            Rel::Le => "<=",
        }
    }

    pub fn test(self, left: i64, right: i64) -> bool {
        match self {
            Rel::Eq => left == right,
            Rel::Ne => left != right,
            Rel::Lt => left < right,
            Rel::Le => left <= right,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Int(i64),
    /// Function application; constants are applications with no arguments.
    Apply(String, Vec<Term>),
    Arith(ArithOp, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Term::Apply(name.into(), Vec::new())
    }

    pub fn apply(name: impl Into<String>, args: Vec<Term>) -> Self {
        Term::Apply(name.into(), args)
    }

    pub fn arith(op: ArithOp, left: Term, right: Term) -> Self {
        Term::Arith(op, Box::new(left), Box::new(right))
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Int(_) => {}
            Term::Apply(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Term::Arith(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Compare(Rel, Term, Term),
    Pred(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    ForAll(String, Box<Formula>),
    Exists(String, Box<Formula>),
}

impl Formula {
    pub fn compare(rel: Rel, left: Term, right: Term) -> Self {
        Formula::Compare(rel, left, right)
    }

    pub fn pred(name: impl Into<String>, args: Vec<Term>) -> Self {
        Formula::Pred(name.into(), args)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Formula, r: Formula) -> Self {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Self {
        Formula::ForAll(var.into(), Box::new(body))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Self {
        Formula::Exists(var.into(), Box::new(body))
    }

    /// Variables occurring free in the formula.
    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Compare(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Formula::Pred(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Formula::Not(f) => f.collect_free(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.collect_free(out);
                r.collect_free(out);
            }
            Formula::ForAll(v, body) | Formula::Exists(v, body) => {
                let mut inner = BTreeSet::new();
                body.collect_free(&mut inner);
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolKind {
    Function,
    Predicate,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolKind::Function => write!(f, "function"),
            SymbolKind::Predicate => write!(f, "predicate"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymbolDecl {
    pub kind: SymbolKind,
    pub arity: usize,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("symbol `{name}` used as {existing_kind}/{existing_arity} and as {kind}/{arity}")]
    Conflict {
        name: String,
        existing_kind: SymbolKind,
        existing_arity: usize,
        kind: SymbolKind,
        arity: usize,
    },
}

/// Function and predicate symbols with their arities, in order of first
/// appearance. That order fixes the layout of interpretation tables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    symbols: IndexMap<String, SymbolDecl>,
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a symbol, or checks it against an earlier declaration.
    pub fn declare(&mut self, name: &str, kind: SymbolKind, arity: usize) -> Result<(), SignatureError> {
        match self.symbols.get(name) {
            Some(decl) if decl.kind == kind && decl.arity == arity => Ok(()),
            Some(decl) => Err(SignatureError::Conflict {
                name: name.to_string(),
                existing_kind: decl.kind,
                existing_arity: decl.arity,
                kind,
                arity,
            }),
            None => {
                self.symbols.insert(name.to_string(), SymbolDecl { kind, arity });
                Ok(())
            }
        }
    }

    pub fn get(&self, name: &str) -> Option<SymbolDecl> {
        self.symbols.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, SymbolDecl)> {
        self.symbols.iter().map(|(n, d)| (n.as_str(), *d))
    }

    pub fn functions(&self) -> impl Iterator<Item = (&str, usize)> {
        self.iter().filter(|(_, d)| d.kind == SymbolKind::Function).map(|(n, d)| (n, d.arity))
    }

    pub fn predicates(&self) -> impl Iterator<Item = (&str, usize)> {
        self.iter().filter(|(_, d)| d.kind == SymbolKind::Predicate).map(|(n, d)| (n, d.arity))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Union of two signatures; `self`'s symbols keep their position.
    pub fn union(&self, other: &Signature) -> Result<Signature, SignatureError> {
        let mut out = self.clone();
        for (name, decl) in other.iter() {
            out.declare(name, decl.kind, decl.arity)?;
        }
        Ok(out)
    }

    /// Declares every symbol used in `f`.
    pub fn declare_formula(&mut self, f: &Formula) -> Result<(), SignatureError> {
        match f {
            Formula::Compare(_, l, r) => {
                self.declare_term(l)?;
                self.declare_term(r)
            }
            Formula::Pred(p, args) => {
                self.declare(p, SymbolKind::Predicate, args.len())?;
                args.iter().try_for_each(|a| self.declare_term(a))
            }
            Formula::Not(g) | Formula::ForAll(_, g) | Formula::Exists(_, g) => self.declare_formula(g),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                self.declare_formula(l)?;
                self.declare_formula(r)
            }
        }
    }

    fn declare_term(&mut self, t: &Term) -> Result<(), SignatureError> {
        match t {
            Term::Var(_) | Term::Int(_) => Ok(()),
            Term::Apply(f, args) => {
                self.declare(f, SymbolKind::Function, args.len())?;
                args.iter().try_for_each(|a| self.declare_term(a))
            }
            Term::Arith(_, l, r) => {
                self.declare_term(l)?;
                self.declare_term(r)
            }
        }
    }
}

/// Upper bound on the number of models to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum ModelLimit {
    #[default]
    All,
    AtMost(u64),
}

impl ModelLimit {
    /// Interprets a `max_models` value: -1 means all, positive values cap the count.
    pub fn from_max_models(value: i64) -> Option<Self> {
        match value {
            -1 => Some(ModelLimit::All),
            n if n >= 1 => Some(ModelLimit::AtMost(n as u64)),
            _ => None,
        }
    }

    pub fn as_max_models(self) -> i64 {
        match self {
            ModelLimit::All => -1,
            ModelLimit::AtMost(n) => n as i64,
        }
    }
}

/// A set of closed formulas together with the size of the finite domain.
///
/// Both the domain size and the model limit are optional so that a file holding
/// only extra constraints can be parsed on its own and merged onto a full theory.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Theory {
    pub domain_size: Option<u32>,
    pub max_models: Option<ModelLimit>,
    pub formulas: Vec<Formula>,
    pub signature: Signature,
}

impl Theory {
    pub fn new(domain_size: u32) -> Self {
        Theory { domain_size: Some(domain_size), ..Default::default() }
    }

    /// Builds a theory from formulas, inferring the signature.
    pub fn with_formulas(domain_size: u32, formulas: Vec<Formula>) -> Result<Self, SignatureError> {
        let mut th = Theory::new(domain_size);
        for f in formulas {
            th.push(f)?;
        }
        Ok(th)
    }

    pub fn push(&mut self, f: Formula) -> Result<(), SignatureError> {
        self.signature.declare_formula(&f)?;
        self.formulas.push(f);
        Ok(())
    }

    /// The model limit, defaulting to "all" when the theory does not set one.
    pub fn limit(&self) -> ModelLimit {
        self.max_models.unwrap_or_default()
    }
}
