//! Interpretations over a finite domain and the satisfaction relation.
//!
//! Domain elements are the integers `0..n`. Function values always lie in the
//! domain, but terms are evaluated with ordinary integer arithmetic, so
//! `Dice1 + Dice2 + Dice3` may well exceed `n - 1`. Applying a symbol to an
//! argument outside the domain is an error rather than a silent falsehood.

use std::borrow::Cow;

use indexmap::IndexMap;
use rustc_hash::FxBuildHasher;

use crate::syntax::{ArithOp, Formula, Signature, SymbolKind, Term, Theory};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("`{symbol}` applied to {args:?}, outside the domain 0..{domain_size}")]
    OutOfDomainApplication { symbol: String, args: Vec<i64>, domain_size: u32 },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("symbol `{0}` has no table in the interpretation")]
    UnknownSymbol(String),
    #[error("`{symbol}` expects {expected} arguments, got {found}")]
    ArityMismatch { symbol: String, expected: usize, found: usize },
    #[error("integer overflow in `{0}`")]
    Overflow(&'static str),
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("interpretation does not match the theory signature: {0}")]
    SignatureMismatch(String),
    #[error("theory has no domain size")]
    MissingDomainSize,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// How `+`, `-` and `*` combine two integers.
pub trait Arithmetic: Sync {
    /// `None` reports an overflow.
    fn apply(&self, op: ArithOp, left: i64, right: i64, domain_size: u32) -> Option<i64>;
}

/// Plain integer arithmetic with no wraparound. This is the only rule the
/// solver implements.
#[derive(Clone, Copy, Debug, Default)]
pub struct Unbounded;

impl Arithmetic for Unbounded {
    fn apply(&self, op: ArithOp, left: i64, right: i64, _domain_size: u32) -> Option<i64> {
        checked_arith(op, left, right).ok()
    }
}

pub(crate) fn checked_arith(op: ArithOp, left: i64, right: i64) -> Result<i64, EvalError> {
    let value = match op {
        ArithOp::Add => left.checked_add(right),
        ArithOp::Sub => left.checked_sub(right),
        ArithOp::Mul => left.checked_mul(right),
    };
    value.ok_or_else(|| EvalError::Overflow(op.symbol()))
}

/// The full table of one symbol. Arguments are flattened in mixed radix with
/// the first argument most significant, so `values` is in lexicographic order
/// of argument tuples. Predicate entries are 0 (false) or 1 (true).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Table {
    pub kind: SymbolKind,
    pub arity: usize,
    pub values: Vec<u32>,
}

impl Table {
    /// Range of a single cell: `n` for functions, 2 for predicates.
    pub fn range(&self, domain_size: u32) -> u32 {
        match self.kind {
            SymbolKind::Function => domain_size,
            SymbolKind::Predicate => 2,
        }
    }
}

/// Number of argument tuples of the given arity, or `None` on overflow.
pub fn tuple_count(domain_size: u32, arity: usize) -> Option<usize> {
    let arity = u32::try_from(arity).ok()?;
    (domain_size as usize).checked_pow(arity)
}

/// Decodes a flat table index to its argument tuple.
pub fn tuple_of_index(domain_size: u32, arity: usize, mut index: usize) -> Vec<u32> {
    let n = domain_size as usize;
    let mut args = vec![0; arity];
    for slot in args.iter_mut().rev() {
        *slot = (index % n) as u32;
        index /= n;
    }
    args
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interpretation {
    domain_size: u32,
    tables: IndexMap<String, Table, FxBuildHasher>,
}

impl Interpretation {
    /// The interpretation that maps every cell to 0 (or false).
    pub fn zeroed(signature: &Signature, domain_size: u32) -> Result<Self, ModelError> {
        if domain_size == 0 {
            return Err(ModelError::SignatureMismatch("domain size must be positive".into()));
        }
        let mut tables = IndexMap::default();
        for (name, decl) in signature.iter() {
            let len = tuple_count(domain_size, decl.arity)
                .ok_or_else(|| ModelError::SignatureMismatch(format!("table of `{name}` is too large")))?;
            tables.insert(name.to_string(), Table { kind: decl.kind, arity: decl.arity, values: vec![0; len] });
        }
        Ok(Interpretation { domain_size, tables })
    }

    /// Builds an interpretation from explicit tables, checking that every table
    /// is total and every value lies in its range.
    pub fn from_tables(domain_size: u32, tables: IndexMap<String, Table>) -> Result<Self, ModelError> {
        if domain_size == 0 {
            return Err(ModelError::SignatureMismatch("domain size must be positive".into()));
        }
        for (name, table) in &tables {
            let len = tuple_count(domain_size, table.arity)
                .ok_or_else(|| ModelError::SignatureMismatch(format!("table of `{name}` is too large")))?;
            if table.values.len() != len {
                return Err(ModelError::SignatureMismatch(format!(
                    "table of `{name}` has {} entries, expected {len}",
                    table.values.len()
                )));
            }
            let range = table.range(domain_size);
            if let Some(v) = table.values.iter().find(|&&v| v >= range) {
                return Err(ModelError::SignatureMismatch(format!("value {v} of `{name}` is out of range")));
            }
        }
        Ok(Interpretation { domain_size, tables: tables.into_iter().collect() })
    }

    pub fn domain_size(&self) -> u32 {
        self.domain_size
    }

    pub fn tables(&self) -> impl Iterator<Item = (&str, &Table)> {
        self.tables.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.get(name)
    }

    /// Looks up a function value or predicate truth value (as 0/1).
    pub fn lookup(&self, symbol: &str, args: &[i64]) -> Result<u32, EvalError> {
        let table = self.tables.get(symbol).ok_or_else(|| EvalError::UnknownSymbol(symbol.to_string()))?;
        if table.arity != args.len() {
            return Err(EvalError::ArityMismatch {
                symbol: symbol.to_string(),
                expected: table.arity,
                found: args.len(),
            });
        }
        let n = self.domain_size as i64;
        let mut index = 0usize;
        for &a in args {
            if !(0..n).contains(&a) {
                return Err(EvalError::OutOfDomainApplication {
                    symbol: symbol.to_string(),
                    args: args.to_vec(),
                    domain_size: self.domain_size,
                });
            }
            index = index * n as usize + a as usize;
        }
        Ok(table.values[index])
    }

    /// Total number of cells across all tables.
    pub fn cell_count(&self) -> usize {
        self.tables.values().map(|t| t.values.len()).sum()
    }

    /// Range of every cell in layout order.
    pub fn cell_ranges(&self) -> Vec<u32> {
        self.tables
            .values()
            .flat_map(|t| std::iter::repeat_n(t.range(self.domain_size), t.values.len()))
            .collect()
    }

    /// All cell values, tables in signature order, each table in argument order.
    pub fn cell_values(&self) -> Vec<u32> {
        self.tables.values().flat_map(|t| t.values.iter().copied()).collect()
    }

    /// Overwrites every cell from a flat vector in [`Interpretation::cell_values`] order.
    pub fn set_cell_values(&mut self, values: &[u32]) {
        let mut rest = values;
        for table in self.tables.values_mut() {
            let (head, tail) = rest.split_at(table.values.len());
            table.values.copy_from_slice(head);
            rest = tail;
        }
    }

    /// Sets one cell, addressed by table position and offset within the table.
    pub(crate) fn set_cell(&mut self, table: usize, offset: usize, value: u32) {
        self.tables[table].values[offset] = value;
    }

    /// Checks that the tables cover exactly `signature` at `domain_size`.
    pub fn check_signature(&self, signature: &Signature, domain_size: u32) -> Result<(), ModelError> {
        if self.domain_size != domain_size {
            return Err(ModelError::SignatureMismatch(format!(
                "domain size {} vs {}",
                self.domain_size, domain_size
            )));
        }
        if self.tables.len() != signature.len() {
            return Err(ModelError::SignatureMismatch(format!(
                "{} tables for {} symbols",
                self.tables.len(),
                signature.len()
            )));
        }
        for (name, decl) in signature.iter() {
            match self.tables.get(name) {
                Some(t) if t.kind == decl.kind && t.arity == decl.arity => {}
                Some(_) => return Err(ModelError::SignatureMismatch(format!("`{name}` has the wrong shape"))),
                None => return Err(ModelError::SignatureMismatch(format!("no table for `{name}`"))),
            }
        }
        Ok(())
    }
}

/// Variable assignment. Later bindings shadow earlier ones.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binding<'a> {
    slots: Vec<(Cow<'a, str>, u32)>,
}

impl<'a> Binding<'a> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<Cow<'a, str>>, value: u32) -> Self {
        self.push(var, value);
        self
    }

    pub fn push(&mut self, var: impl Into<Cow<'a, str>>, value: u32) {
        self.slots.push((var.into(), value));
    }

    pub fn pop(&mut self) {
        self.slots.pop();
    }

    pub fn get(&self, var: &str) -> Option<u32> {
        // names are short, so an inline byte loop beats a memcmp call
        let same = |v: &str| v.len() == var.len() && v.bytes().zip(var.bytes()).all(|(a, b)| a == b);
        self.slots.iter().rev().find(|(v, _)| same(v)).map(|&(_, value)| value)
    }

    fn set_last(&mut self, value: u32) {
        if let Some(last) = self.slots.last_mut() {
            last.1 = value;
        }
    }
}

pub fn eval_term(t: &Term, i: &Interpretation, b: &Binding) -> Result<i64, EvalError> {
    eval_term_with(&Unbounded, t, i, b)
}

pub fn eval_term_with(arith: &dyn Arithmetic, t: &Term, i: &Interpretation, b: &Binding) -> Result<i64, EvalError> {
    Evaluator { arith, interp: i }.term(t, b).map_err(|e| *e)
}

pub fn holds(f: &Formula, i: &Interpretation, b: &Binding) -> Result<bool, EvalError> {
    holds_with(&Unbounded, f, i, b)
}

pub fn holds_with(arith: &dyn Arithmetic, f: &Formula, i: &Interpretation, b: &Binding) -> Result<bool, EvalError> {
    let mut scratch = b.clone();
    Evaluator { arith, interp: i }.holds(f, &mut scratch).map_err(|e| *e)
}

/// True iff the interpretation satisfies every formula of the theory.
pub fn is_model(th: &Theory, i: &Interpretation) -> Result<bool, ModelError> {
    is_model_with(&Unbounded, th, i)
}

pub fn is_model_with(arith: &dyn Arithmetic, th: &Theory, i: &Interpretation) -> Result<bool, ModelError> {
    let n = th.domain_size.ok_or(ModelError::MissingDomainSize)?;
    i.check_signature(&th.signature, n)?;
    Ok(satisfies(arith, th, i)?)
}

/// [`is_model_with`] minus the signature check, for callers that have already
/// made it once for a whole family of interpretations.
pub(crate) fn satisfies(arith: &dyn Arithmetic, th: &Theory, i: &Interpretation) -> Result<bool, EvalError> {
    satisfies_in(arith, th, i, &mut Binding::new())
}

/// [`satisfies`] with a caller-owned scratch binding, which must be empty.
pub(crate) fn satisfies_in<'f>(
    arith: &dyn Arithmetic,
    th: &'f Theory,
    i: &Interpretation,
    binding: &mut Binding<'f>,
) -> Result<bool, EvalError> {
    let eval = Evaluator { arith, interp: i };
    for f in &th.formulas {
        if !eval.holds(f, binding).map_err(|e| *e)? {
            return Ok(false);
        }
    }
    Ok(true)
}

// Errors are boxed inside the evaluator so the success path stays small.
type Eval<T> = Result<T, Box<EvalError>>;

struct Evaluator<'a> {
    arith: &'a dyn Arithmetic,
    interp: &'a Interpretation,
}

impl Evaluator<'_> {
    fn term(&self, t: &Term, b: &Binding) -> Eval<i64> {
        match t {
            Term::Var(v) => b.get(v).map(i64::from).ok_or_else(|| Box::new(EvalError::UnboundVariable(v.clone()))),
            Term::Int(value) => Ok(*value),
            Term::Apply(f, args) => self.apply(f, args, b).map(i64::from),
            Term::Arith(op, l, r) => {
                let (l, r) = (self.term(l, b)?, self.term(r, b)?);
                self.arith
                    .apply(*op, l, r, self.interp.domain_size)
                    .ok_or_else(|| Box::new(EvalError::Overflow(op.symbol())))
            }
        }
    }

    // Table lookup without collecting the arguments; they are only gathered to
    // build an error.
    fn apply(&self, f: &str, args: &[Term], b: &Binding) -> Eval<u32> {
        let i = self.interp;
        let table = i.tables.get(f).ok_or_else(|| Box::new(EvalError::UnknownSymbol(f.to_string())))?;
        if table.arity != args.len() {
            return Err(Box::new(EvalError::ArityMismatch {
                symbol: f.to_string(),
                expected: table.arity,
                found: args.len(),
            }));
        }
        let n = i.domain_size as i64;
        let mut index = 0usize;
        for a in args {
            let v = self.term(a, b)?;
            if !(0..n).contains(&v) {
                let values = args.iter().map(|a| self.term(a, b)).collect::<Eval<Vec<_>>>()?;
                return i.lookup(f, &values).map_err(Box::new);
            }
            index = index * n as usize + v as usize;
        }
        Ok(table.values[index])
    }

    // Connectives short-circuit left to right.
    fn holds<'f>(&self, f: &'f Formula, b: &mut Binding<'f>) -> Eval<bool> {
        Ok(match f {
            Formula::Compare(rel, l, r) => rel.test(self.term(l, b)?, self.term(r, b)?),
            Formula::Pred(p, args) => self.apply(p, args, b)? != 0,
            Formula::Not(g) => !self.holds(g, b)?,
            Formula::And(l, r) => self.holds(l, b)? && self.holds(r, b)?,
            Formula::Or(l, r) => self.holds(l, b)? || self.holds(r, b)?,
            Formula::Implies(l, r) => !self.holds(l, b)? || self.holds(r, b)?,
            Formula::Iff(l, r) => self.holds(l, b)? == self.holds(r, b)?,
            Formula::ForAll(v, body) => self.quantify(v, body, b, false)?,
            Formula::Exists(v, body) => self.quantify(v, body, b, true)?,
        })
    }

    /// Searches the domain for an element where `body` evaluates to `existential`.
    fn quantify<'f>(&self, var: &'f str, body: &'f Formula, b: &mut Binding<'f>, existential: bool) -> Eval<bool> {
        b.push(var, 0);
        let mut found = false;
        for e in 0..self.interp.domain_size {
            b.set_last(e);
            match self.holds(body, b) {
                Ok(value) if value == existential => {
                    found = true;
                    break;
                }
                Ok(_) => {}
                Err(err) => {
                    b.pop();
                    return Err(err);
                }
            }
        }
        b.pop();
        Ok(if existential { found } else { !found })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Rel, SymbolKind};

    fn constants(n: u32, values: &[(&str, u32)]) -> Interpretation {
        let tables = values
            .iter()
            .map(|&(name, v)| (name.to_string(), Table { kind: SymbolKind::Function, arity: 0, values: vec![v] }))
            .collect();
        Interpretation::from_tables(n, tables).unwrap()
    }

    fn dice_sum() -> Term {
        let d = |k: u32| Term::constant(format!("Dice{k}"));
        Term::arith(ArithOp::Add, Term::arith(ArithOp::Add, d(1), d(2)), d(3))
    }

    #[test]
    fn dice_sum_does_not_wrap() {
        let i = constants(7, &[("Dice1", 6), ("Dice2", 6), ("Dice3", 6)]);
        assert_eq!(eval_term(&dice_sum(), &i, &Binding::new()), Ok(18));
    }

    #[test]
    fn literal_evaluates_to_itself() {
        let i = constants(2, &[]);
        assert_eq!(eval_term(&Term::Int(7), &i, &Binding::new()), Ok(7));
    }

    #[test]
    fn successor_wraps_at_last_seat() {
        let mut tables = IndexMap::new();
        tables.insert("s".to_string(), Table { kind: SymbolKind::Function, arity: 1, values: vec![1, 2, 3, 4, 0] });
        let i = Interpretation::from_tables(5, tables).unwrap();
        let t = Term::apply("s", vec![Term::Int(4)]);
        assert_eq!(eval_term(&t, &i, &Binding::new()), Ok(0));
    }

    #[test]
    fn out_of_domain_argument_is_an_error() {
        let mut tables = IndexMap::new();
        tables.insert("s".to_string(), Table { kind: SymbolKind::Function, arity: 1, values: vec![1, 2, 0] });
        let i = Interpretation::from_tables(3, tables).unwrap();
        let t = Term::apply("s", vec![Term::Int(3)]);
        assert!(matches!(
            eval_term(&t, &i, &Binding::new()),
            Err(EvalError::OutOfDomainApplication { .. })
        ));
    }

    #[test]
    fn queen_in_first_deck_satisfies_disjunction() {
        let i = constants(52, &[("deck1", 7), ("deck2", 3)]);
        let f = Formula::or(
            Formula::compare(Rel::Eq, Term::constant("deck1"), Term::Int(7)),
            Formula::compare(Rel::Eq, Term::constant("deck2"), Term::Int(7)),
        );
        assert_eq!(holds(&f, &i, &Binding::new()), Ok(true));
    }

    #[test]
    fn reflexivity_holds() {
        let i = constants(3, &[]);
        let f = Formula::forall("x", Formula::compare(Rel::Eq, Term::var("x"), Term::var("x")));
        assert_eq!(holds(&f, &i, &Binding::new()), Ok(true));
    }

    #[test]
    fn small_dice_sum_is_not_greater_than_seven() {
        let i = constants(7, &[("Dice1", 1), ("Dice2", 2), ("Dice3", 3)]);
        let f = Formula::compare(Rel::Lt, Term::Int(7), dice_sum());
        assert_eq!(holds(&f, &i, &Binding::new()), Ok(false));
    }

    #[test]
    fn unbound_variable_is_reported() {
        let i = constants(3, &[]);
        let f = Formula::compare(Rel::Eq, Term::var("y"), Term::Int(0));
        assert_eq!(holds(&f, &i, &Binding::new()), Err(EvalError::UnboundVariable("y".into())));
        assert_eq!(holds(&f, &i, &Binding::new().with("y", 0)), Ok(true));
    }

    #[test]
    fn inner_binding_shadows_outer() {
        let i = constants(3, &[]);
        // exists x (x = 2) evaluated with an outer x = 0 still finds 2
        let f = Formula::exists("x", Formula::compare(Rel::Eq, Term::var("x"), Term::Int(2)));
        assert_eq!(holds(&f, &i, &Binding::new().with("x", 0)), Ok(true));
    }

    #[test]
    fn empty_theory_is_satisfied() {
        let mut th = Theory::new(2);
        th.signature.declare("c", SymbolKind::Function, 0).unwrap();
        let i = Interpretation::zeroed(&th.signature, 2).unwrap();
        assert_eq!(is_model(&th, &i), Ok(true));
    }

    #[test]
    fn mismatched_tables_are_rejected() {
        let th = Theory::with_formulas(2, vec![Formula::pred("p", vec![])]).unwrap();
        let i = constants(2, &[("c", 0)]);
        assert!(matches!(is_model(&th, &i), Err(ModelError::SignatureMismatch(_))));
        let other_size = Interpretation::zeroed(&th.signature, 3).unwrap();
        assert!(matches!(is_model(&th, &other_size), Err(ModelError::SignatureMismatch(_))));
    }

    #[test]
    fn from_tables_checks_ranges() {
        let mut tables = IndexMap::new();
        tables.insert("p".to_string(), Table { kind: SymbolKind::Predicate, arity: 1, values: vec![0, 2] });
        assert!(Interpretation::from_tables(2, tables).is_err());
        let mut tables = IndexMap::new();
        tables.insert("f".to_string(), Table { kind: SymbolKind::Function, arity: 1, values: vec![0] });
        assert!(Interpretation::from_tables(2, tables).is_err());
    }

    #[test]
    fn tuple_decoding_is_lexicographic() {
        assert_eq!(tuple_of_index(3, 2, 0), vec![0, 0]);
        assert_eq!(tuple_of_index(3, 2, 1), vec![0, 1]);
        assert_eq!(tuple_of_index(3, 2, 3), vec![1, 0]);
        assert_eq!(tuple_of_index(3, 2, 8), vec![2, 2]);
        assert_eq!(tuple_of_index(3, 0, 0), Vec::<u32>::new());
    }
}
