//! Grounding and backtracking model search.
//!
//! A theory over the domain `0..n` is grounded by substituting every domain
//! element for each quantified variable and folding whatever can be decided
//! without looking at an interpretation. What remains is a list of ground
//! constraints over *cells*, the individual entries of the symbol tables.
//!
//! The search assigns cells depth-first in their fixed layout order (symbols
//! in order of first appearance, argument tuples lexicographically inside each
//! symbol), trying values in ascending order. A constraint is evaluated as soon
//! as the last cell it reads has been assigned. No symmetry breaking is done:
//! every labeled model counts.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};

use crate::semantics::{checked_arith, tuple_count, tuple_of_index, EvalError, Interpretation, ModelError};
use crate::syntax::{ArithOp, Formula, ModelLimit, Rel, SymbolKind, Term, Theory};

/// Cells beyond this many are refused rather than allocated.
pub const MAX_CELLS: usize = 1 << 24;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum SolveError {
    #[error("theory has no domain size")]
    MissingDomainSize,
    #[error("signature needs more than {MAX_CELLS} cells")]
    TooManyCells,
    #[error("symbol `{0}` is not in the signature")]
    UnknownSymbol(String),
    #[error("invalid theory: {0}")]
    InvalidTheory(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::MissingDomainSize => SolveError::MissingDomainSize,
            ModelError::Eval(e) => SolveError::Eval(e),
            ModelError::SignatureMismatch(msg) => SolveError::InvalidTheory(msg),
        }
    }
}

/// One entry of one symbol's table.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cell {
    pub symbol: String,
    pub args: Vec<u32>,
    pub kind: SymbolKind,
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbol)?;
        if !self.args.is_empty() {
            let args: Vec<String> = self.args.iter().map(u32::to_string).collect();
            write!(f, "({})", args.join(","))?;
        }
        Ok(())
    }
}

/// A quantifier-free ground formula and the cells it may read, as indices
/// into [`GroundProblem::cells`]. A nested application such as `age(s(0))`
/// reads `s(0)` and, since its argument is only known during search, every
/// cell of `age`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub formula: Formula,
    pub reads: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelCount {
    pub count: BigUint,
    /// False when a model limit stopped the search early.
    pub exhausted: bool,
}

impl ModelCount {
    pub fn exact(count: impl Into<BigUint>) -> Self {
        ModelCount { count: count.into(), exhausted: true }
    }
}

impl fmt::Display for ModelCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.count)?;
        if !self.exhausted {
            write!(f, " (stopped at the model limit)")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
struct SymbolLayout {
    offset: usize,
    arity: usize,
    len: usize,
}

#[derive(Clone, Debug)]
enum GTerm {
    Lit(i64),
    Cell(usize),
    App(usize, Vec<GTerm>),
    Arith(ArithOp, Box<GTerm>, Box<GTerm>),
}

#[derive(Clone, Debug)]
enum GForm {
    Cmp(Rel, GTerm, GTerm),
    Pred(usize),
    PredApp(usize, Vec<GTerm>),
    Not(Box<GForm>),
    And(Vec<GForm>),
    Or(Vec<GForm>),
    Implies(Box<GForm>, Box<GForm>),
    Iff(Box<GForm>, Box<GForm>),
}

/// A theory reduced to cells and ground constraints.
#[derive(Clone, Debug)]
pub struct GroundProblem {
    pub domain_size: u32,
    pub cells: Vec<Cell>,
    pub constraints: Vec<Constraint>,
    /// Set when some formula folded to false, so there are no models at all.
    pub inconsistent: bool,
    template: Interpretation,
    symbols: Vec<SymbolLayout>,
    compiled: Vec<GForm>,
    ranges: Vec<u32>,
    /// Constraints to evaluate right after each cell is assigned.
    check_at: Vec<Vec<usize>>,
}

enum Folded {
    True,
    False,
    Open(Formula),
}

/// Grounds a theory over its domain.
pub fn ground(th: &Theory) -> Result<GroundProblem, SolveError> {
    let n = th.domain_size.ok_or(SolveError::MissingDomainSize)?;
    let template = Interpretation::zeroed(&th.signature, n)?;
    let mut symbols = Vec::new();
    let mut cells = Vec::new();
    for (name, decl) in th.signature.iter() {
        let len = tuple_count(n, decl.arity).ok_or(SolveError::TooManyCells)?;
        if cells.len() + len > MAX_CELLS {
            return Err(SolveError::TooManyCells);
        }
        symbols.push(SymbolLayout { offset: cells.len(), arity: decl.arity, len });
        cells.extend((0..len).map(|k| Cell { symbol: name.to_string(), args: tuple_of_index(n, decl.arity, k), kind: decl.kind }));
    }
    let ranges = cells
        .iter()
        .map(|c| match c.kind {
            SymbolKind::Function => n,
            SymbolKind::Predicate => 2,
        })
        .collect();

    let grounder = Grounder { n };
    let mut folded = Vec::new();
    let mut env = Vec::new();
    for f in &th.formulas {
        grounder.split(f, &mut env, &mut folded)?;
    }
    let inconsistent = folded.iter().any(|f| matches!(f, Folded::False));

    let mut problem = GroundProblem {
        domain_size: n,
        check_at: vec![Vec::new(); cells.len()],
        cells,
        constraints: Vec::new(),
        inconsistent,
        template,
        symbols,
        compiled: Vec::new(),
        ranges,
    };
    if !inconsistent {
        for f in folded {
            if let Folded::Open(formula) = f {
                let mut reads = BTreeSet::new();
                let compiled = problem.compile_formula(th, &formula, &mut reads)?;
                let reads: Vec<usize> = reads.into_iter().collect();
                let last = *reads.last().expect("open ground formulas read at least one cell");
                problem.check_at[last].push(problem.compiled.len());
                problem.compiled.push(compiled);
                problem.constraints.push(Constraint { formula, reads });
            }
        }
    }
    Ok(problem)
}

/// Streams the models of a theory in lexicographic order of their cell values.
pub fn enumerate(th: &Theory, limit: ModelLimit) -> Result<Models, SolveError> {
    Ok(ground(th)?.into_models(limit))
}

/// Counts models up to the theory's own `max_models` limit.
pub fn count_models(th: &Theory) -> Result<ModelCount, SolveError> {
    ground(th)?.count(th.limit())
}

struct Grounder {
    n: u32,
}

impl Grounder {
    /// Grounds a top-level formula, splitting conjunctions and universal
    /// quantifiers into separate constraints.
    fn split(&self, f: &Formula, env: &mut Vec<(String, i64)>, out: &mut Vec<Folded>) -> Result<(), SolveError> {
        match f {
            Formula::And(l, r) => {
                self.split(l, env, out)?;
                self.split(r, env, out)
            }
            Formula::ForAll(v, body) => {
                for e in 0..self.n {
                    env.push((v.clone(), e as i64));
                    let r = self.split(body, env, out);
                    env.pop();
                    r?;
                }
                Ok(())
            }
            _ => {
                let folded = self.fold(f, env)?;
                if !matches!(folded, Folded::True) {
                    out.push(folded);
                }
                Ok(())
            }
        }
    }

    fn term(&self, t: &Term, env: &[(String, i64)]) -> Result<Term, SolveError> {
        Ok(match t {
            Term::Var(v) => match env.iter().rev().find(|(name, _)| name == v) {
                Some(&(_, value)) => Term::Int(value),
                None => return Err(EvalError::UnboundVariable(v.clone()).into()),
            },
            Term::Int(v) => Term::Int(*v),
            Term::Apply(f, args) => Term::Apply(f.clone(), self.args(f, args, env)?),
            Term::Arith(op, l, r) => match (self.term(l, env)?, self.term(r, env)?) {
                (Term::Int(a), Term::Int(b)) => Term::Int(checked_arith(*op, a, b)?),
                (l, r) => Term::arith(*op, l, r),
            },
        })
    }

    fn args(&self, symbol: &str, args: &[Term], env: &[(String, i64)]) -> Result<Vec<Term>, SolveError> {
        let args = args.iter().map(|a| self.term(a, env)).collect::<Result<Vec<_>, _>>()?;
        let literal: Option<Vec<i64>> = args.iter().map(|a| if let Term::Int(v) = a { Some(*v) } else { None }).collect();
        if let Some(values) = literal {
            if values.iter().any(|&v| v < 0 || v >= self.n as i64) {
                return Err(EvalError::OutOfDomainApplication {
                    symbol: symbol.to_string(),
                    args: values,
                    domain_size: self.n,
                }
                .into());
            }
        }
        Ok(args)
    }

    // Connectives fold left to right and stop once the value is decided,
    // matching the evaluation order of `holds`.
    fn fold(&self, f: &Formula, env: &mut Vec<(String, i64)>) -> Result<Folded, SolveError> {
        Ok(match f {
            Formula::Compare(rel, l, r) => {
                let (l, r) = (self.term(l, env)?, self.term(r, env)?);
                match (&l, &r) {
                    (Term::Int(a), Term::Int(b)) => truth(rel.test(*a, *b)),
                    _ if l == r => truth(matches!(rel, Rel::Eq | Rel::Le)),
                    _ => Folded::Open(Formula::Compare(*rel, l, r)),
                }
            }
            Formula::Pred(p, args) => Folded::Open(Formula::Pred(p.clone(), self.args(p, args, env)?)),
            Formula::Not(g) => match self.fold(g, env)? {
                Folded::True => Folded::False,
                Folded::False => Folded::True,
                Folded::Open(g) => Folded::Open(Formula::not(g)),
            },
            Formula::And(l, r) => match self.fold(l, env)? {
                Folded::False => Folded::False,
                Folded::True => self.fold(r, env)?,
                Folded::Open(l) => match self.fold(r, env)? {
                    Folded::False => Folded::False,
                    Folded::True => Folded::Open(l),
                    Folded::Open(r) => Folded::Open(Formula::and(l, r)),
                },
            },
            Formula::Or(l, r) => match self.fold(l, env)? {
                Folded::True => Folded::True,
                Folded::False => self.fold(r, env)?,
                Folded::Open(l) => match self.fold(r, env)? {
                    Folded::True => Folded::True,
                    Folded::False => Folded::Open(l),
                    Folded::Open(r) => Folded::Open(Formula::or(l, r)),
                },
            },
            Formula::Implies(l, r) => match self.fold(l, env)? {
                Folded::False => Folded::True,
                Folded::True => self.fold(r, env)?,
                Folded::Open(l) => match self.fold(r, env)? {
                    Folded::True => Folded::True,
                    Folded::False => Folded::Open(Formula::not(l)),
                    Folded::Open(r) => Folded::Open(Formula::implies(l, r)),
                },
            },
            Formula::Iff(l, r) => match (self.fold(l, env)?, self.fold(r, env)?) {
                (Folded::True, x) | (x, Folded::True) => x,
                (Folded::False, Folded::False) => Folded::True,
                (Folded::False, Folded::Open(g)) | (Folded::Open(g), Folded::False) => Folded::Open(Formula::not(g)),
                (Folded::Open(l), Folded::Open(r)) => Folded::Open(Formula::iff(l, r)),
            },
            Formula::ForAll(v, body) => self.quantifier(v, body, env, false)?,
            Formula::Exists(v, body) => self.quantifier(v, body, env, true)?,
        })
    }

    fn quantifier(&self, var: &str, body: &Formula, env: &mut Vec<(String, i64)>, existential: bool) -> Result<Folded, SolveError> {
        let mut open = Vec::new();
        for e in 0..self.n {
            env.push((var.to_string(), e as i64));
            let folded = self.fold(body, env);
            env.pop();
            match folded? {
                // a witness (or counterexample) decides the quantifier
                Folded::True if existential => return Ok(Folded::True),
                Folded::False if !existential => return Ok(Folded::False),
                Folded::Open(g) => open.push(g),
                _ => {}
            }
        }
        let join = if existential { Formula::or } else { Formula::and };
        Ok(match open.pop() {
            None => truth(!existential),
            Some(mut acc) => {
                while let Some(prev) = open.pop() {
                    acc = join(prev, acc);
                }
                Folded::Open(acc)
            }
        })
    }
}

fn truth(b: bool) -> Folded {
    if b {
        Folded::True
    } else {
        Folded::False
    }
}

impl GroundProblem {
    fn symbol_index(&self, th: &Theory, name: &str) -> Result<usize, SolveError> {
        th.signature
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| SolveError::UnknownSymbol(name.to_string()))
    }

    fn compile_args(&self, th: &Theory, args: &[Term], reads: &mut BTreeSet<usize>) -> Result<Vec<GTerm>, SolveError> {
        args.iter().map(|a| self.compile_term(th, a, reads)).collect()
    }

    /// Resolves an application either to a fixed cell or to a dynamic lookup.
    fn compile_app(&self, th: &Theory, name: &str, args: &[Term], reads: &mut BTreeSet<usize>) -> Result<Result<usize, (usize, Vec<GTerm>)>, SolveError> {
        let sym = self.symbol_index(th, name)?;
        let layout = &self.symbols[sym];
        let args = self.compile_args(th, args, reads)?;
        let literal: Option<Vec<i64>> = args.iter().map(|a| if let GTerm::Lit(v) = a { Some(*v) } else { None }).collect();
        Ok(match literal {
            Some(values) => {
                let n = self.domain_size as usize;
                let index = values.iter().fold(0usize, |acc, &v| acc * n + v as usize);
                let cell = layout.offset + index;
                reads.insert(cell);
                Ok(cell)
            }
            None => {
                reads.extend(layout.offset..layout.offset + layout.len);
                Err((sym, args))
            }
        })
    }

    fn compile_term(&self, th: &Theory, t: &Term, reads: &mut BTreeSet<usize>) -> Result<GTerm, SolveError> {
        Ok(match t {
            Term::Int(v) => GTerm::Lit(*v),
            Term::Var(v) => return Err(EvalError::UnboundVariable(v.clone()).into()),
            Term::Apply(f, args) => match self.compile_app(th, f, args, reads)? {
                Ok(cell) => GTerm::Cell(cell),
                Err((sym, args)) => GTerm::App(sym, args),
            },
            Term::Arith(op, l, r) => {
                GTerm::Arith(*op, Box::new(self.compile_term(th, l, reads)?), Box::new(self.compile_term(th, r, reads)?))
            }
        })
    }

    fn compile_formula(&self, th: &Theory, f: &Formula, reads: &mut BTreeSet<usize>) -> Result<GForm, SolveError> {
        Ok(match f {
            Formula::Compare(rel, l, r) => GForm::Cmp(*rel, self.compile_term(th, l, reads)?, self.compile_term(th, r, reads)?),
            Formula::Pred(p, args) => match self.compile_app(th, p, args, reads)? {
                Ok(cell) => GForm::Pred(cell),
                Err((sym, args)) => GForm::PredApp(sym, args),
            },
            Formula::Not(g) => GForm::Not(Box::new(self.compile_formula(th, g, reads)?)),
            Formula::And(..) | Formula::Or(..) => {
                let is_and = matches!(f, Formula::And(..));
                let mut parts = Vec::new();
                self.flatten(th, f, is_and, reads, &mut parts)?;
                if is_and {
                    GForm::And(parts)
                } else {
                    GForm::Or(parts)
                }
            }
            Formula::Implies(l, r) => GForm::Implies(
                Box::new(self.compile_formula(th, l, reads)?),
                Box::new(self.compile_formula(th, r, reads)?),
            ),
            Formula::Iff(l, r) => GForm::Iff(
                Box::new(self.compile_formula(th, l, reads)?),
                Box::new(self.compile_formula(th, r, reads)?),
            ),
            Formula::ForAll(..) | Formula::Exists(..) => unreachable!("ground formulas have no quantifiers"),
        })
    }

    /// Collects the operands of a chain of the same connective.
    fn flatten(&self, th: &Theory, f: &Formula, is_and: bool, reads: &mut BTreeSet<usize>, out: &mut Vec<GForm>) -> Result<(), SolveError> {
        let mut node = f;
        loop {
            match (node, is_and) {
                (Formula::And(l, r), true) | (Formula::Or(l, r), false) => {
                    self.flatten(th, l, is_and, reads, out)?;
                    node = r;
                }
                _ => {
                    out.push(self.compile_formula(th, node, reads)?);
                    return Ok(());
                }
            }
        }
    }

    fn eval_term(&self, t: &GTerm, values: &[u32]) -> Result<i64, EvalError> {
        Ok(match t {
            GTerm::Lit(v) => *v,
            GTerm::Cell(c) => values[*c] as i64,
            GTerm::App(sym, args) => values[self.dynamic_cell(*sym, args, values)?] as i64,
            GTerm::Arith(op, l, r) => checked_arith(*op, self.eval_term(l, values)?, self.eval_term(r, values)?)?,
        })
    }

    fn dynamic_cell(&self, sym: usize, args: &[GTerm], values: &[u32]) -> Result<usize, EvalError> {
        let layout = &self.symbols[sym];
        debug_assert_eq!(layout.arity, args.len());
        let n = self.domain_size as i64;
        let mut index = 0usize;
        let mut evaluated = Vec::with_capacity(args.len());
        for a in args {
            let v = self.eval_term(a, values)?;
            evaluated.push(v);
            if !(0..n).contains(&v) {
                let symbol = self.cells[layout.offset].symbol.clone();
                return Err(EvalError::OutOfDomainApplication { symbol, args: evaluated, domain_size: self.domain_size });
            }
            index = index * n as usize + v as usize;
        }
        Ok(layout.offset + index)
    }

    fn eval(&self, f: &GForm, values: &[u32]) -> Result<bool, EvalError> {
        Ok(match f {
            GForm::Cmp(rel, l, r) => rel.test(self.eval_term(l, values)?, self.eval_term(r, values)?),
            GForm::Pred(c) => values[*c] != 0,
            GForm::PredApp(sym, args) => values[self.dynamic_cell(*sym, args, values)?] != 0,
            GForm::Not(g) => !self.eval(g, values)?,
            GForm::And(parts) => {
                for p in parts {
                    if !self.eval(p, values)? {
                        return Ok(false);
                    }
                }
                true
            }
            GForm::Or(parts) => {
                for p in parts {
                    if self.eval(p, values)? {
                        return Ok(true);
                    }
                }
                false
            }
            GForm::Implies(l, r) => !self.eval(l, values)? || self.eval(r, values)?,
            GForm::Iff(l, r) => self.eval(l, values)? == self.eval(r, values)?,
        })
    }

    /// Evaluates the constraints whose last cell is `cell`.
    fn consistent_at(&self, cell: usize, values: &[u32]) -> Result<bool, EvalError> {
        for &k in &self.check_at[cell] {
            if !self.eval(&self.compiled[k], values)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Cells that no constraint reads. They multiply the count without search.
    fn free_cells(&self) -> Vec<bool> {
        let mut free = vec![true; self.cells.len()];
        for c in &self.constraints {
            for &cell in &c.reads {
                free[cell] = false;
            }
        }
        free
    }

    /// Counts models without building them.
    pub fn count(&self, limit: ModelLimit) -> Result<ModelCount, SolveError> {
        if self.inconsistent {
            return Ok(ModelCount::exact(0u32));
        }
        let free = self.free_cells();
        let mut factor = BigUint::one();
        for (cell, &is_free) in free.iter().enumerate() {
            if is_free {
                factor *= self.ranges[cell];
            }
        }
        let searched: Vec<usize> = (0..self.cells.len()).filter(|&c| !free[c]).collect();
        // Stop once `leaves * factor` exceeds the limit.
        let leaf_budget = match limit {
            ModelLimit::All => None,
            ModelLimit::AtMost(l) => Some((BigUint::from(l) / &factor).to_u128().unwrap_or(u128::MAX)),
        };
        let mut search = CountSearch { problem: self, searched: &searched, values: vec![0; self.cells.len()], leaves: 0, leaf_budget };
        let complete = search.run(0)?;
        let total = BigUint::from(search.leaves) * factor;
        Ok(match limit {
            ModelLimit::AtMost(l) if !complete || total > BigUint::from(l) => {
                ModelCount { count: BigUint::from(l), exhausted: false }
            }
            _ => ModelCount { count: total, exhausted: true },
        })
    }

    pub fn into_models(self, limit: ModelLimit) -> Models {
        let cells = self.cells.len();
        Models {
            values: vec![0; cells],
            next_value: vec![0; cells],
            depth: 0,
            emitted: 0,
            limit,
            done: self.inconsistent,
            peeked: None,
            problem: self,
        }
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    fn interpretation(&self, values: &[u32]) -> Interpretation {
        let mut i = self.template.clone();
        i.set_cell_values(values);
        i
    }
}

struct CountSearch<'a> {
    problem: &'a GroundProblem,
    searched: &'a [usize],
    values: Vec<u32>,
    leaves: u128,
    leaf_budget: Option<u128>,
}

impl CountSearch<'_> {
    /// Returns false if the leaf budget cut the search short.
    fn run(&mut self, depth: usize) -> Result<bool, EvalError> {
        if depth == self.searched.len() {
            self.leaves += 1;
            return Ok(self.leaf_budget.is_none_or(|b| self.leaves <= b));
        }
        let cell = self.searched[depth];
        for v in 0..self.problem.ranges[cell] {
            self.values[cell] = v;
            if self.problem.consistent_at(cell, &self.values)? && !self.run(depth + 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Iterator over the models of a [`GroundProblem`].
pub struct Models {
    problem: GroundProblem,
    values: Vec<u32>,
    next_value: Vec<u32>,
    depth: usize,
    emitted: u64,
    limit: ModelLimit,
    done: bool,
    peeked: Option<Vec<u32>>,
}

impl Models {
    pub fn problem(&self) -> &GroundProblem {
        &self.problem
    }

    /// True when the limit stopped the stream and at least one more model exists.
    pub fn truncated(&mut self) -> Result<bool, SolveError> {
        if !self.limit_reached() || self.done {
            return Ok(false);
        }
        if self.peeked.is_none() {
            self.peeked = self.advance()?;
        }
        Ok(self.peeked.is_some())
    }

    fn limit_reached(&self) -> bool {
        matches!(self.limit, ModelLimit::AtMost(l) if self.emitted >= l)
    }

    fn advance(&mut self) -> Result<Option<Vec<u32>>, EvalError> {
        let cells = self.values.len();
        if cells == 0 {
            self.done = true;
            return Ok(Some(Vec::new()));
        }
        loop {
            if self.depth == cells {
                self.depth = cells - 1;
                return Ok(Some(self.values.clone()));
            }
            let d = self.depth;
            if self.next_value[d] >= self.problem.ranges[d] {
                if d == 0 {
                    self.done = true;
                    return Ok(None);
                }
                self.depth -= 1;
                continue;
            }
            self.values[d] = self.next_value[d];
            self.next_value[d] += 1;
            if self.problem.consistent_at(d, &self.values)? {
                self.depth += 1;
                if self.depth < cells {
                    self.next_value[self.depth] = 0;
                }
            }
        }
    }
}

impl Iterator for Models {
    type Item = Result<Interpretation, SolveError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done || self.limit_reached() {
            return None;
        }
        let next = match self.peeked.take() {
            Some(values) => Ok(Some(values)),
            None => self.advance(),
        };
        match next {
            Ok(Some(values)) => {
                self.emitted += 1;
                Some(Ok(self.problem.interpretation(&values)))
            }
            Ok(None) => None,
            Err(e) => {
                self.done = true;
                Some(Err(e.into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{merge_theories, parse_str};
    use crate::semantics::is_model;

    fn theory(text: &str) -> Theory {
        parse_str(text).unwrap_or_else(|d| panic!("{d:?}"))
    }

    fn corpus(name: &str) -> Theory {
        theory(crate::corpus::bundled_file(name).expect("bundled file"))
    }

    fn merged(base: &str, extra: &str) -> Theory {
        merge_theories(&corpus(base), &corpus(extra)).unwrap()
    }

    fn count(th: &Theory) -> u64 {
        let c = count_models(th).unwrap();
        assert!(c.exhausted);
        c.count.to_u64().unwrap()
    }

    #[test]
    fn forall_splits_into_instances() {
        let th = theory("assign(domain_size, 3). formulas(assumptions). all x (s(x) != x). end_of_list.");
        let g = ground(&th).unwrap();
        assert_eq!(g.constraints.len(), 3);
        let printed: Vec<String> = g.constraints.iter().map(|c| c.formula.to_string()).collect();
        assert_eq!(printed, vec!["s(0) != 0", "s(1) != 1", "s(2) != 2"]);
        assert_eq!(g.constraints[1].reads, vec![1]);
    }

    #[test]
    fn reflexive_instances_fold_away() {
        let th = theory("assign(domain_size, 5). formulas(assumptions). all x all y (x != y -> age(x) != age(y)). end_of_list.");
        let g = ground(&th).unwrap();
        assert_eq!(g.constraints.len(), 20);
        assert_eq!(count(&th), 120);
    }

    #[test]
    fn unconstrained_constants() {
        let mut th = Theory::new(52);
        th.signature.declare("deck1", SymbolKind::Function, 0).unwrap();
        th.signature.declare("deck2", SymbolKind::Function, 0).unwrap();
        let g = ground(&th).unwrap();
        assert_eq!(g.cells.len(), 2);
        assert!(g.constraints.is_empty());
        assert_eq!(count(&th), 2704);
        assert_eq!(count(&corpus("two_decks_all.in")), 2704);
    }

    #[test]
    fn corpus_counts() {
        assert_eq!(count(&corpus("3dice_all.in")), 216);
        assert_eq!(count(&merged("3dice_all.in", "3dice_fav.in")), 181);
        assert_eq!(count(&merged("3dice_all.in", "swindler_fav.in")), 91);
        assert_eq!(count(&merged("two_decks_all.in", "two_decks_fav.in")), 103);
        assert_eq!(count(&corpus("roundtable_all.in")), 120);
        assert_eq!(count(&merged("roundtable_all.in", "roundtable_fav.in")), 10);
        assert_eq!(count(&merged("roundtable_all.in", "roundtable_fav_improved.in")), 10);
    }

    #[test]
    fn sock_models() {
        let th = corpus("socks_all.in");
        let models: Vec<Interpretation> = enumerate(&th, ModelLimit::All).unwrap().map(Result::unwrap).collect();
        let rows: Vec<Vec<u32>> = models.iter().map(|m| m.table("s").unwrap().values.clone()).collect();
        assert_eq!(
            rows,
            vec![
                vec![0, 1, 1, 1, 1, 1],
                vec![1, 0, 1, 1, 1, 1],
                vec![1, 1, 0, 1, 1, 1],
                vec![1, 1, 1, 0, 1, 1],
                vec![1, 1, 1, 1, 0, 1],
                vec![1, 1, 1, 1, 1, 0],
            ]
        );
        for m in &models {
            assert_eq!(m.table("W").unwrap().values, vec![5]);
            assert!(is_model(&th, m).unwrap());
        }
        let fav = merged("socks_all.in", "socks_fav.in");
        assert_eq!(enumerate(&fav, ModelLimit::All).unwrap().count(), 0);
    }

    #[test]
    fn single_constant_single_element() {
        let mut th = Theory::new(1);
        th.signature.declare("c", SymbolKind::Function, 0).unwrap();
        let models: Vec<_> = enumerate(&th, ModelLimit::All).unwrap().map(Result::unwrap).collect();
        assert_eq!(models.len(), 1);
        assert_eq!(models[0].cell_values(), vec![0]);
    }

    #[test]
    fn empty_signature_has_one_model() {
        let th = Theory::new(3);
        assert_eq!(enumerate(&th, ModelLimit::All).unwrap().count(), 1);
        assert_eq!(count(&th), 1);
    }

    #[test]
    fn false_formula_means_no_models() {
        let th = theory("assign(domain_size, 3). formulas(assumptions). p(0). 1 = 2. end_of_list.");
        let g = ground(&th).unwrap();
        assert!(g.inconsistent);
        assert_eq!(count(&th), 0);
        assert_eq!(enumerate(&th, ModelLimit::All).unwrap().count(), 0);
    }

    #[test]
    fn limit_truncates() {
        let th = corpus("socks_all.in");
        let mut models = enumerate(&th, ModelLimit::AtMost(2)).unwrap();
        assert_eq!(models.by_ref().count(), 2);
        assert!(models.truncated().unwrap());
        let mut models = enumerate(&th, ModelLimit::AtMost(6)).unwrap();
        assert_eq!(models.by_ref().count(), 6);
        assert!(!models.truncated().unwrap());
        let g = ground(&th).unwrap();
        assert_eq!(g.count(ModelLimit::AtMost(2)).unwrap(), ModelCount { count: BigUint::from(2u32), exhausted: false });
        assert_eq!(g.count(ModelLimit::AtMost(6)).unwrap(), ModelCount::exact(6u32));
        assert_eq!(g.count(ModelLimit::AtMost(100)).unwrap(), ModelCount::exact(6u32));
    }

    #[test]
    fn limit_with_free_cells() {
        let th = corpus("two_decks_all.in");
        let g = ground(&th).unwrap();
        assert_eq!(g.count(ModelLimit::AtMost(10)).unwrap(), ModelCount { count: BigUint::from(10u32), exhausted: false });
        assert_eq!(g.count(ModelLimit::AtMost(5000)).unwrap(), ModelCount::exact(2704u32));
    }

    #[test]
    fn out_of_domain_literal_is_a_grounding_error() {
        let th = theory("assign(domain_size, 3). formulas(assumptions). s(3) = 0. end_of_list.");
        assert!(matches!(ground(&th), Err(SolveError::Eval(EvalError::OutOfDomainApplication { .. }))));
        // guarded instances fold away before the bad application is reached
        let th = theory("assign(domain_size, 3). formulas(assumptions). all x (x < 2 -> s(x + 1) != x). end_of_list.");
        // s(0) free, s(1) != 0, s(2) != 1
        assert_eq!(count(&th), 3 * 2 * 2);
    }

    #[test]
    fn out_of_domain_during_search_is_reported() {
        let th = theory("assign(domain_size, 3). formulas(assumptions). s(c + 1) = 0. end_of_list.");
        assert!(matches!(count_models(&th), Err(SolveError::Eval(EvalError::OutOfDomainApplication { .. }))));
    }

    #[test]
    fn missing_domain_size() {
        let th = theory("formulas(assumptions). a = b. end_of_list.");
        assert_eq!(ground(&th).unwrap_err(), SolveError::MissingDomainSize);
    }

    #[test]
    fn nested_application_reads_whole_table() {
        let th = theory("assign(domain_size, 3). formulas(assumptions). f(f(0)) = 1. end_of_list.");
        let g = ground(&th).unwrap();
        assert_eq!(g.constraints[0].reads, vec![0, 1, 2]);
        // f(0) = 0 forces f(0) = 1, contradiction; otherwise f(f(0)) = 1:
        // f(0)=1: f(1)=1, f(2) free -> 3; f(0)=2: f(2)=1, f(1) free -> 3
        assert_eq!(count(&th), 6);
    }
}
