//! Seeded random theories shared by the property tests and the acceptance run.
#![allow(dead_code)]

use modelprob::corpus::bundled_file;
use modelprob::{merge_theories, parse_str, ArithOp, Formula, ModelLimit, Rel, Signature, SymbolKind, Term, Theory};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_DOMAIN: u32 = 4;
pub const MAX_CELLS: usize = 6;
pub const MAX_FORMULAS: usize = 5;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn corpus(name: &str) -> Theory {
    parse_str(bundled_file(name).unwrap_or_else(|| panic!("no corpus file {name}"))).unwrap()
}

pub fn corpus_merged(possible: &str, favorable: &str) -> Theory {
    merge_theories(&corpus(possible), &corpus(favorable)).unwrap()
}

#[derive(Clone, Debug)]
pub struct Sym {
    pub name: String,
    pub kind: SymbolKind,
    pub arity: usize,
}

pub fn symbols_of(sig: &Signature) -> Vec<Sym> {
    sig.iter().map(|(name, d)| Sym { name: name.to_string(), kind: d.kind, arity: d.arity }).collect()
}

pub fn cells_of(n: u32, syms: &[Sym]) -> usize {
    syms.iter().map(|s| (n as usize).pow(s.arity as u32)).sum()
}

/// Up to four symbols of arity at most 2 whose tables hold at most `max_cells`
/// cells between them.
pub fn random_signature(rng: &mut impl Rng, n: u32, max_cells: usize) -> Vec<Sym> {
    let mut syms = Vec::new();
    let mut cells = 0;
    for k in 0..rng.gen_range(0..=4) {
        let kind = if rng.gen_bool(0.6) { SymbolKind::Function } else { SymbolKind::Predicate };
        let arity = rng.gen_range(0..=2usize);
        let size = (n as usize).pow(arity as u32);
        if cells + size > max_cells {
            continue;
        }
        cells += size;
        let name = match kind {
            SymbolKind::Function => format!("f{k}"),
            SymbolKind::Predicate => format!("p{k}"),
        };
        syms.push(Sym { name, kind, arity });
    }
    syms
}

/// Formula generator over a fixed signature. Arguments of applications are
/// always variables, in-domain literals or function applications, so no
/// generated formula can apply a symbol outside the domain.
pub struct FormulaGen<'a, R> {
    pub rng: &'a mut R,
    pub n: u32,
    pub syms: &'a [Sym],
    scope: Vec<&'static str>,
}

impl<'a, R: Rng> FormulaGen<'a, R> {
    pub fn new(rng: &'a mut R, n: u32, syms: &'a [Sym]) -> Self {
        FormulaGen { rng, n, syms, scope: Vec::new() }
    }

    /// Lets generated formulas use `vars` free.
    pub fn with_free(mut self, vars: &[&'static str]) -> Self {
        self.scope.extend_from_slice(vars);
        self
    }

    fn of_kind(&self, kind: SymbolKind) -> Vec<&'a Sym> {
        self.syms.iter().filter(|s| s.kind == kind).collect()
    }

    pub fn formula(&mut self, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.atom();
        }
        match self.rng.gen_range(0..7) {
            0 => Formula::not(self.formula(depth - 1)),
            1 => Formula::and(self.formula(depth - 1), self.formula(depth - 1)),
            2 => Formula::or(self.formula(depth - 1), self.formula(depth - 1)),
            3 => Formula::implies(self.formula(depth - 1), self.formula(depth - 1)),
            4 => Formula::iff(self.formula(depth - 1), self.formula(depth - 1)),
            k => {
                // reusing a name shadows the outer binding
                let var = *["x", "y", "z"].choose(self.rng).unwrap();
                self.scope.push(var);
                let body = self.formula(depth - 1);
                self.scope.pop();
                if k == 5 {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                }
            }
        }
    }

    fn atom(&mut self) -> Formula {
        let preds = self.of_kind(SymbolKind::Predicate);
        if !preds.is_empty() && self.rng.gen_bool(0.4) {
            let p = preds.choose(self.rng).unwrap();
            let args = (0..p.arity).map(|_| self.arg_term(1)).collect();
            return Formula::pred(p.name.clone(), args);
        }
        let rel = *[Rel::Eq, Rel::Ne, Rel::Lt, Rel::Le].choose(self.rng).unwrap();
        Formula::compare(rel, self.value_term(2), self.value_term(2))
    }

    /// A term whose value is always a domain element.
    pub fn arg_term(&mut self, depth: u32) -> Term {
        let funcs = self.of_kind(SymbolKind::Function);
        let choice = self.rng.gen_range(0..3);
        if choice == 0 && !self.scope.is_empty() {
            return Term::var(*self.scope.choose(self.rng).unwrap());
        }
        if choice == 1 && !funcs.is_empty() && depth > 0 {
            let f = funcs.choose(self.rng).unwrap();
            let args = (0..f.arity).map(|_| self.arg_term(depth - 1)).collect();
            return Term::apply(f.name.clone(), args);
        }
        Term::Int(self.rng.gen_range(0..self.n) as i64)
    }

    /// A term that may leave the domain through arithmetic or literals.
    pub fn value_term(&mut self, depth: u32) -> Term {
        match self.rng.gen_range(0..4) {
            0 if depth > 0 => {
                let op = *[ArithOp::Add, ArithOp::Sub, ArithOp::Mul].choose(self.rng).unwrap();
                Term::arith(op, self.value_term(depth - 1), self.value_term(depth - 1))
            }
            1 => Term::Int(self.rng.gen_range(-2..self.n as i64 + 3)),
            _ => self.arg_term(2),
        }
    }
}

/// A theory within the acceptance limits: domain at most 4, at most 6 cells,
/// at most 5 formulas. Some theories carry a model limit.
pub fn random_theory(rng: &mut impl Rng) -> Theory {
    let n = rng.gen_range(1..=MAX_DOMAIN);
    let syms = random_signature(rng, n, MAX_CELLS);
    let mut th = Theory::new(n);
    for s in &syms {
        th.signature.declare(&s.name, s.kind, s.arity).unwrap();
    }
    let count = rng.gen_range(0..=MAX_FORMULAS);
    let formulas: Vec<Formula> = {
        let mut g = FormulaGen::new(rng, n, &syms);
        (0..count).map(|_| g.formula(3)).collect()
    };
    for f in formulas {
        th.push(f).unwrap();
    }
    if rng.gen_bool(0.15) {
        th.max_models = Some(ModelLimit::AtMost(rng.gen_range(1..=5)));
    }
    th
}

/// Extra constraints over the symbols of `base` only, so merging adds no cells.
pub fn random_extra(rng: &mut impl Rng, base: &Theory) -> Theory {
    let n = base.domain_size.unwrap();
    let syms = symbols_of(&base.signature);
    let count = rng.gen_range(1..=3);
    let formulas: Vec<Formula> = {
        let mut g = FormulaGen::new(rng, n, &syms);
        (0..count).map(|_| g.formula(3)).collect()
    };
    let mut extra = Theory { domain_size: if rng.gen_bool(0.5) { Some(n) } else { None }, ..Theory::default() };
    for f in formulas {
        extra.push(f).unwrap();
    }
    extra
}
