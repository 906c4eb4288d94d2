//! Brute-force model counter used to check the solver.
//!
//! Every assignment of every cell is built and tested with
//! [`is_model`](crate::semantics::is_model). Nothing is grounded or pruned,
//! and no code is shared with the solver beyond the syntax and the
//! satisfaction relation.

use num_bigint::BigUint;
use rayon::prelude::*;

use crate::semantics::{satisfies_in, Arithmetic, Binding, Interpretation, ModelError, Unbounded};
use crate::solver::ModelCount;
use crate::syntax::{ModelLimit, Theory};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBudget {
    pub max_assignments: u64,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget { max_assignments: 10_000_000 }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{space} assignments exceed the oracle budget of {budget}")]
    BudgetExceeded { space: BigUint, budget: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Size of the assignment space: n per function cell, 2 per predicate cell.
pub fn assignment_space(th: &Theory) -> Result<BigUint, OracleError> {
    let n = th.domain_size.ok_or(ModelError::MissingDomainSize)?;
    let template = Interpretation::zeroed(&th.signature, n)?;
    Ok(template.cell_ranges().into_iter().map(BigUint::from).product())
}

pub fn brute_force_count(th: &Theory, budget: OracleBudget) -> Result<ModelCount, OracleError> {
    brute_force_count_with(&Unbounded, th, budget)
}

/// Counts with an alternative arithmetic rule.
pub fn brute_force_count_with(arith: &dyn Arithmetic, th: &Theory, budget: OracleBudget) -> Result<ModelCount, OracleError> {
    let sweep = Sweep::new(th, budget)?;
    let total: u64 = sweep
        .chunks()
        .into_par_iter()
        .map(|(start, end)| sweep.scan(arith, th, start, end, |_| {}))
        .collect::<Result<Vec<u64>, _>>()?
        .into_iter()
        .sum();
    Ok(limited(total, th.limit()))
}

/// All models, in the same lexicographic cell order the solver uses.
pub fn brute_force_models(th: &Theory, budget: OracleBudget) -> Result<Vec<Interpretation>, OracleError> {
    let sweep = Sweep::new(th, budget)?;
    let per_chunk = sweep
        .chunks()
        .into_par_iter()
        .map(|(start, end)| {
            let mut found = Vec::new();
            sweep.scan(&Unbounded, th, start, end, |i| found.push(i.clone()))?;
            Ok(found)
        })
        .collect::<Result<Vec<Vec<Interpretation>>, OracleError>>()?;
    let mut models: Vec<Interpretation> = per_chunk.into_iter().flatten().collect();
    if let ModelLimit::AtMost(l) = th.limit() {
        models.truncate(l as usize);
    }
    Ok(models)
}

fn limited(total: u64, limit: ModelLimit) -> ModelCount {
    match limit {
        ModelLimit::AtMost(l) if total > l => ModelCount { count: BigUint::from(l), exhausted: false },
        _ => ModelCount::exact(total),
    }
}

struct Sweep {
    template: Interpretation,
    ranges: Vec<u32>,
    /// (table position, offset) of each flat cell
    addresses: Vec<(usize, usize)>,
    space: u64,
}

impl Sweep {
    fn new(th: &Theory, budget: OracleBudget) -> Result<Self, OracleError> {
        let n = th.domain_size.ok_or(ModelError::MissingDomainSize)?;
        let template = Interpretation::zeroed(&th.signature, n)?;
        let ranges = template.cell_ranges();
        let space: BigUint = ranges.iter().copied().map(BigUint::from).product();
        let space = match u64::try_from(&space) {
            Ok(s) if s <= budget.max_assignments => s,
            _ => return Err(OracleError::BudgetExceeded { space, budget: budget.max_assignments }),
        };
        template.check_signature(&th.signature, n)?;
        let addresses = template
            .tables()
            .enumerate()
            .flat_map(|(k, (_, t))| (0..t.values.len()).map(move |off| (k, off)))
            .collect();
        Ok(Sweep { template, ranges, addresses, space })
    }

    fn chunks(&self) -> Vec<(u64, u64)> {
        const CHUNK: u64 = 1 << 14;
        (0..self.space.div_ceil(CHUNK)).map(|k| (k * CHUNK, ((k + 1) * CHUNK).min(self.space))).collect()
    }

    /// Tests assignments `start..end`, where an assignment's index reads the
    /// cell values as mixed-radix digits with the last cell least significant.
    fn scan(
        &self,
        arith: &dyn Arithmetic,
        th: &Theory,
        start: u64,
        end: u64,
        mut on_model: impl FnMut(&Interpretation),
    ) -> Result<u64, OracleError> {
        let mut digits = vec![0u32; self.ranges.len()];
        let mut rest = start;
        for (d, &r) in digits.iter_mut().zip(&self.ranges).rev() {
            *d = (rest % r as u64) as u32;
            rest /= r as u64;
        }
        let mut interp = self.template.clone();
        interp.set_cell_values(&digits);
        let mut found = 0;
        let mut binding = Binding::new();
        for _ in start..end {
            if satisfies_in(arith, th, &interp, &mut binding).map_err(ModelError::from)? {
                found += 1;
                on_model(&interp);
            }
            for ((d, &r), &(table, offset)) in digits.iter_mut().zip(&self.ranges).zip(&self.addresses).rev() {
                *d += 1;
                let carry = *d == r;
                if carry {
                    *d = 0;
                }
                interp.set_cell(table, offset, *d);
                if !carry {
                    break;
                }
            }
        }
        Ok(found)
    }
}
