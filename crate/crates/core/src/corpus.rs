//! The bundled puzzle corpus and its runner.
//!
//! Each case pairs a possible-models theory with a favorable-constraints file
//! and the model counts it must reproduce. The runner counts both with the
//! solver, cross-checks with the brute-force oracle where the assignment space
//! fits its budget, and reports the probability.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::oracle::{brute_force_count, OracleBudget, OracleError};
use crate::parser::{format_theory, merge_theories, parse_theory, SourceFile};
use crate::probability::PuzzleOutcome;
use crate::solver::{count_models, enumerate, ModelCount};
use crate::syntax::{ModelLimit, Theory};

const BUNDLED: &[(&str, &str)] = &[
    ("two_decks_all.in", include_str!("../corpus/two_decks_all.in")),
    ("two_decks_fav.in", include_str!("../corpus/two_decks_fav.in")),
    ("3dice_all.in", include_str!("../corpus/3dice_all.in")),
    ("3dice_fav.in", include_str!("../corpus/3dice_fav.in")),
    ("swindler_fav.in", include_str!("../corpus/swindler_fav.in")),
    ("socks_all.in", include_str!("../corpus/socks_all.in")),
    ("socks_fav.in", include_str!("../corpus/socks_fav.in")),
    ("roundtable_all.in", include_str!("../corpus/roundtable_all.in")),
    ("roundtable_fav.in", include_str!("../corpus/roundtable_fav.in")),
    ("roundtable_fav_improved.in", include_str!("../corpus/roundtable_fav_improved.in")),
];

/// Text of a bundled corpus file.
pub fn bundled_file(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

pub fn bundled_files() -> impl Iterator<Item = (&'static str, &'static str)> {
    BUNDLED.iter().copied()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuzzleCase {
    pub name: &'static str,
    pub possible_file: &'static str,
    pub favorable_file: &'static str,
    pub expected_possible: u64,
    pub expected_favorable: u64,
}

/// The five puzzles. The round-table puzzle appears twice, once per
/// encoding of its favorable condition.
pub const CASES: &[PuzzleCase] = &[
    PuzzleCase {
        name: "puzzle1_two_decks",
        possible_file: "two_decks_all.in",
        favorable_file: "two_decks_fav.in",
        expected_possible: 2704,
        expected_favorable: 103,
    },
    PuzzleCase {
        name: "puzzle2_three_dice",
        possible_file: "3dice_all.in",
        favorable_file: "3dice_fav.in",
        expected_possible: 216,
        expected_favorable: 181,
    },
    PuzzleCase {
        name: "puzzle3_swindler",
        possible_file: "3dice_all.in",
        favorable_file: "swindler_fav.in",
        expected_possible: 216,
        expected_favorable: 91,
    },
    PuzzleCase {
        name: "puzzle4_socks",
        possible_file: "socks_all.in",
        favorable_file: "socks_fav.in",
        expected_possible: 6,
        expected_favorable: 0,
    },
    PuzzleCase {
        name: "puzzle5_roundtable",
        possible_file: "roundtable_all.in",
        favorable_file: "roundtable_fav.in",
        expected_possible: 120,
        expected_favorable: 10,
    },
    PuzzleCase {
        name: "puzzle5_roundtable_improved",
        possible_file: "roundtable_all.in",
        favorable_file: "roundtable_fav_improved.in",
        expected_possible: 120,
        expected_favorable: 10,
    },
];

/// Where corpus files are read from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CorpusSource {
    Bundled,
    Dir(PathBuf),
}

impl CorpusSource {
    pub fn load(&self, file: &str) -> Result<SourceFile, String> {
        match self {
            CorpusSource::Bundled => bundled_file(file)
                .map(SourceFile::in_memory)
                .ok_or_else(|| format!("no bundled file `{file}`")),
            CorpusSource::Dir(dir) => {
                let path: PathBuf = Path::new(dir).join(file);
                SourceFile::read(&path).map_err(|e| format!("{}: {e}", path.display()))
            }
        }
    }

    pub fn theory(&self, file: &str) -> Result<Theory, String> {
        let src = self.load(file)?;
        parse_theory(&src).map_err(|diags| {
            let lines: Vec<String> = diags.iter().map(|d| format!("{file}:{d}")).collect();
            lines.join("; ")
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OracleStatus {
    /// Oracle and solver counts are equal for both theories.
    Agree,
    Disagree,
    /// An assignment space exceeded the oracle budget.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityReport {
    pub num: u64,
    pub den: u64,
    pub raw_num: u64,
    pub raw_den: u64,
    pub decimal: f64,
}

// Corpus counts are small; anything past u64 saturates.
impl From<&PuzzleOutcome> for ProbabilityReport {
    fn from(outcome: &PuzzleOutcome) -> Self {
        let clamp = |v: &num_bigint::BigUint| v.to_u64().unwrap_or(u64::MAX);
        ProbabilityReport {
            num: clamp(outcome.probability.numerator()),
            den: clamp(outcome.probability.denominator()),
            raw_num: clamp(outcome.raw.numerator()),
            raw_den: clamp(outcome.raw.denominator()),
            decimal: outcome.decimal.parse().unwrap_or(f64::NAN),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: String,
    pub possible: Option<u64>,
    pub favorable: Option<u64>,
    pub expected_possible: u64,
    pub expected_favorable: u64,
    pub probability: Option<ProbabilityReport>,
    pub oracle: OracleStatus,
    pub elapsed_ms: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    pub outcome: Option<PuzzleOutcome>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub cases: Vec<CaseReport>,
    pub passed: usize,
    pub total: usize,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.passed == self.total
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The same report with every timing field zeroed.
    pub fn without_timing(&self) -> RunReport {
        let mut r = self.clone();
        for c in &mut r.cases {
            c.elapsed_ms = 0.0;
        }
        r
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            let oracle = match c.oracle {
                OracleStatus::Agree => "oracle agrees",
                OracleStatus::Disagree => "ORACLE DISAGREES",
                OracleStatus::Skipped => "oracle skipped (budget)",
            };
            match (&c.outcome, &c.error) {
                (_, Some(err)) => out.push_str(&format!("{verdict} {:<28} error: {err}\n", c.case)),
                (Some(outcome), None) => {
                    out.push_str(&format!("{verdict} {:<28} {outcome:<36} {oracle}, {:.1} ms\n", c.case, c.elapsed_ms));
                }
                _ => {}
            }
            if !c.pass && c.error.is_none() {
                out.push_str(&format!(
                    "     expected {} / {}, got {} / {}\n",
                    c.expected_favorable,
                    c.expected_possible,
                    c.favorable.map_or("?".into(), |v| v.to_string()),
                    c.possible.map_or("?".into(), |v| v.to_string()),
                ));
            }
        }
        out.push_str(&format!("{}/{} cases passed\n", self.passed, self.total));
        out
    }
}

/// Runs every case. Cases run in parallel; the report is ordered by case name.
pub fn run_corpus(source: &CorpusSource, budget: OracleBudget) -> RunReport {
    run_cases(CASES, source, budget)
}

pub fn run_cases(cases: &[PuzzleCase], source: &CorpusSource, budget: OracleBudget) -> RunReport {
    let memo = OracleMemo::default();
    let mut reports: Vec<CaseReport> =
        cases.par_iter().map(|case| run_case_with(case, source, budget, &memo)).collect();
    reports.sort_by(|a, b| a.case.cmp(&b.case));
    let passed = reports.iter().filter(|r| r.pass).count();
    RunReport { total: reports.len(), passed, cases: reports }
}

fn small(c: &ModelCount) -> Option<u64> {
    c.count.to_u64()
}

type OracleResult = Result<ModelCount, OracleError>;

/// Brute-force counts keyed by the printed theory, so a possible-models file
/// shared by several cases is swept once.
#[derive(Default)]
struct OracleMemo {
    slots: Mutex<HashMap<String, Arc<OnceLock<OracleResult>>>>,
}

impl OracleMemo {
    fn count(&self, th: &Theory, budget: OracleBudget) -> OracleResult {
        let key = format!("{:?}\n{}", th.signature, format_theory(th));
        let slot = self.slots.lock().expect("memo lock").entry(key).or_default().clone();
        slot.get_or_init(|| brute_force_count(th, budget)).clone()
    }
}

pub fn run_case(case: &PuzzleCase, source: &CorpusSource, budget: OracleBudget) -> CaseReport {
    run_case_with(case, source, budget, &OracleMemo::default())
}

fn run_case_with(case: &PuzzleCase, source: &CorpusSource, budget: OracleBudget, memo: &OracleMemo) -> CaseReport {
    let start = Instant::now();
    let mut report = CaseReport {
        case: case.name.to_string(),
        possible: None,
        favorable: None,
        expected_possible: case.expected_possible,
        expected_favorable: case.expected_favorable,
        probability: None,
        oracle: OracleStatus::Skipped,
        elapsed_ms: 0.0,
        pass: false,
        error: None,
        outcome: None,
    };
    match evaluate(case, source, budget, memo) {
        Ok((outcome, oracle)) => {
            report.possible = small(&outcome.possible);
            report.favorable = small(&outcome.favorable);
            report.probability = Some(ProbabilityReport::from(&outcome));
            report.oracle = oracle;
            report.pass = report.possible == Some(case.expected_possible)
                && report.favorable == Some(case.expected_favorable)
                && oracle != OracleStatus::Disagree;
            report.outcome = Some(outcome);
        }
        Err(e) => report.error = Some(e),
    }
    report.elapsed_ms = (start.elapsed().as_secs_f64() * 1e6).round() / 1e3;
    report
}

fn evaluate(
    case: &PuzzleCase,
    source: &CorpusSource,
    budget: OracleBudget,
    memo: &OracleMemo,
) -> Result<(PuzzleOutcome, OracleStatus), String> {
    let possible = source.theory(case.possible_file)?;
    let extra = source.theory(case.favorable_file)?;
    let merged = merge_theories(&possible, &extra).map_err(|e| e.to_string())?;

    let mut counts = Vec::new();
    let mut oracle = OracleStatus::Agree;
    for th in [&possible, &merged] {
        let counted = count_models(th).map_err(|e| e.to_string())?;
        // the model stream must be as long as the count
        if counted.exhausted {
            let streamed = enumerate(th, ModelLimit::All).map_err(|e| e.to_string())?.count();
            if Some(streamed as u64) != small(&counted) {
                return Err(format!("enumerated {streamed} models but counted {}", counted.count));
            }
        }
        match memo.count(th, budget) {
            Ok(brute) if brute == counted => {}
            Ok(_) => oracle = OracleStatus::Disagree,
            Err(OracleError::BudgetExceeded { .. }) => {
                if oracle == OracleStatus::Agree {
                    oracle = OracleStatus::Skipped;
                }
            }
            Err(e) => return Err(e.to_string()),
        }
        counts.push(counted);
    }
    let favorable = counts.pop().expect("two counts");
    let possible = counts.pop().expect("two counts");
    let outcome = PuzzleOutcome::from_counts(possible, favorable).map_err(|e| e.to_string())?;
    Ok((outcome, oracle))
}
