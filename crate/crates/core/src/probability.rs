//! Probability as favorable models over possible models.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::parser::{merge_theories, MergeError};
use crate::solver::{count_models, ModelCount, SolveError};
use crate::syntax::Theory;

/// Significant digits of [`PuzzleOutcome::decimal`].
pub const DECIMAL_DIGITS: usize = 6;

/// A non-negative fraction. Not reduced unless [`Rational::reduce`] is called,
/// so raw model counts can be kept side by side with the reduced value.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    numerator: BigUint,
    denominator: BigUint,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("zero denominator")]
pub struct ZeroDenominator;

impl Rational {
    pub fn new(numerator: impl Into<BigUint>, denominator: impl Into<BigUint>) -> Result<Self, ZeroDenominator> {
        let denominator = denominator.into();
        if denominator.is_zero() {
            return Err(ZeroDenominator);
        }
        Ok(Rational { numerator: numerator.into(), denominator })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.numerator
    }

    pub fn denominator(&self) -> &BigUint {
        &self.denominator
    }

    /// Divides out the gcd. Zero reduces to 0/1.
    pub fn reduce(&self) -> Rational {
        if self.numerator.is_zero() {
            return Rational { numerator: BigUint::zero(), denominator: BigUint::one() };
        }
        let g = self.numerator.gcd(&self.denominator);
        Rational { numerator: &self.numerator / &g, denominator: &self.denominator / &g }
    }

    pub fn is_reduced(&self) -> bool {
        self.numerator.gcd(&self.denominator).is_one()
    }

    /// Decimal rendering rounded half-up to `digits` significant digits, with
    /// trailing zeros dropped.
    pub fn to_decimal(&self, digits: usize) -> String {
        assert!(digits > 0);
        if self.numerator.is_zero() {
            return "0".to_string();
        }
        let ten = BigUint::from(10u32);
        let (p, q) = (&self.numerator, &self.denominator);
        // exponent e with 10^e <= p/q < 10^(e+1)
        let mut e = p.to_string().len() as i64 - q.to_string().len() as i64;
        if scaled_cmp(p, q, e) == Ordering::Less {
            e -= 1;
        }
        let mut shift = digits as i64 - 1 - e;
        let mut mantissa = round_half_up(p, q, shift);
        if mantissa == ten.pow(digits as u32) {
            mantissa /= &ten;
            shift -= 1;
        }
        let text = mantissa.to_string();
        if shift <= 0 {
            return text + &"0".repeat((-shift) as usize);
        }
        let shift = shift as usize;
        let padded = if text.len() <= shift { "0".repeat(shift - text.len() + 1) + &text } else { text };
        let (int_part, frac_part) = padded.split_at(padded.len() - shift);
        let frac_part = frac_part.trim_end_matches('0');
        if frac_part.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac_part}")
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_decimal(17).parse().unwrap_or(f64::NAN)
    }
}

// Compares p with q * 10^e.
fn scaled_cmp(p: &BigUint, q: &BigUint, e: i64) -> Ordering {
    let ten = BigUint::from(10u32);
    if e >= 0 {
        p.cmp(&(q * ten.pow(e as u32)))
    } else {
        (p * ten.pow((-e) as u32)).cmp(q)
    }
}

// round(p / q * 10^shift), halves rounded up.
fn round_half_up(p: &BigUint, q: &BigUint, shift: i64) -> BigUint {
    let ten = BigUint::from(10u32);
    let (num, den) = if shift >= 0 { (p * ten.pow(shift as u32), q.clone()) } else { (p.clone(), q * ten.pow((-shift) as u32)) };
    let (quot, rem) = num.div_rem(&den);
    if rem * 2u32 >= den {
        quot + 1u32
    } else {
        quot
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (&self.numerator * &other.denominator).cmp(&(&other.numerator * &self.denominator))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum ProbabilityError {
    #[error("the possible-models theory has no models, so the probability is undefined")]
    ZeroPossibleModels,
    #[error("the {0} count stopped at the model limit; set max_models to -1")]
    NonExhaustiveCount(&'static str),
    #[error(transparent)]
    Merge(#[from] MergeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PuzzleOutcome {
    pub possible: ModelCount,
    pub favorable: ModelCount,
    /// favorable / possible as counted.
    pub raw: Rational,
    pub probability: Rational,
    pub decimal: String,
}

impl PuzzleOutcome {
    /// Builds the outcome from two exhausted counts.
    pub fn from_counts(possible: ModelCount, favorable: ModelCount) -> Result<Self, ProbabilityError> {
        if !possible.exhausted {
            return Err(ProbabilityError::NonExhaustiveCount("possible"));
        }
        if !favorable.exhausted {
            return Err(ProbabilityError::NonExhaustiveCount("favorable"));
        }
        let raw = Rational::new(favorable.count.clone(), possible.count.clone())
            .map_err(|_| ProbabilityError::ZeroPossibleModels)?;
        let probability = raw.reduce();
        let decimal = probability.to_decimal(DECIMAL_DIGITS);
        Ok(PuzzleOutcome { possible, favorable, raw, probability, decimal })
    }
}

impl fmt::Display for PuzzleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} / {} = {} ≈ {}",
            self.favorable.count, self.possible.count, self.probability, self.decimal
        )
    }
}

/// Counts the models of `possible`, then of `possible` with the extra
/// favorable constraints, and divides. The two counts run on separate threads.
pub fn solve_puzzle(possible: &Theory, favorable_extra: &Theory) -> Result<PuzzleOutcome, ProbabilityError> {
    let merged = merge_theories(possible, favorable_extra)?;
    let (possible_count, favorable_count) = std::thread::scope(|s| {
        let favorable = s.spawn(|| count_models(&merged));
        let possible = count_models(possible);
        (possible, favorable.join().expect("counting thread panicked"))
    });
    PuzzleOutcome::from_counts(possible_count?, favorable_count?)
}
