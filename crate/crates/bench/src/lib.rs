//! Fixtures shared by the benchmarks.

use modelprob::corpus::bundled_file;
use modelprob::{merge_theories, parse_str, Theory};

pub fn corpus_theory(name: &str) -> Theory {
    parse_str(bundled_file(name).expect("bundled corpus file")).expect("corpus file parses")
}

/// A possible-models theory merged with a favorable-constraints file.
pub fn corpus_pair(possible: &str, favorable: &str) -> Theory {
    merge_theories(&corpus_theory(possible), &corpus_theory(favorable)).expect("corpus theories merge")
}
