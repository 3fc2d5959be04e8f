//! Driver for partial zeta function experiments: variety files, the
//! analysis pipeline, JSON reports and the subcommands behind `pzeta`.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 budget exhausted,
//! 3 an inconsistency with a proven statement (Ax–Katz bound, twisted
//! fixed-point identity, oracle disagreement), 4 research event logged by
//! `search`.

pub mod analyze;
pub mod commands;
pub mod varfile;

pub use analyze::{analyze, AnalysisReport, AnalyzeOptions};
pub use varfile::{FileError, VarietyFile};

/// Parses `1,2,4` into a tuple.
pub fn parse_tuple(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match t.parse::<usize>() {
                Ok(0) | Err(_) => Err(format!("invalid tuple entry '{t}' (positive integers, comma separated)")),
                Ok(v) => Ok(v),
            }
        })
        .collect()
}

/// Parses `1,2;2,3` into a list of tuples.
pub fn parse_tuple_list(s: &str) -> Result<Vec<Vec<usize>>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse_tuple).collect()
}
