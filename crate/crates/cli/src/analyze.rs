//! The full analysis of one query: counts, zeta series, recurrence, roots,
//! weights, classification, Ax–Katz bound, twisted fixed-point cross-check
//! and the square-root error heuristic.

use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

use pzeta_core::cfinite::{
    self, char_roots, classify, min_recurrence, pade_reconstruct, predict, solve_coefficients, CfiniteError, Classification,
    RhVerdict,
};
use pzeta_core::counting::{count_partial, count_partial_bruteforce, count_series, lcm_of, CountError};
use pzeta_core::faltings::fixed_points_sigma_frob;
use pzeta_core::padic::{check_counts, AxKatzInput};
use pzeta_core::series::{log_derivative, zeta_series_from_counts};
use pzeta_core::{CountConfig, PartialCountQuery, VarietySpec};

pub const SCHEMA_VERSION: &str = "1";

/// `a/b` in lowest terms, or just `a` when the value is an integer.
pub fn rat(x: &BigRational) -> String {
    x.to_string()
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    /// Defaults to the largest `L` with `2L + 2 ≤ k_max`.
    pub max_order: Option<usize>,
    pub count: CountConfig,
    /// Cross-check every count against the brute-force oracle.
    pub oracle: bool,
    /// Count `N_{k_max+1}` and compare it to the extrapolation.
    pub check_prediction: bool,
    /// Compare the fixed-point count at `k = 1`.
    pub faltings: bool,
    pub timings: bool,
    pub root_precision: f64,
    pub rh_tol: f64,
    pub classify_tol: f64,
    pub coeff_cap: i64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            max_order: None,
            count: CountConfig::default(),
            oracle: false,
            check_prediction: true,
            faltings: true,
            timings: false,
            root_precision: cfinite::DEFAULT_ROOT_PRECISION,
            rh_tol: cfinite::DEFAULT_RH_TOL,
            classify_tol: cfinite::DEFAULT_CLASSIFY_TOL,
            coeff_cap: cfinite::DEFAULT_COEFF_CAP,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InputEcho {
    pub label: Option<String>,
    pub p: u32,
    pub e: usize,
    pub q: u64,
    pub n: usize,
    pub equations: Vec<String>,
    pub degrees: Vec<u32>,
    pub d: Vec<usize>,
    pub lcm_d: usize,
    pub dividing_chain: bool,
    pub k_max: usize,
    pub max_order: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Budgets {
    pub node_budget: String,
    pub oracle_budget: String,
    pub leaf_root_count: bool,
    pub reorder: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CountEntry {
    pub k: usize,
    pub value: String,
    pub nodes_bound: String,
    pub nodes_visited: String,
    /// Brute-force agreement, when requested and within the oracle budget.
    pub oracle: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesReport {
    pub zeta: Vec<String>,
    pub round_trip: bool,
    /// Only for equal `d_i`: all coefficients are nonnegative integers.
    pub classical_integral: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceReport {
    pub status: String,
    pub diagnosis: String,
    pub order: Option<usize>,
    pub coefficients: Vec<String>,
    pub char_poly: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PredictionReport {
    pub k: usize,
    pub predicted: Option<String>,
    pub counted: Option<String>,
    pub status: String,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootReport {
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    pub multiplicity: usize,
    pub flagged: bool,
    pub residual: f64,
    pub weight: Option<u32>,
    pub rh_pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexOut {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        // Normalize negative zero so output does not depend on its sign.
        let fix = |x: f64| if x == 0.0 { 0.0 } else { x };
        Self { re: fix(z.re), im: fix(z.im) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub status: String,
    pub coefficients: Vec<Vec<ComplexOut>>,
    pub residual: Option<f64>,
    pub condition: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassificationReport {
    pub verdict: String,
    pub d: usize,
    pub witnesses: Vec<Vec<i64>>,
    pub raw: Vec<ComplexOut>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalFnReport {
    pub status: String,
    pub numerator: Vec<String>,
    pub denominator: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxKatzEntryOut {
    pub k: usize,
    pub count: String,
    pub ord_q: Option<String>,
    pub bound: u64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxKatzOut {
    pub applicable: bool,
    pub mu: Option<u64>,
    pub entries: Vec<AxKatzEntryOut>,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FaltingsOut {
    pub k: usize,
    pub fixed_points: Option<String>,
    pub count: Option<String>,
    pub status: String,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeuristicEntry {
    pub k: usize,
    /// `log_q |N_k − q^{k·s}| / k`, absent when the difference is zero.
    pub exponent: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeuristicOut {
    /// `s = Σ d_i − max d_i`.
    pub main_exponent: usize,
    /// `s / 2`, the exponent the heuristic predicts for the error.
    pub expected_error_exponent: f64,
    pub per_k: Vec<HeuristicEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdicts {
    pub recurrence: String,
    pub prediction: String,
    pub rh: String,
    pub classification: String,
    pub axkatz: String,
    pub faltings: String,
    pub oracle: String,
    pub series_round_trip: String,
    /// Ax–Katz, twisted fixed points or oracle disagreed with the counts.
    pub inconsistency: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub counts_ms: Vec<u128>,
    pub total_ms: u128,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: String,
    pub command: String,
    pub input: InputEcho,
    pub budgets: Budgets,
    pub partial: bool,
    pub budget_error: Option<String>,
    pub counts: Vec<CountEntry>,
    pub series: SeriesReport,
    pub recurrence: RecurrenceReport,
    pub prediction: Option<PredictionReport>,
    pub roots: Vec<RootReport>,
    pub spectral: Option<SpectralReport>,
    pub classification: Option<ClassificationReport>,
    pub rational_function: Option<RationalFnReport>,
    pub axkatz: AxKatzOut,
    pub faltings: Option<FaltingsOut>,
    pub heuristic: Option<HeuristicOut>,
    pub verdicts: Verdicts,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl AnalysisReport {
    pub fn exit_code(&self) -> i32 {
        if self.verdicts.inconsistency {
            3
        } else if self.partial {
            2
        } else {
            0
        }
    }

    pub fn counts(&self) -> Vec<BigInt> {
        self.counts.iter().map(|c| c.value.parse().expect("decimal count")).collect()
    }
}

pub fn is_budget_error(e: &CountError) -> bool {
    matches!(
        e,
        CountError::BudgetExceeded { .. }
            | CountError::SeriesBudgetExceeded { .. }
            | CountError::Field(pzeta_core::FieldError::BudgetExceeded { .. })
    )
}

fn classification_name(c: &Classification) -> &'static str {
    match c {
        Classification::Rational => "Rational",
        Classification::NearRational { .. } => "NearRational",
        Classification::Inconclusive { .. } => "Inconclusive",
    }
}

pub fn default_max_order(k_max: usize) -> usize {
    k_max.saturating_sub(2) / 2
}

/// Runs the whole pipeline. Budget exhaustion yields a partial report rather
/// than an error.
pub fn analyze(x: &VarietySpec, label: Option<String>, d: &[usize], k_max: usize, opts: &AnalyzeOptions) -> Result<AnalysisReport, CountError> {
    let started = Instant::now();
    let query = PartialCountQuery::new(d.to_vec(), k_max)?;
    if d.len() != x.n() {
        return Err(CountError::DimensionMismatch { expected: x.n(), found: d.len() });
    }
    let spec = x.field();
    let q = spec.q();
    let max_order = opts.max_order.unwrap_or_else(|| default_max_order(k_max));
    let lcm = lcm_of(d);
    let degrees = x.degrees();
    let input = InputEcho {
        label,
        p: spec.p(),
        e: spec.e(),
        q,
        n: x.n(),
        equations: x.equations().iter().map(|f| f.to_string()).collect(),
        degrees: degrees.clone(),
        d: d.to_vec(),
        lcm_d: lcm,
        dividing_chain: query.is_dividing_chain(),
        k_max,
        max_order,
    };
    let budgets = Budgets {
        node_budget: opts.count.node_budget.to_string(),
        oracle_budget: opts.count.oracle_budget.to_string(),
        leaf_root_count: opts.count.leaf_root_count,
        reorder: opts.count.reorder,
    };

    // Counts
    let mut partial = false;
    let mut budget_error = None;
    let (values, levels) = match count_series(x, &query, &opts.count) {
        Ok(s) => (s.values, s.levels),
        Err(CountError::SeriesBudgetExceeded { k, largest_completed, partial: vals, needed, budget }) => {
            partial = true;
            budget_error = Some(format!(
                "budget exceeded at k = {k} (needs {needed}, budget {budget}); largest completed k = {largest_completed}"
            ));
            // Re-count the completed levels for their accounting.
            let lv = (1..=vals.len())
                .map(|k| {
                    let o = pzeta_core::counting::count_partial_detailed(x, d, k, &opts.count).expect("completed level");
                    pzeta_core::counting::LevelReport { k, nodes_bound: o.nodes_bound, nodes_visited: o.nodes_visited, elapsed_ms: 0 }
                })
                .collect();
            (vals, lv)
        }
        Err(e) => return Err(e),
    };
    let mut oracle_ok = true;
    let mut oracle_ran = false;
    let counts: Vec<CountEntry> = values
        .iter()
        .zip(&levels)
        .map(|(&v, lv)| {
            let oracle = if opts.oracle {
                match count_partial_bruteforce(x, d, lv.k, &opts.count) {
                    Ok(b) => {
                        oracle_ran = true;
                        oracle_ok &= b == v;
                        Some(if b == v { "match".to_string() } else { format!("mismatch: brute force gives {b}") })
                    }
                    Err(e) => Some(format!("skipped: {e}")),
                }
            } else {
                None
            };
            CountEntry {
                k: lv.k,
                value: v.to_string(),
                nodes_bound: lv.nodes_bound.to_string(),
                nodes_visited: lv.nodes_visited.to_string(),
                oracle,
            }
        })
        .collect();
    let seq: Vec<BigInt> = values.iter().map(|&v| BigInt::from(v)).collect();

    // Series
    let zeta = zeta_series_from_counts(&seq);
    let round_trip = log_derivative(&zeta)
        .map(|l| l.coefficients()[1..].iter().map(|c| c.to_integer()).eq(seq.iter().cloned()) && l.coefficients()[1..].iter().all(|c| c.is_integer()))
        .unwrap_or(false);
    let equal_d = d.iter().all(|&v| v == d[0]);
    let series = SeriesReport {
        zeta: zeta.coefficients().iter().map(rat).collect(),
        round_trip,
        classical_integral: equal_d.then(|| zeta.is_nonnegative_integral()),
    };

    // Recurrence
    let rec = if seq.is_empty() {
        Err(CfiniteError::InsufficientTerms { needed: 2 * max_order + 2, found: 0 })
    } else {
        min_recurrence(&seq, max_order)
    };
    let recurrence = match &rec {
        Ok(r) => RecurrenceReport {
            status: "found".into(),
            diagnosis: format!("order {} fits all {} terms", r.order, seq.len()),
            order: Some(r.order),
            coefficients: r.coefficients.iter().map(rat).collect(),
            char_poly: r.char_poly().iter().map(rat).collect(),
        },
        Err(CfiniteError::InsufficientTerms { needed, found }) => RecurrenceReport {
            status: "insufficient_terms".into(),
            diagnosis: format!("insufficient terms: max order {max_order} needs {needed} counts, have {found}"),
            order: None,
            coefficients: Vec::new(),
            char_poly: Vec::new(),
        },
        Err(e) => RecurrenceReport {
            status: "not_found".into(),
            diagnosis: if seq.len() < 2 * max_order + 4 {
                format!("{e}; insufficient terms to test order {}: needs {} counts, have {}", max_order + 1, 2 * max_order + 4, seq.len())
            } else {
                e.to_string()
            },
            order: None,
            coefficients: Vec::new(),
            char_poly: Vec::new(),
        },
    };

    // Prediction
    let prediction = match (&rec, opts.check_prediction && !partial) {
        (Ok(r), true) => {
            let k = k_max + 1;
            let predicted = predict(r, &seq, k);
            let counted = count_partial(x, d, k, &opts.count);
            let (status, note) = match (&predicted, &counted) {
                (Ok(a), Ok(b)) if *a == BigInt::from(*b) => ("match", String::new()),
                (Ok(_), Ok(_)) => ("mismatch", "extrapolation differs from the fresh count".to_string()),
                (Err(e), _) => ("mismatch", e.to_string()),
                (_, Err(e)) => ("skipped", e.to_string()),
            };
            Some(PredictionReport {
                k,
                predicted: predicted.ok().map(|v| v.to_string()),
                counted: counted.ok().map(|v| v.to_string()),
                status: status.into(),
                note,
            })
        }
        _ => None,
    };

    // Roots, coefficients, classification
    let mut roots = Vec::new();
    let mut spectral = None;
    let mut classification = None;
    let mut rational_function = None;
    let mut rh_verdict = "not_run".to_string();
    let mut class_verdict = "not_run".to_string();
    if let Ok(r) = &rec {
        match char_roots(r, opts.root_precision) {
            Ok(rs) => {
                let values: Vec<Complex64> = rs.iter().map(|r| r.value).collect();
                let rh = cfinite::rh_check(&values, q, opts.rh_tol);
                rh_verdict = if rh.iter().all(RhVerdict::passed) { "pass".into() } else { "fail".into() };
                for (root, v) in rs.iter().zip(&rh) {
                    let z = ComplexOut::from(root.value);
                    roots.push(RootReport {
                        re: z.re,
                        im: z.im,
                        modulus: root.value.norm(),
                        multiplicity: root.multiplicity,
                        flagged: root.flagged,
                        residual: root.residual,
                        weight: match v {
                            RhVerdict::Weight(w) => Some(*w),
                            _ => None,
                        },
                        rh_pass: v.passed(),
                    });
                }
                match solve_coefficients(&seq, &rs) {
                    Ok(sd) => {
                        let c = classify(&sd.all_coefficients(), lcm, opts.classify_tol, opts.coeff_cap);
                        class_verdict = classification_name(&c).to_string();
                        if c == Classification::Rational {
                            rational_function = Some(reconstruct(&zeta, &sd));
                        }
                        classification = Some(match &c {
                            Classification::Rational => ClassificationReport { verdict: class_verdict.clone(), d: lcm, witnesses: Vec::new(), raw: Vec::new() },
                            Classification::NearRational { d, witnesses } => {
                                ClassificationReport { verdict: class_verdict.clone(), d: *d, witnesses: witnesses.clone(), raw: Vec::new() }
                            }
                            Classification::Inconclusive { raw } => ClassificationReport {
                                verdict: class_verdict.clone(),
                                d: lcm,
                                witnesses: Vec::new(),
                                raw: raw.iter().map(|z| ComplexOut::from(*z)).collect(),
                            },
                        });
                        spectral = Some(SpectralReport {
                            status: "ok".into(),
                            coefficients: sd.coefficients.iter().map(|c| c.iter().map(|z| ComplexOut::from(*z)).collect()).collect(),
                            residual: Some(sd.residual),
                            condition: Some(sd.condition),
                        });
                    }
                    Err(e) => {
                        class_verdict = "not_run".into();
                        spectral = Some(SpectralReport { status: e.to_string(), coefficients: Vec::new(), residual: None, condition: None });
                    }
                }
            }
            Err(e) => {
                rh_verdict = format!("not_run: {e}");
            }
        }
    }

    // Ax–Katz
    let ak_input = AxKatzInput { d: d.to_vec(), degrees: degrees.clone(), p: spec.p(), e: spec.e() };
    let ak_counts: Vec<(usize, BigInt)> = seq.iter().enumerate().map(|(i, n)| (i + 1, n.clone())).collect();
    let axkatz = match check_counts(&ak_input, &ak_counts) {
        Ok(rep) => AxKatzOut {
            applicable: rep.applicable(),
            mu: rep.mu,
            pass: rep.all_pass(),
            entries: rep
                .entries
                .iter()
                .map(|e| AxKatzEntryOut {
                    k: e.k,
                    count: e.count.to_string(),
                    ord_q: e.ord_q.as_ref().map(rat),
                    bound: e.bound,
                    pass: e.pass,
                })
                .collect(),
        },
        Err(_) => AxKatzOut { applicable: false, mu: None, entries: Vec::new(), pass: true },
    };

    // Twisted fixed points at k = 1
    let faltings = (opts.faltings && !seq.is_empty()).then(|| match fixed_points_sigma_frob(x, d, 1, &opts.count) {
        Ok(fp) => {
            let m = fp == values[0];
            FaltingsOut {
                k: 1,
                fixed_points: Some(fp.to_string()),
                count: Some(values[0].to_string()),
                status: if m { "match" } else { "mismatch" }.into(),
                note: String::new(),
            }
        }
        Err(e) => FaltingsOut { k: 1, fixed_points: None, count: Some(values[0].to_string()), status: "skipped".into(), note: e.to_string() },
    });

    // Heuristic for hypersurfaces
    let heuristic = (degrees.len() == 1).then(|| {
        let s = d.iter().sum::<usize>() - d.iter().max().copied().unwrap_or(0);
        let lq = (q as f64).ln();
        let per_k = seq
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let k = i + 1;
                let main = BigInt::from(q).pow((k * s) as u32);
                let diff = (n - main).abs();
                let exponent = if diff == BigInt::from(0) { None } else { Some(big_ln(&diff) / lq / k as f64) };
                HeuristicEntry { k, exponent }
            })
            .collect();
        HeuristicOut { main_exponent: s, expected_error_exponent: s as f64 / 2.0, per_k }
    });

    // Verdicts
    let ak_ok = !axkatz.applicable || axkatz.pass;
    let falt = faltings.as_ref().map_or("not_run".to_string(), |f| f.status.clone());
    let inconsistency = !ak_ok || falt == "mismatch" || (oracle_ran && !oracle_ok);
    let verdicts = Verdicts {
        recurrence: recurrence.status.clone(),
        prediction: prediction.as_ref().map_or("not_run".to_string(), |p| p.status.clone()),
        rh: rh_verdict,
        classification: class_verdict,
        axkatz: if !axkatz.applicable { "not_applicable".into() } else if ak_ok { "pass".into() } else { "fail".into() },
        faltings: falt,
        oracle: if !opts.oracle { "not_run".into() } else if !oracle_ran { "skipped".into() } else if oracle_ok { "match".into() } else { "mismatch".into() },
        series_round_trip: if round_trip { "pass".into() } else { "fail".into() },
        inconsistency,
    };
    let timings = opts.timings.then(|| Timings {
        counts_ms: levels.iter().map(|l| l.elapsed_ms).collect(),
        total_ms: started.elapsed().as_millis(),
    });
    Ok(AnalysisReport {
        schema_version: SCHEMA_VERSION.into(),
        command: "analyze".into(),
        input,
        budgets,
        partial,
        budget_error,
        counts,
        series,
        recurrence,
        prediction,
        roots,
        spectral,
        classification,
        rational_function,
        axkatz,
        faltings,
        heuristic,
        verdicts,
        timings,
    })
}

/// Natural log of a positive big integer.
fn big_ln(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    (x >> shift).to_f64().unwrap_or(1.0).ln() + shift as f64 * std::f64::consts::LN_2
}

/// With integer coefficients `c_j`, `Z = Π (1 − γ_j T)^{−c_j}`: numerator
/// degree `Σ_{c<0} |c|`, denominator degree `Σ_{c>0} c`.
fn reconstruct(zeta: &pzeta_core::series::QSeries, sd: &cfinite::SpectralData) -> RationalFnReport {
    let mut l = 0i64;
    let mut m = 0i64;
    for c in sd.all_coefficients() {
        let r = c.re.round() as i64;
        if r < 0 {
            l -= r;
        } else {
            m += r;
        }
    }
    if sd.coefficients.iter().any(|c| c.len() > 1) {
        return RationalFnReport { status: "not_attempted: repeated roots".into(), numerator: Vec::new(), denominator: Vec::new() };
    }
    match pade_reconstruct(zeta, l as usize, m as usize) {
        Ok(f) => RationalFnReport {
            status: "verified".into(),
            numerator: f.numerator.iter().map(rat).collect(),
            denominator: f.denominator.iter().map(rat).collect(),
        },
        Err(e) => RationalFnReport { status: format!("not_verified: {e}"), numerator: Vec::new(), denominator: Vec::new() },
    }
}
