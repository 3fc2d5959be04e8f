//! The remaining subcommands: count, axkatz, faltings-verify,
//! identity-check and search.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use pzeta_core::counting::{count_partial, count_partial_bruteforce, count_series, CountError};
use pzeta_core::faltings::{fixed_points_sigma_frob, verify_y_membership};
use pzeta_core::padic::verify_axkatz;
use pzeta_core::symident::{self, oracle};
use pzeta_core::{CountConfig, PartialCountQuery, VarietySpec};

use crate::analyze::{analyze, is_budget_error, rat, AnalyzeOptions, SCHEMA_VERSION};
use crate::varfile::VarietyFile;

/// A serialized report plus the process exit code it implies.
pub struct Outcome {
    pub json: String,
    pub human: String,
    pub code: i32,
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable report");
    s.push('\n');
    s
}

pub fn exit_code_for(e: &CountError) -> i32 {
    if is_budget_error(e) {
        2
    } else {
        1
    }
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CountOut {
    schema_version: String,
    command: String,
    label: Option<String>,
    d: Vec<usize>,
    k_max: usize,
    counts: Vec<CountRow>,
    partial: bool,
    budget_error: Option<String>,
}

#[derive(Serialize)]
struct CountRow {
    k: usize,
    value: String,
    nodes_bound: String,
    nodes_visited: String,
    oracle: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elapsed_ms: Option<u128>,
}

pub fn cmd_count(file: &VarietyFile, d: &[usize], k_max: usize, cfg: &CountConfig, oracle_check: bool, timings: bool) -> Result<Outcome, CountError> {
    let x = file.to_variety().map_err(|e| CountError::InvalidQuery(e.to_string()))?;
    let query = PartialCountQuery::new(d.to_vec(), k_max)?;
    let (levels, values, partial, budget_error) = match count_series(&x, &query, cfg) {
        Ok(s) => (s.levels, s.values, false, None),
        Err(CountError::SeriesBudgetExceeded { partial, k, needed, budget, .. }) => {
            let lv = (1..=partial.len())
                .map(|k| {
                    let o = pzeta_core::counting::count_partial_detailed(&x, d, k, cfg).expect("completed level");
                    pzeta_core::counting::LevelReport { k, nodes_bound: o.nodes_bound, nodes_visited: o.nodes_visited, elapsed_ms: 0 }
                })
                .collect();
            (lv, partial, true, Some(format!("budget exceeded at k = {k}: needs {needed}, budget {budget}")))
        }
        Err(e) => return Err(e),
    };
    let mut mismatch = false;
    let rows: Vec<CountRow> = levels
        .iter()
        .zip(&values)
        .map(|(lv, &v)| {
            let oracle = oracle_check.then(|| match count_partial_bruteforce(&x, d, lv.k, cfg) {
                Ok(b) if b == v => "match".to_string(),
                Ok(b) => {
                    mismatch = true;
                    format!("mismatch: brute force gives {b}")
                }
                Err(e) => format!("skipped: {e}"),
            });
            CountRow {
                k: lv.k,
                value: v.to_string(),
                nodes_bound: lv.nodes_bound.to_string(),
                nodes_visited: lv.nodes_visited.to_string(),
                oracle,
                elapsed_ms: timings.then_some(lv.elapsed_ms),
            }
        })
        .collect();
    let mut human = format!("{:>4}  {:>24}  {:>14}\n", "k", "N_k", "nodes");
    for r in &rows {
        human.push_str(&format!("{:>4}  {:>24}  {:>14}\n", r.k, r.value, r.nodes_visited));
    }
    if let Some(b) = &budget_error {
        human.push_str(&format!("partial: {b}\n"));
    }
    let out = CountOut {
        schema_version: SCHEMA_VERSION.into(),
        command: "count".into(),
        label: file.label.clone(),
        d: d.to_vec(),
        k_max,
        counts: rows,
        partial,
        budget_error,
    };
    let code = if mismatch { 3 } else if partial { 2 } else { 0 };
    Ok(Outcome { json: to_json(&out), human, code })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct AxKatzCmdOut {
    schema_version: String,
    command: String,
    label: Option<String>,
    d: Vec<usize>,
    applicable: bool,
    mu: Option<u64>,
    entries: Vec<crate::analyze::AxKatzEntryOut>,
    pass: bool,
}

pub fn cmd_axkatz(file: &VarietyFile, d: &[usize], k_max: usize, cfg: &CountConfig) -> Result<Outcome, CountError> {
    let x = file.to_variety().map_err(|e| CountError::InvalidQuery(e.to_string()))?;
    let ks: Vec<usize> = (1..=k_max).collect();
    let rep = verify_axkatz(&x, d, &ks, cfg).map_err(|e| match e {
        pzeta_core::padic::AxKatzError::Count(c) => c,
        other => CountError::InvalidQuery(other.to_string()),
    })?;
    let entries: Vec<_> = rep
        .entries
        .iter()
        .map(|e| crate::analyze::AxKatzEntryOut { k: e.k, count: e.count.to_string(), ord_q: e.ord_q.as_ref().map(rat), bound: e.bound, pass: e.pass })
        .collect();
    let mut human = match rep.mu {
        Some(mu) => format!("mu = {mu}\n{:>4}  {:>20}  {:>10}  {:>6}  verdict\n", "k", "N_k", "ord_q", "bound"),
        None => "no equations: bound not applicable\n".to_string(),
    };
    for e in &entries {
        human.push_str(&format!(
            "{:>4}  {:>20}  {:>10}  {:>6}  {}\n",
            e.k,
            e.count,
            e.ord_q.clone().unwrap_or_else(|| "inf".into()),
            e.bound,
            if e.pass { "pass" } else { "FAIL" }
        ));
    }
    let out = AxKatzCmdOut {
        schema_version: SCHEMA_VERSION.into(),
        command: "axkatz".into(),
        label: file.label.clone(),
        d: d.to_vec(),
        applicable: rep.applicable(),
        mu: rep.mu,
        pass: rep.all_pass(),
        entries,
    };
    Ok(Outcome { json: to_json(&out), human, code: if rep.all_pass() { 0 } else { 3 } })
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct FaltingsCmdOut {
    schema_version: String,
    command: String,
    label: Option<String>,
    d: Vec<usize>,
    k: usize,
    count_partial: String,
    fixed_points: String,
    grid_ok: bool,
    sigma_stable: bool,
    first_component_ok: bool,
    first_components_distinct: bool,
    verdict: String,
}

pub fn cmd_faltings_verify(file: &VarietyFile, d: &[usize], k: usize, cfg: &CountConfig) -> Result<Outcome, CountError> {
    let x = file.to_variety().map_err(|e| CountError::InvalidQuery(e.to_string()))?;
    let n = count_partial(&x, d, k, cfg)?;
    let rep = verify_y_membership(&x, d, k, cfg)?;
    let ok = rep.fixed_points == n && rep.ok();
    let out = FaltingsCmdOut {
        schema_version: SCHEMA_VERSION.into(),
        command: "faltings-verify".into(),
        label: file.label.clone(),
        d: d.to_vec(),
        k,
        count_partial: n.to_string(),
        fixed_points: rep.fixed_points.to_string(),
        grid_ok: rep.grid_ok,
        sigma_stable: rep.sigma_stable,
        first_component_ok: rep.first_component_ok,
        first_components_distinct: rep.first_components_distinct,
        verdict: if ok { "match".into() } else { "mismatch".into() },
    };
    let human = format!("count_partial = {n}, fixed points of sigma∘Frob^{k} = {}: {}\n", rep.fixed_points, out.verdict);
    Ok(Outcome { json: to_json(&out), human, code: if ok { 0 } else { 3 } })
}

/// Just the two numbers, for callers that only need the identity.
pub fn faltings_pair(x: &VarietySpec, d: &[usize], k: usize, cfg: &CountConfig) -> Result<(u128, u128), CountError> {
    Ok((count_partial(x, d, k, cfg)?, fixed_points_sigma_frob(x, d, k, cfg)?))
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCase {
    pub kind: String,
    pub dim: usize,
    pub h: usize,
    pub data: Vec<Vec<i64>>,
    pub direct: String,
    pub universal: String,
    pub printed_sign: String,
    pub newton_consistent: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    pub spectra: usize,
    pub matrices: usize,
    pub spectra_pass: usize,
    pub matrices_pass: usize,
    /// `dim 1, λ = 3, h = 2`: the two sign conventions side by side.
    pub sign_demo: IdentityCase,
    pub failures: Vec<IdentityCase>,
    pub pass: bool,
}

fn r(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn spectrum_case(eigs: &[i64], h: usize) -> IdentityCase {
    let big: Vec<BigInt> = eigs.iter().map(|&x| BigInt::from(x)).collect();
    let p = oracle::power_sums(&big, h);
    let sym = oracle::complete(&big, h);
    let wedge = oracle::elementary(&big, h);
    let universal = symident::universal_trace(&sym[1..], &wedge[..h]);
    let printed = symident::universal_trace_printed_sign(&sym[1..], &wedge[..h]);
    let newton = symident::power_to_complete(&p) == sym[1..] && symident::power_to_elementary(&p) == wedge[1..];
    IdentityCase {
        kind: "spectrum".into(),
        dim: eigs.len(),
        h,
        data: vec![eigs.to_vec()],
        direct: rat(&p[h - 1]),
        universal: rat(&universal),
        printed_sign: rat(&printed),
        newton_consistent: newton,
        pass: universal == p[h - 1] && newton,
    }
}

fn matrix_case(m: &[Vec<i64>], h: usize) -> IdentityCase {
    let big: Vec<Vec<BigInt>> = m.iter().map(|row| row.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let p = oracle::matrix_power_traces(&big, h);
    let sym = oracle::matrix_complete(&big, h);
    let wedge = oracle::matrix_elementary(&big, h);
    let universal = symident::universal_trace(&sym[1..], &wedge[..h]);
    let printed = symident::universal_trace_printed_sign(&sym[1..], &wedge[..h]);
    let newton = symident::power_to_complete(&p) == sym[1..] && symident::power_to_elementary(&p) == wedge[1..];
    IdentityCase {
        kind: "matrix".into(),
        dim: m.len(),
        h,
        data: m.to_vec(),
        direct: rat(&p[h - 1]),
        universal: rat(&universal),
        printed_sign: rat(&printed),
        newton_consistent: newton,
        pass: universal == p[h - 1] && newton,
    }
}

/// Random integer spectra (entries in [−5, 5]) and random integer matrices
/// (entries in [−3, 3], dim ≤ min(dim_max, 5), h ≤ min(h_max, 5)).
pub fn identity_check(h_max: usize, dim_max: usize, spectra: usize, matrices: usize, seed: u64) -> IdentityReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut spectra_pass = 0;
    for _ in 0..spectra {
        let dim = rng.gen_range(1..=dim_max.max(1));
        let h = rng.gen_range(1..=h_max.max(1));
        let eigs: Vec<i64> = (0..dim).map(|_| rng.gen_range(-5..=5)).collect();
        let c = spectrum_case(&eigs, h);
        if c.pass {
            spectra_pass += 1;
        } else {
            failures.push(c);
        }
    }
    let mut matrices_pass = 0;
    for i in 0..matrices {
        let dim = rng.gen_range(1..=dim_max.clamp(1, 5));
        let h = rng.gen_range(1..=h_max.clamp(1, 5));
        let m: Vec<Vec<i64>> = if i == 0 {
            vec![vec![0; dim]; dim]
        } else {
            (0..dim).map(|_| (0..dim).map(|_| rng.gen_range(-3..=3)).collect()).collect()
        };
        let c = matrix_case(&m, h);
        if c.pass {
            matrices_pass += 1;
        } else {
            failures.push(c);
        }
    }
    let sign_demo = spectrum_case(&[3], 2);
    let pass = failures.is_empty() && sign_demo.printed_sign == rat(&(-r(9))) && sign_demo.universal == rat(&r(9));
    IdentityReport {
        schema_version: SCHEMA_VERSION.into(),
        command: "identity-check".into(),
        seed,
        spectra,
        matrices,
        spectra_pass,
        matrices_pass,
        sign_demo,
        failures,
        pass,
    }
}

pub fn cmd_identity_check(h_max: usize, dim_max: usize, spectra: usize, matrices: usize, seed: u64) -> Outcome {
    let rep = identity_check(h_max, dim_max, spectra, matrices, seed);
    let human = format!(
        "spectra {}/{} pass, matrices {}/{} pass; dim 1, h = 2, λ = 3: identity gives {}, printed sign gives {}\n",
        rep.spectra_pass, rep.spectra, rep.matrices_pass, rep.matrices, rep.sign_demo.universal, rep.sign_demo.printed_sign
    );
    Outcome { json: to_json(&rep), human, code: if rep.pass { 0 } else { 3 } }
}

// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub trials: usize,
    pub seed: u64,
    pub primes: Vec<u64>,
    pub d_tuples: Vec<Vec<usize>>,
    pub max_degree: u32,
    pub max_terms: usize,
    pub k_max: usize,
    pub analyze: AnalyzeOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            trials: 8,
            seed: 1,
            primes: vec![2],
            d_tuples: vec![vec![2, 3]],
            max_degree: 3,
            max_terms: 4,
            k_max: 8,
            analyze: AnalyzeOptions { faltings: false, check_prediction: false, ..AnalyzeOptions::default() },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchEvent {
    pub trial: usize,
    pub kind: String,
    pub d: Vec<usize>,
    pub k_max: usize,
    pub counts: Vec<String>,
    pub detail: String,
    /// Replayable variety file.
    pub variety: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub schema_version: String,
    pub command: String,
    pub seed: u64,
    pub trials: usize,
    pub analyzed: usize,
    pub rational: usize,
    /// Classification other than Rational, or failed weight checks.
    pub events: Vec<SearchEvent>,
    /// Instances where no recurrence was found in the window; not evidence either way.
    pub unresolved: Vec<SearchEvent>,
    /// Counts contradicting a theorem (Ax–Katz, fixed points, oracle).
    pub inconsistencies: Vec<SearchEvent>,
    pub errors: Vec<SearchEvent>,
}

impl SearchReport {
    pub fn exit_code(&self) -> i32 {
        if !self.inconsistencies.is_empty() {
            3
        } else if !self.events.is_empty() {
            4
        } else {
            0
        }
    }
}

/// A random sparse equation in two variables `x1, x2` with at most
/// `max_terms` monomials of total degree ≤ `max_degree`, involving both.
fn random_equation(rng: &mut ChaCha8Rng, p: u64, max_degree: u32, max_terms: usize) -> String {
    let mut monos: Vec<(u32, u32)> = (0..=max_degree).flat_map(|a| (0..=max_degree - a).map(move |b| (a, b))).filter(|m| *m != (0, 0)).collect();
    loop {
        monos.shuffle(rng);
        let terms = rng.gen_range(2..=max_terms.max(2));
        let chosen: Vec<(u32, u32)> = monos.iter().copied().take(terms).collect();
        if chosen.iter().all(|m| m.0 == 0) || chosen.iter().all(|m| m.1 == 0) {
            continue;
        }
        let mut parts = Vec::new();
        for (a, b) in chosen {
            let c = rng.gen_range(1..p);
            let mut t = if c == 1 { String::new() } else { format!("{c}*") };
            let mut vars = Vec::new();
            for (name, e) in [("x1", a), ("x2", b)] {
                match e {
                    0 => {}
                    1 => vars.push(name.to_string()),
                    _ => vars.push(format!("{name}^{e}")),
                }
            }
            t.push_str(&vars.join("*"));
            parts.push(t);
        }
        if rng.gen_bool(0.5) {
            parts.push(rng.gen_range(1..p).to_string());
        }
        return parts.join(" + ");
    }
}

pub fn search(cfg: &SearchConfig) -> SearchReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = SearchReport {
        schema_version: SCHEMA_VERSION.into(),
        command: "search".into(),
        seed: cfg.seed,
        trials: cfg.trials,
        analyzed: 0,
        rational: 0,
        events: Vec::new(),
        unresolved: Vec::new(),
        inconsistencies: Vec::new(),
        errors: Vec::new(),
    };
    if cfg.primes.is_empty() || cfg.d_tuples.is_empty() {
        return report;
    }
    for trial in 0..cfg.trials {
        let p = *cfg.primes.choose(&mut rng).unwrap();
        let d = cfg.d_tuples.choose(&mut rng).unwrap().clone();
        let eq = random_equation(&mut rng, p, cfg.max_degree, cfg.max_terms);
        let file = VarietyFile::from_parts(Some(format!("search seed {} trial {trial}", cfg.seed)), p, 1, 2, &[eq]);
        let variety = file.render();
        let event = |kind: &str, counts: Vec<String>, detail: String| SearchEvent {
            trial,
            kind: kind.into(),
            d: d.clone(),
            k_max: cfg.k_max,
            counts,
            detail,
            variety: variety.clone(),
        };
        let x = match file.to_variety() {
            Ok(x) => x,
            Err(e) => {
                report.errors.push(event("parse", Vec::new(), e.to_string()));
                continue;
            }
        };
        let rep = match analyze(&x, file.label.clone(), &d, cfg.k_max, &cfg.analyze) {
            Ok(r) => r,
            Err(e) => {
                report.errors.push(event("error", Vec::new(), e.to_string()));
                continue;
            }
        };
        report.analyzed += 1;
        let counts: Vec<String> = rep.counts.iter().map(|c| c.value.clone()).collect();
        let v = &rep.verdicts;
        if v.inconsistency {
            report.inconsistencies.push(event("inconsistency", counts, format!("axkatz {}, faltings {}, oracle {}", v.axkatz, v.faltings, v.oracle)));
        } else if rep.partial {
            report.errors.push(event("budget", counts, rep.budget_error.clone().unwrap_or_default()));
        } else if v.recurrence != "found" {
            report.unresolved.push(event("no_recurrence", counts, rep.recurrence.diagnosis.clone()));
        } else if v.classification == "Rational" && v.rh == "pass" {
            report.rational += 1;
        } else if v.classification == "not_run" {
            report.unresolved.push(event("unsolved", counts, rep.spectral.as_ref().map(|s| s.status.clone()).unwrap_or_default()));
        } else {
            report.events.push(event(&v.classification, counts, format!("rh {}", v.rh)));
        }
    }
    report
}

pub fn cmd_search(cfg: &SearchConfig) -> Outcome {
    let rep = search(cfg);
    let human = format!(
        "{} trials, {} analyzed, {} rational, {} events, {} unresolved, {} inconsistencies, {} errors\n",
        rep.trials,
        rep.analyzed,
        rep.rational,
        rep.events.len(),
        rep.unresolved.len(),
        rep.inconsistencies.len(),
        rep.errors.len()
    );
    Outcome { json: to_json(&rep), human, code: rep.exit_code() }
}

// ---------------------------------------------------------------------------

pub fn cmd_analyze(file: &VarietyFile, d: &[usize], k_max: usize, opts: &AnalyzeOptions) -> Result<Outcome, CountError> {
    let x = file.to_variety().map_err(|e| CountError::InvalidQuery(e.to_string()))?;
    let rep = analyze(&x, file.label.clone(), d, k_max, opts)?;
    Ok(Outcome { json: to_json(&rep), human: human_analysis(&rep), code: rep.exit_code() })
}

fn human_analysis(rep: &crate::analyze::AnalysisReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("d = {:?}, q = {}, k_max = {}\n", rep.input.d, rep.input.q, rep.input.k_max));
    for c in &rep.counts {
        s.push_str(&format!("  N_{:<3} = {}\n", c.k, c.value));
    }
    s.push_str(&format!("recurrence: {}\n", rep.recurrence.diagnosis));
    for r in &rep.roots {
        s.push_str(&format!(
            "  root {:>14.6} {:+14.6}i  |γ| = {:<12.6} mult {}  weight {}\n",
            r.re,
            r.im,
            r.modulus,
            r.multiplicity,
            r.weight.map_or("-".to_string(), |w| w.to_string())
        ));
    }
    let v = &rep.verdicts;
    s.push_str(&format!(
        "prediction {}, rh {}, classification {}, axkatz {}, faltings {}, round trip {}\n",
        v.prediction, v.rh, v.classification, v.axkatz, v.faltings, v.series_round_trip
    ));
    if let Some(b) = &rep.budget_error {
        s.push_str(&format!("PARTIAL: {b}\n"));
    }
    s
}
