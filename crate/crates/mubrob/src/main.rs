//! Command-line front end: reproduces the reference tables at desk scale and
//! exposes every computation as a reproducible, scriptable command.
//!
//! Exit codes: 0 success, 2 invalid input, 3 budget exceeded, 4 numerical
//! failure.

use clap::{Parser, Subcommand, ValueEnum};
use mubrob::analysis::{
    qubit_eta2, qubit_eta3, qubit_parent_positivity, random_unit_bloch, scan_subsets,
    steering_bound, steering_identity_check,
};
use mubrob::bounds::{
    eta_low_recursive, eta_up_charpoly_k4, eta_up_rank1, eta_up_simple,
};
use mubrob::linalg::C64;
use mubrob::mub::{
    build_for_dim, build_mub_tensor_triple, export_json, import_json, to_measurements,
    verify_unbiased, MubSet,
};
use mubrob::robustness::{robustness, RobustnessOptions};
use mubrob::Error;
use rand::SeedableRng;
use serde_json::{json, Value};
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser, Debug)]
#[command(name = "mubrob", version, about = "noise robustness of mutually unbiased bases")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// write output to this path instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// parallelism across independent cells/subsets
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value_t = 1e-8)]
    tie_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-8)]
    gap_tol: f64,
    #[arg(long, global = true, default_value_t = 1e-6)]
    group_tol: f64,
    #[arg(long, global = true, default_value_t = 10_000_000)]
    tuple_budget: u64,
    #[arg(long, global = true, default_value_t = 4096)]
    block_budget: u64,
    /// seed for sampling-based checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// construct the d+1 standard MUB and verify unbiasedness
    Mub {
        d: u64,
        /// export the basis set as JSON to this path (round-trippable)
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// analytic bounds for k MUB in dimension d
    Bounds { d: usize, k: usize },
    /// noise robustness eta* for k MUB in dimension d
    Robustness {
        d: u64,
        k: usize,
        /// basis subsets, e.g. "0,1,2" or "0,1,2/0,1,3" for several
        #[arg(long)]
        subset: Option<String>,
        #[arg(long)]
        no_sdp: bool,
        #[arg(long)]
        no_certificate: bool,
    },
    /// replicate a reference table: 1, 2, low, or analytic
    Table {
        which: String,
        #[arg(long)]
        dmax: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// enumerate k-subsets of the d+1 bases and cluster eta_up values
    Scan {
        d: u64,
        k: usize,
        /// also compute eta* per subset where budgets allow
        #[arg(long)]
        exact: bool,
    },
    /// sampling checks of the qubit closed forms
    Qubit {
        #[arg(long, default_value_t = 10_000)]
        pairs: u64,
        #[arg(long, default_value_t = 10_000)]
        triples: u64,
    },
    /// verify the steering identity and report w* = eta*
    SteeringCheck {
        d: u64,
        k: usize,
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
    },
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NotPrime(_)
        | Error::NotPrimePower(_)
        | Error::InvalidInput(_)
        | Error::NotRankOneProjective
        | Error::NotHermitian { .. } => 2,
        Error::BudgetExceeded(_) => 3,
        _ => 4,
    }
}

/// round every number to 12 significant digits, for stable diffable output
fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) => {
            if let Some(f) = n.as_f64() {
                if n.is_f64() {
                    let r: f64 = format!("{f:.11e}").parse().unwrap();
                    *v = json!(r);
                }
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_numbers),
        Value::Object(o) => o.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// bases for a cell: the standard construction, or the 2x3 tensor triple in
/// dimension six (only three MUB are known there)
fn bases_for_dim(d: u64) -> mubrob::Result<MubSet> {
    if d == 6 {
        build_mub_tensor_triple(2, 3)
    } else {
        build_for_dim(d)
    }
}

fn parse_subsets(s: &str) -> mubrob::Result<Vec<Vec<usize>>> {
    s.split('/')
        .map(|part| {
            part.split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::InvalidInput(format!("bad subset index {t:?}")))
                })
                .collect()
        })
        .collect()
}

// ---------- embedded reference values (self-grading) ----------

struct RefCell {
    table: &'static str,
    d: usize,
    k: usize,
    /// ascending cluster index for multi-value cells
    idx: usize,
    value: f64,
    provenance: &'static str,
}

fn reference_values() -> Vec<RefCell> {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s5 = 5f64.sqrt();
    let s6 = 6f64.sqrt();
    let s7 = 7f64.sqrt();
    let pi = std::f64::consts::PI;
    let mut v = vec![
        // table 1: eta* per (d, k); idx orders inequivalent values ascending
        RefCell { table: "1", d: 2, k: 2, idx: 0, value: 1.0 / s2, provenance: "closed form 1/sqrt2" },
        RefCell { table: "1", d: 3, k: 2, idx: 0, value: (1.0 + s3) / 4.0, provenance: "closed form (1+sqrt3)/4" },
        RefCell { table: "1", d: 4, k: 2, idx: 0, value: 2.0 / 3.0, provenance: "closed form 2/3" },
        RefCell { table: "1", d: 5, k: 2, idx: 0, value: (3.0 + s5) / 8.0, provenance: "closed form (3+sqrt5)/8" },
        RefCell { table: "1", d: 6, k: 2, idx: 0, value: (4.0 + s6) / 10.0, provenance: "closed form (4+sqrt6)/10" },
        RefCell { table: "1", d: 7, k: 2, idx: 0, value: (5.0 + s7) / 12.0, provenance: "closed form (5+sqrt7)/12" },
        RefCell { table: "1", d: 2, k: 3, idx: 0, value: 1.0 / s3, provenance: "closed form 1/sqrt3" },
        RefCell { table: "1", d: 3, k: 3, idx: 0, value: (pi / 18.0).cos() / s3, provenance: "closed form cos(pi/18)/sqrt3" },
        RefCell { table: "1", d: 4, k: 3, idx: 0, value: 0.5469, provenance: "numerical SDP value" },
        RefCell { table: "1", d: 5, k: 3, idx: 0, value: (13.0 - s5 + (30.0 * (5.0 + s5)).sqrt()) / 48.0, provenance: "closed form, one of two inequivalent triples" },
        RefCell { table: "1", d: 5, k: 3, idx: 1, value: (1.0 + s5) / 6.0, provenance: "closed form (1+sqrt5)/6, other triple" },
        RefCell { table: "1", d: 6, k: 3, idx: 0, value: 0.5204, provenance: "numerical SDP value" },
        RefCell { table: "1", d: 7, k: 3, idx: 0, value: 0.5101, provenance: "numerical SDP value" },
        RefCell { table: "1", d: 3, k: 4, idx: 0, value: (1.0 + 3.0 * s5) / 16.0, provenance: "closed form (1+3sqrt5)/16" },
        RefCell { table: "1", d: 4, k: 4, idx: 0, value: 0.5, provenance: "closed form 1/2" },
        RefCell { table: "1", d: 5, k: 4, idx: 0, value: 0.4615, provenance: "numerical SDP value" },
        RefCell { table: "1", d: 7, k: 4, idx: 0, value: 0.4436, provenance: "numerical SDP value, non-tight quadruplet" },
        RefCell { table: "1", d: 7, k: 4, idx: 1, value: 0.4516, provenance: "tight quadruplet" },
        RefCell { table: "1", d: 4, k: 5, idx: 0, value: (3.0 + 2.0 * s3) / 15.0, provenance: "closed form (3+2sqrt3)/15" },
        RefCell { table: "1", d: 5, k: 5, idx: 0, value: 0.4179, provenance: "tight, eigenvalue not in closed form" },
        RefCell { table: "1", d: 5, k: 6, idx: 0, value: 0.3863, provenance: "tight complete set" },
        RefCell { table: "1", d: 7, k: 7, idx: 0, value: 0.3685, provenance: "largest root of 56X^3-28X^2+1" },
        RefCell { table: "1", d: 7, k: 8, idx: 0, value: 0.3318, provenance: "tight complete set" },
        // analytic-forms table (cells beyond table 1)
        RefCell { table: "analytic", d: 9, k: 3, idx: 0, value: (1.0 + (pi / 9.0).cos()) / 4.0, provenance: "closed form (1+cos(pi/9))/4" },
        RefCell { table: "analytic", d: 9, k: 3, idx: 1, value: 0.5, provenance: "closed form 1/2" },
        RefCell { table: "analytic", d: 9, k: 4, idx: 0, value: (8.0 + 3.0 * s3) / 32.0, provenance: "closed form (8+3sqrt3)/32, one of three" },
        RefCell { table: "analytic", d: 9, k: 6, idx: 0, value: (3.0 + s7) / 16.0, provenance: "closed form (3+sqrt7)/16, one of three" },
        RefCell { table: "analytic", d: 8, k: 9, idx: 0, value: (3.0 + 2.0 * s3) / 21.0, provenance: "closed form (3+2sqrt3)/21" },
    ];
    // lower-bound table (recursive parent construction), 27 cells
    let low: [(usize, &[f64]); 6] = [
        (2, &[0.7071, 0.5774]),
        (3, &[0.6830, 0.5468, 0.4672]),
        (4, &[0.6667, 0.5263, 0.4455, 0.3918]),
        (5, &[0.6545, 0.5113, 0.4297, 0.3758, 0.3371]),
        (6, &[0.6449, 0.4996, 0.4175, 0.3636, 0.3250, 0.2958]),
        (7, &[0.6371, 0.4902, 0.4076, 0.3537, 0.3153, 0.2863, 0.2634]),
    ];
    for (d, col) in low {
        for (i, &val) in col.iter().enumerate() {
            v.push(RefCell { table: "low", d, k: i + 2, idx: 0, value: val, provenance: "recursive lower bound table" });
        }
    }
    // inequivalence counts, d <= 13, k <= 4 (absent dimensions count 1)
    let counts: [(usize, usize, f64); 10] = [
        (5, 3, 2.0), (5, 4, 1.0), (7, 3, 1.0), (7, 4, 2.0), (9, 3, 2.0),
        (9, 4, 3.0), (11, 3, 1.0), (11, 4, 2.0), (13, 3, 2.0), (13, 4, 4.0),
    ];
    for (d, k, c) in counts {
        v.push(RefCell { table: "2", d, k, idx: 0, value: c, provenance: "inequivalent-set lower bound" });
    }
    v
}

fn reference_for(table: &str, d: usize, k: usize) -> Vec<(f64, &'static str)> {
    let mut refs: Vec<(usize, f64, &'static str)> = reference_values()
        .into_iter()
        .filter(|r| r.table == table && r.d == d && r.k == k)
        .map(|r| (r.idx, r.value, r.provenance))
        .collect();
    refs.sort_by_key(|r| r.0);
    refs.into_iter().map(|r| (r.1, r.2)).collect()
}

// ---------- commands ----------

fn config_echo(cli: &Cli) -> Value {
    json!({
        "version": env!("CARGO_PKG_VERSION"),
        "command": format!("{:?}", cli.cmd),
        "tie_tol": cli.tie_tol,
        "gap_tol": cli.gap_tol,
        "group_tol": cli.group_tol,
        "tuple_budget": cli.tuple_budget,
        "block_budget": cli.block_budget,
        "seed": cli.seed,
        "jobs": cli.jobs,
        "format": format!("{:?}", cli.format).to_lowercase(),
    })
}

fn robustness_opts(cli: &Cli) -> RobustnessOptions {
    RobustnessOptions {
        gap_tol: cli.gap_tol,
        tie_tol: cli.tie_tol,
        sdp_block_budget: cli.block_budget,
        ..Default::default()
    }
}

fn cmd_mub(_cli: &Cli, d: u64, json_path: &Option<PathBuf>) -> mubrob::Result<Value> {
    let m = build_for_dim(d)?;
    let report = verify_unbiased(&m, 1e-10);
    if let Some(path) = json_path {
        let exported = export_json(&m);
        std::fs::write(path, serde_json::to_string_pretty(&exported)?)?;
        // round-trip check
        let back: mubrob::mub::MubSetJson =
            serde_json::from_str(&std::fs::read_to_string(path)?)?;
        import_json(back)?;
    }
    Ok(json!({
        "d": d,
        "bases": m.bases.len(),
        "meta": m.meta,
        "unbiasedness": report,
    }))
}

fn cmd_bounds(d: usize, k: usize) -> mubrob::Result<Value> {
    let mut out = serde_json::Map::new();
    out.insert("d".into(), json!(d));
    out.insert("k".into(), json!(k));
    out.insert("upper_simple".into(), json!(eta_up_simple(k, d)));
    if let Ok(ms) = bases_for_dim(d as u64)
        .and_then(|m| to_measurements(&m, &(0..k.min(m.bases.len())).collect::<Vec<_>>()))
    {
        if ms.k() == k {
            out.insert("upper_rank1".into(), json!(eta_up_rank1(&ms)?));
        }
    }
    if k == 4 && d >= 5 {
        out.insert("upper_charpoly".into(), json!(eta_up_charpoly_k4(d)?));
    }
    if k <= d + 1 {
        out.insert("lower_recursive".into(), json!(eta_low_recursive(k, d)?));
    }
    Ok(Value::Object(out))
}

fn cmd_robustness(
    cli: &Cli,
    d: u64,
    k: usize,
    subset: &Option<String>,
    no_sdp: bool,
    no_certificate: bool,
) -> mubrob::Result<Value> {
    let mubs = bases_for_dim(d)?;
    let subsets = match subset {
        Some(s) => parse_subsets(s)?,
        None => vec![(0..k).collect()],
    };
    let mut opts = robustness_opts(cli);
    opts.allow_sdp = !no_sdp;
    opts.allow_certificate = !no_certificate;
    let mut rows = Vec::new();
    for sub in &subsets {
        if sub.len() != k {
            return Err(Error::InvalidInput(format!(
                "subset {sub:?} has {} bases, expected k={k}",
                sub.len()
            )));
        }
        let ms = to_measurements(&mubs, sub)?;
        let rep = robustness(&ms, &opts)?;
        rows.push(json!({ "subset": sub, "eta": rep.eta, "report": rep }));
    }
    Ok(json!({ "d": d, "k": k, "results": rows }))
}

fn cell_reference_match(table: &str, d: usize, k: usize, values: &[f64], tol: f64) -> Value {
    let mut refs = reference_for(table, d, k);
    if refs.is_empty() && table == "analytic" {
        // the analytic-forms table shares its small cells with table 1
        refs = reference_for("1", d, k);
    }
    if refs.is_empty() {
        return json!({ "reference": Value::Null, "matches": Value::Null });
    }
    // every reference value must be realized by some computed value; cells
    // with more clusters than published values still grade as matching
    let matches = refs
        .iter()
        .all(|(r, _)| values.iter().any(|v| (r - v).abs() <= tol));
    json!({
        "reference": refs.iter().map(|r| r.0).collect::<Vec<_>>(),
        "provenance": refs.iter().map(|r| r.1).collect::<Vec<_>>(),
        "matches": matches,
    })
}

fn cmd_table(cli: &Cli, which: &str, dmax: Option<usize>, kmax: Option<usize>) -> mubrob::Result<Value> {
    let mut rows = Vec::new();
    match which {
        "low" => {
            let dmax = dmax.unwrap_or(7);
            for d in 2..=dmax {
                for k in 2..=(d + 1).min(kmax.unwrap_or(8)).min(8) {
                    let rep = eta_low_recursive(k, d)?;
                    let grade = cell_reference_match("low", d, k, &[rep.value], 1e-4);
                    rows.push(json!({ "d": d, "k": k, "eta_low": rep.value,
                        "alphas": rep.alphas, "grade": grade }));
                }
            }
        }
        "2" => {
            let dmax = dmax.unwrap_or(13);
            let kmax = kmax.unwrap_or(4);
            for d in 2..=dmax as u64 {
                if mubrob::galois::prime_power(d).is_none() {
                    continue;
                }
                for k in 3..=kmax.min(d as usize + 1) {
                    let t = std::time::Instant::now();
                    match scan_subsets(d, k, false, cli.group_tol) {
                        Ok(scan) => {
                            let grade = cell_reference_match(
                                "2", d as usize, k, &[scan.distinct as f64], 0.0,
                            );
                            rows.push(json!({ "d": d, "k": k,
                                "distinct": scan.distinct,
                                "distinct_at_1e5": scan.distinct_at_1e5,
                                "distinct_at_1e7": scan.distinct_at_1e7,
                                "subsets": scan.records.len(),
                                "grade": grade,
                                "wall_ms": t.elapsed().as_secs_f64() * 1e3 }));
                        }
                        Err(Error::BudgetExceeded(msg)) => {
                            rows.push(json!({ "d": d, "k": k, "skipped": msg }));
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
        "1" | "analytic" => {
            let dmax = dmax.unwrap_or(if which == "1" { 4 } else { 9 });
            let cells: Vec<(usize, usize)> = if which == "1" {
                let mut c = Vec::new();
                for d in 2..=dmax {
                    for k in 2..=(d + 1).min(kmax.unwrap_or(usize::MAX)) {
                        c.push((d, k));
                    }
                }
                c
            } else {
                [(3, 3), (5, 3), (9, 3), (3, 4), (4, 4), (9, 4), (4, 5), (9, 6), (8, 9), (7, 7)]
                    .into_iter()
                    .filter(|&(d, k)| d <= dmax && k <= kmax.unwrap_or(usize::MAX))
                    .collect()
            };
            for (d, k) in cells {
                let t = std::time::Instant::now();
                match table_cell(cli, d as u64, k) {
                    Ok(values) => {
                        let grade = cell_reference_match(which, d, k, &values.0, 5e-4);
                        rows.push(json!({ "d": d, "k": k, "eta": values.0,
                            "methods": values.1, "grade": grade,
                            "wall_ms": t.elapsed().as_secs_f64() * 1e3 }));
                    }
                    Err(Error::BudgetExceeded(msg)) => {
                        rows.push(json!({ "d": d, "k": k, "skipped": msg }));
                    }
                    Err(e) => {
                        rows.push(json!({ "d": d, "k": k, "failed": e.to_string() }));
                    }
                }
            }
        }
        _ => {
            return Err(Error::InvalidInput(format!(
                "unknown table {which:?}; expected 1, 2, low, or analytic"
            )))
        }
    }
    Ok(json!({ "table": which, "rows": rows }))
}

/// one table cell: eta* per inequivalence cluster, ascending
fn table_cell(cli: &Cli, d: u64, k: usize) -> mubrob::Result<(Vec<f64>, Vec<String>)> {
    let mubs = bases_for_dim(d)?;
    if k > mubs.bases.len() {
        return Err(Error::BudgetExceeded(format!(
            "only {} bases available in dimension {d}",
            mubs.bases.len()
        )));
    }
    let work = (d as u64).saturating_pow(k as u32);
    if work > cli.tuple_budget {
        return Err(Error::BudgetExceeded(format!(
            "{work} tuples exceed budget {}",
            cli.tuple_budget
        )));
    }
    // find one representative subset per eta_up cluster; if the full subset
    // scan is over budget, fall back to the leading subset only
    let reps: Vec<Vec<usize>> = if mubs.bases.len() > k {
        let scan = match scan_subsets(d, k, false, cli.group_tol) {
            Err(Error::BudgetExceeded(_)) => {
                let ms = to_measurements(&mubs, &(0..k).collect::<Vec<_>>())?;
                let rep = robustness(&ms, &robustness_opts(cli))?;
                return Ok((
                    vec![rep.eta],
                    vec![format!("{:?} (leading subset only)", rep.method).to_lowercase()],
                ));
            }
            other => other?,
        };
        let mut seen = std::collections::BTreeSet::new();
        let mut reps: Vec<(f64, Vec<usize>)> = Vec::new();
        for r in &scan.records {
            if seen.insert(r.cluster_id) {
                reps.push((r.eta_up, r.indices.clone()));
            }
        }
        reps.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        reps.into_iter().map(|r| r.1).collect()
    } else {
        vec![(0..k).collect()]
    };
    let opts = robustness_opts(cli);
    let mut values = Vec::new();
    let mut methods = Vec::new();
    for sub in &reps {
        let ms = to_measurements(&mubs, sub)?;
        let rep = robustness(&ms, &opts)?;
        values.push(rep.eta);
        methods.push(format!("{:?}", rep.method).to_lowercase());
    }
    Ok((values, methods))
}

fn cmd_scan(cli: &Cli, d: u64, k: usize, exact: bool) -> mubrob::Result<Value> {
    let scan = scan_subsets(d, k, exact, cli.group_tol)?;
    Ok(json!(scan))
}

fn cmd_qubit(cli: &Cli, pairs: u64, triples: u64) -> mubrob::Result<Value> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cli.seed);
    let mut min2 = f64::INFINITY;
    let mut min3 = f64::INFINITY;
    let mut positivity_ok = true;
    for _ in 0..pairs {
        let a = random_unit_bloch(&mut rng);
        let b = random_unit_bloch(&mut rng);
        let e = qubit_eta2(a, b);
        min2 = min2.min(e);
        positivity_ok &= qubit_parent_positivity(&[a, b], e)?;
    }
    for _ in 0..triples {
        let a = random_unit_bloch(&mut rng);
        let b = random_unit_bloch(&mut rng);
        let c = random_unit_bloch(&mut rng);
        let e = qubit_eta3(a, b, c);
        min3 = min3.min(e);
        positivity_ok &= qubit_parent_positivity(&[a, b, c], e)?;
    }
    Ok(json!({
        "pairs": pairs,
        "triples": triples,
        "min_eta2": min2,
        "min_eta3": min3,
        "bound_eta2": 1.0 / 2f64.sqrt(),
        "bound_eta3": 1.0 / 3f64.sqrt(),
        "minimality_holds": min2 >= 1.0 / 2f64.sqrt() - 1e-9
            && min3 >= 1.0 / 3f64.sqrt() - 1e-9,
        "parent_positivity_at_threshold": positivity_ok,
    }))
}

fn cmd_steering(cli: &Cli, d: u64, k: usize, eta: f64) -> mubrob::Result<Value> {
    let mubs = bases_for_dim(d)?;
    let ms = to_measurements(&mubs, &(0..k).collect::<Vec<_>>())?;
    // maximally entangled state
    let dd = d as usize;
    let mut psi = vec![C64::new(0.0, 0.0); dd * dd];
    for i in 0..dd {
        psi[i * dd + i] = C64::new(1.0 / (dd as f64).sqrt(), 0.0);
    }
    let deviation = steering_identity_check(&psi, &ms, eta)?;
    let bound = steering_bound(d, k)?;
    let _ = cli;
    Ok(json!({
        "d": d,
        "k": k,
        "eta": eta,
        "identity_deviation": deviation,
        "identity_holds": deviation <= 1e-12,
        "w_star": bound.w_star,
        "statement": format!(
            "isotropic-state steering with {k} MUB in dimension {d}: w* = {}",
            sig12(bound.w_star)
        ),
    }))
}

fn to_csv(v: &Value) -> String {
    // flat key,value listing; table/scan rows become one CSV line per row
    fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(o) => {
                for (k, vv) in o {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    flatten(&key, vv, out);
                }
            }
            Value::Array(a) => {
                for (i, vv) in a.iter().enumerate() {
                    flatten(&format!("{prefix}[{i}]"), vv, out);
                }
            }
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut pairs = Vec::new();
    flatten("", v, &mut pairs);
    let mut s = String::from("key,value\n");
    for (k, vv) in pairs {
        s.push_str(&format!("{k},{vv}\n"));
    }
    s
}

fn run(cli: &Cli) -> mubrob::Result<Value> {
    match &cli.cmd {
        Cmd::Mub { d, json } => cmd_mub(cli, *d, json),
        Cmd::Bounds { d, k } => cmd_bounds(*d, *k),
        Cmd::Robustness { d, k, subset, no_sdp, no_certificate } => {
            cmd_robustness(cli, *d, *k, subset, *no_sdp, *no_certificate)
        }
        Cmd::Table { which, dmax, kmax } => cmd_table(cli, which, *dmax, *kmax),
        Cmd::Scan { d, k, exact } => cmd_scan(cli, *d, *k, *exact),
        Cmd::Qubit { pairs, triples } => cmd_qubit(cli, *pairs, *triples),
        Cmd::SteeringCheck { d, k, eta } => cmd_steering(cli, *d, *k, *eta),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let result = run(&cli);
    match result {
        Ok(body) => {
            let mut out = json!({ "config": config_echo(&cli), "result": body });
            round_numbers(&mut out);
            let text = match cli.format {
                Format::Json => format!("{}\n", serde_json::to_string_pretty(&out).unwrap()),
                Format::Csv => to_csv(&out),
            };
            match &cli.output {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, &text) {
                        eprintln!("error: {e}");
                        std::process::exit(4);
                    }
                }
                None => print!("{text}"),
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(exit_code(&e));
        }
    }
}
