//! `od` — command-line front end for the outer-dynamics toolkit.
//!
//! Subcommands load a map document (JSON), run one analysis or experiment,
//! and print a deterministic JSON report (or a CSV trace for `ns`).
//!
//! Exit codes: 0 success, 2 validation/precondition failure, 3 resource
//! cap exhausted, 64 usage error.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use outer_dynamics::currents::{current_functionals, in_kpg, rational_current};
use outer_dynamics::dynamics::{norm_growth_experiment, ns_experiment, ns_traces_to_csv, NsOptions};
use outer_dynamics::formats::{encode_word, parse_word, MapDocument};
use outer_dynamics::lengths::{constants, goodness_lower};
use outer_dynamics::nielsen::{Analysis, Growth, InpKind, InpRecord};
use outer_dynamics::substitution::{
    limit_frequency, primitivity_check, transition_matrix_sub, SubstitutionSystem,
};
use outer_dynamics::{Circuit, Error, Result, StratumKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "od", version, about = "Analysis toolkit for graph self-maps of marked graphs")]
struct Cli {
    /// PRNG seed for randomized experiments (always echoed).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the derived strata with their transition matrices and growth rates.
    Strata { map: PathBuf },
    /// Print the polynomial structure: constants, polynomial edges, path family, subgroup generators.
    Gpg { map: PathBuf },
    /// Print the irreducible Nielsen paths.
    Inps { map: PathBuf },
    /// Classify the growth of a conjugacy class.
    Classify {
        map: PathBuf,
        /// Word over edge ids, trailing '-' for an inverse letter (e.g. "ab-a").
        #[arg(long)]
        word: String,
    },
    /// Evaluate the counting current of a class on a window of test paths.
    Current {
        map: PathBuf,
        #[arg(long)]
        word: String,
        /// Requested window length (auto-raised to fit the path family).
        #[arg(long, default_value_t = 2)]
        window: usize,
    },
    /// Report letter frequency limits of a substitution document.
    Subst { file: PathBuf },
    /// North-South iteration experiment over random seeds; prints a CSV trace.
    Ns {
        map: PathBuf,
        /// Map document representing the inverse on conjugacy classes.
        #[arg(long)]
        inverse: PathBuf,
        /// Number of random seed classes.
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// Maximum iteration stages per seed.
        #[arg(long, default_value_t = 30)]
        iters: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audit relative-norm growth under the expanding power of the map.
    GrowthAudit {
        map: PathBuf,
        /// Number of random seed classes (on top of the single-edge seeds).
        #[arg(long, default_value_t = 5)]
        seeds: usize,
        #[arg(long, default_value_t = 3)]
        m_range: usize,
        #[arg(long, default_value_t = 1)]
        burn_in: usize,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    eprintln!("seed: {}", cli.seed);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Cap(msg)) => {
            eprintln!("error: cap exhausted: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Parallelism for experiments: hardware threads, capped by `OD_THREADS`.
fn thread_count() -> usize {
    let hw = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("OD_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(cap) if cap >= 1 => hw.min(cap),
        _ => hw,
    }
}

struct Loaded {
    ids: Vec<String>,
    analysis: Analysis,
}

fn load(path: &PathBuf) -> Result<Loaded> {
    let doc = MapDocument::load(path)?;
    let ids = doc.edge_ids();
    let analysis = Analysis::new(doc.to_graph_map()?)?;
    Ok(Loaded { ids, analysis })
}

fn print_report(mut report: Map<String, Value>, seed: u64) {
    report.insert("seed".into(), json!(seed));
    println!("{}", serde_json::to_string_pretty(&Value::Object(report)).expect("serializable"));
}

fn words_json(ids: &[String], words: impl IntoIterator<Item = Vec<i32>>) -> Value {
    Value::Array(words.into_iter().map(|w| json!(encode_word(&w, ids))).collect())
}

fn edge_names(ids: &[String], edges: impl IntoIterator<Item = u32>) -> Value {
    Value::Array(edges.into_iter().map(|e| json!(ids[(e - 1) as usize])).collect())
}

/// Random exponentially growing seed classes; errors out early on maps
/// without exponential growth instead of searching forever.
fn random_exponential_seeds(
    analysis: &Analysis,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<i32>>> {
    let map = analysis.map();
    if !map.strata().iter().any(|s| s.kind == StratumKind::Eg) {
        return Err(Error::domain(
            "this map has no exponentially growing stratum; the experiment needs exponential growth",
        ));
    }
    let g = map.graph();
    let rank = g.n_edges() as i32;
    let mut seeds = Vec::new();
    let mut budget = 10_000usize;
    while seeds.len() < count {
        budget = budget.checked_sub(1).ok_or_else(|| {
            Error::cap("could not sample enough exponentially growing classes")
        })?;
        let len = rng.gen_range(1..=8usize);
        let mut w: Vec<i32> = Vec::new();
        while w.len() < len {
            let e = rng.gen_range(1..=rank);
            let e = if rng.gen_bool(0.5) { -e } else { e };
            if w.last() == Some(&-e) {
                continue;
            }
            w.push(e);
        }
        let Ok(c) = g.circuit_of_word(&w) else { continue };
        if analysis.classify_growth(&c) == Growth::Exponential {
            seeds.push(c.edges().to_vec());
        }
    }
    Ok(seeds)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.cmd {
        Cmd::Strata { map } => {
            let l = load(map)?;
            print_report(strata_report(&l), cli.seed);
        }
        Cmd::Gpg { map } => {
            let l = load(map)?;
            print_report(gpg_report(&l)?, cli.seed);
        }
        Cmd::Inps { map } => {
            let l = load(map)?;
            print_report(inps_report(&l), cli.seed);
        }
        Cmd::Classify { map, word } => {
            let l = load(map)?;
            let c = circuit_of(&l, word)?;
            print_report(classify_report(&l, word, &c), cli.seed);
        }
        Cmd::Current { map, word, window } => {
            let l = load(map)?;
            let c = circuit_of(&l, word)?;
            print_report(current_report(&l, word, &c, *window)?, cli.seed);
        }
        Cmd::Subst { file } => {
            let text = std::fs::read_to_string(file)?;
            let sys = SubstitutionSystem::from_json(&serde_json::from_str(&text)?)?;
            print_report(subst_report(&sys), cli.seed);
        }
        Cmd::Ns { map, inverse, seeds, iters, out } => {
            let l = load(map)?;
            let li = load(inverse)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let seed_words = random_exponential_seeds(&l.analysis, *seeds, &mut rng)?;
            let opts = NsOptions {
                nmax: *iters,
                threads: thread_count(),
                ..NsOptions::default()
            };
            let traces =
                ns_experiment(&l.analysis, &li.analysis, &seed_words, &opts, &BTreeSet::new())?;
            let csv = ns_traces_to_csv(&traces, &l.ids)?;
            match out {
                Some(path) => std::fs::write(path, &csv)?,
                None => print!("{csv}"),
            }
            let fwd = traces.iter().filter(|t| t.success_plus.is_some()).count();
            let bwd = traces.iter().filter(|t| t.success_minus.is_some()).count();
            let skipped = traces.iter().filter(|t| t.skipped.is_some()).count();
            eprintln!(
                "summary: {fwd}/{} converged forward, {bwd}/{} backward, {skipped} skipped",
                traces.len(),
                traces.len()
            );
        }
        Cmd::GrowthAudit { map, seeds, m_range, burn_in } => {
            let l = load(map)?;
            let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
            let mut seed_words: Vec<Vec<i32>> =
                (1..=l.analysis.map().graph().n_edges() as i32).map(|e| vec![e]).collect();
            seed_words.extend(random_exponential_seeds(&l.analysis, *seeds, &mut rng)?);
            let table = norm_growth_experiment(
                &l.analysis,
                &seed_words,
                *m_range,
                num::rational::Ratio::new(1, 2),
                *burn_in,
                &BTreeSet::new(),
            )?;
            let mut report = Map::new();
            report.insert("command".into(), json!("growth-audit"));
            report.insert("power".into(), json!(table.power));
            report.insert(
                "rows".into(),
                Value::Array(
                    table
                        .rows
                        .iter()
                        .map(|r| {
                            json!({
                                "seed": encode_word(&r.seed, &l.ids),
                                "m": r.m,
                                "norm_before": r.norm_before,
                                "norm_after": r.norm_after,
                                "tripled": r.tripled,
                            })
                        })
                        .collect(),
                ),
            );
            report.insert("audit_pass".into(), json!(table.audit_pass));
            print_report(report, cli.seed);
        }
    }
    Ok(())
}

fn circuit_of(l: &Loaded, word: &str) -> Result<Circuit> {
    let w = parse_word(word, &l.ids)?;
    l.analysis.map().graph().circuit_of_word(&w)
}

fn strata_report(l: &Loaded) -> Map<String, Value> {
    let mut report = Map::new();
    report.insert("command".into(), json!("strata"));
    let strata: Vec<Value> = l
        .analysis
        .map()
        .strata()
        .iter()
        .map(|s| {
            json!({
                "edges": edge_names(&l.ids, s.edges.iter().copied()),
                "kind": match s.kind {
                    StratumKind::Eg => "EG",
                    StratumKind::Neg => "NEG",
                    StratumKind::Zero => "ZERO",
                },
                "lambda": s.pf.as_ref().map(|pf| pf.lambda),
                "matrix": s.matrix,
            })
        })
        .collect();
    report.insert("strata".into(), Value::Array(strata));
    let validation = l.analysis.validate_structure();
    report.insert(
        "validation".into(),
        json!({
            "all_passed": validation.all_passed(),
            "advisories": validation.advisories,
        }),
    );
    report
}

fn gpg_report(l: &Loaded) -> Result<Map<String, Value>> {
    let mut report = Map::new();
    report.insert("command".into(), json!("gpg"));
    let table = constants(&l.analysis)?;
    report.insert(
        "constants".into(),
        json!({
            "K": table.k,
            "C": table.c,
            "C_f": table.c_f,
            "N3K": table.n3k,
        }),
    );
    let pg = l.analysis.pg();
    report.insert("polynomial_edges".into(), edge_names(&l.ids, pg.gpg_edges.iter().copied()));
    report.insert("zero_edges".into(), edge_names(&l.ids, pg.zero_edges.iter().copied()));
    report.insert(
        "path_family".into(),
        words_json(&l.ids, pg.npg.iter().map(|p| p.edges.clone())),
    );
    let generators: Vec<Value> = pg
        .poly_system
        .components
        .iter()
        .map(|(_, gens)| words_json(&l.ids, gens.iter().cloned()))
        .collect();
    report.insert("subgroup_generators".into(), Value::Array(generators));
    Ok(report)
}

fn inp_json(l: &Loaded, r: &InpRecord) -> Value {
    json!({
        "path": encode_word(&r.path.edges, &l.ids),
        "height": r.height,
        "kind": match r.kind {
            InpKind::Eg => "exponential",
            InpKind::Neg { .. } => "non-exponential",
        },
        "closed": r.closed,
        "reversed": r.reversed,
    })
}

fn inps_report(l: &Loaded) -> Map<String, Value> {
    let search = l.analysis.inps();
    let mut report = Map::new();
    report.insert("command".into(), json!("inps"));
    report.insert(
        "exponential".into(),
        Value::Array(search.eg_inps.iter().map(|r| inp_json(l, r)).collect()),
    );
    report.insert(
        "non_exponential".into(),
        Value::Array(search.neg_inps.iter().map(|r| inp_json(l, r)).collect()),
    );
    report.insert(
        "fixed_edges".into(),
        edge_names(&l.ids, search.nielsen_edges.iter().copied()),
    );
    report.insert("exhaustive_up_to".into(), json!(search.exhaustive_up_to));
    report.insert("undecided".into(), json!(search.undecided));
    report
}

fn classify_report(l: &Loaded, word: &str, c: &Circuit) -> Map<String, Value> {
    let mut report = Map::new();
    report.insert("command".into(), json!("classify"));
    report.insert("word".into(), json!(word));
    report.insert("circuit".into(), json!(encode_word(c.edges(), &l.ids)));
    match l.analysis.classify_growth(c) {
        Growth::Exponential => {
            report.insert("growth".into(), json!("exponential"));
        }
        Growth::Polynomial { decomposition } => {
            report.insert("growth".into(), json!("polynomial"));
            report.insert(
                "decomposition".into(),
                words_json(&l.ids, decomposition.into_iter().map(|p| p.edges)),
            );
        }
    }
    report
}

fn current_report(l: &Loaded, word: &str, c: &Circuit, window: usize) -> Result<Map<String, Value>> {
    let mu = rational_current(&l.analysis, c, window)?;
    let empty = BTreeSet::new();
    let f = current_functionals(&l.analysis, &mu, &empty)?;
    let mut report = Map::new();
    report.insert("command".into(), json!("current"));
    report.insert("word".into(), json!(word));
    report.insert("circuit".into(), json!(encode_word(c.edges(), &l.ids)));
    report.insert(
        "window_length".into(),
        json!(mu.window.iter().map(Vec::len).max().unwrap_or(0)),
    );
    report.insert("norm".into(), json!(f.norm.to_string()));
    report.insert("exp_length".into(), json!(f.psi0.to_string()));
    report.insert("relative_norm".into(), json!(f.norm_f.to_string()));
    report.insert("polynomial_cone".into(), json!(in_kpg(&l.analysis, &mu)?));
    report.insert(
        "goodness_lower".into(),
        json!(goodness_lower(&l.analysis, c)?.to_string()),
    );
    Ok(report)
}

fn subst_report(sys: &SubstitutionSystem) -> Map<String, Value> {
    let mut report = Map::new();
    report.insert("command".into(), json!("subst"));
    report.insert("alphabet".into(), json!(sys.alphabet));
    report.insert("transition_matrix".into(), json!(transition_matrix_sub(sys)));
    report.insert(
        "primitivity".into(),
        json!(format!("{:?}", primitivity_check(&transition_matrix_sub(sys)))),
    );
    // Frequency limits from each admissible seed letter (rule starting
    // with the letter itself).
    let mut freqs = Map::new();
    for a in &sys.alphabet {
        let mut row = Map::new();
        for b in &sys.alphabet {
            match limit_frequency(sys, a, std::slice::from_ref(b)) {
                Ok(est) => {
                    row.insert(b.clone(), json!(est.value));
                }
                Err(_) => continue,
            }
        }
        if !row.is_empty() {
            freqs.insert(a.clone(), Value::Object(row));
        }
    }
    report.insert("letter_frequencies".into(), Value::Object(freqs));
    report
}
