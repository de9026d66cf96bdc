//! End-to-end acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one pass/FAIL line, whatever the capture settings.

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sawlab::contraction::{enumerate_bounded_configs, psi_r, ConfigAssignment, Contracted};
use sawlab::decomposition::{extract_ball, unfold, ConeTypeSystem, NodeId, UnfoldedDecomposition};
use sawlab::grammar::{build_config_cfg, build_saw_mcfg, check_rank_bound};
use sawlab::mcfg::{check_unambiguous_upto, generate, recognize, Mcfg};
use sawlab::oracle::{bijection_check, compare_counts, compare_languages, enumerate_saws};
use sawlab::series::{saw_coefficients, series_table};
use sawlab::{corpus, Limits};

/// Exact integer equality everywhere; only wall-clock budgets are soft numbers.
const COUNT_BUDGET: Duration = Duration::from_secs(60);
const BIJECTION_BUDGET: Duration = Duration::from_secs(120);
const SEKI_BUDGET: Duration = Duration::from_secs(10);
const SAMPLES: usize = 1000;
const FULL_CONTRACTIONS: usize = 50;
const SEED: u64 = 0x5a3_1ab;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn limits() -> Limits {
    Limits::default()
}

fn systems() -> Vec<(&'static str, ConeTypeSystem)> {
    corpus::load_all().expect("bundled systems load")
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn count_horizon(name: &str) -> usize {
    if name == "paper-example" {
        10
    } else {
        12
    }
}

fn criterion_1() -> Outcome {
    let mut notes = Vec::new();
    for (name, sys) in systems() {
        let n = count_horizon(name);
        let t = Instant::now();
        let report = compare_counts(&sys, n, &limits()).map_err(fail)?;
        let took = t.elapsed();
        if !report.pass || report.rows.len() != n {
            return Err(format!("{name}: series and oracle differ\n{report}"));
        }
        if took > COUNT_BUDGET {
            return Err(format!("{name}: took {took:?}"));
        }
        notes.push(format!("{name} N={n} {:.1}s", took.as_secs_f64()));
    }
    Ok(notes.join(", "))
}

fn criterion_2() -> Outcome {
    let line = saw_coefficients(&corpus::system("line").unwrap(), 12, &limits()).map_err(fail)?;
    if line != vec![BigUint::from(2u32); 12] {
        return Err(format!("line: {line:?}"));
    }
    let tree = saw_coefficients(&corpus::system("tree3").unwrap(), 12, &limits()).map_err(fail)?;
    let closed: Vec<BigUint> = (0..12).map(|n| BigUint::from(3u32) << n).collect();
    if tree != closed {
        return Err(format!("tree3: {tree:?}"));
    }
    Ok("line 2, tree3 3*2^(n-1) for n <= 12".into())
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for (name, sys) in systems() {
        let t = Instant::now();
        let r = bijection_check(&sys, 6, &limits()).map_err(fail)?;
        let took = t.elapsed();
        if !(r.pass && r.injective && r.surjective && r.weight_is_length) {
            return Err(format!("{name}:\n{r}"));
        }
        if took > BIJECTION_BUDGET {
            return Err(format!("{name}: took {took:?}"));
        }
        let total: usize = r.rows.iter().map(|row| row.assignments).sum();
        notes.push(format!("{name} {total}"));
    }
    Ok(format!("assignments up to weight 6: {}", notes.join(", ")))
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for (name, n) in [("line", 7), ("ladder", 7), ("paper-example", 6)] {
        let r = compare_languages(&corpus::system(name).unwrap(), n, &limits()).map_err(fail)?;
        if !r.pass
            || !r.missing.is_empty()
            || !r.extra.is_empty()
            || r.oracle_words != r.grammar_words
        {
            return Err(format!("{name}:\n{r}"));
        }
        notes.push(format!("{name} {} words", r.oracle_words));
    }
    Ok(notes.join(", "))
}

fn criterion_5() -> Outcome {
    let mut notes = Vec::new();
    for (name, sys) in systems() {
        let g = build_saw_mcfg(&sys, &limits()).map_err(fail)?;
        if !check_rank_bound(&g, sys.k_max) {
            return Err(format!(
                "{name}: rank {} with k = {}",
                g.max_rank(),
                sys.k_max
            ));
        }
        let expected = match name {
            "ladder" => Some(1),
            "paper-example" => Some(2),
            _ => None,
        };
        if expected.is_some_and(|r| r != g.max_rank()) {
            return Err(format!("{name}: rank {}", g.max_rank()));
        }
        notes.push(format!(
            "{name} {}<={}",
            g.max_rank(),
            sys.k_max.div_ceil(2)
        ));
    }
    Ok(notes.join(", "))
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    for (name, sys) in systems() {
        let saw = build_saw_mcfg(&sys, &limits())
            .map_err(fail)?
            .to_mcfg(false, &limits())
            .map_err(fail)?;
        let (cfg, _) = build_config_cfg(&sys, &limits()).map_err(fail)?.to_mcfg();
        for (kind, g) in [("saw", &saw), ("config", &cfg)] {
            let r = check_unambiguous_upto(g, 6, &limits()).map_err(fail)?;
            if !r.is_unambiguous() || r.words.is_empty() {
                let shown: Vec<String> = r
                    .ambiguous
                    .iter()
                    .take(5)
                    .map(|(w, c)| format!("{}:{c}", g.alphabet.render(w)))
                    .collect();
                return Err(format!("{name} {kind}: {}", shown.join(" ")));
            }
        }
        notes.push(name);
    }
    Ok(format!(
        "every word up to length 6 has one derivation: {}",
        notes.join(", ")
    ))
}

/// Nodes next to the support, where contractions actually merge walks.
fn interesting_nodes(dec: &UnfoldedDecomposition, a: &ConfigAssignment) -> Vec<NodeId> {
    let support: BTreeSet<NodeId> = a
        .configs
        .keys()
        .filter_map(|p| dec.node_by_path(p))
        .collect();
    (1..dec.nodes.len())
        .filter(|&n| {
            support.contains(&n) || dec.nodes[n].parent.is_some_and(|p| support.contains(&p))
        })
        .collect()
}

fn contract_all(
    dec: &UnfoldedDecomposition,
    start: &Contracted,
    order: &[NodeId],
) -> Result<Contracted, String> {
    let weight = start.weight();
    let mut c = start.clone();
    for &f in order {
        c = c.contract_edge(dec, f).map_err(fail)?;
        if c.weight() != weight {
            return Err(format!(
                "weight {} became {} after node {f}",
                weight,
                c.weight()
            ));
        }
    }
    Ok(c)
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    for (name, sys) in systems() {
        let pool = enumerate_bounded_configs(&sys, 6, &limits()).map_err(fail)?;
        let mut decs: BTreeMap<usize, UnfoldedDecomposition> = BTreeMap::new();
        for i in 0..SAMPLES {
            let a = pool.choose(&mut rng).unwrap();
            let depth = a.support_depth() + 1;
            let dec = match decs.entry(depth) {
                Entry::Occupied(e) => e.into_mut(),
                Entry::Vacant(e) => e.insert(unfold(&sys, depth, &limits()).map_err(fail)?),
            };
            let dec = &*dec;
            let start = Contracted::new(&sys, dec, a).map_err(fail)?;
            if start.weight() != a.weight() {
                return Err(format!(
                    "{name}: lifted weight {} for {a:?}",
                    start.weight()
                ));
            }

            let nodes = interesting_nodes(dec, a);
            let k = rng.gen_range(1..=nodes.len().min(6));
            let mut chosen: Vec<NodeId> = nodes.choose_multiple(&mut rng, k).copied().collect();
            let first = contract_all(dec, &start, &chosen).map_err(|e| format!("{name}: {e}"))?;
            chosen.shuffle(&mut rng);
            let second = contract_all(dec, &start, &chosen).map_err(|e| format!("{name}: {e}"))?;
            if first.canonical(dec) != second.canonical(dec) {
                return Err(format!("{name}: order matters for {chosen:?} on {a:?}"));
            }

            // contracting everything must reproduce the walk read off the support
            if i < FULL_CONTRACTIONS {
                let mut all: Vec<NodeId> = (1..dec.nodes.len()).collect();
                all.shuffle(&mut rng);
                let whole = contract_all(dec, &start, &all).map_err(|e| format!("{name}: {e}"))?;
                let walk = psi_r(dec, a).map_err(fail)?;
                if whole.clusters.len() != 1 || whole.cluster_of(0).walk.vertices != walk.vertices {
                    return Err(format!(
                        "{name}: full contraction disagrees with psi on {a:?}"
                    ));
                }
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} sampled assignments, seed {SEED:#x}"))
}

fn in_language(w: &str) -> bool {
    let k = w.chars().take_while(|&c| c == 'a').count();
    let l = w[k..].chars().take_while(|&c| c == 'b').count();
    let m = w[k + l..].chars().take_while(|&c| c == 'c').count();
    k + l + m == w.len() && k >= l && l >= m
}

fn all_words(n: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..n {
        layer = layer
            .iter()
            .flat_map(|w| ['a', 'b', 'c'].map(|c| format!("{w}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn criterion_8() -> Outcome {
    let t = Instant::now();
    let g = Mcfg::from_json(corpus::SEKI_GRAMMAR).map_err(fail)?;
    let words = all_words(9);
    let verdicts = words
        .par_iter()
        .map(|w| {
            let parsed = g.alphabet.parse_word(w)?;
            let r = recognize(&g, &parsed, &limits()).map_err(fail)?;
            if r.member != in_language(w) {
                return Err(format!("{w:?}: recognizer says {}", r.member));
            }
            Ok(r.member)
        })
        .collect::<Result<Vec<bool>, String>>()?;
    let accepted: BTreeSet<String> = words
        .iter()
        .zip(&verdicts)
        .filter(|(_, &m)| m)
        .map(|(w, _)| w.clone())
        .collect();
    let generated: BTreeSet<String> = generate(&g, 9, &limits())
        .map_err(fail)?
        .word_set()
        .iter()
        .map(|w| g.alphabet.render(w))
        .collect();
    if generated != accepted {
        return Err(format!(
            "generation gives {} words, predicate {}",
            generated.len(),
            accepted.len()
        ));
    }
    let took = t.elapsed();
    if took > SEKI_BUDGET {
        return Err(format!("took {took:?}"));
    }
    Ok(format!(
        "{} words checked, {} members, {:.1}s",
        words.len(),
        accepted.len(),
        took.as_secs_f64()
    ))
}

/// Everything the command line prints, rendered by the library.
fn pipeline_output() -> Result<String, String> {
    let mut out = String::new();
    for (name, sys) in systems() {
        let n = if name == "paper-example" { 5 } else { 7 };
        let ball = extract_ball(&sys, n, &limits()).map_err(fail)?;
        out += &ball.to_json(&sys.alphabet).to_string();
        let census = enumerate_saws(&ball, n, true).map_err(fail)?;
        for ws in census.words.unwrap() {
            for w in ws {
                out += &sys.alphabet.render(&w);
                out.push('\n');
            }
        }
        out += &build_saw_mcfg(&sys, &limits())
            .map_err(fail)?
            .to_json()
            .to_string();
        out += &build_config_cfg(&sys, &limits())
            .map_err(fail)?
            .to_json()
            .to_string();
        out += &series_table(&saw_coefficients(&sys, n, &limits()).map_err(fail)?).map_err(fail)?;
        out += &serde_json::to_string(&compare_languages(&sys, n.min(5), &limits()).map_err(fail)?)
            .map_err(fail)?;
        out += &serde_json::to_string(&bijection_check(&sys, 4, &limits()).map_err(fail)?)
            .map_err(fail)?;
    }
    let g = Mcfg::from_json(corpus::SEKI_GRAMMAR).map_err(fail)?;
    for (w, c) in generate(&g, 7, &limits()).map_err(fail)?.words {
        out += &format!("{}\t{c}\n", g.alphabet.render(&w));
    }
    Ok(out)
}

fn criterion_9() -> Outcome {
    let mut reference: Option<String> = None;
    let mut runs = 0;
    for threads in [1, 2, 4, 8, 1] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(fail)?;
        let out = pool.install(pipeline_output)?;
        match &reference {
            None => reference = Some(out),
            Some(r) if *r != out => return Err(format!("output differs with {threads} threads")),
            Some(_) => {}
        }
        runs += 1;
    }
    Ok(format!(
        "{runs} runs over 1..8 threads, {} bytes each",
        reference.unwrap().len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("oracle and series counts agree", criterion_1),
        ("closed forms for line and tree3", criterion_2),
        ("contraction bijection up to weight 6", criterion_3),
        ("grammar language equals oracle words", criterion_4),
        ("rank bound", criterion_5),
        ("unambiguity up to length 6", criterion_6),
        ("contraction laws on sampled assignments", criterion_7),
        ("example grammar against its predicate", criterion_8),
        ("deterministic output across thread counts", criterion_9),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| title.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => println!("criterion {}: pass  {title} ({note}; {secs:.1}s)", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {}: FAIL  {title}: {e}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
