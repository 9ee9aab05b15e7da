//! End-to-end acceptance checks. Each test prints one PASS or FAIL line.
//! Run with `cargo test -p radocolor-cli --test acceptance -- --nocapture`
//! to see them.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use radocolor_core::colorings::Permutation;
use radocolor_core::engine::{
    generate_universe, Claim, NodeUniverse, SearchOptions, SearchOutcome, Seeds, UniverseConfig,
};
use radocolor_core::ratcore::multiplicative_dependence;
use radocolor_core::{
    canonicalize, check_proof_table, enumerate_colorings, find_monochromatic, parse_equation, rat,
    search, ColoringSpec, LinearEquation, ProofTree, Rational,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn report(name: &str, outcome: Outcome) {
    match outcome {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(detail) => {
            println!("FAIL {name}: {detail}");
            panic!("{name}: {detail}");
        }
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Run {
    code: i32,
    stdout: String,
    elapsed: Duration,
}

fn cli(args: &[&str]) -> Run {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_radocolor"))
        .args(args)
        .env_remove("RADOCOLOR_CACHE_DIR")
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8 output"),
        elapsed: start.elapsed(),
    }
}

fn table_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/triple_ratio_proof.json")
}

fn q(s: &str) -> Rational {
    s.parse().unwrap()
}

fn set(items: &[&str]) -> BTreeSet<Rational> {
    items.iter().map(|s| q(s)).collect()
}

/// Runs `prove`, checks the emitted proof with the library and with
/// `check-table`, and returns the parsed document.
fn prove_and_check(args: &[&str], dir: &Path) -> Result<(Value, Duration), String> {
    let out = dir.join("proof.json");
    let mut full = vec!["prove"];
    full.extend_from_slice(args);
    let run = cli(&full);
    ensure(run.code == 0, || {
        format!("prove exited {} (want 0, Unsat)", run.code)
    })?;
    std::fs::write(&out, &run.stdout).unwrap();
    let doc: Value = serde_json::from_str(&run.stdout).map_err(|e| e.to_string())?;
    ensure(doc["result"] == "Unsat", || {
        format!("result {}", doc["result"])
    })?;
    let tree: ProofTree =
        serde_json::from_value(doc["proof"].clone()).map_err(|e| e.to_string())?;
    let rep = check_proof_table(&tree, &tree.equation, tree.colors);
    ensure(rep.is_valid(), || {
        format!("library checker: {:?}", rep.violations)
    })?;
    let check = cli(&["check-table", out.to_str().unwrap()]);
    ensure(check.code == 0, || {
        format!("check-table exited {}", check.code)
    })?;
    Ok((doc, run.elapsed))
}

#[test]
fn forbidden_ratios_are_exact() {
    report(
        "forbidden ratios",
        (|| {
            let cases = [
                (
                    "E(2,4)",
                    set(&["2", "3/2", "4/3", "5/4", "6/5", "7/6", "8/7"]),
                ),
                ("1,1,1,-4", set(&["2", "3/2", "4/3"])),
            ];
            let mut slowest = Duration::ZERO;
            for (eq_text, want) in &cases {
                let eq = parse_equation(eq_text).unwrap();
                let start = Instant::now();
                let got: BTreeSet<Rational> =
                    eq.forbidden_ratios().into_iter().map(|f| f.ratio).collect();
                slowest = slowest.max(start.elapsed());
                ensure(&got == want, || format!("{eq_text}: got {got:?}"))?;
                let brute = oracle::two_value_ratios(eq.coefficients(), 12);
                ensure(&brute == want, || {
                    format!("{eq_text}: oracle found {brute:?}")
                })?;
                let flag = if eq_text.starts_with('E') {
                    "--eq"
                } else {
                    "--coeffs"
                };
                let run = cli(&["ratios", flag, eq_text, "--pretty"]);
                let printed: BTreeSet<Rational> = run.stdout.lines().map(q).collect();
                ensure(run.code == 0 && &printed == want, || {
                    format!("{eq_text}: cli printed {:?}", run.stdout)
                })?;
            }
            ensure(slowest < Duration::from_millis(100), || {
                format!("took {slowest:?}")
            })?;
            Ok(format!("both sets exact, slowest {slowest:?}"))
        })(),
    );
}

#[test]
fn e23_is_two_regular_on_default_universe() {
    report(
        "E(2,3) 2-regular",
        (|| {
            let dir = tempfile::tempdir().unwrap();
            let (doc, elapsed) = prove_and_check(&["--eq", "E(2,3)", "--colors", "2"], dir.path())?;
            ensure(doc["attempts"] == 1, || {
                "needed more than the default universe".into()
            })?;
            ensure(
                doc["universe"] == serde_json::to_value(UniverseConfig::default()).unwrap(),
                || format!("universe {}", doc["universe"]),
            )?;
            let eq = parse_equation("E(2,3)").unwrap();
            let start = Instant::now();
            let u = UniverseConfig::default().build(&eq, &[]).unwrap();
            let res = search(&eq, 2, &u, &Seeds::default(), &SearchOptions::default()).unwrap();
            let lib = start.elapsed();
            ensure(res.outcome.is_unsat(), || "library search is Sat".into())?;
            ensure(
                lib < Duration::from_secs(1) && elapsed < Duration::from_secs(1),
                || format!("library {lib:?}, cli {elapsed:?}"),
            )?;
            Ok(format!(
                "Unsat on {} nodes, proof valid, library {lib:?}, cli {elapsed:?}",
                u.len()
            ))
        })(),
    );
}

#[test]
fn table_transcription_and_regeneration() {
    report(
        "triple-ratio proof table",
        (|| {
            let text = std::fs::read_to_string(table_path()).map_err(|e| e.to_string())?;
            let tree: ProofTree = serde_json::from_str(&text).map_err(|e| e.to_string())?;
            let rep = check_proof_table(&tree, &tree.equation, 4);
            ensure(rep.is_valid(), || {
                format!("transcription: {:?}", rep.violations)
            })?;
            let check = cli(&["check-table", table_path().to_str().unwrap()]);
            ensure(check.code == 0, || {
                format!("check-table on transcription exited {}", check.code)
            })?;
            let six = tree.rows.first().map(|r| &r.claim);
            ensure(
                matches!(six, Some(Claim::ForcedSet { node, options }) if *node == rat(6, 1) && options == &[1, 3]),
                || format!("first row is {six:?}"),
            )?;
            let latex = cli(&["export", table_path().to_str().unwrap()]);
            ensure(
                latex.code == 0 && latex.stdout.contains("\\{1,3\\}"),
                || "latex export lacks the c(6) option set".to_string(),
            )?;

            let dir = tempfile::tempdir().unwrap();
            let (doc, elapsed) = prove_and_check(
                &[
                    "--coeffs",
                    "1,1,1,-4",
                    "--colors",
                    "4",
                    "--seed",
                    "c(1)=c(3)",
                ],
                dir.path(),
            )?;
            let branches = doc["stats"]["branches"].as_u64().unwrap_or(u64::MAX);
            ensure(branches <= 1_000_000, || format!("{branches} branches"))?;
            ensure(elapsed < Duration::from_secs(10), || {
                format!("took {elapsed:?}")
            })?;
            Ok(format!(
            "transcription valid ({} rows); regenerated Unsat in {elapsed:?}, {branches} branches, {} rows, {} universe(s) tried",
            tree.rows.len(),
            doc["stats"]["rows"],
            doc["attempts"]
        ))
        })(),
    );
}

fn restriction(spec: &ColoringSpec, nodes: &[Rational]) -> Vec<u32> {
    canonicalize(&spec.restrict(nodes).unwrap())
}

#[test]
fn e32_three_colorings_include_both_valuation_colorings() {
    report(
        "E(3/2,3) colorings",
        (|| {
            let eq = parse_equation("E(3/2,3)").unwrap();
            let u = UniverseConfig::default().build(&eq, &[]).unwrap();
            let opts = SearchOptions::default();
            let e = enumerate_colorings(&eq, 3, &u, &Seeds::default(), &opts).unwrap();
            let classes: BTreeSet<Vec<u32>> = e.classes.iter().cloned().collect();
            for p in [2, 3] {
                let c = restriction(&ColoringSpec::Cpn { p, n: 3 }, &e.nodes);
                ensure(classes.contains(&c), || format!("c[{p},3] missing"))?;
            }

            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let mut picks: Vec<Vec<u32>> = vec![(0..12).collect()];
            for _ in 0..4 {
                let mut idx: Vec<u32> = (0..u.len() as u32).collect();
                idx.shuffle(&mut rng);
                idx.truncate(12);
                idx.sort_unstable();
                picks.push(idx);
            }
            let mut counts = Vec::new();
            for idx in &picks {
                let sub = u.restrict(idx);
                let got = enumerate_colorings(&eq, 3, &sub, &Seeds::default(), &opts).unwrap();
                let want = oracle::colorings(eq.coefficients(), sub.values(), 3);
                ensure(got.count == want.len(), || {
                    format!("sub-universe count {} vs oracle {}", got.count, want.len())
                })?;
                let got: BTreeSet<Vec<u32>> = got.classes.into_iter().collect();
                ensure(got == want, || {
                    "sub-universe classes differ from oracle".into()
                })?;
                counts.push(want.len());
            }
            Ok(format!(
            "{} classes on {} nodes include c[2,3] and c[3,3]; 12-node sub-universe counts {counts:?} match the oracle",
            e.count,
            u.len()
        ))
        })(),
    );
}

fn boxed(primes: &[u64], bound: i64) -> Vec<Rational> {
    let bounds = vec![(-bound, bound); primes.len()];
    generate_universe(primes, &bounds, true)
        .unwrap()
        .values()
        .to_vec()
}

#[test]
fn valuation_colorings_are_free() {
    report(
        "c[2,n] freeness",
        (|| {
            let mut details = Vec::new();
            for n in 3..=6usize {
                let primes: &[u64] = if n <= 4 { &[2, 3, 5, 7] } else { &[2, 3] };
                let values = boxed(primes, 2);
                let eq = LinearEquation::e(&rat(2, 1), n).unwrap();
                let spec = ColoringSpec::Cpn { p: 2, n: n as u32 };
                let start = Instant::now();
                let rep = find_monochromatic(&spec, &eq, &values, 5).unwrap();
                let took = start.elapsed();
                ensure(rep.is_free(), || {
                    format!("E(2,{n}): {:?}", rep.monochromatic)
                })?;
                ensure(took < Duration::from_secs(60), || {
                    format!("E(2,{n}) took {took:?}")
                })?;
                details.push(format!("n={n}: {} values {took:.1?}", values.len()));
            }
            Ok(details.join(", "))
        })(),
    );
}

fn random_window(rng: &mut ChaCha8Rng) -> BTreeMap<i64, Permutation> {
    let mut window = BTreeMap::new();
    for level in -6..=6 {
        let mut perm = vec![1u32, 2, 3, 4];
        if level != 0 {
            perm.shuffle(rng);
        }
        window.insert(level, Permutation(perm));
    }
    window
}

#[test]
fn residue_window_colorings_are_free() {
    report(
        "c[Pi,5] freeness",
        (|| {
            let eq = parse_equation("1,1,1,-4").unwrap();
            let values = boxed(&[2, 3, 5], 2);
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            for i in 0..50 {
                let spec = ColoringSpec::CPi {
                    p: 5,
                    window: random_window(&mut rng),
                };
                spec.validate().map_err(|e| e.to_string())?;
                let rep = find_monochromatic(&spec, &eq, &values, 1).unwrap();
                ensure(rep.is_free(), || {
                    format!("window {i}: {:?}", rep.monochromatic)
                })?;
            }
            let identity = ColoringSpec::CPi {
                p: 5,
                window: BTreeMap::new(),
            };
            let plain = ColoringSpec::CapCp { p: 5 };
            for _ in 0..10_000 {
                let n: i64 = rng.gen_range(1..=100_000) * if rng.gen_bool(0.5) { 1 } else { -1 };
                let d: i64 = rng.gen_range(1..=100_000);
                let x = rat(n, d);
                ensure(
                    identity.eval(&x).unwrap() == plain.eval(&x).unwrap(),
                    || format!("disagree at {x}"),
                )?;
            }
            Ok(format!(
                "50 windows free over {} values; identity window matches residues on 10^4 points",
                values.len()
            ))
        })(),
    );
}

#[test]
fn three_colors_do_not_suffice_for_triple_ratio_equation() {
    report(
        "1,1,1,-4 3-regular",
        (|| {
            let dir = tempfile::tempdir().unwrap();
            let (doc, elapsed) =
                prove_and_check(&["--coeffs", "1,1,1,-4", "--colors", "3"], dir.path())?;
            ensure(doc["attempts"] == 1, || {
                "needed more than the default universe".into()
            })?;
            ensure(elapsed < Duration::from_secs(10), || {
                format!("took {elapsed:?}")
            })?;
            Ok(format!(
                "Unsat on {} nodes in {elapsed:?}",
                doc["universeSize"]
            ))
        })(),
    );
}

#[test]
fn positive_integer_colorings_include_shifted_variant() {
    report(
        "positive-integer E(2,3) colorings",
        (|| {
            let eq = parse_equation("E(2,3)").unwrap();
            let values: Vec<Rational> = (1..=40).map(|k| rat(k, 1)).collect();
            let config = UniverseConfig {
                values: Some(values),
                negatives: false,
                ..Default::default()
            };
            let u = config.build(&eq, &[]).unwrap();
            let e = enumerate_colorings(&eq, 3, &u, &Seeds::default(), &SearchOptions::default())
                .unwrap();
            let classes: BTreeSet<Vec<u32>> = e.classes.iter().cloned().collect();
            let c23 = ColoringSpec::Cpn { p: 2, n: 3 };
            let plain = c23.restrict(&e.nodes).unwrap();
            let shifted: Vec<u32> = e
                .nodes
                .iter()
                .zip(&plain)
                .map(|(x, &c)| if x.is_one() { 2 } else { c })
                .collect();
            ensure(classes.contains(&canonicalize(&plain)), || {
                "c[2,3] missing".into()
            })?;
            ensure(classes.contains(&canonicalize(&shifted)), || {
                "shifted c[2,3] missing".into()
            })?;

            let small: Vec<Rational> = (1..=12).map(|k| rat(k, 1)).collect();
            let want = oracle::colorings(eq.coefficients(), &small, 3);
            let run = cli(&[
                "enumerate",
                "--eq",
                "E(2,3)",
                "--colors",
                "3",
                "--values",
                "1..12",
            ]);
            let doc: Value = serde_json::from_str(&run.stdout).map_err(|e| e.to_string())?;
            ensure(doc["count"] == want.len(), || {
                format!("cli count {} vs oracle {}", doc["count"], want.len())
            })?;
            Ok(format!(
                "{} classes on 1..40 include both; 1..12 count {} matches the oracle",
                e.count,
                want.len()
            ))
        })(),
    );
}

#[test]
fn irrational_logarithms() {
    report(
        "multiplicative dependence",
        (|| {
            let dep = |a: i64, b: i64| multiplicative_dependence(&rat(a, 1), &rat(b, 1)).unwrap();
            ensure(dep(3, 5).is_none(), || "(3,5) dependent".into())?;
            ensure(dep(6, 11).is_none(), || "(6,11) dependent".into())?;
            // the witness is (m, n) with a^m = b^n: 8^2 = 4^3 and 4^3 = 8^2
            ensure(dep(8, 4) == Some((2, 3)), || {
                format!("(8,4) gave {:?}", dep(8, 4))
            })?;
            ensure(dep(4, 8) == Some((3, 2)), || {
                format!("(4,8) gave {:?}", dep(4, 8))
            })?;
            Ok("(3,5), (6,11) independent; 8^2 = 4^3".into())
        })(),
    );
}

const POOL: &[(i64, i64)] = &[
    (1, 1),
    (2, 1),
    (3, 1),
    (4, 1),
    (5, 1),
    (6, 1),
    (8, 1),
    (9, 1),
    (12, 1),
    (16, 1),
    (1, 2),
    (3, 2),
    (1, 3),
    (2, 3),
    (4, 3),
    (9, 4),
    (3, 4),
    (-1, 1),
    (-2, 1),
    (-3, 1),
    (-4, 1),
    (-1, 2),
    (-3, 2),
    (6, 5),
    (5, 4),
    (8, 3),
];

const EQUATIONS: &[&str] = &[
    "E(2,3)", "E(3/2,3)", "1,1,-1", "1,1,1,-4", "1,1,-2", "1,-2", "E(2,4)", "1,2,-3",
];

#[test]
fn engine_matches_brute_force_on_random_universes() {
    report(
        "oracle equivalence",
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(10);
            let mut total = 0;
            for case in 0..100 {
                let eq = parse_equation(EQUATIONS.choose(&mut rng).unwrap()).unwrap();
                let r = rng.gen_range(1..=3);
                let size = rng.gen_range(1..=11);
                let values: Vec<Rational> = POOL
                    .choose_multiple(&mut rng, size)
                    .map(|&(n, d)| rat(n, d))
                    .collect();
                let u: NodeUniverse = UniverseConfig {
                    values: Some(values),
                    ..Default::default()
                }
                .build(&eq, &[])
                .unwrap();
                let want = oracle::colorings(eq.coefficients(), u.values(), r);
                let opts = SearchOptions::default();
                let e = enumerate_colorings(&eq, r, &u, &Seeds::default(), &opts).unwrap();
                let got: BTreeSet<Vec<u32>> = e.classes.into_iter().collect();
                ensure(got == want, || {
                    format!(
                        "case {case}: enumeration differs ({} vs {})",
                        got.len(),
                        want.len()
                    )
                })?;
                let res = search(&eq, r, &u, &Seeds::default(), &opts).unwrap();
                match res.outcome {
                    SearchOutcome::Sat { assignment } => {
                        ensure(want.contains(&assignment.canonical()), || {
                            format!("case {case}: bad Sat")
                        })?
                    }
                    SearchOutcome::Unsat { proof } => {
                        ensure(want.is_empty(), || {
                            format!("case {case}: Unsat but oracle has colorings")
                        })?;
                        let rep = check_proof_table(&proof, &eq, r);
                        ensure(rep.is_valid(), || {
                            format!("case {case}: {:?}", rep.violations)
                        })?;
                    }
                }
                total += want.len();
            }
            Ok(format!("100 universes agree ({total} classes in all)"))
        })(),
    );
}
