use std::fmt::Write as _;
use std::path::Path;

use radocolor_core::colorings::{parse_coloring, ColoringReport, ColoringSpec, SubsetReport};
use radocolor_core::engine::{
    check_proof_table, enumerate_colorings, export_proof, search_escalating, Coloring,
    ExportFormat, ProofTree, SearchOptions, SearchOutcome, SearchStats, Seeds, UniverseConfig,
    ENGINE_VERSION,
};
use radocolor_core::{
    find_monochromatic, parse_equation, strongly_free_check, LinearEquation, Rational,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::{Cli, ColoringArgs, Command, EquationArgs, Format, SearchArgs, UniverseArgs};
use crate::cache::Cache;
use crate::{render, status, Failure};

pub struct Output {
    pub text: String,
    pub status: u8,
}

impl Output {
    fn new(text: String, status: u8) -> Self {
        Output { text, status }
    }

    fn json<T: Serialize>(doc: &T, status: u8) -> Self {
        Output::new(to_json(doc), status)
    }
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("documents serialize");
    s.push('\n');
    s
}

pub fn dispatch(cli: &Cli) -> Result<Output, Failure> {
    match &cli.command {
        Command::Catalog { family } => catalog(cli, family.as_deref()),
        Command::Eval { coloring, values } => eval(cli, coloring, values),
        Command::Verify {
            coloring,
            equation,
            universe,
            strong,
            limit,
        } => verify(cli, coloring, equation, universe, *strong, *limit),
        Command::Ratios { equation } => ratios(cli, equation),
        Command::Prove {
            equation,
            search,
            trim,
            output,
        } => prove(cli, equation, search, *trim, output.as_deref()),
        Command::Enumerate { equation, search } => enumerate(cli, equation, search),
        Command::CheckTable {
            file,
            equation,
            colors,
        } => check_table(cli, file, equation.as_deref(), *colors),
        Command::Export { file } => export(cli, file),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn equation(args: &EquationArgs) -> Result<LinearEquation, Failure> {
    Ok(parse_equation(args.text())?)
}

fn coloring(args: &ColoringArgs) -> Result<ColoringSpec, Failure> {
    if let Some(text) = &args.coloring {
        return Ok(parse_coloring(text)?);
    }
    let path = args
        .coloring_file
        .as_deref()
        .expect("clap requires one coloring source");
    let spec: ColoringSpec = read_json(path)?;
    spec.validate()
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    Ok(spec)
}

/// Parses `a..b` (inclusive integers) or a comma-separated list.
fn parse_values(text: &str) -> Result<Vec<Rational>, Failure> {
    if let Some((a, b)) = text.split_once("..") {
        let parse = |s: &str| {
            s.trim()
                .parse::<i64>()
                .map_err(|_| Failure::Usage(format!("bad range {text:?}")))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        return Ok((a..=b)
            .filter(|&k| k != 0)
            .map(Rational::from_integer)
            .collect());
    }
    Ok(text
        .split(',')
        .map(|s| s.trim().parse())
        .collect::<radocolor_core::Result<Vec<Rational>>>()?)
}

/// The universes to try, in order. Without an explicit universe a search
/// falls back to the extended preset when the default one is colorable.
fn universe_ladder(args: &UniverseArgs) -> Result<Vec<UniverseConfig>, Failure> {
    if let Some(path) = &args.universe {
        return Ok(vec![read_json(path)?]);
    }
    if let Some(values) = &args.values {
        return Ok(vec![UniverseConfig {
            values: Some(parse_values(values)?),
            ..Default::default()
        }]);
    }
    let default = UniverseConfig {
        negatives: !args.no_negatives,
        ..Default::default()
    };
    Ok(vec![default, UniverseConfig::extended()])
}

fn seeds(texts: &[String]) -> Result<Seeds, Failure> {
    let mut seeds = Seeds::default();
    for t in texts {
        seeds.add(t)?;
    }
    Ok(seeds)
}

fn options(args: &SearchArgs, trim: bool) -> SearchOptions {
    SearchOptions {
        max_branches: args.max_branches,
        max_nodes: args.max_nodes,
        proof: true,
        trim,
        threads: args.parallel.max(1),
    }
}

struct Family {
    name: &'static str,
    syntax: &'static str,
    example: &'static str,
    colors: &'static str,
    rule: &'static str,
}

const FAMILIES: &[Family] = &[
    Family {
        name: "cpn",
        syntax: "cpn:P:N",
        example: "cpn:2:3",
        colors: "N",
        rule: "v_p(q) mod n",
    },
    Family {
        name: "cpvn",
        syntax: "cpvn:P:V:N",
        example: "cpvn:2:2:3",
        colors: "N",
        rule: "floor(v_p(q) / v) mod n",
    },
    Family {
        name: "capcp",
        syntax: "capcp:P",
        example: "capcp:5",
        colors: "P-1",
        rule: "w_p(q), labels 1..p-1",
    },
    Family {
        name: "cpi",
        syntax: "cpi:P[:LEVEL=a,b,..;LEVEL=..]",
        example: "cpi:5:1=2,1,4,3;-1=4,3,2,1",
        colors: "P-1",
        rule: "pi_{v_p(q)}(w_p(q)); unlisted levels use the identity",
    },
    Family {
        name: "c4pi",
        syntax: "c4pi:a,b,c",
        example: "c4pi:1,2,0",
        colors: "3",
        rule: "even v_2: (v_2 mod 6)/2; odd v_2: pi of the color of 2q",
    },
    Family {
        name: "oddprime",
        syntax: "oddprime:P:N[:CLASS=a,b,..;CLASS=..]",
        example: "oddprime:5:3:2=1,2,0",
        colors: "N",
        rule: "sigma_k(v_p(q) mod n) with k = min(w_p(q), p - w_p(q)); class 1 is the identity",
    },
];

fn catalog(cli: &Cli, family: Option<&str>) -> Result<Output, Failure> {
    let entries: Vec<&Family> = match family {
        Some(name) => {
            let f = FAMILIES
                .iter()
                .find(|f| f.name.eq_ignore_ascii_case(name))
                .ok_or_else(|| Failure::Usage(format!("unknown family {name:?}")))?;
            vec![f]
        }
        None => FAMILIES.iter().collect(),
    };
    if cli.pretty {
        let mut out = String::new();
        for f in &entries {
            let _ = writeln!(
                out,
                "{:<9} {:<38} colors {:<4} {}",
                f.name, f.syntax, f.colors, f.rule
            );
        }
        return Ok(Output::new(out, status::OK));
    }
    let doc: Vec<serde_json::Value> = entries
        .iter()
        .map(|f| {
            let spec = parse_coloring(f.example).expect("catalog examples parse");
            serde_json::json!({
                "name": f.name,
                "syntax": f.syntax,
                "colors": f.colors,
                "rule": f.rule,
                "example": f.example,
                "exampleSpec": spec,
            })
        })
        .collect();
    Ok(Output::json(&doc, status::OK))
}

#[derive(Serialize)]
struct Colored {
    value: Rational,
    color: u32,
}

fn eval(cli: &Cli, coloring_args: &ColoringArgs, values: &[String]) -> Result<Output, Failure> {
    let spec = coloring(coloring_args)?;
    let doc = values
        .iter()
        .map(|v| {
            let value: Rational = v.parse()?;
            let color = spec.eval(&value)?;
            Ok(Colored { value, color })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    if cli.pretty {
        let text = doc
            .iter()
            .map(|c| format!("{}\t{}\n", c.value, c.color))
            .collect();
        return Ok(Output::new(text, status::OK));
    }
    Ok(Output::json(&doc, status::OK))
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct VerifyDoc {
    coloring: ColoringSpec,
    equation: LinearEquation,
    set_size: usize,
    free: bool,
    reports: Vec<SubsetReport>,
}

fn verify(
    cli: &Cli,
    coloring_args: &ColoringArgs,
    eq_args: &EquationArgs,
    universe: &UniverseArgs,
    strong: bool,
    limit: usize,
) -> Result<Output, Failure> {
    let spec = coloring(coloring_args)?;
    let eq = equation(eq_args)?;
    let config = match universe_ladder(universe)? {
        ladder if universe.universe.is_some() || universe.values.is_some() => ladder[0].clone(),
        ladder => UniverseConfig {
            full_box: true,
            ..ladder[0].clone()
        },
    };
    let set = config.build(&eq, &[])?.values().to_vec();
    log::info!("verifying {spec} against {} values", set.len());
    let reports = if strong {
        strongly_free_check(&spec, eq.coefficients(), &set, limit)?
    } else {
        let report: ColoringReport = find_monochromatic(&spec, &eq, &set, limit)?;
        vec![SubsetReport {
            coefficients: eq.coefficients().to_vec(),
            report,
        }]
    };
    let free = reports.iter().all(|r| r.report.is_free());
    let code = if free { status::OK } else { status::NEGATIVE };
    if cli.pretty {
        let mut out = String::new();
        for r in &reports {
            let coefs: Vec<String> = r.coefficients.iter().map(Rational::to_string).collect();
            let verdict = if r.report.is_free() {
                "free"
            } else {
                "monochromatic"
            };
            let _ = writeln!(
                out,
                "[{}] {verdict} ({} candidates)",
                coefs.join(","),
                r.report.checked_count
            );
            for m in &r.report.monochromatic {
                let vals: Vec<String> = m.tuple.values.iter().map(Rational::to_string).collect();
                let _ = writeln!(out, "  color {}: ({})", m.color, vals.join(","));
            }
        }
        return Ok(Output::new(out, code));
    }
    let doc = VerifyDoc {
        coloring: spec,
        equation: eq,
        set_size: set.len(),
        free,
        reports,
    };
    Ok(Output::json(&doc, code))
}

fn ratios(cli: &Cli, eq_args: &EquationArgs) -> Result<Output, Failure> {
    let eq = equation(eq_args)?;
    let found = eq.forbidden_ratios();
    if cli.pretty {
        let text = found.iter().map(|f| format!("{}\n", f.ratio)).collect();
        return Ok(Output::new(text, status::OK));
    }
    let one = Rational::one();
    let doc: Vec<serde_json::Value> = found
        .iter()
        .map(|f| serde_json::json!({ "ratio": f.ratio, "witness": f.witness(eq.arity(), &one).values }))
        .collect();
    Ok(Output::json(&doc, status::OK))
}

/// Everything that determines a search result; its hash is the cache key.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunConfig<'a> {
    command: &'a str,
    equation: &'a LinearEquation,
    colors: u32,
    universes: &'a [UniverseConfig],
    seeds: &'a Seeds,
    max_branches: u64,
    max_nodes: usize,
    trim: bool,
    parallel: usize,
    engine_version: &'a str,
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct ProveDoc {
    result: String,
    equation: LinearEquation,
    colors: u32,
    seeds: Seeds,
    universe: UniverseConfig,
    universe_size: usize,
    /// How many universes were searched before this one answered.
    attempts: usize,
    stats: SearchStats,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    assignment: Option<Coloring>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    proof: Option<ProofTree>,
}

impl ProveDoc {
    fn is_unsat(&self) -> bool {
        self.proof.is_some()
    }
}

fn cached<T, F>(key: &str, compute: F) -> Result<(String, T), Failure>
where
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> Result<T, Failure>,
{
    let cache = Cache::from_env();
    if let Some(hit) = cache.as_ref().and_then(|c| c.lookup::<T>(key)) {
        return Ok(hit);
    }
    let doc = compute()?;
    let text = to_json(&doc);
    if let Some(c) = &cache {
        c.store(key, &text);
    }
    Ok((text, doc))
}

fn prove(
    cli: &Cli,
    eq_args: &EquationArgs,
    args: &SearchArgs,
    trim: bool,
    output: Option<&Path>,
) -> Result<Output, Failure> {
    let eq = equation(eq_args)?;
    let seeds = seeds(&args.seeds)?;
    let ladder = universe_ladder(&args.universe)?;
    let opts = options(args, trim);
    let key = Cache::key(&RunConfig {
        command: "prove",
        equation: &eq,
        colors: args.colors,
        universes: &ladder,
        seeds: &seeds,
        max_branches: opts.max_branches,
        max_nodes: opts.max_nodes,
        trim,
        parallel: opts.threads,
        engine_version: ENGINE_VERSION,
    });
    let (json, doc) = cached(&key, || {
        let esc = search_escalating(&eq, args.colors, &ladder, &seeds, &opts)?;
        log::info!("{} after {} universe(s)", esc.result.stats, esc.attempts);
        let (assignment, proof) = match esc.result.outcome {
            SearchOutcome::Sat { assignment } => (Some(assignment), None),
            SearchOutcome::Unsat { proof } => (None, Some(proof)),
        };
        Ok(ProveDoc {
            result: (if proof.is_some() { "Unsat" } else { "Sat" }).to_string(),
            equation: eq.clone(),
            colors: args.colors,
            seeds: seeds.clone(),
            universe: esc.config,
            universe_size: esc.universe.len(),
            attempts: esc.attempts,
            stats: esc.result.stats,
            assignment,
            proof,
        })
    })?;
    let code = if doc.is_unsat() {
        status::OK
    } else {
        status::NEGATIVE
    };
    let text = if cli.pretty {
        pretty_prove(&doc)
    } else {
        match (&doc.proof, cli.format) {
            (Some(proof), Some(Format::Latex)) => export_proof(proof, ExportFormat::Latex)
                .map_err(|e| Failure::Internal(format!("engine produced an invalid proof: {e}")))?,
            _ => json,
        }
    };
    match output {
        None => Ok(Output::new(text, code)),
        Some(path) => {
            std::fs::write(path, &text)
                .map_err(|e| Failure::Internal(format!("{}: {e}", path.display())))?;
            let summary = serde_json::json!({
                "result": doc.result,
                "stats": doc.stats,
                "output": path.display().to_string(),
            });
            Ok(Output::json(&summary, code))
        }
    }
}

fn pretty_prove(doc: &ProveDoc) -> String {
    let coefs: Vec<String> = doc
        .equation
        .coefficients()
        .iter()
        .map(Rational::to_string)
        .collect();
    let mut out = format!(
        "{}: [{}] with {} colors over {} nodes ({})\n",
        doc.result,
        coefs.join(","),
        doc.colors,
        doc.universe_size,
        doc.stats
    );
    if let Some(proof) = &doc.proof {
        out.push_str(&render::proof_table(proof));
    }
    if let Some(assignment) = &doc.assignment {
        for (q, c) in assignment.nodes.iter().zip(&assignment.colors) {
            let _ = writeln!(out, "c({q}) = {c}");
        }
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct EnumerateDoc {
    equation: LinearEquation,
    colors: u32,
    seeds: Seeds,
    universe: UniverseConfig,
    nodes: Vec<Rational>,
    count: usize,
    /// One string per class, giving the color of each node in order.
    classes: Vec<String>,
    stats: SearchStats,
}

fn enumerate(cli: &Cli, eq_args: &EquationArgs, args: &SearchArgs) -> Result<Output, Failure> {
    let eq = equation(eq_args)?;
    let seeds = seeds(&args.seeds)?;
    let config = universe_ladder(&args.universe)?.swap_remove(0);
    let opts = options(args, false);
    let key = Cache::key(&RunConfig {
        command: "enumerate",
        equation: &eq,
        colors: args.colors,
        universes: std::slice::from_ref(&config),
        seeds: &seeds,
        max_branches: opts.max_branches,
        max_nodes: opts.max_nodes,
        trim: false,
        parallel: opts.threads,
        engine_version: ENGINE_VERSION,
    });
    let (json, doc) = cached(&key, || {
        let universe = config.build(&eq, &seeds.nodes())?;
        let e = enumerate_colorings(&eq, args.colors, &universe, &seeds, &opts)?;
        Ok(EnumerateDoc {
            equation: eq.clone(),
            colors: args.colors,
            seeds: seeds.clone(),
            universe: config.clone(),
            nodes: e.nodes,
            count: e.count,
            classes: e.classes.iter().map(|c| render::class(c)).collect(),
            stats: e.stats,
        })
    })?;
    if cli.pretty {
        let mut out = format!(
            "{} classes over {} nodes ({})\n",
            doc.count,
            doc.nodes.len(),
            doc.stats
        );
        let nodes: Vec<String> = doc.nodes.iter().map(Rational::to_string).collect();
        let _ = writeln!(out, "nodes: {}", nodes.join(" "));
        for c in &doc.classes {
            let _ = writeln!(out, "{c}");
        }
        return Ok(Output::new(out, status::OK));
    }
    Ok(Output::new(json, status::OK))
}

/// Reads a proof tree, unwrapping a `prove` result document if needed.
fn read_proof(path: &Path) -> Result<ProofTree, Failure> {
    let mut value: serde_json::Value = read_json(path)?;
    if let Some(proof) = value.get_mut("proof") {
        value = proof.take();
    } else if value.get("result").is_some() {
        return Err(Failure::Data(format!(
            "{}: result document holds no proof",
            path.display()
        )));
    }
    serde_json::from_value(value).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn check_table(
    cli: &Cli,
    path: &Path,
    eq_text: Option<&str>,
    colors: Option<u32>,
) -> Result<Output, Failure> {
    let tree = read_proof(path)?;
    let eq = match eq_text {
        Some(t) => parse_equation(t)?,
        None => tree.equation.clone(),
    };
    let report = check_proof_table(&tree, &eq, colors.unwrap_or(tree.colors));
    let code = if report.is_valid() {
        status::OK
    } else {
        status::NEGATIVE
    };
    if cli.pretty {
        return Ok(Output::new(render::report(&report), code));
    }
    Ok(Output::json(&report, code))
}

fn export(cli: &Cli, path: &Path) -> Result<Output, Failure> {
    let tree = read_proof(path)?;
    let format = match cli.format {
        Some(Format::Json) => ExportFormat::Json,
        _ => ExportFormat::Latex,
    };
    let mut text = export_proof(&tree, format)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if cli.pretty {
        text = render::proof_table(&tree);
    }
    if !text.ends_with('\n') {
        text.push('\n');
    }
    Ok(Output::new(text, status::OK))
}
