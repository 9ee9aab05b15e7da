//! Proof trees in the row layout of a hand-checkable case analysis, their
//! independent checker, cone-of-influence trimming and export.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::equations::LinearEquation;
use crate::error::{Error, Result};
use crate::ratcore::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub node: Rational,
    pub color: u32,
}

/// Hypotheses the whole tree works under.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    /// Classes of nodes assumed to share a color.
    #[serde(default)]
    pub equal: Vec<Vec<Rational>>,
    /// Nodes with a fixed color.
    #[serde(default)]
    pub colored: Vec<Assignment>,
}

impl Seeds {
    pub fn is_empty(&self) -> bool {
        self.equal.is_empty() && self.colored.is_empty()
    }

    /// All nodes the seeds mention.
    pub fn nodes(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = self.equal.iter().flatten().cloned().collect();
        out.extend(self.colored.iter().map(|a| a.node.clone()));
        out
    }

    /// Parses `c(1)=c(3)`, `c(2)=1` or `c(1)=c(3)=0`; several seeds may be
    /// separated by `;` or `,` outside parentheses.
    pub fn parse(text: &str) -> Result<Seeds> {
        let mut seeds = Seeds::default();
        seeds.add(text)?;
        Ok(seeds)
    }

    pub fn add(&mut self, text: &str) -> Result<()> {
        for item in split_top_level(text) {
            let mut nodes = Vec::new();
            let mut color = None;
            for part in item.split('=') {
                let part = part.trim();
                if let Some(inner) = part.strip_prefix("c(").and_then(|p| p.strip_suffix(')')) {
                    nodes.push(inner.trim().parse::<Rational>()?);
                } else if color.is_none() {
                    color = Some(
                        part.parse::<u32>()
                            .map_err(|_| Error::Parse(format!("bad seed {item:?}")))?,
                    );
                } else {
                    return Err(Error::Parse(format!("bad seed {item:?}")));
                }
            }
            if nodes.is_empty() || (nodes.len() == 1 && color.is_none()) {
                return Err(Error::Parse(format!("bad seed {item:?}")));
            }
            if nodes.iter().any(Rational::is_zero) {
                return Err(Error::Parse("zero cannot be colored".into()));
            }
            if nodes.len() > 1 {
                self.equal.push(nodes.clone());
            }
            if let Some(color) = color {
                self.colored.push(Assignment {
                    node: nodes[0].clone(),
                    color,
                });
            }
        }
        Ok(())
    }
}

fn split_top_level(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut depth = 0;
    for ch in text.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ';' | ',' if depth == 0 => {
                out.push(std::mem::take(&mut cur));
                continue;
            }
            _ => {}
        }
        cur.push(ch);
    }
    out.push(cur);
    out.into_iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Claim {
    ForcedSet { node: Rational, options: Vec<u32> },
    ForcedColor { node: Rational, color: u32 },
    Contradiction { node: Rational },
}

impl Claim {
    pub fn node(&self) -> &Rational {
        match self {
            Claim::ForcedSet { node, .. }
            | Claim::ForcedColor { node, .. }
            | Claim::Contradiction { node } => node,
        }
    }

    /// Colors the claim keeps open.
    pub fn allowed(&self) -> Vec<u32> {
        match self {
            Claim::ForcedSet { options, .. } => options.clone(),
            Claim::ForcedColor { color, .. } => vec![*color],
            Claim::Contradiction { .. } => vec![],
        }
    }
}

/// Why a node cannot take one color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum Justification {
    /// `from * ratio` is the claimed node and `from` already has the color.
    Ratio { from: Rational, ratio: Rational },
    /// A solution containing the claimed node whose other values all have the color.
    Tuple { values: Vec<Rational> },
    /// The node is already known to have a different color.
    Seed,
    /// Neither this color nor `color` has been used yet, so the case is the
    /// same as the branch on `color` up to renaming.
    Symmetry { color: u32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProofRow {
    pub depth: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assumption: Option<Assignment>,
    pub claim: Claim,
    #[serde(default)]
    pub per_color_reasons: BTreeMap<u32, Justification>,
}

/// Rows in depth-first pre-order. The single depth-0 row works under the
/// seeds alone; every other row's parent is the closest earlier row one
/// level up, and its assumption is one of the colors the parent leaves open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofTree {
    pub equation: LinearEquation,
    pub colors: u32,
    #[serde(default)]
    pub seeds: Seeds,
    pub rows: Vec<ProofRow>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ViolationKind {
    Structure,
    Arithmetic,
    Premise,
    Exhaustiveness,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// Zero-based row index, if the violation belongs to a row.
    pub row: Option<usize>,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationReport {
    pub rows_checked: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Seed classes and the running color context along one root-to-row path.
struct Context {
    class_of: HashMap<Rational, usize>,
    known: HashMap<usize, u32>,
    /// Classes given two different seed colors.
    conflicted: HashSet<usize>,
    next_class: usize,
}

impl Context {
    fn new(seeds: &Seeds) -> Self {
        let mut ctx = Context {
            class_of: HashMap::new(),
            known: HashMap::new(),
            conflicted: HashSet::new(),
            next_class: 0,
        };
        // union the equality classes
        let mut parent: Vec<usize> = Vec::new();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        let mut id: HashMap<Rational, usize> = HashMap::new();
        for class in &seeds.equal {
            let ids: Vec<usize> = class
                .iter()
                .map(|q| {
                    *id.entry(q.clone()).or_insert_with(|| {
                        parent.push(parent.len());
                        parent.len() - 1
                    })
                })
                .collect();
            for w in ids.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                parent[b] = a;
            }
        }
        for (q, i) in id {
            let root = find(&mut parent, i);
            ctx.class_of.insert(q, root);
        }
        ctx.next_class = parent.len();
        ctx
    }

    fn class(&mut self, q: &Rational) -> usize {
        if let Some(&c) = self.class_of.get(q) {
            return c;
        }
        let c = self.next_class;
        self.next_class += 1;
        self.class_of.insert(q.clone(), c);
        c
    }

    fn color(&mut self, q: &Rational) -> Option<u32> {
        let c = self.class(q);
        self.known.get(&c).copied()
    }

    fn used(&self, color: u32) -> bool {
        self.known.values().any(|&k| k == color)
    }
}

/// Checks every row of `tree` against `eq` and `colors` and returns all
/// violations found; never panics on malformed input.
pub fn check_proof_table(tree: &ProofTree, eq: &LinearEquation, colors: u32) -> ValidationReport {
    let mut violations = Vec::new();
    let mut v = |row: Option<usize>, kind: ViolationKind, message: String| {
        violations.push(Violation { row, kind, message })
    };
    if tree.colors != colors {
        v(
            None,
            ViolationKind::Structure,
            format!("tree is for {} colors, checking {colors}", tree.colors),
        );
    }
    if &tree.equation != eq {
        v(
            None,
            ViolationKind::Structure,
            format!("tree is for {}, checking {eq}", tree.equation),
        );
    }
    let ratios: HashSet<Rational> = eq
        .forbidden_ratios()
        .into_iter()
        .flat_map(|f| {
            let inv = f.ratio.recip().expect("nonzero");
            [f.ratio, inv]
        })
        .collect();
    let rows = &tree.rows;
    if rows.is_empty() {
        return ValidationReport {
            rows_checked: 0,
            violations,
        };
    }

    // parents and children from the depth sequence
    let mut parent: Vec<Option<usize>> = vec![None; rows.len()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); rows.len()];
    let mut path: Vec<usize> = Vec::new();
    let mut shape_ok = true;
    for (i, row) in rows.iter().enumerate() {
        let d = row.depth as usize;
        if i == 0 && d != 0 {
            v(
                Some(i),
                ViolationKind::Structure,
                "first row must have depth 0".into(),
            );
            shape_ok = false;
            break;
        }
        if i > 0 && (d == 0 || d > path.len()) {
            v(
                Some(i),
                ViolationKind::Structure,
                format!("depth {d} does not follow the previous row"),
            );
            shape_ok = false;
            break;
        }
        path.truncate(d);
        if let Some(&p) = path.last() {
            parent[i] = Some(p);
            children[p].push(i);
        }
        path.push(i);
    }
    if !shape_ok {
        return ValidationReport {
            rows_checked: 0,
            violations,
        };
    }

    let mut ctx = Context::new(&tree.seeds);
    for a in &tree.seeds.colored {
        if a.color >= colors {
            v(
                None,
                ViolationKind::Structure,
                format!("seed color {} out of range", a.color),
            );
        }
        let c = ctx.class(&a.node);
        if let Some(&k) = ctx.known.get(&c) {
            if k != a.color {
                ctx.conflicted.insert(c);
                continue;
            }
        }
        ctx.known.insert(c, a.color);
    }

    // context stack: (row, class assumed at that row, previous value)
    type Undo = Option<(usize, Option<u32>)>;
    let mut stack: Vec<(usize, Undo)> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        while let Some(&(top, _)) = stack.last() {
            if rows[top].depth >= row.depth {
                let (_, undo) = stack.pop().expect("nonempty");
                if let Some((c, prev)) = undo {
                    match prev {
                        Some(k) => ctx.known.insert(c, k),
                        None => ctx.known.remove(&c),
                    };
                }
            } else {
                break;
            }
        }

        // assumption
        let mut undo = None;
        match (&row.assumption, parent[i]) {
            (Some(_), None) => v(
                Some(i),
                ViolationKind::Structure,
                "root row cannot carry an assumption".into(),
            ),
            (None, Some(_)) => v(
                Some(i),
                ViolationKind::Structure,
                "row is missing its assumption".into(),
            ),
            (Some(a), Some(p)) => {
                let pc = &rows[p].claim;
                let same_node = ctx.class(&a.node) == ctx.class(pc.node());
                if !same_node || !pc.allowed().contains(&a.color) {
                    v(
                        Some(i),
                        ViolationKind::Structure,
                        format!(
                            "assumption c({})={} is not an option of the parent claim",
                            a.node, a.color
                        ),
                    );
                }
                let c = ctx.class(&a.node);
                let prev = ctx.known.get(&c).copied();
                if prev.is_some_and(|k| k != a.color) {
                    v(
                        Some(i),
                        ViolationKind::Premise,
                        format!("assumption contradicts known color of {}", a.node),
                    );
                }
                ctx.known.insert(c, a.color);
                undo = Some((c, prev));
            }
            (None, None) => {}
        }
        stack.push((i, undo));

        // claim
        let claim = &row.claim;
        let allowed = claim.allowed();
        let mut sorted = allowed.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != allowed.len() || allowed.iter().any(|&k| k >= colors) {
            v(
                Some(i),
                ViolationKind::Structure,
                "claim options must be distinct colors in range".into(),
            );
        }
        if let Claim::ForcedSet { options, .. } = claim {
            if options.is_empty() {
                v(
                    Some(i),
                    ViolationKind::Structure,
                    "empty option set; use a contradiction claim".into(),
                );
            }
        }
        for k in 0..colors {
            let reason = row.per_color_reasons.get(&k);
            if allowed.contains(&k) {
                if reason.is_some() {
                    v(
                        Some(i),
                        ViolationKind::Structure,
                        format!("reason given for open color {k}"),
                    );
                }
                continue;
            }
            match reason {
                None => v(
                    Some(i),
                    ViolationKind::Exhaustiveness,
                    format!("no reason excludes color {k}"),
                ),
                Some(j) => {
                    if let Err((kind, msg)) =
                        check_justification(j, claim, k, &allowed, eq, &ratios, &mut ctx)
                    {
                        v(Some(i), kind, format!("color {k}: {msg}"));
                    }
                }
            }
        }
        if row.per_color_reasons.keys().any(|&k| k >= colors) {
            v(
                Some(i),
                ViolationKind::Structure,
                "reason for a color out of range".into(),
            );
        }

        // case split
        let kids = &children[i];
        let mut got: Vec<u32> = kids
            .iter()
            .filter_map(|&c| rows[c].assumption.as_ref().map(|a| a.color))
            .collect();
        got.sort_unstable();
        match claim {
            Claim::Contradiction { .. } => {
                if !kids.is_empty() {
                    v(
                        Some(i),
                        ViolationKind::Structure,
                        "contradiction row has children".into(),
                    );
                }
            }
            _ => {
                if kids.is_empty() {
                    v(
                        Some(i),
                        ViolationKind::Exhaustiveness,
                        "branch ends without a contradiction".into(),
                    );
                } else if got != sorted {
                    v(
                        Some(i),
                        ViolationKind::Exhaustiveness,
                        format!("children cover colors {got:?}, claim leaves {sorted:?}"),
                    );
                }
            }
        }
    }
    ValidationReport {
        rows_checked: rows.len(),
        violations,
    }
}

fn check_justification(
    j: &Justification,
    claim: &Claim,
    k: u32,
    allowed: &[u32],
    eq: &LinearEquation,
    ratios: &HashSet<Rational>,
    ctx: &mut Context,
) -> std::result::Result<(), (ViolationKind, String)> {
    let target = claim.node();
    let target_class = ctx.class(target);
    match j {
        Justification::Ratio { from, ratio } => {
            if !ratios.contains(ratio) {
                return Err((
                    ViolationKind::Arithmetic,
                    format!("{ratio} is not a forbidden ratio"),
                ));
            }
            let product = from * ratio;
            if ctx.class(&product) != target_class {
                return Err((
                    ViolationKind::Arithmetic,
                    format!("{from}·{ratio} = {product}, not {target}"),
                ));
            }
            if ctx.class(from) != target_class && ctx.color(from) != Some(k) {
                return Err((
                    ViolationKind::Premise,
                    format!("{from} is not known to have color {k}"),
                ));
            }
            Ok(())
        }
        Justification::Tuple { values } => {
            if values.len() != eq.arity()
                || values.iter().any(Rational::is_zero)
                || !eq.is_solution(values)
            {
                return Err((
                    ViolationKind::Arithmetic,
                    format!("{} is not a solution", show(values)),
                ));
            }
            if !values.iter().any(|x| ctx.class(x) == target_class) {
                return Err((
                    ViolationKind::Arithmetic,
                    format!("{} does not contain {target}", show(values)),
                ));
            }
            for x in values {
                if ctx.class(x) != target_class && ctx.color(x) != Some(k) {
                    return Err((
                        ViolationKind::Premise,
                        format!("{x} is not known to have color {k}"),
                    ));
                }
            }
            Ok(())
        }
        Justification::Seed => match ctx.color(target) {
            _ if ctx.conflicted.contains(&target_class) => Ok(()),
            Some(c) if c != k => Ok(()),
            _ => Err((
                ViolationKind::Premise,
                format!("{target} is not known to avoid color {k}"),
            )),
        },
        Justification::Symmetry { color } => {
            if *color == k || !allowed.contains(color) {
                return Err((
                    ViolationKind::Premise,
                    format!("symmetric color {color} is not open"),
                ));
            }
            if ctx.used(k) || ctx.used(*color) {
                return Err((
                    ViolationKind::Premise,
                    format!("colors {k} and {color} are not both unused"),
                ));
            }
            Ok(())
        }
    }
}

fn show(values: &[Rational]) -> String {
    format!(
        "({})",
        values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )
}

/// Nodes a row's reasons rely on, other than its claim node.
fn premises(row: &ProofRow) -> Vec<Rational> {
    let mut out = Vec::new();
    for j in row.per_color_reasons.values() {
        match j {
            Justification::Ratio { from, .. } => out.push(from.clone()),
            Justification::Tuple { values } => out.extend(values.iter().cloned()),
            Justification::Seed => out.push(row.claim.node().clone()),
            Justification::Symmetry { .. } => {}
        }
    }
    out
}

/// Splices out forced-color rows whose conclusion no later row in their
/// subtree relies on. The result still passes [`check_proof_table`].
pub fn trim(tree: &ProofTree) -> ProofTree {
    struct T {
        row: ProofRow,
        kids: Vec<T>,
    }
    fn build(rows: &[ProofRow], i: &mut usize) -> T {
        let row = rows[*i].clone();
        *i += 1;
        let mut kids = Vec::new();
        while *i < rows.len() && rows[*i].depth == row.depth + 1 {
            kids.push(build(rows, i));
        }
        T { row, kids }
    }
    // returns the nodes the subtree cites
    fn prune(t: &mut T, equal: &HashMap<Rational, usize>) -> HashSet<Rational> {
        let mut cited: HashSet<Rational> = HashSet::new();
        for k in &mut t.kids {
            cited.extend(prune(k, equal));
        }
        loop {
            let splice = matches!(t.row.claim, Claim::ForcedColor { .. })
                && t.kids.len() == 1
                && !mentions(&cited, t.row.claim.node(), equal);
            if !splice {
                break;
            }
            let mut child = t.kids.pop().expect("one child");
            child.row.assumption = t.row.assumption.take();
            t.row = child.row;
            t.kids = child.kids;
        }
        cited.extend(premises(&t.row));
        cited
    }
    fn mentions(cited: &HashSet<Rational>, q: &Rational, equal: &HashMap<Rational, usize>) -> bool {
        if cited.contains(q) {
            return true;
        }
        match equal.get(q) {
            Some(c) => cited.iter().any(|x| equal.get(x) == Some(c)),
            None => false,
        }
    }
    fn flatten(t: T, depth: u32, out: &mut Vec<ProofRow>) {
        let mut row = t.row;
        row.depth = depth;
        out.push(row);
        for k in t.kids {
            flatten(k, depth + 1, out);
        }
    }
    if tree.rows.is_empty() {
        return tree.clone();
    }
    let equal: HashMap<Rational, usize> = tree
        .seeds
        .equal
        .iter()
        .enumerate()
        .flat_map(|(i, class)| class.iter().map(move |q| (q.clone(), i)))
        .collect();
    let mut i = 0;
    let mut root = build(&tree.rows, &mut i);
    prune(&mut root, &equal);
    let mut rows = Vec::with_capacity(tree.rows.len());
    flatten(root, 0, &mut rows);
    ProofTree {
        rows,
        ..tree.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Latex,
}

/// Renders a checked proof. Trees that fail [`check_proof_table`] are refused.
pub fn export_proof(tree: &ProofTree, format: ExportFormat) -> Result<String> {
    let report = check_proof_table(tree, &tree.equation, tree.colors);
    if !report.is_valid() {
        return Err(Error::RefusedExport(report.violations.len()));
    }
    Ok(match format {
        ExportFormat::Json => serde_json::to_string_pretty(tree).expect("proof trees serialize"),
        ExportFormat::Latex => latex(tree),
    })
}

pub fn parse_proof(json: &str) -> Result<ProofTree> {
    serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
}

fn tex(q: &Rational) -> String {
    if q.is_integer() {
        q.to_string()
    } else if q.is_negative() {
        format!("-\\myfrac{{{}}}{{{}}}", -q.numer(), q.denom())
    } else {
        format!("\\myfrac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

fn tex_seeds(seeds: &Seeds) -> String {
    let mut parts = Vec::new();
    let mut done: HashSet<&Rational> = HashSet::new();
    for class in &seeds.equal {
        let color = seeds
            .colored
            .iter()
            .find(|a| class.contains(&a.node))
            .map(|a| a.color);
        let mut s = class
            .iter()
            .map(|q| format!("c({})", tex(q)))
            .collect::<Vec<_>>()
            .join("=");
        if let Some(k) = color {
            write!(s, "={k}").expect("string write");
        }
        done.extend(class.iter());
        parts.push(s);
    }
    for a in &seeds.colored {
        if !done.contains(&a.node) {
            parts.push(format!("c({}) = {}", tex(&a.node), a.color));
        }
    }
    parts.join(", ")
}

fn latex(tree: &ProofTree) -> String {
    let r = tree.colors;
    let mut out = String::new();
    out.push_str("\\providecommand{\\myfrac}[2]{\\ensuremath{\\frac{#1}{#2}}}\n");
    writeln!(
        out,
        "\\begin{{tabular}}{{|l|r@{{}}c@{{}}l|{}}} \\hline",
        "l|".repeat(r as usize)
    )
    .expect("string write");
    out.push_str("Assumptions & \\multicolumn{3}{|l|}{Claim}");
    for k in 0..r {
        write!(out, " & Why not {k}").expect("string write");
    }
    out.push_str(" \\\\ \\hline\n");
    for row in &tree.rows {
        let indent = "\\hspace{1em}".repeat(row.depth.saturating_sub(1) as usize);
        let assumption = match &row.assumption {
            Some(a) => format!("{indent} $c({}) = {}$", tex(&a.node), a.color),
            None if tree.seeds.is_empty() => String::new(),
            None => format!("${}$", tex_seeds(&tree.seeds)),
        };
        let node = format!("$c({})$", tex(row.claim.node()));
        let (rel, rhs) = match &row.claim {
            Claim::ForcedSet { options, .. } => (
                "${}\\in{}$".to_string(),
                format!(
                    "$\\{{{}\\}}$",
                    options
                        .iter()
                        .map(u32::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                ),
            ),
            Claim::ForcedColor { color, .. } => ("${}={}$".to_string(), format!("${color}$")),
            Claim::Contradiction { .. } => ("!?".to_string(), String::new()),
        };
        write!(out, "{assumption} & {node} & {rel} & {rhs}").expect("string write");
        for k in 0..r {
            let cell = match row.per_color_reasons.get(&k) {
                None => String::new(),
                Some(Justification::Ratio { from, ratio }) => {
                    format!(
                        "${}\\cdot{} = {}$",
                        tex(from),
                        tex(ratio),
                        tex(&(from * ratio))
                    )
                }
                Some(Justification::Tuple { values }) => {
                    format!(
                        "$({})$",
                        values.iter().map(tex).collect::<Vec<_>>().join(",")
                    )
                }
                Some(Justification::Seed) => "seed".to_string(),
                Some(Justification::Symmetry { color }) => format!("as {color}"),
            };
            write!(out, " & {cell}").expect("string write");
        }
        out.push_str(" \\\\ \\hline\n");
    }
    out.push_str("\\end{tabular}\n");
    out
}
