use std::cmp::Reverse;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::constraints::derive_constraints;
use super::proof::{Assignment, Claim, Justification, ProofRow, ProofTree, Seeds};
use super::{NodeUniverse, UniverseConfig};
use crate::colorings::canonicalize;
use crate::equations::LinearEquation;
use crate::error::{Error, Result};
use crate::ratcore::Rational;

const UNKNOWN: u8 = u8::MAX;
const NO_REASON: u32 = u32::MAX;
pub const MAX_COLORS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchOptions {
    pub max_branches: u64,
    pub max_nodes: usize,
    /// Build the proof tree for Unsat results.
    pub proof: bool,
    /// Drop forced rows nothing below them cites.
    pub trim: bool,
    /// Worker threads; values above 1 split the first case split across threads.
    pub threads: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            max_branches: 10_000_000,
            max_nodes: 200_000,
            proof: true,
            trim: false,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchStats {
    pub universe_nodes: usize,
    pub constraints: usize,
    pub branches: u64,
    pub propagations: u64,
    pub rows: u64,
    pub solutions: u64,
}

impl std::fmt::Display for SearchStats {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} nodes, {} constraints, {} branches, {} propagations, {} rows, {} solutions",
            self.universe_nodes,
            self.constraints,
            self.branches,
            self.propagations,
            self.rows,
            self.solutions
        )
    }
}

/// A complete coloring of a universe.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coloring {
    pub nodes: Vec<Rational>,
    pub colors: Vec<u32>,
}

impl Coloring {
    pub fn color_of(&self, q: &Rational) -> Option<u32> {
        self.nodes
            .iter()
            .position(|n| n == q)
            .map(|i| self.colors[i])
    }

    pub fn canonical(&self) -> Vec<u32> {
        canonicalize(&self.colors)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result")]
pub enum SearchOutcome {
    Sat { assignment: Coloring },
    Unsat { proof: ProofTree },
}

impl SearchOutcome {
    pub fn is_unsat(&self) -> bool {
        matches!(self, SearchOutcome::Unsat { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchResult {
    pub outcome: SearchOutcome,
    pub stats: SearchStats,
}

/// All colorings of a universe free of in-universe monochromatic solutions,
/// one canonical representative per isomorphism class, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Enumeration {
    pub nodes: Vec<Rational>,
    pub classes: Vec<Vec<u32>>,
    pub count: usize,
    pub stats: SearchStats,
}

/// A constraint over seed classes, remembering the tuple it came from.
#[derive(Debug, Clone)]
struct ClassConstraint {
    classes: Vec<u32>,
    witness: Vec<u32>,
}

/// Everything about a problem that does not change during search.
#[derive(Debug)]
struct Core {
    r: u32,
    values: Vec<Rational>,
    class_of: Vec<u32>,
    members: Vec<Vec<u32>>,
    seeded: Vec<bool>,
    seed_colors: Vec<(u32, u32)>,
    constraints: Vec<ClassConstraint>,
    by_class: Vec<Vec<u32>>,
    /// Number of forbidden-ratio edges at each class.
    degree: Vec<u32>,
    /// A class that no coloring can handle, and the row proving it.
    doomed: Option<ProofRow>,
    universe_nodes: usize,
}

impl Core {
    fn new(eq: &LinearEquation, r: u32, universe: &NodeUniverse, seeds: &Seeds) -> Result<Core> {
        if r == 0 || r > MAX_COLORS {
            return Err(Error::InvalidArgument(format!(
                "colors must be in 1..={MAX_COLORS}"
            )));
        }
        let set = derive_constraints(eq, universe)?;
        let n = universe.len();
        let index = |q: &Rational| {
            universe.index_of(q).ok_or_else(|| {
                Error::InvalidArgument(format!("seed node {q} is not in the universe"))
            })
        };

        // seed equalities by union-find; the smallest node of a class represents it
        let mut parent: Vec<u32> = (0..n as u32).collect();
        fn find(parent: &mut [u32], x: u32) -> u32 {
            let mut r = x;
            while parent[r as usize] != r {
                r = parent[r as usize];
            }
            parent[x as usize] = r;
            r
        }
        let mut seeded_nodes = Vec::new();
        for class in &seeds.equal {
            let ids = class.iter().map(index).collect::<Result<Vec<_>>>()?;
            seeded_nodes.extend(ids.iter().copied());
            for w in ids.windows(2) {
                let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
                let (lo, hi) = (a.min(b), a.max(b));
                parent[hi as usize] = lo;
            }
        }
        let mut class_id: HashMap<u32, u32> = HashMap::new();
        let mut class_of = vec![0u32; n];
        let mut members: Vec<Vec<u32>> = Vec::new();
        for i in 0..n as u32 {
            let root = find(&mut parent, i);
            let next = class_id.len() as u32;
            let c = *class_id.entry(root).or_insert(next);
            if c as usize == members.len() {
                members.push(Vec::new());
            }
            members[c as usize].push(i);
            class_of[i as usize] = c;
        }
        let classes = members.len();
        let mut seeded = vec![false; classes];
        for &i in &seeded_nodes {
            seeded[class_of[i as usize] as usize] = true;
        }
        let mut seed_colors = Vec::new();
        for a in &seeds.colored {
            if a.color >= r {
                return Err(Error::InvalidArgument(format!(
                    "seed color {} with only {r} colors",
                    a.color
                )));
            }
            let c = class_of[index(&a.node)? as usize];
            seeded[c as usize] = true;
            seed_colors.push((c, a.color));
        }

        let values = universe.values().to_vec();
        let mut doomed = None;
        let mut seen: HashMap<Vec<u32>, ()> = HashMap::new();
        let mut constraints = Vec::new();
        for w in &set.universal {
            let c = class_of[w[0] as usize];
            doomed.get_or_insert((c, w.clone()));
        }
        for con in &set.constraints {
            let mut cls: Vec<u32> = con.nodes.iter().map(|&i| class_of[i as usize]).collect();
            cls.sort_unstable();
            cls.dedup();
            if cls.len() == 1 {
                doomed.get_or_insert((cls[0], con.witness.clone()));
                continue;
            }
            if seen.insert(cls.clone(), ()).is_none() {
                constraints.push(ClassConstraint {
                    classes: cls,
                    witness: con.witness.clone(),
                });
            }
        }
        let mut by_class = vec![Vec::new(); classes];
        for (i, c) in constraints.iter().enumerate() {
            for &k in &c.classes {
                by_class[k as usize].push(i as u32);
            }
        }
        let degree = by_class
            .iter()
            .map(|cs| {
                cs.iter()
                    .filter(|&&ci| constraints[ci as usize].classes.len() == 2)
                    .count() as u32
            })
            .collect();
        let mut core = Core {
            r,
            values,
            class_of,
            members,
            seeded,
            seed_colors,
            constraints,
            by_class,
            degree,
            doomed: None,
            universe_nodes: n,
        };
        if let Some((c, w)) = doomed {
            let j = core.witness_justification(c, &w);
            core.doomed = Some(ProofRow {
                depth: 0,
                assumption: None,
                claim: Claim::Contradiction { node: core.rep(c) },
                per_color_reasons: (0..r).map(|k| (k, j.clone())).collect(),
            });
        }
        Ok(core)
    }

    fn rep(&self, class: u32) -> Rational {
        self.values[self.members[class as usize][0] as usize].clone()
    }

    fn classes(&self) -> usize {
        self.members.len()
    }

    /// Cites the tuple `witness` against a color of `class`.
    fn witness_justification(&self, class: u32, witness: &[u32]) -> Justification {
        let mut distinct = witness.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() == 2 {
            let (a, b) = if self.class_of[distinct[1] as usize] == class {
                (distinct[0], distinct[1])
            } else {
                (distinct[1], distinct[0])
            };
            let from = self.values[a as usize].clone();
            let ratio = &self.values[b as usize] / &from;
            return Justification::Ratio { from, ratio };
        }
        Justification::Tuple {
            values: witness
                .iter()
                .map(|&i| self.values[i as usize].clone())
                .collect(),
        }
    }
}

/// One step of the propagation trail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrailEntry {
    /// A color left a node's candidates because of the constraint at `reason`.
    Remove { class: u32, color: u32, reason: u32 },
    /// A branch fixed the node's candidates to one color.
    Decide { class: u32, color: u32, prev: u32 },
    /// The node's color became a premise for propagation.
    Know { class: u32, color: u32 },
}

/// Candidate colors per seed class plus the trail that produced them.
#[derive(Debug, Clone)]
pub struct ColorState {
    r: u32,
    cand: Vec<u32>,
    known: Vec<u8>,
    reasons: Vec<u32>,
    used: [u32; MAX_COLORS as usize],
    trail: Vec<TrailEntry>,
    queue: VecDeque<u32>,
    empties: Vec<u32>,
}

impl ColorState {
    fn new(r: u32, classes: usize) -> Self {
        let full = if r == 32 { u32::MAX } else { (1u32 << r) - 1 };
        ColorState {
            r,
            cand: vec![full; classes],
            known: vec![UNKNOWN; classes],
            reasons: vec![NO_REASON; classes * r as usize],
            used: [0; MAX_COLORS as usize],
            trail: Vec::new(),
            queue: VecDeque::new(),
            empties: Vec::new(),
        }
    }

    pub fn trail(&self) -> &[TrailEntry] {
        &self.trail
    }

    /// Candidate bitmask per class.
    pub fn masks(&self) -> &[u32] {
        &self.cand
    }

    /// Recomputes candidate masks from a trail alone.
    pub fn replay(r: u32, classes: usize, trail: &[TrailEntry]) -> Vec<u32> {
        let mut s = ColorState::new(r, classes);
        for t in trail {
            match *t {
                TrailEntry::Remove { class, color, .. } => s.cand[class as usize] &= !(1 << color),
                TrailEntry::Decide { class, color, .. } => s.cand[class as usize] = 1 << color,
                TrailEntry::Know { .. } => {}
            }
        }
        s.cand
    }

    fn is_contradiction(&self) -> bool {
        !self.empties.is_empty()
    }
}

fn colors_of(mask: u32) -> Vec<u32> {
    (0..32).filter(|k| mask >> k & 1 == 1).collect()
}

enum Flow {
    Unsat,
    Sat(Vec<u32>),
}

/// The search state for one problem.
#[derive(Clone)]
struct Solver {
    core: Arc<Core>,
    st: ColorState,
    opts: SearchOptions,
    enumerate: bool,
    found: Vec<Vec<u32>>,
    branches: Arc<AtomicU64>,
    propagations: u64,
    rows: u64,
    split_pending: bool,
}

impl Solver {
    fn new(core: Arc<Core>, opts: &SearchOptions, enumerate: bool) -> Self {
        let st = ColorState::new(core.r, core.classes());
        Solver {
            core,
            st,
            opts: opts.clone(),
            enumerate,
            found: Vec::new(),
            branches: Arc::new(AtomicU64::new(0)),
            propagations: 0,
            rows: 0,
            split_pending: opts.threads > 1,
        }
    }

    /// Applies seed colors and queues classes that start with one candidate.
    fn seed(&mut self) {
        let core = self.core.clone();
        for &(c, k) in &core.seed_colors {
            let bit = 1u32 << k;
            if self.st.cand[c as usize] & bit == 0 || self.st.known[c as usize] != UNKNOWN {
                continue;
            }
            let prev = self.st.cand[c as usize];
            self.st.cand[c as usize] = bit;
            self.st.trail.push(TrailEntry::Decide {
                class: c,
                color: k,
                prev,
            });
            self.know(c, k);
        }
        if core.r == 1 {
            for c in 0..core.classes() as u32 {
                if self.st.known[c as usize] == UNKNOWN {
                    self.st.queue.push_back(c);
                }
            }
        }
    }

    fn seed_conflict(&self) -> Option<u32> {
        let mut first: BTreeMap<u32, u32> = BTreeMap::new();
        for &(c, k) in &self.core.seed_colors {
            if *first.entry(c).or_insert(k) != k {
                return Some(c);
            }
        }
        None
    }

    fn remove(&mut self, c: u32, k: u32, reason: u32) {
        let bit = 1u32 << k;
        let cand = &mut self.st.cand[c as usize];
        if *cand & bit == 0 {
            return;
        }
        *cand &= !bit;
        let left = *cand;
        self.st.reasons[(c * self.st.r + k) as usize] = reason;
        self.st.trail.push(TrailEntry::Remove {
            class: c,
            color: k,
            reason,
        });
        match left.count_ones() {
            0 => self.st.empties.push(c),
            1 => self.st.queue.push_back(c),
            _ => {}
        }
    }

    fn know(&mut self, c: u32, k: u32) {
        self.st.known[c as usize] = k as u8;
        self.st.used[k as usize] += 1;
        self.st.trail.push(TrailEntry::Know { class: c, color: k });
        self.propagations += 1;
        let core = self.core.clone();
        for &ci in &core.by_class[c as usize] {
            let con = &core.constraints[ci as usize];
            let mut open = None;
            let mut unknown = 0;
            let mut blocked = false;
            for &d in &con.classes {
                if d == c {
                    continue;
                }
                match self.st.known[d as usize] {
                    UNKNOWN => {
                        unknown += 1;
                        open = Some(d);
                    }
                    kk if kk as u32 == k => {}
                    _ => {
                        blocked = true;
                        break;
                    }
                }
            }
            if !blocked && unknown == 1 {
                self.remove(open.expect("one open class"), k, ci);
            }
        }
    }

    fn undo(&mut self, mark: usize) {
        while self.st.trail.len() > mark {
            match self.st.trail.pop().expect("above mark") {
                TrailEntry::Remove { class, color, .. } => {
                    self.st.cand[class as usize] |= 1 << color;
                    self.st.reasons[(class * self.st.r + color) as usize] = NO_REASON;
                }
                TrailEntry::Decide { class, prev, .. } => self.st.cand[class as usize] = prev,
                TrailEntry::Know { class, color } => {
                    self.st.known[class as usize] = UNKNOWN;
                    self.st.used[color as usize] -= 1;
                }
            }
        }
        self.st.queue.clear();
        self.st.empties.clear();
    }

    fn decide(&mut self, c: u32, k: u32) {
        let prev = self.st.cand[c as usize];
        self.st.cand[c as usize] = 1 << k;
        self.st.trail.push(TrailEntry::Decide {
            class: c,
            color: k,
            prev,
        });
    }

    fn next_forced(&mut self) -> Option<u32> {
        while let Some(c) = self.st.queue.pop_front() {
            if self.st.known[c as usize] == UNKNOWN && self.st.cand[c as usize].count_ones() == 1 {
                return Some(c);
            }
        }
        None
    }

    /// Processes forced classes until none remain or a class runs empty.
    fn fixpoint(&mut self) {
        while !self.st.is_contradiction() {
            match self.next_forced() {
                Some(c) => {
                    let k = self.st.cand[c as usize].trailing_zeros();
                    self.know(c, k);
                }
                None => break,
            }
        }
    }

    fn reasons_for(
        &self,
        c: u32,
        colors: impl Iterator<Item = u32>,
    ) -> BTreeMap<u32, Justification> {
        colors
            .map(|k| {
                let ri = self.st.reasons[(c * self.st.r + k) as usize];
                debug_assert_ne!(ri, NO_REASON, "color {k} left class {c} without a reason");
                let j = self
                    .core
                    .witness_justification(c, &self.core.constraints[ri as usize].witness);
                (k, j)
            })
            .collect()
    }

    /// Undecided class to branch on: seed classes first, then fewest
    /// candidates, then canonical order.
    /// Seeded classes first, then fewest candidates, then most ratio edges.
    fn choose(&self) -> Option<u32> {
        let mut best: Option<(bool, u32, Reverse<u32>, u32)> = None;
        for c in 0..self.core.classes() as u32 {
            if self.st.known[c as usize] != UNKNOWN {
                continue;
            }
            let key = (
                !self.core.seeded[c as usize],
                self.st.cand[c as usize].count_ones(),
                Reverse(self.core.degree[c as usize]),
                c,
            );
            if best.is_none_or(|b| key < b) {
                best = Some(key);
            }
        }
        best.map(|b| b.3)
    }

    fn push_row(&mut self, rows: &mut Vec<ProofRow>, row: ProofRow) {
        self.rows += 1;
        if self.opts.proof {
            rows.push(row);
        }
    }

    fn stats(&self) -> SearchStats {
        SearchStats {
            universe_nodes: self.core.universe_nodes,
            constraints: self.core.constraints.len(),
            branches: self.branches.load(Ordering::Relaxed),
            propagations: self.propagations,
            rows: self.rows,
            solutions: self.found.len() as u64,
        }
    }

    fn count_branch(&self) -> Result<()> {
        let b = self.branches.fetch_add(1, Ordering::Relaxed) + 1;
        if b > self.opts.max_branches {
            return Err(Error::BudgetExceeded(self.stats()));
        }
        Ok(())
    }

    fn expand(
        &mut self,
        first: Option<(u32, u32)>,
        depth0: u32,
        rows: &mut Vec<ProofRow>,
    ) -> Result<Flow> {
        let mark = self.st.trail.len();
        let flow = self.expand_inner(first, depth0, rows);
        self.undo(mark);
        flow
    }

    fn expand_inner(
        &mut self,
        first: Option<(u32, u32)>,
        depth0: u32,
        rows: &mut Vec<ProofRow>,
    ) -> Result<Flow> {
        let r = self.core.r;
        let mut assumption = first;
        let mut depth = depth0;
        loop {
            if let Some((c, k)) = assumption {
                if self.st.known[c as usize] == UNKNOWN {
                    self.know(c, k);
                }
            }
            let assumed = assumption.map(|(c, k)| Assignment {
                node: self.core.rep(c),
                color: k,
            });
            if let Some(&e) = self.st.empties.first() {
                let per_color_reasons = self.reasons_for(e, 0..r);
                let claim = Claim::Contradiction {
                    node: self.core.rep(e),
                };
                self.push_row(
                    rows,
                    ProofRow {
                        depth,
                        assumption: assumed,
                        claim,
                        per_color_reasons,
                    },
                );
                return Ok(Flow::Unsat);
            }
            if let Some(s) = self.next_forced() {
                let k = self.st.cand[s as usize].trailing_zeros();
                let per_color_reasons = self.reasons_for(s, (0..r).filter(|&j| j != k));
                let claim = Claim::ForcedColor {
                    node: self.core.rep(s),
                    color: k,
                };
                self.push_row(
                    rows,
                    ProofRow {
                        depth,
                        assumption: assumed,
                        claim,
                        per_color_reasons,
                    },
                );
                assumption = Some((s, k));
                depth += 1;
                continue;
            }
            let Some(b) = self.choose() else {
                let colors = self.st.known.iter().map(|&k| k as u32).collect();
                return Ok(Flow::Sat(colors));
            };
            let cand = self.st.cand[b as usize];
            let fresh = (0..r).find(|&k| self.st.used[k as usize] == 0);
            let options: Vec<u32> = colors_of(cand)
                .into_iter()
                .filter(|&k| self.st.used[k as usize] > 0 || Some(k) == fresh)
                .collect();
            let mut per_color_reasons = self.reasons_for(b, (0..r).filter(|&k| cand >> k & 1 == 0));
            for k in colors_of(cand) {
                if !options.contains(&k) {
                    per_color_reasons.insert(
                        k,
                        Justification::Symmetry {
                            color: fresh.expect("unused color exists"),
                        },
                    );
                }
            }
            let node = self.core.rep(b);
            let claim = if options.len() == 1 {
                Claim::ForcedColor {
                    node,
                    color: options[0],
                }
            } else {
                Claim::ForcedSet {
                    node,
                    options: options.clone(),
                }
            };
            self.push_row(
                rows,
                ProofRow {
                    depth,
                    assumption: assumed,
                    claim,
                    per_color_reasons,
                },
            );
            if options.len() == 1 {
                self.count_branch()?;
                self.decide(b, options[0]);
                assumption = Some((b, options[0]));
                depth += 1;
                continue;
            }
            if self.split_pending {
                return self.split(b, &options, depth + 1, rows);
            }
            for &k in &options {
                self.count_branch()?;
                let m = self.st.trail.len();
                self.decide(b, k);
                let flow = self.expand(Some((b, k)), depth + 1, rows);
                self.undo(m);
                match flow? {
                    Flow::Sat(colors) if !self.enumerate => return Ok(Flow::Sat(colors)),
                    Flow::Sat(colors) => self.found.push(colors),
                    Flow::Unsat => {}
                }
            }
            return Ok(Flow::Unsat);
        }
    }

    /// Explores the options of one case split on separate workers and
    /// merges their rows and solutions in option order.
    fn split(
        &mut self,
        b: u32,
        options: &[u32],
        depth: u32,
        rows: &mut Vec<ProofRow>,
    ) -> Result<Flow> {
        self.split_pending = false;
        let results: Vec<Result<(Flow, Vec<ProofRow>, Solver)>> = options
            .par_iter()
            .map(|&k| {
                let mut worker = self.clone();
                worker.found.clear();
                worker.propagations = 0;
                worker.rows = 0;
                worker.count_branch()?;
                worker.decide(b, k);
                let mut sub = Vec::new();
                let flow = worker.expand(Some((b, k)), depth, &mut sub)?;
                Ok((flow, sub, worker))
            })
            .collect();
        let mut sat = None;
        for res in results {
            let (flow, sub, worker) = res?;
            self.propagations += worker.propagations;
            self.rows += worker.rows;
            self.found.extend(worker.found);
            match flow {
                Flow::Sat(colors) if !self.enumerate => {
                    sat.get_or_insert(colors);
                }
                Flow::Sat(colors) => self.found.push(colors),
                Flow::Unsat => {}
            }
            if sat.is_none() {
                rows.extend(sub);
            }
        }
        Ok(match sat {
            Some(c) => Flow::Sat(c),
            None => Flow::Unsat,
        })
    }

    fn node_colors(&self, class_colors: &[u32]) -> Vec<u32> {
        self.core
            .class_of
            .iter()
            .map(|&c| class_colors[c as usize])
            .collect()
    }

    fn run(mut self) -> Result<(Flow, Vec<ProofRow>, Solver)> {
        let mut rows = Vec::new();
        if let Some(row) = &self.core.doomed {
            self.push_row(&mut rows, row.clone());
            return Ok((Flow::Unsat, rows, self));
        }
        if let Some(c) = self.seed_conflict() {
            let claim = Claim::Contradiction {
                node: self.core.rep(c),
            };
            let per_color_reasons = (0..self.core.r).map(|k| (k, Justification::Seed)).collect();
            self.push_row(
                &mut rows,
                ProofRow {
                    depth: 0,
                    assumption: None,
                    claim,
                    per_color_reasons,
                },
            );
            return Ok((Flow::Unsat, rows, self));
        }
        self.seed();
        let flow = self.expand_inner(None, 0, &mut rows)?;
        Ok((flow, rows, self))
    }
}

fn run_with_stack<T: Send + 'static>(threads: usize, f: impl FnOnce() -> T + Send + 'static) -> T {
    const STACK: usize = 256 << 20;
    if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .stack_size(STACK)
            .build()
            .expect("thread pool");
        pool.install(f)
    } else {
        std::thread::Builder::new()
            .stack_size(STACK)
            .spawn(f)
            .expect("search thread")
            .join()
            .expect("search thread panicked")
    }
}

fn prepare(
    eq: &LinearEquation,
    r: u32,
    universe: &NodeUniverse,
    seeds: &Seeds,
    opts: &SearchOptions,
) -> Result<Arc<Core>> {
    if universe.len() > opts.max_nodes {
        return Err(Error::BudgetExceeded(SearchStats {
            universe_nodes: universe.len(),
            ..Default::default()
        }));
    }
    Ok(Arc::new(Core::new(eq, r, universe, seeds)?))
}

/// Decides whether `universe` admits an `r`-coloring with no monochromatic
/// solution of `eq` under `seeds`. Unsat results carry a checkable proof.
pub fn search(
    eq: &LinearEquation,
    r: u32,
    universe: &NodeUniverse,
    seeds: &Seeds,
    opts: &SearchOptions,
) -> Result<SearchResult> {
    let core = prepare(eq, r, universe, seeds, opts)?;
    let solver = Solver::new(core.clone(), opts, false);
    let (flow, rows, solver) = run_with_stack(opts.threads, move || solver.run())?;
    let stats = solver.stats();
    let outcome = match flow {
        Flow::Sat(classes) => SearchOutcome::Sat {
            assignment: Coloring {
                nodes: core.values.clone(),
                colors: solver.node_colors(&classes),
            },
        },
        Flow::Unsat => {
            let tree = ProofTree {
                equation: eq.clone(),
                colors: r,
                seeds: seeds.clone(),
                rows,
            };
            SearchOutcome::Unsat {
                proof: if opts.trim {
                    super::proof::trim(&tree)
                } else {
                    tree
                },
            }
        }
    };
    Ok(SearchResult { outcome, stats })
}

/// Result of [`search_escalating`]: the last universe tried and its outcome.
#[derive(Debug, Clone)]
pub struct Escalation {
    pub config: UniverseConfig,
    pub universe: NodeUniverse,
    pub result: SearchResult,
    /// Number of universes searched.
    pub attempts: usize,
}

/// Searches each universe in turn until one is Unsat. A Sat answer on a
/// finite universe is not final, so a larger universe gets a chance to refute.
pub fn search_escalating(
    eq: &LinearEquation,
    r: u32,
    configs: &[UniverseConfig],
    seeds: &Seeds,
    opts: &SearchOptions,
) -> Result<Escalation> {
    let mut last = None;
    for (i, config) in configs.iter().enumerate() {
        let universe = config.build(eq, &seeds.nodes())?;
        let result = search(eq, r, &universe, seeds, opts)?;
        let unsat = matches!(result.outcome, SearchOutcome::Unsat { .. });
        last = Some(Escalation {
            config: config.clone(),
            universe,
            result,
            attempts: i + 1,
        });
        if unsat {
            break;
        }
    }
    last.ok_or_else(|| Error::InvalidArgument("no universe to search".into()))
}

/// Every coloring of `universe` free of in-universe monochromatic solutions,
/// up to renaming colors.
pub fn enumerate_colorings(
    eq: &LinearEquation,
    r: u32,
    universe: &NodeUniverse,
    seeds: &Seeds,
    opts: &SearchOptions,
) -> Result<Enumeration> {
    let opts = SearchOptions {
        proof: false,
        ..opts.clone()
    };
    let core = prepare(eq, r, universe, seeds, &opts)?;
    let solver = Solver::new(core.clone(), &opts, true);
    let (flow, _, mut solver) = run_with_stack(opts.threads, move || solver.run())?;
    if let Flow::Sat(c) = flow {
        solver.found.push(c);
    }
    let mut classes: Vec<Vec<u32>> = solver
        .found
        .iter()
        .map(|c| canonicalize(&solver.node_colors(c)))
        .collect();
    classes.sort();
    classes.dedup();
    let stats = solver.stats();
    Ok(Enumeration {
        nodes: core.values.clone(),
        count: classes.len(),
        classes,
        stats,
    })
}

/// Step-by-step access to propagation, for inspecting what a set of
/// assumptions forces.
pub struct Propagator {
    solver: Solver,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    Fixpoint,
    /// The node has no color left; reasons cover every color.
    Contradiction {
        node: Rational,
        reasons: BTreeMap<u32, Justification>,
    },
}

impl Propagator {
    pub fn new(
        eq: &LinearEquation,
        r: u32,
        universe: &NodeUniverse,
        seeds: &Seeds,
    ) -> Result<Self> {
        let core = Arc::new(Core::new(eq, r, universe, seeds)?);
        let mut solver = Solver::new(core, &SearchOptions::default(), false);
        solver.seed();
        Ok(Propagator { solver })
    }

    fn class(&self, q: &Rational) -> Result<u32> {
        let i = self
            .solver
            .core
            .values
            .iter()
            .position(|v| v == q)
            .ok_or_else(|| Error::InvalidArgument(format!("{q} is not in the universe")))?;
        Ok(self.solver.core.class_of[i])
    }

    /// Fixes `q` to `color` and propagates.
    pub fn assign(&mut self, q: &Rational, color: u32) -> Result<Propagation> {
        let c = self.class(q)?;
        if color >= self.solver.core.r {
            return Err(Error::InvalidArgument(format!(
                "color {color} out of range"
            )));
        }
        if self.solver.st.cand[c as usize] >> color & 1 == 0 {
            return Err(Error::PreconditionViolation(format!(
                "color {color} is already excluded for {q}"
            )));
        }
        if self.solver.st.known[c as usize] == UNKNOWN && !self.solver.st.is_contradiction() {
            self.solver.decide(c, color);
            self.solver.know(c, color);
        }
        Ok(self.propagate())
    }

    /// Runs propagation to a fixpoint.
    pub fn propagate(&mut self) -> Propagation {
        self.solver.fixpoint();
        match self.solver.st.empties.first() {
            Some(&e) => Propagation::Contradiction {
                node: self.solver.core.rep(e),
                reasons: (0..self.solver.core.r)
                    .filter(|&k| {
                        self.solver.st.reasons[(e * self.solver.core.r + k) as usize] != NO_REASON
                    })
                    .map(|k| {
                        let ri = self.solver.st.reasons[(e * self.solver.core.r + k) as usize];
                        (
                            k,
                            self.solver.core.witness_justification(
                                e,
                                &self.solver.core.constraints[ri as usize].witness,
                            ),
                        )
                    })
                    .collect(),
            },
            None => Propagation::Fixpoint,
        }
    }

    pub fn candidates(&self, q: &Rational) -> Result<Vec<u32>> {
        Ok(colors_of(self.solver.st.cand[self.class(q)? as usize]))
    }

    pub fn state(&self) -> &ColorState {
        &self.solver.st
    }

    pub fn classes(&self) -> usize {
        self.solver.core.classes()
    }
}
