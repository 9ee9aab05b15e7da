use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::equations::LinearEquation;
use crate::error::{Error, Result};
use crate::ratcore::{factor, is_prime, Rational};

/// `sign * prod primes[i]^exponents[i] * x` for a symbolic base `x`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub sign: i8,
    pub exponents: Vec<i64>,
}

impl Node {
    pub fn identity(width: usize) -> Self {
        Node {
            sign: 1,
            exponents: vec![0; width],
        }
    }

    /// The node's value at `x = 1`.
    pub fn value(&self, primes: &[u64]) -> Rational {
        let mut num = BigInt::from(self.sign);
        let mut den = BigInt::one();
        for (&p, &e) in primes.iter().zip(&self.exponents) {
            let pp = num_traits::pow(BigInt::from(p), e.unsigned_abs() as usize);
            if e >= 0 {
                num *= pp;
            } else {
                den *= pp;
            }
        }
        Rational::new(num, den).expect("nonzero denominator")
    }
}

impl Ord for Node {
    /// Positive nodes first, then exponent vectors lexicographically.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .sign
            .cmp(&self.sign)
            .then_with(|| self.exponents.cmp(&other.exponents))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Universe description as read from JSON, e.g.
/// `{"primes":[2,3,5], "bounds":{"2":[-3,3]}, "negatives":true, "closureRounds":3}`.
///
/// Primes without an explicit bound get `[-3, 3]`. When `values` is given the
/// universe is exactly that list and the box fields are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UniverseConfig {
    #[serde(default = "default_primes")]
    pub primes: Vec<u64>,
    #[serde(default)]
    pub bounds: BTreeMap<u64, (i64, i64)>,
    #[serde(default = "yes")]
    pub negatives: bool,
    #[serde(default = "default_rounds")]
    pub closure_rounds: u32,
    /// Use the whole box instead of the closure.
    #[serde(default)]
    pub full_box: bool,
    /// Drop box nodes whose value has numerator or denominator above this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_height: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<Rational>>,
}

fn default_primes() -> Vec<u64> {
    vec![2, 3, 5]
}

fn yes() -> bool {
    true
}

fn default_rounds() -> u32 {
    3
}

pub const DEFAULT_BOUND: (i64, i64) = (-3, 3);

impl Default for UniverseConfig {
    fn default() -> Self {
        UniverseConfig {
            primes: default_primes(),
            bounds: BTreeMap::new(),
            negatives: true,
            closure_rounds: default_rounds(),
            full_box: false,
            max_height: None,
            values: None,
        }
    }
}

impl UniverseConfig {
    /// A wider, positive-only box over the primes up to 17, capped at height
    /// 32. Reaches helper values like `11/2` and `21/4` that the default box
    /// cannot.
    pub fn extended() -> Self {
        let primes = vec![2, 3, 5, 7, 11, 13, 17];
        let mut bounds: BTreeMap<u64, (i64, i64)> = primes.iter().map(|&p| (p, (-1, 1))).collect();
        bounds.insert(2, (-3, 5));
        bounds.insert(3, (-3, 3));
        UniverseConfig {
            primes,
            bounds,
            negatives: false,
            max_height: Some(32),
            ..Default::default()
        }
    }

    pub fn bound(&self, p: u64) -> (i64, i64) {
        self.bounds.get(&p).copied().unwrap_or(DEFAULT_BOUND)
    }

    /// Builds the universe for `eq`, growing the closure from the identity
    /// and the `seeds` values.
    pub fn build(&self, eq: &LinearEquation, seeds: &[Rational]) -> Result<NodeUniverse> {
        if let Some(values) = &self.values {
            let mut primes = Vec::new();
            for a in eq.coefficients() {
                primes.extend(factor(a)?.exponents.keys().copied());
            }
            return NodeUniverse::from_values_over(values, &primes);
        }
        let bounds: Vec<(i64, i64)> = self.primes.iter().map(|&p| self.bound(p)).collect();
        let boxed = generate_universe(&self.primes, &bounds, self.negatives)?;
        let boxed = match self.max_height {
            Some(h) => boxed.filter_height(h),
            None => boxed,
        };
        if self.full_box {
            return Ok(boxed);
        }
        closure(eq, &boxed, seeds, self.closure_rounds)
    }
}

/// A finite, canonically ordered set of nodes over a prime support.
#[derive(Debug, Clone)]
pub struct NodeUniverse {
    primes: Vec<u64>,
    bounds: Vec<(i64, i64)>,
    include_negatives: bool,
    nodes: Vec<Node>,
    values: Vec<Rational>,
    index: HashMap<Rational, u32>,
}

impl PartialEq for NodeUniverse {
    fn eq(&self, other: &Self) -> bool {
        self.primes == other.primes && self.nodes == other.nodes
    }
}

impl NodeUniverse {
    pub fn new(
        primes: Vec<u64>,
        bounds: Vec<(i64, i64)>,
        include_negatives: bool,
        mut nodes: Vec<Node>,
    ) -> Result<Self> {
        for &p in &primes {
            if !is_prime(p) {
                return Err(Error::InvalidPrime(p));
            }
        }
        let mut sorted = primes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != primes.len() {
            return Err(Error::InvalidUniverse("repeated prime".into()));
        }
        if bounds.len() != primes.len() {
            return Err(Error::InvalidUniverse(
                "one bound per prime required".into(),
            ));
        }
        for node in &nodes {
            if node.exponents.len() != primes.len() || (node.sign != 1 && node.sign != -1) {
                return Err(Error::InvalidUniverse(format!("malformed node {node:?}")));
            }
        }
        nodes.push(Node::identity(primes.len()));
        nodes.sort();
        nodes.dedup();
        let values: Vec<Rational> = nodes.iter().map(|n| n.value(&primes)).collect();
        let index = values
            .iter()
            .enumerate()
            .map(|(i, v)| (v.clone(), i as u32))
            .collect();
        Ok(NodeUniverse {
            primes,
            bounds,
            include_negatives,
            nodes,
            values,
            index,
        })
    }

    /// Universe consisting of exactly `values` (and the identity).
    pub fn from_values(values: &[Rational]) -> Result<Self> {
        Self::from_values_over(values, &[])
    }

    /// Like [`NodeUniverse::from_values`], with `primes` added to the support
    /// even where no value uses them.
    pub fn from_values_over(values: &[Rational], primes: &[u64]) -> Result<Self> {
        let mut support: std::collections::BTreeSet<u64> = primes.iter().copied().collect();
        let mut facts = Vec::with_capacity(values.len());
        for v in values {
            if v.is_zero() {
                return Err(Error::InvalidUniverse("zero is not a node".into()));
            }
            let f = factor(v)?;
            support.extend(f.exponents.keys().copied());
            facts.push(f);
        }
        let primes: Vec<u64> = support.into_iter().collect();
        let nodes: Vec<Node> = facts
            .iter()
            .map(|f| Node {
                sign: f.sign,
                exponents: primes.iter().map(|&p| f.exponent(p)).collect(),
            })
            .collect();
        let bounds = primes
            .iter()
            .enumerate()
            .map(|(i, _)| {
                let es = nodes.iter().map(|n| n.exponents[i]);
                (
                    es.clone().min().unwrap_or(0).min(0),
                    es.max().unwrap_or(0).max(0),
                )
            })
            .collect();
        let negatives = nodes.iter().any(|n| n.sign < 0);
        NodeUniverse::new(primes, bounds, negatives, nodes)
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn bounds(&self) -> &[(i64, i64)] {
        &self.bounds
    }

    pub fn include_negatives(&self) -> bool {
        self.include_negatives
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Node values at `x = 1`, in node order.
    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn index_of(&self, q: &Rational) -> Option<u32> {
        self.index.get(q).copied()
    }

    pub fn contains(&self, q: &Rational) -> bool {
        self.index.contains_key(q)
    }

    fn filter_height(self, h: u64) -> Self {
        let h = BigInt::from(h);
        let keep: Vec<Node> = self
            .nodes
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| v.numer().abs() <= h && *v.denom() <= h)
            .map(|(n, _)| n.clone())
            .collect();
        NodeUniverse::new(self.primes, self.bounds, self.include_negatives, keep)
            .expect("subset of a valid universe")
    }

    /// The sub-universe on the given node indices.
    pub fn restrict(&self, indices: &[u32]) -> Self {
        let nodes = indices
            .iter()
            .map(|&i| self.nodes[i as usize].clone())
            .collect();
        NodeUniverse::new(
            self.primes.clone(),
            self.bounds.clone(),
            self.include_negatives,
            nodes,
        )
        .expect("subset of a valid universe")
    }

    /// Checks that every coefficient of `eq` factors over the universe's primes.
    pub fn check_support(&self, eq: &LinearEquation) -> Result<()> {
        for a in eq.coefficients() {
            for p in factor(a)?.exponents.keys() {
                if !self.primes.contains(p) {
                    return Err(Error::UnsupportedPrime(format!("{p} (coefficient {a})")));
                }
            }
        }
        Ok(())
    }
}

/// Every node with exponents inside `bounds`, both signs when
/// `include_negatives` is set.
pub fn generate_universe(
    primes: &[u64],
    bounds: &[(i64, i64)],
    include_negatives: bool,
) -> Result<NodeUniverse> {
    if primes.len() != bounds.len() {
        return Err(Error::InvalidUniverse(
            "one bound per prime required".into(),
        ));
    }
    let mut total: u128 = if include_negatives { 2 } else { 1 };
    for &(lo, hi) in bounds {
        if lo > hi {
            return Err(Error::InvalidUniverse(format!("empty bound [{lo}, {hi}]")));
        }
        total = total.saturating_mul((hi - lo + 1) as u128);
    }
    if total > 5_000_000 {
        return Err(Error::InvalidUniverse(format!("box has {total} nodes")));
    }
    let mut exps: Vec<Vec<i64>> = vec![vec![]];
    for &(lo, hi) in bounds {
        exps = exps
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |e| {
                    let mut v = prefix.clone();
                    v.push(e);
                    v
                })
            })
            .collect();
    }
    let signs: &[i8] = if include_negatives { &[1, -1] } else { &[1] };
    let nodes = signs
        .iter()
        .flat_map(|&sign| {
            exps.iter().map(move |e| Node {
                sign,
                exponents: e.clone(),
            })
        })
        .collect();
    NodeUniverse::new(primes.to_vec(), bounds.to_vec(), include_negatives, nodes)
}

/// Grows `{1} ∪ seeds` inside `boxed` for `rounds` rounds. A box node `y`
/// joins when some solution of `eq` contains `y` and all of its other
/// distinct values are already present; with all others equal this is the
/// forbidden-ratio step.
pub fn closure(
    eq: &LinearEquation,
    boxed: &NodeUniverse,
    seeds: &[Rational],
    rounds: u32,
) -> Result<NodeUniverse> {
    boxed.check_support(eq)?;
    let scaled = ScaledBox::new(eq, boxed)?;
    let mut inside = vec![false; boxed.len()];
    inside[boxed.index_of(&Rational::one()).expect("identity present") as usize] = true;
    for s in seeds {
        let i = boxed
            .index_of(s)
            .ok_or_else(|| Error::InvalidUniverse(format!("seed {s} lies outside the box")))?;
        inside[i as usize] = true;
    }
    for _ in 0..rounds {
        let grown = scaled.grow(&inside);
        if grown.iter().zip(&inside).all(|(g, i)| g == i) {
            break;
        }
        inside = grown;
    }
    let keep: Vec<u32> = (0..boxed.len() as u32)
        .filter(|&i| inside[i as usize])
        .collect();
    Ok(boxed.restrict(&keep))
}

/// The box and the coefficients cleared of denominators, as machine integers.
struct ScaledBox {
    coefs: Vec<i128>,
    values: Vec<i128>,
}

impl ScaledBox {
    fn new(eq: &LinearEquation, boxed: &NodeUniverse) -> Result<Self> {
        let lcm = |items: &[Rational]| {
            items
                .iter()
                .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
        };
        let scale = |items: &[Rational]| {
            let l = lcm(items);
            items
                .iter()
                .map(|r| r.numer() * (&l / r.denom()))
                .collect::<Vec<BigInt>>()
        };
        let coefs = scale(eq.coefficients());
        let values = scale(boxed.values());
        let max = |v: &[BigInt]| v.iter().map(|x| x.abs()).max().unwrap_or_default();
        let bound = max(&coefs) * max(&values) * BigInt::from(coefs.len() * 2);
        if bound.bits() > 120 {
            return Err(Error::InvalidUniverse(
                "box too wide for exact closure arithmetic".into(),
            ));
        }
        let coefs: Vec<i128> = coefs
            .iter()
            .map(|c| c.to_i128().expect("checked"))
            .collect();
        let values: Vec<i128> = values
            .iter()
            .map(|c| c.to_i128().expect("checked"))
            .collect();
        Ok(ScaledBox { coefs, values })
    }

    fn grow(&self, inside: &[bool]) -> Vec<bool> {
        let members: Vec<i128> = (0..self.values.len())
            .filter(|&i| inside[i])
            .map(|i| self.values[i])
            .collect();
        let mut out = inside.to_vec();
        let n = self.coefs.len();
        let mut seen = HashSet::new();
        // y fills the positions in `mask`, the rest come from `members`
        for mask in 1u64..(1u64 << n) - 1 {
            let weight: i128 = (0..n)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| self.coefs[i])
                .sum();
            if weight == 0 {
                continue;
            }
            let mut rest: Vec<i128> = (0..n)
                .filter(|&i| mask >> i & 1 == 0)
                .map(|i| self.coefs[i])
                .collect();
            rest.sort_unstable();
            if !seen.insert((weight, rest.clone())) {
                continue;
            }
            let (left, right) = rest.split_at(rest.len().div_ceil(2));
            let left_sums: HashSet<i128> = weighted_sums(left, &members).into_iter().collect();
            let right_sums = weighted_sums(right, &members);
            // weight * y + l + r = 0  =>  y = -(l + r) / weight
            for (i, &y) in self.values.iter().enumerate() {
                if out[i] {
                    continue;
                }
                let target = -weight * y;
                if right_sums.iter().any(|r| left_sums.contains(&(target - r))) {
                    out[i] = true;
                }
            }
        }
        out
    }
}

fn weighted_sums(coefs: &[i128], members: &[i128]) -> Vec<i128> {
    let mut sums = vec![0i128];
    for &c in coefs {
        sums = sums
            .iter()
            .flat_map(|s| members.iter().map(move |m| s + c * m))
            .collect();
    }
    sums
}
