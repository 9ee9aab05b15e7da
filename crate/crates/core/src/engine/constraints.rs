use std::collections::HashSet;

use serde::Serialize;

use super::NodeUniverse;
use crate::equations::scaled::ScaledProblem;
use crate::equations::LinearEquation;
use crate::error::Result;

/// A not-all-equal constraint: the distinct nodes of one solution tuple
/// may not all share a color. Two-node constraints are the forbidden-ratio
/// disequalities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    /// Distinct node indices, ascending.
    pub nodes: Vec<u32>,
    /// The first solution tuple (as node indices) with this node set.
    pub witness: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConstraintSet {
    pub constraints: Vec<Constraint>,
    /// Witness tuples whose values are all one node. Any such tuple makes
    /// every coloring fail.
    pub universal: Vec<Vec<u32>>,
}

impl ConstraintSet {
    pub fn disequalities(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(|c| c.nodes.len() == 2)
    }

    pub fn not_all_equal(&self) -> impl Iterator<Item = &Constraint> {
        self.constraints.iter().filter(|c| c.nodes.len() > 2)
    }

    /// Constraint indices touching each node.
    pub fn by_node(&self, nodes: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); nodes];
        for (i, c) in self.constraints.iter().enumerate() {
            for &n in &c.nodes {
                out[n as usize].push(i as u32);
            }
        }
        out
    }
}

/// All constraints induced by solutions of `eq` lying entirely in `universe`.
pub fn derive_constraints(eq: &LinearEquation, universe: &NodeUniverse) -> Result<ConstraintSet> {
    universe.check_support(eq)?;
    let tuples = ScaledProblem::new(eq.coefficients(), universe.values()).solve();
    let mut seen: HashSet<Vec<u32>> = HashSet::new();
    let mut set = ConstraintSet::default();
    for t in tuples {
        let mut nodes = t.clone();
        nodes.sort_unstable();
        nodes.dedup();
        if nodes.len() == 1 {
            if !set.universal.iter().any(|u| u[0] == t[0]) {
                set.universal.push(t);
            }
            continue;
        }
        if seen.insert(nodes.clone()) {
            set.constraints.push(Constraint { nodes, witness: t });
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::generate_universe;
    use crate::ratcore::{rat, Rational};

    fn explicit(vals: &[i64]) -> NodeUniverse {
        let v: Vec<Rational> = vals.iter().map(|&k| rat(k, 1)).collect();
        NodeUniverse::from_values(&v).unwrap()
    }

    fn pairs(u: &NodeUniverse, set: &ConstraintSet) -> Vec<(String, String)> {
        set.disequalities()
            .map(|c| {
                (
                    u.values()[c.nodes[0] as usize].to_string(),
                    u.values()[c.nodes[1] as usize].to_string(),
                )
            })
            .collect()
    }

    #[test]
    fn e23_disequalities_follow_forbidden_ratios() {
        let eq = LinearEquation::e(&rat(2, 1), 3).unwrap();
        let u = explicit(&[1, 2, 3, 4]);
        let set = derive_constraints(&eq, &u).unwrap();
        let mut got = pairs(&u, &set);
        got.sort();
        // oracle: apply {2, 3/2, 4/3} to every ordered pair
        let ratios = [rat(2, 1), rat(3, 2), rat(4, 3)];
        let mut expect = Vec::new();
        for (i, a) in u.values().iter().enumerate() {
            for b in &u.values()[i + 1..] {
                if ratios.iter().any(|r| &(a * r) == b || &(b * r) == a) {
                    let (x, y) = (a.to_string(), b.to_string());
                    let (i1, i2) = (u.index_of(a).unwrap(), u.index_of(b).unwrap());
                    expect.push(if i1 < i2 { (x, y) } else { (y, x) });
                }
            }
        }
        expect.sort();
        assert_eq!(got, expect);
        assert_eq!(got.len(), 4);
    }

    #[test]
    fn table_tuple_present() {
        let eq = LinearEquation::new(vec![rat(1, 1), rat(1, 1), rat(1, 1), rat(-4, 1)]).unwrap();
        let u = explicit(&[1, 3, 8]);
        let set = derive_constraints(&eq, &u).unwrap();
        let want: Vec<u32> = {
            let mut v: Vec<u32> = [1, 3, 8]
                .iter()
                .map(|&k| u.index_of(&rat(k, 1)).unwrap())
                .collect();
            v.sort_unstable();
            v
        };
        let c = set
            .not_all_equal()
            .find(|c| c.nodes == want)
            .expect("(3,1,8,3)");
        let vals: Vec<Rational> = c
            .witness
            .iter()
            .map(|&i| u.values()[i as usize].clone())
            .collect();
        assert!(eq.is_solution(&vals));
    }

    #[test]
    fn zero_sum_equations_are_universally_violated() {
        let eq = LinearEquation::new(vec![rat(1, 1), rat(2, 1), rat(-3, 1)]).unwrap();
        let u = generate_universe(&[2, 3], &[(0, 1), (0, 0)], false).unwrap();
        let set = derive_constraints(&eq, &u).unwrap();
        assert_eq!(set.universal.len(), 2);
        let schur = LinearEquation::new(vec![rat(1, 1), rat(1, 1), rat(-1, 1)]).unwrap();
        assert!(derive_constraints(&schur, &u).unwrap().universal.is_empty());
    }
}
