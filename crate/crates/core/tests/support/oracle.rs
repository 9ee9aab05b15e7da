//! Brute-force reference implementations. Nothing here calls into the
//! engine or the equation solver; every answer comes from exhaustive
//! enumeration over plain rationals.

#![allow(dead_code)]

use std::collections::BTreeSet;

use radocolor_core::Rational;

/// Index sets of all solutions of `sum a_i x_i = 0` with `x_i` in `values`,
/// by trying every tuple.
pub fn solution_sets(coefs: &[Rational], values: &[Rational]) -> BTreeSet<Vec<usize>> {
    let n = coefs.len();
    let mut out = BTreeSet::new();
    let mut idx = vec![0usize; n];
    if values.is_empty() {
        return out;
    }
    loop {
        let sum = idx
            .iter()
            .zip(coefs)
            .fold(Rational::zero(), |acc, (&i, a)| acc + &(a * &values[i]));
        if sum.is_zero() {
            let mut set = idx.clone();
            set.sort_unstable();
            set.dedup();
            out.insert(set);
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            idx[k] += 1;
            if idx[k] < values.len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Relabels colors in order of first appearance.
pub fn canon(colors: &[u32]) -> Vec<u32> {
    let mut seen: Vec<u32> = Vec::new();
    colors
        .iter()
        .map(|c| match seen.iter().position(|s| s == c) {
            Some(i) => i as u32,
            None => {
                seen.push(*c);
                (seen.len() - 1) as u32
            }
        })
        .collect()
}

fn monochromatic(sets: &BTreeSet<Vec<usize>>, colors: &[u32]) -> bool {
    sets.iter()
        .any(|s| s.iter().all(|&i| colors[i] == colors[s[0]]))
}

/// Canonical forms of every `r`-coloring of `values` with no monochromatic
/// solution, found by running through all `r^|values|` assignments.
pub fn colorings(coefs: &[Rational], values: &[Rational], r: u32) -> BTreeSet<Vec<u32>> {
    let sets = solution_sets(coefs, values);
    let n = values.len();
    let mut out = BTreeSet::new();
    let mut colors = vec![0u32; n];
    loop {
        if !monochromatic(&sets, &colors) {
            out.insert(canon(&colors));
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            colors[k] += 1;
            if colors[k] < r {
                break;
            }
            colors[k] = 0;
            k += 1;
        }
    }
}

/// Ratios `t = p/q` with `1 < |t|` and `p, q` up to `bound` such that some
/// solution uses exactly the two values `1` and `t`.
pub fn two_value_ratios(coefs: &[Rational], bound: i64) -> BTreeSet<Rational> {
    let mut out = BTreeSet::new();
    for p in -bound..=bound {
        for q in 1..=bound {
            if p == 0 {
                continue;
            }
            let t = Rational::new(p, q).unwrap();
            if t.abs() <= Rational::one() {
                continue;
            }
            let vals = [Rational::one(), t.clone()];
            let sets = solution_sets(coefs, &vals);
            if sets.contains(&vec![0, 1]) {
                out.insert(t);
            }
        }
    }
    out
}
