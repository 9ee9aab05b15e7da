//! Integer-scaled solution search shared by [`super::enumerate_solutions`]
//! and the engine's constraint derivation.
//!
//! Every value set and coefficient list is first cleared of denominators,
//! so `sum a_i x_i = 0` becomes an identity between integers. When the
//! scaled magnitudes fit comfortably in `i128` the search runs on machine
//! integers, otherwise on `BigInt`. Both paths are exact.

use std::collections::HashMap;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::ratcore::Rational;

/// Values and coefficients cleared of denominators.
#[derive(Debug, Clone)]
pub(crate) struct ScaledProblem {
    coefs: Vec<BigInt>,
    values: Vec<BigInt>,
}

impl ScaledProblem {
    pub(crate) fn new(coefs: &[Rational], values: &[Rational]) -> Self {
        let lcm = |items: &[Rational]| {
            items
                .iter()
                .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
        };
        let lc = lcm(coefs);
        let lv = lcm(values);
        let scale = |items: &[Rational], l: &BigInt| {
            items
                .iter()
                .map(|r| r.numer() * (l / r.denom()))
                .collect::<Vec<_>>()
        };
        ScaledProblem {
            coefs: scale(coefs, &lc),
            values: scale(values, &lv),
        }
    }

    fn fits_i128(&self) -> bool {
        let max = |v: &[BigInt]| v.iter().map(|x| x.abs()).max().unwrap_or_default();
        let bound = max(&self.coefs) * max(&self.values) * BigInt::from(self.coefs.len().max(1));
        bound.bits() < 120
    }

    /// All index tuples `t` with `sum coefs[k] * values[t[k]] = 0`, in
    /// lexicographic order.
    pub(crate) fn solve(&self) -> Vec<Vec<u32>> {
        if self.values.is_empty() || self.coefs.is_empty() {
            return Vec::new();
        }
        let mut out = if self.fits_i128() {
            let c: Vec<i128> = self.coefs.iter().map(|x| x.to_i128().unwrap()).collect();
            let v: Vec<i128> = self.values.iter().map(|x| x.to_i128().unwrap()).collect();
            meet_in_middle(&c, &v)
        } else {
            meet_in_middle(&self.coefs, &self.values)
        };
        out.sort_unstable();
        out
    }
}

/// Calls `f(indices, partial_sum)` for every tuple over `values` weighted by `coefs`.
fn for_each_tuple<T, F>(coefs: &[T], values: &[T], f: &mut F)
where
    T: Integer + Signed + Clone,
    F: FnMut(&[u32], &T),
{
    fn rec<T, F>(coefs: &[T], values: &[T], idx: &mut Vec<u32>, acc: T, f: &mut F)
    where
        T: Integer + Signed + Clone,
        F: FnMut(&[u32], &T),
    {
        let k = idx.len();
        if k == coefs.len() {
            f(idx, &acc);
            return;
        }
        for (i, v) in values.iter().enumerate() {
            idx.push(i as u32);
            rec(
                coefs,
                values,
                idx,
                acc.clone() + coefs[k].clone() * v.clone(),
                f,
            );
            idx.pop();
        }
    }
    let mut idx = Vec::with_capacity(coefs.len());
    rec(coefs, values, &mut idx, T::zero(), f);
}

fn meet_in_middle<T>(coefs: &[T], values: &[T]) -> Vec<Vec<u32>>
where
    T: Integer + Signed + Clone + Hash,
{
    let n = coefs.len();
    let split = n / 2;
    let (left_c, right_c) = coefs.split_at(split);
    let mut left: HashMap<T, Vec<Vec<u32>>> = HashMap::new();
    for_each_tuple(left_c, values, &mut |idx, s| {
        left.entry(s.clone()).or_default().push(idx.to_vec());
    });
    let mut out = Vec::new();
    for_each_tuple(right_c, values, &mut |idx, s| {
        let key = -s.clone();
        if let Some(prefixes) = left.get(&key) {
            for p in prefixes {
                let mut t = p.clone();
                t.extend_from_slice(idx);
                out.push(t);
            }
        }
    });
    out
}
