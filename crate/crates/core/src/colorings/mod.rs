//! Coloring families, monochromatic-solution search over finite sets, and
//! canonical relabeling.

mod spec;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equations::{canonical_set, LinearEquation, SolutionTuple};
use crate::error::Result;
use crate::ratcore::{canonical_cmp, Rational};

pub use spec::{parse_coloring, ColoringSpec, Permutation};

/// A monochromatic solution together with its color.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monochromatic {
    pub tuple: SolutionTuple,
    pub color: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ColoringReport {
    pub monochromatic: Vec<Monochromatic>,
    /// Number of candidate tuples examined: for each color class `S_c`,
    /// `|S_c|^(n-1)` prefixes, each of which fixes the last coordinate.
    pub checked_count: u128,
    pub exhausted_set: Vec<Rational>,
}

impl ColoringReport {
    pub fn is_free(&self) -> bool {
        self.monochromatic.is_empty()
    }
}

/// Scans `set` for solutions of `eq` whose values all share one color.
///
/// A monochromatic tuple lies entirely inside one color class, so each class
/// is solved on its own and the classes are processed in parallel.
pub fn find_monochromatic(
    spec: &ColoringSpec,
    eq: &LinearEquation,
    set: &[Rational],
    limit: usize,
) -> Result<ColoringReport> {
    let set = canonical_set(set);
    let mut classes: BTreeMap<u32, Vec<Rational>> = BTreeMap::new();
    for q in &set {
        classes.entry(spec.eval(q)?).or_default().push(q.clone());
    }
    let arity = eq.arity() as u32;
    let per_class: Vec<(u128, Vec<Monochromatic>)> = classes
        .into_par_iter()
        .map(|(color, members)| {
            let checked = (members.len() as u128).saturating_pow(arity - 1);
            let found = eq
                .enumerate_solutions(&members)
                .into_iter()
                .map(|tuple| Monochromatic { tuple, color })
                .collect();
            (checked, found)
        })
        .collect();
    let checked_count = per_class
        .iter()
        .map(|(c, _)| *c)
        .fold(0u128, u128::saturating_add);
    let mut monochromatic: Vec<Monochromatic> =
        per_class.into_iter().flat_map(|(_, f)| f).collect();
    monochromatic.sort_by(|a, b| cmp_tuples(&a.tuple, &b.tuple));
    monochromatic.truncate(limit);
    Ok(ColoringReport {
        monochromatic,
        checked_count,
        exhausted_set: set,
    })
}

fn cmp_tuples(a: &SolutionTuple, b: &SolutionTuple) -> std::cmp::Ordering {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| canonical_cmp(x, y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Report for one sub-multiset of the coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsetReport {
    pub coefficients: Vec<Rational>,
    pub report: ColoringReport,
}

/// Runs [`find_monochromatic`] for every distinct nonempty sub-multiset of
/// `coefficients`. Singletons are reported empty without scanning.
pub fn strongly_free_check(
    spec: &ColoringSpec,
    coefficients: &[Rational],
    set: &[Rational],
    limit: usize,
) -> Result<Vec<SubsetReport>> {
    if coefficients.is_empty() {
        return Err(crate::Error::InvalidArgument(
            "empty coefficient multiset".into(),
        ));
    }
    if coefficients.iter().any(Rational::is_zero) {
        return Err(crate::Error::InvalidArgument("zero coefficient".into()));
    }
    if coefficients.len() > 20 {
        return Err(crate::Error::InvalidArgument(
            "too many coefficients".into(),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for mask in 1u32..(1 << coefficients.len()) {
        let sub: Vec<Rational> = (0..coefficients.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| coefficients[i].clone())
            .collect();
        let mut key = sub.clone();
        key.sort_by(canonical_cmp);
        if !seen.insert(key) {
            continue;
        }
        let report = if sub.len() == 1 {
            ColoringReport {
                monochromatic: vec![],
                checked_count: 0,
                exhausted_set: canonical_set(set),
            }
        } else {
            find_monochromatic(spec, &LinearEquation::new(sub.clone())?, set, limit)?
        };
        out.push(SubsetReport {
            coefficients: sub,
            report,
        });
    }
    Ok(out)
}

/// Relabels colors by first occurrence.
pub fn canonicalize(colors: &[u32]) -> Vec<u32> {
    let mut map: Vec<(u32, u32)> = Vec::new();
    colors
        .iter()
        .map(|&c| match map.iter().find(|(from, _)| *from == c) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len() as u32;
                map.push((c, to));
                to
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratcore::rat;

    fn constant(domain: &[Rational]) -> ColoringSpec {
        ColoringSpec::Explicit {
            domain: domain.to_vec(),
            colors: vec![0; domain.len()],
        }
    }

    #[test]
    fn constant_coloring_finds_schur_triple() {
        let set = vec![rat(1, 1), rat(2, 1)];
        let eq = LinearEquation::new(vec![rat(1, 1), rat(1, 1), rat(-1, 1)]).unwrap();
        let r = find_monochromatic(&constant(&set), &eq, &set, 10).unwrap();
        assert!(r
            .monochromatic
            .iter()
            .any(|m| m.tuple.values == vec![rat(1, 1), rat(1, 1), rat(2, 1)] && m.color == 0));
        assert_eq!(r.exhausted_set, set);
    }

    #[test]
    fn strong_check_on_constant_coloring() {
        let set = vec![rat(5, 1)];
        let reports =
            strongly_free_check(&constant(&set), &[rat(1, 1), rat(-1, 1)], &set, 10).unwrap();
        assert_eq!(reports.len(), 3);
        assert!(reports[0].report.is_free());
        assert!(reports[1].report.is_free());
        let pair = &reports[2];
        assert_eq!(
            pair.report.monochromatic[0].tuple.values,
            vec![rat(5, 1), rat(5, 1)]
        );
    }

    #[test]
    fn strong_check_dedupes_multisets() {
        let set = vec![rat(1, 1)];
        let reports = strongly_free_check(
            &constant(&set),
            &[rat(1, 1), rat(1, 1), rat(1, 1), rat(-4, 1)],
            &set,
            1,
        )
        .unwrap();
        // {1}, {1,1}, {1,1,1}, {-4}, {1,-4}, {1,1,-4}, {1,1,1,-4}
        assert_eq!(reports.len(), 7);
    }

    #[test]
    fn limit_truncates() {
        let set: Vec<Rational> = (1..=6).map(|k| rat(k, 1)).collect();
        let eq = LinearEquation::new(vec![rat(1, 1), rat(1, 1), rat(-1, 1)]).unwrap();
        let r = find_monochromatic(&constant(&set), &eq, &set, 2).unwrap();
        assert_eq!(r.monochromatic.len(), 2);
        assert_eq!(r.checked_count, 36);
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonicalize(&[2, 2, 0, 1]), vec![0, 0, 1, 2]);
        assert_eq!(canonicalize(&[0, 1, 2]), vec![0, 1, 2]);
        assert_eq!(canonicalize(&[]), Vec::<u32>::new());
    }
}
