//! Linear homogeneous equations `sum a_i x_i = 0`.

pub(crate) mod scaled;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ratcore::{canonical_cmp, Rational};

/// Coefficients `a_1..a_n` of `a_1 x_1 + ... + a_n x_n = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct LinearEquation {
    coefficients: Vec<Rational>,
}

impl TryFrom<Vec<Rational>> for LinearEquation {
    type Error = Error;
    fn try_from(v: Vec<Rational>) -> Result<Self> {
        LinearEquation::new(v)
    }
}

impl From<LinearEquation> for Vec<Rational> {
    fn from(e: LinearEquation) -> Self {
        e.coefficients
    }
}

impl LinearEquation {
    pub fn new(coefficients: Vec<Rational>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::InvalidArity(coefficients.len()));
        }
        if coefficients.iter().any(Rational::is_zero) {
            return Err(Error::InvalidArgument(
                "coefficients must be nonzero".into(),
            ));
        }
        Ok(LinearEquation { coefficients })
    }

    /// `x_0 + q x_1 + ... + q^(n-2) x_(n-2) = q^(n-1) x_(n-1)`, moved to the
    /// `= 0` normal form.
    pub fn e(q: &Rational, n: usize) -> Result<Self> {
        if q.is_zero() || q.abs().is_one() {
            return Err(Error::DegenerateEquation(q.to_string()));
        }
        if n < 2 {
            return Err(Error::InvalidArity(n));
        }
        let mut coefficients: Vec<Rational> = (0..n as i32).map(|i| q.pow(i)).collect();
        let last = coefficients.pop().expect("n >= 2");
        coefficients.push(-last);
        Ok(LinearEquation { coefficients })
    }

    pub fn coefficients(&self) -> &[Rational] {
        &self.coefficients
    }

    pub fn arity(&self) -> usize {
        self.coefficients.len()
    }

    /// `a . x`, for `x` of matching length.
    pub fn evaluate(&self, values: &[Rational]) -> Rational {
        self.coefficients
            .iter()
            .zip(values)
            .map(|(a, x)| a * x)
            .sum()
    }

    pub fn is_solution(&self, values: &[Rational]) -> bool {
        values.len() == self.arity() && self.evaluate(values).is_zero()
    }

    /// Sum of all coefficients; zero exactly when constant tuples solve
    /// the equation.
    pub fn coefficient_sum(&self) -> Rational {
        self.coefficients.iter().sum()
    }

    /// Rado's criterion for a single equation: regular over the integers
    /// iff some nonempty subset of coefficients sums to zero.
    pub fn rado_single_equation_regular(&self) -> bool {
        let n = self.arity();
        (1u64..(1u64 << n)).any(|mask| {
            let s: Rational = (0..n)
                .filter(|i| mask >> i & 1 == 1)
                .map(|i| &self.coefficients[i])
                .sum();
            s.is_zero()
        })
    }

    /// Ratios `r` for which `x` and `r x` can never share a color: every
    /// two-value solution of the equation.
    pub fn forbidden_ratios(&self) -> Vec<ForbiddenRatio> {
        let n = self.arity();
        let mut found: BTreeMap<Rational, ForbiddenRatio> = BTreeMap::new();
        for mask in 1u64..((1u64 << n) - 1) {
            let (mut sa, mut sb) = (Rational::zero(), Rational::zero());
            for (i, a) in self.coefficients.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    sa = sa + a;
                } else {
                    sb = sb + a;
                }
            }
            if sb.is_zero() || sa.is_zero() {
                continue;
            }
            let r = -(sa / sb);
            if r.is_one() {
                continue;
            }
            // positions in `mask` hold x, the rest hold r*x
            let (ratio, base_mask) = if r.abs() < Rational::one() {
                (r.recip().expect("nonzero"), !mask & ((1u64 << n) - 1))
            } else {
                (r, mask)
            };
            found
                .entry(ratio.clone())
                .or_insert_with(|| ForbiddenRatio {
                    ratio,
                    base_positions: (0..n).filter(|i| base_mask >> i & 1 == 1).collect(),
                });
        }
        let mut out: Vec<ForbiddenRatio> = found.into_values().collect();
        out.sort_by(|a, b| canonical_cmp(&a.ratio, &b.ratio));
        out
    }

    /// Every tuple in `set^n` solving the equation, in lexicographic order
    /// of the set sorted by [`canonical_cmp`].
    pub fn enumerate_solutions(&self, set: &[Rational]) -> Vec<SolutionTuple> {
        let sorted = canonical_set(set);
        if sorted.is_empty() {
            return Vec::new();
        }
        scaled::ScaledProblem::new(&self.coefficients, &sorted)
            .solve()
            .into_iter()
            .map(|idx| SolutionTuple {
                values: idx.iter().map(|&i| sorted[i as usize].clone()).collect(),
            })
            .collect()
    }
}

impl fmt::Display for LinearEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.coefficients.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({a})x{}", i + 1)?;
        }
        f.write_str(" = 0")
    }
}

/// Sorted, deduplicated copy of `set` with zero removed.
pub fn canonical_set(set: &[Rational]) -> Vec<Rational> {
    let mut v: Vec<Rational> = set.iter().filter(|r| !r.is_zero()).cloned().collect();
    v.sort_by(canonical_cmp);
    v.dedup();
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolutionTuple {
    pub values: Vec<Rational>,
}

impl SolutionTuple {
    /// Distinct values in canonical order.
    pub fn distinct(&self) -> Vec<Rational> {
        canonical_set(&self.values)
    }

    pub fn scaled(&self, lambda: &Rational) -> SolutionTuple {
        SolutionTuple {
            values: self.values.iter().map(|v| v * lambda).collect(),
        }
    }
}

/// A forbidden ratio together with the partition that forces it: the
/// variables at `base_positions` take `x`, all others take `ratio * x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenRatio {
    pub ratio: Rational,
    pub base_positions: Vec<usize>,
}

impl ForbiddenRatio {
    /// The two-value solution at base value `x`.
    pub fn witness(&self, arity: usize, x: &Rational) -> SolutionTuple {
        let rx = &self.ratio * x;
        SolutionTuple {
            values: (0..arity)
                .map(|i| {
                    if self.base_positions.contains(&i) {
                        x.clone()
                    } else {
                        rx.clone()
                    }
                })
                .collect(),
        }
    }
}

/// The ratios `a = (q+1)/q^2` and `b = q(q-1)` whose lattice `a^m b^n`
/// governs every 3-coloring free of solutions to `E(q,3)`: `x` and
/// `a^m b^n x` share a color iff `3 | m + n`.
pub fn lemma_fr_generators(q: &Rational) -> Result<(Rational, Rational)> {
    if q.is_zero() || q.abs().is_one() {
        return Err(Error::DegenerateEquation(q.to_string()));
    }
    let one = Rational::one();
    let a = (q + &one) / (q * q);
    let b = q * &(q - &one);
    Ok((a, b))
}

/// Parses `E(q,n)` shorthand or a comma-separated coefficient list.
pub fn parse_equation(s: &str) -> Result<LinearEquation> {
    let t = s.trim();
    if let Some(inner) = t.strip_prefix("E(").or_else(|| t.strip_prefix("e(")) {
        let inner = inner
            .strip_suffix(')')
            .ok_or_else(|| Error::Parse(format!("unterminated {t:?}")))?;
        let (q, n) = inner
            .rsplit_once(',')
            .ok_or_else(|| Error::Parse(format!("expected E(q,n), got {t:?}")))?;
        let q: Rational = q.parse()?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad arity in {t:?}")))?;
        return LinearEquation::e(&q, n);
    }
    let coefs = t
        .split(',')
        .map(|c| c.parse::<Rational>())
        .collect::<Result<Vec<_>>>()?;
    LinearEquation::new(coefs)
}
