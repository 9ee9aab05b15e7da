//! Exact rationals, prime factorization, p-adic valuation and residue,
//! and multiplicative dependence.

mod primes;
mod rational;

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use primes::{factor_natural, is_prime};
pub use rational::{canonical_cmp, rat, Rational};

/// `sign * prod p^e` with every stored exponent nonzero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrimeDecomposition {
    pub sign: i8,
    pub exponents: BTreeMap<u64, i64>,
}

impl PrimeDecomposition {
    pub fn reconstruct(&self) -> Rational {
        let mut num = BigInt::from(self.sign);
        let mut den = BigInt::one();
        for (&p, &e) in &self.exponents {
            let pp = num_traits::pow(BigInt::from(p), e.unsigned_abs() as usize);
            if e > 0 {
                num *= pp;
            } else {
                den *= pp;
            }
        }
        Rational::new(num, den).expect("positive denominator")
    }

    pub fn exponent(&self, p: u64) -> i64 {
        self.exponents.get(&p).copied().unwrap_or(0)
    }
}

fn check_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::InvalidPrime(p))
    }
}

fn strip(n: &BigUint, p: &BigUint) -> (BigUint, i64) {
    let mut rest = n.clone();
    let mut e = 0;
    loop {
        let (q, r) = rest.div_rem(p);
        if !r.is_zero() {
            return (rest, e);
        }
        rest = q;
        e += 1;
    }
}

/// p-adic valuation: the exponent of `p` in `q`.
pub fn v_p(q: &Rational, p: u64) -> Result<i64> {
    check_prime(p)?;
    if q.is_zero() {
        return Err(Error::UndefinedValuation);
    }
    let bp = BigUint::from(p);
    let (_, en) = strip(q.numer().magnitude(), &bp);
    let (_, ed) = strip(q.denom().magnitude(), &bp);
    Ok(en - ed)
}

/// Unit residue of the p-free part of `q`, in `1..p`.
pub fn w_p(q: &Rational, p: u64) -> Result<u64> {
    check_prime(p)?;
    if q.is_zero() {
        return Err(Error::UndefinedValuation);
    }
    let bp = BigUint::from(p);
    let (a, _) = strip(q.numer().magnitude(), &bp);
    let (b, _) = strip(q.denom().magnitude(), &bp);
    let a = (a % &bp).to_u64().expect("residue below p");
    let b = (b % &bp).to_u64().expect("residue below p");
    let a = if q.is_negative() { (p - a) % p } else { a };
    let inv = primes::inverse_mod(b, p);
    Ok(((a as u128 * inv as u128) % p as u128) as u64)
}

/// Exact prime decomposition of a nonzero rational.
pub fn factor(q: &Rational) -> Result<PrimeDecomposition> {
    if q.is_zero() {
        return Err(Error::UndefinedValuation);
    }
    let unsupported =
        |rest: BigUint| Error::InvalidArgument(format!("cofactor {rest} too large to factor"));
    let mut exponents = BTreeMap::new();
    for (p, e) in factor_natural(&primes::magnitude(q.numer())).map_err(unsupported)? {
        exponents.insert(p, e as i64);
    }
    for (p, e) in factor_natural(&primes::magnitude(q.denom())).map_err(unsupported)? {
        exponents.insert(p, -(e as i64));
    }
    Ok(PrimeDecomposition {
        sign: if q.is_negative() { -1 } else { 1 },
        exponents,
    })
}

/// Finds the smallest nonzero `(m, n)` with `a^m = b^n` and `m > 0`, or
/// `None` when no such pair exists (then `log_a b` is irrational).
pub fn multiplicative_dependence(a: &Rational, b: &Rational) -> Result<Option<(i64, i64)>> {
    for x in [a, b] {
        if !x.is_positive() || x.is_one() {
            return Err(Error::InvalidArgument(format!(
                "{x} must be positive and different from 1"
            )));
        }
    }
    let fa = factor(a)?;
    let fb = factor(b)?;
    let primes: std::collections::BTreeSet<u64> = fa
        .exponents
        .keys()
        .chain(fb.exponents.keys())
        .copied()
        .collect();
    // a^m = b^n  <=>  m * e_a = n * e_b componentwise
    let pivot = *fa
        .exponents
        .keys()
        .next()
        .expect("a != 1 has a prime factor");
    let (ea, eb) = (fa.exponent(pivot), fb.exponent(pivot));
    if eb == 0 {
        return Ok(None);
    }
    let g = ea.gcd(&eb);
    let (mut m, mut n) = (eb / g, ea / g);
    if m < 0 {
        m = -m;
        n = -n;
    }
    let proportional = primes
        .iter()
        .all(|&p| m * fa.exponent(p) == n * fb.exponent(p));
    Ok(proportional.then_some((m, n)))
}

/// For terms summing to zero, checks that the two smallest p-adic
/// valuations coincide.
pub fn validate_zero_sum_valuations(terms: &[Rational], p: u64) -> Result<bool> {
    check_prime(p)?;
    if terms.is_empty() {
        return Err(Error::PreconditionViolation("empty term list".into()));
    }
    if terms.iter().any(Rational::is_zero) {
        return Err(Error::PreconditionViolation("zero term".into()));
    }
    let total: Rational = terms.iter().sum();
    if !total.is_zero() {
        return Err(Error::PreconditionViolation(format!(
            "terms sum to {total}, not 0"
        )));
    }
    let mut vals = terms
        .iter()
        .map(|t| v_p(t, p))
        .collect::<Result<Vec<_>>>()?;
    vals.sort_unstable();
    Ok(vals.len() >= 2 && vals[0] == vals[1])
}

/// Floor division rounding toward negative infinity.
pub fn floor_div(a: i64, b: i64) -> i64 {
    Integer::div_floor(&a, &b)
}
