use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for the full `u64` range.
pub fn is_prime(n: u64) -> bool {
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Splits a positive integer into prime powers by trial division.
///
/// Factors larger than `u64` are returned in the `Err` arm as the
/// unfactored cofactor; inputs in this crate's domain never reach it.
pub fn factor_natural(n: &BigUint) -> Result<Vec<(u64, u32)>, BigUint> {
    let mut out = Vec::new();
    let mut rest = n.clone();
    if rest.is_zero() {
        return Ok(out);
    }
    let push = |rest: &mut BigUint, out: &mut Vec<(u64, u32)>, p: u64| {
        let bp = BigUint::from(p);
        let mut e = 0;
        loop {
            let (q, r) = rest.div_rem(&bp);
            if !r.is_zero() {
                break;
            }
            *rest = q;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    push(&mut rest, &mut out, 2);
    push(&mut rest, &mut out, 3);
    let mut d: u64 = 5;
    loop {
        if rest.is_one() {
            return Ok(out);
        }
        if let Some(small) = rest.to_u64() {
            if is_prime(small) {
                out.push((small, 1));
                return Ok(out);
            }
            if d.saturating_mul(d) > small {
                out.push((small, 1));
                return Ok(out);
            }
        } else if d > (1u64 << 32) {
            return Err(rest);
        }
        push(&mut rest, &mut out, d);
        push(&mut rest, &mut out, d + 2);
        d += 6;
    }
}

/// `n` as an unsigned magnitude.
pub(crate) fn magnitude(n: &BigInt) -> BigUint {
    n.magnitude().clone()
}

/// Modular inverse of `a` modulo prime `p`, for `a` not divisible by `p`.
pub(crate) fn inverse_mod(a: u64, p: u64) -> u64 {
    pow_mod(a % p, p - 2, p)
}
