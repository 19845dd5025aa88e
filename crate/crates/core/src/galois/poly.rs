//! Dense polynomials over a table-backed subfield, used only while building
//! field contexts.
//!
//! Coefficients are stored low degree first and kept trimmed, so the zero
//! polynomial is the empty vector.

use super::field::Tables;

pub(crate) type Poly = Vec<u32>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

pub(crate) fn degree(a: &[u32]) -> Option<usize> {
    a.iter().rposition(|&c| c != 0)
}

pub(crate) fn rem(f: &Tables, a: &[u32], m: &[u32]) -> Poly {
    let dm = degree(m).expect("division by the zero polynomial");
    let lead_inv = f.inv(m[dm]);
    let mut r: Poly = trim(a.to_vec());
    while let Some(dr) = degree(&r) {
        if dr < dm {
            break;
        }
        let factor = f.mul(r[dr], lead_inv);
        let shift = dr - dm;
        for (i, &c) in m.iter().enumerate().take(dm + 1) {
            let t = f.mul(factor, c);
            r[i + shift] = f.sub(r[i + shift], t);
        }
        r = trim(r);
    }
    r
}

pub(crate) fn mul(f: &Tables, a: &[u32], b: &[u32]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = f.add(out[i + j], f.mul(x, y));
        }
    }
    trim(out)
}

pub(crate) fn mulmod(f: &Tables, a: &[u32], b: &[u32], m: &[u32]) -> Poly {
    rem(f, &mul(f, a, b), m)
}

pub(crate) fn powmod(f: &Tables, base: &[u32], mut exp: u64, m: &[u32]) -> Poly {
    let mut result: Poly = rem(f, &[1], m);
    let mut b = rem(f, base, m);
    while exp > 0 {
        if exp & 1 == 1 {
            result = mulmod(f, &result, &b, m);
        }
        b = mulmod(f, &b, &b, m);
        exp >>= 1;
    }
    result
}

/// Encodes a polynomial of degree < `len` as a base-`radix` integer.
pub(crate) fn encode(a: &[u32], radix: u32) -> u32 {
    a.iter().rev().fold(0, |acc, &c| acc * radix + c)
}

pub(crate) fn decode(mut v: u32, radix: u32, len: usize) -> Poly {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(v % radix);
        v /= radix;
    }
    trim(out)
}

/// Trial division by every monic polynomial of degree at most half.
pub(crate) fn is_irreducible(f: &Tables, a: &[u32]) -> bool {
    let d = match degree(a) {
        Some(d) if d >= 1 => d,
        _ => return false,
    };
    let s = f.order();
    for k in 1..=d / 2 {
        let count = (s as u64).pow(k as u32);
        for low in 0..count {
            let mut g = decode(low as u32, s, k);
            g.resize(k, 0);
            g.push(1);
            if rem(f, a, &g).is_empty() {
                return false;
            }
        }
    }
    true
}

pub(crate) fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            while n % d == 0 {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// True when `a` is irreducible and `x` generates the multiplicative group of
/// the quotient field.
pub(crate) fn is_primitive(f: &Tables, a: &[u32]) -> bool {
    if !is_irreducible(f, a) {
        return false;
    }
    let d = degree(a).unwrap_or(0) as u32;
    let group = (f.order() as u64).pow(d) - 1;
    let x: Poly = vec![0, 1];
    if powmod(f, &x, group, a) != rem(f, &[1], a) {
        return false;
    }
    prime_factors(group)
        .into_iter()
        .all(|l| powmod(f, &x, group / l, a) != rem(f, &[1], a))
}

/// Lexicographically first monic primitive polynomial of degree `d`.
pub(crate) fn first_primitive(f: &Tables, d: usize) -> Option<Poly> {
    let s = f.order() as u64;
    let count = s.checked_pow(d as u32)?;
    (0..count).find_map(|low| {
        let mut g = decode(low as u32, s as u32, d);
        g.resize(d, 0);
        g.push(1);
        is_primitive(f, &g).then_some(g)
    })
}

/// Conway polynomials over prime fields, low degree first.
const CONWAY: &[(u32, &[u32])] = &[
    (2, &[1, 1]),
    (2, &[1, 1, 1]),
    (2, &[1, 1, 0, 1]),
    (2, &[1, 1, 0, 0, 1]),
    (2, &[1, 0, 1, 0, 0, 1]),
    (2, &[1, 1, 0, 1, 1, 0, 1]),
    (2, &[1, 1, 0, 0, 0, 0, 0, 1]),
    (2, &[1, 0, 1, 1, 1, 0, 0, 0, 1]),
    (2, &[1, 0, 0, 0, 1, 0, 0, 0, 0, 1]),
    (2, &[1, 1, 1, 1, 0, 1, 1, 0, 0, 0, 1]),
    (2, &[1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    (2, &[1, 1, 0, 1, 0, 1, 1, 1, 0, 0, 0, 0, 1]),
    (2, &[1, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    (2, &[1, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0, 0, 0, 0, 1]),
    (2, &[1, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    (2, &[1, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1]),
    (3, &[1, 1]),
    (3, &[2, 2, 1]),
    (3, &[1, 2, 0, 1]),
    (3, &[2, 0, 0, 2, 1]),
    (3, &[1, 2, 0, 0, 0, 1]),
    (3, &[2, 2, 1, 0, 2, 0, 1]),
    (3, &[1, 0, 2, 0, 0, 0, 0, 1]),
    (3, &[2, 2, 2, 0, 1, 2, 0, 0, 1]),
    (5, &[3, 1]),
    (5, &[2, 4, 1]),
    (5, &[3, 3, 0, 1]),
    (5, &[2, 4, 4, 0, 1]),
    (5, &[3, 4, 0, 0, 0, 1]),
    (7, &[4, 1]),
    (7, &[3, 6, 1]),
    (7, &[4, 0, 6, 1]),
    (7, &[3, 4, 5, 0, 1]),
];

pub(crate) fn conway(p: u32, degree: usize) -> Option<Poly> {
    CONWAY
        .iter()
        .find(|(prime, c)| *prime == p && c.len() == degree + 1)
        .map(|(_, c)| c.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conway_entries_are_primitive() {
        for &(p, coeffs) in CONWAY {
            let f = Tables::prime(p);
            assert!(is_primitive(&f, coeffs), "p={p} {coeffs:?}");
        }
    }

    #[test]
    fn reducible_polynomials_are_rejected() {
        let f = Tables::prime(2);
        // x^2 + 1 = (x + 1)^2 over GF(2)
        assert!(!is_irreducible(&f, &[1, 0, 1]));
        // x^4 + x^3 + x^2 + x + 1 is irreducible but x has order 5
        assert!(is_irreducible(&f, &[1, 1, 1, 1, 1]));
        assert!(!is_primitive(&f, &[1, 1, 1, 1, 1]));
    }

    #[test]
    fn first_primitive_matches_small_known_cases() {
        let f = Tables::prime(2);
        assert_eq!(first_primitive(&f, 3), Some(vec![1, 1, 0, 1]));
        let f3 = Tables::prime(3);
        assert_eq!(first_primitive(&f3, 2), Some(vec![2, 1, 1]));
    }
}
