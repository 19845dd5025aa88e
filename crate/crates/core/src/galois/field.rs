use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::poly;
use crate::error::{Error, Result};

/// Largest supported field order `q^m`.
pub const MAX_FIELD_ORDER: u32 = 1 << 16;

/// Log/antilog tables of one finite field.
///
/// Elements are integers whose base-`p` digits are their coordinates over the
/// prime field, so addition never needs a table.
#[derive(Clone, PartialEq, Eq)]
pub(crate) struct Tables {
    order: u32,
    p: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Tables {
    /// Integers modulo the prime `p`, generated by the least primitive root.
    pub(crate) fn prime(p: u32) -> Tables {
        let group = p as u64 - 1;
        let factors = poly::prime_factors(group);
        let pow = |b: u64, mut e: u64| {
            let (mut r, mut b) = (1u64, b % p as u64);
            while e > 0 {
                if e & 1 == 1 {
                    r = r * b % p as u64;
                }
                b = b * b % p as u64;
                e >>= 1;
            }
            r
        };
        let g = if p == 2 {
            1
        } else {
            (2..p as u64)
                .find(|&g| factors.iter().all(|&l| pow(g, group / l) != 1))
                .expect("every prime field has a primitive root")
        };
        let mut powers = Vec::with_capacity(group as usize);
        let mut x = 1u64;
        for _ in 0..group {
            powers.push(x as u32);
            x = x * g % p as u64;
        }
        Tables::from_powers(p, p, powers)
    }

    fn from_powers(order: u32, p: u32, exp: Vec<u32>) -> Tables {
        let mut log = vec![0u32; order as usize];
        for (i, &v) in exp.iter().enumerate() {
            log[v as usize] = i as u32;
        }
        Tables { order, p, exp, log }
    }

    #[inline]
    pub(crate) fn order(&self) -> u32 {
        self.order
    }

    #[inline]
    pub(crate) fn add(&self, a: u32, b: u32) -> u32 {
        if self.p == 2 {
            return a ^ b;
        }
        let p = self.p;
        let (mut a, mut b) = (a, b);
        let (mut out, mut place) = (0u32, 1u32);
        while a > 0 || b > 0 {
            let d = (a % p + b % p) % p;
            out += d * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }

    #[inline]
    pub(crate) fn neg(&self, a: u32) -> u32 {
        if self.p == 2 {
            return a;
        }
        let p = self.p;
        let mut a = a;
        let (mut out, mut place) = (0u32, 1u32);
        while a > 0 {
            let d = (p - a % p) % p;
            out += d * place;
            place *= p;
            a /= p;
        }
        out
    }

    #[inline]
    pub(crate) fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub(crate) fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let group = self.order - 1;
        let s = self.log[a as usize] + self.log[b as usize];
        self.exp[(if s >= group { s - group } else { s }) as usize]
    }

    #[inline]
    pub(crate) fn inv(&self, a: u32) -> u32 {
        debug_assert!(a != 0);
        let group = self.order - 1;
        let l = self.log[a as usize];
        self.exp[((group - l) % group) as usize]
    }

    fn pow_gen(&self, i: u64) -> u32 {
        self.exp[(i % (self.order as u64 - 1)) as usize]
    }
}

/// Splits `q` into `(p, e)` with `q = p^e`, or `None` if `q` is not a prime power.
pub fn prime_power(q: u32) -> Option<(u32, u32)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|d| q % d == 0)?;
    let (mut rest, mut e) = (q, 0);
    while rest % p == 0 {
        rest /= p;
        e += 1;
    }
    (rest == 1).then_some((p, e))
}

/// Context for arithmetic in `GF(q^m)` viewed as an `m`-dimensional space over
/// `GF(q)` with a fixed ordered basis.
///
/// Extension elements are integers `sum_j c_j q^j` where `c_j` are the
/// coordinates with respect to the basis; `GF(q)` elements are in turn
/// encoded by their polynomial coordinates over `GF(p)`. With `m = 1` and the
/// default basis the context is `GF(q)` itself.
pub struct FieldCtx {
    p: u32,
    e: u32,
    q: u32,
    m: u32,
    base_modulus: Vec<u32>,
    modulus: Vec<u32>,
    basis: Vec<u32>,
    default_basis: bool,
    base: Tables,
    ext: Tables,
    one: u32,
    base_ctx: Option<Arc<FieldCtx>>,
}

impl FieldCtx {
    /// `GF(q^m)` with the built-in modulus and the polynomial basis `1, x, x^2, ...`.
    pub fn new(q: u32, m: u32) -> Result<Arc<FieldCtx>> {
        Self::build(q, m, None, None)
    }

    /// `GF(q^m)` with an explicit ordered basis, each element given in its
    /// polynomial-basis encoding.
    pub fn with_basis(q: u32, m: u32, basis: Vec<u32>) -> Result<Arc<FieldCtx>> {
        Self::build(q, m, None, Some(basis))
    }

    /// Fully explicit context: monic `modulus` over `GF(q)` (low degree first)
    /// and optional basis.
    pub fn with_modulus(
        q: u32,
        m: u32,
        modulus: Vec<u32>,
        basis: Option<Vec<u32>>,
    ) -> Result<Arc<FieldCtx>> {
        Self::build(q, m, Some(modulus), basis)
    }

    fn build(
        q: u32,
        m: u32,
        modulus: Option<Vec<u32>>,
        basis: Option<Vec<u32>>,
    ) -> Result<Arc<FieldCtx>> {
        let (p, e) = prime_power(q)
            .ok_or_else(|| Error::Precondition(format!("q = {q} is not a prime power")))?;
        if m == 0 {
            return Err(Error::Precondition("extension degree must be at least 1".into()));
        }
        let order = (q as u64)
            .checked_pow(m)
            .filter(|&o| o <= MAX_FIELD_ORDER as u64)
            .ok_or_else(|| {
                Error::Precondition(format!("field order {q}^{m} exceeds 2^16"))
            })? as u32;

        let prime = Tables::prime(p);
        let (base, base_modulus) = if e == 1 {
            let g = prime.pow_gen(1);
            (prime.clone(), vec![prime.neg(g), 1])
        } else {
            let f = poly::conway(p, e as usize)
                .or_else(|| poly::first_primitive(&prime, e as usize))
                .ok_or_else(|| Error::Precondition(format!("no modulus for GF({q})")))?;
            (extension_tables(&prime, &f, None)?, f)
        };

        let explicit_modulus = modulus.is_some();
        let modulus = match modulus {
            Some(f) => {
                if f.len() != m as usize + 1 || f.last() != Some(&1) || f.iter().any(|&c| c >= q)
                {
                    return Err(Error::Precondition(format!(
                        "modulus must be monic of degree {m} over GF({q})"
                    )));
                }
                if !poly::is_irreducible(&base, &f) {
                    return Err(Error::Precondition("modulus is reducible".into()));
                }
                f
            }
            None if m == 1 => vec![base.neg(base.pow_gen(1)), 1],
            None => (if e == 1 { poly::conway(p, m as usize) } else { None })
                .or_else(|| poly::first_primitive(&base, m as usize))
                .ok_or_else(|| Error::Precondition(format!("no modulus for GF({q}^{m})")))?,
        };

        let poly_tables = if m == 1 {
            base.clone()
        } else {
            extension_tables(&base, &modulus, None)?
        };

        let poly_basis: Vec<u32> = (0..m).map(|j| q.pow(j)).collect();
        let basis = basis.unwrap_or_else(|| poly_basis.clone());
        if basis.len() != m as usize || basis.iter().any(|&b| b >= order) {
            return Err(Error::Precondition(format!(
                "basis must list {m} elements of GF({q}^{m})"
            )));
        }
        let default_basis = basis == poly_basis;

        // coordinates -> polynomial encoding, checked to be a bijection
        let ext = if default_basis {
            poly_tables
        } else {
            let mut from_poly = vec![u32::MAX; order as usize];
            for coords in 0..order {
                let mut acc = 0u32;
                let mut c = coords;
                for &alpha in &basis {
                    let digit = c % q;
                    c /= q;
                    acc = poly_tables.add(acc, scale_coords(&base, q, m, digit, alpha));
                }
                if from_poly[acc as usize] != u32::MAX {
                    return Err(Error::Precondition(
                        "basis elements are linearly dependent over GF(q)".into(),
                    ));
                }
                from_poly[acc as usize] = coords;
            }
            let exp = poly_tables
                .exp
                .iter()
                .map(|&v| from_poly[v as usize])
                .collect();
            Tables::from_powers(order, p, exp)
        };
        let one = if default_basis {
            1
        } else {
            ext.exp[0]
        };

        let base_ctx = if m == 1 && default_basis && !explicit_modulus {
            None
        } else {
            Some(FieldCtx::new(q, 1)?)
        };

        Ok(Arc::new(FieldCtx {
            p,
            e,
            q,
            m,
            base_modulus,
            modulus,
            basis,
            default_basis,
            base,
            ext,
            one,
            base_ctx,
        }))
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    /// Degree of `GF(q)` over its prime field.
    pub fn base_degree(&self) -> u32 {
        self.e
    }

    /// Number of elements `q^m`.
    pub fn order(&self) -> u32 {
        self.ext.order
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn base_modulus(&self) -> &[u32] {
        &self.base_modulus
    }

    /// Basis elements in polynomial-basis encoding.
    pub fn basis(&self) -> &[u32] {
        &self.basis
    }

    pub fn has_default_basis(&self) -> bool {
        self.default_basis
    }

    /// The base field `GF(q)` as its own context.
    pub fn base_ctx(self: &Arc<Self>) -> Arc<FieldCtx> {
        match &self.base_ctx {
            Some(b) => b.clone(),
            None => self.clone(),
        }
    }

    /// True when `self` is exactly `GF(q)` in its standard encoding.
    pub fn is_base(&self) -> bool {
        self.base_ctx.is_none()
    }

    pub fn same_field(&self, other: &FieldCtx) -> bool {
        std::ptr::eq(self, other) || self == other
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        self.ext.add(a, b)
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.ext.sub(a, b)
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        self.ext.neg(a)
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        self.ext.mul(a, b)
    }

    /// Multiplicative inverse; `None` for zero.
    #[inline]
    pub fn inv(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.ext.inv(a))
    }

    pub fn one(&self) -> u32 {
        self.one
    }

    /// `g^i` for the context's fixed primitive element `g`.
    pub fn pow_primitive(&self, i: u64) -> u32 {
        self.ext.pow_gen(i)
    }

    /// Discrete logarithm base the primitive element.
    pub fn log(&self, a: u32) -> Option<u32> {
        (a != 0).then(|| self.ext.log[a as usize])
    }

    /// Product of a base-field scalar and an extension element.
    #[inline]
    pub fn scale_base(&self, lambda: u32, a: u32) -> u32 {
        if self.m == 1 {
            return self.base.mul(lambda, a);
        }
        scale_coords(&self.base, self.q, self.m, lambda, a)
    }

    /// Image of `lambda` under the inclusion `GF(q) -> GF(q^m)`.
    pub fn embed_base(&self, lambda: u32) -> u32 {
        self.scale_base(lambda, self.one)
    }

    /// If `a` lies in the subfield `GF(q)`, returns it in base encoding.
    pub fn restrict_to_base(&self, a: u32) -> Option<u32> {
        (0..self.q).find(|&l| self.embed_base(l) == a)
    }

    /// Coordinates of `a` with respect to the basis.
    pub fn coords(&self, a: u32) -> Vec<u32> {
        let mut a = a;
        (0..self.m)
            .map(|_| {
                let d = a % self.q;
                a /= self.q;
                d
            })
            .collect()
    }

    pub fn from_coords(&self, coords: &[u32]) -> u32 {
        coords.iter().rev().fold(0, |acc, &c| acc * self.q + c)
    }

    pub(crate) fn base_tables(&self) -> &Tables {
        &self.base
    }
}

fn scale_coords(base: &Tables, q: u32, m: u32, lambda: u32, a: u32) -> u32 {
    if lambda == 0 || a == 0 {
        return 0;
    }
    let (mut a, mut out, mut place) = (a, 0u32, 1u32);
    for _ in 0..m {
        out += base.mul(lambda, a % q) * place;
        a /= q;
        place *= q;
    }
    out
}

/// Tables of `sub[x]/(f)` in polynomial encoding, generated by `gen` (or by
/// `x`, falling back to the first generator found).
fn extension_tables(sub: &Tables, f: &[u32], gen: Option<&[u32]>) -> Result<Tables> {
    let d = poly::degree(f).unwrap_or(0);
    let s = sub.order();
    let order = s.pow(d as u32);
    let group = order as usize - 1;
    let try_gen = |g: &[u32]| -> Option<Vec<u32>> {
        let mut powers = Vec::with_capacity(group);
        let mut seen = vec![false; order as usize];
        let mut x: Vec<u32> = vec![1];
        for _ in 0..group {
            let v = poly::encode(&x, s);
            if v == 0 || seen[v as usize] {
                return None;
            }
            seen[v as usize] = true;
            powers.push(v);
            x = poly::mulmod(sub, &x, g, f);
        }
        (x == [1]).then_some(powers)
    };
    let powers = match gen {
        Some(g) => try_gen(g),
        None => try_gen(&[0, 1]).or_else(|| {
            (2..order).find_map(|v| try_gen(&poly::decode(v, s, d)))
        }),
    };
    let powers = powers.ok_or_else(|| Error::Precondition("modulus is not irreducible".into()))?;
    Ok(Tables::from_powers(order, sub.p, powers))
}

impl PartialEq for FieldCtx {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
            && self.m == other.m
            && self.base_modulus == other.base_modulus
            && self.modulus == other.modulus
            && self.basis == other.basis
    }
}

impl Eq for FieldCtx {}

impl fmt::Debug for FieldCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldCtx")
            .field("q", &self.q)
            .field("m", &self.m)
            .field("modulus", &self.modulus)
            .field("basis", &self.basis)
            .finish()
    }
}

/// Binary and unary field operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldOp {
    Add,
    Mul,
    Inv,
    Neg,
}

/// An element of `GF(q^m)` tied to its context.
#[derive(Clone, Debug)]
pub struct FieldElement {
    ctx: Arc<FieldCtx>,
    value: u32,
}

impl FieldElement {
    pub fn new(ctx: &Arc<FieldCtx>, value: u32) -> Result<Self> {
        if value >= ctx.order() {
            return Err(Error::Precondition(format!(
                "{value} is not an element of GF({}^{})",
                ctx.q, ctx.m
            )));
        }
        Ok(FieldElement {
            ctx: ctx.clone(),
            value,
        })
    }

    pub fn from_coords(ctx: &Arc<FieldCtx>, coords: &[u32]) -> Result<Self> {
        if coords.len() != ctx.m as usize || coords.iter().any(|&c| c >= ctx.q) {
            return Err(Error::Precondition("invalid coordinate vector".into()));
        }
        Self::new(ctx, ctx.from_coords(coords))
    }

    pub fn zero(ctx: &Arc<FieldCtx>) -> Self {
        FieldElement {
            ctx: ctx.clone(),
            value: 0,
        }
    }

    pub fn one(ctx: &Arc<FieldCtx>) -> Self {
        FieldElement {
            ctx: ctx.clone(),
            value: ctx.one,
        }
    }

    pub fn value(&self) -> u32 {
        self.value
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn coordinates(&self) -> Vec<u32> {
        self.ctx.coords(self.value)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    fn with(&self, value: u32) -> Self {
        FieldElement {
            ctx: self.ctx.clone(),
            value,
        }
    }

    fn check(&self, other: &Self) -> Result<()> {
        if self.ctx.same_field(&other.ctx) {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.ctx.add(self.value, other.value)))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.ctx.sub(self.value, other.value)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check(other)?;
        Ok(self.with(self.ctx.mul(self.value, other.value)))
    }

    pub fn neg(&self) -> Self {
        self.with(self.ctx.neg(self.value))
    }

    pub fn inv(&self) -> Result<Self> {
        self.ctx
            .inv(self.value)
            .map(|v| self.with(v))
            .ok_or(Error::DivisionByZero)
    }

    /// Dispatches `op`; unary operations ignore `other`.
    pub fn apply(&self, op: FieldOp, other: Option<&Self>) -> Result<Self> {
        match op {
            FieldOp::Neg => Ok(self.neg()),
            FieldOp::Inv => self.inv(),
            FieldOp::Add | FieldOp::Mul => {
                let b = other.ok_or_else(|| {
                    Error::Precondition("binary operation needs a second operand".into())
                })?;
                if op == FieldOp::Add {
                    self.add(b)
                } else {
                    self.mul(b)
                }
            }
        }
    }
}

impl PartialEq for FieldElement {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value && self.ctx.same_field(&other.ctx)
    }
}

impl Eq for FieldElement {}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly_mul_reduce_gf2(a: u32, b: u32, modulus: u32, degree: u32) -> u32 {
        // schoolbook carry-less product, then reduction: the independent oracle
        let mut prod = 0u32;
        for i in 0..16 {
            if b >> i & 1 == 1 {
                prod ^= a << i;
            }
        }
        for i in (degree..32).rev() {
            if prod >> i & 1 == 1 {
                prod ^= modulus << (i - degree);
            }
        }
        prod
    }

    #[test]
    fn gf2_characteristic_two() {
        let ctx = FieldCtx::new(2, 1).unwrap();
        let one = FieldElement::one(&ctx);
        assert!(one.add(&one).unwrap().is_zero());
    }

    #[test]
    fn gf4_x_squared_is_x_plus_one() {
        let ctx = FieldCtx::new(2, 2).unwrap();
        assert_eq!(ctx.modulus(), &[1, 1, 1]);
        let x = FieldElement::new(&ctx, 0b10).unwrap();
        assert_eq!(x.mul(&x).unwrap().value(), 0b11);
    }

    #[test]
    fn gf256_matches_carry_less_oracle() {
        let ctx = FieldCtx::new(2, 8).unwrap();
        // x^8 + x^4 + x^3 + x^2 + 1
        let modulus = 0b1_0001_1101;
        for a in (0..256).step_by(7) {
            for b in 0..256 {
                assert_eq!(ctx.mul(a, b), poly_mul_reduce_gf2(a, b, modulus, 8));
            }
        }
    }

    #[test]
    fn inverses_in_several_fields() {
        for (q, m) in [(2, 1), (3, 1), (4, 1), (2, 4), (3, 2), (9, 2), (5, 2), (7, 1), (8, 2)] {
            let ctx = FieldCtx::new(q, m).unwrap();
            for a in 1..ctx.order() {
                let inv = ctx.inv(a).unwrap();
                assert_eq!(ctx.mul(a, inv), ctx.one(), "q={q} m={m} a={a}");
            }
            assert_eq!(ctx.inv(0), None);
        }
    }

    #[test]
    fn field_axioms_gf9_over_gf3() {
        let ctx = FieldCtx::new(3, 2).unwrap();
        let n = ctx.order();
        for a in 0..n {
            assert_eq!(ctx.add(a, ctx.neg(a)), 0);
            for b in 0..n {
                assert_eq!(ctx.add(a, b), ctx.add(b, a));
                assert_eq!(ctx.mul(a, b), ctx.mul(b, a));
                for c in [0, 1, 4, 8] {
                    assert_eq!(
                        ctx.mul(a, ctx.add(b, c)),
                        ctx.add(ctx.mul(a, b), ctx.mul(a, c))
                    );
                    assert_eq!(ctx.mul(ctx.mul(a, b), c), ctx.mul(a, ctx.mul(b, c)));
                }
            }
        }
    }

    #[test]
    fn composite_base_field_extensions() {
        // GF(16) as GF(4)^2 and GF(64) as GF(4)^3
        for (q, m) in [(4, 2), (4, 3), (8, 2)] {
            let ctx = FieldCtx::new(q, m).unwrap();
            assert_eq!(ctx.order(), q.pow(m));
            let g = ctx.pow_primitive(1);
            let mut x = ctx.one();
            for i in 1..ctx.order() {
                x = ctx.mul(x, g);
                assert_eq!(x == ctx.one(), i == ctx.order() - 1);
            }
            // base scalars act coordinate-wise
            for l in 0..q {
                for a in 0..ctx.order() {
                    assert_eq!(ctx.scale_base(l, a), ctx.mul(ctx.embed_base(l), a));
                }
            }
        }
    }

    #[test]
    fn context_mismatch_and_division_by_zero() {
        let a = FieldCtx::new(2, 2).unwrap();
        let b = FieldCtx::new(2, 3).unwrap();
        let x = FieldElement::new(&a, 1).unwrap();
        let y = FieldElement::new(&b, 1).unwrap();
        assert_eq!(x.add(&y), Err(Error::ContextMismatch));
        assert_eq!(FieldElement::zero(&a).inv(), Err(Error::DivisionByZero));
        assert_eq!(
            x.apply(FieldOp::Mul, Some(&x)).unwrap(),
            FieldElement::one(&a)
        );
    }

    #[test]
    fn custom_basis_changes_coordinates_not_arithmetic() {
        let std = FieldCtx::new(2, 2).unwrap();
        // basis {x, 1 + x}
        let alt = FieldCtx::with_basis(2, 2, vec![0b10, 0b11]).unwrap();
        assert!(!alt.has_default_basis());
        // 1 = x + (1 + x): coordinates (1, 1)
        assert_eq!(alt.one(), 0b11);
        // multiplicative structure is the same field
        for a in 1..4 {
            assert_eq!(alt.mul(a, alt.inv(a).unwrap()), alt.one());
        }
        assert!(FieldCtx::with_basis(2, 2, vec![0b01, 0b01]).is_err());
        assert_ne!(*std, *alt);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(FieldCtx::new(6, 1).is_err());
        assert!(FieldCtx::new(2, 17).is_err());
        assert!(FieldCtx::new(2, 0).is_err());
        assert!(FieldCtx::with_modulus(2, 2, vec![1, 0, 1], None).is_err());
        assert!(FieldCtx::with_modulus(2, 4, vec![1, 1, 1, 1, 1], None).is_ok());
    }
}
