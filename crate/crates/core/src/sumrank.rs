//! Sum-rank weights, distances, metric balls and linear sum-rank isometries.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::codes::CodeDescriptor;
use crate::error::{Error, Result};
use crate::galois::{rank_of_rep, FieldCtx, Matrix};

/// Block sizes `(n_1, ..., n_l)` of a sum-rank length partition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct LengthPartition {
    sublengths: Vec<usize>,
    offsets: Vec<usize>,
}

impl TryFrom<Vec<usize>> for LengthPartition {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        LengthPartition::new(v)
    }
}

impl From<LengthPartition> for Vec<usize> {
    fn from(p: LengthPartition) -> Self {
        p.sublengths
    }
}

impl LengthPartition {
    pub fn new(sublengths: Vec<usize>) -> Result<Self> {
        if sublengths.is_empty() {
            return Err(Error::Partition("a partition needs at least one block".into()));
        }
        if sublengths.contains(&0) {
            return Err(Error::Partition("sublengths must be positive".into()));
        }
        let mut offsets = Vec::with_capacity(sublengths.len() + 1);
        offsets.push(0);
        for &s in &sublengths {
            offsets.push(offsets.last().unwrap() + s);
        }
        Ok(LengthPartition { sublengths, offsets })
    }

    /// `ell` blocks of length `n`.
    pub fn uniform(n: usize, ell: usize) -> Result<Self> {
        Self::new(vec![n; ell])
    }

    pub fn sublengths(&self) -> &[usize] {
        &self.sublengths
    }

    /// Total length `n`.
    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Number of blocks.
    pub fn ell(&self) -> usize {
        self.sublengths.len()
    }

    pub fn block(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Index of the block containing coordinate `j`.
    pub fn block_of(&self, j: usize) -> usize {
        self.offsets.partition_point(|&o| o <= j) - 1
    }

    /// The common sublength when all blocks are equal.
    pub fn common_sublength(&self) -> Option<usize> {
        let first = self.sublengths[0];
        self.sublengths.iter().all(|&s| s == first).then_some(first)
    }

    /// Grouped form as `(N_j, l_j)` pairs with `N_1 < N_2 < ...`.
    pub fn grouping(&self) -> Vec<(usize, usize)> {
        let mut counts: Vec<(usize, usize)> = Vec::new();
        let mut sorted = self.sublengths.clone();
        sorted.sort_unstable();
        for s in sorted {
            match counts.last_mut() {
                Some((len, c)) if *len == s => *c += 1,
                _ => counts.push((s, 1)),
            }
        }
        counts
    }

    /// Largest possible sum-rank weight, `sum_i min(m, n_i)`.
    pub fn max_weight(&self, m: u32) -> usize {
        self.sublengths.iter().map(|&s| s.min(m as usize)).sum()
    }
}

/// A vector of `GF(q^m)^n` together with its length partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumRankVector {
    ctx: Arc<FieldCtx>,
    partition: LengthPartition,
    entries: Vec<u32>,
}

impl SumRankVector {
    pub fn new(ctx: &Arc<FieldCtx>, partition: &LengthPartition, entries: Vec<u32>) -> Result<Self> {
        if entries.len() != partition.n() {
            return Err(Error::Partition(format!(
                "{} entries for a partition of length {}",
                entries.len(),
                partition.n()
            )));
        }
        if entries.iter().any(|&x| x >= ctx.order()) {
            return Err(Error::ContextMismatch);
        }
        Ok(SumRankVector {
            ctx: ctx.clone(),
            partition: partition.clone(),
            entries,
        })
    }

    pub fn zero(ctx: &Arc<FieldCtx>, partition: &LengthPartition) -> Self {
        SumRankVector {
            ctx: ctx.clone(),
            partition: partition.clone(),
            entries: vec![0; partition.n()],
        }
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn partition(&self) -> &LengthPartition {
        &self.partition
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<u32> {
        self.entries
    }

    pub fn block(&self, i: usize) -> &[u32] {
        &self.entries[self.partition.block(i)]
    }

    pub fn weight(&self) -> usize {
        sumrank_weight(self)
    }

    fn compatible(&self, other: &SumRankVector) -> Result<()> {
        if self.partition != other.partition {
            return Err(Error::Partition("vectors have different partitions".into()));
        }
        if !self.ctx.same_field(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn sub(&self, other: &SumRankVector) -> Result<SumRankVector> {
        self.compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| self.ctx.sub(a, b))
            .collect();
        Ok(SumRankVector { entries, ..self.clone() })
    }

    pub fn add(&self, other: &SumRankVector) -> Result<SumRankVector> {
        self.compatible(other)?;
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| self.ctx.add(a, b))
            .collect();
        Ok(SumRankVector { entries, ..self.clone() })
    }
}

/// `sum_i rank(M(v^(i)))`.
pub fn sumrank_weight(v: &SumRankVector) -> usize {
    weight_of(&v.entries, &v.partition, &v.ctx)
}

/// Sum-rank weight of a raw entry slice under `partition`.
pub fn weight_of(entries: &[u32], partition: &LengthPartition, ctx: &FieldCtx) -> usize {
    (0..partition.ell())
        .map(|i| rank_of_rep(&entries[partition.block(i)], ctx))
        .sum()
}

pub fn sumrank_distance(u: &SumRankVector, v: &SumRankVector) -> Result<usize> {
    Ok(sumrank_weight(&u.sub(v)?))
}

/// Number of `m x n` matrices over `GF(q)` of each rank `0..=min(m, n)`,
/// from the Gaussian product formula.
pub fn rank_distribution(q: u32, m: usize, n: usize) -> Vec<BigUint> {
    let q = BigUint::from(q);
    let pow = |e: usize| q.pow(e as u32);
    (0..=m.min(n))
        .map(|k| {
            let mut num = BigUint::one();
            let mut den = BigUint::one();
            for i in 0..k {
                num *= (pow(m) - pow(i)) * (pow(n) - pow(i));
                den *= pow(k) - pow(i);
            }
            num / den
        })
        .collect()
}

/// As [`rank_distribution`], by enumerating `GF(q^m)^n`.
pub fn rank_distribution_enumerated(ctx: &FieldCtx, n: usize) -> Vec<BigUint> {
    let m = ctx.m() as usize;
    let mut counts = vec![0u64; m.min(n) + 1];
    let order = ctx.order();
    let mut v = vec![0u32; n];
    loop {
        counts[rank_of_rep(&v, ctx)] += 1;
        if !increment(&mut v, order) {
            break;
        }
    }
    counts.into_iter().map(BigUint::from).collect()
}

/// Mixed-radix increment; false after wrapping back to all zeros.
pub(crate) fn increment(v: &mut [u32], radix: u32) -> bool {
    for x in v.iter_mut() {
        *x += 1;
        if *x < radix {
            return true;
        }
        *x = 0;
    }
    false
}

const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Size of the sum-rank ball of radius `t` around any vector.
pub fn ball_size(partition: &LengthPartition, ctx: &FieldCtx, t: usize) -> BigUint {
    let mut cache: HashMap<usize, Vec<BigUint>> = HashMap::new();
    // dist[w] = number of vectors in the blocks seen so far with weight w
    let mut dist = vec![BigUint::one()];
    for &ni in partition.sublengths() {
        let block = cache
            .entry(ni)
            .or_insert_with(|| {
                let space = (ctx.order() as u64).checked_pow(ni as u32);
                match space {
                    Some(s) if s <= ENUMERATION_LIMIT => rank_distribution_enumerated(ctx, ni),
                    _ => rank_distribution(ctx.q(), ctx.m() as usize, ni),
                }
            })
            .clone();
        let mut next = vec![BigUint::zero(); (dist.len() + block.len() - 1).min(t + 1)];
        for (w, a) in dist.iter().enumerate() {
            for (k, b) in block.iter().enumerate() {
                if w + k <= t {
                    next[w + k] += a * b;
                }
            }
        }
        dist = next;
    }
    dist.into_iter().sum()
}

/// A linear sum-rank isometry: block `i` of the image is
/// `beta_i * v^(sigma(i)) * A_i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsometrySpec {
    pub sigma: Vec<usize>,
    pub beta: Vec<u32>,
    pub a: Vec<Matrix>,
}

impl IsometrySpec {
    pub fn identity(partition: &LengthPartition, ctx: &Arc<FieldCtx>) -> Self {
        let base = ctx.base_ctx();
        IsometrySpec {
            sigma: (0..partition.ell()).collect(),
            beta: vec![ctx.one(); partition.ell()],
            a: partition
                .sublengths()
                .iter()
                .map(|&ni| Matrix::identity(&base, ni))
                .collect(),
        }
    }

    /// Uniformly random `sigma` within each group of equal sublengths,
    /// nonzero `beta_i` and invertible `A_i`.
    pub fn random<R: Rng + ?Sized>(partition: &LengthPartition, ctx: &Arc<FieldCtx>, rng: &mut R) -> Self {
        let ell = partition.ell();
        let mut sigma: Vec<usize> = (0..ell).collect();
        for (len, _) in partition.grouping() {
            let mut members: Vec<usize> = (0..ell)
                .filter(|&i| partition.sublengths()[i] == len)
                .collect();
            let slots = members.clone();
            // Fisher-Yates over the members of this group
            for i in (1..members.len()).rev() {
                let j = rng.gen_range(0..=i);
                members.swap(i, j);
            }
            for (slot, member) in slots.into_iter().zip(members) {
                sigma[slot] = member;
            }
        }
        let beta = (0..ell).map(|_| rng.gen_range(1..ctx.order())).collect();
        let base = ctx.base_ctx();
        let a = partition
            .sublengths()
            .iter()
            .map(|&ni| random_invertible(&base, ni, rng))
            .collect();
        IsometrySpec { sigma, beta, a }
    }

    /// Checks the spec against a partition and field.
    pub fn validate(&self, partition: &LengthPartition, ctx: &Arc<FieldCtx>) -> Result<()> {
        let ell = partition.ell();
        if self.sigma.len() != ell || self.beta.len() != ell || self.a.len() != ell {
            return Err(Error::Partition(format!("spec does not have {ell} blocks")));
        }
        let mut seen = vec![false; ell];
        for (i, &s) in self.sigma.iter().enumerate() {
            if s >= ell || seen[s] {
                return Err(Error::Partition("sigma is not a permutation".into()));
            }
            seen[s] = true;
            if partition.sublengths()[s] != partition.sublengths()[i] {
                return Err(Error::Partition(format!(
                    "sigma maps block {s} of length {} onto block {i} of length {}",
                    partition.sublengths()[s],
                    partition.sublengths()[i]
                )));
            }
        }
        if self.beta.iter().any(|&b| b == 0 || b >= ctx.order()) {
            return Err(Error::Precondition("beta must be nonzero field elements".into()));
        }
        let base = ctx.base_ctx();
        for (a, &ni) in self.a.iter().zip(partition.sublengths()) {
            if !a.ctx().same_field(&base) || a.rows() != ni || a.cols() != ni {
                return Err(Error::Partition(format!("A_i must be {ni}x{ni} over GF(q)")));
            }
            if a.rank() != ni {
                return Err(Error::Precondition("A_i must be invertible".into()));
            }
        }
        Ok(())
    }

    pub fn apply(&self, v: &SumRankVector) -> Result<SumRankVector> {
        self.validate(&v.partition, &v.ctx)?;
        Ok(SumRankVector {
            entries: self.apply_raw(&v.entries, &v.partition, &v.ctx),
            ..v.clone()
        })
    }

    fn apply_raw(&self, entries: &[u32], partition: &LengthPartition, ctx: &FieldCtx) -> Vec<u32> {
        let mut out = vec![0u32; entries.len()];
        for i in 0..partition.ell() {
            let src = &entries[partition.block(self.sigma[i])];
            let dst = partition.block(i);
            let a = &self.a[i];
            for (col, slot) in dst.enumerate() {
                let mut acc = 0u32;
                for (row, &x) in src.iter().enumerate() {
                    acc = ctx.add(acc, ctx.scale_base(a.get(row, col), x));
                }
                out[slot] = ctx.mul(self.beta[i], acc);
            }
        }
        out
    }

    /// The spec of `v -> self(first(v))`.
    pub fn compose(&self, first: &IsometrySpec, ctx: &FieldCtx) -> Result<IsometrySpec> {
        let ell = self.sigma.len();
        if first.sigma.len() != ell {
            return Err(Error::Partition("specs have different block counts".into()));
        }
        let mut out = IsometrySpec {
            sigma: Vec::with_capacity(ell),
            beta: Vec::with_capacity(ell),
            a: Vec::with_capacity(ell),
        };
        for i in 0..ell {
            let j = self.sigma[i];
            out.sigma.push(first.sigma[j]);
            out.beta.push(ctx.mul(self.beta[i], first.beta[j]));
            out.a.push(first.a[j].mul(&self.a[i])?);
        }
        Ok(out)
    }

    /// Applies the spec to every row of `g`, whose columns follow `partition`.
    pub fn apply_rows(&self, g: &Matrix, partition: &LengthPartition) -> Result<Matrix> {
        self.validate(partition, g.ctx())?;
        if g.cols() != partition.n() {
            return Err(Error::Partition("matrix width differs from partition length".into()));
        }
        let rows: Vec<Vec<u32>> = (0..g.rows())
            .map(|r| self.apply_raw(g.row(r), partition, g.ctx()))
            .collect();
        Matrix::from_vec(g.ctx(), g.rows(), g.cols(), rows.concat())
    }
}

pub(crate) fn random_invertible<R: Rng + ?Sized>(base: &Arc<FieldCtx>, n: usize, rng: &mut R) -> Matrix {
    loop {
        let data = (0..n * n).map(|_| rng.gen_range(0..base.order())).collect();
        let m = Matrix::from_vec(base, n, n, data).expect("entries in range");
        if m.rank() == n {
            return m;
        }
    }
}

/// Every invertible `n x n` matrix over `GF(q)`.
pub fn general_linear_group(base: &Arc<FieldCtx>, n: usize, limit: u64) -> Result<Vec<Matrix>> {
    let q = base.order();
    let total = (q as u64)
        .checked_pow((n * n) as u32)
        .filter(|&t| t <= limit)
        .ok_or(Error::BudgetExceeded { budget: limit })?;
    let mut out = Vec::new();
    let mut v = vec![0u32; n * n];
    for _ in 0..total {
        let m = Matrix::from_vec(base, n, n, v.clone()).expect("entries in range");
        if m.rank() == n {
            out.push(m);
        }
        increment(&mut v, q);
    }
    Ok(out)
}

/// Whether some linear sum-rank isometry maps `c` onto `d`.
///
/// Depth-first search assigning output blocks in order. Each node fixes
/// `sigma(i)`, `beta_i` and `A_i`; a branch is cut as soon as the image
/// punctured to the assigned blocks differs from `d` punctured the same way.
/// The first assigned scalar is fixed to 1 and the rest range over coset
/// representatives of `GF(q)^*` in `GF(q^m)^*`, since both codes are
/// `GF(q^m)`-linear and `GF(q)` scalars are absorbed into `A_i`.
/// `budget` caps the number of visited nodes.
pub fn codes_isometric(c: &CodeDescriptor, d: &CodeDescriptor, budget: u64) -> Result<bool> {
    let ctx = c.ctx();
    if !ctx.same_field(d.ctx()) {
        return Err(Error::ContextMismatch);
    }
    let (pc, pd) = (c.partition(), d.partition());
    if pc.grouping() != pd.grouping() || c.k() != d.k() {
        return Ok(false);
    }
    if c.k() == 0 || c.k() == pc.n() {
        return Ok(true);
    }
    let base = ctx.base_ctx();
    let mut groups: HashMap<usize, Vec<Matrix>> = HashMap::new();
    for &ni in pc.sublengths() {
        if let std::collections::hash_map::Entry::Vacant(e) = groups.entry(ni) {
            e.insert(general_linear_group(&base, ni, budget.max(1 << 16))?);
        }
    }
    let lifted: HashMap<usize, Vec<Matrix>> = groups
        .iter()
        .map(|(&ni, ms)| Ok((ni, ms.iter().map(|m| m.lift(ctx)).collect::<Result<Vec<_>>>()?)))
        .collect::<Result<_>>()?;
    let betas = scalar_representatives(ctx);
    let gc = c.generator();
    let gd = d.generator();
    let c_blocks: Vec<Matrix> = (0..pc.ell())
        .map(|i| {
            let r = pc.block(i);
            gc.column_range(r.start, r.end)
        })
        .collect();
    let mut search = IsoSearch {
        pc,
        pd,
        gd,
        c_blocks,
        lifted,
        betas,
        used: vec![false; pc.ell()],
        image: Vec::new(),
        nodes: 0,
        budget,
    };
    search.dfs(0)
}

fn scalar_representatives(ctx: &FieldCtx) -> Vec<u32> {
    let m = ctx.m() as u64;
    if m == 1 {
        return vec![ctx.one()];
    }
    let q = ctx.q() as u64;
    let count = (q.pow(m as u32) - 1) / (q - 1);
    (0..count).map(|i| ctx.pow_primitive(i)).collect()
}

struct IsoSearch<'a> {
    pc: &'a LengthPartition,
    pd: &'a LengthPartition,
    gd: &'a Matrix,
    c_blocks: Vec<Matrix>,
    lifted: HashMap<usize, Vec<Matrix>>,
    betas: Vec<u32>,
    used: Vec<bool>,
    image: Vec<Matrix>,
    nodes: u64,
    budget: u64,
}

impl IsoSearch<'_> {
    fn dfs(&mut self, i: usize) -> Result<bool> {
        if i == self.pd.ell() {
            return Ok(true);
        }
        let ni = self.pd.sublengths()[i];
        let end = self.pd.block(i).end;
        let target = self.gd.column_range(0, end);
        let betas: Vec<u32> = if i == 0 { vec![self.betas[0]] } else { self.betas.clone() };
        let mats = self.lifted[&ni].clone();
        for src in 0..self.pc.ell() {
            if self.used[src] || self.pc.sublengths()[src] != ni {
                continue;
            }
            self.used[src] = true;
            for &beta in &betas {
                let scaled = self.c_blocks[src].scale(beta);
                for a in &mats {
                    self.nodes += 1;
                    if self.nodes > self.budget {
                        return Err(Error::BudgetExceeded { budget: self.budget });
                    }
                    let block = scaled.mul(a)?;
                    self.image.push(block);
                    let parts: Vec<&Matrix> = self.image.iter().collect();
                    let candidate = Matrix::hstack(&parts)?;
                    if candidate.same_row_space(&target) && self.dfs(i + 1)? {
                        return Ok(true);
                    }
                    self.image.pop();
                }
            }
            self.used[src] = false;
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(q: u32, m: u32) -> Arc<FieldCtx> {
        FieldCtx::new(q, m).unwrap()
    }

    #[test]
    fn weight_examples() {
        let f2 = gf(2, 1);
        let p = LengthPartition::new(vec![2, 2]).unwrap();
        assert_eq!(SumRankVector::zero(&f2, &p).weight(), 0);
        assert_eq!(SumRankVector::new(&f2, &p, vec![1, 0, 0, 0]).unwrap().weight(), 1);
        let f4 = gf(2, 2);
        let p1 = LengthPartition::new(vec![2]).unwrap();
        assert_eq!(SumRankVector::new(&f4, &p1, vec![0b10, 0b11]).unwrap().weight(), 2);
    }

    #[test]
    fn distance_requires_same_partition() {
        let f = gf(2, 1);
        let a = SumRankVector::zero(&f, &LengthPartition::new(vec![2, 2]).unwrap());
        let b = SumRankVector::zero(&f, &LengthPartition::new(vec![1, 3]).unwrap());
        assert!(matches!(sumrank_distance(&a, &b), Err(Error::Partition(_))));
    }

    #[test]
    fn partition_helpers() {
        let p = LengthPartition::new(vec![3, 1, 3, 2]).unwrap();
        assert_eq!(p.n(), 9);
        assert_eq!(p.ell(), 4);
        assert_eq!(p.block(2), 4..7);
        assert_eq!(p.block_of(4), 2);
        assert_eq!(p.block_of(8), 3);
        assert_eq!(p.grouping(), vec![(1, 1), (2, 1), (3, 2)]);
        assert_eq!(p.common_sublength(), None);
        assert!(LengthPartition::new(vec![]).is_err());
        assert!(LengthPartition::new(vec![1, 0]).is_err());
    }

    #[test]
    fn ball_size_examples() {
        let f = gf(2, 1);
        let p5 = LengthPartition::uniform(2, 5).unwrap();
        assert_eq!(ball_size(&p5, &f, 0), BigUint::one());
        assert_eq!(ball_size(&p5, &f, 1), BigUint::from(16u32));
        let p2 = LengthPartition::uniform(2, 2).unwrap();
        assert_eq!(ball_size(&p2, &f, 2), BigUint::from(16u32));
    }

    #[test]
    fn closed_form_rank_counts_match_enumeration() {
        for (q, m, n) in [(2, 1, 3), (2, 2, 2), (2, 3, 2), (3, 2, 2), (4, 2, 2), (2, 2, 3)] {
            let ctx = gf(q, m);
            assert_eq!(
                rank_distribution(q, m as usize, n),
                rank_distribution_enumerated(&ctx, n),
                "q={q} m={m} n={n}"
            );
        }
    }

    #[test]
    fn identity_isometry_is_identity() {
        let f = gf(3, 2);
        let p = LengthPartition::new(vec![2, 1]).unwrap();
        let v = SumRankVector::new(&f, &p, vec![4, 7, 2]).unwrap();
        assert_eq!(IsometrySpec::identity(&p, &f).apply(&v).unwrap(), v);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let f = gf(2, 1);
        let p = LengthPartition::new(vec![2, 1]).unwrap();
        let mut spec = IsometrySpec::identity(&p, &f);
        spec.sigma = vec![1, 0];
        assert!(matches!(spec.validate(&p, &f), Err(Error::Partition(_))));
        let mut spec = IsometrySpec::identity(&p, &f);
        spec.beta[0] = 0;
        assert!(spec.validate(&p, &f).is_err());
        let mut spec = IsometrySpec::identity(&p, &f);
        spec.a[0] = Matrix::zeros(&f, 2, 2);
        assert!(spec.validate(&p, &f).is_err());
    }

    #[test]
    fn gl_sizes() {
        let f2 = gf(2, 1);
        assert_eq!(general_linear_group(&f2, 2, 1 << 20).unwrap().len(), 6);
        assert_eq!(general_linear_group(&f2, 3, 1 << 20).unwrap().len(), 168);
        let f3 = gf(3, 1);
        assert_eq!(general_linear_group(&f3, 2, 1 << 20).unwrap().len(), 48);
        assert!(general_linear_group(&f2, 5, 1 << 20).is_err());
    }
}
