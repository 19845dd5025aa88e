//! Linear sum-rank codes: Hamming codes from spreads, their simplex duals,
//! minimum distances, the distance-3 criterion and length bounds.

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{rank_of_rep, FieldCtx, Matrix};
use crate::spreads::SpreadFamily;
use crate::sumrank::{ball_size, general_linear_group, increment, weight_of, LengthPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Hamming,
    Simplex,
    Outer,
    Global,
    Custom,
}

/// A linear code over `GF(q^m)` with a length partition, carrying both a
/// parity-check matrix `H` (`r x n`) and a generator `G` (`k x n`).
#[derive(Debug, Clone)]
pub struct CodeDescriptor {
    ctx: Arc<FieldCtx>,
    partition: LengthPartition,
    kind: CodeKind,
    h: Matrix,
    g: Matrix,
    info_set: Vec<usize>,
    info_inv: Matrix,
}

/// Equal when the field, partition, kind and both matrices agree.
impl PartialEq for CodeDescriptor {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_field(&other.ctx)
            && self.partition == other.partition
            && self.kind == other.kind
            && self.h == other.h
            && self.g == other.g
    }
}

impl Eq for CodeDescriptor {}

impl CodeDescriptor {
    /// The code `{c : H c^T = 0}`; `H` must have full row rank.
    ///
    /// The generator is the kernel basis that is the identity on the non-pivot
    /// columns of `H`. No columns are permuted.
    pub fn from_parity_check(
        ctx: &Arc<FieldCtx>,
        partition: &LengthPartition,
        h: Matrix,
        kind: CodeKind,
    ) -> Result<Self> {
        Self::check_shape(ctx, partition, &h)?;
        if h.rank() != h.rows() {
            return Err(Error::Precondition("parity-check matrix must have full row rank".into()));
        }
        let (_, pivots) = h.rref();
        let free: Vec<usize> = (0..h.cols()).filter(|c| pivots.binary_search(c).is_err()).collect();
        let g = h.kernel();
        // the kernel basis is the identity on the free columns
        let info_inv = Matrix::identity(ctx, free.len());
        Self::assemble_with(ctx, partition, kind, h, g, free, info_inv)
    }

    /// The row space of `G`; `G` must have full row rank.
    pub fn from_generator(
        ctx: &Arc<FieldCtx>,
        partition: &LengthPartition,
        g: Matrix,
        kind: CodeKind,
    ) -> Result<Self> {
        Self::check_shape(ctx, partition, &g)?;
        if g.rank() != g.rows() {
            return Err(Error::Precondition("generator matrix must have full row rank".into()));
        }
        let h = g.kernel();
        Self::assemble(ctx, partition, kind, h, g)
    }

    fn check_shape(ctx: &Arc<FieldCtx>, partition: &LengthPartition, m: &Matrix) -> Result<()> {
        if !m.ctx().same_field(ctx) {
            return Err(Error::ContextMismatch);
        }
        if m.cols() != partition.n() {
            return Err(Error::Partition(format!(
                "matrix has {} columns, partition length is {}",
                m.cols(),
                partition.n()
            )));
        }
        Ok(())
    }

    fn assemble(
        ctx: &Arc<FieldCtx>,
        partition: &LengthPartition,
        kind: CodeKind,
        h: Matrix,
        g: Matrix,
    ) -> Result<Self> {
        let (_, info_set) = g.rref();
        let info_inv = g
            .select_columns(&info_set)
            .inverse()
            .ok_or_else(|| Error::InvariantViolation("information set is singular".into()))?;
        Self::assemble_with(ctx, partition, kind, h, g, info_set, info_inv)
    }

    fn assemble_with(
        ctx: &Arc<FieldCtx>,
        partition: &LengthPartition,
        kind: CodeKind,
        h: Matrix,
        g: Matrix,
        info_set: Vec<usize>,
        info_inv: Matrix,
    ) -> Result<Self> {
        let code = CodeDescriptor {
            ctx: ctx.clone(),
            partition: partition.clone(),
            kind,
            h,
            g,
            info_set,
            info_inv,
        };
        if !code.g.mul(&code.h.transpose())?.is_zero() {
            return Err(Error::InvariantViolation("G H^T is not zero".into()));
        }
        Ok(code)
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn partition(&self) -> &LengthPartition {
        &self.partition
    }

    pub fn kind(&self) -> CodeKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: CodeKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn parity_check(&self) -> &Matrix {
        &self.h
    }

    pub fn generator(&self) -> &Matrix {
        &self.g
    }

    /// Parity-check columns of block `i`.
    pub fn h_block(&self, i: usize) -> Matrix {
        let b = self.partition.block(i);
        self.h.column_range(b.start, b.end)
    }

    pub fn q(&self) -> u32 {
        self.ctx.q()
    }

    pub fn m(&self) -> u32 {
        self.ctx.m()
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn k(&self) -> usize {
        self.g.rows()
    }

    /// Redundancy `n - k`.
    pub fn r(&self) -> usize {
        self.h.rows()
    }

    pub fn ell(&self) -> usize {
        self.partition.ell()
    }

    /// Coordinates on which `G` restricts to an invertible matrix.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn encode(&self, message: &[u32]) -> Result<Vec<u32>> {
        self.g.vec_mul(message)
    }

    /// The message encoding to `codeword`, read off the information set.
    pub fn message_of(&self, codeword: &[u32]) -> Result<Vec<u32>> {
        if codeword.len() != self.n() {
            return Err(Error::Dimension(format!(
                "word of length {} for a code of length {}",
                codeword.len(),
                self.n()
            )));
        }
        let restricted: Vec<u32> = self.info_set.iter().map(|&j| codeword[j]).collect();
        self.info_inv.vec_mul(&restricted)
    }

    pub fn syndrome(&self, word: &[u32]) -> Result<Vec<u32>> {
        self.h.mul_vec(word)
    }

    pub fn is_codeword(&self, word: &[u32]) -> Result<bool> {
        Ok(self.syndrome(word)?.iter().all(|&s| s == 0))
    }

    /// The dual code, with `G` and `H` exchanged.
    pub fn dual(&self, kind: CodeKind) -> Result<Self> {
        Self::assemble(&self.ctx, &self.partition, kind, self.g.clone(), self.h.clone())
    }

    /// Whether both codes have the same set of codewords.
    pub fn same_code(&self, other: &CodeDescriptor) -> bool {
        self.partition.n() == other.partition.n()
            && self.k() == other.k()
            && (self.k() == 0 || self.g.same_row_space(&other.g))
    }

    /// JSON form `{q, m, partition, kind, H, G, r, k, n, ell}` with both
    /// matrices in matrix text format.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(CodeJson {
            q: self.q(),
            m: self.m(),
            partition: self.partition.sublengths().to_vec(),
            kind: self.kind,
            h: self.h.to_text(),
            g: self.g.to_text(),
            r: self.r(),
            k: self.k(),
            n: self.n(),
            ell: Some(self.ell()),
        })
        .expect("plain data serializes")
    }

    /// Parses [`CodeDescriptor::to_json`] output, rebuilding the code from
    /// `H` and checking `G` against it.
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let j: CodeJson = serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let ctx = FieldCtx::new(j.q, j.m)?;
        let partition = LengthPartition::new(j.partition)?;
        let h = Matrix::from_text_in(&j.h, &ctx)?;
        let g = Matrix::from_text_in(&j.g, &ctx)?;
        if (j.n, j.r, j.k) != (partition.n(), h.rows(), g.rows()) {
            return Err(Error::Parse("n, r, k disagree with the matrices".into()));
        }
        Self::check_shape(&ctx, &partition, &h)?;
        Self::check_shape(&ctx, &partition, &g)?;
        if h.rank() != h.rows() || g.rank() != g.rows() || h.rows() + g.rows() != partition.n() {
            return Err(Error::Parse("H and G must have full rank and complementary sizes".into()));
        }
        Self::assemble(&ctx, &partition, j.kind, h, g)
    }
}

#[derive(Serialize, Deserialize)]
struct CodeJson {
    q: u32,
    m: u32,
    partition: Vec<usize>,
    kind: CodeKind,
    #[serde(rename = "H")]
    h: String,
    #[serde(rename = "G")]
    g: String,
    r: usize,
    k: usize,
    n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ell: Option<usize>,
}

/// The sum-rank Hamming code whose parity-check blocks are the spread members.
pub fn hamming_from_spread(s: &SpreadFamily) -> Result<CodeDescriptor> {
    let validated = SpreadFamily::new(s.ctx(), s.r(), s.members().to_vec())?;
    let parts: Vec<&Matrix> = validated.members().iter().collect();
    let h = Matrix::hstack(&parts)?;
    if h.rank() != s.r() {
        return Err(Error::InvariantViolation(format!(
            "spread members do not span GF({})^{}",
            s.q(),
            s.r()
        )));
    }
    let partition = LengthPartition::new(validated.dims())?;
    CodeDescriptor::from_parity_check(s.ctx(), &partition, h, CodeKind::Hamming)
}

/// The dual of a Hamming code: its generator is the Hamming parity check.
pub fn simplex_from_hamming(c: &CodeDescriptor) -> Result<CodeDescriptor> {
    if c.kind() != CodeKind::Hamming {
        return Err(Error::Precondition("input must be a Hamming code".into()));
    }
    c.dual(CodeKind::Simplex)
}

/// Codewords enumerated above this count switch to the parity-check search.
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Minimum sum-rank distance; `None` for the zero code.
///
/// Enumerates codewords up to scalars when there are at most
/// [`ENUMERATION_LIMIT`] of them, otherwise searches weight layers through
/// the parity-check matrix. `budget` bounds the work of either method.
pub fn min_sumrank_distance(c: &CodeDescriptor, budget: u64) -> Result<Option<usize>> {
    if c.k() == 0 {
        return Ok(None);
    }
    let projective = projective_count(c.ctx().order(), c.k());
    if projective.is_some_and(|p| p <= ENUMERATION_LIMIT.min(budget)) {
        min_distance_by_enumeration(c, budget)
    } else {
        min_distance_by_syndrome_search(c, budget)
    }
}

/// `(Q^k - 1)/(Q - 1)`, if it fits.
fn projective_count(order: u32, k: usize) -> Option<u64> {
    let total = (order as u64).checked_pow(k as u32)?;
    Some((total - 1) / (order as u64 - 1))
}

/// Minimum weight over all codewords whose first nonzero message symbol is 1.
pub fn min_distance_by_enumeration(c: &CodeDescriptor, budget: u64) -> Result<Option<usize>> {
    let mut best: Option<usize> = None;
    let mut count = 0u64;
    for_each_projective_codeword(c, |w| {
        count += 1;
        if count > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let wt = weight_of(w, c.partition(), c.ctx());
        if best.is_none_or(|b| wt < b) {
            best = Some(wt);
        }
        Ok(())
    })?;
    Ok(best)
}

/// Calls `f` on one representative codeword of every one-dimensional
/// subspace of the code, updating the codeword incrementally over the
/// `GF(q)`-expansion of the generator rows.
pub fn for_each_projective_codeword<F>(c: &CodeDescriptor, mut f: F) -> Result<()>
where
    F: FnMut(&[u32]) -> Result<()>,
{
    let ctx = c.ctx();
    let q = ctx.q();
    let m = ctx.m() as usize;
    let g = c.generator();
    let k = c.k();
    let basis: Vec<u32> = (0..m).map(|j| ctx.from_coords(&unit(m, j))).collect();
    for lead in 0..k {
        // GF(q)-spanning vectors of the later rows: alpha_t * g_j
        let gens: Vec<Vec<u32>> = (lead + 1..k)
            .flat_map(|j| {
                basis
                    .iter()
                    .map(move |&alpha| g.row(j).iter().map(|&x| ctx.mul(alpha, x)).collect())
            })
            .collect();
        let mut word: Vec<u32> = g.row(lead).to_vec();
        let mut digits = vec![0u32; gens.len()];
        loop {
            f(&word)?;
            // increment digits, adding the change to the word
            let mut pos = 0;
            let mut advanced = false;
            while pos < digits.len() {
                let old = digits[pos];
                let new = if old + 1 < q { old + 1 } else { 0 };
                digits[pos] = new;
                let delta = ctx.base_tables().sub(new, old);
                for (w, &x) in word.iter_mut().zip(&gens[pos]) {
                    *w = ctx.add(*w, ctx.scale_base(delta, x));
                }
                if new != 0 {
                    advanced = true;
                    break;
                }
                pos += 1;
            }
            if !advanced {
                break;
            }
        }
    }
    Ok(())
}

fn unit(m: usize, j: usize) -> Vec<u32> {
    let mut v = vec![0u32; m];
    v[j] = 1;
    v
}

/// Nonzero vectors of one block, grouped by rank, with their syndromes.
struct BlockTable {
    /// (rank, is_normalized, syndrome)
    vectors: Vec<(usize, bool, Vec<u32>)>,
    by_rank: Vec<HashSet<Vec<u32>>>,
}

/// Smallest `w` such that some nonzero `e` of sum-rank weight `w` has
/// `H e^T = 0`.
///
/// Searches blocks in increasing index order; each visited combination
/// fixes vectors on all but the last support block, whose vector is found by
/// a syndrome lookup. The first vector is taken up to `GF(q^m)` scalars.
pub fn min_distance_by_syndrome_search(c: &CodeDescriptor, budget: u64) -> Result<Option<usize>> {
    if c.k() == 0 {
        return Ok(None);
    }
    let ctx = c.ctx();
    let p = c.partition();
    let order = ctx.order();
    let mut tables = Vec::with_capacity(p.ell());
    let mut cache: HashMap<(usize, Vec<u32>), usize> = HashMap::new();
    let mut work = 0u64;
    for i in 0..p.ell() {
        let hi = c.h_block(i);
        let ni = hi.cols();
        let size = (order as u64).checked_pow(ni as u32).filter(|&s| s <= budget);
        let Some(size) = size else {
            return Err(Error::BudgetExceeded { budget });
        };
        work += size;
        if work > budget {
            return Err(Error::BudgetExceeded { budget });
        }
        let maxr = ni.min(ctx.m() as usize);
        let mut t = BlockTable {
            vectors: Vec::new(),
            by_rank: vec![HashSet::new(); maxr + 1],
        };
        let mut v = vec![0u32; ni];
        while increment(&mut v, order) {
            let rank = *cache
                .entry((ni, v.clone()))
                .or_insert_with(|| rank_of_rep(&v, ctx));
            let s = hi.mul_vec(&v)?;
            let normalized = v.iter().find(|&&x| x != 0) == Some(&ctx.one());
            t.by_rank[rank].insert(s.clone());
            t.vectors.push((rank, normalized, s));
        }
        tables.push(t);
    }
    let max_w = p.max_weight(ctx.m()).min(c.r() + 1);
    let mut nodes = 0u64;
    for w in 1..=max_w {
        let mut search = LayerSearch {
            ctx,
            tables: &tables,
            nodes: &mut nodes,
            budget,
        };
        let zero = vec![0u32; c.r()];
        if search.dfs(w, 0, &zero, true)? {
            return Ok(Some(w));
        }
    }
    Err(Error::InvariantViolation(
        "no codeword found below the Singleton bound".into(),
    ))
}

struct LayerSearch<'a> {
    ctx: &'a FieldCtx,
    tables: &'a [BlockTable],
    nodes: &'a mut u64,
    budget: u64,
}

impl LayerSearch<'_> {
    /// Whether blocks `from..` can carry weight exactly `w` cancelling `partial`.
    fn dfs(&mut self, w: usize, from: usize, partial: &[u32], first: bool) -> Result<bool> {
        let target: Vec<u32> = partial.iter().map(|&x| self.ctx.neg(x)).collect();
        for i in from..self.tables.len() {
            *self.nodes += 1;
            if *self.nodes > self.budget {
                return Err(Error::BudgetExceeded { budget: self.budget });
            }
            let t = &self.tables[i];
            if t.by_rank.get(w).is_some_and(|set| set.contains(&target)) {
                return Ok(true);
            }
            for (rank, normalized, s) in &t.vectors {
                if *rank >= w || (first && !normalized) {
                    continue;
                }
                let next: Vec<u32> = partial.iter().zip(s).map(|(&a, &b)| self.ctx.add(a, b)).collect();
                if self.dfs(w - rank, i + 1, &next, false)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }
}

/// Blockwise independence test for sum-rank distance at least 3.
///
/// Every `H_i a` with nonzero `a` over `GF(q)` must be nonzero, and vectors
/// from different blocks, or from independent `a`, `b` in one block, must
/// span distinct `GF(q^m)`-lines.
pub fn check_distance3(h: &Matrix, partition: &LengthPartition) -> Result<bool> {
    let ctx = h.ctx();
    if h.cols() != partition.n() {
        return Err(Error::Partition(format!(
            "matrix has {} columns, partition length is {}",
            h.cols(),
            partition.n()
        )));
    }
    let q = ctx.q();
    let mut lines: HashSet<Vec<u32>> = HashSet::new();
    for i in 0..partition.ell() {
        let b = partition.block(i);
        let hi = h.column_range(b.start, b.end);
        let mut a = vec![0u32; hi.cols()];
        while increment(&mut a, q) {
            // one representative per GF(q)-line of coefficient vectors
            if a.iter().find(|&&x| x != 0) != Some(&1) {
                continue;
            }
            let lifted: Vec<u32> = a.iter().map(|&x| ctx.embed_base(x)).collect();
            let u = hi.mul_vec(&lifted)?;
            let Some(&lead) = u.iter().find(|&&x| x != 0) else {
                return Ok(false);
            };
            let inv = ctx.inv(lead).expect("nonzero");
            let line: Vec<u32> = u.iter().map(|&x| ctx.mul(inv, x)).collect();
            if !lines.insert(line) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One evaluated inequality of a [`LengthBoundsReport`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BoundCheck {
    pub name: String,
    pub statement: String,
    pub lhs: String,
    pub rhs: String,
    /// `None` when the bound does not apply to this code.
    pub holds: Option<bool>,
    pub tight: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthBoundsReport {
    pub q: u32,
    pub m: u32,
    pub r: usize,
    pub n: usize,
    pub ell: usize,
    pub k: usize,
    pub checks: Vec<BoundCheck>,
}

impl LengthBoundsReport {
    /// True when no applicable bound is violated.
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds != Some(false))
    }

    pub fn get(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check_le(name: &str, statement: &str, lhs: BigUint, rhs: BigUint, applies: bool, note: Option<&str>) -> BoundCheck {
    BoundCheck {
        name: name.into(),
        statement: statement.into(),
        holds: applies.then(|| lhs <= rhs),
        tight: lhs == rhs,
        lhs: lhs.to_string(),
        rhs: rhs.to_string(),
        note: (!applies).then(|| note.unwrap_or("not applicable").to_string()),
    }
}

/// Evaluates the length bounds for distance-3 codes of redundancy `r` with
/// the given partition.
///
/// The Singleton-type bounds assume a nonzero code; for `k = 0` they are
/// reported as not applicable. The rank-metric bound `2n <= rm` applies to
/// single-block codes only, and the length window to `m = 1` with equal
/// sublengths `N <= r`.
pub fn length_bounds(q: u32, m: u32, r: usize, partition: &LengthPartition) -> LengthBoundsReport {
    let n = partition.n();
    let ell = partition.ell();
    let k = n.saturating_sub(r);
    let nonzero = k >= 1;
    let qb = BigUint::from(q);
    let big = |x: usize| BigUint::from(x);
    let qm = qb.pow(m);
    let proj = (qm.pow(r as u32) - 1u32) / (&qm - 1u32);
    let mr = m as usize * r;
    let mut checks = vec![
        check_le("projective", "n <= (q^(mr) - 1)/(q^m - 1)", big(n), proj.clone(), true, None),
        check_le(
            "singleton",
            "n <= floor(l*m*r/2)",
            big(n),
            big(ell * mr / 2),
            nonzero,
            Some("zero code: no nonzero codewords"),
        ),
        check_le(
            "average_sublength",
            "n/l <= m*r/2",
            big(2 * n),
            big(ell * mr),
            nonzero,
            Some("zero code: no nonzero codewords"),
        ),
    ];
    let rank_note = if ell != 1 {
        "more than one block"
    } else {
        "zero code: no nonzero codewords"
    };
    checks.push(check_le(
        "rank_metric",
        "2n <= r*m",
        big(2 * n),
        big(mr),
        ell == 1 && nonzero,
        Some(rank_note),
    ));
    if let Some(nn) = partition.common_sublength() {
        checks.push(check_le(
            "proper_sublength",
            "2N <= m*r",
            big(2 * nn),
            big(mr),
            nonzero,
            Some("zero code: no nonzero codewords"),
        ));
        // l <= (q^(mr) - 1) / (N (q^m - 1)), compared as l*N*(q^m - 1) <= q^(mr) - 1
        let lhs = big(ell * nn) * (&qm - 1u32);
        let rhs = qm.pow(r as u32) - 1u32;
        let mut c = check_le("proper_blocks", "l <= (q^(mr) - 1)/(N (q^m - 1))", lhs, rhs, true, None);
        c.lhs = ell.to_string();
        c.rhs = ((qm.pow(r as u32) - 1u32) / (big(nn) * (&qm - 1u32))).to_string();
        checks.push(c);
        if m == 1 && nn <= r {
            let (lo, hi) = crate::spreads::spread_size_bounds(q, nn, r).expect("1 <= N <= r");
            let lower = big(nn) * lo;
            let upper = big(nn) * hi;
            let mut lo_check = check_le("length_window_lower", "N*lower <= n", lower.clone(), big(n), true, None);
            let hi_check = check_le("length_window_upper", "n <= N*upper", big(n), upper.clone(), true, None);
            lo_check.tight = lower == big(n);
            checks.push(lo_check);
            checks.push(hi_check);
            let s = r % nn;
            checks.push(BoundCheck {
                name: "length_equality".into(),
                statement: "n = N (q^r - 1)/(q^N - 1) when N | r".into(),
                lhs: n.to_string(),
                rhs: upper.to_string(),
                holds: (s == 0).then(|| big(n) == upper),
                tight: big(n) == upper,
                note: (s != 0).then(|| "N does not divide r".to_string()),
            });
        }
    }
    LengthBoundsReport {
        q,
        m,
        r,
        n,
        ell,
        k,
        checks,
    }
}

/// Checks `q^k |B_1| = q^n` for an `m = 1` code with equal sublengths `N | r`.
pub fn perfect_code_check(c: &CodeDescriptor) -> Result<bool> {
    let nn = c
        .partition()
        .common_sublength()
        .ok_or_else(|| Error::Precondition("sublengths must be equal".into()))?;
    if c.m() != 1 {
        return Err(Error::Precondition("perfect-code identity needs m = 1".into()));
    }
    if c.r() % nn != 0 {
        return Err(Error::Precondition(format!("N={nn} must divide r={}", c.r())));
    }
    let q = BigUint::from(c.q());
    let ball = ball_size(c.partition(), c.ctx(), 1);
    Ok(q.pow(c.k() as u32) * ball == q.pow(c.n() as u32))
}

/// Lower bound on the minimum distance of a proper `m = 1` simplex code of
/// dimension `r` with sublength `N`.
pub fn simplex_distance_bound(q: u32, n: usize, r: usize) -> Result<BigUint> {
    if n == 0 || r < n {
        return Err(Error::Precondition(format!("need 1 <= N <= r, got N={n}, r={r}")));
    }
    let qb = BigUint::from(q);
    let num = qb.pow(r as u32 - 1) * (q - 1);
    let den = qb.pow(n as u32) - 1u32;
    let s = r % n;
    if s == 0 {
        Ok((num + &den - 1u32) / den)
    } else {
        Ok(num / den + 1u32 - qb.pow(s as u32))
    }
}

/// Isometry test for two Hamming codes over `GF(q)` with equal sublengths,
/// through their parity-check column spaces.
///
/// A parity-check matrix is only determined up to a left factor in
/// `GL(r, q)`, so the codes are isometric exactly when some `T` in
/// `GL(r, q)` maps the set of block column spaces of one onto the other.
/// `limit` bounds the number of candidate matrices `T`.
pub fn hamming_isometric_by_spreads(c: &CodeDescriptor, d: &CodeDescriptor, limit: u64) -> Result<bool> {
    let (hc, hd) = (c.parity_check(), d.parity_check());
    if c.m() != 1 || !c.ctx().same_field(d.ctx()) {
        return Err(Error::Precondition("spread criterion needs codes over the same GF(q)".into()));
    }
    if c.partition().grouping() != d.partition().grouping() || hc.rows() != hd.rows() {
        return Ok(false);
    }
    let target = column_space_set(d);
    let base = c.ctx().clone();
    for t in general_linear_group(&base, hc.rows(), limit)? {
        let moved: Vec<Matrix> = (0..c.ell())
            .map(|i| t.mul(&c.h_block(i)).map(|m| canonical_column_space(&m)))
            .collect::<Result<_>>()?;
        if multiset_eq(&moved, &target) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The literal test: both codes' block column spaces form the same set.
pub fn same_block_column_spaces(c: &CodeDescriptor, d: &CodeDescriptor) -> bool {
    c.n() == d.n()
        && c.parity_check().rows() == d.parity_check().rows()
        && multiset_eq(&column_space_set(c), &column_space_set(d))
}

fn column_space_set(c: &CodeDescriptor) -> Vec<Matrix> {
    (0..c.ell())
        .map(|i| canonical_column_space(&c.h_block(i)))
        .collect()
}

/// Reduced row echelon basis (nonzero rows) of the column space.
fn canonical_column_space(h: &Matrix) -> Matrix {
    let (rref, pivots) = h.transpose().rref();
    rref.select_rows(&(0..pivots.len()).collect::<Vec<_>>())
}

fn multiset_eq(a: &[Matrix], b: &[Matrix]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let key = |m: &Matrix| (m.rows(), m.data().to_vec());
    let mut ka: Vec<_> = a.iter().map(key).collect();
    let mut kb: Vec<_> = b.iter().map(key).collect();
    ka.sort();
    kb.sort();
    ka == kb
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spreads::desarguesian_spread;

    fn hamming(q: u32, n: usize, r: usize) -> CodeDescriptor {
        hamming_from_spread(&desarguesian_spread(q, n, r).unwrap()).unwrap()
    }

    #[test]
    fn hamming_parameters() {
        let c = hamming(2, 2, 4);
        assert_eq!((c.n(), c.k(), c.ell(), c.r()), (10, 6, 5, 4));
        let classic = hamming(2, 1, 3);
        assert_eq!((classic.n(), classic.k()), (7, 4));
        let degenerate = hamming(2, 3, 3);
        assert_eq!((degenerate.n(), degenerate.k()), (3, 0));
        assert_eq!(min_sumrank_distance(&degenerate, 1 << 20).unwrap(), None);
    }

    #[test]
    fn encode_and_recover_message() {
        let c = hamming(3, 2, 4);
        let msg: Vec<u32> = (0..c.k() as u32).map(|i| i % 3).collect();
        let word = c.encode(&msg).unwrap();
        assert!(c.is_codeword(&word).unwrap());
        assert_eq!(c.message_of(&word).unwrap(), msg);
    }

    #[test]
    fn classic_distances() {
        let c = hamming(2, 1, 3);
        assert_eq!(min_distance_by_enumeration(&c, 1 << 20).unwrap(), Some(3));
        assert_eq!(min_distance_by_syndrome_search(&c, 1 << 20).unwrap(), Some(3));
        let s = simplex_from_hamming(&c).unwrap();
        assert_eq!((s.n(), s.k()), (7, 3));
        let mut weights = HashSet::new();
        for_each_projective_codeword(&s, |w| {
            weights.insert(weight_of(w, s.partition(), s.ctx()));
            Ok(())
        })
        .unwrap();
        assert_eq!(weights, HashSet::from([4]));
    }

    #[test]
    fn distance3_examples() {
        let c = hamming(2, 2, 4);
        assert!(check_distance3(c.parity_check(), c.partition()).unwrap());
        // repeat block 0 in place of block 1
        let h = c.parity_check();
        let b0 = c.h_block(0);
        let rest = h.column_range(4, 10);
        let repeated = Matrix::hstack(&[&b0, &b0, &rest]).unwrap();
        assert!(!check_distance3(&repeated, c.partition()).unwrap());
        // rank-deficient block
        let f = c.ctx();
        let deficient = Matrix::from_rows(f, &[vec![1, 1], vec![0, 0], vec![0, 0], vec![0, 0]]).unwrap();
        let bad = Matrix::hstack(&[&deficient, &h.column_range(2, 10)]).unwrap();
        assert!(!check_distance3(&bad, c.partition()).unwrap());
    }

    #[test]
    fn bounds_for_the_binary_example() {
        let p = LengthPartition::uniform(2, 5).unwrap();
        let rep = length_bounds(2, 1, 4, &p);
        assert!(rep.all_hold());
        let proj = rep.get("projective").unwrap();
        assert_eq!((proj.rhs.as_str(), proj.tight), ("15", false));
        assert!(rep.get("singleton").unwrap().tight);
        assert_eq!(rep.get("length_equality").unwrap().holds, Some(true));
        assert_eq!(rep.get("rank_metric").unwrap().holds, None);
        let classic = length_bounds(2, 1, 3, &LengthPartition::uniform(1, 7).unwrap());
        assert!(classic.get("projective").unwrap().tight);
    }

    #[test]
    fn perfect_identity() {
        assert!(perfect_code_check(&hamming(2, 2, 4)).unwrap());
        assert!(perfect_code_check(&hamming(2, 1, 3)).unwrap());
        assert!(perfect_code_check(&hamming(3, 2, 4)).unwrap());
    }

    #[test]
    fn simplex_bound_values() {
        let v = |q, n, r| simplex_distance_bound(q, n, r).unwrap();
        assert_eq!(v(2, 2, 4), BigUint::from(3u32));
        assert_eq!(v(2, 1, 3), BigUint::from(4u32));
        assert_eq!(v(2, 2, 5), BigUint::from(4u32));
    }

    #[test]
    fn json_round_trip() {
        let c = hamming(2, 2, 4);
        let back = CodeDescriptor::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn biduality() {
        let c = hamming(2, 2, 4);
        let s = simplex_from_hamming(&c).unwrap();
        assert_eq!((s.n(), s.k()), (10, 4));
        let back = s.dual(CodeKind::Hamming).unwrap();
        assert!(back.same_code(&c));
        assert!(c.generator().mul(&s.generator().transpose()).unwrap().is_zero());
    }
}
