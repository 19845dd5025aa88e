//! Partial spreads of `GF(q)^r`: the Desarguesian construction, size bounds
//! and an exhaustive branch-and-bound search.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::galois::{FieldCtx, Matrix};
use crate::sumrank::increment;

/// Subspaces of `GF(q)^r`, each given by an `r x n_i` matrix whose columns
/// are a basis, pairwise intersecting only in zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpreadFamily {
    ctx: Arc<FieldCtx>,
    r: usize,
    members: Vec<Matrix>,
}

impl SpreadFamily {
    /// Validates full column rank and pairwise trivial intersection.
    pub fn new(ctx: &Arc<FieldCtx>, r: usize, members: Vec<Matrix>) -> Result<Self> {
        if ctx.m() != 1 {
            return Err(Error::Precondition("spreads live over the base field".into()));
        }
        for (i, h) in members.iter().enumerate() {
            if !h.ctx().same_field(ctx) || h.rows() != r {
                return Err(Error::InvariantViolation(format!(
                    "member {i} is not an r x n_i matrix over GF({})",
                    ctx.q()
                )));
            }
            if h.cols() == 0 || h.rank() != h.cols() {
                return Err(Error::InvariantViolation(format!(
                    "member {i} does not have full column rank"
                )));
            }
        }
        let span_total = members
            .iter()
            .try_fold(0u64, |acc, h| (ctx.q() as u64).checked_pow(h.cols() as u32).and_then(|s| acc.checked_add(s)));
        if span_total.is_some_and(|t| t <= POINT_CHECK_LIMIT) {
            check_disjoint_points(ctx, &members)?;
        } else {
            check_disjoint_pairs(&members)?;
        }
        Ok(SpreadFamily {
            ctx: ctx.clone(),
            r,
            members,
        })
    }

    pub fn ctx(&self) -> &Arc<FieldCtx> {
        &self.ctx
    }

    pub fn q(&self) -> u32 {
        self.ctx.q()
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn members(&self) -> &[Matrix] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.members.iter().map(Matrix::cols).collect()
    }

    /// JSON export: `{q, r, dims, members}` with members in matrix text format.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(SpreadJson {
            q: self.q(),
            r: self.r,
            dims: self.dims(),
            members: self.members.iter().map(Matrix::to_text).collect(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let s: SpreadJson =
            serde_json::from_value(v.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let ctx = FieldCtx::new(s.q, 1)?;
        let members = s
            .members
            .iter()
            .map(|t| Matrix::from_text_in(t, &ctx))
            .collect::<Result<Vec<_>>>()?;
        if members.iter().map(Matrix::cols).ne(s.dims.iter().copied()) {
            return Err(Error::Parse("dims disagree with member shapes".into()));
        }
        SpreadFamily::new(&ctx, s.r, members)
    }
}

#[derive(Serialize, Deserialize)]
struct SpreadJson {
    q: u32,
    r: usize,
    dims: Vec<usize>,
    members: Vec<String>,
}

/// `((q^r - q^s)/(q^N - 1) - q^s + 1, (q^r - q^s)/(q^N - 1))` with `s = r mod N`.
pub fn spread_size_bounds(q: u32, n: usize, r: usize) -> Result<(BigUint, BigUint)> {
    if n == 0 || n > r {
        return Err(Error::Precondition(format!("need 1 <= N <= r, got N={n}, r={r}")));
    }
    let qb = BigUint::from(q);
    let s = r % n;
    let upper = (qb.pow(r as u32) - qb.pow(s as u32)) / (qb.pow(n as u32) - 1u32);
    let lower = &upper + 1u32 - qb.pow(s as u32);
    Ok((lower, upper))
}

/// Largest total span size checked through shared projective points.
const POINT_CHECK_LIMIT: u64 = 1 << 24;

/// Members intersect trivially exactly when no projective point lies in two
/// of them.
fn check_disjoint_points(ctx: &Arc<FieldCtx>, members: &[Matrix]) -> Result<()> {
    let mut owner: HashMap<Vec<u32>, usize> = HashMap::new();
    for (i, h) in members.iter().enumerate() {
        let mut a = vec![0u32; h.cols()];
        while increment(&mut a, ctx.q()) {
            if a.iter().find(|&&x| x != 0) != Some(&1) {
                continue;
            }
            let v = normalize(ctx, &h.mul_vec(&a)?);
            if let Some(j) = owner.insert(v, i) {
                return Err(Error::InvariantViolation(format!(
                    "members {j} and {i} intersect nontrivially"
                )));
            }
        }
    }
    Ok(())
}

fn check_disjoint_pairs(members: &[Matrix]) -> Result<()> {
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            let joint = Matrix::hstack(&[&members[i], &members[j]])?;
            if joint.rank() != members[i].cols() + members[j].cols() {
                return Err(Error::InvariantViolation(format!(
                    "members {i} and {j} intersect nontrivially"
                )));
            }
        }
    }
    Ok(())
}

/// Desarguesian `N`-spread of `GF(q)^r` for `N | r`: the `GF(q)`-expansions
/// of the projective points of `GF(q^N)^(r/N)`.
pub fn desarguesian_spread(q: u32, n: usize, r: usize) -> Result<SpreadFamily> {
    if n == 0 || r == 0 || r % n != 0 {
        return Err(Error::Precondition(format!("N={n} must divide r={r}")));
    }
    let big = FieldCtx::new(q, n as u32)?;
    let base = big.base_ctx();
    let t = r / n;
    let order = big.order();
    let basis: Vec<u32> = (0..n as u32).map(|j| q.pow(j)).collect();
    let mut members = Vec::new();
    for lead in 0..t {
        let mut tail = vec![0u32; t - lead - 1];
        loop {
            let mut point = vec![0u32; t];
            point[lead] = big.one();
            point[lead + 1..].copy_from_slice(&tail);
            let mut data = vec![0u32; r * n];
            for (b, &alpha) in basis.iter().enumerate() {
                for (j, &pj) in point.iter().enumerate() {
                    for (c, coord) in big.coords(big.mul(alpha, pj)).into_iter().enumerate() {
                        data[(j * n + c) * n + b] = coord;
                    }
                }
            }
            members.push(Matrix::from_vec(&base, r, n, data)?);
            if !increment(&mut tail, order) {
                break;
            }
        }
    }
    SpreadFamily::new(&base, r, members)
}

/// What [`search_partial_spread`] looks for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpreadTarget {
    /// Members of dimension `n`; stop early once `target` members are found.
    Uniform { n: usize, target: Option<usize> },
    /// At most as many members of each dimension as it occurs in `dims`;
    /// maximize the member count, then the total dimension.
    Profile { dims: Vec<usize> },
}

#[derive(Debug, Clone)]
pub struct SpreadSearch {
    pub family: SpreadFamily,
    /// True when no larger family exists for the requested dims.
    pub certified: bool,
    pub nodes: u64,
}

/// Projective points of `GF(q)^r` and the point sets of candidate subspaces.
struct Geometry {
    q: u32,
    r: usize,
    base: Arc<FieldCtx>,
    point_index: HashMap<Vec<u32>, usize>,
    words: usize,
}

impl Geometry {
    fn new(base: &Arc<FieldCtx>, r: usize) -> Result<Self> {
        let q = base.q();
        let total = (q as u64).checked_pow(r as u32).filter(|&t| t <= 1 << 20).ok_or_else(|| {
            Error::Precondition(format!("GF({q})^{r} is too large to search"))
        })?;
        let mut point_index = HashMap::new();
        let mut v = vec![0u32; r];
        for _ in 1..total {
            increment(&mut v, q);
            if normalize(base, &v) == v {
                let idx = point_index.len();
                point_index.insert(v.clone(), idx);
            }
        }
        let words = point_index.len().div_ceil(64);
        Ok(Geometry {
            q,
            r,
            base: base.clone(),
            point_index,
            words,
        })
    }

    fn points(&self) -> usize {
        self.point_index.len()
    }

    /// All `d`-dimensional subspaces in reduced echelon form, as
    /// `(basis rows, point bitset)`, in lexicographic order of the rows.
    fn subspaces(&self, d: usize, limit: u64) -> Result<Vec<(Matrix, Vec<u64>)>> {
        let mut out = Vec::new();
        let mut pivots: Vec<usize> = (0..d).collect();
        loop {
            // free slots: row i may be nonzero at non-pivot columns right of its pivot
            let slots: Vec<(usize, usize)> = (0..d)
                .flat_map(|i| {
                    let piv = pivots.clone();
                    (pivots[i] + 1..self.r)
                        .filter(move |c| !piv.contains(c))
                        .map(move |c| (i, c))
                })
                .collect();
            let mut vals = vec![0u32; slots.len()];
            loop {
                if out.len() as u64 >= limit {
                    return Err(Error::BudgetExceeded { budget: limit });
                }
                let mut rows = vec![vec![0u32; self.r]; d];
                for (i, &p) in pivots.iter().enumerate() {
                    rows[i][p] = self.base.one();
                }
                for (&(i, c), &v) in slots.iter().zip(&vals) {
                    rows[i][c] = v;
                }
                let m = Matrix::from_rows(&self.base, &rows)?;
                let bits = self.point_set(&m);
                out.push((m, bits));
                if !increment(&mut vals, self.q) {
                    break;
                }
            }
            if !next_combination(&mut pivots, self.r) {
                break;
            }
        }
        out.sort_by(|a, b| a.0.data().cmp(b.0.data()));
        Ok(out)
    }

    fn point_set(&self, rows: &Matrix) -> Vec<u64> {
        let mut bits = vec![0u64; self.words];
        let mut coeffs = vec![0u32; rows.rows()];
        while increment(&mut coeffs, self.q) {
            let v = rows.vec_mul(&coeffs).expect("shapes agree");
            let idx = self.point_index[&normalize(&self.base, &v)];
            bits[idx / 64] |= 1 << (idx % 64);
        }
        bits
    }
}

fn normalize(f: &FieldCtx, v: &[u32]) -> Vec<u32> {
    match v.iter().find(|&&x| x != 0) {
        Some(&lead) => {
            let inv = f.inv(lead).expect("nonzero");
            v.iter().map(|&x| f.mul(inv, x)).collect()
        }
        None => v.to_vec(),
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    for i in (0..k).rev() {
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn disjoint(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).all(|(x, y)| x & y == 0)
}

fn union_into(acc: &mut [u64], b: &[u64]) {
    for (x, y) in acc.iter_mut().zip(b) {
        *x |= y;
    }
}

fn remove_from(acc: &mut [u64], b: &[u64]) {
    for (x, y) in acc.iter_mut().zip(b) {
        *x &= !y;
    }
}

fn pts_of_dim(q: u32, d: usize) -> usize {
    ((q as usize).pow(d as u32) - 1) / (q as usize - 1)
}

const SUBSPACE_LIMIT: u64 = 200_000;
const GREEDY_RESTARTS: usize = 256;

/// Branch-and-bound search for a largest partial spread.
///
/// Candidate subspaces are enumerated in reduced echelon form and encoded as
/// sets of projective points, so trivial intersection becomes disjointness.
/// On budget exhaustion the best family found so far is returned uncertified.
pub fn search_partial_spread(q: u32, target: &SpreadTarget, r: usize, budget: u64) -> Result<SpreadSearch> {
    let base = FieldCtx::new(q, 1)?;
    let geo = Geometry::new(&base, r)?;
    match target {
        SpreadTarget::Uniform { n, target } => search_uniform(&geo, *n, *target, budget),
        SpreadTarget::Profile { dims } => search_profile(&geo, dims, budget),
    }
}

fn finish(geo: &Geometry, chosen: Vec<Matrix>, certified: bool, nodes: u64) -> Result<SpreadSearch> {
    let members = chosen.into_iter().map(|m| m.transpose()).collect();
    Ok(SpreadSearch {
        family: SpreadFamily::new(&geo.base, geo.r, members)?,
        certified,
        nodes,
    })
}

fn search_uniform(geo: &Geometry, n: usize, target: Option<usize>, budget: u64) -> Result<SpreadSearch> {
    if n == 0 || n > geo.r {
        return Err(Error::Precondition(format!("need 1 <= N <= r, got N={n}, r={}", geo.r)));
    }
    let cands = geo.subspaces(n, SUBSPACE_LIMIT)?;
    let upper = spread_size_bounds(geo.q, n, geo.r)?.1;
    let upper = usize::try_from(upper).unwrap_or(usize::MAX);
    let points = geo.points();
    let k = pts_of_dim(geo.q, n);

    // greedy lexicographic packing as a starting incumbent
    let mut best: Vec<usize> = Vec::new();
    let mut used = vec![0u64; geo.words];
    for (i, (_, bits)) in cands.iter().enumerate() {
        if disjoint(&used, bits) {
            union_into(&mut used, bits);
            best.push(i);
        }
    }
    let goal = target.unwrap_or(upper).min(upper);
    // randomized greedy restarts from a fixed seed
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut order: Vec<usize> = (0..cands.len()).collect();
    for _ in 0..GREEDY_RESTARTS {
        if best.len() >= goal {
            break;
        }
        order.shuffle(&mut rng);
        let mut used = vec![0u64; geo.words];
        let mut picked = Vec::new();
        for &i in &order {
            if disjoint(&used, &cands[i].1) {
                union_into(&mut used, &cands[i].1);
                picked.push(i);
            }
        }
        if picked.len() > best.len() {
            best = picked;
        }
    }
    let to_matrices = |idx: &[usize]| idx.iter().map(|&i| cands[i].0.clone()).collect::<Vec<_>>();
    if best.len() >= goal {
        let certified = best.len() >= upper;
        return finish(geo, to_matrices(&best), certified, 0);
    }

    // by_point[p] = candidates containing point p
    let mut by_point: Vec<Vec<usize>> = vec![Vec::new(); points];
    for (i, (_, bits)) in cands.iter().enumerate() {
        for p in 0..points {
            if bits[p / 64] >> (p % 64) & 1 == 1 {
                by_point[p].push(i);
            }
        }
    }
    let mut nodes = 0u64;
    // try sizes from the goal downwards; the first success is maximal
    // among the sizes tried above it
    let mut size = goal;
    while size > best.len() {
        let slack = points - size * k;
        let mut state = Packing {
            cands: &cands,
            by_point: &by_point,
            points,
            used: vec![0u64; geo.words],
            chosen: Vec::new(),
            nodes: &mut nodes,
            budget,
        };
        match state.exact(size, slack, 0) {
            Ok(true) => {
                let found = state.chosen.clone();
                // every size between this one and the goal was ruled out
                let certified = size < goal || size == upper;
                return finish(geo, to_matrices(&found), certified, nodes);
            }
            Ok(false) => size -= 1,
            Err(Error::BudgetExceeded { .. }) => {
                return finish(geo, to_matrices(&best), false, nodes);
            }
            Err(e) => return Err(e),
        }
    }
    // every size above the incumbent was ruled out
    finish(geo, to_matrices(&best), true, nodes)
}

struct Packing<'a> {
    cands: &'a [(Matrix, Vec<u64>)],
    by_point: &'a [Vec<usize>],
    points: usize,
    used: Vec<u64>,
    chosen: Vec<usize>,
    nodes: &'a mut u64,
    budget: u64,
}

impl Packing<'_> {
    /// Looks for `size` more members, leaving at most `slack` points uncovered.
    /// Branches on the lowest point not yet decided: cover it with some
    /// candidate or spend one unit of slack leaving it uncovered.
    fn exact(&mut self, size: usize, slack: usize, from: usize) -> Result<bool> {
        if self.chosen.len() == size {
            return Ok(true);
        }
        *self.nodes += 1;
        if *self.nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        let Some(p) = (from..self.points).find(|&p| self.used[p / 64] >> (p % 64) & 1 == 0) else {
            return Ok(false);
        };
        let first_move = self.chosen.is_empty() && p == 0;
        for &c in &self.by_point[p] {
            let bits = &self.cands[c].1;
            if !disjoint(&self.used, bits) {
                continue;
            }
            union_into(&mut self.used, bits);
            self.chosen.push(c);
            if self.exact(size, slack, p + 1)? {
                return Ok(true);
            }
            self.chosen.pop();
            remove_from(&mut self.used, bits);
            // the stabilizer of a point is transitive on subspaces through it
            if first_move {
                break;
            }
        }
        if slack > 0 {
            self.used[p / 64] |= 1 << (p % 64);
            let found = self.exact(size, slack - 1, p + 1)?;
            self.used[p / 64] &= !(1 << (p % 64));
            if found {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn search_profile(geo: &Geometry, dims: &[usize], budget: u64) -> Result<SpreadSearch> {
    if dims.is_empty() || dims.iter().any(|&d| d == 0 || d > geo.r) {
        return Err(Error::Precondition(format!(
            "dims must lie in 1..={}, got {dims:?}",
            geo.r
        )));
    }
    let mut quota: Vec<usize> = vec![0; geo.r + 1];
    for &d in dims {
        quota[d] += 1;
    }
    // larger dimensions first, lexicographic within a dimension
    let mut cands: Vec<(usize, Matrix, Vec<u64>)> = Vec::new();
    for d in (1..=geo.r).rev() {
        if quota[d] > 0 {
            for (m, bits) in geo.subspaces(d, SUBSPACE_LIMIT)? {
                cands.push((d, m, bits));
            }
        }
    }
    let mut search = ProfileSearch {
        q: geo.q,
        cands: &cands,
        quota,
        used: vec![0u64; geo.words],
        free: geo.points(),
        chosen: Vec::new(),
        best: Vec::new(),
        best_key: (0, 0),
        total: dims.len(),
        nodes: 0,
        budget,
    };
    let certified = match search.dfs(0) {
        Ok(()) => true,
        Err(Error::BudgetExceeded { .. }) => search.best.len() == dims.len(),
        Err(e) => return Err(e),
    };
    let best = search.best.iter().map(|&i| cands[i].1.clone()).collect();
    let nodes = search.nodes;
    finish(geo, best, certified, nodes)
}

struct ProfileSearch<'a> {
    q: u32,
    cands: &'a [(usize, Matrix, Vec<u64>)],
    quota: Vec<usize>,
    used: Vec<u64>,
    free: usize,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_key: (usize, usize),
    total: usize,
    nodes: u64,
    budget: u64,
}

impl ProfileSearch<'_> {
    fn key(&self) -> (usize, usize) {
        let dims: usize = self.chosen.iter().map(|&i| self.cands[i].0).sum();
        (self.chosen.len(), dims)
    }

    /// Members still placeable: fill the remaining quotas smallest dimension
    /// first until the free points run out.
    fn count_bound(&self) -> usize {
        let mut free = self.free;
        let mut extra = 0;
        for (d, &left) in self.quota.iter().enumerate().skip(1) {
            let k = pts_of_dim(self.q, d);
            let take = left.min(free / k);
            extra += take;
            free -= take * k;
        }
        self.chosen.len() + extra
    }

    fn dfs(&mut self, from: usize) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded { budget: self.budget });
        }
        let key = self.key();
        if key > self.best_key {
            self.best_key = key;
            self.best = self.chosen.clone();
        }
        if self.best.len() == self.total || self.count_bound() < self.best_key.0 {
            return Ok(());
        }
        for c in from..self.cands.len() {
            let (d, _, bits) = &self.cands[c];
            if self.quota[*d] == 0 || !disjoint(&self.used, bits) {
                continue;
            }
            let k = pts_of_dim(self.q, *d);
            union_into(&mut self.used, bits);
            self.quota[*d] -= 1;
            self.free -= k;
            self.chosen.push(c);
            self.dfs(c + 1)?;
            self.chosen.pop();
            self.free += k;
            self.quota[*d] += 1;
            remove_from(&mut self.used, bits);
            if self.best.len() == self.total {
                return Ok(());
            }
        }
        Ok(())
    }
}
