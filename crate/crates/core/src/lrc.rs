//! Locally repairable codes `C_out diag(A_1, ..., A_l)` built from an outer
//! sum-rank code and local linear codes over the base field.

use std::collections::BTreeSet;
use std::ops::Range;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codes::{check_distance3, min_sumrank_distance, CodeDescriptor, CodeKind};
use crate::error::{Error, Result};
use crate::galois::{FieldCtx, Matrix};
use crate::sumrank::{increment, LengthPartition};

/// Work allowed for the exact outer distance before falling back to a bound.
pub const OUTER_DISTANCE_BUDGET: u64 = 2_000_000;

/// Local code sizes `q^(n_i)` above this are not enumerated.
const LOCAL_ENUMERATION_LIMIT: u64 = 1 << 20;

/// Single-parity generator `[I | 1]` of size `n x (n + 1)`.
pub fn single_parity_generator(base: &Arc<FieldCtx>, n: usize) -> Matrix {
    let mut a = Matrix::zeros(base, n, n + 1);
    for i in 0..n {
        a.set(i, i, 1);
        a.set(i, n, 1);
    }
    a
}

#[derive(Debug, Clone)]
pub struct LrcDescriptor {
    outer: CodeDescriptor,
    locals: Vec<Matrix>,
    local_checks: Vec<Matrix>,
    local_distances: Vec<usize>,
    global: CodeDescriptor,
    outer_distance: usize,
    outer_distance_exact: bool,
}

/// Builds the global code; every `A_i` must have full row rank `n_i`.
pub fn build_lrc(outer: &CodeDescriptor, locals: Vec<Matrix>) -> Result<LrcDescriptor> {
    let p = outer.partition();
    if locals.len() != p.ell() {
        return Err(Error::Partition(format!(
            "{} local codes for {} blocks",
            locals.len(),
            p.ell()
        )));
    }
    let base = outer.ctx().base_ctx();
    for (i, (a, &n)) in locals.iter().zip(p.sublengths()).enumerate() {
        if !a.ctx().same_field(&base) {
            return Err(Error::ContextMismatch);
        }
        if a.rows() != n {
            return Err(Error::Partition(format!(
                "local code {i} has {} rows, block length is {n}",
                a.rows()
            )));
        }
        if a.rank() != n {
            return Err(Error::Precondition(format!("local generator {i} is rank deficient")));
        }
    }
    let ext = outer.ctx();
    let lifted: Vec<Matrix> = locals.iter().map(|a| a.lift(ext)).collect::<Result<_>>()?;
    let g_out = outer.generator();
    let mut parts = Vec::with_capacity(p.ell());
    for (i, a) in lifted.iter().enumerate() {
        let range = p.block(i);
        parts.push(g_out.column_range(range.start, range.end).mul(a)?);
    }
    let g = Matrix::hstack(&parts.iter().collect::<Vec<_>>())?;
    if g.rank() != outer.k() {
        return Err(Error::InvariantViolation("global generator lost rank".into()));
    }
    let global_partition = LengthPartition::new(locals.iter().map(Matrix::cols).collect())?;
    let global = CodeDescriptor::from_generator(ext, &global_partition, g, CodeKind::Global)?;
    let local_checks = locals.iter().map(Matrix::kernel).collect();
    let local_distances = locals.iter().map(local_distance).collect::<Result<_>>()?;
    let (outer_distance, outer_distance_exact) = outer_distance(outer)?;
    Ok(LrcDescriptor {
        outer: outer.clone(),
        locals,
        local_checks,
        local_distances,
        global,
        outer_distance,
        outer_distance_exact,
    })
}

/// Hamming distance of the row space of `a`.
fn local_distance(a: &Matrix) -> Result<usize> {
    let q = a.ctx().order();
    if (q as u64).checked_pow(a.rows() as u32).is_none_or(|s| s > LOCAL_ENUMERATION_LIMIT) {
        return Err(Error::BudgetExceeded {
            budget: LOCAL_ENUMERATION_LIMIT,
        });
    }
    let mut x = vec![0u32; a.rows()];
    let mut best = a.cols();
    while increment(&mut x, q) {
        let w = a.vec_mul(&x)?.iter().filter(|&&v| v != 0).count();
        best = best.min(w);
    }
    Ok(best)
}

/// Exact distance when affordable, otherwise a certified lower bound.
fn outer_distance(outer: &CodeDescriptor) -> Result<(usize, bool)> {
    match min_sumrank_distance(outer, OUTER_DISTANCE_BUDGET) {
        Ok(Some(d)) => Ok((d, true)),
        Ok(None) => Ok((outer.n() + 1, true)),
        Err(Error::BudgetExceeded { .. }) => {
            let bound = if check_distance3(outer.parity_check(), outer.partition())? { 3 } else { 1 };
            Ok((bound, false))
        }
        Err(e) => Err(e),
    }
}

/// Read access to a possibly erased word.
pub trait SymbolSource {
    fn len(&self) -> usize;
    fn read(&self, j: usize) -> Option<u32>;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl SymbolSource for [Option<u32>] {
    fn len(&self) -> usize {
        <[Option<u32>]>::len(self)
    }

    fn read(&self, j: usize) -> Option<u32> {
        self[j]
    }
}

impl SymbolSource for Vec<Option<u32>> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn read(&self, j: usize) -> Option<u32> {
        self[j]
    }
}

impl LrcDescriptor {
    pub fn outer(&self) -> &CodeDescriptor {
        &self.outer
    }

    pub fn locals(&self) -> &[Matrix] {
        &self.locals
    }

    pub fn global(&self) -> &CodeDescriptor {
        &self.global
    }

    pub fn global_generator(&self) -> &Matrix {
        self.global.generator()
    }

    /// Total length `M`.
    pub fn length(&self) -> usize {
        self.global.n()
    }

    pub fn dimension(&self) -> usize {
        self.global.k()
    }

    /// Localities `n_i`.
    pub fn localities(&self) -> &[usize] {
        self.outer.partition().sublengths()
    }

    pub fn groups(&self) -> usize {
        self.locals.len()
    }

    /// Coordinates `Γ_i`.
    pub fn group(&self, i: usize) -> Range<usize> {
        self.global.partition().block(i)
    }

    pub fn local_distance(&self, i: usize) -> usize {
        self.local_distances[i]
    }

    /// Outer sum-rank distance, or a lower bound when `!outer_distance_exact()`.
    pub fn outer_distance(&self) -> usize {
        self.outer_distance
    }

    pub fn outer_distance_exact(&self) -> bool {
        self.outer_distance_exact
    }

    pub fn encode(&self, message: &[u32]) -> Result<Vec<u32>> {
        self.global.encode(message)
    }

    /// Repairs the erasures of group `i` from that group's symbols only.
    ///
    /// Returns the repaired `(coordinate, value)` pairs.
    pub fn repair_group<S: SymbolSource + ?Sized>(&self, word: &S, i: usize) -> Result<Vec<(usize, u32)>> {
        self.check_length(word.len())?;
        let range = self.group(i);
        let mut erased = Vec::new();
        let mut known = Vec::new();
        for j in range.clone() {
            match word.read(j) {
                None => erased.push(j - range.start),
                Some(v) => known.push((j - range.start, v)),
            }
        }
        if erased.is_empty() {
            return Ok(Vec::new());
        }
        if erased.len() >= self.local_distances[i] {
            return Err(Error::LocalRepairImpossible {
                group: i,
                erasures: erased.len(),
                local_distance: self.local_distances[i],
            });
        }
        let ext = self.global.ctx();
        let k = &self.local_checks[i];
        // K_E x = -K_R c_R
        let mut rhs = vec![0u32; k.rows()];
        for &(col, v) in &known {
            for (row, acc) in rhs.iter_mut().enumerate() {
                let h = ext.embed_base(k.get(row, col));
                *acc = ext.sub(*acc, ext.mul(h, v));
            }
        }
        let ke = k.select_columns(&erased).lift(ext)?;
        let x = ke
            .solve(&rhs)?
            .ok_or_else(|| Error::InvariantViolation(format!("group {i} has inconsistent known symbols")))?;
        Ok(erased.iter().zip(x).map(|(&col, v)| (range.start + col, v)).collect())
    }

    /// Fills the erasures of group `i`.
    pub fn local_repair(&self, word: &[Option<u32>], i: usize) -> Result<Vec<Option<u32>>> {
        let mut out = word.to_vec();
        for (j, v) in self.repair_group(word, i)? {
            out[j] = Some(v);
        }
        Ok(out)
    }

    /// `d_out > n - sum_i rank(A_i restricted to R_i)`.
    pub fn global_correctable(&self, pattern: &ErasurePattern) -> bool {
        self.rank_sum(pattern)
            .is_some_and(|s| self.outer_distance + s > self.outer.n())
    }

    fn rank_sum(&self, pattern: &ErasurePattern) -> Option<usize> {
        if pattern.length != self.length() {
            return None;
        }
        let mut total = 0;
        for (i, a) in self.locals.iter().enumerate() {
            let range = self.group(i);
            let kept: Vec<usize> = range
                .clone()
                .filter(|j| !pattern.erased.contains(j))
                .map(|j| j - range.start)
                .collect();
            total += a.select_columns(&kept).rank();
        }
        Some(total)
    }

    /// Recovers the codeword by a punctured-generator solve.
    pub fn global_erasure_decode(&self, word: &[Option<u32>]) -> Result<Vec<u32>> {
        let pattern = ErasurePattern::of_word(word);
        ErasureDecoder::new(self, &pattern)?.decode(word)
    }

    /// Local repair in every group that allows it, then a global solve for
    /// whatever remains.
    pub fn repair_then_decode(&self, word: &[Option<u32>]) -> Result<Vec<u32>> {
        self.check_length(word.len())?;
        let mut w = word.to_vec();
        for i in 0..self.groups() {
            let missing = self.group(i).filter(|&j| w[j].is_none()).count();
            if missing > 0 && missing < self.local_distances[i] {
                for (j, v) in self.repair_group(word, i)? {
                    w[j] = Some(v);
                }
            }
        }
        if w.iter().all(Option::is_some) {
            return Ok(w.into_iter().map(|v| v.unwrap_or(0)).collect());
        }
        self.global_erasure_decode(&w)
    }

    fn check_length(&self, len: usize) -> Result<()> {
        if len != self.length() {
            return Err(Error::Dimension(format!(
                "word of length {len} for a code of length {}",
                self.length()
            )));
        }
        Ok(())
    }
}

/// An erased coordinate set `E ⊆ [M]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErasurePattern {
    length: usize,
    erased: BTreeSet<usize>,
}

impl ErasurePattern {
    pub fn new(length: usize, erased: impl IntoIterator<Item = usize>) -> Result<Self> {
        let erased: BTreeSet<usize> = erased.into_iter().collect();
        if let Some(&j) = erased.iter().find(|&&j| j >= length) {
            return Err(Error::Precondition(format!("erased index {j} outside 0..{length}")));
        }
        Ok(ErasurePattern { length, erased })
    }

    pub fn of_word(word: &[Option<u32>]) -> Self {
        ErasurePattern {
            length: word.len(),
            erased: (0..word.len()).filter(|&j| word[j].is_none()).collect(),
        }
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn erased(&self) -> &BTreeSet<usize> {
        &self.erased
    }

    pub fn len(&self) -> usize {
        self.erased.len()
    }

    pub fn is_empty(&self) -> bool {
        self.erased.is_empty()
    }

    /// `(E_i, R_i)` for the group `range`.
    pub fn split(&self, range: Range<usize>) -> (Vec<usize>, Vec<usize>) {
        range.partition(|j| self.erased.contains(j))
    }

    /// Applies the pattern to a full word.
    pub fn apply(&self, word: &[u32]) -> Vec<Option<u32>> {
        word.iter()
            .enumerate()
            .map(|(j, &v)| (!self.erased.contains(&j)).then_some(v))
            .collect()
    }
}

/// Erasure decoder prepared for one pattern: an information set inside the
/// surviving coordinates and the inverse of `G` restricted to it.
#[derive(Debug, Clone)]
pub struct ErasureDecoder<'a> {
    lrc: &'a LrcDescriptor,
    pattern: ErasurePattern,
    info: Vec<usize>,
    inv: Matrix,
}

impl<'a> ErasureDecoder<'a> {
    /// Fails with `NotCorrectable` unless the global criterion holds.
    pub fn new(lrc: &'a LrcDescriptor, pattern: &ErasurePattern) -> Result<Self> {
        if pattern.length != lrc.length() {
            return Err(Error::Dimension(format!(
                "pattern of length {} for a code of length {}",
                pattern.length,
                lrc.length()
            )));
        }
        if !lrc.global_correctable(pattern) {
            return Err(Error::NotCorrectable);
        }
        let kept: Vec<usize> = (0..lrc.length()).filter(|j| !pattern.erased.contains(j)).collect();
        let g = lrc.global_generator();
        let punctured = g.select_columns(&kept);
        let (_, pivots) = punctured.rref();
        if pivots.len() != lrc.dimension() {
            return Err(Error::InvariantViolation(
                "surviving coordinates do not determine the message".into(),
            ));
        }
        let info: Vec<usize> = pivots.iter().map(|&p| kept[p]).collect();
        let inv = g
            .select_columns(&info)
            .inverse()
            .ok_or_else(|| Error::InvariantViolation("information set is singular".into()))?;
        Ok(ErasureDecoder {
            lrc,
            pattern: pattern.clone(),
            info,
            inv,
        })
    }

    pub fn pattern(&self) -> &ErasurePattern {
        &self.pattern
    }

    pub fn decode(&self, word: &[Option<u32>]) -> Result<Vec<u32>> {
        self.lrc.check_length(word.len())?;
        let mut restricted = Vec::with_capacity(self.info.len());
        for &j in &self.info {
            restricted.push(
                word[j].ok_or_else(|| Error::Precondition(format!("coordinate {j} is erased")))?,
            );
        }
        let message = self.inv.vec_mul(&restricted)?;
        let codeword = self.lrc.encode(&message)?;
        for (j, v) in word.iter().enumerate() {
            if v.is_some_and(|v| v != codeword[j]) {
                return Err(Error::InvariantViolation(format!(
                    "surviving symbol {j} disagrees with the decoded codeword"
                )));
            }
        }
        Ok(codeword)
    }
}

/// One row of the parameter table for single-parity locals on a proper
/// Hamming outer code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LrcParameters {
    /// Locality `N`.
    pub locality: u64,
    pub local_groups: u64,
    pub global_parities: u64,
    pub dimension: u64,
    pub length: u64,
}

/// `l = (q^r - 1)/(q^N - 1)`, `M = (N + 1) l`, `k = N l - r`.
pub fn lrc_parameters(q: u32, n: usize, r: usize) -> Result<LrcParameters> {
    if n == 0 || r % n != 0 {
        return Err(Error::Precondition(format!("N = {n} must divide r = {r}")));
    }
    let overflow = || Error::Precondition("parameters overflow 64 bits".into());
    let q = q as u64;
    let qr = q.checked_pow(r as u32).ok_or_else(overflow)?;
    let qn = q.checked_pow(n as u32).ok_or_else(overflow)?;
    let ell = (qr - 1) / (qn - 1);
    let n = n as u64;
    Ok(LrcParameters {
        locality: n,
        local_groups: ell,
        global_parities: r as u64,
        dimension: (n * ell).checked_sub(r as u64).ok_or_else(overflow)?,
        length: (n + 1).checked_mul(ell).ok_or_else(overflow)?,
    })
}

pub fn lrc_parameter_table(q: u32, pairs: &[(usize, usize)]) -> Result<Vec<LrcParameters>> {
    pairs.iter().map(|&(n, r)| lrc_parameters(q, n, r)).collect()
}

pub const TABLE_CSV_HEADER: &str = "N,local_groups,global_parities,dimension,length";

pub fn table_csv(rows: &[LrcParameters]) -> String {
    let mut s = String::from(TABLE_CSV_HEADER);
    s.push('\n');
    for p in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            p.locality, p.local_groups, p.global_parities, p.dimension, p.length
        ));
    }
    s
}

/// Reference binary parameter sets `(N, l, r, k, M)`. The first entry is
/// printed with `l = 4`, `M = 12`, which contradicts `k = 6` and the closed
/// forms (`l = 5`, `M = 15`).
pub const REFERENCE_TABLE_Q2: [LrcParameters; 8] = [
    row(2, 4, 4, 6, 12),
    row(2, 21, 6, 36, 63),
    row(3, 9, 6, 21, 36),
    row(3, 73, 9, 210, 292),
    row(4, 17, 8, 60, 85),
    row(4, 273, 12, 1080, 1365),
    row(5, 33, 10, 155, 198),
    row(5, 1057, 15, 5270, 6342),
];

const fn row(locality: u64, local_groups: u64, global_parities: u64, dimension: u64, length: u64) -> LrcParameters {
    LrcParameters {
        locality,
        local_groups,
        global_parities,
        dimension,
        length,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableComparison {
    pub computed: LrcParameters,
    pub reference: LrcParameters,
    /// Fields where the reference differs from the computed value.
    pub mismatches: Vec<String>,
}

impl TableComparison {
    pub fn matches(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Recomputes every reference row and lists the disagreeing fields.
pub fn compare_reference_table() -> Result<Vec<TableComparison>> {
    REFERENCE_TABLE_Q2
        .iter()
        .map(|reference| {
            let computed = lrc_parameters(2, reference.locality as usize, reference.global_parities as usize)?;
            let mut mismatches = Vec::new();
            let fields = [
                ("local_groups", computed.local_groups, reference.local_groups),
                ("dimension", computed.dimension, reference.dimension),
                ("length", computed.length, reference.length),
            ];
            for (name, c, r) in fields {
                if c != r {
                    mismatches.push(format!("{name}: computed {c}, listed {r}"));
                }
            }
            Ok(TableComparison {
                computed,
                reference: *reference,
                mismatches,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::hamming_from_spread;
    use crate::spreads::desarguesian_spread;

    fn lrc(q: u32, n: usize, r: usize) -> LrcDescriptor {
        let outer = hamming_from_spread(&desarguesian_spread(q, n, r).unwrap()).unwrap();
        let base = outer.ctx().base_ctx();
        let locals = vec![single_parity_generator(&base, n); outer.ell()];
        build_lrc(&outer, locals).unwrap()
    }

    #[test]
    fn identity_locals_reproduce_outer() {
        let outer = hamming_from_spread(&desarguesian_spread(2, 2, 4).unwrap()).unwrap();
        let base = outer.ctx().base_ctx();
        let l = build_lrc(&outer, vec![Matrix::identity(&base, 2); 5]).unwrap();
        assert!(l.global().generator().same_row_space(outer.generator()));
        assert_eq!(l.length(), 10);
    }

    #[test]
    fn shapes_of_single_parity_construction() {
        let l = lrc(2, 2, 4);
        assert_eq!((l.groups(), l.dimension(), l.length()), (5, 6, 15));
        assert_eq!(l.outer_distance(), 3);
        assert!(l.outer_distance_exact());
        assert_eq!(l.local_distance(0), 2);
        assert_eq!(l.group(1), 3..6);
    }

    #[test]
    fn rank_deficient_local_is_rejected() {
        let outer = hamming_from_spread(&desarguesian_spread(2, 2, 4).unwrap()).unwrap();
        let base = outer.ctx().base_ctx();
        let mut locals = vec![single_parity_generator(&base, 2); 5];
        locals[3] = Matrix::from_rows(&base, &[vec![1, 0, 1], vec![1, 0, 1]]).unwrap();
        assert!(matches!(build_lrc(&outer, locals), Err(Error::Precondition(_))));
    }

    #[test]
    fn single_erasure_is_xor_of_group() {
        let l = lrc(2, 2, 4);
        let c = l.encode(&[1, 0, 1, 1, 0, 1]).unwrap();
        for j in 0..15 {
            let mut w: Vec<Option<u32>> = c.iter().copied().map(Some).collect();
            w[j] = None;
            let g = j / 3;
            let fixed = l.local_repair(&w, g).unwrap();
            let others: u32 = l.group(g).filter(|&x| x != j).map(|x| c[x]).fold(0, |a, b| a ^ b);
            assert_eq!(fixed[j], Some(others));
            assert_eq!(fixed[j], Some(c[j]));
        }
    }

    #[test]
    fn two_erasures_in_group_are_not_local() {
        let l = lrc(2, 2, 4);
        let c = l.encode(&[1; 6]).unwrap();
        let mut w: Vec<Option<u32>> = c.into_iter().map(Some).collect();
        w[0] = None;
        w[1] = None;
        assert!(matches!(
            l.local_repair(&w, 0),
            Err(Error::LocalRepairImpossible { group: 0, erasures: 2, local_distance: 2 })
        ));
    }

    #[test]
    fn criterion_examples() {
        let l = lrc(2, 2, 4);
        assert!(l.global_correctable(&ErasurePattern::new(15, []).unwrap()));
        assert!(l.global_correctable(&ErasurePattern::new(15, [0, 3, 6, 9, 12, 1, 4]).unwrap()));
        // a whole group lost plus one more symbol elsewhere
        assert!(!l.global_correctable(&ErasurePattern::new(15, [0, 1, 2, 3, 4]).unwrap()));
    }

    #[test]
    fn refused_pattern_is_not_decoded() {
        let l = lrc(2, 2, 4);
        let c = l.encode(&[0, 1, 1, 0, 1, 0]).unwrap();
        let p = ErasurePattern::new(15, [0, 1, 2, 3, 4]).unwrap();
        assert!(matches!(l.global_erasure_decode(&p.apply(&c)), Err(Error::NotCorrectable)));
    }

    #[test]
    fn ternary_local_repair() {
        let l = lrc(3, 2, 4);
        let msg: Vec<u32> = (0..l.dimension()).map(|i| (i as u32 * 2 + 1) % 3).collect();
        let c = l.encode(&msg).unwrap();
        let p = ErasurePattern::new(l.length(), [0, 5, 7]).unwrap();
        assert_eq!(l.repair_then_decode(&p.apply(&c)).unwrap(), c);
        assert_eq!(l.global_erasure_decode(&p.apply(&c)).unwrap(), c);
    }

    #[test]
    fn table_rows() {
        let rows = lrc_parameter_table(2, &[(3, 9), (5, 15), (2, 4)]).unwrap();
        assert_eq!((rows[0].local_groups, rows[0].dimension, rows[0].length), (73, 210, 292));
        assert_eq!((rows[1].local_groups, rows[1].dimension, rows[1].length), (1057, 5270, 6342));
        assert_eq!((rows[2].local_groups, rows[2].dimension, rows[2].length), (5, 6, 15));
        assert!(matches!(lrc_parameters(2, 2, 5), Err(Error::Precondition(_))));
    }

    #[test]
    fn csv_layout() {
        let csv = table_csv(&lrc_parameter_table(2, &[(2, 6)]).unwrap());
        assert_eq!(csv, "N,local_groups,global_parities,dimension,length\n2,21,6,36,63\n");
    }

    #[test]
    fn only_first_reference_row_disagrees() {
        let cmp = compare_reference_table().unwrap();
        assert_eq!(cmp.iter().filter(|c| !c.matches()).count(), 1);
        assert_eq!(cmp[0].mismatches.len(), 2);
    }
}
