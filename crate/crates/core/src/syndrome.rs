//! Single-error syndrome decoding for `m = 1` codes of sum-rank distance at
//! least 3.

use std::collections::HashMap;

use serde::Serialize;

use crate::codes::CodeDescriptor;
use crate::error::{Error, Result};
use crate::galois::{Matrix, OpCount};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    pub codeword: Vec<u32>,
    /// Block carrying the corrected error, if any.
    pub location: Option<usize>,
    /// The error restricted to that block.
    pub error: Option<Vec<u32>>,
    pub syndrome: Vec<u32>,
    /// Base-field multiplications and additions spent.
    pub ops: u64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeOptions {
    /// Keep scanning after the first solvable block and fail with
    /// `InvariantViolation` if another block is also solvable.
    pub verify_unique: bool,
}

fn require_base_field(c: &CodeDescriptor) -> Result<()> {
    if c.m() != 1 {
        return Err(Error::Precondition("syndrome decoding needs m = 1".into()));
    }
    Ok(())
}

fn counted_syndrome(c: &CodeDescriptor, y: &[u32], ops: &mut OpCount) -> Result<Vec<u32>> {
    if y.len() != c.n() {
        return Err(Error::Dimension(format!(
            "received word of length {} for a code of length {}",
            y.len(),
            c.n()
        )));
    }
    let s = c.syndrome(y)?;
    ops.0 += 2 * (c.n() * c.r()) as u64;
    Ok(s)
}

fn finish(
    c: &CodeDescriptor,
    y: &[u32],
    found: Option<(usize, Vec<u32>)>,
    syndrome: Vec<u32>,
    ops: OpCount,
) -> Result<DecodeResult> {
    let Some((i, a)) = found else {
        return Err(Error::DecodingFailure { syndrome });
    };
    let f = c.ctx();
    let mut codeword = y.to_vec();
    for (slot, &x) in c.partition().block(i).zip(&a) {
        codeword[slot] = f.sub(codeword[slot], x);
    }
    Ok(DecodeResult {
        codeword,
        location: Some(i),
        error: Some(a),
        syndrome,
        ops: ops.0,
    })
}

fn unchanged(y: &[u32], syndrome: Vec<u32>, ops: OpCount) -> DecodeResult {
    DecodeResult {
        codeword: y.to_vec(),
        location: None,
        error: None,
        syndrome,
        ops: ops.0,
    }
}

/// Corrects one sum-rank error: computes `s = H y^T`, then solves
/// `H_j a^T = s` block by block and subtracts the first solution found.
pub fn decode(c: &CodeDescriptor, y: &[u32]) -> Result<DecodeResult> {
    decode_with(c, y, DecodeOptions::default())
}

pub fn decode_with(c: &CodeDescriptor, y: &[u32], opts: DecodeOptions) -> Result<DecodeResult> {
    require_base_field(c)?;
    let mut ops = OpCount::default();
    let s = counted_syndrome(c, y, &mut ops)?;
    if s.iter().all(|&x| x == 0) {
        return Ok(unchanged(y, s, ops));
    }
    let mut found: Option<(usize, Vec<u32>)> = None;
    for j in 0..c.ell() {
        if let Some(a) = c.h_block(j).solve_counted(&s, &mut ops)? {
            if let Some((i, _)) = &found {
                return Err(Error::InvariantViolation(format!(
                    "blocks {i} and {j} both explain the syndrome"
                )));
            }
            found = Some((j, a));
            if !opts.verify_unique {
                break;
            }
        }
    }
    finish(c, y, found, s, ops)
}

/// Per-block eliminations computed once: `P_j H_j` is in reduced echelon
/// form, so each block solve costs one matrix-vector product.
#[derive(Debug, Clone)]
pub struct SyndromeDecoder {
    code: CodeDescriptor,
    blocks: Vec<(Matrix, Vec<usize>)>,
}

impl SyndromeDecoder {
    pub fn new(c: &CodeDescriptor) -> Result<Self> {
        require_base_field(c)?;
        let r = c.r();
        let f = c.ctx();
        let mut blocks = Vec::with_capacity(c.ell());
        for j in 0..c.ell() {
            let hj = c.h_block(j);
            let aug = Matrix::hstack(&[&hj, &Matrix::identity(f, r)])?;
            let (red, pivots) = aug.rref();
            let pivots: Vec<usize> = pivots.into_iter().filter(|&p| p < hj.cols()).collect();
            let p = red.column_range(hj.cols(), hj.cols() + r);
            blocks.push((p, pivots));
        }
        Ok(SyndromeDecoder {
            code: c.clone(),
            blocks,
        })
    }

    pub fn code(&self) -> &CodeDescriptor {
        &self.code
    }

    pub fn decode(&self, y: &[u32]) -> Result<DecodeResult> {
        let c = &self.code;
        let r = c.r();
        let mut ops = OpCount::default();
        let s = counted_syndrome(c, y, &mut ops)?;
        if s.iter().all(|&x| x == 0) {
            return Ok(unchanged(y, s, ops));
        }
        for (j, (p, pivots)) in self.blocks.iter().enumerate() {
            let t = p.mul_vec(&s)?;
            ops.0 += 2 * (r * r) as u64;
            if t[pivots.len()..].iter().any(|&x| x != 0) {
                continue;
            }
            let mut a = vec![0u32; c.partition().sublengths()[j]];
            for (row, &col) in pivots.iter().enumerate() {
                a[col] = t[row];
            }
            return finish(c, y, Some((j, a)), s, ops);
        }
        finish(c, y, None, s, ops)
    }
}

/// Syndromes of all coset leaders of sum-rank weight at most 1.
#[derive(Debug, Clone)]
pub struct SyndromeTable {
    code: CodeDescriptor,
    /// syndrome -> (block, block error); the zero syndrome maps to `None`
    leaders: HashMap<Vec<u32>, Option<(usize, Vec<u32>)>>,
}

impl SyndromeTable {
    pub fn len(&self) -> usize {
        self.leaders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaders.is_empty()
    }

    pub fn leader(&self, syndrome: &[u32]) -> Option<&Option<(usize, Vec<u32>)>> {
        self.leaders.get(syndrome)
    }

    /// The full-length coset leader for `syndrome`.
    pub fn leader_vector(&self, syndrome: &[u32]) -> Option<Vec<u32>> {
        let entry = self.leaders.get(syndrome)?;
        let mut v = vec![0u32; self.code.n()];
        if let Some((i, a)) = entry {
            for (slot, &x) in self.code.partition().block(*i).zip(a) {
                v[slot] = x;
            }
        }
        Some(v)
    }

    pub fn syndromes(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.leaders.keys()
    }

    pub fn decode(&self, y: &[u32]) -> Result<DecodeResult> {
        let c = &self.code;
        let mut ops = OpCount::default();
        let s = counted_syndrome(c, y, &mut ops)?;
        match self.leaders.get(&s) {
            None => Err(Error::DecodingFailure { syndrome: s }),
            Some(None) => Ok(unchanged(y, s, ops)),
            Some(Some((i, a))) => finish(c, y, Some((*i, a.clone())), s, ops),
        }
    }
}

/// Builds the weight-one coset leader table; needs `q^r <= limit`.
pub fn syndrome_table(c: &CodeDescriptor, limit: u64) -> Result<SyndromeTable> {
    require_base_field(c)?;
    let q = c.q();
    if (q as u64).checked_pow(c.r() as u32).is_none_or(|s| s > limit) {
        return Err(Error::BudgetExceeded { budget: limit });
    }
    let mut leaders = HashMap::new();
    leaders.insert(vec![0u32; c.r()], None);
    for i in 0..c.ell() {
        let hi = c.h_block(i);
        let mut a = vec![0u32; hi.cols()];
        while crate::sumrank::increment(&mut a, q) {
            let s = hi.mul_vec(&a)?;
            if leaders.insert(s, Some((i, a.clone()))).is_some() {
                return Err(Error::InvariantViolation(format!(
                    "two weight-one errors share a syndrome (block {i}, error {a:?})"
                )));
            }
        }
    }
    Ok(SyndromeTable {
        code: c.clone(),
        leaders,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::hamming_from_spread;
    use crate::spreads::desarguesian_spread;

    fn hamming(q: u32, n: usize, r: usize) -> CodeDescriptor {
        hamming_from_spread(&desarguesian_spread(q, n, r).unwrap()).unwrap()
    }

    #[test]
    fn codeword_is_returned_unchanged() {
        let c = hamming(2, 2, 4);
        let y = c.encode(&[1, 0, 1, 1, 0, 1]).unwrap();
        let d = decode(&c, &y).unwrap();
        assert_eq!(d.codeword, y);
        assert_eq!(d.location, None);
    }

    #[test]
    fn single_block_error_is_located() {
        let c = hamming(2, 2, 4);
        let mut y = vec![0u32; 10];
        y[0] = 1;
        let d = decode(&c, &y).unwrap();
        assert_eq!(d.location, Some(0));
        assert_eq!(d.error, Some(vec![1, 0]));
        assert_eq!(d.codeword, vec![0; 10]);
        assert_eq!(SyndromeDecoder::new(&c).unwrap().decode(&y).unwrap().codeword, vec![0; 10]);
    }

    #[test]
    fn table_size_matches_ball() {
        let c = hamming(2, 2, 4);
        let t = syndrome_table(&c, 1 << 20).unwrap();
        assert_eq!(t.len(), 16);
        assert_eq!(t.leader_vector(&[0, 0, 0, 0]), Some(vec![0; 10]));
        let c3 = hamming(3, 2, 4);
        assert_eq!(syndrome_table(&c3, 1 << 20).unwrap().len(), 81);
    }

    #[test]
    fn non_perfect_code_detects_failures() {
        // two disjoint planes of GF(2)^4 leave syndromes with no weight-one leader
        let s = desarguesian_spread(2, 2, 4).unwrap();
        let members = s.members()[..2].to_vec();
        let partial = crate::spreads::SpreadFamily::new(s.ctx(), 4, members).unwrap();
        let c = hamming_from_spread(&partial).unwrap();
        let table = syndrome_table(&c, 1 << 20).unwrap();
        assert_eq!(table.len(), 7);
        let missing = (0..16u32)
            .map(|v| (0..4).map(|b| (v >> b) & 1).collect::<Vec<_>>())
            .find(|s| table.leader(s).is_none())
            .unwrap();
        // any word with that syndrome is undecodable
        let h = c.parity_check();
        let y = h.solve(&missing).unwrap().unwrap();
        assert!(matches!(decode(&c, &y), Err(Error::DecodingFailure { .. })));
        assert!(matches!(table.decode(&y), Err(Error::DecodingFailure { .. })));
    }

    #[test]
    fn extension_codes_are_rejected() {
        let f = crate::galois::FieldCtx::new(2, 2).unwrap();
        let p = crate::sumrank::LengthPartition::new(vec![1, 1]).unwrap();
        let h = Matrix::from_rows(&f, &[vec![1, 2]]).unwrap();
        let c = CodeDescriptor::from_parity_check(&f, &p, h, crate::codes::CodeKind::Custom).unwrap();
        assert!(matches!(decode(&c, &[0, 0]), Err(Error::Precondition(_))));
    }
}
