//! Multishot matrix-multiplicative channel `Y_i = X_i A_i + E_i` and the
//! coherent decoding pipeline.
//!
//! All randomness comes from ChaCha8 seeded with a 64-bit seed
//! (`ChaCha8Rng::seed_from_u64`); Monte-Carlo trial `j` uses stream `j` of
//! that seed, so results do not depend on trial order.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::codes::CodeDescriptor;
use crate::error::{Error, Result};
use crate::galois::{from_matrix_rep, matrix_rep, FieldCtx, Matrix};
use crate::syndrome::SyndromeDecoder;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub q: u32,
    /// Rows of every transmitted matrix.
    pub m: u32,
    /// Input column counts `n_i`.
    pub input_cols: Vec<usize>,
    /// Output column counts `N_i`.
    pub output_cols: Vec<usize>,
    /// Total error rank.
    pub t: usize,
    /// Total rank deficit of the transfer matrices.
    pub rho: usize,
    pub seed: u64,
}

impl ChannelSpec {
    /// Square transfers matching a code's partition.
    pub fn for_code(c: &CodeDescriptor, t: usize, rho: usize, seed: u64) -> Self {
        ChannelSpec {
            q: c.q(),
            m: c.m(),
            input_cols: c.partition().sublengths().to_vec(),
            output_cols: c.partition().sublengths().to_vec(),
            t,
            rho,
            seed,
        }
    }

    pub fn shots(&self) -> usize {
        self.input_cols.len()
    }

    fn validate(&self) -> Result<()> {
        if self.input_cols.is_empty() || self.input_cols.len() != self.output_cols.len() {
            return Err(Error::Precondition("input and output column lists must match".into()));
        }
        if self.m == 0 || self.input_cols.contains(&0) || self.output_cols.contains(&0) {
            return Err(Error::Precondition("all dimensions must be at least 1".into()));
        }
        let max_t: usize = self.output_cols.iter().map(|&c| c.min(self.m as usize)).sum();
        if self.t > max_t {
            return Err(Error::Precondition(format!(
                "t = {} exceeds the largest possible error rank {max_t}",
                self.t
            )));
        }
        let forced = self.forced_deficit();
        let max_rho: usize = self.input_cols.iter().sum();
        if self.rho < forced || self.rho > max_rho {
            return Err(Error::Precondition(format!(
                "rho = {} outside the feasible range {forced}..={max_rho}",
                self.rho
            )));
        }
        Ok(())
    }

    /// Deficit forced by `n_i > N_i`.
    fn forced_deficit(&self) -> usize {
        self.input_cols
            .iter()
            .zip(&self.output_cols)
            .map(|(&n, &nn)| n.saturating_sub(nn))
            .sum()
    }
}

/// Transfer matrices `A_i` (`n_i x N_i`) and additive errors `E_i`
/// (`m x N_i`) over `GF(q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelRealization {
    pub transfers: Vec<Matrix>,
    pub errors: Vec<Matrix>,
}

impl ChannelRealization {
    /// `(sum_i rank E_i, sum_i (n_i - rank A_i))`.
    pub fn errors_and_erasures(&self) -> (usize, usize) {
        let t = self.errors.iter().map(Matrix::rank).sum();
        let rho = self.transfers.iter().map(|a| a.rows() - a.rank()).sum();
        (t, rho)
    }

    /// Noiseless channel with identity transfers.
    pub fn identity(base: &Arc<FieldCtx>, m: usize, cols: &[usize]) -> Self {
        ChannelRealization {
            transfers: cols.iter().map(|&n| Matrix::identity(base, n)).collect(),
            errors: cols.iter().map(|&n| Matrix::zeros(base, m, n)).collect(),
        }
    }
}

/// Number of ways to write `total` as `sum x_i` with `0 <= x_i <= caps[i]`,
/// for every suffix of `caps`: `table[i][s]` counts suffix `i..` summing to `s`.
fn composition_table(caps: &[usize], total: usize) -> Result<Vec<Vec<u128>>> {
    let l = caps.len();
    let mut table = vec![vec![0u128; total + 1]; l + 1];
    table[l][0] = 1;
    for i in (0..l).rev() {
        for s in 0..=total {
            let mut acc = 0u128;
            for x in 0..=caps[i].min(s) {
                acc = acc
                    .checked_add(table[i + 1][s - x])
                    .ok_or_else(|| Error::Precondition("allocation space too large".into()))?;
            }
            table[i][s] = acc;
        }
    }
    Ok(table)
}

/// A uniformly random composition of `total` bounded by `caps`.
pub fn sample_allocation<R: Rng + ?Sized>(caps: &[usize], total: usize, rng: &mut R) -> Result<Vec<usize>> {
    let table = composition_table(caps, total)?;
    if table[0][total] == 0 {
        return Err(Error::Precondition(format!("cannot allocate {total} within {caps:?}")));
    }
    let mut left = total;
    let mut out = Vec::with_capacity(caps.len());
    for i in 0..caps.len() {
        let mut pick = rng.gen_range(0..table[i][left]);
        let mut chosen = 0;
        for x in 0..=caps[i].min(left) {
            let w = table[i + 1][left - x];
            if pick < w {
                chosen = x;
                break;
            }
            pick -= w;
        }
        out.push(chosen);
        left -= chosen;
    }
    Ok(out)
}

/// Uniform full-rank `rows x cols` matrix with `rows <= cols` or `rows >= cols`.
fn random_full_rank<R: Rng + ?Sized>(base: &Arc<FieldCtx>, rows: usize, cols: usize, rng: &mut R) -> Matrix {
    let target = rows.min(cols);
    loop {
        let data = (0..rows * cols).map(|_| rng.gen_range(0..base.order())).collect();
        let m = Matrix::from_vec(base, rows, cols, data).expect("entries in range");
        if m.rank() == target {
            return m;
        }
    }
}

/// A `rows x cols` matrix of rank `k`, as `U V` with uniform full-rank factors.
pub fn random_rank_matrix<R: Rng + ?Sized>(
    base: &Arc<FieldCtx>,
    rows: usize,
    cols: usize,
    k: usize,
    rng: &mut R,
) -> Matrix {
    if k == 0 {
        return Matrix::zeros(base, rows, cols);
    }
    let u = random_full_rank(base, rows, k, rng);
    let v = random_full_rank(base, k, cols, rng);
    u.mul(&v).expect("shapes agree")
}

/// Draws a realization from the spec's seed.
pub fn sample_realization(spec: &ChannelSpec) -> Result<ChannelRealization> {
    sample_realization_with(spec, &mut ChaCha8Rng::seed_from_u64(spec.seed))
}

/// Draws a realization with exactly `t` error rank and exactly `rho` rank
/// deficit, each split uniformly among the valid per-shot allocations.
pub fn sample_realization_with<R: Rng + ?Sized>(spec: &ChannelSpec, rng: &mut R) -> Result<ChannelRealization> {
    spec.validate()?;
    let base = FieldCtx::new(spec.q, 1)?;
    let m = spec.m as usize;
    let error_caps: Vec<usize> = spec.output_cols.iter().map(|&c| c.min(m)).collect();
    let ranks = sample_allocation(&error_caps, spec.t, rng)?;
    let full: Vec<usize> = spec
        .input_cols
        .iter()
        .zip(&spec.output_cols)
        .map(|(&n, &nn)| n.min(nn))
        .collect();
    let extra = sample_allocation(&full, spec.rho - spec.forced_deficit(), rng)?;
    let transfers = (0..spec.shots())
        .map(|i| random_rank_matrix(&base, spec.input_cols[i], spec.output_cols[i], full[i] - extra[i], rng))
        .collect();
    let errors = (0..spec.shots())
        .map(|i| random_rank_matrix(&base, m, spec.output_cols[i], ranks[i], rng))
        .collect();
    Ok(ChannelRealization { transfers, errors })
}

/// Encodes `message`, then sends block `i` as `M(c^(i)) A_i + E_i`.
pub fn transmit(message: &[u32], c: &CodeDescriptor, real: &ChannelRealization) -> Result<Vec<Matrix>> {
    let p = c.partition();
    if real.transfers.len() != p.ell()
        || real.errors.len() != p.ell()
        || real.transfers.iter().zip(p.sublengths()).any(|(a, &n)| a.rows() != n)
    {
        return Err(Error::Partition("realization does not match the code's partition".into()));
    }
    let word = c.encode(message)?;
    let ctx = c.ctx();
    (0..p.ell())
        .map(|i| {
            let x = matrix_rep(&word[p.block(i)], ctx)?;
            let y = x.mul(&real.transfers[i])?;
            y.add(&real.errors[i])
        })
        .collect()
}

/// The received blocks as one vector of `GF(q^m)^(sum N_i)`.
pub fn received_vector(blocks: &[Matrix], ctx: &Arc<FieldCtx>) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for b in blocks {
        out.extend(from_matrix_rep(b, ctx)?);
    }
    Ok(out)
}

/// Undoes known square transfers, corrects one sum-rank error and returns
/// the message.
pub fn coherent_decode(
    received: &[Matrix],
    decoder: &SyndromeDecoder,
    real: &ChannelRealization,
) -> Result<(Vec<u32>, u64)> {
    let c = decoder.code();
    if c.m() != 1 {
        return Err(Error::Precondition("coherent decoding needs m = 1".into()));
    }
    if received.len() != real.transfers.len() {
        return Err(Error::Partition("block count mismatch".into()));
    }
    let mut y = Vec::with_capacity(c.n());
    for (blk, a) in received.iter().zip(&real.transfers) {
        let inv = a
            .inverse()
            .ok_or_else(|| Error::Precondition("transfer matrix is not invertible".into()))?;
        y.extend_from_slice(blk.mul(&inv)?.row(0));
    }
    let d = decoder.decode(&y)?;
    Ok((c.message_of(&d.codeword)?, d.ops))
}

/// Coherent correctability: `d > 2t + rho`.
pub fn coherent_correctable(distance: usize, t: usize, rho: usize) -> bool {
    distance > 2 * t + rho
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: u64,
    pub successes: u64,
    /// Decoder reported an uncorrectable word.
    pub failures: u64,
    /// Decoder returned a wrong message.
    pub miscorrections: u64,
    pub mean_decode_ops: f64,
}

/// Monte-Carlo run of the coherent pipeline with square transfers.
pub fn simulate(c: &CodeDescriptor, trials: u64, t: usize, rho: usize, seed: u64) -> Result<SimulationReport> {
    if rho != 0 {
        return Err(Error::Precondition("coherent decoding handles rho = 0 only".into()));
    }
    let decoder = SyndromeDecoder::new(c)?;
    let spec = ChannelSpec::for_code(c, t, rho, seed);
    let mut report = SimulationReport {
        trials,
        successes: 0,
        failures: 0,
        miscorrections: 0,
        mean_decode_ops: 0.0,
    };
    let mut ops = 0u64;
    let mut decoded = 0u64;
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let message: Vec<u32> = (0..c.k()).map(|_| rng.gen_range(0..c.ctx().order())).collect();
        let real = sample_realization_with(&spec, &mut rng)?;
        let received = transmit(&message, c, &real)?;
        match coherent_decode(&received, &decoder, &real) {
            Ok((m, o)) => {
                ops += o;
                decoded += 1;
                if m == message {
                    report.successes += 1;
                } else {
                    report.miscorrections += 1;
                }
            }
            Err(Error::DecodingFailure { .. }) => report.failures += 1,
            Err(e) => return Err(e),
        }
    }
    if decoded > 0 {
        report.mean_decode_ops = ops as f64 / decoded as f64;
    }
    Ok(report)
}
