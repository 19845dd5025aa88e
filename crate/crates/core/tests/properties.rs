use std::sync::Arc;

use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sumrank::channel::{random_rank_matrix, sample_allocation, sample_realization, ChannelSpec};
use sumrank::codes::{hamming_from_spread, CodeDescriptor};
use sumrank::galois::{from_matrix_rep, matrix_rep, rank_of_rep, FieldCtx, Matrix};
use sumrank::spreads::desarguesian_spread;
use sumrank::sumrank::{sumrank_distance, sumrank_weight, IsometrySpec, LengthPartition, SumRankVector};
use sumrank::syndrome::{decode, syndrome_table, SyndromeDecoder};

/// Field parameters `(q, m)` small enough for quick cases.
const FIELDS: [(u32, u32); 6] = [(2, 1), (2, 3), (3, 2), (4, 2), (5, 1), (2, 4)];

fn field() -> impl Strategy<Value = Arc<FieldCtx>> {
    (0..FIELDS.len()).prop_map(|i| FieldCtx::new(FIELDS[i].0, FIELDS[i].1).unwrap())
}

fn partition() -> impl Strategy<Value = LengthPartition> {
    prop::collection::vec(1usize..4, 1..5).prop_map(|s| LengthPartition::new(s).unwrap())
}

fn entries(ctx: &Arc<FieldCtx>, n: usize) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..ctx.order(), n)
}

/// Field, partition and three vectors over them.
fn triple() -> impl Strategy<Value = (Arc<FieldCtx>, LengthPartition, Vec<u32>, Vec<u32>, Vec<u32>)> {
    (field(), partition()).prop_flat_map(|(ctx, p)| {
        let n = p.n();
        (
            Just(ctx.clone()),
            Just(p),
            entries(&ctx, n),
            entries(&ctx, n),
            entries(&ctx, n),
        )
    })
}

fn base_matrix(rows: usize, cols: usize) -> impl Strategy<Value = (Arc<FieldCtx>, Matrix)> {
    (0..3usize).prop_flat_map(move |i| {
        let base = FieldCtx::new([2, 3, 4][i], 1).unwrap();
        let order = base.order();
        prop::collection::vec(0..order, rows * cols)
            .prop_map(move |d| (base.clone(), Matrix::from_vec(&base, rows, cols, d).unwrap()))
    })
}

fn hamming(q: u32, n: usize, r: usize) -> CodeDescriptor {
    hamming_from_spread(&desarguesian_spread(q, n, r).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metric_axioms((ctx, p, u, v, w) in triple()) {
        let sr = |x: &Vec<u32>| SumRankVector::new(&ctx, &p, x.clone()).unwrap();
        let (u, v, w) = (sr(&u), sr(&v), sr(&w));
        let d = |a: &SumRankVector, b: &SumRankVector| sumrank_distance(a, b).unwrap();
        prop_assert_eq!(d(&u, &u), 0);
        prop_assert_eq!(d(&u, &v) == 0, u == v);
        prop_assert_eq!(d(&u, &v), d(&v, &u));
        prop_assert!(d(&u, &v) <= d(&u, &w) + d(&w, &v));
        prop_assert!(sumrank_weight(&u) <= p.max_weight(ctx.m()));
    }

    #[test]
    fn weight_is_sum_of_block_ranks((ctx, p, u, _v, _w) in triple()) {
        let v = SumRankVector::new(&ctx, &p, u.clone()).unwrap();
        let by_blocks: usize = (0..p.ell()).map(|i| matrix_rep(&u[p.block(i)], &ctx).unwrap().rank()).sum();
        prop_assert_eq!(sumrank_weight(&v), by_blocks);
        let by_rep: usize = (0..p.ell()).map(|i| rank_of_rep(&u[p.block(i)], &ctx)).sum();
        prop_assert_eq!(by_rep, by_blocks);
    }

    #[test]
    fn matrix_rep_is_linear_and_invertible((ctx, _p, u, v, _w) in triple(), lambda in 0u32..16) {
        let base = ctx.base_ctx();
        let lambda = lambda % base.order();
        let mu = matrix_rep(&u, &ctx).unwrap();
        let mv = matrix_rep(&v, &ctx).unwrap();
        let sum: Vec<u32> = u.iter().zip(&v).map(|(&a, &b)| ctx.add(a, b)).collect();
        prop_assert_eq!(matrix_rep(&sum, &ctx).unwrap(), mu.add(&mv).unwrap());
        let scaled: Vec<u32> = u.iter().map(|&a| ctx.scale_base(lambda, a)).collect();
        prop_assert_eq!(matrix_rep(&scaled, &ctx).unwrap(), mu.scale(lambda));
        prop_assert_eq!(from_matrix_rep(&mu, &ctx).unwrap(), u);
    }

    #[test]
    fn basis_change_preserves_weight(seed in any::<u64>(), u in prop::collection::vec(0u32..16, 4), split in 0usize..3) {
        // a random ordered basis of GF(16) over GF(2)
        let std = FieldCtx::new(2, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let change = loop {
            let m = random_rank_matrix(&std.base_ctx(), 4, 4, 4, &mut rng);
            if m.rank() == 4 { break m; }
        };
        let basis: Vec<u32> = (0..4).map(|i| std.from_coords(change.row(i))).collect();
        let other = FieldCtx::with_basis(2, 4, basis).unwrap();
        // same elements, re-encoded by their coordinates in the new basis
        let coords_in_other: Vec<u32> = u
            .iter()
            .map(|&x| {
                let target = std.coords(x);
                let sol = change.transpose().solve(&target).unwrap().unwrap();
                other.from_coords(&sol)
            })
            .collect();
        let p = LengthPartition::new([vec![2, 2], vec![1, 3], vec![4]][split].clone()).unwrap();
        let a = sumrank_weight(&SumRankVector::new(&std, &p, u).unwrap());
        let b = sumrank_weight(&SumRankVector::new(&other, &p, coords_in_other).unwrap());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn isometries_preserve_weight_and_compose((ctx, p, u, v, _w) in triple(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = IsometrySpec::random(&p, &ctx, &mut rng);
        let g = IsometrySpec::random(&p, &ctx, &mut rng);
        f.validate(&p, &ctx).unwrap();
        let u = SumRankVector::new(&ctx, &p, u).unwrap();
        let v = SumRankVector::new(&ctx, &p, v).unwrap();
        let fu = f.apply(&u).unwrap();
        prop_assert_eq!(sumrank_weight(&fu), sumrank_weight(&u));
        prop_assert_eq!(
            sumrank_distance(&fu, &f.apply(&v).unwrap()).unwrap(),
            sumrank_distance(&u, &v).unwrap()
        );
        let fg = f.compose(&g, &ctx).unwrap();
        prop_assert_eq!(fg.apply(&u).unwrap(), f.apply(&g.apply(&u).unwrap()).unwrap());
    }

    #[test]
    fn rank_inequalities((_b, a) in base_matrix(4, 5), (_c, b) in base_matrix(5, 3)) {
        prop_assume!(a.ctx().same_field(b.ctx()));
        let ab = a.mul(&b).unwrap();
        prop_assert!(ab.rank() <= a.rank().min(b.rank()));
        prop_assert!(ab.rank() + 5 >= a.rank() + b.rank());
        prop_assert_eq!(a.rank(), a.transpose().rank());
        prop_assert_eq!(a.rank() + a.kernel().rows(), 5);
    }

    #[test]
    fn rank_subadditive((_b, a) in base_matrix(4, 4), (_c, b) in base_matrix(4, 4)) {
        prop_assume!(a.ctx().same_field(b.ctx()));
        prop_assert!(a.add(&b).unwrap().rank() <= a.rank() + b.rank());
    }

    #[test]
    fn solve_is_consistent((base, a) in base_matrix(4, 6), x in prop::collection::vec(0u32..2, 6), y in prop::collection::vec(0u32..4, 4)) {
        let rhs = a.mul_vec(&x).unwrap();
        let sol = a.solve(&rhs).unwrap().expect("consistent system");
        prop_assert_eq!(a.mul_vec(&sol).unwrap(), rhs);
        let y: Vec<u32> = y.into_iter().map(|v| v % base.order()).collect();
        if let Some(s) = a.solve(&y).unwrap() {
            prop_assert_eq!(a.mul_vec(&s).unwrap(), y);
        } else {
            let aug = Matrix::hstack(&[&a, &Matrix::from_vec(&base, 4, 1, y).unwrap()]).unwrap();
            prop_assert!(aug.rank() > a.rank());
        }
        for row in 0..a.kernel().rows() {
            prop_assert!(a.mul_vec(a.kernel().row(row)).unwrap().iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn allocation_respects_caps(caps in prop::collection::vec(0usize..4, 1..6), pick in any::<u64>(), seed in any::<u64>()) {
        let cap_sum: usize = caps.iter().sum();
        let total = (pick % (cap_sum as u64 + 1)) as usize;
        let a = sample_allocation(&caps, total, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(a.iter().sum::<usize>(), total);
        prop_assert!(a.iter().zip(&caps).all(|(x, c)| x <= c));
        prop_assert!(sample_allocation(&caps, cap_sum + 1, &mut ChaCha8Rng::seed_from_u64(seed)).is_err());
    }

    #[test]
    fn channel_realizes_exact_budget(
        cols in prop::collection::vec(1usize..4, 1..5),
        m in 1u32..4,
        t_pick in any::<u32>(),
        rho_pick in any::<u32>(),
        seed in any::<u64>(),
    ) {
        let t_cap: usize = cols.iter().map(|&c| c.min(m as usize)).sum();
        let t = t_pick as usize % (t_cap + 1);
        let rho = rho_pick as usize % (cols.iter().sum::<usize>() + 1);
        let spec = ChannelSpec { q: 2, m, input_cols: cols.clone(), output_cols: cols, t, rho, seed };
        let real = sample_realization(&spec).unwrap();
        prop_assert_eq!(real.errors_and_erasures(), (t, rho));
        prop_assert_eq!(sample_realization(&spec).unwrap(), real);
    }

    #[test]
    fn random_rank_matrix_has_requested_rank(rows in 1usize..5, cols in 1usize..5, k in 0usize..5, seed in any::<u64>()) {
        let k = k.min(rows).min(cols);
        let base = FieldCtx::new(3, 1).unwrap();
        let m = random_rank_matrix(&base, rows, cols, k, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!((m.rows(), m.cols(), m.rank()), (rows, cols, k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decoder_corrects_single_block_errors(
        which in 0usize..3,
        msg_seed in any::<u64>(),
        block in any::<usize>(),
        err in prop::collection::vec(0u32..3, 3),
    ) {
        let (q, n, r) = [(2u32, 2usize, 4usize), (3, 2, 4), (2, 3, 6)][which];
        let c = hamming(q, n, r);
        let mut rng = ChaCha8Rng::seed_from_u64(msg_seed);
        let msg: Vec<u32> = (0..c.k()).map(|_| rand::Rng::gen_range(&mut rng, 0..q)).collect();
        let cw = c.encode(&msg).unwrap();
        let i = block % c.ell();
        let mut y = cw.clone();
        for (off, j) in c.partition().block(i).enumerate() {
            y[j] = (y[j] + err[off % err.len()] % q) % q;
        }
        let d = decode(&c, &y).unwrap();
        prop_assert_eq!(&d.codeword, &cw);
        prop_assert_eq!(SyndromeDecoder::new(&c).unwrap().decode(&y).unwrap().codeword, cw);
        prop_assert_eq!(c.message_of(&d.codeword).unwrap(), msg);
    }
}

#[test]
fn syndrome_table_agrees_with_block_solver() {
    for (q, n, r) in [(2u32, 2usize, 4usize), (3, 2, 4)] {
        let c = hamming(q, n, r);
        let table = syndrome_table(&c, 1 << 20).unwrap();
        // perfect code: every syndrome is covered
        assert_eq!(table.len() as u64, (q as u64).pow(r as u32));
        for s in table.syndromes() {
            let e = table.leader_vector(s).unwrap();
            let d = decode(&c, &e).unwrap();
            assert!(d.codeword.iter().all(|&x| x == 0), "({q},{n},{r}) syndrome {s:?}");
            assert_eq!(table.decode(&e).unwrap().codeword, d.codeword);
        }
    }
}

#[test]
fn unit_sublengths_give_hamming_weight() {
    let ctx = FieldCtx::new(2, 3).unwrap();
    let p = LengthPartition::new(vec![1; 5]).unwrap();
    for i in 0..8u32.pow(5) {
        let v: Vec<u32> = (0..5).map(|j| (i >> (3 * j)) & 7).collect();
        let hamming_weight = v.iter().filter(|&&x| x != 0).count();
        assert_eq!(sumrank_weight(&SumRankVector::new(&ctx, &p, v).unwrap()), hamming_weight);
    }
}

#[test]
fn single_error_rank_lands_in_one_shot() {
    let c = hamming(2, 2, 4);
    for seed in 0..1000 {
        let spec = ChannelSpec::for_code(&c, 1, 0, seed);
        let real = sample_realization(&spec).unwrap();
        let hit: Vec<usize> = real.errors.iter().map(Matrix::rank).collect();
        assert_eq!(hit.iter().sum::<usize>(), 1);
        assert!(real.transfers.iter().all(|a| a.rank() == a.rows()));
    }
}
