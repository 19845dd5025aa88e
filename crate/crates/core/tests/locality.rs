use std::cell::RefCell;
use std::collections::BTreeSet;

use sumrank::codes::hamming_from_spread;
use sumrank::lrc::{build_lrc, single_parity_generator, SymbolSource};
use sumrank::spreads::desarguesian_spread;

/// Records every position a repair reads.
struct Traced {
    word: Vec<Option<u32>>,
    reads: RefCell<BTreeSet<usize>>,
}

impl SymbolSource for Traced {
    fn len(&self) -> usize {
        self.word.len()
    }

    fn read(&self, j: usize) -> Option<u32> {
        self.reads.borrow_mut().insert(j);
        self.word[j]
    }
}

#[test]
fn repair_reads_only_its_group() {
    let outer = hamming_from_spread(&desarguesian_spread(2, 2, 4).unwrap()).unwrap();
    let base = outer.ctx().base_ctx();
    let lrc = build_lrc(&outer, vec![single_parity_generator(&base, 2); 5]).unwrap();
    let c = lrc.encode(&[1, 1, 0, 1, 0, 1]).unwrap();
    for i in 0..lrc.groups() {
        for lost in lrc.group(i) {
            let mut word: Vec<Option<u32>> = c.iter().copied().map(Some).collect();
            word[lost] = None;
            let traced = Traced {
                word,
                reads: RefCell::new(BTreeSet::new()),
            };
            let fixed = lrc.repair_group(&traced, i).unwrap();
            assert_eq!(fixed, vec![(lost, c[lost])]);
            let reads = traced.reads.into_inner();
            assert!(reads.iter().all(|j| lrc.group(i).contains(j)), "group {i} read {reads:?}");
            assert!(reads.len() - 1 <= lrc.localities()[i]);
        }
    }
}
