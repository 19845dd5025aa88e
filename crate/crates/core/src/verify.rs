//! End-to-end consistency checks for one parameter set `(q, N, r)`.

use serde::Serialize;

use crate::codes::{
    check_distance3, hamming_from_spread, length_bounds, min_sumrank_distance, perfect_code_check,
    simplex_distance_bound, simplex_from_hamming, CodeDescriptor,
};
use crate::error::{Error, Result};
use crate::spreads::{desarguesian_spread, search_partial_spread, spread_size_bounds, SpreadFamily, SpreadTarget};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    /// `None` when the check was skipped.
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub q: u32,
    #[serde(rename = "N")]
    pub sublength: usize,
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub ell: usize,
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }

    pub fn get(&self, name: &str) -> Option<&VerifyCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn check(name: &str, passed: Option<bool>, detail: impl Into<String>) -> VerifyCheck {
    VerifyCheck {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// The spread used for `(q, N, r)`: Desarguesian when `N | r`, searched otherwise.
pub fn spread_for(q: u32, n: usize, r: usize, budget: u64) -> Result<SpreadFamily> {
    if r % n == 0 {
        desarguesian_spread(q, n, r)
    } else {
        Ok(search_partial_spread(q, &SpreadTarget::Uniform { n, target: None }, r, budget)?.family)
    }
}

fn distance_check(name: &str, c: &CodeDescriptor, budget: u64, want: impl Fn(usize) -> bool, expect: &str) -> Result<VerifyCheck> {
    match min_sumrank_distance(c, budget) {
        Ok(Some(d)) => Ok(check(name, Some(want(d)), format!("measured {d}, expected {expect}"))),
        Ok(None) => Ok(check(name, None, "zero code")),
        Err(Error::BudgetExceeded { budget }) => Ok(check(name, None, format!("budget {budget} exceeded"))),
        Err(e) => Err(e),
    }
}

/// Builds the Hamming and simplex codes for `(q, N, r)` and runs every
/// distance, perfect-code and length-bound check that applies.
pub fn verify_parameters(q: u32, n: usize, r: usize, budget: u64) -> Result<VerifyReport> {
    if n == 0 || n > r {
        return Err(Error::Precondition(format!("need 1 <= N <= r, got N={n}, r={r}")));
    }
    let spread = spread_for(q, n, r, budget)?;
    let c = hamming_from_spread(&spread)?;
    let mut checks = Vec::new();

    let (lo, hi) = spread_size_bounds(q, n, r)?;
    let size = spread.len();
    let in_window = lo <= size.into() && hi >= size.into();
    checks.push(check("spread_size", Some(in_window), format!("{size} in [{lo}, {hi}]")));

    let d3 = check_distance3(c.parity_check(), c.partition())?;
    checks.push(check("distance3_criterion", Some(d3), "parity-check column spaces"));
    checks.push(distance_check("min_distance", &c, budget, |d| d == 3, "3")?);

    if r % n == 0 {
        let ok = perfect_code_check(&c)?;
        checks.push(check("perfect", Some(ok), "q^k (1 + l(q^N - 1)) = q^n"));
    } else {
        checks.push(check("perfect", None, "N does not divide r"));
    }

    let bounds = length_bounds(q, 1, r, c.partition());
    for b in &bounds.checks {
        checks.push(check(
            &format!("bound_{}", b.name),
            b.holds,
            format!("{}: {} vs {}", b.statement, b.lhs, b.rhs),
        ));
    }

    let s = simplex_from_hamming(&c)?;
    let bound = simplex_distance_bound(q, n, r)?;
    match min_sumrank_distance(&s, budget) {
        Ok(Some(d)) => {
            let ok = bound <= d.into();
            checks.push(check("simplex_distance", Some(ok), format!("measured {d}, bound {bound}")));
        }
        Ok(None) => checks.push(check("simplex_distance", None, "zero code")),
        Err(Error::BudgetExceeded { budget }) => {
            checks.push(check("simplex_distance", None, format!("budget {budget} exceeded")))
        }
        Err(e) => return Err(e),
    }

    Ok(VerifyReport {
        q,
        sublength: n,
        r,
        n: c.n(),
        k: c.k(),
        ell: c.ell(),
        checks,
    })
}
