//! Case enumeration for verification loops: exhaustive up to a budget,
//! seeded random sampling above it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{CheckResult, Regime, Witness};

/// Default number of cases evaluated per check before sampling kicks in.
pub const DEFAULT_BUDGET: usize = 250_000;

pub fn ordered_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect()
}

#[derive(Debug, Clone)]
pub struct CaseSet<T> {
    pub items: Vec<T>,
    pub regime: Regime,
    pub seed: Option<u64>,
}

impl<T: Sync> CaseSet<T> {
    pub fn run<F>(&self, name: &str, case: F) -> CheckResult
    where
        F: Fn(&T) -> Option<Witness> + Sync + Send,
    {
        CheckResult::run(name, self.regime, self.seed, &self.items, case)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

impl CaseSet<(usize, usize)> {
    /// Ordered pairs over `0..n`.
    pub fn pairs(n: usize, budget: usize, seed: u64) -> Self {
        if n * n <= budget {
            return Self { items: ordered_pairs(n), regime: Regime::Exhaustive, seed: None };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..budget).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        Self { items, regime: Regime::Sampled, seed: Some(seed) }
    }

    /// Unordered pairs `a ≤ b`.
    pub fn unordered_pairs(n: usize, budget: usize, seed: u64) -> Self {
        let total = n * (n + 1) / 2;
        if total <= budget {
            let items = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
            return Self { items, regime: Regime::Exhaustive, seed: None };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..budget)
            .map(|_| {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                (a.min(b), a.max(b))
            })
            .collect();
        Self { items, regime: Regime::Sampled, seed: Some(seed) }
    }
}

impl CaseSet<(usize, usize, usize)> {
    /// Ordered triples over `0..n`.
    pub fn triples(n: usize, budget: usize, seed: u64) -> Self {
        if n * n * n <= budget {
            let items = (0..n)
                .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (a, b, c))))
                .collect();
            return Self { items, regime: Regime::Exhaustive, seed: None };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..budget)
            .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
            .collect();
        Self { items, regime: Regime::Sampled, seed: Some(seed) }
    }

    /// Multisets `a ≤ b ≤ c`; enough for identities that are (anti)symmetric
    /// under every permutation of their arguments.
    pub fn multisets(n: usize, budget: usize, seed: u64) -> Self {
        let total = n * (n + 1) * (n + 2) / 6;
        if total <= budget {
            let items = (0..n)
                .flat_map(|a| (a..n).flat_map(move |b| (b..n).map(move |c| (a, b, c))))
                .collect();
            return Self { items, regime: Regime::Exhaustive, seed: None };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = (0..budget)
            .map(|_| {
                let mut t = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
                t.sort_unstable();
                (t[0], t[1], t[2])
            })
            .collect();
        Self { items, regime: Regime::Sampled, seed: Some(seed) }
    }
}
