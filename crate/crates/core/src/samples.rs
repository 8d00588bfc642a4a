//! Reference chains: the four-state worked example, two-state chains, and a
//! seeded generator of random irreducible chains with small rational entries.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::Chain;
use crate::exactalg::{rat, Rational};

/// The four-state chain `M = (1/12) [[5,2,4,1],[1,3,3,5],[1,6,4,1],[2,1,6,3]]`
/// with states labelled `"1" .. "4"`.
pub fn worked_example() -> Chain {
    let rows = [[5, 2, 4, 1], [1, 3, 3, 5], [1, 6, 4, 1], [2, 1, 6, 3]]
        .iter()
        .map(|r| r.iter().map(|&n| rat(n, 12)).collect())
        .collect();
    Chain::new(labels(4), rows).expect("worked example is a valid chain")
}

/// Deterministic two-state swap `[[0,1],[1,0]]`, states `"1"`, `"2"`.
pub fn swap2() -> Chain {
    Chain::new(
        labels(2),
        vec![vec![rat(0, 1), rat(1, 1)], vec![rat(1, 1), rat(0, 1)]],
    )
    .expect("swap chain is valid")
}

/// Lazy two-state chain `[[3/4,1/4],[2/3,1/3]]`, states `"1"`, `"2"`.
pub fn lazy2() -> Chain {
    Chain::new(
        labels(2),
        vec![vec![rat(3, 4), rat(1, 4)], vec![rat(2, 3), rat(1, 3)]],
    )
    .expect("lazy chain is valid")
}

fn labels(d: usize) -> Vec<String> {
    (1..=d).map(|i| i.to_string()).collect()
}

/// Random irreducible chain on `d` states.
///
/// Each row gets integer weights in `0..=max_weight`, normalized by the row
/// total; the edge `i -> i+1 (mod d)` always has weight at least one so the
/// chain is irreducible by construction.
pub fn random_irreducible(seed: u64, d: usize, max_weight: u32) -> Chain {
    assert!(d >= 2 && max_weight >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = (0..d)
        .map(|i| {
            let mut w: Vec<u32> = (0..d).map(|_| rng.random_range(0..=max_weight)).collect();
            let next = (i + 1) % d;
            w[next] = w[next].max(1);
            let total: u32 = w.iter().sum();
            w.into_iter()
                .map(|x| Rational::new(BigInt::from(x), BigInt::from(total)))
                .collect()
        })
        .collect();
    Chain::from_rows(rows).expect("cycle edge makes the chain irreducible")
}

/// The standard battery: worked example, swap, lazy two-state chain and
/// `n_random` seeded random chains with `d` cycling through `2..=7`.
pub fn test_battery(n_random: usize) -> Vec<(String, Chain)> {
    let mut out = vec![
        ("worked_example".to_string(), worked_example()),
        ("swap2".to_string(), swap2()),
        ("lazy2".to_string(), lazy2()),
    ];
    for k in 0..n_random {
        let d = 2 + k % 6;
        out.push((format!("random_{k}_d{d}"), random_irreducible(1000 + k as u64, d, 4)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_chains_are_deterministic() {
        assert_eq!(random_irreducible(7, 5, 4), random_irreducible(7, 5, 4));
        assert_ne!(random_irreducible(7, 5, 4), random_irreducible(8, 5, 4));
    }

    #[test]
    fn battery_covers_dimensions() {
        let b = test_battery(50);
        assert_eq!(b.len(), 53);
        for d in 2..=7 {
            assert!(b.iter().any(|(_, c)| c.dim() == d));
        }
    }
}
