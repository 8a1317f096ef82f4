//! The six conservative grammar modifications and validity filtering.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grammar::{DmPair, Numeral};
use crate::lexicon::covers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationKind {
    /// Add the highest numeral not in D or M to D.
    M0,
    /// Add the highest numeral not in D or M to M.
    M1,
    /// Move the lowest numeral in M to D.
    M2,
    /// Move the highest numeral in D to M.
    M3,
    /// Remove the highest numeral in D.
    M4,
    /// Remove the highest numeral in M.
    M5,
}

impl MutationKind {
    pub const ALL: [MutationKind; 6] = [
        MutationKind::M0,
        MutationKind::M1,
        MutationKind::M2,
        MutationKind::M3,
        MutationKind::M4,
        MutationKind::M5,
    ];
}

impl fmt::Display for MutationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", *self as u8)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown mutation {0:?}")]
pub struct UnknownMutation(String);

impl FromStr for MutationKind {
    type Err = UnknownMutation;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MutationKind::ALL
            .into_iter()
            .find(|k| k.to_string() == s)
            .ok_or_else(|| UnknownMutation(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no valid neighbour of {0}")]
pub struct NoValidNeighbor(pub DmPair);

/// Highest numeral in `[1, range_max]` lexicalised in neither D nor M.
pub fn highest_absent(dm: &DmPair) -> Option<Numeral> {
    (1..=dm.range_max()).rev().find(|&n| !dm.contains(n))
}

/// Applies one modification. `None` when the action has nothing to act on or
/// the result would break a [`DmPair`] invariant (e.g. an empty D).
pub fn apply(dm: &DmPair, kind: MutationKind) -> Option<DmPair> {
    let mut digits = dm.digits().clone();
    let mut multipliers = dm.multipliers().clone();
    match kind {
        MutationKind::M0 => {
            digits.insert(highest_absent(dm)?);
        }
        MutationKind::M1 => {
            multipliers.insert(highest_absent(dm)?);
        }
        MutationKind::M2 => {
            let n = multipliers.pop_first()?;
            digits.insert(n);
        }
        MutationKind::M3 => {
            let n = digits.pop_last()?;
            multipliers.insert(n);
        }
        MutationKind::M4 => {
            digits.pop_last()?;
        }
        MutationKind::M5 => {
            multipliers.pop_last()?;
        }
    }
    DmPair::new(digits, multipliers, dm.range_max()).ok()
}

/// Every applicable modification whose result still covers `[1, range_max]`.
pub fn valid_neighbors(dm: &DmPair) -> Vec<(MutationKind, DmPair)> {
    MutationKind::ALL
        .into_iter()
        .filter_map(|k| apply(dm, k).map(|next| (k, next)))
        .filter(|(_, next)| covers(next))
        .collect()
}

/// Uniform draw among [`valid_neighbors`].
pub fn sample_alternative<R: Rng + ?Sized>(
    dm: &DmPair,
    rng: &mut R,
) -> Result<(MutationKind, DmPair), NoValidNeighbor> {
    valid_neighbors(dm)
        .choose(rng)
        .cloned()
        .ok_or_else(|| NoValidNeighbor(dm.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row2() -> DmPair {
        DmPair::new([1, 4, 7, 8, 15], [10, 33], 50).unwrap()
    }

    #[test]
    fn table_actions() {
        let dm = row2();
        let moved = apply(&dm, MutationKind::M2).unwrap();
        assert_eq!(moved, DmPair::new([1, 4, 7, 8, 10, 15], [33], 50).unwrap());
        let added = apply(&dm, MutationKind::M0).unwrap();
        assert!(added.is_digit(50));
        let added = apply(&dm, MutationKind::M1).unwrap();
        assert!(added.is_multiplier(50));
        let moved = apply(&dm, MutationKind::M3).unwrap();
        assert_eq!(moved, DmPair::new([1, 4, 7, 8], [10, 15, 33], 50).unwrap());
        assert_eq!(apply(&dm, MutationKind::M4).unwrap(), DmPair::new([1, 4, 7, 8], [10, 33], 50).unwrap());
        assert_eq!(apply(&dm, MutationKind::M5).unwrap(), DmPair::new([1, 4, 7, 8, 15], [10], 50).unwrap());
    }

    #[test]
    fn inapplicable_actions() {
        let no_m = DmPair::new([1, 2], [], 5).unwrap();
        assert_eq!(apply(&no_m, MutationKind::M5), None);
        assert_eq!(apply(&no_m, MutationKind::M2), None);
        let full = DmPair::new([1, 2, 3], [4], 4).unwrap();
        assert_eq!(apply(&full, MutationKind::M0), None);
        assert_eq!(apply(&full, MutationKind::M1), None);
        let single = DmPair::new([1], [2], 10).unwrap();
        assert_eq!(apply(&single, MutationKind::M4), None);
        assert_eq!(apply(&single, MutationKind::M3), None);
    }

    #[test]
    fn neighbours_are_filtered() {
        let dm = DmPair::new([1], [2], 10).unwrap();
        let kinds: Vec<_> = valid_neighbors(&dm).into_iter().map(|(k, _)| k).collect();
        assert!(!kinds.contains(&MutationKind::M4));
        assert!(!kinds.contains(&MutationKind::M5));

        let parity = DmPair::new([2], [3], 10).unwrap();
        for (_, next) in valid_neighbors(&parity) {
            assert!(covers(&next));
        }

        let english = DmPair::new([1, 2, 3, 4, 5, 6, 7, 8, 9, 11], [10], 50).unwrap();
        let m2 = apply(&english, MutationKind::M2).unwrap();
        assert_eq!(m2, DmPair::new(1..=11, [], 50).unwrap());
        assert!(!valid_neighbors(&english).iter().any(|(k, _)| *k == MutationKind::M2));
        let small = english.with_range(11).unwrap();
        assert!(valid_neighbors(&small).iter().any(|(k, _)| *k == MutationKind::M2));
    }

    #[test]
    fn sampling() {
        let dm = row2();
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        assert_eq!(sample_alternative(&dm, &mut a), sample_alternative(&dm, &mut b));

        // Only m2 applies and still covers [1, 2].
        let dm = DmPair::new([1], [2], 2).unwrap();
        let neighbours = valid_neighbors(&dm);
        assert_eq!(neighbours.len(), 1);
        for _ in 0..20 {
            assert_eq!(sample_alternative(&dm, &mut a).unwrap(), neighbours[0]);
        }

        let stuck = DmPair::new([1], [], 1).unwrap();
        assert!(sample_alternative(&stuck, &mut a).is_err());
    }

    #[test]
    fn uniform_over_four() {
        // m2 and m5 leave 5 uncoverable; m0, m1, m3, m4 survive.
        let dm = DmPair::new([1, 2, 3], [4], 6).unwrap();
        let neighbours = valid_neighbors(&dm);
        assert_eq!(neighbours.len(), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = neighbours.len();
        let draws = 10_000;
        let mut counts = vec![0usize; n];
        for _ in 0..draws {
            let pick = sample_alternative(&dm, &mut rng).unwrap();
            counts[neighbours.iter().position(|x| *x == pick).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / draws as f64 - 1.0 / n as f64).abs() < 0.05);
        }
    }

    #[test]
    fn move_down_then_up_restores() {
        // m2 moves 10 into D; m3 moves max(D) = 10 back.
        let dm = DmPair::new([1, 2, 3], [10], 20).unwrap();
        let there = apply(&dm, MutationKind::M2).unwrap();
        assert_eq!(apply(&there, MutationKind::M3).unwrap(), dm);
    }

    #[test]
    fn kind_names() {
        assert_eq!(MutationKind::M3.to_string(), "m3");
        assert_eq!("m5".parse::<MutationKind>().unwrap(), MutationKind::M5);
        assert!("m6".parse::<MutationKind>().is_err());
    }
}
