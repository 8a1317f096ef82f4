//! Grammars quoted from the literature.

use crate::grammar::{DmPair, GrammarError, Numeral};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReferenceGrammar {
    pub name: &'static str,
    pub digits: &'static [Numeral],
    pub multipliers: &'static [Numeral],
}

impl ReferenceGrammar {
    pub fn dm(&self, range_max: Numeral) -> Result<DmPair, GrammarError> {
        DmPair::new(self.digits.iter().copied(), self.multipliers.iter().copied(), range_max)
    }

    /// Like [`dm`](Self::dm), but a value listed in both sets is kept as a
    /// digit only.
    pub fn dm_disjoint(&self, range_max: Numeral) -> Result<DmPair, GrammarError> {
        let multipliers = self.multipliers.iter().copied().filter(|m| !self.digits.contains(m));
        DmPair::new(self.digits.iter().copied(), multipliers, range_max)
    }
}

const fn g(name: &'static str, digits: &'static [Numeral], multipliers: &'static [Numeral]) -> ReferenceGrammar {
    ReferenceGrammar { name, digits, multipliers }
}

pub const HUMAN_LANGUAGES: [ReferenceGrammar; 3] = [
    g("English", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 11], &[10]),
    g("French", &[1, 2, 3, 4, 5, 6, 7, 8, 9], &[10, 20]),
    g("Kunama", &[1, 2, 3, 4], &[5, 10]),
];

/// Starting grammars of the evolution experiments, numbered from 1.
pub const STARTING_POINTS: [ReferenceGrammar; 8] = [
    g("1", &[1, 2, 3, 20, 35, 37, 40, 47, 49], &[4, 25, 45]),
    g("2", &[1, 4, 7, 8, 15], &[10, 33]),
    g("3", &[1, 20, 25, 28, 31, 39, 41, 45], &[2, 3, 4, 15]),
    g("4", &[1, 4, 19, 21, 39, 40, 45, 47, 49], &[3, 5, 8, 10, 18, 23, 28, 30, 37, 42, 43, 48]),
    g("5", &[1, 2, 3, 4, 5, 10, 20, 30, 35, 40, 47, 49], &[6, 11, 13, 15, 45, 50]),
    g("6", &[1, 2, 35, 37, 40, 47, 49], &[3, 5, 10, 20, 30, 40]),
    g("7", &[1, 4, 12], &[9, 25]),
    g("8", &[1, 4, 17, 22, 49], &[9, 10, 25, 28, 31, 41, 45]),
];

/// Optimal lexicons of size 12 under different grammars.
pub const SIZE_12_LEXICONS: [ReferenceGrammar; 3] = [
    g("Hurford", &[1, 2, 3, 5, 6, 9, 10, 11, 14], &[4, 7, 25]),
    g("ours", &[1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11], &[12]),
    g("4-MixtecA", &[1, 2, 3, 4, 5, 6, 7, 8, 9], &[10, 15, 20]),
];

/// Starting point `index` in `1..=8`.
pub fn starting_point(index: usize) -> Option<&'static ReferenceGrammar> {
    index.checked_sub(1).and_then(|i| STARTING_POINTS.get(i))
}

pub fn human_language(name: &str) -> Option<&'static ReferenceGrammar> {
    HUMAN_LANGUAGES.iter().find(|g| g.name.eq_ignore_ascii_case(name))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lexicon::covers;

    #[test]
    fn starting_points_cover_the_communication_range() {
        for g in &STARTING_POINTS {
            let dm = g.dm_disjoint(50).unwrap();
            assert!(covers(&dm), "{}", g.name);
        }
        let overlapping: Vec<&str> = STARTING_POINTS.iter().filter(|g| g.dm(50).is_err()).map(|g| g.name).collect();
        assert_eq!(overlapping, ["6"]);
        assert_eq!(starting_point(6).unwrap().dm_disjoint(50).unwrap().lexicon_size(), 12);
    }

    #[test]
    fn lookups() {
        assert_eq!(starting_point(2).unwrap().digits, &[1, 4, 7, 8, 15]);
        assert_eq!(starting_point(2).unwrap().multipliers, &[10, 33]);
        assert_eq!(starting_point(7).unwrap().digits, &[1, 4, 12]);
        assert_eq!(starting_point(7).unwrap().multipliers, &[9, 25]);
        assert!(starting_point(0).is_none());
        assert!(starting_point(9).is_none());
        assert_eq!(human_language("english").unwrap().multipliers, &[10]);
        assert_eq!(SIZE_12_LEXICONS[1].dm(99).unwrap().lexicon_size(), 12);
        for g in &HUMAN_LANGUAGES {
            assert!(covers(&g.dm(99).unwrap()), "{}", g.name);
        }
    }
}
