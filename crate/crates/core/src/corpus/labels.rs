//! Demographic label schemes and the mappings from raw attributes to labels.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;
use serde::{Deserialize, Serialize};

use super::CorpusError;

/// The four predicted attributes, in report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Demographic {
    Occupation,
    Age,
    Gender,
    Fame,
}

impl Demographic {
    pub const ALL: [Demographic; 4] =
        [Demographic::Occupation, Demographic::Age, Demographic::Gender, Demographic::Fame];

    pub fn name(self) -> &'static str {
        match self {
            Demographic::Occupation => "occupation",
            Demographic::Age => "age",
            Demographic::Gender => "gender",
            Demographic::Fame => "fame",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Demographic::Occupation => "Occupation",
            Demographic::Age => "Age",
            Demographic::Gender => "Gender",
            Demographic::Fame => "Fame",
        }
    }

    /// Class names in canonical class order.
    pub fn class_names(self) -> &'static [&'static str] {
        match self {
            Demographic::Occupation => Occupation::NAMES,
            Demographic::Age => AgeGroup::NAMES,
            Demographic::Gender => Gender::NAMES,
            Demographic::Fame => Fame::NAMES,
        }
    }

    pub fn n_classes(self) -> usize {
        self.class_names().len()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Demographic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Demographic {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Demographic::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| CorpusError::UnknownLabel { scheme: "demographic", value: s.into() })
    }
}

macro_rules! label_enum {
    ($(#[$meta:meta])* $name:ident, $scheme:literal, { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum $name {
            $(#[serde(rename = $text)] $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const NAMES: &'static [&'static str] = &[$($text),+];

            pub fn name(self) -> &'static str {
                Self::NAMES[self as usize]
            }

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(index: usize) -> Option<Self> {
                Self::ALL.get(index).copied()
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.name())
            }
        }

        impl FromStr for $name {
            type Err = CorpusError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                let trimmed = s.trim();
                Self::ALL
                    .iter()
                    .copied()
                    .find(|v| v.name().eq_ignore_ascii_case(trimmed))
                    .ok_or_else(|| CorpusError::UnknownLabel { scheme: $scheme, value: String::from(s) })
            }
        }
    };
}

label_enum!(
    /// Age bands 20-40, 40-60 and 60-80.
    AgeGroup, "age_group", { A20_40 => "20-40", A40_60 => "40-60", A60_80 => "60-80" }
);
label_enum!(Gender, "gender", { Male => "male", Female => "female" });
label_enum!(Occupation, "occupation", {
    Politics => "politics",
    Entertainment => "entertainment",
    Journalism => "journalism",
    Sports => "sports",
});
label_enum!(Fame, "fame", { Rising => "rising", Star => "star", Superstar => "superstar" });

pub const MIN_AGE: i32 = 20;
pub const MAX_AGE: i32 = 80;

pub const RISING_MAX_FOLLOWERS: u64 = 1_000_000;
pub const STAR_MAX_FOLLOWERS: u64 = 2_500_000;

/// Which band receives the shared boundary ages 40 and 60.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgeBoundary {
    /// 40 → 20-40, 60 → 40-60.
    #[default]
    Lower,
    /// 40 → 40-60, 60 → 60-80.
    Upper,
}

impl AgeBoundary {
    pub fn name(self) -> &'static str {
        match self {
            AgeBoundary::Lower => "lower",
            AgeBoundary::Upper => "upper",
        }
    }

    /// Inclusive age range covered by `group` under this rule.
    pub fn range(self, group: AgeGroup) -> (i32, i32) {
        match (self, group) {
            (AgeBoundary::Lower, AgeGroup::A20_40) => (20, 40),
            (AgeBoundary::Lower, AgeGroup::A40_60) => (41, 60),
            (AgeBoundary::Lower, AgeGroup::A60_80) => (61, 80),
            (AgeBoundary::Upper, AgeGroup::A20_40) => (20, 39),
            (AgeBoundary::Upper, AgeGroup::A40_60) => (40, 59),
            (AgeBoundary::Upper, AgeGroup::A60_80) => (60, 80),
        }
    }
}

/// Age band of a person of the given `age` in years.
pub fn age_group_for_age(age: i32, boundary: AgeBoundary) -> Result<AgeGroup, CorpusError> {
    if !(MIN_AGE..=MAX_AGE).contains(&age) {
        return Err(CorpusError::AgeOutOfRange { age });
    }
    Ok(AgeGroup::ALL
        .iter()
        .copied()
        .find(|&g| {
            let (lo, hi) = boundary.range(g);
            (lo..=hi).contains(&age)
        })
        .expect("age bands cover [20, 80]"))
}

/// Age band from a birth year, using the lower-band boundary convention.
pub fn map_age_group(birth_year: i32, reference_year: i32) -> Result<AgeGroup, CorpusError> {
    age_group_for_age(reference_year - birth_year, AgeBoundary::Lower)
}

/// Fame tier from a follower count: ≤1M rising, ≤2.5M star, above that superstar.
pub fn map_fame(follower_count: u64) -> Fame {
    if follower_count <= RISING_MAX_FOLLOWERS {
        Fame::Rising
    } else if follower_count <= STAR_MAX_FOLLOWERS {
        Fame::Star
    } else {
        Fame::Superstar
    }
}

/// Inclusive follower-count range used when synthesizing counts for a tier.
pub fn fame_follower_range(fame: Fame) -> (u64, u64) {
    match fame {
        Fame::Rising => (1_000, RISING_MAX_FOLLOWERS),
        Fame::Star => (RISING_MAX_FOLLOWERS + 1, STAR_MAX_FOLLOWERS),
        Fame::Superstar => (STAR_MAX_FOLLOWERS + 1, 50_000_000),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn age_examples() {
        assert_eq!(map_age_group(1987, 2022).unwrap(), AgeGroup::A20_40);
        assert_eq!(age_group_for_age(40, AgeBoundary::Lower).unwrap(), AgeGroup::A20_40);
        assert_eq!(age_group_for_age(60, AgeBoundary::Lower).unwrap(), AgeGroup::A40_60);
        assert_eq!(age_group_for_age(61, AgeBoundary::Lower).unwrap(), AgeGroup::A60_80);
        assert!(matches!(age_group_for_age(19, AgeBoundary::Lower), Err(CorpusError::AgeOutOfRange { age: 19 })));
        assert!(age_group_for_age(81, AgeBoundary::Lower).is_err());
        assert_eq!(age_group_for_age(40, AgeBoundary::Upper).unwrap(), AgeGroup::A40_60);
    }

    #[test]
    fn age_bands_partition_range() {
        for rule in [AgeBoundary::Lower, AgeBoundary::Upper] {
            for age in MIN_AGE..=MAX_AGE {
                let hits = AgeGroup::ALL
                    .iter()
                    .filter(|&&g| {
                        let (lo, hi) = rule.range(g);
                        (lo..=hi).contains(&age)
                    })
                    .count();
                assert_eq!(hits, 1, "age {age} under {rule:?}");
            }
        }
    }

    #[test]
    fn fame_thresholds() {
        assert_eq!(map_fame(0), Fame::Rising);
        assert_eq!(map_fame(1_000_000), Fame::Rising);
        assert_eq!(map_fame(1_000_001), Fame::Star);
        assert_eq!(map_fame(2_500_000), Fame::Star);
        assert_eq!(map_fame(2_500_001), Fame::Superstar);
        for fame in Fame::ALL {
            let (lo, hi) = fame_follower_range(*fame);
            assert_eq!(map_fame(lo), *fame);
            assert_eq!(map_fame(hi), *fame);
        }
    }

    #[test]
    fn label_parsing() {
        assert_eq!("Female".parse::<Gender>().unwrap(), Gender::Female);
        assert_eq!("20-40".parse::<AgeGroup>().unwrap(), AgeGroup::A20_40);
        assert!("pundit".parse::<Occupation>().is_err());
        assert_eq!("fame".parse::<Demographic>().unwrap(), Demographic::Fame);
    }
}
