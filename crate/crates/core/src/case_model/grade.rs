use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::util::normalize_words;

/// School grade from Pre-K through 12th grade.
///
/// Ordering follows the grade ladder, so `index()` doubles as the distance
/// metric used by group matching.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradeLevel(u8);

impl GradeLevel {
    pub const PRE_K: GradeLevel = GradeLevel(0);
    pub const KINDERGARTEN: GradeLevel = GradeLevel(1);
    pub const COUNT: usize = 14;

    /// `n`th grade, 1..=12.
    pub fn grade(n: u8) -> Option<GradeLevel> {
        (1..=12).contains(&n).then_some(GradeLevel(n + 1))
    }

    pub fn from_index(index: usize) -> Option<GradeLevel> {
        (index < Self::COUNT).then_some(GradeLevel(index as u8))
    }

    pub fn all() -> impl Iterator<Item = GradeLevel> {
        (0..Self::COUNT as u8).map(GradeLevel)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Inclusive typical age range in years: Pre-K is 4-5, and every later
    /// step adds one year.
    pub fn age_range(self) -> (u32, u32) {
        let min = 4 + self.0 as u32;
        (min, min + 1)
    }

    pub fn distance(self, other: GradeLevel) -> usize {
        self.index().abs_diff(other.index())
    }

    pub fn display_name(self) -> String {
        match self.0 {
            0 => "Pre-K".to_string(),
            1 => "Kindergarten".to_string(),
            n => format!("{} Grade", ordinal(n as u32 - 1)),
        }
    }
}

fn ordinal(n: u32) -> String {
    let suffix = match (n % 10, n % 100) {
        (_, 11..=13) => "th",
        (1, _) => "st",
        (2, _) => "nd",
        (3, _) => "rd",
        _ => "th",
    };
    format!("{n}{suffix}")
}

impl fmt::Display for GradeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unrecognised grade level: {0:?}")]
pub struct UnknownGrade(pub String);

const ORDINAL_WORDS: [&str; 12] = [
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth",
    "eleventh", "twelfth",
];

impl FromStr for GradeLevel {
    type Err = UnknownGrade;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = normalize_words(s);
        let words: Vec<&str> = norm
            .split(' ')
            .filter(|w| !w.is_empty() && *w != "grade" && *w != "grader")
            .collect();
        let err = || UnknownGrade(s.to_string());
        match words.as_slice() {
            ["pre", "k"] | ["prek"] | ["pre", "kindergarten"] | ["preschool"] | ["pk"] => {
                Ok(GradeLevel::PRE_K)
            }
            ["k"] | ["kindergarten"] | ["kinder"] => Ok(GradeLevel::KINDERGARTEN),
            [one] => {
                let digits: String = one.chars().take_while(|c| c.is_ascii_digit()).collect();
                let n = if !digits.is_empty() {
                    let rest = &one[digits.len()..];
                    if !matches!(rest, "" | "st" | "nd" | "rd" | "th") {
                        return Err(err());
                    }
                    digits.parse::<u8>().map_err(|_| err())?
                } else {
                    ORDINAL_WORDS
                        .iter()
                        .position(|w| w == one)
                        .map(|p| p as u8 + 1)
                        .ok_or_else(err)?
                };
                GradeLevel::grade(n).ok_or_else(err)
            }
            _ => Err(err()),
        }
    }
}

impl Serialize for GradeLevel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.display_name())
    }
}

impl<'de> Deserialize<'de> for GradeLevel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder() {
        assert_eq!(GradeLevel::PRE_K.age_range(), (4, 5));
        assert_eq!(GradeLevel::KINDERGARTEN.age_range(), (5, 6));
        assert_eq!(GradeLevel::grade(1).unwrap().age_range(), (6, 7));
        assert_eq!(GradeLevel::grade(2).unwrap().age_range(), (7, 8));
        assert_eq!(GradeLevel::grade(12).unwrap().age_range(), (17, 18));
        assert_eq!(GradeLevel::all().count(), 14);
    }

    #[test]
    fn display_and_parse() {
        assert_eq!(GradeLevel::grade(2).unwrap().to_string(), "2nd Grade");
        assert_eq!(GradeLevel::grade(11).unwrap().to_string(), "11th Grade");
        assert_eq!(GradeLevel::grade(3).unwrap().to_string(), "3rd Grade");
        assert_eq!(GradeLevel::PRE_K.to_string(), "Pre-K");
        for g in GradeLevel::all() {
            assert_eq!(g.to_string().parse::<GradeLevel>().unwrap(), g);
        }
        assert_eq!("second-grade".parse::<GradeLevel>().unwrap(), GradeLevel::grade(2).unwrap());
        assert_eq!("Grade 9".parse::<GradeLevel>().unwrap(), GradeLevel::grade(9).unwrap());
        assert_eq!("2nd".parse::<GradeLevel>().unwrap(), GradeLevel::grade(2).unwrap());
        assert_eq!("K".parse::<GradeLevel>().unwrap(), GradeLevel::KINDERGARTEN);
        assert!("13th Grade".parse::<GradeLevel>().is_err());
        assert!("college".parse::<GradeLevel>().is_err());
        assert!("2x".parse::<GradeLevel>().is_err());
    }
}
