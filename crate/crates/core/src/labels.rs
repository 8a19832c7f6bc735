//! Categorical labels shared across the pipeline: dialect classes, speaker
//! gender and the six monophthong vowels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {kind} label {value:?}")]
pub struct LabelError {
    pub kind: &'static str,
    pub value: String,
}

/// The three dialect classes, in the fixed order used for class indices,
/// confusion matrices and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dialect {
    Imphal,
    Kakching,
    Sekmai,
}

impl Dialect {
    pub const ALL: [Dialect; 3] = [Dialect::Imphal, Dialect::Kakching, Dialect::Sekmai];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Dialect> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Dialect::Imphal => "Imphal",
            Dialect::Kakching => "Kakching",
            Dialect::Sekmai => "Sekmai",
        }
    }

    pub fn class_names() -> Vec<String> {
        Self::ALL.iter().map(|d| d.name().to_string()).collect()
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Dialect {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        Self::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(t))
            .ok_or_else(|| LabelError {
                kind: "dialect",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    Male,
    Female,
}

impl Gender {
    /// Numeric encoding used in the feature vector: male 0, female 1.
    pub fn code(self) -> f64 {
        match self {
            Gender::Male => 0.0,
            Gender::Female => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Gender::Male => "male",
            Gender::Female => "female",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Gender {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "male" | "m" => Ok(Gender::Male),
            "female" | "f" => Ok(Gender::Female),
            _ => Err(LabelError {
                kind: "gender",
                value: s.to_string(),
            }),
        }
    }
}

/// One of the six monophthongs /ə/, /e/, /i/, /o/, /u/, /a/.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vowel {
    Schwa,
    E,
    I,
    O,
    U,
    A,
}

impl Vowel {
    pub const ALL: [Vowel; 6] = [Vowel::Schwa, Vowel::E, Vowel::I, Vowel::O, Vowel::U, Vowel::A];

    /// The label as it appears in annotation files.
    pub fn symbol(self) -> &'static str {
        match self {
            Vowel::Schwa => "ə",
            Vowel::E => "e",
            Vowel::I => "i",
            Vowel::O => "o",
            Vowel::U => "u",
            Vowel::A => "a",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    /// Exact match of a trimmed label against the six symbols.
    pub fn from_label(label: &str) -> Option<Vowel> {
        let t = label.trim();
        Self::ALL.into_iter().find(|v| v.symbol() == t)
    }
}

impl fmt::Display for Vowel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl FromStr for Vowel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Vowel::from_label(s).ok_or_else(|| LabelError {
            kind: "vowel",
            value: s.to_string(),
        })
    }
}
