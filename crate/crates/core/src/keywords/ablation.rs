use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::normalize_keyword;

/// The twelve most common object categories, by instance count.
pub const COMMON_CATEGORIES: [&str; 12] = [
    "chair",
    "table",
    "cushion",
    "cabinet",
    "shelving",
    "sink",
    "dresser",
    "plant",
    "bed",
    "sofa",
    "counter",
    "fireplace",
];

/// Keyword strategy used to build detection queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AblationMode {
    /// Fixed closed vocabulary: always the common categories.
    Type1,
    /// Extracted keywords that contain a common category name.
    Type2,
    /// All extracted open-vocabulary keywords.
    #[default]
    Full,
}

impl AblationMode {
    pub fn apply(&self, extracted: &[String]) -> Vec<String> {
        match self {
            AblationMode::Type1 => COMMON_CATEGORIES.iter().map(|s| s.to_string()).collect(),
            AblationMode::Type2 => extracted
                .iter()
                .filter(|k| {
                    let k = normalize_keyword(k);
                    COMMON_CATEGORIES.iter().any(|c| k.contains(c))
                })
                .cloned()
                .collect(),
            AblationMode::Full => extracted.to_vec(),
        }
    }
}

impl fmt::Display for AblationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AblationMode::Type1 => "type1",
            AblationMode::Type2 => "type2",
            AblationMode::Full => "full",
        })
    }
}

impl FromStr for AblationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "type1" => Ok(AblationMode::Type1),
            "type2" => Ok(AblationMode::Type2),
            "full" => Ok(AblationMode::Full),
            other => Err(format!("unknown ablation mode '{other}' (type1|type2|full)")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn type2_filter() {
        let out = AblationMode::Type2.apply(&v(&["marble kitchen counter", "kitchen island"]));
        assert_eq!(out, v(&["marble kitchen counter"]));
    }

    #[test]
    fn type1_is_fixed() {
        let out = AblationMode::Type1.apply(&v(&["kitchen island"]));
        assert_eq!(out, v(&COMMON_CATEGORIES));
    }

    #[test]
    fn full_passes_through() {
        let ks = v(&["kitchen island", "sofa"]);
        assert_eq!(AblationMode::Full.apply(&ks), ks);
        assert_eq!("type2".parse::<AblationMode>().unwrap(), AblationMode::Type2);
        assert!("type4".parse::<AblationMode>().is_err());
    }
}
