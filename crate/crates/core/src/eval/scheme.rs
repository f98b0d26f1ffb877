//! Likert rating to class-label mappings.

use serde::{Deserialize, Serialize};

use super::EvalError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassScheme {
    /// 1–3 low, 4–5 high.
    TwoClass,
    /// 1–2 low, 3 medium, 4–5 high.
    ThreeClass,
    /// The rating itself, used as a regression target.
    FiveClass,
}

impl ClassScheme {
    pub const ALL: [ClassScheme; 3] = [ClassScheme::TwoClass, ClassScheme::ThreeClass, ClassScheme::FiveClass];

    pub fn name(&self) -> &'static str {
        match self {
            ClassScheme::TwoClass => "two_class",
            ClassScheme::ThreeClass => "three_class",
            ClassScheme::FiveClass => "five_class",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, EvalError> {
        Self::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| EvalError::UnknownScheme(name.to_string()))
    }

    /// Label names in class-index order.
    pub fn labels(&self) -> &'static [&'static str] {
        match self {
            ClassScheme::TwoClass => &["low", "high"],
            ClassScheme::ThreeClass => &["low", "medium", "high"],
            ClassScheme::FiveClass => &["1", "2", "3", "4", "5"],
        }
    }

    pub fn is_regression(&self) -> bool {
        *self == ClassScheme::FiveClass
    }

    /// Class index of a rating.
    pub fn class_of(&self, rating: i64) -> Result<usize, EvalError> {
        if !(1..=5).contains(&rating) {
            return Err(EvalError::InvalidRating(rating));
        }
        Ok(match self {
            ClassScheme::TwoClass => usize::from(rating >= 4),
            ClassScheme::ThreeClass => match rating {
                1 | 2 => 0,
                3 => 1,
                _ => 2,
            },
            ClassScheme::FiveClass => (rating - 1) as usize,
        })
    }
}

impl std::fmt::Display for ClassScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Label of a 1–5 rating under `scheme`.
pub fn map_likert(rating: i64, scheme: ClassScheme) -> Result<&'static str, EvalError> {
    Ok(scheme.labels()[scheme.class_of(rating)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_table() {
        let expected = [
            (ClassScheme::TwoClass, ["low", "low", "low", "high", "high"]),
            (ClassScheme::ThreeClass, ["low", "low", "medium", "high", "high"]),
            (ClassScheme::FiveClass, ["1", "2", "3", "4", "5"]),
        ];
        for (scheme, labels) in expected {
            for (r, l) in (1..=5).zip(labels) {
                assert_eq!(map_likert(r, scheme).unwrap(), l, "{scheme} {r}");
            }
        }
    }

    #[test]
    fn out_of_range() {
        for r in [0, 6, -1] {
            assert!(matches!(map_likert(r, ClassScheme::TwoClass), Err(EvalError::InvalidRating(_))));
        }
    }

    #[test]
    fn names_round_trip() {
        for s in ClassScheme::ALL {
            assert_eq!(ClassScheme::from_name(s.name()).unwrap(), s);
        }
        assert!(ClassScheme::from_name("binary").is_err());
    }
}
