use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// The closed set of variation categories. Serialised as the exact
/// capitalised names; any other spelling is rejected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Category {
    Orthographic,
    Morphological,
    Lexical,
    Collocation,
    Tokenisation,
    Regional,
    Other,
}

impl Category {
    pub const ALL: [Category; 7] = [
        Category::Orthographic,
        Category::Morphological,
        Category::Lexical,
        Category::Collocation,
        Category::Tokenisation,
        Category::Regional,
        Category::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Orthographic => "Orthographic",
            Category::Morphological => "Morphological",
            Category::Lexical => "Lexical",
            Category::Collocation => "Collocation",
            Category::Tokenisation => "Tokenisation",
            Category::Regional => "Regional",
            Category::Other => "Other",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, PartialEq, Eq)]
pub struct UnknownCategory(pub String);

impl FromStr for Category {
    type Err = UnknownCategory;

    fn from_str(s: &str) -> Result<Category, UnknownCategory> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| UnknownCategory(s.to_owned()))
    }
}
