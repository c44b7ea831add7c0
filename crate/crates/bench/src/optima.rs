use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cvrp_core::Weight;

/// Published TSPLIB optima shipped with the crate.
pub const BUNDLED: &str = include_str!("../data/optima.txt");

/// Instance name to known optimal weight.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Optima(BTreeMap<String, Weight>);

impl Optima {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled optima file is well formed")
    }

    /// Parses `name value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(name), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
                bail!("line {}: expected `name optimum`, got {raw:?}", idx + 1);
            };
            let value: Weight = value
                .parse()
                .with_context(|| format!("line {}: bad optimum {value:?}", idx + 1))?;
            if value == 0 {
                bail!("line {}: optimum of {name} must be positive", idx + 1);
            }
            map.insert(name.to_string(), value);
        }
        Ok(Self(map))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading optima file {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn get(&self, name: &str) -> Option<Weight> {
        self.0.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Weight)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_values() {
        let o = Optima::bundled();
        assert_eq!(o.get("gr17"), Some(2085));
        assert_eq!(o.get("gr120"), Some(6942));
        assert_eq!(o.get("nope"), None);
        assert_eq!(o.len(), 14);
    }

    #[test]
    fn parse_errors() {
        assert!(Optima::parse("a 1 2").is_err());
        assert!(Optima::parse("a x").is_err());
        assert!(Optima::parse("a 0").is_err());
        assert_eq!(Optima::parse("# c\n\n b 3 # tail\n").unwrap().get("b"), Some(3));
    }
}
