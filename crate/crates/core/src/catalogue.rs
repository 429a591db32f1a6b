//! The test-function catalogue: a TOML list of `[[function]]` tables.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::TestFunction;

const BUILTIN: &str = include_str!("../data/catalogue.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Catalogue {
    #[serde(rename = "function", default)]
    pub functions: Vec<TestFunction>,
}

impl Catalogue {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("built-in catalogue is valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cat: Catalogue = toml::from_str(text).map_err(|e| Error::Catalogue(e.to_string()))?;
        cat.validate()?;
        Ok(cat)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Catalogue(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, f) in self.functions.iter().enumerate() {
            f.validate()?;
            if self.functions[..i].iter().any(|g| g.id == f.id) {
                return Err(Error::Catalogue(format!("duplicate id `{}`", f.id)));
            }
        }
        Ok(())
    }

    pub fn get(&self, id: &str) -> Result<&TestFunction> {
        self.functions
            .iter()
            .find(|f| f.id == id)
            .ok_or_else(|| Error::UnknownFunction(id.to_string()))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.functions.iter().map(|f| f.id.as_str())
    }
}
