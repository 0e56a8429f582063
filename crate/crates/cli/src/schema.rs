//! JSON file formats for spaces and measures.
//!
//! A measure file looks like
//! `{"space": {"dim": 2, "norm": "linf"}, "atoms": [[1, 0], [0, 1]]}` where
//! `norm` is `"linf"`, `"l1"` or `{"hrep": [[...], ...]}` (dual functionals).

use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use gaugefactor::{NormKind, NormedSpace, VectorMeasure};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NormSpec {
    Named(String),
    Hrep { hrep: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub dim: usize,
    pub norm: NormSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub space: SpaceSpec,
    pub atoms: Vec<Vec<f64>>,
}

impl SpaceSpec {
    pub fn from_space(space: &NormedSpace) -> Self {
        let norm = match space.kind() {
            NormKind::Linf => NormSpec::Named("linf".into()),
            NormKind::L1 => NormSpec::Named("l1".into()),
            NormKind::Custom => NormSpec::Hrep {
                hrep: space.functionals().to_vec(),
            },
        };
        SpaceSpec { dim: space.dim(), norm }
    }

    pub fn build(&self) -> Result<NormedSpace> {
        if self.dim == 0 {
            bail!("space.dim: must be positive");
        }
        let space = match &self.norm {
            NormSpec::Named(n) if n == "linf" => NormedSpace::linf(self.dim),
            NormSpec::Named(n) if n == "l1" => NormedSpace::l1(self.dim),
            NormSpec::Named(n) => bail!("space.norm: unknown norm {n:?}, expected \"linf\", \"l1\" or {{\"hrep\": [...]}}"),
            NormSpec::Hrep { hrep } => {
                for (j, row) in hrep.iter().enumerate() {
                    if row.len() != self.dim {
                        bail!(
                            "space.norm.hrep[{j}]: expected {} entries, found {}",
                            self.dim,
                            row.len()
                        );
                    }
                }
                NormedSpace::custom(self.dim, hrep.clone())
            }
        };
        space.context("space.norm")
    }
}

impl MeasureFile {
    pub fn from_measure(m: &VectorMeasure) -> Self {
        MeasureFile {
            space: SpaceSpec::from_space(m.codomain()),
            atoms: m.atoms().to_vec(),
        }
    }

    pub fn build(&self) -> Result<VectorMeasure> {
        let space = Arc::new(self.space.build()?);
        if self.atoms.is_empty() {
            bail!("atoms: at least one atom is required");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if a.len() != self.space.dim {
                bail!("atoms[{i}]: expected {} entries, found {}", self.space.dim, a.len());
            }
        }
        VectorMeasure::new(space, self.atoms.clone()).context("atoms")
    }

    /// Parses and validates a measure document. Errors name the offending
    /// field, or the line and column for malformed JSON.
    pub fn parse(text: &str) -> Result<Self> {
        let value: Value = serde_json::from_str(text).context("malformed JSON")?;
        let obj = value.as_object().context("top level: expected an object")?;
        let space = obj.get("space").context("missing field `space`")?;
        let atoms = obj.get("atoms").context("missing field `atoms`")?;
        let space_obj = space.as_object().context("space: expected an object")?;
        let dim = space_obj
            .get("dim")
            .context("missing field `space.dim`")?
            .as_u64()
            .context("space.dim: expected a positive integer")? as usize;
        let norm = match space_obj.get("norm").context("missing field `space.norm`")? {
            Value::String(s) => NormSpec::Named(s.clone()),
            Value::Object(o) => {
                let rows = o
                    .get("hrep")
                    .context("space.norm: expected \"linf\", \"l1\" or {\"hrep\": [...]}")?;
                NormSpec::Hrep {
                    hrep: number_rows(rows, "space.norm.hrep")?,
                }
            }
            _ => bail!("space.norm: expected \"linf\", \"l1\" or {{\"hrep\": [...]}}"),
        };
        let file = MeasureFile {
            space: SpaceSpec { dim, norm },
            atoms: number_rows(atoms, "atoms")?,
        };
        file.build()?;
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }
}

fn number_rows(value: &Value, field: &str) -> Result<Vec<Vec<f64>>> {
    let rows = value
        .as_array()
        .with_context(|| format!("{field}: expected an array of arrays of numbers"))?;
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .with_context(|| format!("{field}[{i}]: expected an array of numbers"))?;
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    v.as_f64()
                        .with_context(|| format!("{field}[{i}][{j}]: expected a number"))
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = r#"{"atoms": [[1, 0], [0, 1]], "space": {"dim": 2, "norm": "linf"}}"#;
        let file = MeasureFile::parse(text).unwrap();
        let m = file.build().unwrap();
        assert_eq!(MeasureFile::from_measure(&m), file);
        let custom = r#"{"space": {"dim": 2, "norm": {"hrep": [[1, 1], [1, -1]]}}, "atoms": [[0.5, 0]]}"#;
        let file = MeasureFile::parse(custom).unwrap();
        let again = serde_json::to_string(&file).unwrap();
        assert_eq!(MeasureFile::parse(&again).unwrap(), file);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let err = |t: &str| format!("{:#}", MeasureFile::parse(t).unwrap_err());
        assert!(err(r#"{"space": {"dim": 2, "norm": "linf"}}"#).contains("atoms"));
        assert!(err(r#"{"space": {"dim": 2, "norm": "l2"}, "atoms": [[1, 0]]}"#).contains("space.norm"));
        assert!(err(r#"{"space": {"dim": 2, "norm": "linf"}, "atoms": [[1, 0], [1]]}"#).contains("atoms[1]"));
        assert!(err(r#"{"space": {"dim": 2, "norm": "linf"}, "atoms": [[1, "x"]]}"#).contains("atoms[0][1]"));
        assert!(err(r#"{"space": {"dim": 2, "norm": "linf"}, "atoms": [[0, 0]]}"#).contains("atoms"));
        assert!(err("{\n\"space\": ").contains("line 2"));
    }
}
