//! JSON and CSV files for spaces, functions and gradients.
//!
//! Space files take one of three shapes:
//! `{"points", "dist", "mu"}` (dense), `{"points", "coords", "power", "mu"}`
//! (line) or `{"generator": {"name", "params"}}`. Floats are written with
//! shortest round-trip formatting, so write-then-read is exact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{generate, GeneratorSpec, ReferenceCard};
use crate::norms::GradientSequence;
use crate::space::{FiniteQMMSpace, Metric};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpaceFile {
    Dense { points: Vec<String>, dist: Vec<Vec<f64>>, mu: Vec<f64> },
    Line { points: Vec<String>, coords: Vec<f64>, power: f64, mu: Vec<f64> },
    Generator { generator: GeneratorSpec },
}

impl SpaceFile {
    pub fn from_space(space: &FiniteQMMSpace) -> Self {
        let points = space.labels().to_vec();
        let mu = space.mu().to_vec();
        match space.metric() {
            Metric::Dense { .. } => SpaceFile::Dense { points, dist: space.dist_matrix(), mu },
            Metric::Line { coords, power } => SpaceFile::Line { points, coords: coords.clone(), power: *power, mu },
        }
    }

    /// Validates the file into a space; generator files also return their
    /// reference card.
    pub fn into_space(self) -> Result<(FiniteQMMSpace, Option<ReferenceCard>)> {
        match self {
            SpaceFile::Dense { points, dist, mu } => Ok((FiniteQMMSpace::from_dense(labels(points), dist, mu)?, None)),
            SpaceFile::Line { points, coords, power, mu } => Ok((FiniteQMMSpace::from_line(labels(points), coords, power, mu)?, None)),
            SpaceFile::Generator { generator } => {
                let g = generate(&generator)?;
                Ok((g.space, Some(g.card)))
            }
        }
    }
}

fn labels(points: Vec<String>) -> Option<Vec<String>> {
    if points.is_empty() {
        None
    } else {
        Some(points)
    }
}

fn json_err(e: serde_json::Error) -> Error {
    Error::Malformed(format!("json: {e}"))
}

pub fn space_to_json(space: &FiniteQMMSpace) -> String {
    serde_json::to_string_pretty(&SpaceFile::from_space(space)).expect("finite floats serialize")
}

pub fn space_from_json(text: &str) -> Result<(FiniteQMMSpace, Option<ReferenceCard>)> {
    serde_json::from_str::<SpaceFile>(text).map_err(json_err)?.into_space()
}

pub fn read_space(path: &Path) -> Result<(FiniteQMMSpace, Option<ReferenceCard>)> {
    space_from_json(&read(path)?)
}

/// A function file: either a bare array or `{"values": [...]}` with an
/// optional `"gradient"` (one value per point).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionFile {
    Bare(Vec<f64>),
    Full {
        values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        gradient: Option<Vec<f64>>,
    },
}

impl FunctionFile {
    pub fn values(&self) -> &[f64] {
        match self {
            FunctionFile::Bare(v) | FunctionFile::Full { values: v, .. } => v,
        }
    }

    pub fn gradient(&self) -> Option<&[f64]> {
        match self {
            FunctionFile::Full { gradient: Some(g), .. } => Some(g),
            _ => None,
        }
    }
}

pub fn read_function(path: &Path) -> Result<FunctionFile> {
    serde_json::from_str(&read(path)?).map_err(json_err)
}

/// All `*.json` files of a directory, in file-name order.
pub fn read_family(dir: &Path) -> Result<Vec<(PathBuf, FunctionFile)>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths.into_iter().map(|p| read_function(&p).map(|f| (p, f))).collect()
}

/// `point,level,value` rows; collapsed sequences use an empty level.
pub fn gradient_csv(labels: &[String], grad: &GradientSequence) -> String {
    let mut out = String::from("point,level,value\n");
    if grad.is_collapsed() {
        for (l, v) in labels.iter().zip(&grad.g[0]) {
            out.push_str(&format!("{l},,{v}\n"));
        }
    } else {
        for (k, row) in grad.levels.iter().zip(&grad.g) {
            for (l, v) in labels.iter().zip(row) {
                out.push_str(&format!("{l},{k},{v}\n"));
            }
        }
    }
    out
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Writes through a temporary sibling and a rename, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(format!("{}: {e}", path.display()));
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{cantor, uniform_grid};

    #[test]
    fn round_trip_is_exact() {
        for s in [cantor(2, 3, 0.3).unwrap(), uniform_grid(7, 0.37).unwrap()] {
            let (back, card) = space_from_json(&space_to_json(&s)).unwrap();
            assert!(card.is_none());
            assert_eq!(back.metric(), s.metric());
            assert_eq!(back.mu(), s.mu());
            assert_eq!(back.labels(), s.labels());
        }
    }

    #[test]
    fn generator_form() {
        let (s, card) = space_from_json(r#"{"generator": {"name": "discrete_N", "params": {"n": 5}}}"#).unwrap();
        assert_eq!(s.len(), 5);
        assert!(!card.unwrap().entries.is_empty());
    }

    #[test]
    fn invalid_space_rejected() {
        let bad = r#"{"points": [], "dist": [[0, 0], [1, 0]], "mu": [1, 1]}"#;
        assert!(space_from_json(bad).is_err());
    }

    #[test]
    fn function_shapes() {
        let a: FunctionFile = serde_json::from_str("[1, 2]").unwrap();
        let b: FunctionFile = serde_json::from_str(r#"{"values": [1, 2], "gradient": [0, 1]}"#).unwrap();
        assert_eq!(a.values(), b.values());
        assert_eq!(b.gradient(), Some(&[0.0, 1.0][..]));
    }
}
