//! Model and partition file formats.
//!
//! Models are UTF-8 JSON:
//!
//! ```json
//! {
//!   "points": ["x1", "y1"],
//!   "edges": [["x1", "y1"]],
//!   "symmetric": false,
//!   "atoms": { "red": ["x1"] }
//! }
//! ```
//!
//! Saving is canonical: points in first-appearance order, edges sorted by
//! name pair, atom names sorted, atom members in point order. A symmetric
//! input is saved with both edge directions spelled out.
//!
//! Partition files are plain text, one line per block:
//! `block <id>: <point> <point> ...` with canonical ids.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::bisim::Partition;
use crate::error::{Error, Result};
use crate::space::ClosureModel;

#[derive(Deserialize)]
struct ModelFile {
    points: Vec<String>,
    #[serde(default)]
    edges: Vec<(String, String)>,
    #[serde(default)]
    symmetric: bool,
    #[serde(default)]
    atoms: BTreeMap<String, Vec<String>>,
}

pub fn load_model_str(text: &str) -> Result<ClosureModel> {
    let file: ModelFile =
        serde_json::from_str(text).map_err(|e| Error::BadModel(e.to_string()))?;
    let atoms: Vec<(String, Vec<String>)> = file.atoms.into_iter().collect();
    ClosureModel::build(file.points, &file.edges, file.symmetric, &atoms)
}

pub fn load_model(path: &Path) -> Result<ClosureModel> {
    load_model_str(&std::fs::read_to_string(path)?)
}

/// Canonical JSON for a model. `load(save(m))` reproduces `m` and `save` is
/// a fixpoint on its own output.
pub fn save_model_string(model: &ClosureModel) -> String {
    let mut out = String::from("{\n  \"points\": [");
    for (i, name) in model.point_names().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&json_str(name));
    }
    out.push_str("],\n  \"edges\": [");
    let mut edges: Vec<(&str, &str)> =
        model.edges().map(|(a, b)| (model.name(a), model.name(b))).collect();
    edges.sort_unstable();
    for (i, (a, b)) in edges.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("\n    [");
        out.push_str(&json_str(a));
        out.push_str(", ");
        out.push_str(&json_str(b));
        out.push(']');
    }
    if !edges.is_empty() {
        out.push_str("\n  ");
    }
    out.push_str("],\n  \"symmetric\": false,\n  \"atoms\": {");
    let atom_names: Vec<&str> = model.atom_names().collect();
    for (i, atom) in atom_names.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str("\n    ");
        out.push_str(&json_str(atom));
        out.push_str(": [");
        let set = model.atom_set(atom).unwrap();
        for (j, p) in set.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            out.push_str(&json_str(model.name(p)));
        }
        out.push(']');
    }
    if !atom_names.is_empty() {
        out.push_str("\n  ");
    }
    out.push_str("}\n}\n");
    out
}

pub fn save_model(model: &ClosureModel, path: &Path) -> Result<()> {
    std::fs::write(path, save_model_string(model))?;
    Ok(())
}

fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string encoding cannot fail")
}

pub fn partition_to_string(model: &ClosureModel, partition: &Partition) -> String {
    let mut out = String::new();
    for (id, block) in partition.blocks().iter().enumerate() {
        out.push_str(&format!("block {id}:"));
        for p in block.iter() {
            out.push(' ');
            out.push_str(model.name(p));
        }
        out.push('\n');
    }
    out
}

pub fn parse_partition(model: &ClosureModel, text: &str) -> Result<Partition> {
    let mut block_of = vec![None; model.len()];
    let mut blocks = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let rest = line
            .strip_prefix("block ")
            .and_then(|r| r.split_once(':'))
            .ok_or_else(|| Error::BadPartition(format!("line {}: expected `block <id>: ...`", lineno + 1)))?
            .1;
        for name in rest.split_whitespace() {
            let p = model.point(name)?;
            if block_of[p.index()].is_some() {
                return Err(Error::BadPartition(format!("point `{name}` listed twice")));
            }
            block_of[p.index()] = Some(blocks);
        }
        blocks += 1;
    }
    let assignment: Option<Vec<usize>> = block_of.into_iter().collect();
    match assignment {
        Some(ids) => Ok(Partition::from_assignment(model.len(), &ids)),
        None => Err(Error::PartitionMismatch),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "points": ["b", "a"],
        "edges": [["b", "a"]],
        "symmetric": true,
        "atoms": {"red": ["a"]}
    }"#;

    #[test]
    fn roundtrip_is_canonical() {
        let m = load_model_str(SAMPLE).unwrap();
        let once = save_model_string(&m);
        let again = save_model_string(&load_model_str(&once).unwrap());
        assert_eq!(once, again);
        // symmetric edges are expanded
        assert!(once.contains("[\"a\", \"b\"]") && once.contains("[\"b\", \"a\"]"));
    }

    #[test]
    fn load_reports_unknown_names() {
        let err = load_model_str(r#"{"points": ["a"], "edges": [["a","zz"]]}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownPoint(n) if n == "zz"));
        let err =
            load_model_str(r#"{"points": ["a"], "atoms": {"red": ["qq"]}}"#).unwrap_err();
        assert!(matches!(err, Error::UnknownPoint(n) if n == "qq"));
    }

    #[test]
    fn malformed_json_is_a_parse_error() {
        assert!(load_model_str("{").unwrap_err().is_parse());
    }
}
