//! File formats written and read by the CLI: distance-matrix CSV/JSON with a
//! metadata sidecar, and coordinate CSV. Numbers use Rust's shortest
//! round-trip decimal formatting, so identical runs produce byte-identical
//! files and values parse back exactly.

use crate::error::CliError;
use serde::{Deserialize, Serialize};
use shapesig::analysis::{DistanceMatrix, MdsEmbedding};
use std::path::Path;

pub fn write_distance_csv(matrix: &DistanceMatrix) -> String {
    let n = matrix.n();
    let mut out = String::from("id");
    for id in matrix.ids() {
        out.push(',');
        out.push_str(id);
    }
    out.push('\n');
    for i in 0..n {
        out.push_str(&matrix.ids()[i]);
        for j in 0..n {
            out.push(',');
            out.push_str(&format!("{}", matrix.get(i, j)));
        }
        out.push('\n');
    }
    out
}

pub fn read_distance_csv(text: &str, method: &str) -> Result<DistanceMatrix, CliError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| CliError::data("empty distance file"))?;
    let ids: Vec<String> = header.split(',').skip(1).map(|s| s.to_string()).collect();
    let n = ids.len();
    if n == 0 {
        return Err(CliError::data("distance file header has no ids"));
    }
    let mut values = Vec::with_capacity(n * n);
    for (rownum, line) in lines.enumerate() {
        let mut cols = line.split(',');
        let row_id = cols
            .next()
            .ok_or_else(|| CliError::data(format!("row {} is empty", rownum + 2)))?;
        if rownum >= n || row_id != ids[rownum] {
            return Err(CliError::data(format!(
                "row {} id {row_id:?} does not match header",
                rownum + 2
            )));
        }
        for col in cols {
            let v: f64 = col.parse().map_err(|_| {
                CliError::data(format!("row {}: bad number {col:?}", rownum + 2))
            })?;
            values.push(v);
        }
    }
    if values.len() != n * n {
        return Err(CliError::data(format!(
            "expected {} values, got {}",
            n * n,
            values.len()
        )));
    }
    Ok(DistanceMatrix::from_values(ids, values, method)?)
}

#[derive(Debug, Serialize, Deserialize)]
struct DistanceJson {
    method: String,
    ids: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn write_distance_json(matrix: &DistanceMatrix) -> String {
    let n = matrix.n();
    let doc = DistanceJson {
        method: matrix.method().to_string(),
        ids: matrix.ids().to_vec(),
        rows: (0..n)
            .map(|i| (0..n).map(|j| matrix.get(i, j)).collect())
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("matrix serializes")
}

pub fn read_distance_json(text: &str) -> Result<DistanceMatrix, CliError> {
    let doc: DistanceJson =
        serde_json::from_str(text).map_err(|e| CliError::data(format!("bad matrix JSON: {e}")))?;
    let values = doc.rows.into_iter().flatten().collect();
    Ok(DistanceMatrix::from_values(doc.ids, values, doc.method)?)
}

/// Reads a distance matrix, accepting either format (JSON files start with
/// '{').
pub fn read_distance_file(path: &str) -> Result<DistanceMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {path}: {e}")))?;
    if text.trim_start().starts_with('{') {
        read_distance_json(&text)
    } else {
        read_distance_csv(&text, "loaded")
    }
}

/// Sidecar metadata recording how a matrix was built. The build time is a
/// measurement, so this file is the one output that varies between runs.
#[derive(Debug, Serialize)]
pub struct MatrixMetadata<'a> {
    pub method: &'a str,
    pub n: usize,
    pub parallel: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_step: Option<usize>,
    pub build_seconds: f64,
}

pub fn sidecar_path(out: &str) -> String {
    format!("{out}.meta.json")
}

pub fn write_coords_csv(
    embedding: &MdsEmbedding,
    ids: &[String],
    labels: Option<&[String]>,
) -> String {
    let dim = embedding.points.first().map(|p| p.len()).unwrap_or(0);
    let mut out = String::from("id");
    for axis in 0..dim {
        out.push_str(&format!(",x{axis}"));
    }
    if labels.is_some() {
        out.push_str(",label");
    }
    out.push('\n');
    for (i, point) in embedding.points.iter().enumerate() {
        out.push_str(&ids[i]);
        for v in point {
            out.push_str(&format!(",{v}"));
        }
        if let Some(ls) = labels {
            out.push(',');
            out.push_str(&ls[i]);
        }
        out.push('\n');
    }
    out
}

pub fn write_file(path: &str, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = Path::new(path).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, contents)
        .map_err(|e| CliError::data(format!("cannot write {path}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn awkward_matrix() -> DistanceMatrix {
        // Values with no short decimal representation.
        let d01 = std::f64::consts::PI / 7.0;
        let d02 = 2.0f64.sqrt() * 1e-7;
        let d12 = 1.0 / 3.0;
        let ids = vec!["a".to_string(), "b".to_string(), "c".to_string()];
        let values = vec![0.0, d01, d02, d01, 0.0, d12, d02, d12, 0.0];
        DistanceMatrix::from_values(ids, values, "test").unwrap()
    }

    #[test]
    fn csv_roundtrip_is_lossless() {
        let m = awkward_matrix();
        let text = write_distance_csv(&m);
        let back = read_distance_csv(&text, "test").unwrap();
        assert_eq!(back.ids(), m.ids());
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.get(i, j).to_bits(), m.get(i, j).to_bits());
            }
        }
        // And the re-serialization is byte-identical.
        assert_eq!(write_distance_csv(&back), text);
    }

    #[test]
    fn json_roundtrip_is_lossless() {
        let m = awkward_matrix();
        let back = read_distance_json(&write_distance_json(&m)).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(back.get(i, j).to_bits(), m.get(i, j).to_bits());
            }
        }
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(read_distance_csv("", "x").is_err());
        assert!(read_distance_csv("id,a,b\na,0,1\nb,oops,0\n", "x").is_err());
        assert!(read_distance_csv("id,a,b\nwrong,0,1\nb,1,0\n", "x").is_err());
        // Asymmetric values fail matrix validation.
        assert!(read_distance_csv("id,a,b\na,0,1\nb,2,0\n", "x").is_err());
    }
}
