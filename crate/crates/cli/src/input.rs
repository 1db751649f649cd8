//! Input parsing: Matrix Market, edge lists, JSON matrices and tensors, and
//! inner-product weight files. Number parsing goes through `str::parse`,
//! which does not depend on the locale.

use std::path::Path;

use pvd_core::tensor::DenseTensor;
use pvd_core::DenseMatrix;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    MatrixMarket,
    EdgeList,
    Json,
}

/// A parsed matrix plus the vertex labels an edge list introduced.
#[derive(Debug, Clone)]
pub struct LoadedMatrix {
    pub matrix: DenseMatrix,
    pub labels: Option<Vec<String>>,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

pub fn load_matrix(path: &Path, format: InputFormat) -> Result<LoadedMatrix, CliError> {
    let text = read_file(path)?;
    match format {
        InputFormat::MatrixMarket => Ok(LoadedMatrix {
            matrix: parse_matrix_market(&text)?,
            labels: None,
        }),
        InputFormat::EdgeList => {
            let (matrix, labels) = parse_edge_list(&text)?;
            Ok(LoadedMatrix {
                matrix,
                labels: Some(labels),
            })
        }
        InputFormat::Json => Ok(LoadedMatrix {
            matrix: parse_json_matrix(&text)?,
            labels: None,
        }),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse {
        line,
        message: message.into(),
    }
}

fn number(token: &str, line: usize) -> Result<f64, CliError> {
    let v: f64 = token
        .parse()
        .map_err(|_| parse_err(line, format!("not a number: {token:?}")))?;
    if !v.is_finite() {
        return Err(parse_err(line, format!("non-finite value {token:?}")));
    }
    Ok(v)
}

fn index(token: &str, limit: usize, line: usize) -> Result<usize, CliError> {
    let i: usize = token
        .parse()
        .map_err(|_| parse_err(line, format!("not an index: {token:?}")))?;
    if i == 0 || i > limit {
        return Err(parse_err(line, format!("index {i} outside 1..={limit}")));
    }
    Ok(i - 1)
}

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

/// Matrix Market `coordinate` or `array`, `real`/`integer`/`pattern`,
/// `general`/`symmetric`/`skew-symmetric`. Repeated coordinates are summed.
pub fn parse_matrix_market(text: &str) -> Result<DenseMatrix, CliError> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    let coordinate = match tokens[2].as_str() {
        "coordinate" => true,
        "array" => false,
        other => return Err(parse_err(1, format!("unsupported format {other:?}"))),
    };
    let pattern = match tokens[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" if coordinate => true,
        other => return Err(parse_err(1, format!("unsupported field {other:?}"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(parse_err(1, format!("unsupported symmetry {other:?}"))),
    };
    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = body.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<&str> = size.split_whitespace().collect();
    let expected_fields = if coordinate { 3 } else { 2 };
    if dims.len() != expected_fields {
        return Err(parse_err(size_line, "malformed size line"));
    }
    let parse_count = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| parse_err(size_line, format!("not a count: {t:?}")))
    };
    let (m, n) = (parse_count(dims[0])?, parse_count(dims[1])?);
    if m == 0 || n == 0 {
        return Err(parse_err(size_line, "matrix dimensions must be positive"));
    }
    if symmetry != Symmetry::General && m != n {
        return Err(parse_err(size_line, "symmetric storage needs a square matrix"));
    }
    let mut a = DenseMatrix::zeros(m, n);
    let mut place = |i: usize, j: usize, v: f64, line: usize| -> Result<(), CliError> {
        if symmetry == Symmetry::Skew && i == j {
            return Err(parse_err(line, "skew-symmetric storage has a zero diagonal"));
        }
        a.set(i, j, a.get(i, j) + v);
        if symmetry != Symmetry::General && i != j {
            let mirrored = if symmetry == Symmetry::Skew { -v } else { v };
            a.set(j, i, a.get(j, i) + mirrored);
        }
        Ok(())
    };
    if coordinate {
        let nnz = parse_count(dims[2])?;
        let mut seen = 0;
        for (line, l) in body {
            let t: Vec<&str> = l.split_whitespace().collect();
            let want = if pattern { 2 } else { 3 };
            if t.len() != want {
                return Err(parse_err(line, format!("expected {want} fields, found {}", t.len())));
            }
            let i = index(t[0], m, line)?;
            let j = index(t[1], n, line)?;
            let v = if pattern { 1.0 } else { number(t[2], line)? };
            if symmetry != Symmetry::General && j > i {
                return Err(parse_err(line, "symmetric storage lists the lower triangle only"));
            }
            place(i, j, v, line)?;
            seen += 1;
        }
        if seen != nnz {
            return Err(parse_err(size_line, format!("declared {nnz} entries, found {seen}")));
        }
    } else {
        // Column-major; symmetric forms list the lower triangle only.
        let mut slots = Vec::new();
        for j in 0..n {
            let start = match symmetry {
                Symmetry::General => 0,
                Symmetry::Symmetric => j,
                Symmetry::Skew => j + 1,
            };
            for i in start..m {
                slots.push((i, j));
            }
        }
        let mut values = Vec::with_capacity(slots.len());
        let mut last_line = size_line;
        for (line, l) in body {
            last_line = line;
            for tok in l.split_whitespace() {
                values.push((number(tok, line)?, line));
            }
        }
        if values.len() != slots.len() {
            return Err(parse_err(
                last_line,
                format!("expected {} values, found {}", slots.len(), values.len()),
            ));
        }
        for (&(i, j), &(v, line)) in slots.iter().zip(&values) {
            place(i, j, v, line)?;
        }
    }
    Ok(a)
}

/// Whitespace-separated `u v [w]` lines over arbitrary labels; `#` and `%`
/// start comments. Labels get dense indices in first-appearance order and the
/// result is a symmetric adjacency matrix; repeated edges accumulate.
pub fn parse_edge_list(text: &str) -> Result<(DenseMatrix, Vec<String>), CliError> {
    let mut labels: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let id = |s: &str, labels: &mut Vec<String>| match labels.iter().position(|l| l == s) {
        Some(k) => k,
        None => {
            labels.push(s.to_string());
            labels.len() - 1
        }
    };
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split(['#', '%']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let t: Vec<&str> = content.split_whitespace().collect();
        let w = match t.len() {
            2 => 1.0,
            3 => number(t[2], line)?,
            n => return Err(parse_err(line, format!("expected 2 or 3 fields, found {n}"))),
        };
        let u = id(t[0], &mut labels);
        let v = id(t[1], &mut labels);
        edges.push((u, v, w));
    }
    if labels.is_empty() {
        return Err(parse_err(1, "edge list has no edges"));
    }
    let n = labels.len();
    let mut a = DenseMatrix::zeros(n, n);
    for (u, v, w) in edges {
        a.set(u, v, a.get(u, v) + w);
        if u != v {
            a.set(v, u, a.get(v, u) + w);
        }
    }
    Ok((a, labels))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonMatrix {
    Rows(Vec<Vec<f64>>),
    Flat {
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
    },
    Wrapped {
        matrix: Vec<Vec<f64>>,
    },
}

fn json_err(e: serde_json::Error) -> CliError {
    parse_err(e.line(), e.to_string())
}

/// `[[...], ...]`, `{"matrix": [[...]]}` or `{"rows", "cols", "entries"}` (row-major).
pub fn parse_json_matrix(text: &str) -> Result<DenseMatrix, CliError> {
    let parsed: JsonMatrix = serde_json::from_str(text).map_err(json_err)?;
    let built = match parsed {
        JsonMatrix::Rows(rows) | JsonMatrix::Wrapped { matrix: rows } => {
            if rows.is_empty() {
                return Err(parse_err(1, "matrix has no rows"));
            }
            DenseMatrix::from_rows(&rows)
        }
        JsonMatrix::Flat { rows, cols, entries } => DenseMatrix::new(rows, cols, entries),
    };
    built.map_err(CliError::Core)
}

#[derive(Deserialize)]
struct JsonTensor {
    dims: Vec<usize>,
    entries: Vec<f64>,
}

/// `{"dims": [n1, ..., ns], "entries": [...]}` with the last index fastest.
pub fn parse_json_tensor(text: &str) -> Result<DenseTensor, CliError> {
    let t: JsonTensor = serde_json::from_str(text).map_err(json_err)?;
    DenseTensor::new(t.dims, t.entries).map_err(CliError::Core)
}

/// Weight files: a JSON array (used for both sides), a JSON object with
/// `left`/`right` or `modes`, or whitespace-separated numbers.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    Shared(Vec<f64>),
    Pair { left: Vec<f64>, right: Vec<f64> },
    Modes(Vec<Vec<f64>>),
}

#[derive(Deserialize)]
#[serde(untagged)]
enum JsonWeights {
    Shared(Vec<f64>),
    Pair { left: Vec<f64>, right: Vec<f64> },
    Modes { modes: Vec<Vec<f64>> },
}

pub fn parse_weights(text: &str) -> Result<WeightSpec, CliError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let w: JsonWeights = serde_json::from_str(text).map_err(json_err)?;
        return Ok(match w {
            JsonWeights::Shared(v) => WeightSpec::Shared(v),
            JsonWeights::Pair { left, right } => WeightSpec::Pair { left, right },
            JsonWeights::Modes { modes } => WeightSpec::Modes(modes),
        });
    }
    let mut out = Vec::new();
    for (k, l) in text.lines().enumerate() {
        let content = l.split('#').next().unwrap_or("");
        for tok in content.split_whitespace() {
            out.push(number(tok, k + 1)?);
        }
    }
    if out.is_empty() {
        return Err(parse_err(1, "weight file is empty"));
    }
    Ok(WeightSpec::Shared(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_path() {
        let (a, labels) = parse_edge_list("1 2\n2 3\n").unwrap();
        assert_eq!(labels, vec!["1", "2", "3"]);
        let expect =
            DenseMatrix::from_rows(&[vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]])
                .unwrap();
        assert_eq!(a, expect);
    }

    #[test]
    fn edge_list_labels_and_weights() {
        let (a, labels) = parse_edge_list("# comment\nb a 2.5\n\na c\n").unwrap();
        assert_eq!(labels, vec!["b", "a", "c"]);
        assert_eq!(a.get(0, 1), 2.5);
        assert_eq!(a.get(2, 1), 1.0);
        let err = parse_edge_list("a b\na b c d\n").unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 2, .. }));
    }

    #[test]
    fn matrix_market_identity() {
        let text = "%%MatrixMarket matrix coordinate real general\n% note\n2 2 2\n1 1 1.0\n2 2 1.0\n";
        assert_eq!(parse_matrix_market(text).unwrap(), DenseMatrix::identity(2));
    }

    #[test]
    fn matrix_market_variants() {
        let sym = "%%MatrixMarket matrix coordinate integer symmetric\n3 3 2\n2 1 4\n3 3 1\n";
        let a = parse_matrix_market(sym).unwrap();
        assert_eq!((a.get(0, 1), a.get(1, 0), a.get(2, 2)), (4.0, 4.0, 1.0));
        let pat = "%%MatrixMarket matrix coordinate pattern general\n2 3 1\n1 3\n";
        assert_eq!(parse_matrix_market(pat).unwrap().get(0, 2), 1.0);
        let arr = "%%MatrixMarket matrix array real general\n2 2\n1\n2\n3\n4\n";
        let a = parse_matrix_market(arr).unwrap();
        assert_eq!(a, DenseMatrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 4.0]]).unwrap());
        let arr_sym = "%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n";
        let a = parse_matrix_market(arr_sym).unwrap();
        assert_eq!(a, DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]]).unwrap());
    }

    #[test]
    fn rejects_nan_with_line() {
        let text = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 NaN\n";
        let err = parse_matrix_market(text).unwrap_err();
        assert!(matches!(err, CliError::Parse { line: 3, .. }), "{err:?}");
        assert!(parse_edge_list("a b inf\n").is_err());
    }

    #[test]
    fn matrix_market_errors() {
        assert!(parse_matrix_market("%%MatrixMarket matrix coordinate complex general\n1 1 0\n").is_err());
        let bad_count = "%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n";
        assert!(matches!(parse_matrix_market(bad_count).unwrap_err(), CliError::Parse { line: 2, .. }));
        let oob = "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1\n";
        assert!(matches!(parse_matrix_market(oob).unwrap_err(), CliError::Parse { line: 3, .. }));
    }

    #[test]
    fn json_forms() {
        let a = parse_json_matrix("[[1, -1], [-1, 1]]").unwrap();
        assert_eq!(a.get(0, 1), -1.0);
        let b = parse_json_matrix(r#"{"rows": 1, "cols": 2, "entries": [3, 4]}"#).unwrap();
        assert_eq!(b.get(0, 1), 4.0);
        assert!(parse_json_matrix("[[1, 2], [3]]").is_err());
        let t = parse_json_tensor(r#"{"dims": [2, 2, 2], "entries": [1,1,1,1,1,1,1,1]}"#).unwrap();
        assert_eq!(t.dims(), &[2, 2, 2]);
    }

    #[test]
    fn weight_files() {
        assert_eq!(parse_weights("1 2\n3").unwrap(), WeightSpec::Shared(vec![1.0, 2.0, 3.0]));
        assert_eq!(
            parse_weights(r#"{"left": [1], "right": [2, 3]}"#).unwrap(),
            WeightSpec::Pair { left: vec![1.0], right: vec![2.0, 3.0] }
        );
        assert!(matches!(parse_weights(r#"{"modes": [[1], [2]]}"#).unwrap(), WeightSpec::Modes(_)));
    }
}
