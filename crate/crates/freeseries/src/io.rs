//! JSON formats for the data types that cross the CLI boundary — series
//! tables, realization nodes, subspace families, kernel tables — plus a
//! canonical writer (sorted keys, 17-significant-digit floats) so that
//! identical inputs always produce byte-identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::factorization::SubspaceFamily;
use crate::fps::FpsTable;
use crate::grnode::GrNode;
use crate::kernels::KernelTable;
use crate::linalg::{cplx, CMat};
use crate::structured::BlockDiag;
use crate::words::Word;

type MatrixJson = Vec<Vec<[f64; 2]>>;

fn matrix_to_rows(m: &CMat) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Converts nested `[re, im]` rows to a matrix of the stated shape; the
/// shape is explicit so zero-row and zero-column matrices round-trip.
fn matrix_from_rows(rows: usize, cols: usize, data: &MatrixJson, what: &str) -> Result<CMat> {
    if data.len() != rows {
        return Err(Error::InvalidInput(format!(
            "{what}: expected {rows} rows, found {}",
            data.len()
        )));
    }
    let mut m = CMat::zeros(rows, cols);
    for (i, row) in data.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::InvalidInput(format!(
                "{what}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            m[(i, j)] = cplx(re, im);
        }
    }
    Ok(m)
}

/// Converts nested rows to a matrix, inferring the shape (zero-column
/// matrices are a list of empty rows).
fn matrix_from_rows_inferred(data: &MatrixJson, what: &str) -> Result<CMat> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    matrix_from_rows(rows, cols, data, what)
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::InvalidInput(format!("malformed JSON: {e}"))
}

// ---------------------------------------------------------------------
// Formal power series
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermJson {
    word: Vec<u32>,
    matrix: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct FpsJson {
    n_vars: usize,
    rows: usize,
    cols: usize,
    degree: usize,
    terms: Vec<TermJson>,
}

/// Serializes a series table (canonical form).
pub fn fps_to_json(f: &FpsTable) -> String {
    let doc = FpsJson {
        n_vars: f.n_vars(),
        rows: f.rows(),
        cols: f.cols(),
        degree: f.degree(),
        terms: f
            .terms()
            .map(|(w, m)| TermJson {
                word: w.letters().to_vec(),
                matrix: matrix_to_rows(m),
            })
            .collect(),
    };
    canonical_json(&serde_json::to_value(&doc).expect("series serialization"))
}

/// Parses a series table, validating words and coefficient shapes.
pub fn fps_from_json(s: &str) -> Result<FpsTable> {
    let doc: FpsJson = serde_json::from_str(s).map_err(parse_err)?;
    let mut terms = Vec::with_capacity(doc.terms.len());
    for t in &doc.terms {
        let w = Word::from_letters(&t.word, doc.n_vars)?;
        let m = matrix_from_rows(doc.rows, doc.cols, &t.matrix, &format!("term at {w}"))?;
        terms.push((w, m));
    }
    FpsTable::from_terms(doc.n_vars, doc.rows, doc.cols, doc.degree, terms)
}

// ---------------------------------------------------------------------
// Realization nodes
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct NodeJson {
    n_vars: usize,
    dims: Vec<usize>,
    #[serde(rename = "A")]
    a: MatrixJson,
    #[serde(rename = "B")]
    b: MatrixJson,
    #[serde(rename = "C")]
    c: MatrixJson,
    #[serde(rename = "D")]
    d: MatrixJson,
    #[serde(rename = "J", skip_serializing_if = "Option::is_none")]
    j: Option<MatrixJson>,
}

/// Serializes a node, optionally with an attached signature matrix.
pub fn node_to_json(node: &GrNode, j: Option<&CMat>) -> String {
    let doc = NodeJson {
        n_vars: node.n_vars(),
        dims: node.dims().to_vec(),
        a: matrix_to_rows(node.a()),
        b: matrix_to_rows(node.b()),
        c: matrix_to_rows(node.c()),
        d: matrix_to_rows(node.d()),
        j: j.map(matrix_to_rows),
    };
    canonical_json(&serde_json::to_value(&doc).expect("node serialization"))
}

/// Parses a node (and its signature matrix when present).  The shape of
/// `D` fixes the input/output sizes; `dims` fixes the state splitting.
pub fn node_from_json(s: &str) -> Result<(GrNode, Option<CMat>)> {
    let doc: NodeJson = serde_json::from_str(s).map_err(parse_err)?;
    if doc.dims.len() != doc.n_vars {
        return Err(Error::InvalidInput(format!(
            "dims has {} entries for {} letters",
            doc.dims.len(),
            doc.n_vars
        )));
    }
    let d = matrix_from_rows_inferred(&doc.d, "D")?;
    let (p, q) = (d.nrows(), d.ncols());
    let r: usize = doc.dims.iter().sum();
    let a = matrix_from_rows(r, r, &doc.a, "A")?;
    let b = matrix_from_rows(r, q, &doc.b, "B")?;
    let c = matrix_from_rows(p, r, &doc.c, "C")?;
    let node = GrNode::new(doc.n_vars, doc.dims, a, b, c, d)?;
    let j = match &doc.j {
        Some(rows) => Some(matrix_from_rows(p, p, rows, "J")?),
        None => None,
    };
    Ok((node, j))
}

// ---------------------------------------------------------------------
// Subspace families
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FamilyJson {
    bases: Vec<MatrixJson>,
}

/// Serializes a subspace family as one basis matrix per component.
pub fn family_to_json(fam: &SubspaceFamily) -> String {
    let doc = FamilyJson {
        bases: fam.bases().iter().map(matrix_to_rows).collect(),
    };
    canonical_json(&serde_json::to_value(&doc).expect("family serialization"))
}

/// Parses a subspace family; each basis matrix must have full column
/// rank (a component with no rows in its basis list has dimension zero
/// in a zero-dimensional ambient space).
pub fn family_from_json(s: &str) -> Result<SubspaceFamily> {
    let doc: FamilyJson = serde_json::from_str(s).map_err(parse_err)?;
    let mut bases = Vec::with_capacity(doc.bases.len());
    for (k, rows) in doc.bases.iter().enumerate() {
        bases.push(matrix_from_rows_inferred(rows, &format!("basis {k}"))?);
    }
    SubspaceFamily::new(bases)
}

// ---------------------------------------------------------------------
// Kernel tables
// ---------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct KernelEntryJson {
    w: Vec<u32>,
    w2: Vec<u32>,
    matrix: MatrixJson,
}

#[derive(Serialize, Deserialize)]
struct KernelJson {
    component: usize,
    degree: usize,
    rows: usize,
    entries: Vec<KernelEntryJson>,
}

/// Serializes a kernel coefficient table.
pub fn kernel_to_json(table: &KernelTable) -> String {
    let doc = KernelJson {
        component: table.component(),
        degree: table.degree(),
        rows: table.rows(),
        entries: table
            .iter()
            .map(|((w, w2), m)| KernelEntryJson {
                w: w.letters().to_vec(),
                w2: w2.letters().to_vec(),
                matrix: matrix_to_rows(m),
            })
            .collect(),
    };
    canonical_json(&serde_json::to_value(&doc).expect("kernel serialization"))
}

/// Parses a kernel coefficient table, revalidating Hermitian symmetry.
pub fn kernel_from_json(s: &str) -> Result<KernelTable> {
    let doc: KernelJson = serde_json::from_str(s).map_err(parse_err)?;
    let mut entries = BTreeMap::new();
    for e in &doc.entries {
        let w = Word::from_letters_unchecked(e.w.clone());
        let w2 = Word::from_letters_unchecked(e.w2.clone());
        let m = matrix_from_rows(
            doc.rows,
            doc.rows,
            &e.matrix,
            &format!("kernel entry at ({w}, {w2})"),
        )?;
        entries.insert((w, w2), m);
    }
    KernelTable::new(doc.component, doc.degree, doc.rows, entries)
}

// ---------------------------------------------------------------------
// Canonical writer and report helpers
// ---------------------------------------------------------------------

/// Matrix as a JSON value (nested `[re, im]` rows) for report payloads.
pub fn matrix_value(m: &CMat) -> Value {
    serde_json::to_value(matrix_to_rows(m)).expect("matrix serialization")
}

/// Block-diagonal matrix as a JSON list of blocks.
pub fn block_diag_value(b: &BlockDiag) -> Value {
    Value::Array(b.blocks().iter().map(matrix_value).collect())
}

/// Writes a JSON value deterministically: object keys in sorted order,
/// every float as `{:.16e}` (17 significant digits, exact round-trip).
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_value(&mut out, value);
    out
}

fn write_value(out: &mut String, value: &Value) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                let _ = write!(out, "{i}");
            } else if let Some(u) = n.as_u64() {
                let _ = write!(out, "{u}");
            } else {
                let _ = write!(out, "{:.16e}", n.as_f64().unwrap_or(0.0));
            }
        }
        Value::String(s) => {
            out.push_str(&serde_json::to_string(s).expect("string escape"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, key) in keys.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(key).expect("key escape"));
                out.push(':');
                write_value(out, &map[key.as_str()]);
            }
            out.push('}');
        }
    }
}
