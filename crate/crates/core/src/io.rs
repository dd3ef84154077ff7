//! Field files: a JSON header (grid descriptor, field names, byte offsets)
//! next to a little-endian `f64` sidecar holding the arrays in row-major order.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{ScalarField, SpinorField};
use crate::grid::{Grid, GridDescriptor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldEntry {
    pub name: String,
    /// Byte offset into the sidecar.
    pub offset: u64,
    pub len: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub grid: GridDescriptor<f64>,
    pub data_file: String,
    pub dtype: String,
    pub byte_order: String,
    pub fields: Vec<FieldEntry>,
    /// Names of scalar fields stored as `u ≡ −∞`.
    #[serde(default)]
    pub vanished: Vec<String>,
}

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("bin")
}

/// Writes named arrays; returns the sidecar path.
pub fn write_fields(path: &Path, grid: &Grid<f64>, fields: &[(&str, &[f64])], vanished: &[&str]) -> Result<PathBuf> {
    let mut bytes = Vec::new();
    let mut entries = Vec::new();
    for (name, values) in fields {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!("field {name} has {} values for {} nodes", values.len(), grid.len())));
        }
        entries.push(FieldEntry { name: (*name).to_string(), offset: bytes.len() as u64, len: values.len() as u64 });
        for v in *values {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    let bin = sidecar(path);
    let header = FieldHeader {
        grid: grid.descriptor(),
        data_file: bin.file_name().and_then(|s| s.to_str()).unwrap_or("fields.bin").to_string(),
        dtype: "f64".into(),
        byte_order: "little".into(),
        fields: entries,
        vanished: vanished.iter().map(|s| s.to_string()).collect(),
    };
    fs::write(&bin, bytes)?;
    fs::write(path, serde_json::to_string_pretty(&header)? + "\n")?;
    Ok(bin)
}

pub fn read_fields(path: &Path) -> Result<(FieldHeader, Vec<(String, Vec<f64>)>)> {
    let header: FieldHeader = serde_json::from_str(&fs::read_to_string(path)?)?;
    if header.dtype != "f64" || header.byte_order != "little" {
        return Err(Error::Format(format!("unsupported encoding {} / {}", header.dtype, header.byte_order)));
    }
    let bin = path.parent().unwrap_or(Path::new(".")).join(&header.data_file);
    let bytes = fs::read(bin)?;
    let mut out = Vec::new();
    for e in &header.fields {
        let start = e.offset as usize;
        let end = start + 8 * e.len as usize;
        let chunk = bytes.get(start..end).ok_or_else(|| Error::Format(format!("field {} exceeds the data file", e.name)))?;
        let values = chunk.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
        out.push((e.name.clone(), values));
    }
    Ok((header, out))
}

pub const STATE_NAMES: [&str; 5] = ["u", "psi0_re", "psi0_im", "psi1_re", "psi1_im"];

/// Stores `(u, ψ)` under the names of [`STATE_NAMES`].
pub fn save_state(path: &Path, u: &ScalarField<f64>, psi: &SpinorField<f64>) -> Result<PathBuf> {
    let c = psi.comps();
    let fields: Vec<(&str, &[f64])> = vec![
        (STATE_NAMES[0], u.values()),
        (STATE_NAMES[1], &c[0]),
        (STATE_NAMES[2], &c[1]),
        (STATE_NAMES[3], &c[2]),
        (STATE_NAMES[4], &c[3]),
    ];
    let vanished: &[&str] = if u.is_vanished() { &["u"] } else { &[] };
    write_fields(path, u.grid(), &fields, vanished)
}

pub fn load_state(path: &Path) -> Result<(ScalarField<f64>, SpinorField<f64>)> {
    let (header, fields) = read_fields(path)?;
    let grid = Arc::new(Grid::from_descriptor(&header.grid)?);
    let get = |name: &str| -> Result<Vec<f64>> {
        fields
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| Error::Format(format!("missing field {name}")))
    };
    let u = if header.vanished.iter().any(|n| n == "u") {
        ScalarField::vanished(grid.clone())
    } else {
        ScalarField::new(grid.clone(), get("u")?)?
    };
    let psi = SpinorField::from_comps(grid, [get(STATE_NAMES[1])?, get(STATE_NAMES[2])?, get(STATE_NAMES[3])?, get(STATE_NAMES[4])?])?;
    Ok((u, psi))
}

/// CSV `x,y,<names>` over inside nodes.
pub fn fields_to_csv(grid: &Grid<f64>, fields: &[(&str, &[f64])]) -> String {
    let mut s = String::from("x,y");
    for (n, _) in fields {
        s.push(',');
        s.push_str(n);
    }
    s.push('\n');
    for k in 0..grid.len() {
        if !grid.inside_mask()[k] {
            continue;
        }
        let p = grid.point(k);
        s.push_str(&format!("{:.12e},{:.12e}", p.x, p.y));
        for (_, v) in fields {
            s.push_str(&format!(",{:.17e}", v[k]));
        }
        s.push('\n');
    }
    s
}
