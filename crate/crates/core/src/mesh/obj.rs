//! Minimal Wavefront OBJ support: `v x y z` and triangular `f i j k` records.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use super::{TriMesh, Vec3};

#[derive(Debug, Error)]
pub enum ObjError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

fn parse_err(line: usize, message: impl Into<String>) -> ObjError {
    ObjError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses OBJ text. Records other than `v` and `f` are ignored; faces with
/// more than three vertices are rejected.
pub fn read_obj_str(text: &str) -> Result<TriMesh, ObjError> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<f64> = fields
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| parse_err(line_no, format!("bad vertex coordinate: {e}")))?;
                if coords.len() != 3 {
                    return Err(parse_err(line_no, "vertex needs three coordinates"));
                }
                vertices.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let idx: Vec<usize> = fields
                    .map(|s| {
                        let first = s.split('/').next().unwrap_or("");
                        first
                            .parse::<usize>()
                            .map_err(|_| parse_err(line_no, format!("bad face index '{s}'")))
                    })
                    .collect::<Result<_, _>>()?;
                if idx.len() != 3 {
                    return Err(parse_err(
                        line_no,
                        format!("only triangles are supported, face has {} vertices", idx.len()),
                    ));
                }
                if idx.iter().any(|&i| i == 0) {
                    return Err(parse_err(line_no, "face indices are 1-based"));
                }
                triangles.push([idx[0] - 1, idx[1] - 1, idx[2] - 1]);
            }
            _ => {}
        }
    }
    Ok(TriMesh::new(vertices, triangles))
}

pub fn read_obj(path: impl AsRef<Path>) -> Result<TriMesh, ObjError> {
    read_obj_str(&std::fs::read_to_string(path)?)
}

/// Renders OBJ text. Coordinates use the shortest round-trip representation.
pub fn write_obj_string(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertices.len() * 48 + mesh.triangles.len() * 24);
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn write_obj(mesh: &TriMesh, path: impl AsRef<Path>) -> Result<(), ObjError> {
    std::fs::write(path, write_obj_string(mesh))?;
    Ok(())
}
