//! Wavefront OBJ: `v` and `f` records in, `v` and `f` records out.

use std::fmt::Write as _;
use std::path::Path;

use mesh3d_core::geometry::{GeometryError, TriangleMesh};
use mesh3d_core::Vec3;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjWarning {
    /// The file has no faces.
    EmptyMesh,
}

#[derive(Debug, Clone)]
pub struct ObjData {
    pub mesh: TriangleMesh,
    pub warnings: Vec<ObjWarning>,
}

fn parse_err(line: usize, message: impl Into<String>) -> ObjError {
    ObjError::Parse { line, message: message.into() }
}

/// Resolves one face corner (`i`, `i/t`, `i//n`, `i/t/n`, negative = relative).
fn corner(token: &str, vertex_count: usize, line: usize) -> Result<u32, ObjError> {
    let head = token.split('/').next().unwrap_or("");
    let i: i64 = head.parse().map_err(|_| parse_err(line, format!("bad face index {token:?}")))?;
    let resolved = match i {
        0 => return Err(parse_err(line, "face index 0")),
        i if i > 0 => i - 1,
        i => vertex_count as i64 + i,
    };
    if resolved < 0 || resolved >= vertex_count as i64 {
        return Err(parse_err(line, format!("face index {i} out of range for {vertex_count} vertices")));
    }
    Ok(resolved as u32)
}

/// Parses OBJ text. Polygons are fan-triangulated from their first corner;
/// records other than `v` and `f` are ignored.
pub fn parse_obj(text: &str) -> Result<ObjData, ObjError> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        match tokens.next() {
            Some("v") => {
                let mut c = [0.0f64; 3];
                for slot in &mut c {
                    let t = tokens.next().ok_or_else(|| parse_err(line, "vertex needs 3 coordinates"))?;
                    *slot = t.parse().map_err(|_| parse_err(line, format!("bad coordinate {t:?}")))?;
                    if !slot.is_finite() {
                        return Err(parse_err(line, "non-finite coordinate"));
                    }
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let idx = tokens.map(|t| corner(t, vertices.len(), line)).collect::<Result<Vec<_>, _>>()?;
                if idx.len() < 3 {
                    return Err(parse_err(line, "face needs at least 3 vertices"));
                }
                for w in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[w], idx[w + 1]]);
                }
            }
            _ => {}
        }
    }
    let warnings = if faces.is_empty() { vec![ObjWarning::EmptyMesh] } else { vec![] };
    Ok(ObjData { mesh: TriangleMesh::new(vertices, faces)?, warnings })
}

/// Shortest decimal that round-trips the value rounded to 9 significant digits.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.8e}").parse().expect("formatted float parses");
    format!("{rounded}")
}

pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::with_capacity(40 * mesh.vertices().len() + 24 * mesh.face_count());
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", format_sig9(v.x), format_sig9(v.y), format_sig9(v.z));
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn read_obj_file(path: &Path) -> Result<ObjData, crate::error::CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| crate::error::CliError::io(path, e))?;
    parse_obj(&text).map_err(|e| {
        crate::error::CliError::new(crate::error::ErrorKind::Parse, format!("{}: {e}", path.display()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use mesh3d_core::geometry::primitives::box_mesh;

    #[test]
    fn cube_counts() {
        let text = write_obj(&box_mesh(Vec3::splat(-0.5), Vec3::splat(0.5)));
        let d = parse_obj(&text).unwrap();
        assert_eq!((d.mesh.vertices().len(), d.mesh.face_count()), (8, 12));
        assert!(d.warnings.is_empty());
    }

    #[test]
    fn quads_and_polygons_fan() {
        let d = parse_obj("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nv 0 2 0\nf 1 2 3 4\nf 1/1 3/2/1 4//2 5\n").unwrap();
        assert_eq!(d.mesh.faces(), &[[0, 1, 2], [0, 2, 3], [0, 2, 3], [0, 3, 4]]);
    }

    #[test]
    fn relative_indices() {
        let d = parse_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n").unwrap();
        assert_eq!(d.mesh.faces(), &[[0, 1, 2]]);
    }

    #[test]
    fn out_of_range_is_parse_error() {
        let mut text = String::new();
        for i in 0..8 {
            text += &format!("v {i} 0 0\n");
        }
        text += "f 1 2 9\n";
        assert!(matches!(parse_obj(&text), Err(ObjError::Parse { line: 9, .. })));
        assert!(matches!(parse_obj("v 0 0\n"), Err(ObjError::Parse { line: 1, .. })));
        assert!(matches!(parse_obj("v 0 0 0\nf 1 1\n"), Err(ObjError::Parse { line: 2, .. })));
    }

    #[test]
    fn vertices_only_warns() {
        let d = parse_obj("# cloud\nv 0 0 0\nvn 0 0 1\nv 1 2 3\n").unwrap();
        assert_eq!(d.warnings, vec![ObjWarning::EmptyMesh]);
        assert_eq!(d.mesh.vertices().len(), 2);
    }

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_sig9(0.1), "0.1");
        assert_eq!(format_sig9(1.0 / 3.0), "0.333333333");
        assert_eq!(format_sig9(-123456.789012), "-123456.789");
        assert_eq!(format_sig9(1.5e-9), "0.0000000015");
        assert_eq!(format_sig9(0.0), "0");
    }
}
