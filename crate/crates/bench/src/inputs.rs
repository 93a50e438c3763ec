//! Input discovery, content hashing and shape loading.

use std::path::{Path, PathBuf};

use mesh3d_core::geometry::{normalize_to_unit_cube, sample_surface, PointCloud, TriangleMesh};
use mesh3d_core::RngSeed;
use sha2::{Digest, Sha256};

use crate::error::{compute_error, CliError, CliResult, ErrorKind};
use crate::obj::{self, ObjWarning};

/// One input file: its name (the object id), path and content hash.
#[derive(Debug, Clone)]
pub struct InputFile {
    pub id: String,
    pub path: PathBuf,
    pub sha256: [u8; 32],
}

pub fn hash_file(path: &Path) -> CliResult<[u8; 32]> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    Ok(Sha256::digest(&bytes).into())
}

/// `.obj` files directly inside `dir`, sorted by file name.
pub fn list_objs(dir: &Path) -> CliResult<Vec<InputFile>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))?;
    let mut paths = Vec::new();
    for e in entries {
        let p = e.map_err(|e| CliError::io(dir, e))?.path();
        let is_obj = p.extension().is_some_and(|x| x.eq_ignore_ascii_case("obj"));
        if is_obj && p.is_file() {
            paths.push(p);
        }
    }
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let id = path.file_name().expect("listed files have names").to_string_lossy().into_owned();
            Ok(InputFile { id, sha256: hash_file(&path)?, path })
        })
        .collect()
}

/// Seed specific to a mesh's geometry, so identical shapes get identical
/// samples and different shapes independent ones.
pub fn geometry_seed(mesh: &TriangleMesh, base: RngSeed) -> RngSeed {
    let mut h = Sha256::new();
    for v in mesh.vertices() {
        for c in [v.x, v.y, v.z] {
            h.update(c.to_le_bytes());
        }
    }
    for f in mesh.faces() {
        for i in f {
            h.update(i.to_le_bytes());
        }
    }
    let d = h.finalize();
    base.derive(u64::from_le_bytes(d[..8].try_into().expect("8 bytes")))
}

#[derive(Debug, Clone)]
pub struct LoadedMesh {
    pub mesh: TriangleMesh,
    pub warnings: Vec<String>,
}

pub fn load_mesh(path: &Path, normalize: bool) -> CliResult<LoadedMesh> {
    let data = obj::read_obj_file(path)?;
    let mut warnings: Vec<String> =
        data.warnings.iter().map(|w| match w { ObjWarning::EmptyMesh => "empty_mesh".to_string() }).collect();
    let mesh = if normalize && !data.mesh.vertices().is_empty() {
        normalize_to_unit_cube(&data.mesh).map_err(|e| CliError::new(ErrorKind::Validation, format!("{}: {e}", path.display())))?.0
    } else {
        data.mesh
    };
    if mesh.face_count() > 0 && !mesh3d_core::gen_metrics::is_closed(&mesh) {
        warnings.push("open_mesh".into());
    }
    Ok(LoadedMesh { mesh, warnings })
}

/// Surface samples of a mesh, or the vertices themselves for a face-less
/// OBJ (a point cloud without normals).
pub fn load_cloud(path: &Path, samples: usize, normalize: bool, seed: RngSeed) -> CliResult<PointCloud> {
    let m = load_mesh(path, normalize)?;
    if m.mesh.face_count() == 0 {
        if m.mesh.vertices().is_empty() {
            return Err(CliError::new(ErrorKind::Parse, format!("{}: no vertices", path.display())));
        }
        return Ok(PointCloud::from_positions(m.mesh.vertices()));
    }
    let s = geometry_seed(&m.mesh, seed);
    sample_surface(&m.mesh, samples, s).map_err(|e| compute_error(format!("{}: {e}", path.display())))
}
