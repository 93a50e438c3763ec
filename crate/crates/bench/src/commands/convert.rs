use mesh3d_core::reconstruct::{marching_cubes, IsoSurfaceConfig};
use mesh3d_core::signing::{compute_sdf, occupancy_grid, GridSpec};
use serde_json::json;

use super::warn;
use crate::cli::{ConvertArgs, GridKindArg, ReconstructArgs};
use crate::error::{compute_error, exit, CliError, CliResult, ErrorKind};
use crate::formats::{decode_grid, encode_grid};
use crate::inputs::load_mesh;
use crate::obj::write_obj;
use crate::report::write_bytes;

pub fn convert(a: &ConvertArgs) -> CliResult<i32> {
    a.validate()?;
    let m = load_mesh(&a.input, a.normalize)?;
    for w in &m.warnings {
        warn(json!({ "warning": w, "path": a.input }));
    }
    let spec = GridSpec::with_default_domain(a.resolution).map_err(|e| CliError::validation(e.to_string()))?;
    let grid = match a.kind {
        GridKindArg::Sdf => compute_sdf(&m.mesh, &spec, a.sign.into(), a.cutoff),
        GridKindArg::Occupancy => occupancy_grid(&m.mesh, &spec),
    }
    .map_err(compute_error)?;
    write_bytes(&a.output, &encode_grid(&grid))?;
    Ok(exit::OK)
}

pub fn reconstruct(a: &ReconstructArgs) -> CliResult<i32> {
    a.validate()?;
    let bytes = std::fs::read(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let grid = decode_grid(&bytes)
        .map_err(|e| CliError::new(ErrorKind::Parse, format!("{}: {e}", a.input.display())))?;
    let config = match a.iso {
        Some(iso_value) => IsoSurfaceConfig { iso_value },
        None => IsoSurfaceConfig::for_kind(grid.kind()),
    };
    let out = marching_cubes(&grid, config);
    if !out.warnings.is_empty() {
        warn(json!({ "warning": "empty_surface", "path": a.input }));
    }
    write_bytes(&a.output, write_obj(&out.mesh).as_bytes())?;
    Ok(exit::OK)
}
