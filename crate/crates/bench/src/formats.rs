//! Little-endian binary containers: `SDFG` scalar grids and `CDMX`
//! distance-matrix caches.

use mesh3d_core::geometry::Aabb;
use mesh3d_core::recon_metrics::ChamferPower;
use mesh3d_core::signing::{GridKind, GridSpec, ScalarGrid};
use mesh3d_core::Vec3;
use thiserror::Error;

pub const SDFG_MAGIC: &[u8; 4] = b"SDFG";
pub const SDFG_VERSION: u32 = 1;
pub const CDMX_MAGIC: &[u8; 4] = b"CDMX";
pub const CDMX_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormatError {
    #[error("bad magic, expected {0:?}")]
    Magic(&'static str),
    #[error("unsupported version {0}")]
    Version(u32),
    #[error("file truncated at byte {0}")]
    Truncated(usize),
    #[error("{0} trailing bytes")]
    Trailing(usize),
    #[error("invalid header: {0}")]
    Header(String),
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], FormatError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(FormatError::Truncated(self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, FormatError> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, FormatError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64, FormatError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>, FormatError> {
        let raw = self.take(n.checked_mul(8).ok_or(FormatError::Truncated(self.pos))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }

    fn finish(&self) -> Result<(), FormatError> {
        match self.bytes.len() - self.pos {
            0 => Ok(()),
            n => Err(FormatError::Trailing(n)),
        }
    }
}

pub fn encode_grid(grid: &ScalarGrid) -> Vec<u8> {
    let spec = grid.spec();
    let mut out = Vec::with_capacity(61 + 4 * grid.values().len());
    out.extend_from_slice(SDFG_MAGIC);
    out.extend_from_slice(&SDFG_VERSION.to_le_bytes());
    out.extend_from_slice(&(spec.resolution() as u32).to_le_bytes());
    let d = spec.domain();
    for v in [d.min.x, d.min.y, d.min.z, d.max.x, d.max.y, d.max.z] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    let (kind, cutoff) = match grid.kind() {
        GridKind::TruncatedSdf { cutoff } => (0u8, cutoff),
        GridKind::Occupancy => (1u8, 0.0),
    };
    out.push(kind);
    out.extend_from_slice(&cutoff.to_le_bytes());
    for v in grid.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_grid(bytes: &[u8]) -> Result<ScalarGrid, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != SDFG_MAGIC {
        return Err(FormatError::Magic("SDFG"));
    }
    let version = r.u32()?;
    if version != SDFG_VERSION {
        return Err(FormatError::Version(version));
    }
    let n = r.u32()? as usize;
    let mut c = [0.0; 6];
    for slot in &mut c {
        *slot = r.f64()?;
    }
    let kind = match r.u8()? {
        0 => GridKind::TruncatedSdf { cutoff: r.f64()? },
        1 => {
            r.f64()?;
            GridKind::Occupancy
        }
        k => return Err(FormatError::Header(format!("unknown grid kind {k}"))),
    };
    let domain = Aabb::new(Vec3::new(c[0], c[1], c[2]), Vec3::new(c[3], c[4], c[5]))
        .map_err(|e| FormatError::Header(e.to_string()))?;
    let spec = GridSpec::new(n, domain).map_err(|e| FormatError::Header(e.to_string()))?;
    let count = spec.voxel_count();
    let raw = r.take(count.checked_mul(4).ok_or(FormatError::Truncated(r.pos))?)?;
    let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes"))).collect();
    r.finish()?;
    ScalarGrid::new(spec, values, kind).map_err(|e| FormatError::Header(e.to_string()))
}

/// Raw cached distances; `gr` and `rr` are empty for a single-set dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixFile {
    pub n_gen: usize,
    pub n_ref: usize,
    pub power: ChamferPower,
    pub gg: Vec<f64>,
    pub gr: Vec<f64>,
    pub rr: Vec<f64>,
}

pub fn encode_matrix(m: &MatrixFile) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + 8 * (m.gg.len() + m.gr.len() + m.rr.len()));
    out.extend_from_slice(CDMX_MAGIC);
    out.extend_from_slice(&CDMX_VERSION.to_le_bytes());
    out.extend_from_slice(&(m.n_gen as u32).to_le_bytes());
    out.extend_from_slice(&(m.n_ref as u32).to_le_bytes());
    out.push(m.power.as_u8());
    for v in m.gg.iter().chain(&m.gr).chain(&m.rr) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_matrix(bytes: &[u8]) -> Result<MatrixFile, FormatError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CDMX_MAGIC {
        return Err(FormatError::Magic("CDMX"));
    }
    let version = r.u32()?;
    if version != CDMX_VERSION {
        return Err(FormatError::Version(version));
    }
    let n_gen = r.u32()? as usize;
    let n_ref = r.u32()? as usize;
    let power = ChamferPower::try_from(r.u8()?).map_err(|e| FormatError::Header(e.to_string()))?;
    let gg = r.f64s(n_gen * n_gen)?;
    let gr = r.f64s(n_gen * n_ref)?;
    let rr = r.f64s(n_ref * n_ref)?;
    r.finish()?;
    Ok(MatrixFile { n_gen, n_ref, power, gg, gr, rr })
}
