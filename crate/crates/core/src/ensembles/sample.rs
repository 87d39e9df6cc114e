use super::EnsembleSpec;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::mesh::SphereMesh;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

/// Origin of a sample: `g(u) = f_L(base + u/scale)` for the ensemble
/// `spec`, drawn from stream `(seed, sample_index)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleMeta {
    pub spec: EnsembleSpec,
    pub scale: f64,
    pub base: Vec<f64>,
    pub seed: u64,
    pub sample_index: u64,
}

/// Field values (and gradients, `m` per point, point-major) on a grid.
#[derive(Clone, Debug)]
pub struct FieldSample {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub gradients: Option<Vec<f64>>,
    pub meta: Option<SampleMeta>,
}

/// Field values and tangent gradients at the vertices of a sphere mesh.
#[derive(Clone, Debug)]
pub struct SphereSample {
    pub mesh: SphereMesh,
    pub values: Vec<f64>,
    /// Ambient 3-vectors tangent to the sphere.
    pub gradients: Vec<[f64; 3]>,
    pub meta: Option<SampleMeta>,
}

impl FieldSample {
    /// A sample built from explicit values, e.g. a deterministic test field.
    pub fn from_fn<F: Fn(&[f64]) -> (f64, Vec<f64>)>(grid: Grid, f: F) -> Self {
        let m = grid.dim();
        let mut values = Vec::with_capacity(grid.len());
        let mut grads = Vec::with_capacity(grid.len() * m);
        for i in 0..grid.len() {
            let (v, g) = f(&grid.point(i));
            values.push(v);
            grads.extend_from_slice(&g[..m]);
        }
        FieldSample { grid, values, gradients: Some(grads), meta: None }
    }

    pub fn gradient(&self, i: usize) -> Option<&[f64]> {
        let m = self.grid.dim();
        self.gradients.as_ref().map(|g| &g[i * m..(i + 1) * m])
    }
}

const MAGIC: &[u8; 8] = b"NODALFLD";
const VERSION: u32 = 1;

/// JSON sidecar of the binary format.
#[derive(Serialize, Deserialize)]
struct Sidecar {
    grid: Grid,
    has_gradients: bool,
    meta: Option<SampleMeta>,
}

/// Header: 8-byte magic, `u32` version, `u16` dimension, `u16` flags
/// (bit 0: gradients present); then little-endian `f64` values, row-major,
/// followed by the gradients.
pub fn write_field_sample(sample: &FieldSample, bin: &Path, sidecar: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(16 + 8 * sample.values.len() * (1 + sample.grid.dim()));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(sample.grid.dim() as u16).to_le_bytes());
    buf.extend_from_slice(&(sample.gradients.is_some() as u16).to_le_bytes());
    for v in &sample.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(g) = &sample.gradients {
        for v in g {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::File::create(bin)?.write_all(&buf)?;
    let side = Sidecar { grid: sample.grid.clone(), has_gradients: sample.gradients.is_some(), meta: sample.meta.clone() };
    std::fs::write(sidecar, serde_json::to_vec_pretty(&side).map_err(|e| Error::Format(e.to_string()))?)?;
    Ok(())
}

pub fn read_field_sample(bin: &Path, sidecar: &Path) -> Result<FieldSample> {
    let side: Sidecar =
        serde_json::from_slice(&std::fs::read(sidecar)?).map_err(|e| Error::Format(format!("sidecar: {e}")))?;
    let mut raw = Vec::new();
    std::fs::File::open(bin)?.read_to_end(&mut raw)?;
    if raw.len() < 16 || &raw[..8] != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(raw[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let dim = u16::from_le_bytes(raw[12..14].try_into().unwrap()) as usize;
    let flags = u16::from_le_bytes(raw[14..16].try_into().unwrap());
    if dim != side.grid.dim() || (flags & 1 == 1) != side.has_gradients {
        return Err(Error::Format("header does not match sidecar".into()));
    }
    let n = side.grid.len();
    let expect = 16 + 8 * n * if side.has_gradients { 1 + dim } else { 1 };
    if raw.len() != expect {
        return Err(Error::Format(format!("expected {expect} bytes, found {}", raw.len())));
    }
    let doubles: Vec<f64> = raw[16..].chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    let values = doubles[..n].to_vec();
    let gradients = side.has_gradients.then(|| doubles[n..].to_vec());
    Ok(FieldSample { grid: side.grid, values, gradients, meta: side.meta })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = Grid::new(vec![0.0, -1.0], 0.25, vec![4, 3]).unwrap();
        let s = FieldSample::from_fn(g, |x| (x[0] - x[1], vec![1.0, -1.0]));
        let dir = tempfile::tempdir().unwrap();
        let (b, j) = (dir.path().join("f.bin"), dir.path().join("f.json"));
        write_field_sample(&s, &b, &j).unwrap();
        assert_eq!(std::fs::metadata(&b).unwrap().len(), 16 + 8 * 12 * 3);
        let r = read_field_sample(&b, &j).unwrap();
        assert_eq!(r.values, s.values);
        assert_eq!(r.gradients, s.gradients);
        assert_eq!(r.grid, s.grid);
    }
}
