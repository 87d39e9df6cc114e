use super::unionfind::UnionFind;
use crate::ensembles::SphereSample;
use crate::error::{Error, Result};
use serde::Serialize;

/// Sign components of a field on a sphere mesh.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SphereCensus {
    /// `𝔑(S; f)`, components of the complement of the zero set.
    pub domains: usize,
    pub positive: usize,
    pub negative: usize,
    /// On `S²` a disjoint union of `k` closed curves leaves `k + 1` domains.
    pub zero_components: usize,
}

/// Union-find over mesh edges joining vertices of equal sign; vertices with
/// an exact zero belong to no domain.
pub fn sphere_components(sample: &SphereSample) -> Result<SphereCensus> {
    sample.mesh.validate()?;
    let n = sample.mesh.vertices.len();
    if sample.values.len() != n {
        return Err(Error::InvalidParameter("value count does not match the mesh".into()));
    }
    let sign = |i: usize| (sample.values[i] > 0.0) as i8 - (sample.values[i] < 0.0) as i8;
    let mut uf = UnionFind::new(n);
    for (a, b) in sample.mesh.edges() {
        if sign(a) != 0 && sign(a) == sign(b) {
            uf.union(a, b);
        }
    }
    let (labels, domains) = uf.labels(|i| sign(i) != 0);
    let mut seen = vec![0i8; domains];
    for i in 0..n {
        if labels[i] != u32::MAX {
            seen[labels[i] as usize] = sign(i);
        }
    }
    let positive = seen.iter().filter(|&&s| s > 0).count();
    Ok(SphereCensus { domains, positive, negative: domains - positive, zero_components: domains.saturating_sub(1) })
}
