use super::census::for_box;
use super::signs::SignGrid;
use super::unionfind::UnionFind;
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;

/// Discrete count of the components of `∂B(x, r) ∖ Z(f)`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ShellCount {
    pub count: usize,
    pub vertices: usize,
    /// True when the shell holds both signs.
    pub crossed: bool,
}

/// Half-width of the vertex shell standing in for a sphere: wide enough
/// for the shell to be face-connected.
pub fn shell_halfwidth(m: usize, h: f64) -> f64 {
    0.5 * (m as f64).sqrt() * h * 1.05
}

/// Sign components of the vertices within `shell_halfwidth` of `∂B(x, r)`.
/// A radius below the shell width counts as a single component.
pub fn shell_count(sg: &SignGrid, x: &[f64], r: f64) -> Result<ShellCount> {
    let grid = &sg.grid;
    let m = grid.dim();
    let h = grid.spacing;
    let w = shell_halfwidth(m, h);
    if grid.periodic || x.len() != m {
        return Err(Error::Window("shell counts need a planar grid of matching dimension".into()));
    }
    if !grid.contains_ball(x, r + w) {
        return Err(Error::Window(format!("sphere of radius {r} exceeds the sampled window")));
    }
    if r <= w {
        return Ok(ShellCount { count: 1, vertices: 0, crossed: false });
    }
    let (inner2, outer2) = ((r - w) * (r - w), (r + w) * (r + w));
    let lo: Vec<usize> = (0..m).map(|d| ((x[d] - r - w - grid.origin[d]) / h).ceil().max(0.0) as usize).collect();
    let hi: Vec<usize> = (0..m).map(|d| (((x[d] + r + w - grid.origin[d]) / h).floor() as usize).min(grid.shape[d] - 1)).collect();
    let strides = grid.strides();
    let last = m - 1;
    // walk the annulus row by row along the last axis
    let mut index: HashMap<usize, u32> = HashMap::new();
    let mut verts: Vec<(usize, i8)> = Vec::new();
    let ranges: Vec<(usize, usize)> = (0..last).map(|d| (lo[d], hi[d])).collect();
    let mut visit = |prefix: &[usize]| {
        let d2: f64 = (0..last).map(|d| (grid.coord(d, prefix[d]) - x[d]).powi(2)).sum();
        if d2 > outer2 {
            return;
        }
        let base: usize = prefix.iter().zip(&strides).map(|(a, s)| a * s).sum();
        let t_out = (outer2 - d2).sqrt();
        let t_in = (inner2 - d2).max(0.0).sqrt();
        let to_idx = |t: f64| (t - grid.origin[last]) / h;
        let k0 = to_idx(x[last] - t_out).ceil().max(lo[last] as f64) as usize;
        let k1 = (to_idx(x[last] + t_out).floor() as usize).min(hi[last]);
        let (skip0, skip1) = if inner2 > d2 { (to_idx(x[last] - t_in).floor(), to_idx(x[last] + t_in).ceil()) } else { (f64::INFINITY, f64::NEG_INFINITY) };
        for k in k0..=k1 {
            let kf = k as f64;
            if kf > skip0 && kf < skip1 {
                continue;
            }
            let r2 = d2 + (grid.coord(last, k) - x[last]).powi(2);
            if r2 < inner2 || r2 > outer2 {
                continue;
            }
            let gi = base + k * strides[last];
            index.insert(gi, verts.len() as u32);
            verts.push((gi, sg.signs[gi]));
        }
    };
    if last == 0 {
        visit(&[]);
    } else {
        for_box(&ranges, |p| visit(p));
    }
    let mut uf = UnionFind::new(verts.len());
    for (k, &(gi, s)) in verts.iter().enumerate() {
        if s == 0 {
            continue;
        }
        for &st in &strides {
            if let Some(&j) = index.get(&(gi + st)) {
                if verts[j as usize].1 == s {
                    uf.union(k, j as usize);
                }
            }
        }
    }
    let (_, count) = uf.labels(|k| verts[k].1 != 0);
    let crossed = verts.iter().any(|v| v.1 > 0) && verts.iter().any(|v| v.1 < 0);
    Ok(ShellCount { count: count.max(1), vertices: verts.len(), crossed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::FieldSample;
    use crate::grid::Grid;
    use crate::topology::sign_grid;

    fn signs(f: impl Fn(f64, f64) -> f64) -> SignGrid {
        let g = Grid::centered(3.0, 0.02, 2).unwrap();
        sign_grid(&FieldSample::from_fn(g, |x| (f(x[0], x[1]), vec![0.0, 0.0])), 0.0).unwrap()
    }

    #[test]
    fn arcs_between_crossings() {
        // four rays through the origin cut every circle into four arcs
        let s = signs(|x, y| x * y);
        assert_eq!(shell_count(&s, &[0.0, 0.0], 1.0).unwrap().count, 4);
        // the band is connected when nothing crosses it
        let c = shell_count(&signs(|_, _| 1.0), &[0.3, 0.0], 2.0).unwrap();
        assert_eq!((c.count, c.crossed), (1, false));
        // a line crossing twice
        assert_eq!(shell_count(&signs(|x, _| x - 0.5), &[0.0, 0.1], 1.0).unwrap().count, 2);
        // six sign changes from cos 3θ
        let s = signs(|x, y| x * x * x - 3.0 * x * y * y);
        assert_eq!(shell_count(&s, &[0.0, 0.0], 1.5).unwrap().count, 6);
    }
}
