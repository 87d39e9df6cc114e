use super::census::{for_box, NodalCensus};
use super::signs::Lattice;
use super::window::ConvexWindow;
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Clone, Debug, Serialize)]
pub struct RefinementReport {
    /// Coarse components inside `S(R)` at depth greater than the margin.
    pub coarse_count: usize,
    /// Fine components descending from those, plus new deep ones.
    pub fine_count: usize,
    /// Deep coarse components with no fine descendant.
    pub vanished: usize,
    /// Deep coarse components with several fine descendants.
    pub split: usize,
    /// Fine components descending from several coarse ones, one of them deep.
    pub merged: usize,
    /// Deep fine components with no coarse ancestor.
    pub new: usize,
    pub consistent: bool,
}

/// Compare the census of a sample with the census of the same sample on
/// the nested grid of half the spacing.
///
/// A fine cell descends from the coarse cell containing it; a fine component
/// descends from the coarse components owning its parent cells, or, when no
/// parent is mixed, from those owning mixed cells adjacent to a parent.
pub fn refinement_check(coarse: &NodalCensus, fine: &NodalCensus, s: &ConvexWindow, r: f64, margin: f64) -> Result<RefinementReport> {
    if fine.grid != coarse.grid.refined() || coarse.grid.periodic {
        return Err(Error::InvalidParameter("fine census must be on the refined planar grid of the coarse one".into()));
    }
    coarse.check_window(s, r)?;
    let m = coarse.grid.dim();
    let deep = |c: &NodalCensus, k: usize| {
        c.components[k].contained_in_window && c.extreme_cells_of(k).iter().all(|&cell| s.contains_with_margin(&c.cell_center(cell as usize), r, margin))
    };
    let coarse_deep: Vec<bool> = (0..coarse.len()).map(|k| deep(coarse, k)).collect();
    let cl = Lattice::new(coarse.grid.cell_shape(), false);
    let fl = Lattice::new(fine.grid.cell_shape(), false);
    let mut cf = vec![0; m];
    let mut parent = vec![0; m];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); coarse.len()];
    let (mut fine_count, mut merged, mut new) = (0, 0, 0);
    for k in 0..fine.len() {
        let mut owners = BTreeSet::new();
        let mut parents = BTreeSet::new();
        for &cell in fine.cells_of(k) {
            fl.unravel(cell as usize, &mut cf);
            for d in 0..m {
                parent[d] = cf[d] / 2;
            }
            let p = cl.ravel(&parent);
            parents.insert(p);
            if coarse.labels[p] != u32::MAX {
                owners.insert(coarse.labels[p] as usize);
            }
        }
        if owners.is_empty() {
            for &p in &parents {
                cl.unravel(p, &mut parent);
                let ranges: Vec<(usize, usize)> = (0..m).map(|d| (parent[d].saturating_sub(1), (parent[d] + 1).min(cl.shape[d] - 1))).collect();
                for_box(&ranges, |idx| {
                    let q = cl.ravel(idx);
                    if coarse.labels[q] != u32::MAX {
                        owners.insert(coarse.labels[q] as usize);
                    }
                });
            }
        }
        let deep_owners = owners.iter().filter(|&&c| coarse_deep[c]).count();
        if owners.is_empty() {
            if deep(fine, k) {
                new += 1;
                fine_count += 1;
            }
            continue;
        }
        if deep_owners > 0 {
            fine_count += 1;
            if owners.len() > 1 {
                merged += 1;
            }
        }
        for &c in &owners {
            children[c].push(k);
        }
    }
    let (mut vanished, mut split) = (0, 0);
    for c in (0..coarse.len()).filter(|&c| coarse_deep[c]) {
        match children[c].len() {
            0 => vanished += 1,
            1 => {}
            _ => split += 1,
        }
    }
    let coarse_count = coarse_deep.iter().filter(|&&d| d).count();
    Ok(RefinementReport {
        coarse_count,
        fine_count,
        vanished,
        split,
        merged,
        new,
        consistent: vanished == 0 && split == 0 && merged == 0 && new == 0 && coarse_count == fine_count,
    })
}
