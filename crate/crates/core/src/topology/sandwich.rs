use super::census::{ball_count_field, count_in_window, NodalCensus};
use super::window::ConvexWindow;
use crate::error::{Error, Result};
use crate::spectral::ball_volume;
use serde::Serialize;

/// Both sides of the integral-geometric sandwich around `N_S(R)`.
#[derive(Clone, Debug, Serialize)]
pub struct SandwichReport {
    /// `∫_{S(R−r)} N(u, r) du / vol B(r)`.
    pub lhs: f64,
    /// `N_S(R)`.
    pub mid: usize,
    /// `∫_{S(R+r)} N*(u, r) du / vol B(r)`.
    pub rhs: f64,
    pub lhs_slack: f64,
    pub rhs_slack: f64,
    pub holds: bool,
}

/// Evaluate the sandwich by midpoint sums over the cell centers.
///
/// Each component contributes at most the lattice count of an open ball of
/// radius `r` around one of its cell centers to the left side, and at least
/// the lattice count of the closed ball to the right side; the slacks are
/// the deviations of those counts from `vol B(r)`, times `N_S(R)`.
pub fn sandwich_check(census: &NodalCensus, s: &ConvexWindow, big_r: f64, r: f64) -> Result<SandwichReport> {
    if !(r > 0.0 && r < big_r) {
        return Err(Error::InvalidParameter("need 0 < r < R".into()));
    }
    if !s.contains_unit_ball() {
        return Err(Error::Window("the window must contain the unit ball".into()));
    }
    let (lo, hi) = s.bounds(big_r + r)?;
    let (glo, ghi) = census.grid.bounds();
    if (0..lo.len()).any(|d| lo[d] - r <= glo[d] || hi[d] + r >= ghi[d]) {
        return Err(Error::Window(format!("sampled window must contain S({}) padded by {r}", big_r + r)));
    }
    let m = census.grid.dim();
    let h = census.grid.spacing;
    let vb = ball_volume(m) * r.powi(m as i32);
    let field = ball_count_field(census, r, 1, true)?;
    let star = field.n_star.as_ref().unwrap();
    let w = field.weight() / vb;
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for i in 0..field.len() {
        if field.n[i] == 0 && star[i] == 0 {
            continue;
        }
        let u = field.point(i);
        if field.n[i] > 0 && s.contains(&u, big_r - r) {
            lhs += field.n[i] as f64 * w;
        }
        if star[i] > 0 && s.contains(&u, big_r + r) {
            rhs += star[i] as f64 * w;
        }
    }
    let mid = count_in_window(census, s, big_r)?;
    let (open, closed) = lattice_ball_counts(m, r / h);
    let lhs_slack = mid as f64 * (open as f64 * w - 1.0).max(0.0);
    let rhs_slack = mid as f64 * (1.0 - closed as f64 * w).max(0.0);
    let holds = lhs <= mid as f64 + lhs_slack + 1e-9 && mid as f64 <= rhs + rhs_slack + 1e-9;
    Ok(SandwichReport { lhs, mid, rhs, lhs_slack, rhs_slack, holds })
}

/// Integer points in the open and closed ball of radius `rc` about 0.
fn lattice_ball_counts(m: usize, rc: f64) -> (usize, usize) {
    let k = rc.floor() as i64;
    let r2 = rc * rc;
    let (mut open, mut closed) = (0, 0);
    let side = (2 * k + 1) as usize;
    for mut idx in 0..side.pow(m as u32) {
        let mut d2 = 0.0;
        for _ in 0..m {
            let v = (idx % side) as i64 - k;
            idx /= side;
            d2 += (v * v) as f64;
        }
        open += (d2 < r2) as usize;
        closed += (d2 <= r2 * (1.0 + 1e-12)) as usize;
    }
    (open, closed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::FieldSample;
    use crate::grid::Grid;
    use crate::topology::{sign_grid, zero_components};

    #[test]
    fn unit_circle() {
        let g = Grid::centered(4.2, 0.02, 2).unwrap();
        let f = FieldSample::from_fn(g, |x| (x[0] * x[0] + x[1] * x[1] - 1.0, vec![2.0 * x[0], 2.0 * x[1]]));
        let c = zero_components(&sign_grid(&f, 0.0).unwrap());
        let rep = sandwich_check(&c, &ConvexWindow::unit_ball(2), 3.0, 0.5).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert_eq!(rep.mid, 1);
        // the mixed cells thicken the circle by about one cell, so the
        // dilated annulus is slightly wider than 1
        assert!((rep.rhs - 8.0).abs() < 0.2, "{}", rep.rhs);
        assert!(rep.holds);
        assert!(matches!(sandwich_check(&c, &ConvexWindow::unit_ball(2), 3.5, 0.5), Err(Error::Window(_))));
    }

    #[test]
    fn empty_zero_set() {
        let g = Grid::centered(4.2, 0.05, 2).unwrap();
        let c = zero_components(&sign_grid(&FieldSample::from_fn(g, |_| (1.0, vec![0.0, 0.0])), 0.0).unwrap());
        let rep = sandwich_check(&c, &ConvexWindow::unit_ball(2), 3.0, 0.5).unwrap();
        assert_eq!((rep.lhs, rep.mid, rep.rhs, rep.holds), (0.0, 0, 0.0, true));
    }

    #[test]
    fn lattice_counts() {
        assert_eq!(lattice_ball_counts(2, 1.0), (1, 5));
        assert_eq!(lattice_ball_counts(1, 2.5), (5, 5));
    }
}
