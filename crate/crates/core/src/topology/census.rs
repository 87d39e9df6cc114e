use super::signs::{Lattice, SignGrid};
use super::unionfind::UnionFind;
use super::window::ConvexWindow;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::spectral::ball_volume;
use serde::Serialize;

/// One discrete zero-set component: a maximal face-connected cluster of
/// mixed cells. Boxes and distances use cell centers.
#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub cells: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// `cells × h^m`.
    pub volume: f64,
    /// Diagonal of the bounding box.
    pub diameter: f64,
    /// False when the cluster reaches the outermost layer of cells.
    pub contained_in_window: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodalCensus {
    pub grid: Grid,
    pub components: Vec<Component>,
    /// Component label per cell, `u32::MAX` off the zero set.
    #[serde(skip)]
    pub labels: Vec<u32>,
    #[serde(skip)]
    offsets: Vec<usize>,
    #[serde(skip)]
    members: Vec<u32>,
    #[serde(skip)]
    ext_offsets: Vec<usize>,
    #[serde(skip)]
    extremes: Vec<u32>,
}

pub fn zero_components(sg: &SignGrid) -> NodalCensus {
    let grid = &sg.grid;
    let m = grid.dim();
    let cells = Lattice::new(grid.cell_shape(), grid.periodic);
    let mut uf = UnionFind::new(cells.len());
    let mut c = vec![0; m];
    for i in 0..cells.len() {
        if !sg.mixed[i] {
            continue;
        }
        cells.unravel(i, &mut c);
        cells.forward_neighbors(i, &c, |j| {
            if sg.mixed[j] {
                uf.union(i, j);
            }
        });
    }
    let (labels, k) = uf.labels(|i| sg.mixed[i]);

    let mut offsets = vec![0usize; k + 1];
    for &l in labels.iter().filter(|&&l| l != u32::MAX) {
        offsets[l as usize + 1] += 1;
    }
    for i in 0..k {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut members = vec![0u32; offsets[k]];
    for (i, &l) in labels.iter().enumerate() {
        if l != u32::MAX {
            members[fill[l as usize]] = i as u32;
            fill[l as usize] += 1;
        }
    }

    let h = grid.spacing;
    let mut components = Vec::with_capacity(k);
    let mut ext_offsets = vec![0usize];
    let mut extremes = Vec::new();
    for comp in 0..k {
        let list = &members[offsets[comp]..offsets[comp + 1]];
        let mut lo = vec![usize::MAX; m];
        let mut hi = vec![0usize; m];
        let mut boundary = false;
        for &cell in list {
            cells.unravel(cell as usize, &mut c);
            boundary |= cells.on_boundary(&c);
            for d in 0..m {
                lo[d] = lo[d].min(c[d]);
                hi[d] = hi[d].max(c[d]);
            }
        }
        let lo_x = grid.cell_center(&lo);
        let hi_x = grid.cell_center(&hi);
        let diameter = lo_x.iter().zip(&hi_x).map(|(a, b)| (b - a) * (b - a)).sum::<f64>().sqrt();
        components.push(Component {
            cells: list.len(),
            lo: lo_x,
            hi: hi_x,
            volume: list.len() as f64 * h.powi(m as i32),
            diameter,
            contained_in_window: !boundary,
        });
        extreme_cells(&cells, list, &mut extremes);
        ext_offsets.push(extremes.len());
    }
    NodalCensus { grid: grid.clone(), components, labels, offsets, members, ext_offsets, extremes }
}

/// Cells whose centers span the convex hull of the component.
fn extreme_cells(cells: &Lattice, list: &[u32], out: &mut Vec<u32>) {
    let m = cells.shape.len();
    let mut c = vec![0; m];
    match m {
        1 => {
            let (a, b) = (list.iter().min().unwrap(), list.iter().max().unwrap());
            out.push(*a);
            if b != a {
                out.push(*b);
            }
        }
        2 => {
            let mut pts: Vec<(i64, i64, u32)> = list
                .iter()
                .map(|&i| {
                    cells.unravel(i as usize, &mut c);
                    (c[0] as i64, c[1] as i64, i)
                })
                .collect();
            pts.sort_unstable();
            if pts.len() <= 2 {
                out.extend(pts.iter().map(|p| p.2));
                return;
            }
            let cross = |o: &(i64, i64, u32), a: &(i64, i64, u32), b: &(i64, i64, u32)| (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0);
            let mut hull: Vec<(i64, i64, u32)> = Vec::new();
            for pass in 0..2 {
                let start = hull.len();
                let iter: Box<dyn Iterator<Item = &(i64, i64, u32)>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
                for p in iter {
                    while hull.len() >= start + 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0 {
                        hull.pop();
                    }
                    hull.push(*p);
                }
                hull.pop();
            }
            out.extend(hull.iter().map(|p| p.2));
        }
        _ => out.extend_from_slice(list),
    }
}

impl NodalCensus {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Cell indices of component `k`.
    pub fn cells_of(&self, k: usize) -> &[u32] {
        &self.members[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Cells spanning the convex hull of component `k`.
    pub fn extreme_cells_of(&self, k: usize) -> &[u32] {
        &self.extremes[self.ext_offsets[k]..self.ext_offsets[k + 1]]
    }

    pub fn cell_center(&self, cell: usize) -> Vec<f64> {
        let c = Grid { shape: self.grid.cell_shape(), ..self.grid.clone() }.unravel(cell);
        self.grid.cell_center(&c)
    }

    fn max_dist2(&self, k: usize, x: &[f64]) -> f64 {
        self.extreme_cells_of(k).iter().map(|&c| dist2(&self.cell_center(c as usize), x)).fold(0.0, f64::max)
    }

    fn min_dist2(&self, k: usize, x: &[f64]) -> f64 {
        self.cells_of(k).iter().map(|&c| dist2(&self.cell_center(c as usize), x)).fold(f64::INFINITY, f64::min)
    }

    fn check_ball(&self, x: &[f64], r: f64) -> Result<()> {
        if self.grid.periodic {
            return Err(Error::Window("ball counts need a planar grid".into()));
        }
        if x.len() != self.grid.dim() || !(r >= 0.0) {
            return Err(Error::InvalidParameter("ball center dimension or radius invalid".into()));
        }
        if !self.grid.contains_ball(x, r) {
            return Err(Error::Window(format!("closed ball of radius {r} exceeds the sampled window")));
        }
        Ok(())
    }

    /// Components contained in `S(R)` at distance greater than `margin` from
    /// its boundary, and away from the window edge.
    pub fn count_in_window_with_margin(&self, s: &ConvexWindow, r: f64, margin: f64) -> Result<usize> {
        self.check_window(s, r)?;
        Ok((0..self.len())
            .filter(|&k| {
                self.components[k].contained_in_window
                    && self.extreme_cells_of(k).iter().all(|&c| s.contains_with_margin(&self.cell_center(c as usize), r, margin))
            })
            .count())
    }

    pub(crate) fn check_window(&self, s: &ConvexWindow, r: f64) -> Result<()> {
        s.validate()?;
        if self.grid.periodic {
            return Err(Error::Window("window counts need a planar grid".into()));
        }
        if s.dim() != self.grid.dim() || !(r > 0.0) {
            return Err(Error::InvalidParameter("window dimension or scale invalid".into()));
        }
        let (lo, hi) = s.bounds(r)?;
        let (glo, ghi) = self.grid.bounds();
        if (0..lo.len()).any(|d| lo[d] <= glo[d] || hi[d] >= ghi[d]) {
            return Err(Error::Window(format!("S({r}) exceeds the sampled window")));
        }
        Ok(())
    }
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `(N(x, r), N*(x, r))`: components inside the open ball and components
/// meeting the closed ball.
pub fn count_in_ball(census: &NodalCensus, x: &[f64], r: f64) -> Result<(usize, usize)> {
    census.check_ball(x, r)?;
    let (mut n, mut n_star) = (0, 0);
    let r2 = r * r;
    for (k, comp) in census.components.iter().enumerate() {
        // distance from x to the bounding box prunes most components
        let gap2: f64 = (0..x.len()).map(|d| (comp.lo[d] - x[d]).max(x[d] - comp.hi[d]).max(0.0).powi(2)).sum();
        if gap2 > r2 * (1.0 + 1e-12) {
            continue;
        }
        let inside = comp.contained_in_window && census.max_dist2(k, x) < r2;
        if inside {
            n += 1;
            n_star += 1;
        } else if census.min_dist2(k, x) <= r2 * (1.0 + 1e-12) {
            n_star += 1;
        }
    }
    Ok((n, n_star))
}

/// `N_S(R)`: components contained in `S(R)`.
pub fn count_in_window(census: &NodalCensus, s: &ConvexWindow, r: f64) -> Result<usize> {
    census.count_in_window_with_margin(s, r, 0.0)
}

/// `N(u, r)` and optionally `N*(u, r)` at the cell centers `u = c(stride·k)`.
#[derive(Clone, Debug)]
pub struct BallCountField {
    pub stride: usize,
    pub shape: Vec<usize>,
    pub n: Vec<u32>,
    pub n_star: Option<Vec<u32>>,
    origin: Vec<f64>,
    step: f64,
}

impl BallCountField {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        let mut c = vec![0; self.shape.len()];
        Lattice::new(self.shape.clone(), false).unravel(i, &mut c);
        c.iter().enumerate().map(|(d, &k)| self.origin[d] + self.step * k as f64).collect()
    }

    /// Volume weight of one lattice point.
    pub fn weight(&self) -> f64 {
        self.step.powi(self.shape.len() as i32)
    }
}

/// Ball counts at every `stride`-th cell center. The counts are exact for the
/// discrete components; centers whose ball leaves the window undercount and
/// must be masked by the caller.
pub fn ball_count_field(census: &NodalCensus, r: f64, stride: usize, with_star: bool) -> Result<BallCountField> {
    if census.grid.periodic {
        return Err(Error::Window("ball counts need a planar grid".into()));
    }
    let stride = stride.max(1);
    let grid = &census.grid;
    let m = grid.dim();
    let h = grid.spacing;
    let cshape = grid.cell_shape();
    let shape: Vec<usize> = cshape.iter().map(|&n| n.div_ceil(stride)).collect();
    let sub = Lattice::new(shape.clone(), false);
    let origin: Vec<f64> = grid.origin.iter().map(|o| o + 0.5 * h).collect();
    let step = h * stride as f64;
    let mut n = vec![0u32; sub.len()];
    let mut n_star = with_star.then(|| vec![0u32; sub.len()]);
    let r2 = r * r;
    let coord = |d: usize, k: usize| origin[d] + step * k as f64;
    let sub_range = |d: usize, a: f64, b: f64| -> (usize, usize) {
        let lo = ((a - origin[d]) / step).ceil().max(0.0) as usize;
        let hi = (((b - origin[d]) / step).floor()).min(shape[d] as f64 - 1.0);
        if hi < 0.0 {
            (1, 0)
        } else {
            (lo, hi as usize)
        }
    };
    let mut u = vec![0.0; m];
    for (k, comp) in census.components.iter().enumerate() {
        if comp.contained_in_window && comp.hi.iter().zip(&comp.lo).all(|(a, b)| a - b < 2.0 * r) {
            let ranges: Vec<(usize, usize)> = (0..m).map(|d| sub_range(d, comp.hi[d] - r, comp.lo[d] + r)).collect();
            let ext: Vec<Vec<f64>> = census.extreme_cells_of(k).iter().map(|&c| census.cell_center(c as usize)).collect();
            for_box(&ranges, |idx| {
                for d in 0..m {
                    u[d] = coord(d, idx[d]);
                }
                if ext.iter().all(|e| dist2(e, &u) < r2) {
                    n[sub.ravel(idx)] += 1;
                }
            });
        }
        if let Some(ns) = n_star.as_mut() {
            star_component(census, k, r, stride, &shape, ns);
        }
    }
    Ok(BallCountField { stride, shape, n, n_star, origin, step })
}

/// Adds 1 to `N*` at every sub-lattice center within distance `r` of a cell
/// of component `k`, via an exact squared distance transform on a local box.
fn star_component(census: &NodalCensus, k: usize, r: f64, stride: usize, shape: &[usize], ns: &mut [u32]) {
    let grid = &census.grid;
    let m = grid.dim();
    let cshape = grid.cell_shape();
    let cl = Lattice::new(cshape.clone(), false);
    let rc = r / grid.spacing;
    let pad = rc.floor() as usize;
    let comp = &census.components[k];
    // local box in cell indices
    let lo: Vec<usize> = (0..m).map(|d| (((comp.lo[d] - grid.origin[d]) / grid.spacing - 0.5).round() as usize).saturating_sub(pad)).collect();
    let hi: Vec<usize> = (0..m)
        .map(|d| ((((comp.hi[d] - grid.origin[d]) / grid.spacing - 0.5).round() as usize) + pad).min(cshape[d] - 1))
        .collect();
    let bshape: Vec<usize> = (0..m).map(|d| hi[d] - lo[d] + 1).collect();
    let bl = Lattice::new(bshape.clone(), false);
    let inf = f64::INFINITY;
    let mut d2 = vec![inf; bl.len()];
    let mut c = vec![0; m];
    for &cell in census.cells_of(k) {
        cl.unravel(cell as usize, &mut c);
        let local: Vec<usize> = (0..m).map(|d| c[d] - lo[d]).collect();
        d2[bl.ravel(&local)] = 0.0;
    }
    squared_edt(&mut d2, &bl);
    let sub = Lattice::new(shape.to_vec(), false);
    let lim = rc * rc * (1.0 + 1e-12);
    let ranges: Vec<(usize, usize)> = (0..m).map(|d| (lo[d].div_ceil(stride), hi[d] / stride)).collect();
    for_box(&ranges, |idx| {
        let local: Vec<usize> = (0..m).map(|d| idx[d] * stride - lo[d]).collect();
        if d2[bl.ravel(&local)] <= lim {
            ns[sub.ravel(idx)] += 1;
        }
    });
}

impl Lattice {
    pub(crate) fn ravel(&self, c: &[usize]) -> usize {
        c.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }
}

/// Visit every multi-index in the inclusive box `ranges`.
pub(crate) fn for_box(ranges: &[(usize, usize)], mut f: impl FnMut(&[usize])) {
    if ranges.iter().any(|(a, b)| a > b) {
        return;
    }
    let m = ranges.len();
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    loop {
        f(&idx);
        let mut d = m;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if idx[d] < ranges[d].1 {
                idx[d] += 1;
                for e in d + 1..m {
                    idx[e] = ranges[e].0;
                }
                break;
            }
        }
    }
}

/// Separable exact squared Euclidean distance transform (lower envelope of
/// parabolas along each axis), in lattice units.
pub(crate) fn squared_edt(d2: &mut [f64], lat: &Lattice) {
    let m = lat.shape.len();
    let maxn = *lat.shape.iter().max().unwrap();
    let (mut f, mut out) = (vec![0.0; maxn], vec![0.0; maxn]);
    let (mut v, mut z) = (vec![0usize; maxn], vec![0.0; maxn + 1]);
    for axis in 0..m {
        let n = lat.shape[axis];
        let s = lat.strides[axis];
        let lines = lat.len() / n;
        let mut c = vec![0; m];
        for line in 0..lines {
            // enumerate line starts: multi-indices with c[axis] = 0
            let mut rest = line;
            for d in (0..m).rev() {
                if d == axis {
                    c[d] = 0;
                    continue;
                }
                c[d] = rest % lat.shape[d];
                rest /= lat.shape[d];
            }
            let start = lat.ravel(&c);
            for i in 0..n {
                f[i] = d2[start + i * s];
            }
            parabola_envelope(&f[..n], &mut out[..n], &mut v, &mut z);
            for i in 0..n {
                d2[start + i * s] = out[i];
            }
        }
    }
}

fn parabola_envelope(f: &[f64], out: &mut [f64], v: &mut [usize], z: &mut [f64]) {
    let n = f.len();
    let mut k: isize = -1;
    for q in 0..n {
        if f[q].is_infinite() {
            continue;
        }
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                z[1] = f64::INFINITY;
                break;
            }
            let p = v[k as usize];
            let s = ((f[q] + (q * q) as f64) - (f[p] + (p * p) as f64)) / (2.0 * (q as f64 - p as f64));
            if s <= z[k as usize] {
                k -= 1;
                continue;
            }
            k += 1;
            v[k as usize] = q;
            z[k as usize] = s;
            z[k as usize + 1] = f64::INFINITY;
            break;
        }
    }
    if k < 0 {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut j = 0usize;
    for q in 0..n {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let p = v[j];
        out[q] = (q as f64 - p as f64).powi(2) + f[p];
    }
}

/// One sign-constant vertex cluster.
#[derive(Clone, Debug, Serialize)]
pub struct Domain {
    pub sign: i8,
    pub vertices: usize,
    /// `vertices × h^m`.
    pub volume: f64,
    /// Does not reach the outermost vertex layer (always true on a torus).
    pub compact: bool,
    /// Compact with volume below `vol B(1)` in the unit length.
    pub regular: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct NodalDomains {
    pub positive: usize,
    pub negative: usize,
    pub compact: usize,
    pub regular: usize,
    pub domains: Vec<Domain>,
    #[serde(skip)]
    pub labels: Vec<u32>,
}

/// Face-connected sign components of the vertices; exact zeros belong to no
/// domain. Volumes are compared with `vol B(unit)`.
pub fn nodal_domains(sg: &SignGrid, unit: f64) -> NodalDomains {
    let grid = &sg.grid;
    let m = grid.dim();
    let lat = Lattice::new(grid.shape.clone(), grid.periodic);
    let mut uf = UnionFind::new(lat.len());
    let mut c = vec![0; m];
    for i in 0..lat.len() {
        let s = sg.signs[i];
        if s == 0 {
            continue;
        }
        lat.unravel(i, &mut c);
        lat.forward_neighbors(i, &c, |j| {
            if sg.signs[j] == s {
                uf.union(i, j);
            }
        });
    }
    let (labels, k) = uf.labels(|i| sg.signs[i] != 0);
    let mut domains: Vec<Domain> = vec![Domain { sign: 0, vertices: 0, volume: 0.0, compact: true, regular: false }; k];
    for i in 0..lat.len() {
        let l = labels[i];
        if l == u32::MAX {
            continue;
        }
        let d = &mut domains[l as usize];
        d.sign = sg.signs[i];
        d.vertices += 1;
        lat.unravel(i, &mut c);
        if lat.on_boundary(&c) {
            d.compact = false;
        }
    }
    let hm = grid.spacing.powi(m as i32);
    let threshold = ball_volume(m) * unit.powi(m as i32);
    for d in &mut domains {
        d.volume = d.vertices as f64 * hm;
        d.regular = d.compact && d.volume < threshold;
    }
    NodalDomains {
        positive: domains.iter().filter(|d| d.sign > 0).count(),
        negative: domains.iter().filter(|d| d.sign < 0).count(),
        compact: domains.iter().filter(|d| d.compact).count(),
        regular: domains.iter().filter(|d| d.regular).count(),
        domains,
        labels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::FieldSample;
    use crate::topology::sign_grid;

    fn census_of(f: impl Fn(f64, f64) -> f64, half: f64, h: f64) -> (SignGrid, NodalCensus) {
        let g = Grid::centered(half, h, 2).unwrap();
        let s = sign_grid(&FieldSample::from_fn(g, |x| (f(x[0], x[1]), vec![0.0, 0.0])), 0.0).unwrap();
        let c = zero_components(&s);
        (s, c)
    }

    #[test]
    fn circles() {
        let (_, one) = census_of(|x, y| x * x + y * y - 1.0, 2.0, 0.01);
        assert_eq!(one.len(), 1);
        assert_eq!(count_in_ball(&one, &[0.0, 0.0], 1.5).unwrap(), (1, 1));
        assert_eq!(count_in_ball(&one, &[0.0, 0.0], 1.0).unwrap(), (0, 1));
        assert!(matches!(count_in_ball(&one, &[0.0, 0.0], 2.5), Err(Error::Window(_))));
        let (_, two) = census_of(|x, y| (x * x + y * y - 1.0) * (x * x + y * y - 4.0), 3.0, 0.01);
        assert_eq!(two.len(), 2);
        assert_eq!(count_in_ball(&two, &[0.0, 0.0], 1.5).unwrap(), (1, 1));
        assert_eq!(count_in_window(&two, &ConvexWindow::cube(1.0, 2), 2.5).unwrap(), 2);
        assert_eq!(count_in_window(&two, &ConvexWindow::cube(1.0, 2), 1.5).unwrap(), 1);
    }

    #[test]
    fn hull_has_few_points() {
        let (_, one) = census_of(|x, y| x * x + y * y - 1.0, 2.0, 0.01);
        assert!(one.extreme_cells_of(0).len() < one.cells_of(0).len() / 4);
    }

    #[test]
    fn ball_field_matches_queries() {
        let (_, c) = census_of(|x, y| (3.0 * x).sin() * (2.0 * y).cos() - 0.3, 6.0, 0.05);
        let field = ball_count_field(&c, 1.3, 7, true).unwrap();
        for i in (0..field.len()).step_by(3) {
            let u = field.point(i);
            if !c.grid.contains_ball(&u, 1.3) {
                continue;
            }
            let (n, ns) = count_in_ball(&c, &u, 1.3).unwrap();
            assert_eq!(field.n[i] as usize, n, "N at {u:?}");
            assert_eq!(field.n_star.as_ref().unwrap()[i] as usize, ns, "N* at {u:?}");
        }
    }

    #[test]
    fn edt_matches_brute_force() {
        let lat = Lattice::new(vec![9, 7], false);
        let src = [(1, 1), (7, 5), (4, 0)];
        let mut d2 = vec![f64::INFINITY; lat.len()];
        for &(a, b) in &src {
            d2[a * 7 + b] = 0.0;
        }
        squared_edt(&mut d2, &lat);
        for a in 0..9 {
            for b in 0..7 {
                let want = src.iter().map(|&(p, q)| (a as f64 - p as f64).powi(2) + (b as f64 - q as f64).powi(2)).fold(f64::INFINITY, f64::min);
                assert_eq!(d2[a * 7 + b], want);
            }
        }
    }

    #[test]
    fn domains_of_circle() {
        let (s, _) = census_of(|x, y| x * x + y * y - 0.25, 2.0, 0.02);
        let d = nodal_domains(&s, 1.0);
        assert_eq!(d.domains.len(), 2);
        assert_eq!((d.positive, d.negative, d.compact, d.regular), (1, 1, 1, 1));
        let disk = d.domains.iter().find(|d| d.sign < 0).unwrap();
        assert!((disk.volume - std::f64::consts::PI / 4.0).abs() < 0.02);
    }
}
