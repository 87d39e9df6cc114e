//! Marching squares on a doubly periodic grid, tracing each contour loop.
//!
//! Crossed grid edges are the nodes; every cell joins its crossed edges in
//! pairs (saddles resolved by the asymptotic decider), so every node has
//! degree two and the contour set is a disjoint union of loops.

/// Edge id: `2 (i ny + j)` for the x-edge from `(i, j)`, `+ 1` for the y-edge.
fn edge(i: usize, j: usize, dir: usize, ny: usize) -> usize {
    2 * (i * ny + j) + dir
}

/// Number of closed contour loops of `values` (row-major `nx × ny`) at level 0.
pub fn count_loops(values: &[f64], nx: usize, ny: usize) -> usize {
    assert_eq!(values.len(), nx * ny);
    let v = |i: usize, j: usize| values[(i % nx) * ny + j % ny];
    let pos = |x: f64| x > 0.0;
    let crossed = |i: usize, j: usize, dir: usize| {
        let (a, b) = if dir == 0 { (v(i, j), v(i + 1, j)) } else { (v(i, j), v(i, j + 1)) };
        pos(a) != pos(b)
    };
    // partner[e] holds the (up to two) edges joined to e through its two cells
    let mut partner = vec![[usize::MAX; 2]; 2 * nx * ny];
    let mut link = |a: usize, b: usize| {
        for (x, y) in [(a, b), (b, a)] {
            let slot = if partner[x][0] == usize::MAX { 0 } else { 1 };
            assert_eq!(partner[x][slot], usize::MAX, "edge with three segments");
            partner[x][slot] = y;
        }
    };
    for i in 0..nx {
        for j in 0..ny {
            let bottom = edge(i, j, 0, ny);
            let top = edge(i, (j + 1) % ny, 0, ny);
            let left = edge(i, j, 1, ny);
            let right = edge((i + 1) % nx, j, 1, ny);
            let cut = [crossed(i, j, 0), crossed(i, j + 1, 0), crossed(i, j, 1), crossed(i + 1, j, 1)];
            let ids = [bottom, top, left, right];
            let on: Vec<usize> = (0..4).filter(|&k| cut[k]).map(|k| ids[k]).collect();
            match on.len() {
                0 => {}
                2 => link(on[0], on[1]),
                4 => {
                    let (a, b, c, d) = (v(i, j), v(i + 1, j), v(i + 1, j + 1), v(i, j + 1));
                    // value of the bilinear interpolant at its saddle point
                    let saddle = (a * c - b * d) / (a + c - b - d);
                    if pos(saddle) == pos(a) {
                        // a and c connect through the middle: cut off b and d
                        link(bottom, right);
                        link(left, top);
                    } else {
                        link(left, bottom);
                        link(right, top);
                    }
                }
                _ => unreachable!("a cell has an even number of sign changes"),
            }
        }
    }
    let mut seen = vec![false; partner.len()];
    let mut loops = 0;
    for start in 0..partner.len() {
        if seen[start] || partner[start][0] == usize::MAX {
            continue;
        }
        loops += 1;
        let (mut prev, mut cur) = (usize::MAX, start);
        loop {
            seen[cur] = true;
            let [p, q] = partner[cur];
            assert!(q != usize::MAX, "open contour");
            let next = if p != prev { p } else { q };
            prev = cur;
            cur = next;
            if cur == start {
                break;
            }
        }
    }
    loops
}
