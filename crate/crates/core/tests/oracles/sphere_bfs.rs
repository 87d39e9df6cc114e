//! Sign domains of vertex values on a triangulated surface by breadth-first
//! search over triangle sides; zero-set components are domains minus one.

use std::collections::{HashMap, VecDeque};

pub fn domains(values: &[f64], triangles: &[[usize; 3]]) -> usize {
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for t in triangles {
        for (a, b) in [(t[0], t[1]), (t[1], t[2]), (t[2], t[0])] {
            adj.entry(a).or_default().push(b);
            adj.entry(b).or_default().push(a);
        }
    }
    let sign = |i: usize| values[i].partial_cmp(&0.0).unwrap();
    let mut seen = vec![false; values.len()];
    let mut count = 0;
    for s in 0..values.len() {
        if seen[s] || values[s] == 0.0 {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &w in adj.get(&u).into_iter().flatten() {
                if !seen[w] && sign(w) == sign(u) {
                    seen[w] = true;
                    q.push_back(w);
                }
            }
        }
    }
    count
}
