/// Disjoint sets with path halving and union by size.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n as u32).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut a: usize) -> usize {
        while self.parent[a] as usize != a {
            let g = self.parent[self.parent[a] as usize];
            self.parent[a] = g;
            a = g as usize;
        }
        a
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a as u32;
        self.size[a] += self.size[b];
    }

    /// Dense labels `0..k` for the elements selected by `member`, in order of
    /// first appearance; unselected elements get `u32::MAX`.
    pub fn labels(&mut self, member: impl Fn(usize) -> bool) -> (Vec<u32>, usize) {
        let n = self.parent.len();
        let mut root_label = vec![u32::MAX; n];
        let mut out = vec![u32::MAX; n];
        let mut k = 0u32;
        for i in 0..n {
            if !member(i) {
                continue;
            }
            let r = self.find(i);
            if root_label[r] == u32::MAX {
                root_label[r] = k;
                k += 1;
            }
            out[i] = root_label[r];
        }
        (out, k as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merges_transitively() {
        let mut uf = UnionFind::new(6);
        uf.union(0, 1);
        uf.union(4, 5);
        uf.union(1, 4);
        let (labels, k) = uf.labels(|i| i != 3);
        assert_eq!(k, 2);
        assert_eq!(labels[0], labels[5]);
        assert_ne!(labels[0], labels[2]);
        assert_eq!(labels[3], u32::MAX);
    }
}
