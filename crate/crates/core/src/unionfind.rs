/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }

    /// Dense labels `0..k` assigned in order of first appearance among `items`.
    pub fn labels(&mut self, items: impl IntoIterator<Item = usize>) -> (Vec<(usize, usize)>, usize) {
        let mut root_label = std::collections::HashMap::new();
        let mut out = Vec::new();
        for x in items {
            let r = self.find(x);
            let next = root_label.len();
            let l = *root_label.entry(r).or_insert(next);
            out.push((x, l));
        }
        let n = root_label.len();
        (out, n)
    }
}
