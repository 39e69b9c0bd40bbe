use std::collections::HashMap;

use super::TriMesh;

/// Directed half-edge lookup: `(a, b)` maps to the triangle traversing `a -> b`.
#[derive(Debug, Clone, Default)]
pub struct EdgeMap {
    map: HashMap<(usize, usize), usize>,
}

impl EdgeMap {
    pub fn build(mesh: &TriMesh) -> Self {
        let mut map = HashMap::with_capacity(mesh.triangles.len() * 3);
        for (t, tri) in mesh.triangles.iter().enumerate() {
            for c in 0..3 {
                map.insert((tri[c], tri[(c + 1) % 3]), t);
            }
        }
        EdgeMap { map }
    }

    pub fn face(&self, a: usize, b: usize) -> Option<usize> {
        self.map.get(&(a, b)).copied()
    }

    pub fn contains_edge(&self, a: usize, b: usize) -> bool {
        self.map.contains_key(&(a, b)) || self.map.contains_key(&(b, a))
    }
}

/// Labels every triangle with the index of its edge-connected component.
/// Components are numbered in order of their first triangle.
pub fn components(mesh: &TriMesh) -> Vec<usize> {
    let n = mesh.triangles.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut first_owner: HashMap<(usize, usize), usize> = HashMap::with_capacity(n * 3 / 2);
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for c in 0..3 {
            let (a, b) = (tri[c], tri[(c + 1) % 3]);
            let key = (a.min(b), a.max(b));
            match first_owner.get(&key) {
                Some(&other) => {
                    let (ra, rb) = (find(&mut parent, t), find(&mut parent, other));
                    if ra != rb {
                        parent[ra.max(rb)] = ra.min(rb);
                    }
                }
                None => {
                    first_owner.insert(key, t);
                }
            }
        }
    }
    let mut label_of_root = HashMap::new();
    let mut labels = Vec::with_capacity(n);
    for t in 0..n {
        let r = find(&mut parent, t);
        let next = label_of_root.len();
        labels.push(*label_of_root.entry(r).or_insert(next));
    }
    labels
}
