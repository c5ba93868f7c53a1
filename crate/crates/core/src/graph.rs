//! Simple undirected graphs with deterministic labeling, DOT/JSON export, and
//! exact automorphism groups by backtracking.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest graph accepted by [`Graph::automorphisms`].
pub const MAX_AUTOMORPHISM_VERTICES: usize = 10_000;

/// An undirected simple graph on vertices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<BTreeSet<usize>>,
}

#[derive(Serialize)]
struct AdjacencyJson<'a> {
    vertices: usize,
    edges: usize,
    adjacency: Vec<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    labels: Option<&'a [String]>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Graph::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    /// Adds the edge `{a, b}`. Loops are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().copied()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    /// Edges `(a, b)` with `a < b`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (a, nb) in self.adj.iter().enumerate() {
            for &b in nb.range(a + 1..) {
                out.push((a, b));
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.adj.is_empty() {
            return true;
        }
        self.bfs_distances(0).iter().all(|d| *d != usize::MAX)
    }

    /// Breadth-first distances from `src`; unreachable vertices get `usize::MAX`.
    pub fn bfs_distances(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.adj.len()];
        let mut queue = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// True iff every vertex has degree 2 and the graph is one cycle.
    pub fn is_cycle(&self) -> bool {
        self.adj.len() >= 3 && self.adj.iter().all(|nb| nb.len() == 2) && self.is_connected()
    }

    pub fn is_complete(&self) -> bool {
        let n = self.adj.len();
        self.adj.iter().all(|nb| nb.len() + 1 == n)
    }

    /// True iff `perm` maps edges onto edges.
    pub fn is_automorphism(&self, perm: &[usize]) -> bool {
        if perm.len() != self.adj.len() {
            return false;
        }
        let mut seen = vec![false; perm.len()];
        for &p in perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return false;
            }
        }
        self.edges().iter().all(|&(a, b)| self.has_edge(perm[a], perm[b]))
    }

    /// Graphviz rendering with vertices named by index.
    pub fn to_dot(&self, name: &str, labels: Option<&[String]>) -> String {
        let mut out = format!("graph {name} {{\n");
        for v in 0..self.adj.len() {
            match labels {
                Some(l) => out.push_str(&format!("  {v} [label=\"{}\"];\n", l[v].replace('"', "'"))),
                None => out.push_str(&format!("  {v};\n")),
            }
        }
        for (a, b) in self.edges() {
            out.push_str(&format!("  {a} -- {b};\n"));
        }
        out.push_str("}\n");
        out
    }

    /// JSON adjacency lists: `{"vertices", "edges", "adjacency": [[...]], "labels"?}`.
    pub fn to_json(&self, labels: Option<&[String]>) -> serde_json::Value {
        let doc = AdjacencyJson {
            vertices: self.vertex_count(),
            edges: self.edge_count(),
            adjacency: self.adj.iter().map(|nb| nb.iter().copied().collect()).collect(),
            labels,
        };
        serde_json::to_value(doc).expect("adjacency serializes")
    }

    /// Full automorphism group via a stabilizer chain.
    ///
    /// At each level the orbit of the next base point under the pointwise
    /// stabilizer of the previous ones is found by exhaustive extension search;
    /// the order is the product of the orbit sizes and the returned generators
    /// are one coset representative per non-trivial orbit element.
    pub fn automorphisms(&self) -> Result<AutomorphismGroup> {
        let n = self.adj.len();
        if n > MAX_AUTOMORPHISM_VERTICES {
            return Err(Error::Resource(format!(
                "graph has {n} vertices, limit is {MAX_AUTOMORPHISM_VERTICES}"
            )));
        }
        if !self.is_connected() {
            return Err(Error::Argument("automorphism search needs a connected graph".into()));
        }
        let mut search = Search::new(self, self);
        let mut base: Vec<usize> = Vec::new();
        let mut orbit_sizes = Vec::new();
        let mut generators = Vec::new();
        for v in 0..n {
            let mut orbit = vec![v];
            for w in 0..n {
                if w == v {
                    continue;
                }
                let mut fixed: Vec<(usize, usize)> = base.iter().map(|&b| (b, b)).collect();
                fixed.push((v, w));
                if let Some(perm) = search.extend(&fixed) {
                    orbit.push(w);
                    generators.push(perm);
                }
            }
            if orbit.len() > 1 {
                base.push(v);
                orbit_sizes.push(orbit.len());
                search.add_base_point(v);
            }
        }
        let order = orbit_sizes.iter().map(|&s| s as u128).product();
        Ok(AutomorphismGroup { order, base, orbit_sizes, generators })
    }

    /// An isomorphism `self -> other` if one exists.
    pub fn isomorphism_to(&self, other: &Graph) -> Option<Vec<usize>> {
        if self.vertex_count() != other.vertex_count() || self.edge_count() != other.edge_count() {
            return None;
        }
        if self.adj.is_empty() {
            return Some(Vec::new());
        }
        let mut a: Vec<usize> = self.adj.iter().map(BTreeSet::len).collect();
        let mut b: Vec<usize> = other.adj.iter().map(BTreeSet::len).collect();
        a.sort_unstable();
        b.sort_unstable();
        if a != b || !self.is_connected() || !other.is_connected() {
            return None;
        }
        let mut search = Search::new(self, other);
        (0..other.vertex_count()).find_map(|w| search.extend(&[(0, w)]))
    }
}

/// Result of [`Graph::automorphisms`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AutomorphismGroup {
    pub order: u128,
    pub base: Vec<usize>,
    pub orbit_sizes: Vec<usize>,
    pub generators: Vec<Vec<usize>>,
}

/// Backtracking extension of a partial vertex map `from -> to`.
struct Search<'g> {
    from: &'g Graph,
    to: &'g Graph,
    // distance arrays from base points, identical on both sides for automorphisms
    base_dist_from: Vec<Vec<usize>>,
}

impl<'g> Search<'g> {
    fn new(from: &'g Graph, to: &'g Graph) -> Self {
        Search { from, to, base_dist_from: Vec::new() }
    }

    fn add_base_point(&mut self, v: usize) {
        self.base_dist_from.push(self.from.bfs_distances(v));
    }

    fn extend(&mut self, fixed: &[(usize, usize)]) -> Option<Vec<usize>> {
        let n = self.from.vertex_count();
        let mut map = vec![usize::MAX; n];
        let mut inv = vec![usize::MAX; n];
        for &(u, w) in fixed {
            if self.from.degree(u) != self.to.degree(w) {
                return None;
            }
            if map[u] != usize::MAX || inv[w] != usize::MAX {
                return None;
            }
            map[u] = w;
            inv[w] = u;
        }
        for &(u, w) in fixed {
            if !self.consistent(u, w, &map, &inv) {
                return None;
            }
        }
        // distances from the first fixed pair prune candidates
        let (root_from, root_to) = fixed[0];
        let dist_from = self.from.bfs_distances(root_from);
        let dist_to = self.to.bfs_distances(root_to);
        let base_to = if std::ptr::eq(self.from, self.to) { Some(&self.base_dist_from) } else { None };
        // BFS order from the root keeps every new vertex adjacent to a mapped one
        let mut order: Vec<usize> = (0..n).filter(|&v| map[v] == usize::MAX).collect();
        order.sort_by_key(|&v| (dist_from[v], v));
        let ctx = Ctx { dist_from: &dist_from, dist_to: &dist_to, base: base_to };
        if self.backtrack(&order, 0, &mut map, &mut inv, &ctx) {
            Some(map)
        } else {
            None
        }
    }

    fn consistent(&self, u: usize, w: usize, map: &[usize], inv: &[usize]) -> bool {
        for x in self.from.neighbors(u) {
            let y = map[x];
            if y != usize::MAX && !self.to.has_edge(w, y) {
                return false;
            }
        }
        for y in self.to.neighbors(w) {
            // reverse direction: an edge in the image must come from an edge
            let x = inv[y];
            if x != usize::MAX && !self.from.has_edge(u, x) {
                return false;
            }
        }
        true
    }

    fn backtrack(
        &self,
        order: &[usize],
        idx: usize,
        map: &mut Vec<usize>,
        inv: &mut Vec<usize>,
        ctx: &Ctx<'_>,
    ) -> bool {
        let Some(&u) = order.get(idx) else {
            return true;
        };
        // candidates: images of mapped neighbours' neighbourhoods
        let anchor = self.from.neighbors(u).find(|&x| map[x] != usize::MAX);
        let candidates: Vec<usize> = match anchor {
            Some(x) => self.to.neighbors(map[x]).collect(),
            None => (0..self.to.vertex_count()).collect(),
        };
        for w in candidates {
            if inv[w] != usize::MAX
                || self.to.degree(w) != self.from.degree(u)
                || ctx.dist_to[w] != ctx.dist_from[u]
            {
                continue;
            }
            if let Some(base) = ctx.base {
                if base.iter().any(|d| d[u] != d[w]) {
                    continue;
                }
            }
            if !self.consistent(u, w, map, inv) {
                continue;
            }
            map[u] = w;
            inv[w] = u;
            if self.backtrack(order, idx + 1, map, inv, ctx) {
                return true;
            }
            map[u] = usize::MAX;
            inv[w] = usize::MAX;
        }
        false
    }
}

struct Ctx<'a> {
    dist_from: &'a [usize],
    dist_to: &'a [usize],
    base: Option<&'a Vec<Vec<usize>>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>())
    }

    // Brute force over all permutations, usable up to ~8 vertices.
    fn brute_force_order(g: &Graph) -> u128 {
        fn rec(g: &Graph, perm: &mut Vec<usize>, used: &mut Vec<bool>, count: &mut u128) {
            if perm.len() == g.vertex_count() {
                if g.is_automorphism(perm) {
                    *count += 1;
                }
                return;
            }
            for w in 0..g.vertex_count() {
                if !used[w] {
                    used[w] = true;
                    perm.push(w);
                    rec(g, perm, used, count);
                    perm.pop();
                    used[w] = false;
                }
            }
        }
        let mut count = 0;
        rec(g, &mut Vec::new(), &mut vec![false; g.vertex_count()], &mut count);
        count
    }

    #[test]
    fn cycle_automorphisms_are_dihedral() {
        for n in 3..=8 {
            let g = cycle(n);
            let aut = g.automorphisms().unwrap();
            assert_eq!(aut.order, 2 * n as u128);
            assert!(aut.generators.iter().all(|p| g.is_automorphism(p)));
        }
    }

    #[test]
    fn single_edge_has_order_two() {
        let g = Graph::from_edges(2, &[(0, 1)]);
        assert_eq!(g.automorphisms().unwrap().order, 2);
    }

    #[test]
    fn matches_brute_force_on_small_graphs() {
        let graphs = vec![
            Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]),
            Graph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]),
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]),
            // Petersen-like fragment: prism
            Graph::from_edges(6, &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)]),
            Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
        ];
        for g in graphs {
            assert_eq!(g.automorphisms().unwrap().order, brute_force_order(&g), "{g:?}");
        }
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = Graph::from_edges(4, &[(0, 1), (2, 3)]);
        assert!(matches!(g.automorphisms(), Err(Error::Argument(_))));
    }

    #[test]
    fn isomorphism_between_relabelled_cycles() {
        let a = cycle(6);
        let b = Graph::from_edges(6, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 5), (5, 0)]);
        let iso = a.isomorphism_to(&b).unwrap();
        assert!(a.edges().iter().all(|&(x, y)| b.has_edge(iso[x], iso[y])));
        let path = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3)]);
        assert!(a.isomorphism_to(&path).is_none());
    }

    #[test]
    fn dot_lists_every_edge() {
        let dot = cycle(5).to_dot("g", None);
        assert_eq!(dot.matches(" -- ").count(), 5);
        assert!(dot.starts_with("graph g {"));
    }
}
