//! Polygon model of the type A cluster category: n-diagonals, n-angulations,
//! their exchange graph and the cyclic rotation action.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::{AutomorphismGroup, Graph};

/// Number of polygon vertices for `k` diagonals of an `n`-angulation.
pub fn d_param(k: i64, n: i64) -> Result<i64> {
    if k < 1 || n < 3 {
        return arg(format!("d_param needs k >= 1 and n >= 3, got k={k}, n={n}"));
    }
    Ok((k + 1) * (n - 2) + 2)
}

/// Which boundary path of a chord `(i, j)`, `i < j`, is meant.
///
/// `Forward` walks `i, i+1, ..., j`; `Backward` walks `j, j+1, ..., i` mod `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Forward,
    Backward,
}

/// A chord of the `d`-gon that can appear in an n-angulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NDiagonal {
    pub i: usize,
    pub j: usize,
    /// A side cut off as a single n-gon, if any (`Forward` wins when both are).
    pub ngon_side: Option<Side>,
}

impl NDiagonal {
    /// Normalizes `(a, b)` and checks admissibility in the `d`-gon.
    pub fn new(d: usize, n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= d || b >= d || a == b {
            return arg(format!("bad chord ({a},{b}) in a {d}-gon"));
        }
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        let forward = j - i;
        let backward = d - forward;
        if forward < 2 || backward < 2 {
            return arg(format!("({i},{j}) is a boundary edge"));
        }
        let m = n - 2;
        if forward % m != 1 % m || backward % m != 1 % m {
            return arg(format!("({i},{j}) does not cut the {d}-gon into {n}-angulable pieces"));
        }
        let ngon_side = if forward == n - 1 {
            Some(Side::Forward)
        } else if backward == n - 1 {
            Some(Side::Backward)
        } else {
            None
        };
        Ok(NDiagonal { i, j, ngon_side })
    }

    pub fn pair(&self) -> (usize, usize) {
        (self.i, self.j)
    }

    /// Interiors intersect.
    pub fn crosses(&self, other: &NDiagonal) -> bool {
        let (a, b) = self.pair();
        let (c, d) = other.pair();
        (a < c && c < b && b < d) || (c < a && a < d && d < b)
    }
}

fn check_dn(d: usize, n: usize) -> Result<()> {
    if d < 4 || n < 3 {
        return arg(format!("need d >= 4 and n >= 3, got d={d}, n={n}"));
    }
    Ok(())
}

/// All n-diagonals of the `d`-gon, sorted by endpoints.
pub fn enumerate_n_diagonals(d: usize, n: usize) -> Result<Vec<NDiagonal>> {
    check_dn(d, n)?;
    let mut out = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            if let Ok(diag) = NDiagonal::new(d, n, i, j) {
                out.push(diag);
            }
        }
    }
    Ok(out)
}

/// A maximal set of noncrossing n-diagonals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NAngulation {
    pub d: usize,
    pub n: usize,
    /// Sorted by endpoint pair.
    pub diagonals: Vec<NDiagonal>,
}

#[derive(Serialize, Deserialize)]
struct NAngulationJson {
    d: usize,
    n: usize,
    diagonals: Vec<[usize; 2]>,
}

impl NAngulation {
    /// Builds and fully validates an n-angulation from endpoint pairs.
    pub fn new(d: usize, n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        check_dn(d, n)?;
        if (d - 2) % (n - 2) != 0 {
            return arg(format!("{d}-gon has no {n}-angulations"));
        }
        let mut diagonals = pairs
            .iter()
            .map(|&(a, b)| NDiagonal::new(d, n, a, b))
            .collect::<Result<Vec<_>>>()?;
        diagonals.sort();
        diagonals.dedup();
        let expected = (d - 2) / (n - 2) - 1;
        if diagonals.len() != expected {
            return arg(format!("expected {expected} distinct diagonals, got {}", diagonals.len()));
        }
        for (x, a) in diagonals.iter().enumerate() {
            if let Some(b) = diagonals[x + 1..].iter().find(|b| a.crosses(b)) {
                return arg(format!("diagonals {:?} and {:?} cross", a.pair(), b.pair()));
            }
        }
        let a = NAngulation { d, n, diagonals };
        if let Some(face) = a.faces().into_iter().find(|f| f.len() != n) {
            return arg(format!("face {face:?} is not a {n}-gon"));
        }
        Ok(a)
    }

    pub fn k(&self) -> usize {
        self.diagonals.len()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.diagonals.iter().map(NDiagonal::pair).collect()
    }

    /// Complementary faces as cyclic vertex lists, found by cutting along each diagonal.
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut faces = Vec::new();
        split_faces((0..self.d).collect(), self.pairs(), &mut faces);
        faces.sort();
        faces
    }

    /// Shifts every endpoint by `r` modulo `d`.
    pub fn rotate(&self, r: i64) -> NAngulation {
        let d = self.d as i64;
        let shift = |v: usize| ((v as i64 + r).rem_euclid(d)) as usize;
        let mut diagonals: Vec<NDiagonal> = self
            .diagonals
            .iter()
            .map(|x| NDiagonal::new(self.d, self.n, shift(x.i), shift(x.j)).expect("rotation keeps admissibility"))
            .collect();
        diagonals.sort();
        NAngulation { d: self.d, n: self.n, diagonals }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let doc = NAngulationJson {
            d: self.d,
            n: self.n,
            diagonals: self.diagonals.iter().map(|x| [x.i, x.j]).collect(),
        };
        serde_json::to_value(doc).expect("n-angulation serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: NAngulationJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let pairs: Vec<(usize, usize)> = doc.diagonals.iter().map(|p| (p[0], p[1])).collect();
        NAngulation::new(doc.d, doc.n, &pairs)
    }
}

fn split_faces(verts: Vec<usize>, chords: Vec<(usize, usize)>, out: &mut Vec<Vec<usize>>) {
    let Some((&(a, b), rest)) = chords.split_first() else {
        out.push(verts);
        return;
    };
    let pa = verts.iter().position(|&v| v == a).expect("endpoint in piece");
    let pb = verts.iter().position(|&v| v == b).expect("endpoint in piece");
    let (lo, hi) = (pa.min(pb), pa.max(pb));
    let inner: Vec<usize> = verts[lo..=hi].to_vec();
    let outer: Vec<usize> = verts[hi..].iter().chain(&verts[..=lo]).copied().collect();
    let (mut ci, mut co) = (Vec::new(), Vec::new());
    for &(x, y) in rest {
        if inner.contains(&x) && inner.contains(&y) {
            ci.push((x, y));
        } else {
            co.push((x, y));
        }
    }
    split_faces(inner, ci, out);
    split_faces(outer, co, out);
}

/// Diagonal sets (relative vertex indices) of all n-angulations of an `len`-gon.
fn angulations_of(len: usize, n: usize, memo: &mut HashMap<usize, Vec<Vec<(usize, usize)>>>) -> Vec<Vec<(usize, usize)>> {
    if let Some(v) = memo.get(&len) {
        return v.clone();
    }
    let mut result = Vec::new();
    if len == n {
        result.push(Vec::new());
    } else {
        // choose the face containing the edge (0, len-1): n corners 0 = a_0 < ... < a_{n-1} = len-1
        let mut corners = vec![0];
        choose_face(len, n, &mut corners, memo, &mut result);
    }
    memo.insert(len, result.clone());
    result
}

fn choose_face(
    len: usize,
    n: usize,
    corners: &mut Vec<usize>,
    memo: &mut HashMap<usize, Vec<Vec<(usize, usize)>>>,
    result: &mut Vec<Vec<(usize, usize)>>,
) {
    let m = n - 2;
    let last = *corners.last().expect("nonempty");
    if corners.len() == n {
        if last != len - 1 {
            return;
        }
        let mut partial: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
        for w in corners.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a == 1 {
                continue;
            }
            let subs = angulations_of(b - a + 1, n, memo);
            let mut next = Vec::with_capacity(partial.len() * subs.len());
            for p in &partial {
                for s in &subs {
                    let mut q = p.clone();
                    q.push((a, b));
                    q.extend(s.iter().map(|&(x, y)| (x + a, y + a)));
                    next.push(q);
                }
            }
            partial = next;
        }
        result.extend(partial);
        return;
    }
    let remaining = n - corners.len();
    let mut next = last + 1;
    while next + (remaining - 1) < len {
        corners.push(next);
        choose_face(len, n, corners, memo, result);
        corners.pop();
        next += m;
    }
}

/// Every n-angulation of the `d`-gon in canonical (lexicographic) order.
pub fn enumerate_n_angulations(d: usize, n: usize) -> Result<Vec<NAngulation>> {
    check_dn(d, n)?;
    if (d - 2) % (n - 2) != 0 {
        return arg(format!("(d-2) = {} is not divisible by (n-2) = {}", d - 2, n - 2));
    }
    let mut memo = HashMap::new();
    let mut out: Vec<NAngulation> = angulations_of(d, n, &mut memo)
        .into_iter()
        .map(|pairs| {
            let mut diagonals: Vec<NDiagonal> = pairs
                .into_iter()
                .map(|(a, b)| NDiagonal::new(d, n, a, b).expect("enumerated chords are admissible"))
                .collect();
            diagonals.sort();
            NAngulation { d, n, diagonals }
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Exchange graph: n-angulations joined when they differ in one diagonal.
#[derive(Debug, Clone)]
pub struct ExchangeGraph {
    pub vertices: Vec<NAngulation>,
    pub graph: Graph,
}

pub fn exchange_graph(d: usize, n: usize) -> Result<ExchangeGraph> {
    let vertices = enumerate_n_angulations(d, n)?;
    let mut graph = Graph::new(vertices.len());
    // angulations sharing all but one diagonal form a clique
    let mut by_rest: HashMap<Vec<(usize, usize)>, Vec<usize>> = HashMap::new();
    for (idx, a) in vertices.iter().enumerate() {
        let pairs = a.pairs();
        for skip in 0..pairs.len() {
            let mut rest = pairs.clone();
            rest.remove(skip);
            by_rest.entry(rest).or_default().push(idx);
        }
    }
    for members in by_rest.values() {
        for (x, &a) in members.iter().enumerate() {
            for &b in &members[x + 1..] {
                graph.add_edge(a, b);
            }
        }
    }
    Ok(ExchangeGraph { vertices, graph })
}

impl ExchangeGraph {
    pub fn index_of(&self, a: &NAngulation) -> Option<usize> {
        self.vertices.binary_search(a).ok()
    }

    /// Vertex permutation induced by `rotate(r, .)`.
    pub fn rotation_permutation(&self, r: i64) -> Vec<usize> {
        self.vertices
            .iter()
            .map(|a| self.index_of(&a.rotate(r)).expect("rotation preserves the vertex set"))
            .collect()
    }

    pub fn automorphisms(&self) -> Result<AutomorphismGroup> {
        self.graph.automorphisms()
    }

    pub fn labels(&self) -> Vec<String> {
        self.vertices
            .iter()
            .map(|a| a.pairs().iter().map(|(i, j)| format!("{i}-{j}")).collect::<Vec<_>>().join(" "))
            .collect()
    }

    pub fn to_dot(&self) -> String {
        self.graph.to_dot("exchange", Some(&self.labels()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.graph.to_json(None);
        v["angulations"] = self.vertices.iter().map(NAngulation::to_json).collect();
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan_dp(m: usize) -> u64 {
        let mut c = vec![1u64; m + 1];
        for i in 1..=m {
            c[i] = (0..i).map(|j| c[j] * c[i - 1 - j]).sum();
        }
        c[m]
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn d_param_values() {
        assert_eq!(d_param(2, 3).unwrap(), 5);
        assert_eq!(d_param(1, 4).unwrap(), 6);
        assert_eq!(d_param(1, 3).unwrap(), 4);
        assert!(d_param(0, 3).is_err());
        assert!(d_param(1, 2).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let p: Vec<_> = enumerate_n_diagonals(5, 3).unwrap().iter().map(NDiagonal::pair).collect();
        assert_eq!(p, vec![(0, 2), (0, 3), (1, 3), (1, 4), (2, 4)]);
        let p: Vec<_> = enumerate_n_diagonals(6, 4).unwrap().iter().map(NDiagonal::pair).collect();
        assert_eq!(p, vec![(0, 3), (1, 4), (2, 5)]);
        assert_eq!(enumerate_n_diagonals(4, 3).unwrap().len(), 2);
    }

    #[test]
    fn ngon_side_recorded() {
        let x = NDiagonal::new(6, 4, 1, 4).unwrap();
        assert_eq!(x.ngon_side, Some(Side::Forward));
        let y = NDiagonal::new(7, 3, 0, 5).unwrap();
        assert_eq!(y.ngon_side, Some(Side::Backward));
        let z = NDiagonal::new(7, 3, 0, 3).unwrap();
        assert_eq!(z.ngon_side, None);
    }

    #[test]
    fn counts_match_oracles() {
        for d in 4..=12 {
            assert_eq!(enumerate_n_angulations(d, 3).unwrap().len() as u64, catalan_dp(d - 2), "d={d}");
        }
        for m in 1..=4u64 {
            let d = (2 * m + 2) as usize;
            let fuss = binom(3 * m, m) / (2 * m + 1);
            assert_eq!(enumerate_n_angulations(d, 4).unwrap().len() as u64, fuss);
        }
        assert!(enumerate_n_angulations(7, 4).is_err());
    }

    #[test]
    fn enumerated_angulations_validate() {
        for (d, n) in [(8, 3), (10, 4), (11, 5), (10, 6)] {
            for a in enumerate_n_angulations(d, n).unwrap() {
                assert_eq!(NAngulation::new(d, n, &a.pairs()).unwrap(), a);
                assert_eq!(a.faces().len(), a.k() + 1);
            }
        }
    }

    #[test]
    fn exchange_graph_examples() {
        let g = exchange_graph(5, 3).unwrap();
        assert!(g.graph.is_cycle() && g.graph.vertex_count() == 5);
        let g = exchange_graph(4, 3).unwrap();
        assert_eq!((g.graph.vertex_count(), g.graph.edge_count()), (2, 1));
        let g = exchange_graph(6, 4).unwrap();
        assert!(g.graph.is_complete() && g.graph.vertex_count() == 3);
    }

    #[test]
    fn automorphism_orders() {
        assert_eq!(exchange_graph(5, 3).unwrap().automorphisms().unwrap().order, 10);
        assert_eq!(exchange_graph(4, 3).unwrap().automorphisms().unwrap().order, 2);
        assert_eq!(exchange_graph(6, 3).unwrap().automorphisms().unwrap().order, 12);
    }

    #[test]
    fn rotate_examples() {
        let a = NAngulation::new(5, 3, &[(0, 2), (2, 4)]).unwrap();
        assert_eq!(a.rotate(1).pairs(), vec![(0, 3), (1, 3)]);
        assert_eq!(a.rotate(5), a);
        assert_eq!(a.rotate(-7), a.rotate(3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(NAngulation::new(6, 3, &[(0, 3), (1, 4), (0, 2)]).is_err());
        assert!(NAngulation::new(6, 3, &[(0, 1), (0, 2), (0, 3)]).is_err());
        assert!(NAngulation::new(6, 3, &[(0, 2), (0, 3)]).is_err());
        assert!(NAngulation::new(8, 4, &[(0, 2), (4, 7)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let a = NAngulation::new(6, 3, &[(0, 2), (0, 3), (3, 5)]).unwrap();
        let v = a.to_json();
        assert_eq!(v["diagonals"], serde_json::json!([[0, 2], [0, 3], [3, 5]]));
        assert_eq!(NAngulation::from_json(&v).unwrap(), a);
    }

    #[test]
    fn exchange_degree_recomputed_per_vertex() {
        for (d, n) in [(7, 3), (8, 4), (9, 3)] {
            let g = exchange_graph(d, n).unwrap();
            let all = enumerate_n_diagonals(d, n).unwrap();
            for (idx, a) in g.vertices.iter().enumerate() {
                let mut expected = 0;
                for skip in 0..a.k() {
                    let rest: Vec<_> = a.diagonals.iter().enumerate().filter(|(x, _)| *x != skip).map(|(_, y)| *y).collect();
                    expected += all
                        .iter()
                        .filter(|c| **c != a.diagonals[skip] && !rest.contains(c))
                        .filter(|c| {
                            let mut p: Vec<_> = rest.iter().map(NDiagonal::pair).collect();
                            p.push(c.pair());
                            NAngulation::new(d, n, &p).is_ok()
                        })
                        .count();
                }
                assert_eq!(g.graph.degree(idx), expected);
                assert_eq!(expected, (n - 2) * a.k());
            }
        }
    }
}
