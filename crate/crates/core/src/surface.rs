//! Marked bordered surfaces, ideal triangulations as combinatorial maps, flips,
//! dual quivers with potential and bounded exploration of the flip graph.
//!
//! Triangles are oriented counterclockwise. Side `s` of a triangle runs from
//! corner `s` to corner `s + 1`; two glued sides run in opposite directions.
//! Marked points carry global labels: boundary `i` owns the consecutive block
//! `offset_i .. offset_i + d_i - 2`, listed in the direction that keeps the
//! surface on the left.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::graph::Graph;
use crate::polygon::NAngulation;
use crate::quiver::{Arrow, PotentialTerm, QuiverWithPotential};

/// Genus plus pole orders; boundary `i` carries `d[i] - 2` marked points.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedSurface {
    pub g: usize,
    pub d: Vec<usize>,
}

pub fn build_surface(g: usize, d: &[usize]) -> Result<MarkedSurface> {
    if d.is_empty() {
        return arg("at least one boundary component is required");
    }
    if let Some(bad) = d.iter().find(|&&x| x <= 2) {
        return arg(format!("pole order {bad} must exceed 2"));
    }
    Ok(MarkedSurface { g, d: d.to_vec() })
}

impl MarkedSurface {
    pub fn boundaries(&self) -> usize {
        self.d.len()
    }

    pub fn marked_points_on(&self, i: usize) -> usize {
        self.d[i] - 2
    }

    pub fn marked_points(&self) -> usize {
        self.d.iter().map(|x| x - 2).sum()
    }

    /// Label of the first marked point on boundary `i`.
    pub fn offset(&self, i: usize) -> usize {
        self.d[..i].iter().map(|x| x - 2).sum()
    }

    /// `(arcs, triangles)` of any ideal triangulation.
    pub fn expected_counts(&self) -> (i64, i64) {
        let g = self.g as i64;
        let sum: i64 = self.d.iter().map(|&x| x as i64).sum();
        let b = self.d.len() as i64;
        (6 * g - 6 + sum + b, 4 * g - 4 + sum)
    }

    pub fn euler_characteristic(&self) -> i64 {
        2 - 2 * self.g as i64 - self.d.len() as i64
    }
}

pub fn expected_counts(s: &MarkedSurface) -> (i64, i64) {
    s.expected_counts()
}

/// One counterclockwise triangle: corner labels and the arc on each side
/// (`None` for a boundary segment).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub corners: [usize; 3],
    pub arcs: [Option<usize>; 3],
}

impl Triangle {
    /// Corner labels and arcs rotated so that side `s` comes first.
    fn rotated(&self, s: usize) -> ([usize; 3], [Option<usize>; 3]) {
        let c = self.corners;
        let a = self.arcs;
        ([c[s], c[(s + 1) % 3], c[(s + 2) % 3]], [a[s], a[(s + 1) % 3], a[(s + 2) % 3]])
    }
}

/// Position of a triangle side: `(triangle, side)`.
pub type SidePos = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealTriangulation {
    pub surface: MarkedSurface,
    pub triangles: Vec<Triangle>,
    /// Number of arc ids in use; ids are `0..arc_count`.
    pub arc_count: usize,
}

#[derive(Serialize, Deserialize)]
struct SurfaceJson {
    g: usize,
    d: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct TriangulationJson {
    surface: SurfaceJson,
    triangles: Vec<[usize; 3]>,
    /// Entry `k` lists the sides carrying arc `k` as `[triangle, side]`.
    gluings: Vec<Vec<[usize; 2]>>,
}

/// Side of a polygon word: a boundary segment or one occurrence of a glued letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Letter {
    Boundary,
    Glued(usize),
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let p = self.0[x];
        if p == x {
            return x;
        }
        let r = self.find(p);
        self.0[x] = r;
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

impl IdealTriangulation {
    /// Sides carrying `arc`, in scan order.
    pub fn positions(&self, arc: usize) -> Vec<SidePos> {
        let mut out = Vec::with_capacity(2);
        for (t, tri) in self.triangles.iter().enumerate() {
            for s in 0..3 {
                if tri.arcs[s] == Some(arc) {
                    out.push((t, s));
                }
            }
        }
        out
    }

    /// The other side glued to `(t, s)`, if it is glued to exactly one.
    pub fn partner(&self, (t, s): SidePos) -> Option<SidePos> {
        let arc = self.triangles[t].arcs[s]?;
        let pos = self.positions(arc);
        match pos.as_slice() {
            [a, b] if *a == (t, s) => Some(*b),
            [a, b] if *b == (t, s) => Some(*a),
            _ => None,
        }
    }

    fn partner_table(&self) -> Vec<[Option<SidePos>; 3]> {
        let mut seen: Vec<Vec<SidePos>> = vec![Vec::new(); self.arc_count];
        for (t, tri) in self.triangles.iter().enumerate() {
            for s in 0..3 {
                if let Some(a) = tri.arcs[s] {
                    if a < self.arc_count {
                        seen[a].push((t, s));
                    }
                }
            }
        }
        let mut table = vec![[None; 3]; self.triangles.len()];
        for pos in seen {
            if let [a, b] = pos[..] {
                table[a.0][a.1] = Some(b);
                table[b.0][b.1] = Some(a);
            }
        }
        table
    }

    /// Triangulation of a disc with `m` marked points `0..m` from its diagonals.
    /// Arc ids follow the sorted diagonal order.
    pub fn polygon(m: usize, diagonals: &[(usize, usize)]) -> Result<Self> {
        let surface = build_surface(0, &[m + 2])?;
        if m < 3 {
            return arg("a disc needs at least 3 marked points to be triangulated");
        }
        let faces = if m == 3 {
            if !diagonals.is_empty() {
                return arg("a triangle has no diagonals");
            }
            vec![vec![0, 1, 2]]
        } else {
            NAngulation::new(m, 3, diagonals)?.faces()
        };
        let mut sorted: Vec<(usize, usize)> = diagonals.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        sorted.sort_unstable();
        let triangles = faces
            .iter()
            .map(|f| {
                let corners = [f[0], f[1], f[2]];
                let mut arcs = [None; 3];
                for (s, slot) in arcs.iter_mut().enumerate() {
                    let (a, b) = (corners[s], corners[(s + 1) % 3]);
                    *slot = sorted.binary_search(&(a.min(b), a.max(b))).ok();
                }
                Triangle { corners, arcs }
            })
            .collect();
        Ok(IdealTriangulation { surface, triangles, arc_count: sorted.len() })
    }

    /// A valid triangulation of any triangulable surface.
    ///
    /// The surface is cut into one polygon with side word
    /// `[boundary 1] (a b a^-1 b^-1)^g (c_j [boundary j] c_j^-1)_{j>=2}` and
    /// the polygon is fan-triangulated from its first vertex.
    pub fn seed(surface: &MarkedSurface) -> Result<Self> {
        let (arcs, faces) = surface.expected_counts();
        if faces < 1 || arcs < 0 {
            return arg(format!("surface {surface:?} has no ideal triangulation"));
        }
        let mut word = vec![Letter::Boundary; surface.marked_points_on(0)];
        // (letter id, position) of both occurrences
        let mut occurrences: Vec<[usize; 2]> = Vec::new();
        let mut block_start = Vec::new();
        for _ in 0..surface.g {
            let (a, b) = (occurrences.len(), occurrences.len() + 1);
            let p = word.len();
            word.extend([Letter::Glued(a), Letter::Glued(b), Letter::Glued(a), Letter::Glued(b)]);
            occurrences.push([p, p + 2]);
            occurrences.push([p + 1, p + 3]);
        }
        for j in 1..surface.boundaries() {
            let c = occurrences.len();
            let p = word.len();
            block_start.push(p + 1);
            word.push(Letter::Glued(c));
            word.extend(std::iter::repeat_n(Letter::Boundary, surface.marked_points_on(j)));
            occurrences.push([p, word.len()]);
            word.push(Letter::Glued(c));
        }
        let n = word.len();
        // side p runs from vertex p to vertex p + 1; x ... x^-1 glues start to end
        let mut uf = UnionFind((0..n).collect());
        for &[p, q] in &occurrences {
            uf.union(p, (q + 1) % n);
            uf.union((p + 1) % n, q);
        }
        let mut label_of_class: HashMap<usize, usize> = HashMap::new();
        let mut assign = |uf: &mut UnionFind, vertex: usize, label: usize| -> Result<()> {
            let root = uf.find(vertex);
            match label_of_class.insert(root, label) {
                Some(old) if old != label => Err(Error::Geometry("seed construction merged two marked points".into())),
                _ => Ok(()),
            }
        };
        for t in 0..surface.marked_points_on(0) {
            assign(&mut uf, t, t)?;
        }
        for (j, &start) in block_start.iter().enumerate() {
            let off = surface.offset(j + 1);
            for t in 0..surface.marked_points_on(j + 1) {
                assign(&mut uf, start + t, off + t)?;
            }
        }
        let mut labels = Vec::with_capacity(n);
        for v in 0..n {
            let root = uf.find(v);
            labels.push(*label_of_class.get(&root).ok_or_else(|| {
                Error::Geometry("seed construction left an unmarked vertex".into())
            })?);
        }
        // arc ids: glued letters first, then fan diagonals (0, j) for j in 2..n-1
        let letters = occurrences.len();
        let side_arc = |p: usize| match word[p] {
            Letter::Boundary => None,
            Letter::Glued(x) => Some(x),
        };
        let diag = |j: usize| letters + j - 2;
        let mut triangles = Vec::with_capacity(n - 2);
        for i in 1..n - 1 {
            let s0 = if i == 1 { side_arc(0) } else { Some(diag(i)) };
            let s1 = side_arc(i);
            let s2 = if i + 1 == n - 1 { side_arc(n - 1) } else { Some(diag(i + 1)) };
            triangles.push(Triangle { corners: [labels[0], labels[i], labels[i + 1]], arcs: [s0, s1, s2] });
        }
        let arc_count = letters + n.saturating_sub(3);
        Ok(IdealTriangulation { surface: surface.clone(), triangles, arc_count })
    }

    pub fn to_json(&self) -> serde_json::Value {
        let gluings = (0..self.arc_count)
            .map(|a| self.positions(a).into_iter().map(|(t, s)| [t, s]).collect())
            .collect();
        let doc = TriangulationJson {
            surface: SurfaceJson { g: self.surface.g, d: self.surface.d.clone() },
            triangles: self.triangles.iter().map(|t| t.corners).collect(),
            gluings,
        };
        serde_json::to_value(doc).expect("triangulation serializes")
    }

    /// Parses the JSON form; structural checks are left to [`validate_triangulation`].
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: TriangulationJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let surface = build_surface(doc.surface.g, &doc.surface.d)?;
        let mut triangles: Vec<Triangle> =
            doc.triangles.iter().map(|&corners| Triangle { corners, arcs: [None; 3] }).collect();
        for (arc, sides) in doc.gluings.iter().enumerate() {
            if sides.is_empty() || sides.len() > 2 {
                return Err(Error::Parse(format!("arc {arc} must list one or two sides")));
            }
            for &[t, s] in sides {
                let slot = triangles
                    .get_mut(t)
                    .and_then(|tri| tri.arcs.get_mut(s))
                    .ok_or_else(|| Error::Parse(format!("side [{t},{s}] does not exist")))?;
                if slot.replace(arc).is_some() {
                    return Err(Error::Parse(format!("side [{t},{s}] is glued twice")));
                }
            }
        }
        Ok(IdealTriangulation { surface, triangles, arc_count: doc.gluings.len() })
    }

    /// Copy with arc `arc` cut open into two boundary sides; later ids shift down.
    pub fn without_arc(&self, arc: usize) -> IdealTriangulation {
        let mut out = self.clone();
        for tri in &mut out.triangles {
            for slot in &mut tri.arcs {
                *slot = match *slot {
                    Some(a) if a == arc => None,
                    Some(a) if a > arc => Some(a - 1),
                    other => other,
                };
            }
        }
        out.arc_count = self.arc_count.saturating_sub(1);
        out
    }
}

/// One named structural check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_triangulation`]; every check is always listed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn failed(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && !c.passed)
    }
}

impl IdealTriangulation {
    /// Corner chains around each marked point, from the corner whose outgoing
    /// side is boundary to the corner whose incoming side is boundary.
    /// `None` if some corner is not on exactly one such chain.
    pub fn vertex_fans(&self) -> Option<Vec<Vec<SidePos>>> {
        let partner = self.partner_table();
        let total = 3 * self.triangles.len();
        let mut covered = vec![[false; 3]; self.triangles.len()];
        let mut fans = Vec::new();
        let mut count = 0;
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                if tri.arcs[k].is_some() {
                    continue;
                }
                let mut chain = vec![(t, k)];
                let (mut ct, mut ck) = (t, k);
                loop {
                    if std::mem::replace(&mut covered[ct][ck], true) {
                        return None;
                    }
                    count += 1;
                    let incoming = (ck + 2) % 3;
                    if self.triangles[ct].arcs[incoming].is_none() {
                        break;
                    }
                    let (nt, ns) = partner[ct][incoming]?;
                    if self.triangles[nt].corners[ns] != self.triangles[ct].corners[ck] {
                        return None;
                    }
                    (ct, ck) = (nt, ns);
                    chain.push((ct, ck));
                }
                fans.push(chain);
            }
        }
        (count == total).then_some(fans)
    }
}

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> Check {
    Check { name, passed, detail: detail.into() }
}

/// Checks every structural invariant of `t` against surface `s`.
pub fn validate_triangulation(t: &IdealTriangulation, s: &MarkedSurface) -> ValidationReport {
    let mut checks = Vec::new();
    let marked = s.marked_points();

    // gluing: each arc on exactly two sides, and the unglued sides are exactly the boundary segments
    let mut bad_arcs = Vec::new();
    for a in 0..t.arc_count {
        if t.positions(a).len() != 2 {
            bad_arcs.push(a);
        }
    }
    let out_of_range = t.triangles.iter().flat_map(|x| x.arcs).flatten().any(|a| a >= t.arc_count);
    let unglued = t.triangles.iter().flat_map(|x| x.arcs).filter(Option::is_none).count();
    let involution = bad_arcs.is_empty() && !out_of_range && unglued == marked;
    checks.push(check(
        "involution",
        involution,
        format!("arcs not on two sides: {bad_arcs:?}; unglued sides {unglued}, boundary segments expected {marked}"),
    ));

    let labels_in_range = t.triangles.iter().flat_map(|x| x.corners).all(|c| c < marked);
    let mut labels_match = labels_in_range;
    if labels_in_range {
        let partner = t.partner_table();
        for (ti, tri) in t.triangles.iter().enumerate() {
            for si in 0..3 {
                if let Some((tj, sj)) = partner[ti][si] {
                    let other = &t.triangles[tj];
                    if tri.corners[si] != other.corners[(sj + 1) % 3] || tri.corners[(si + 1) % 3] != other.corners[sj] {
                        labels_match = false;
                    }
                }
            }
        }
    }
    checks.push(check("labels", labels_match, "corner labels in range and reversed across every gluing"));

    let (arcs, faces) = s.expected_counts();
    checks.push(check("arc_count", t.arc_count as i64 == arcs, format!("{} arcs, expected {arcs}", t.arc_count)));
    checks.push(check(
        "face_count",
        t.triangles.len() as i64 == faces,
        format!("{} triangles, expected {faces}", t.triangles.len()),
    ));

    let v = marked as i64;
    let e = t.arc_count as i64 + unglued as i64;
    let f = t.triangles.len() as i64;
    let chi = v - e + f;
    checks.push(check(
        "euler",
        chi == s.euler_characteristic(),
        format!("V - E + F = {v} - {e} + {f} = {chi}, expected {}", s.euler_characteristic()),
    ));

    let mut segments: Vec<(usize, usize)> = t
        .triangles
        .iter()
        .flat_map(|x| (0..3).filter(|&k| x.arcs[k].is_none()).map(move |k| (x.corners[k], x.corners[(k + 1) % 3])))
        .collect();
    segments.sort_unstable();
    let mut expected_segments = Vec::new();
    for i in 0..s.boundaries() {
        let (off, m) = (s.offset(i), s.marked_points_on(i));
        for k in 0..m {
            expected_segments.push((off + k, off + (k + 1) % m));
        }
    }
    expected_segments.sort_unstable();
    checks.push(check(
        "boundary",
        segments == expected_segments,
        format!("{} boundary components expected", s.boundaries()),
    ));

    let fans = if involution && labels_match { t.vertex_fans() } else { None };
    let fans_ok = fans.as_ref().is_some_and(|f| {
        let mut points: Vec<usize> = f.iter().map(|c| t.triangles[c[0].0].corners[c[0].1]).collect();
        points.sort_unstable();
        points == (0..marked).collect::<Vec<_>>()
    });
    checks.push(check("vertex_links", fans_ok, "each marked point has one corner chain from boundary to boundary"));

    let folded: Vec<usize> = t
        .triangles
        .iter()
        .enumerate()
        .filter(|(_, x)| {
            let a = x.arcs;
            (a[0].is_some() && (a[0] == a[1] || a[0] == a[2])) || (a[1].is_some() && a[1] == a[2])
        })
        .map(|(i, _)| i)
        .collect();
    checks.push(check("no_self_folded", folded.is_empty(), format!("self-folded triangles: {folded:?}")));

    ValidationReport { checks }
}

impl IdealTriangulation {
    pub fn validate(&self) -> ValidationReport {
        validate_triangulation(self, &self.surface)
    }

    /// Replaces `arc` by the other diagonal of the quadrilateral formed by its
    /// two triangles. The new arc keeps the id.
    pub fn flip(&self, arc: usize) -> Result<IdealTriangulation> {
        let (t1, t2, new1, new2) = self.flip_parts(arc)?;
        let mut out = self.clone();
        out.triangles[t1] = new1;
        out.triangles[t2] = new2;
        Ok(out)
    }

    fn flip_parts(&self, arc: usize) -> Result<(usize, usize, Triangle, Triangle)> {
        if arc >= self.arc_count {
            return arg(format!("unknown arc {arc}"));
        }
        let pos = self.positions(arc);
        let [(t1, s1), (t2, s2)] = pos[..] else {
            return arg(format!("arc {arc} is not glued on two sides"));
        };
        if t1 == t2 {
            return Err(Error::FlipUndefined(arc));
        }
        // t1 = [p, q, x] with sides [e, B, C]; t2 = [q, p, y] with sides [e, D, A]
        let ([p, q, x], [_, b, c]) = self.triangles[t1].rotated(s1);
        let ([_, _, y], [_, d, a]) = self.triangles[t2].rotated(s2);
        let new1 = Triangle { corners: [x, p, y], arcs: [c, d, Some(arc)] };
        let new2 = Triangle { corners: [y, q, x], arcs: [a, b, Some(arc)] };
        Ok((t1, t2, new1, new2))
    }

    /// Triangles whose three sides are all arcs.
    pub fn interior_triangles(&self) -> usize {
        self.triangles.iter().filter(|t| t.arcs.iter().all(Option::is_some)).count()
    }

    /// Dual quiver: one vertex per arc, an arrow `side k -> side k-1` at each
    /// corner `k` where both sides are arcs, and one clockwise 3-cycle in the
    /// potential per interior triangle.
    pub fn dual_quiver_with_potential(&self) -> QuiverWithPotential {
        let mut arrows = Vec::new();
        let mut potential = Vec::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            let mut at_corner = [None; 3];
            for k in 0..3 {
                if let (Some(src), Some(dst)) = (tri.arcs[k], tri.arcs[(k + 2) % 3]) {
                    at_corner[k] = Some(arrows.len());
                    arrows.push(Arrow { src, dst, label: format!("t{t}c{k}") });
                }
            }
            if let [Some(a0), Some(a1), Some(a2)] = at_corner {
                potential.push(PotentialTerm { coef: 1, arrows: vec![a0, a2, a1] });
            }
        }
        QuiverWithPotential { vertices: self.arc_count, arrows, potential }
    }
}

pub fn dual_quiver_with_potential(t: &IdealTriangulation) -> QuiverWithPotential {
    t.dual_quiver_with_potential()
}

/// Exchange matrix of the flipped triangulation equals the mutation at `arc`.
pub fn flip_mutation_compatible(t: &IdealTriangulation, arc: usize) -> Result<bool> {
    let flipped = t.flip(arc)?;
    let before = t.dual_quiver_with_potential().exchange_matrix();
    let after = flipped.dual_quiver_with_potential().exchange_matrix();
    Ok(before.mutate(arc)? == after)
}

/// Fixed reference triangulation in which arcs of other triangulations are
/// recorded as reduced paths, giving isotopy classes relative to the marked points.
#[derive(Debug, Clone)]
pub struct Reference {
    seed: IdealTriangulation,
    partner: Vec<[Option<SidePos>; 3]>,
    /// `(fan id, index in fan)` of every corner.
    corner_fan: Vec<[(usize, usize); 3]>,
    fans: Vec<Vec<SidePos>>,
}

/// A path through the reference triangulation: it leaves the marked point at
/// corner `start`, exits triangles through the listed sides and arrives at
/// corner `end`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Walk {
    pub start: SidePos,
    pub exits: Vec<SidePos>,
    pub end: SidePos,
}

/// Isotopy class of an arc: either an arc of the reference triangulation or a
/// reduced walk in its lexicographically smaller orientation.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ArcClass {
    Seed(usize),
    Walk(Walk),
}

impl Reference {
    pub fn new(seed: &IdealTriangulation) -> Result<Self> {
        let report = seed.validate();
        if !report.passed() {
            return arg(format!("reference triangulation fails checks {:?}", report.failures()));
        }
        let fans = seed.vertex_fans().expect("validated triangulation has vertex fans");
        let mut corner_fan = vec![[(0, 0); 3]; seed.triangles.len()];
        for (f, chain) in fans.iter().enumerate() {
            for (i, &(t, k)) in chain.iter().enumerate() {
                corner_fan[t][k] = (f, i);
            }
        }
        Ok(Reference { seed: seed.clone(), partner: seed.partner_table(), corner_fan, fans })
    }

    pub fn seed(&self) -> &IdealTriangulation {
        &self.seed
    }

    /// The walk along side `(t, s)` of the reference, in its triangle's direction.
    fn side_walk(&self, (t, s): SidePos) -> Walk {
        Walk { start: (t, s), exits: Vec::new(), end: (t, (s + 1) % 3) }
    }

    fn reverse(&self, w: &Walk) -> Walk {
        let exits = w.exits.iter().rev().map(|&e| self.partner[e.0][e.1].expect("exit through an arc")).collect();
        Walk { start: w.end, exits, end: w.start }
    }

    /// Free reduction followed by sliding both ends around their marked points.
    fn reduce(&self, w: Walk) -> Walk {
        let mut stack: Vec<SidePos> = Vec::with_capacity(w.exits.len());
        for e in w.exits {
            match stack.last() {
                Some(&prev) if self.partner[prev.0][prev.1] == Some(e) => {
                    stack.pop();
                }
                _ => stack.push(e),
            }
        }
        let w = self.slide_start(Walk { start: w.start, exits: stack, end: w.end });
        let w = self.slide_start(self.reverse(&w));
        self.reverse(&w)
    }

    fn slide_start(&self, mut w: Walk) -> Walk {
        let mut drop = 0;
        while let Some(&(t, s)) = w.exits.get(drop) {
            let (st, k) = w.start;
            debug_assert_eq!(st, t);
            let (nt, ns) = self.partner[t][s].expect("exit through an arc");
            w.start = if s == k {
                (nt, (ns + 1) % 3)
            } else if s == (k + 2) % 3 {
                (nt, ns)
            } else {
                break;
            };
            drop += 1;
        }
        w.exits.drain(..drop);
        w
    }

    /// Exits crossed when moving around a marked point from corner `a` to corner `b`.
    fn fan_path(&self, a: SidePos, b: SidePos) -> Vec<SidePos> {
        let (fa, ia) = self.corner_fan[a.0][a.1];
        let (fb, ib) = self.corner_fan[b.0][b.1];
        assert_eq!(fa, fb, "walks meet at different marked points");
        let chain = &self.fans[fa];
        if ia <= ib {
            chain[ia..ib].iter().map(|&(t, k)| (t, (k + 2) % 3)).collect()
        } else {
            chain[ib + 1..=ia].iter().rev().map(|&(t, k)| (t, k)).collect()
        }
    }

    /// Reduced concatenation of `first` and `second` through their common marked point.
    fn concat(&self, first: &Walk, second: &Walk) -> Walk {
        let mut exits = first.exits.clone();
        exits.extend(self.fan_path(first.end, second.start));
        exits.extend(second.exits.iter().copied());
        self.reduce(Walk { start: first.start, exits, end: second.end })
    }

    pub fn classify(&self, w: &Walk) -> ArcClass {
        if w.exits.is_empty() && w.start.0 == w.end.0 {
            let (t, k) = w.start;
            let side = if w.end.1 == (k + 1) % 3 { k } else { w.end.1 };
            if let Some(a) = self.seed.triangles[t].arcs[side] {
                return ArcClass::Seed(a);
            }
        }
        let r = self.reverse(w);
        ArcClass::Walk(if r < *w { r } else { w.clone() })
    }
}

/// A triangulation together with the isotopy class of each of its sides.
#[derive(Debug, Clone)]
pub struct TrackedTriangulation {
    pub tri: IdealTriangulation,
    /// Walk of side `(t, s)`, oriented like the side.
    side_walks: Vec<[Walk; 3]>,
}

/// Sorted isotopy classes of the arcs: equal keys mean isotopic triangulations.
pub type TriangulationKey = Vec<ArcClass>;

impl TrackedTriangulation {
    pub fn from_reference(r: &Reference) -> Self {
        let side_walks = (0..r.seed.triangles.len())
            .map(|t| [r.side_walk((t, 0)), r.side_walk((t, 1)), r.side_walk((t, 2))])
            .collect();
        TrackedTriangulation { tri: r.seed.clone(), side_walks }
    }

    pub fn arc_class(&self, r: &Reference, arc: usize) -> ArcClass {
        let (t, s) = self.tri.positions(arc)[0];
        r.classify(&self.side_walks[t][s])
    }

    pub fn key(&self, r: &Reference) -> TriangulationKey {
        let mut key: Vec<ArcClass> = (0..self.tri.arc_count).map(|a| self.arc_class(r, a)).collect();
        key.sort();
        key
    }

    pub fn flip(&self, r: &Reference, arc: usize) -> Result<TrackedTriangulation> {
        let (t1, t2, new1, new2) = self.tri.flip_parts(arc)?;
        let s1 = self.tri.positions(arc).into_iter().find(|p| p.0 == t1).expect("side in t1").1;
        let s2 = self.tri.positions(arc).into_iter().find(|p| p.0 == t2).expect("side in t2").1;
        let w1 = &self.side_walks[t1];
        let w2 = &self.side_walks[t2];
        // old t1 = [p, q, x] sides [e, B, C]; old t2 = [q, p, y] sides [e, D, A]
        let wb = w1[(s1 + 1) % 3].clone();
        let wc = w1[(s1 + 2) % 3].clone();
        let wd = w2[(s2 + 1) % 3].clone();
        let wa = w2[(s2 + 2) % 3].clone();
        let x_to_y = r.concat(&wc, &wd);
        let y_to_x = r.reverse(&x_to_y);
        let mut out = self.clone();
        out.tri.triangles[t1] = new1;
        out.tri.triangles[t2] = new2;
        out.side_walks[t1] = [wc, wd, y_to_x];
        out.side_walks[t2] = [wa, wb, x_to_y];
        Ok(out)
    }
}

/// Largest number of vertices [`triangulation_graph`] will create.
pub const MAX_GRAPH_VERTICES: usize = 200_000;

/// Ball of the flip graph around a seed, deduplicated by isotopy class.
#[derive(Debug, Clone)]
pub struct TriangulationGraph {
    pub reference: Reference,
    pub vertices: Vec<TrackedTriangulation>,
    pub keys: Vec<TriangulationKey>,
    pub depth: Vec<usize>,
    pub graph: Graph,
    /// Set when some flip from the outermost layer leaves the explored ball.
    pub frontier: bool,
}

/// Breadth-first flip exploration; `depth = None` explores until closed.
pub fn triangulation_graph(seed: &IdealTriangulation, depth: Option<usize>) -> Result<TriangulationGraph> {
    let reference = Reference::new(seed)?;
    let start = TrackedTriangulation::from_reference(&reference);
    let mut index: HashMap<TriangulationKey, usize> = HashMap::new();
    index.insert(start.key(&reference), 0);
    let mut keys = vec![start.key(&reference)];
    let mut vertices = vec![start];
    let mut depths = vec![0];
    let mut edges = Vec::new();
    let mut frontier = false;
    let mut level = vec![0usize];
    let mut current = 0;
    while !level.is_empty() {
        let at_limit = depth == Some(current);
        let expanded: Vec<Vec<(TrackedTriangulation, TriangulationKey)>> = level
            .par_iter()
            .map(|&v| {
                let tracked = &vertices[v];
                (0..tracked.tri.arc_count)
                    .filter_map(|a| tracked.flip(&reference, a).ok())
                    .map(|t| {
                        let k = t.key(&reference);
                        (t, k)
                    })
                    .collect()
            })
            .collect();
        let mut next = Vec::new();
        for (&v, flips) in level.iter().zip(expanded) {
            for (t, k) in flips {
                if let Some(&w) = index.get(&k) {
                    edges.push((v, w));
                } else if at_limit {
                    frontier = true;
                } else {
                    let w = vertices.len();
                    if w >= MAX_GRAPH_VERTICES {
                        return Err(Error::Resource(format!("flip graph exceeds {MAX_GRAPH_VERTICES} vertices")));
                    }
                    index.insert(k.clone(), w);
                    vertices.push(t);
                    keys.push(k);
                    depths.push(current + 1);
                    next.push(w);
                    edges.push((v, w));
                }
            }
        }
        if at_limit {
            break;
        }
        level = next;
        current += 1;
    }
    let graph = Graph::from_edges(vertices.len(), &edges);
    Ok(TriangulationGraph { reference, vertices, keys, depth: depths, graph, frontier })
}

impl TriangulationGraph {
    pub fn to_dot(&self) -> String {
        let labels: Vec<String> = self.depth.iter().enumerate().map(|(i, d)| format!("T{i} (depth {d})")).collect();
        self.graph.to_dot("flips", Some(&labels))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = self.graph.to_json(None);
        v["frontier"] = self.frontier.into();
        v["depth"] = self.depth.clone().into();
        v["triangulations"] = self.vertices.iter().map(|t| t.tri.to_json()).collect();
        v
    }
}

impl IdealTriangulation {
    /// Triangles rotated to their smallest form and sorted; equal for two maps
    /// that differ only in triangle order and starting corners.
    pub fn labeled_form(&self) -> Vec<([usize; 3], [Option<usize>; 3])> {
        let mut out: Vec<_> = self
            .triangles
            .iter()
            .map(|t| (0..3).map(|s| t.rotated(s)).min().expect("three rotations"))
            .collect();
        out.sort();
        out
    }

    /// For disc triangulations: the arcs as sorted endpoint pairs.
    pub fn arc_endpoints(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = (0..self.arc_count)
            .filter_map(|a| {
                let (t, s) = *self.positions(a).first()?;
                let c = self.triangles[t].corners;
                let (x, y) = (c[s], c[(s + 1) % 3]);
                Some((x.min(y), x.max(y)))
            })
            .collect();
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polygon::exchange_graph;

    fn surf(g: usize, d: &[usize]) -> MarkedSurface {
        build_surface(g, d).unwrap()
    }

    const SURFACES: &[(usize, &[usize])] = &[
        (0, &[5]),
        (0, &[7]),
        (0, &[8]),
        (1, &[3]),
        (0, &[3, 3]),
        (0, &[4, 3]),
        (1, &[4]),
        (2, &[3]),
        (0, &[3, 3, 3]),
        (1, &[3, 5]),
    ];

    #[test]
    fn surface_data() {
        let s = surf(0, &[7]);
        assert_eq!((s.boundaries(), s.marked_points()), (1, 5));
        let s = surf(1, &[3]);
        assert_eq!((s.boundaries(), s.marked_points()), (1, 1));
        assert!(build_surface(0, &[2]).is_err());
        assert!(build_surface(0, &[]).is_err());
    }

    #[test]
    fn counts_formula() {
        assert_eq!(surf(0, &[7]).expected_counts(), (2, 3));
        assert_eq!(surf(1, &[3]).expected_counts(), (4, 3));
        assert_eq!(surf(0, &[3, 3]).expected_counts(), (2, 2));
    }

    #[test]
    fn seeds_are_valid_with_formula_counts() {
        for &(g, d) in SURFACES {
            let s = surf(g, d);
            let t = IdealTriangulation::seed(&s).unwrap();
            let report = t.validate();
            assert!(report.passed(), "{s:?}: {:?}", report.failures());
            assert_eq!((t.arc_count as i64, t.triangles.len() as i64), s.expected_counts());
        }
        assert!(IdealTriangulation::seed(&surf(0, &[4])).is_err());
        assert!(IdealTriangulation::seed(&surf(0, &[3])).is_err());
    }

    #[test]
    fn validation_reports_named_failures() {
        let t = IdealTriangulation::polygon(5, &[(0, 2), (0, 3)]).unwrap();
        assert!(t.validate().passed());
        let cut = t.without_arc(0);
        assert!(cut.validate().failed("involution"));
        let report = validate_triangulation(&t, &surf(1, &[3]));
        assert!(report.failed("euler"));
        assert!(!report.passed());
    }

    #[test]
    fn pentagon_flip() {
        let t = IdealTriangulation::polygon(5, &[(0, 2), (2, 4)]).unwrap();
        let f = t.flip(0).unwrap();
        assert_eq!(f.arc_endpoints(), vec![(1, 4), (2, 4)]);
        assert!(f.validate().passed());
        assert_eq!(f.flip(0).unwrap().labeled_form(), t.labeled_form());
        assert!(matches!(t.flip(7), Err(Error::Argument(_))));
    }

    #[test]
    fn self_folded_flip_is_undefined() {
        let mut t = IdealTriangulation::polygon(3, &[]).unwrap();
        t.triangles[0].arcs = [Some(0), Some(0), None];
        t.arc_count = 1;
        assert_eq!(t.flip(0), Err(Error::FlipUndefined(0)));
        assert!(t.validate().failed("no_self_folded"));
    }

    #[test]
    fn flips_preserve_validity_and_are_involutions() {
        for &(g, d) in SURFACES {
            let s = surf(g, d);
            let graph = triangulation_graph(&IdealTriangulation::seed(&s).unwrap(), Some(2)).unwrap();
            for v in &graph.vertices {
                for a in 0..v.tri.arc_count {
                    let f = v.tri.flip(a).unwrap();
                    assert!(f.validate().passed(), "{s:?}");
                    assert_eq!(f.flip(a).unwrap().labeled_form(), v.tri.labeled_form());
                    let tf = v.flip(&graph.reference, a).unwrap();
                    assert_eq!(tf.flip(&graph.reference, a).unwrap().key(&graph.reference), v.key(&graph.reference));
                }
            }
        }
    }

    #[test]
    fn both_quadrilateral_routes_give_the_same_arc() {
        for &(g, d) in SURFACES {
            let graph = triangulation_graph(&IdealTriangulation::seed(&surf(g, d)).unwrap(), Some(2)).unwrap();
            let r = &graph.reference;
            for v in &graph.vertices {
                for a in 0..v.tri.arc_count {
                    let pos = v.tri.positions(a);
                    let [(t1, s1), (t2, s2)] = pos[..] else { panic!() };
                    let w1 = &v.side_walks[t1];
                    let w2 = &v.side_walks[t2];
                    // x -> p -> y versus x -> q -> y
                    let via_p = r.concat(&w1[(s1 + 2) % 3], &w2[(s2 + 1) % 3]);
                    let via_q = r.concat(&r.reverse(&w1[(s1 + 1) % 3]), &r.reverse(&w2[(s2 + 2) % 3]));
                    assert_eq!(r.classify(&via_p), r.classify(&via_q));
                }
            }
        }
    }

    #[test]
    fn dual_quiver_examples() {
        let q = IdealTriangulation::polygon(5, &[(0, 2), (2, 4)]).unwrap().dual_quiver_with_potential();
        assert_eq!((q.vertices, q.arrows.len(), q.potential.len()), (2, 1, 0));
        let q = IdealTriangulation::polygon(6, &[(0, 2), (0, 3), (0, 4)]).unwrap().dual_quiver_with_potential();
        assert_eq!(q.arrow_counts(), vec![vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]]);
        assert!(q.potential.is_empty());
        let torus = IdealTriangulation::seed(&surf(1, &[3])).unwrap();
        let q = torus.dual_quiver_with_potential();
        assert_eq!(q.vertices, 4);
        assert_eq!(q.potential.len(), torus.interior_triangles());
        assert!(QuiverWithPotential::new(q.vertices, q.arrows.clone(), q.potential.clone()).is_ok());
    }

    #[test]
    fn annulus_kronecker_quiver() {
        let t = IdealTriangulation::seed(&surf(0, &[3, 3])).unwrap();
        let b = t.dual_quiver_with_potential().exchange_matrix().b;
        assert_eq!(b[0][1].abs(), 2);
    }

    #[test]
    fn disc_flip_graphs_match_exchange_graphs() {
        for m in 4..=6 {
            let seed = IdealTriangulation::seed(&surf(0, &[m + 2])).unwrap();
            let g = triangulation_graph(&seed, None).unwrap();
            assert!(!g.frontier);
            let e = exchange_graph(m, 3).unwrap();
            assert!(g.graph.isomorphism_to(&e.graph).is_some(), "m={m}");
            let mut pairs: Vec<_> = g.vertices.iter().map(|v| v.tri.arc_endpoints()).collect();
            pairs.sort();
            let mut expected: Vec<_> = e.vertices.iter().map(|a| a.pairs()).collect();
            expected.sort();
            assert_eq!(pairs, expected);
        }
        let g = triangulation_graph(&IdealTriangulation::seed(&surf(0, &[7])).unwrap(), None).unwrap();
        assert!(g.graph.is_cycle());
        assert_eq!(g.graph.automorphisms().unwrap().order, 10);
        let g = triangulation_graph(&IdealTriangulation::seed(&surf(0, &[8])).unwrap(), None).unwrap();
        assert_eq!(g.graph.vertex_count(), 14);
        assert!((0..14).all(|v| g.graph.degree(v) == 3));
    }

    #[test]
    fn annulus_flip_graph_is_a_line() {
        let seed = IdealTriangulation::seed(&surf(0, &[3, 3])).unwrap();
        for depth in [1, 3, 5] {
            let g = triangulation_graph(&seed, Some(depth)).unwrap();
            assert!(g.frontier);
            assert_eq!(g.graph.vertex_count(), 2 * depth + 1);
            assert_eq!(g.graph.edge_count(), 2 * depth);
            let ends = (0..g.graph.vertex_count()).filter(|&v| g.graph.degree(v) == 1).count();
            assert_eq!(ends, 2);
        }
        // each flip adds one more winding: the walk of the new arc grows
        let g = triangulation_graph(&seed, Some(3)).unwrap();
        let r = &g.reference;
        let mut lengths: Vec<(usize, usize)> = g
            .vertices
            .iter()
            .zip(&g.depth)
            .map(|(v, &d)| {
                let longest = (0..v.tri.arc_count)
                    .map(|a| match v.arc_class(r, a) {
                        ArcClass::Seed(_) => 0,
                        ArcClass::Walk(w) => w.exits.len(),
                    })
                    .max()
                    .unwrap();
                (d, longest)
            })
            .collect();
        lengths.sort();
        assert!(lengths.windows(2).all(|w| w[0].0 == w[1].0 || w[0].1 < w[1].1));
    }

    #[test]
    fn explored_balls_are_regular_inside() {
        for &(g, d) in SURFACES {
            let graph = triangulation_graph(&IdealTriangulation::seed(&surf(g, d)).unwrap(), Some(3)).unwrap();
            let arcs = graph.vertices[0].tri.arc_count;
            for v in 0..graph.graph.vertex_count() {
                if graph.depth[v] < 3 {
                    assert_eq!(graph.graph.degree(v), arcs, "{g} {d:?}");
                }
            }
        }
    }

    #[test]
    fn flip_mutation_compatibility_on_balls() {
        for &(g, d) in SURFACES {
            let graph = triangulation_graph(&IdealTriangulation::seed(&surf(g, d)).unwrap(), Some(3)).unwrap();
            for v in &graph.vertices {
                let q = v.tri.dual_quiver_with_potential();
                assert!(!q.has_loops());
                assert!(!q.has_two_cycles(), "{g} {d:?}");
                assert_eq!(q.potential.len(), v.tri.interior_triangles());
                for a in 0..v.tri.arc_count {
                    assert!(flip_mutation_compatible(&v.tri, a).unwrap());
                }
            }
        }
    }

    #[test]
    fn json_round_trip() {
        for &(g, d) in SURFACES {
            let t = IdealTriangulation::seed(&surf(g, d)).unwrap();
            let v = t.to_json();
            assert_eq!(IdealTriangulation::from_json(&v).unwrap(), t);
        }
        let bad = serde_json::json!({"surface": {"g": 0, "d": [5]}, "triangles": [[0, 1, 2]], "gluings": [[[0, 0]], [[0, 0]]]});
        assert!(matches!(IdealTriangulation::from_json(&bad), Err(Error::Parse(_))));
    }
}
