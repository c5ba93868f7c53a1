//! Morse–Bott–Lefschetz fibrations with torus fibres over the plane: fibre
//! automorphisms with flux, monodromy along paths, matching paths, surgery
//! types and disjointness certificates for matching spheres, plus the
//! strand-forgetting maps on pure braids.
//!
//! Every marker has a branch cut running straight down from it. A point lies
//! on the right of a cut when its `x` is at least the marker's; crossing a cut
//! from left to right applies the marker's transform. All geometry is exact.

use std::fmt;

use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::braid::{braid_eq, BraidWord};
use crate::error::{arg, Error, Result};

pub type Q = BigRational;
pub type Q2 = [Q; 2];
pub type M2 = [[i64; 2]; 2];

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q2(x: i64, y: i64) -> Q2 {
    [q(x), q(y)]
}

fn zero2() -> Q2 {
    [Q::zero(), Q::zero()]
}

fn add2(a: &Q2, b: &Q2) -> Q2 {
    [&a[0] + &b[0], &a[1] + &b[1]]
}

fn sub2(a: &Q2, b: &Q2) -> Q2 {
    [&a[0] - &b[0], &a[1] - &b[1]]
}

fn scale2(k: &Q, a: &Q2) -> Q2 {
    [k * &a[0], k * &a[1]]
}

fn cross(a: &Q2, b: &Q2) -> Q {
    &a[0] * &b[1] - &a[1] * &b[0]
}

fn pair_int(v: [i64; 2], c: &Q2) -> Q {
    q(v[0]) * &c[0] + q(v[1]) * &c[1]
}

fn mat_vec_q(a: &M2, u: &Q2) -> Q2 {
    [q(a[0][0]) * &u[0] + q(a[0][1]) * &u[1], q(a[1][0]) * &u[0] + q(a[1][1]) * &u[1]]
}

fn mat_vec(a: &M2, v: [i64; 2]) -> [i64; 2] {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

fn mat_mul(a: &M2, b: &M2) -> M2 {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn det(a: &M2) -> i64 {
    a[0][0] * a[1][1] - a[0][1] * a[1][0]
}

/// `det(v, w) = v_x w_y - v_y w_x`.
pub fn det2(v: [i64; 2], w: [i64; 2]) -> i64 {
    v[0] * w[1] - v[1] * w[0]
}

fn gcd(a: i64, b: i64) -> i64 {
    num::integer::gcd(a, b)
}

pub fn is_primitive(v: [i64; 2]) -> bool {
    gcd(v[0], v[1]) == 1
}

/// Sign convention for classes: first nonzero coordinate positive.
pub fn normalize_class(v: [i64; 2]) -> [i64; 2] {
    if v[0] < 0 || (v[0] == 0 && v[1] < 0) {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Homology action of the Dehn twist in `v`: `x ↦ x + det(v, x) v`.
pub fn dehn_twist_matrix(v: [i64; 2]) -> Result<M2> {
    if !is_primitive(v) {
        return arg(format!("twist class {v:?} is not primitive"));
    }
    let [a, b] = v;
    Ok([[1 - a * b, a * a], [-b * b, 1 + a * b]])
}

/// Fibre automorphism `x ↦ A x + u` on homology and levels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiberAuto {
    pub a: M2,
    pub u: Q2,
}

impl FiberAuto {
    pub fn new(a: M2, u: Q2) -> Result<Self> {
        if det(&a) != 1 {
            return arg(format!("matrix {a:?} does not have determinant 1"));
        }
        Ok(FiberAuto { a, u })
    }

    pub fn identity() -> Self {
        FiberAuto { a: [[1, 0], [0, 1]], u: zero2() }
    }

    /// `self ∘ other = (A1 A2, u1 + A1 u2)`.
    pub fn compose(&self, other: &FiberAuto) -> FiberAuto {
        FiberAuto { a: mat_mul(&self.a, &other.a), u: add2(&self.u, &mat_vec_q(&self.a, &other.u)) }
    }

    pub fn inverse(&self) -> FiberAuto {
        let [[a, b], [c, d]] = self.a;
        let inv = [[d, -b], [-c, a]];
        let u = mat_vec_q(&inv, &self.u);
        FiberAuto { a: inv, u: [-&u[0], -&u[1]] }
    }

    pub fn to_json(&self) -> Value {
        json!({"matrix": self.a, "flux": [q_str(&self.u[0]), q_str(&self.u[1])]})
    }
}

/// A fibre cycle: primitive class `v` (sign-normalized) at level `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub v: [i64; 2],
    pub c: Q2,
}

impl Cycle {
    pub fn new(v: [i64; 2], c: Q2) -> Result<Self> {
        if !is_primitive(v) {
            return arg(format!("class {v:?} is not primitive"));
        }
        Ok(Cycle { v: normalize_class(v), c })
    }

    pub fn to_json(&self) -> Value {
        json!({"class": self.v, "level": [q_str(&self.c[0]), q_str(&self.c[1])]})
    }
}

/// Class goes to `A v`; the flux adds to the level.
pub fn act_on_cycle(f: &FiberAuto, cyc: &Cycle) -> Cycle {
    Cycle { v: normalize_class(mat_vec(&f.a, cyc.v)), c: add2(&cyc.c, &f.u) }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MarkerKind {
    Twist([i64; 2]),
    Flux(Q2),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Marker {
    pub pos: Q2,
    pub kind: MarkerKind,
}

impl Marker {
    pub fn transform(&self) -> FiberAuto {
        match &self.kind {
            MarkerKind::Twist(v) => FiberAuto { a: dehn_twist_matrix(*v).expect("validated class"), u: zero2() },
            MarkerKind::Flux(u) => FiberAuto { a: [[1, 0], [0, 1]], u: u.clone() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BaseKind {
    Plane,
    Punctured,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fibration {
    pub base: BaseKind,
    pub markers: Vec<Marker>,
}

pub fn q_str(x: &Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn q2_json(p: &Q2) -> Value {
    json!([q_str(&p[0]), q_str(&p[1])])
}

/// Reads an integer, a decimal number or a `"p/q"` string.
pub fn parse_q(v: &Value) -> Result<Q> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(q(i))
            } else {
                let f = n.as_f64().ok_or_else(|| Error::Parse(format!("bad number {n}")))?;
                Q::from_float(f).ok_or_else(|| Error::Parse(format!("bad number {n}")))
            }
        }
        Value::String(s) => s.trim().parse::<Q>().map_err(|_| Error::Parse(format!("bad rational {s:?}"))),
        other => Err(Error::Parse(format!("expected a rational, got {other}"))),
    }
}

pub fn parse_q2(v: &Value) -> Result<Q2> {
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => Ok([parse_q(x)?, parse_q(y)?]),
        _ => Err(Error::Parse(format!("expected a pair, got {v}"))),
    }
}

fn parse_class(v: &Value) -> Result<[i64; 2]> {
    match v.as_array().map(Vec::as_slice) {
        Some([x, y]) => match (x.as_i64(), y.as_i64()) {
            (Some(a), Some(b)) => Ok([a, b]),
            _ => Err(Error::Parse(format!("expected an integer pair, got {v}"))),
        },
        _ => Err(Error::Parse(format!("expected an integer pair, got {v}"))),
    }
}

impl Fibration {
    pub fn new(base: BaseKind, markers: Vec<Marker>) -> Result<Self> {
        for (i, m) in markers.iter().enumerate() {
            if markers[..i].iter().any(|o| o.pos == m.pos) {
                return arg(format!("two markers at {}", q2_json(&m.pos)));
            }
            if let MarkerKind::Twist(v) = m.kind {
                if !is_primitive(v) {
                    return arg(format!("twist class {v:?} is not primitive"));
                }
            }
            if base == BaseKind::Punctured && m.pos == zero2() && matches!(m.kind, MarkerKind::Twist(_)) {
                return arg("the puncture can only carry a flux marker");
            }
        }
        Ok(Fibration { base, markers })
    }

    /// Conifold: `Twist(a)` at -1, `Twist(b)` at 1 over the punctured plane,
    /// optionally deformed by a flux marker at the puncture.
    pub fn conifold(flux: Option<Q2>) -> Fibration {
        let mut markers = vec![
            Marker { pos: q2(-1, 0), kind: MarkerKind::Twist([1, 0]) },
            Marker { pos: q2(1, 0), kind: MarkerKind::Twist([0, 1]) },
        ];
        if let Some(u) = flux {
            markers.insert(1, Marker { pos: zero2(), kind: MarkerKind::Flux(u) });
        }
        Fibration::new(BaseKind::Punctured, markers).expect("fixed layout")
    }

    /// Vanishing cycles `a, b, a`: `Twist(a)` at -1 and 1, `Twist(b)` at `-i`;
    /// the deformation adds a flux marker at `i`.
    pub fn w0(deformation: Option<Q2>) -> Fibration {
        let mut markers = vec![
            Marker { pos: q2(-1, 0), kind: MarkerKind::Twist([1, 0]) },
            Marker { pos: q2(0, -1), kind: MarkerKind::Twist([0, 1]) },
            Marker { pos: q2(1, 0), kind: MarkerKind::Twist([1, 0]) },
        ];
        if let Some(u) = deformation {
            markers.push(Marker { pos: q2(0, 1), kind: MarkerKind::Flux(u) });
        }
        Fibration::new(BaseKind::Plane, markers).expect("fixed layout")
    }

    /// Points a path may only touch at its ends.
    fn forbidden(&self) -> Vec<Q2> {
        let mut pts: Vec<Q2> = self.markers.iter().map(|m| m.pos.clone()).collect();
        if self.base == BaseKind::Punctured && !pts.contains(&zero2()) {
            pts.push(zero2());
        }
        pts
    }

    pub fn to_json(&self) -> Value {
        let markers: Vec<Value> = self
            .markers
            .iter()
            .map(|m| {
                let kind = match &m.kind {
                    MarkerKind::Twist(v) => json!({"twist": v}),
                    MarkerKind::Flux(u) => json!({"flux": q2_json(u)}),
                };
                json!({"pos": q2_json(&m.pos), "kind": kind})
            })
            .collect();
        let base = match self.base {
            BaseKind::Plane => "plane",
            BaseKind::Punctured => "punctured",
        };
        json!({"base": base, "markers": markers})
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let base = match v.get("base").and_then(Value::as_str) {
            Some("plane") => BaseKind::Plane,
            Some("punctured") => BaseKind::Punctured,
            other => return Err(Error::Parse(format!("base must be \"plane\" or \"punctured\", got {other:?}"))),
        };
        let list = v.get("markers").and_then(Value::as_array).ok_or_else(|| Error::Parse("missing markers".into()))?;
        let mut markers = Vec::new();
        for m in list {
            let pos = parse_q2(m.get("pos").ok_or_else(|| Error::Parse("marker without pos".into()))?)?;
            let kind = m.get("kind").ok_or_else(|| Error::Parse("marker without kind".into()))?;
            let kind = if let Some(t) = kind.get("twist") {
                MarkerKind::Twist(parse_class(t)?)
            } else if let Some(f) = kind.get("flux") {
                MarkerKind::Flux(parse_q2(f)?)
            } else {
                return Err(Error::Parse(format!("unknown marker kind {kind}")));
            };
            markers.push(Marker { pos, kind });
        }
        Fibration::new(base, markers)
    }
}

/// Signed cut crossings `(marker, ±1)` along a polyline, in order.
///
/// Touching a marker is an error except at the two ends of the polyline.
pub fn cut_crossings(path: &[Q2], fib: &Fibration) -> Result<Vec<(usize, i8)>> {
    let forbidden = fib.forbidden();
    let last = path.len().saturating_sub(1);
    for (i, w) in path.windows(2).enumerate() {
        for f in &forbidden {
            if on_segment(f, &w[0], &w[1]) {
                let at_end = (i == 0 && *f == w[0]) || (i + 1 == last && *f == w[1]);
                if !at_end {
                    return Err(Error::Geometry(format!("path meets marker at {}", q2_json(f))));
                }
            }
        }
    }
    let mut out = Vec::new();
    for w in path.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let mut hits: Vec<(Q, usize, i8)> = Vec::new();
        for (k, m) in fib.markers.iter().enumerate() {
            let px = &m.pos[0];
            let (ra, rb) = (a[0] >= *px, b[0] >= *px);
            if ra == rb {
                continue;
            }
            let t = (px - &a[0]) / (&b[0] - &a[0]);
            let y = &a[1] + &t * (&b[1] - &a[1]);
            if y < m.pos[1] {
                hits.push((t, k, if rb { 1 } else { -1 }));
            }
        }
        hits.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
        out.extend(hits.into_iter().map(|(_, k, s)| (k, s)));
    }
    Ok(out)
}

fn on_segment(p: &Q2, a: &Q2, b: &Q2) -> bool {
    if !cross(&sub2(b, a), &sub2(p, a)).is_zero() {
        return false;
    }
    let within = |i: usize| {
        let (lo, hi) = if a[i] <= b[i] { (&a[i], &b[i]) } else { (&b[i], &a[i]) };
        *lo <= p[i] && p[i] <= *hi
    };
    within(0) && within(1)
}

/// Monodromy along a polyline: the transform of the first crossing acts first.
pub fn monodromy_along(path: &[Q2], fib: &Fibration) -> Result<FiberAuto> {
    let mut acc = FiberAuto::identity();
    for (k, s) in cut_crossings(path, fib)? {
        let f = fib.markers[k].transform();
        let f = if s > 0 { f } else { f.inverse() };
        acc = f.compose(&acc);
    }
    Ok(acc)
}

/// Transports a cycle along a polyline one crossing at a time, so twists move
/// the class and fluxes add to the level.
pub fn transport(cyc: &Cycle, path: &[Q2], fib: &Fibration) -> Result<Cycle> {
    let mut out = cyc.clone();
    for (k, s) in cut_crossings(path, fib)? {
        let f = fib.markers[k].transform();
        let f = if s > 0 { f } else { f.inverse() };
        out = act_on_cycle(&f, &out);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SurgeryType {
    SphereProduct,
    ThreeSphere,
    LensLike(u64),
}

impl fmt::Display for SurgeryType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SurgeryType::SphereProduct => write!(f, "S1xS2"),
            SurgeryType::ThreeSphere => write!(f, "S3"),
            SurgeryType::LensLike(p) => write!(f, "L({p})"),
        }
    }
}

pub fn surgery_type(v1: [i64; 2], v2: [i64; 2]) -> Result<SurgeryType> {
    if !is_primitive(v1) || !is_primitive(v2) {
        return arg(format!("classes {v1:?}, {v2:?} must be primitive"));
    }
    Ok(match det2(v1, v2).unsigned_abs() {
        0 => SurgeryType::SphereProduct,
        1 => SurgeryType::ThreeSphere,
        p => SurgeryType::LensLike(p),
    })
}

/// A simple polyline between two distinct `Twist` markers. The endpoint data
/// are transported to vertex `mid` and compared there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingPath {
    pub vertices: Vec<Q2>,
    pub mid: usize,
}

enum Meet {
    None,
    Point(Q2),
    Overlap,
}

fn segment_meet(p1: &Q2, p2: &Q2, q1: &Q2, q2: &Q2) -> Meet {
    let r = sub2(p2, p1);
    let s = sub2(q2, q1);
    let qp = sub2(q1, p1);
    let d = cross(&r, &s);
    if !d.is_zero() {
        let t = cross(&qp, &s) / &d;
        let u = cross(&qp, &r) / &d;
        let unit = |x: &Q| !x.is_negative() && *x <= Q::one();
        return if unit(&t) && unit(&u) { Meet::Point(add2(p1, &scale2(&t, &r))) } else { Meet::None };
    }
    if !cross(&qp, &r).is_zero() {
        return Meet::None;
    }
    // collinear: project onto the segment direction
    let rr = &r[0] * &r[0] + &r[1] * &r[1];
    let proj = |x: &Q2| (&sub2(x, p1)[0] * &r[0] + &sub2(x, p1)[1] * &r[1]) / &rr;
    let (mut a, mut b) = (proj(q1), proj(q2));
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let lo = if a > Q::zero() { a } else { Q::zero() };
    let hi = if b < Q::one() { b } else { Q::one() };
    if lo > hi {
        Meet::None
    } else if lo == hi {
        Meet::Point(add2(p1, &scale2(&lo, &r)))
    } else {
        Meet::Overlap
    }
}

impl MatchingPath {
    /// Default comparison point: the middle vertex.
    pub fn new(fib: &Fibration, vertices: Vec<Q2>) -> Result<Self> {
        let mid = vertices.len() / 2;
        Self::with_mid(fib, vertices, mid)
    }

    pub fn with_mid(fib: &Fibration, vertices: Vec<Q2>, mid: usize) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Geometry("a path needs at least two vertices".into()));
        }
        if mid >= vertices.len() {
            return arg(format!("comparison vertex {mid} out of range"));
        }
        let p = MatchingPath { vertices, mid };
        let (s, e) = (p.end_twist(fib, 0)?, p.end_twist(fib, 1)?);
        if s == e {
            return Err(Error::Geometry("a matching path joins two different markers".into()));
        }
        p.check_simple()?;
        cut_crossings(&p.vertices, fib)?;
        Ok(p)
    }

    fn end_twist(&self, fib: &Fibration, end: usize) -> Result<usize> {
        let pt = if end == 0 { &self.vertices[0] } else { self.vertices.last().expect("nonempty") };
        fib.markers
            .iter()
            .position(|m| m.pos == *pt && matches!(m.kind, MarkerKind::Twist(_)))
            .ok_or_else(|| Error::Geometry(format!("path end {} is not a twist marker", q2_json(pt))))
    }

    fn check_simple(&self) -> Result<()> {
        let v = &self.vertices;
        let n = v.len() - 1;
        for i in 0..n {
            if v[i] == v[i + 1] {
                return Err(Error::Geometry("repeated vertex".into()));
            }
            for j in i + 1..n {
                let ok = match segment_meet(&v[i], &v[i + 1], &v[j], &v[j + 1]) {
                    Meet::None => true,
                    Meet::Point(p) => j == i + 1 && p == v[j],
                    Meet::Overlap => false,
                };
                if !ok {
                    return Err(Error::Geometry(format!("path is not simple (segments {i} and {j})")));
                }
            }
        }
        Ok(())
    }

    fn twist_class(&self, fib: &Fibration, end: usize) -> Result<[i64; 2]> {
        match fib.markers[self.end_twist(fib, end)?].kind {
            MarkerKind::Twist(v) => Ok(v),
            MarkerKind::Flux(_) => unreachable!("end_twist only returns twist markers"),
        }
    }

    /// Vertices from the comparison vertex to a point on segment `seg`.
    fn sub_path_to(&self, seg: usize, z: &Q2) -> Vec<Q2> {
        let v = &self.vertices;
        let mut out: Vec<Q2> = if seg >= self.mid {
            v[self.mid..=seg].to_vec()
        } else {
            v[seg + 1..=self.mid].iter().rev().cloned().collect()
        };
        if out.last() != Some(z) {
            out.push(z.clone());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({"vertices": self.vertices.iter().map(q2_json).collect::<Vec<_>>(), "mid": self.mid})
    }

    pub fn from_json(fib: &Fibration, v: &Value) -> Result<Self> {
        let list = v.get("vertices").unwrap_or(v);
        let verts = list
            .as_array()
            .ok_or_else(|| Error::Parse("a path is a vertex list".into()))?
            .iter()
            .map(parse_q2)
            .collect::<Result<Vec<_>>>()?;
        match v.get("mid").and_then(Value::as_u64) {
            Some(m) => MatchingPath::with_mid(fib, verts, m as usize),
            None => MatchingPath::new(fib, verts),
        }
    }
}

/// Endpoint cycles transported to the comparison vertex, the fibre-torus
/// level there and the surgery type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingData {
    pub ends: [Cycle; 2],
    pub level: Q2,
    pub surgery: SurgeryType,
}

impl MatchingData {
    pub fn to_json(&self) -> Value {
        json!({
            "ends": [self.ends[0].to_json(), self.ends[1].to_json()],
            "level": q2_json(&self.level),
            "surgery": self.surgery.to_string(),
        })
    }
}

/// Each end asks the fibre torus to sit where its transported cycle
/// collapses, `⟨v, r⟩ = ⟨v, c⟩`. Independent classes fix `r`; parallel classes
/// match only when both conditions agree.
pub fn matching_data(p: &MatchingPath, fib: &Fibration) -> Result<MatchingData> {
    let v = &p.vertices;
    let start = Cycle::new(p.twist_class(fib, 0)?, zero2())?;
    let end = Cycle::new(p.twist_class(fib, 1)?, zero2())?;
    let e0 = transport(&start, &v[..=p.mid], fib)?;
    let back: Vec<Q2> = v[p.mid..].iter().rev().cloned().collect();
    let e1 = transport(&end, &back, fib)?;
    let surgery = surgery_type(e0.v, e1.v)?;
    let (k0, k1) = (pair_int(e0.v, &e0.c), pair_int(e1.v, &e1.c));
    let d = det2(e0.v, e1.v);
    let level = if d == 0 {
        if k0 != k1 {
            return Err(Error::NotMatching(format!(
                "class {:?}: levels pair to {} and {} at the comparison vertex",
                e0.v,
                q_str(&k0),
                q_str(&k1)
            )));
        }
        e0.c.clone()
    } else {
        // Cramer on [v0; v1] r = (k0, k1)
        let dq = q(d);
        let x = (&k0 * q(e1.v[1]) - &k1 * q(e0.v[1])) / &dq;
        let y = (&k1 * q(e0.v[0]) - &k0 * q(e1.v[0])) / &dq;
        [x, y]
    };
    Ok(MatchingData { ends: [e0, e1], level, surgery })
}

/// Fibre-torus level of the sphere over the point `z` of segment `seg`.
fn level_at(p: &MatchingPath, fib: &Fibration, base: &Q2, seg: usize, z: &Q2) -> Result<Q2> {
    let mut r = base.clone();
    for (k, s) in cut_crossings(&p.sub_path_to(seg, z), fib)? {
        if let MarkerKind::Flux(u) = &fib.markers[k].kind {
            r = if s > 0 { add2(&r, u) } else { sub2(&r, u) };
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommonPoint {
    pub point: Q2,
    pub levels: [Q2; 2],
}

impl CommonPoint {
    fn to_json(&self) -> Value {
        json!({"point": q2_json(&self.point), "levels": [q2_json(&self.levels[0]), q2_json(&self.levels[1])]})
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Disjointness {
    Disjoint { certificate: Vec<CommonPoint> },
    Unknown { reason: String, point: Option<CommonPoint> },
}

impl Disjointness {
    pub fn is_disjoint(&self) -> bool {
        matches!(self, Disjointness::Disjoint { .. })
    }

    pub fn to_json(&self) -> Value {
        match self {
            Disjointness::Disjoint { certificate } => json!({
                "verdict": "disjoint",
                "certificate": certificate.iter().map(CommonPoint::to_json).collect::<Vec<_>>(),
            }),
            Disjointness::Unknown { reason, point } => json!({
                "verdict": "unknown",
                "reason": reason,
                "point": point.as_ref().map(CommonPoint::to_json),
            }),
        }
    }
}

pub fn spheres_disjoint(p1: &MatchingPath, p2: &MatchingPath, fib: &Fibration) -> Result<Disjointness> {
    let base = [matching_data(p1, fib)?.level, matching_data(p2, fib)?.level];
    let paths = [p1, p2];
    let mut certificate: Vec<CommonPoint> = Vec::new();
    let (a, b) = (&p1.vertices, &p2.vertices);
    for i in 0..a.len() - 1 {
        for j in 0..b.len() - 1 {
            let z = match segment_meet(&a[i], &a[i + 1], &b[j], &b[j + 1]) {
                Meet::None => continue,
                Meet::Overlap => {
                    return Ok(Disjointness::Unknown { reason: format!("segments {i} and {j} overlap"), point: None })
                }
                Meet::Point(z) => z,
            };
            if certificate.iter().any(|c| c.point == z) {
                continue;
            }
            let segs = [i, j];
            let mut levels = Vec::with_capacity(2);
            for t in 0..2 {
                levels.push(level_at(paths[t], fib, &base[t], segs[t], &z)?);
            }
            let cp = CommonPoint { point: z, levels: [levels[0].clone(), levels[1].clone()] };
            if cp.levels[0] == cp.levels[1] {
                return Ok(Disjointness::Unknown { reason: "levels coincide over a common point".into(), point: Some(cp) });
            }
            certificate.push(cp);
        }
    }
    certificate.sort_by(|x, y| x.point.cmp(&y.point));
    Ok(Disjointness::Disjoint { certificate })
}

/// A certificate is sound when its points are exactly the common points of the
/// two paths and every listed level pair is unequal.
pub fn verify_certificate(p1: &MatchingPath, p2: &MatchingPath, fib: &Fibration, cert: &[CommonPoint]) -> Result<bool> {
    match spheres_disjoint(p1, p2, fib)? {
        Disjointness::Disjoint { certificate } => {
            let mut given: Vec<CommonPoint> = cert.to_vec();
            given.sort_by(|x, y| x.point.cmp(&y.point));
            Ok(given == certificate && given.iter().all(|c| c.levels[0] != c.levels[1]))
        }
        Disjointness::Unknown { .. } => Ok(false),
    }
}

fn find_layout(fib: &Fibration) -> Result<(Q2, Q2, Q2)> {
    let twists: Vec<&Marker> = fib.markers.iter().filter(|m| matches!(m.kind, MarkerKind::Twist(_))).collect();
    let fluxes: Vec<&Marker> = fib.markers.iter().filter(|m| matches!(m.kind, MarkerKind::Flux(_))).collect();
    if twists.len() != 2 || fluxes.len() != 1 {
        return arg("the wrapped family needs exactly two twist markers and one flux marker");
    }
    let (mut a, mut b) = (twists[0].pos.clone(), twists[1].pos.clone());
    if a[0] > b[0] {
        std::mem::swap(&mut a, &mut b);
    }
    let f = fluxes[0].pos.clone();
    let two = q(2);
    if a[1] != b[1] || f[1] != a[1] || &f[0] * &two != &a[0] + &b[0] || a[0] == b[0] {
        return arg("the wrapped family needs twist, flux, twist equally spaced on a horizontal line");
    }
    Ok((a, f, b))
}

/// `γ_0, …, γ_{n-1}`: `γ_k` leaves the left twist marker, spirals `k` times
/// counterclockwise around it and the flux marker, then runs over the top to
/// the right twist marker. Drawn with the left twist at -1, the flux at 0 and
/// the right twist at 1, then scaled into place.
pub fn wrapped_family(fib: &Fibration, n: usize) -> Result<Vec<MatchingPath>> {
    if n == 0 {
        return arg("the family needs at least one path");
    }
    let (_, f, b) = find_layout(fib)?;
    let h = &b[0] - &f[0];
    let place = |x: Q, y: Q| -> Q2 { [&f[0] + &h * x, &f[1] + &h * y] };
    let nn = n as i64;
    let denom = (nn + 1) * (nn + 1) + 2;
    (0..nn)
        .map(|k| {
            let d = |j: i64| q_frac(j * (nn + 1) + k + 1, denom);
            let mut verts = vec![place(q(-1), q(0))];
            for j in 1..=k {
                let dj = d(j);
                let top = if j == 1 { &dj * q_frac(k + 1, nn + 1) } else { dj.clone() };
                verts.push(place(q(-1) - &dj, top));
                verts.push(place(q(-1) - &dj, -dj.clone()));
                verts.push(place(dj.clone(), -dj.clone()));
                verts.push(place(dj.clone(), dj.clone()));
            }
            let exit_x = if k == 0 { q(-1) } else { d(k) };
            verts.push(place(exit_x, q(1) + q_frac(k + 1, nn + 1)));
            let mid = verts.len() - 1;
            verts.push(place(q(1), q(0)));
            MatchingPath::with_mid(fib, verts, mid)
        })
        .collect()
}

/// Verdicts for every pair `i < j` of a family, computed in parallel.
pub fn family_verdicts(fib: &Fibration, paths: &[MatchingPath]) -> Result<Vec<((usize, usize), Disjointness)>> {
    let pairs: Vec<(usize, usize)> = (0..paths.len()).flat_map(|i| (i + 1..paths.len()).map(move |j| (i, j))).collect();
    pairs
        .par_iter()
        .map(|&(i, j)| Ok(((i, j), spheres_disjoint(&paths[i], &paths[j], fib)?)))
        .collect()
}

/// `A_{ij}`: strand `i` goes once around strand `j` in front of the strands between.
pub fn pure_generator(strands: usize, i: usize, j: usize) -> Result<BraidWord> {
    if !(1 <= i && i < j && j <= strands) {
        return arg(format!("need 1 ≤ i < j ≤ {strands}, got ({i}, {j})"));
    }
    let mut letters: Vec<(usize, i8)> = (i + 1..j).rev().map(|k| (k, 1)).collect();
    letters.extend([(i, 1), (i, 1)]);
    letters.extend((i + 1..j).map(|k| (k, -1)));
    BraidWord::new(strands, letters)
}

/// Deletes strand `strand` (1-based) from a pure braid.
pub fn forget_strand(w: &BraidWord, strand: usize) -> Result<BraidWord> {
    if w.strands < 2 || !(1..=w.strands).contains(&strand) {
        return arg(format!("strand {strand} out of range for {} strands", w.strands));
    }
    if !w.is_pure() {
        return arg(format!("{w} is not a pure braid"));
    }
    let mut pos = strand;
    let mut letters = Vec::new();
    for &(i, e) in &w.letters {
        if pos == i {
            pos = i + 1;
        } else if pos == i + 1 {
            pos = i;
        } else {
            letters.push((if i > pos { i - 1 } else { i }, e));
        }
    }
    BraidWord::new(w.strands - 1, letters)
}

/// The two forgettings used by [`in_kernel`]: strand 1 plays the puncture, so
/// the moving points are strands 2 and 3.
pub const DEFAULT_FORGET_PAIR: (usize, usize) = (2, 3);

pub fn in_kernel_with(w: &BraidWord, pair: (usize, usize)) -> Result<bool> {
    let trivial = |s| -> Result<bool> {
        let f = forget_strand(w, s)?;
        Ok(braid_eq(&f, &BraidWord::identity(f.strands)))
    };
    Ok(trivial(pair.0)? && trivial(pair.1)?)
}

pub fn in_kernel(w: &BraidWord) -> Result<bool> {
    in_kernel_with(w, DEFAULT_FORGET_PAIR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(list: &[(i64, i64)]) -> Vec<Q2> {
        list.iter().map(|&(x, y)| q2(x, y)).collect()
    }

    fn square_loop(cx: i64, cy: i64) -> Vec<Q2> {
        // counterclockwise, starting right of the centre
        pts(&[(cx + 1, cy), (cx + 1, cy + 1), (cx - 1, cy + 1), (cx - 1, cy - 1), (cx + 1, cy - 1), (cx + 1, cy)])
    }

    fn st() -> Q2 {
        [q_frac(1, 2), q(3)]
    }

    #[test]
    fn dehn_twists() {
        assert_eq!(dehn_twist_matrix([1, 0]).unwrap(), [[1, 1], [0, 1]]);
        assert_eq!(dehn_twist_matrix([0, 1]).unwrap(), [[1, 0], [-1, 1]]);
        assert!(dehn_twist_matrix([2, 0]).is_err());
        for v in [[1, 0], [0, 1], [2, 3], [-1, 4], [5, -2]] {
            let t = dehn_twist_matrix(v).unwrap();
            assert_eq!(mat_vec(&t, v), v);
            assert_eq!(det(&t), 1);
        }
    }

    #[test]
    fn cycle_action() {
        let c = Cycle::new([1, 0], q2(2, 5)).unwrap();
        let f = FiberAuto::new([[1, 0], [0, 1]], st()).unwrap();
        assert_eq!(act_on_cycle(&f, &c).c, add2(&q2(2, 5), &st()));
        let tw = FiberAuto::new(dehn_twist_matrix([1, 0]).unwrap(), zero2()).unwrap();
        assert_eq!(act_on_cycle(&tw, &c), c);
        assert_eq!(Cycle::new([-1, 2], zero2()).unwrap().v, [1, -2]);
        assert!(FiberAuto::new([[2, 0], [0, 1]], zero2()).is_err());
    }

    #[test]
    fn loops_around_markers() {
        let fib = Fibration::conifold(Some(st()));
        assert_eq!(monodromy_along(&pts(&[(-1, 3), (1, 3)]), &fib).unwrap(), FiberAuto::identity());
        let around_a = monodromy_along(&square_loop(-1, 0).iter().map(|p| [&p[0] / q(3) - q_frac(2, 3), &p[1] / q(3)]).collect::<Vec<_>>(), &fib).unwrap();
        assert_eq!(around_a, FiberAuto { a: [[1, 1], [0, 1]], u: zero2() });
        let small: Vec<Q2> = square_loop(0, 0).iter().map(|p| [&p[0] / q(2), &p[1] / q(2)]).collect();
        assert_eq!(monodromy_along(&small, &fib).unwrap(), FiberAuto { a: [[1, 0], [0, 1]], u: st() });
        // k-fold loop: the fluxes add
        for k in 1..5usize {
            let mut path = small.clone();
            for _ in 1..k {
                path.extend_from_slice(&small[1..]);
            }
            let cyc = transport(&Cycle::new([1, 0], zero2()).unwrap(), &path, &fib).unwrap();
            assert_eq!(cyc.c, scale2(&q(k as i64), &st()));
        }
        assert!(matches!(monodromy_along(&pts(&[(-2, 0), (2, 1)]), &fib), Ok(_)));
        assert!(matches!(monodromy_along(&pts(&[(-2, 0), (0, 0), (2, 1)]), &fib), Err(Error::Geometry(_))));
    }

    #[test]
    fn surgery_types() {
        assert_eq!(surgery_type([1, 0], [0, 1]).unwrap(), SurgeryType::ThreeSphere);
        assert_eq!(surgery_type([1, 0], [1, 0]).unwrap(), SurgeryType::SphereProduct);
        assert_eq!(surgery_type([1, 0], [-1, 0]).unwrap(), SurgeryType::SphereProduct);
        assert_eq!(surgery_type([1, 1], [1, -1]).unwrap(), SurgeryType::LensLike(2));
        assert!(surgery_type([2, 2], [1, 0]).is_err());
    }

    fn upper_half(fib: &Fibration) -> MatchingPath {
        MatchingPath::new(fib, pts(&[(-1, 0), (-1, 1), (1, 1), (1, 0)])).unwrap()
    }

    fn lower_half(fib: &Fibration) -> MatchingPath {
        let v = vec![q2(-1, 0), q2(-1, -1), [q_frac(1, 2), q(-1)], q2(1, 0)];
        MatchingPath::with_mid(fib, v, 2).unwrap()
    }

    #[test]
    fn conifold_matching() {
        let fib = Fibration::conifold(None);
        let md = matching_data(&upper_half(&fib), &fib).unwrap();
        assert_eq!((md.ends[0].v, md.ends[1].v), ([1, 0], [0, 1]));
        assert_eq!(md.level, zero2());
        assert_eq!(md.surgery, SurgeryType::ThreeSphere);

        let deformed = Fibration::conifold(Some(st()));
        let up = matching_data(&upper_half(&deformed), &deformed).unwrap();
        assert_eq!(up.level, zero2());
        let low = matching_data(&lower_half(&deformed), &deformed).unwrap();
        // only the left transport crosses the flux cut
        assert_eq!(low.ends[0].c, st());
        assert_eq!(low.ends[1].c, zero2());
        assert_eq!(low.surgery, SurgeryType::ThreeSphere);
        assert_eq!(low.level, [st()[0].clone(), Q::zero()]);
    }

    #[test]
    fn w0_matching() {
        let straight = pts(&[(-1, 0), (1, 0)]);
        let fib = Fibration::w0(None);
        let p = MatchingPath::new(&fib, straight.clone()).unwrap();
        let md = matching_data(&p, &fib).unwrap();
        assert_eq!((md.ends[0].v, md.ends[1].v), ([1, 0], [1, 0]));
        assert_eq!(md.surgery, SurgeryType::SphereProduct);

        let deformed = Fibration::w0(Some(st()));
        let p = MatchingPath::new(&deformed, straight).unwrap();
        assert!(matches!(matching_data(&p, &deformed), Err(Error::NotMatching(_))));
        // a flux with zero pairing against a keeps the sphere
        let tangent = Fibration::w0(Some([Q::zero(), q(1)]));
        let p = MatchingPath::new(&tangent, pts(&[(-1, 0), (1, 0)])).unwrap();
        assert_eq!(matching_data(&p, &tangent).unwrap().surgery, SurgeryType::SphereProduct);
    }

    #[test]
    fn path_validation() {
        let fib = Fibration::conifold(None);
        assert!(matches!(MatchingPath::new(&fib, pts(&[(-1, 0), (1, 0)])), Err(Error::Geometry(_))));
        assert!(MatchingPath::new(&fib, pts(&[(-1, 0), (-1, 1)])).is_err());
        assert!(MatchingPath::new(&fib, pts(&[(-1, 0), (0, 2), (0, -2), (-2, 2), (1, 0)])).is_err());
        assert!(Fibration::new(BaseKind::Punctured, vec![Marker { pos: zero2(), kind: MarkerKind::Twist([1, 0]) }]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let fib = Fibration::conifold(Some(st()));
        let back = Fibration::from_json(&fib.to_json()).unwrap();
        assert_eq!(back, fib);
        let text = r#"{"base":"plane","markers":[{"pos":[0.5,"1/3"],"kind":{"flux":[1,2]}}]}"#;
        let f = Fibration::from_json(&serde_json::from_str(text).unwrap()).unwrap();
        assert_eq!(f.markers[0].pos, [q_frac(1, 2), q_frac(1, 3)]);
        let p = upper_half(&fib);
        assert_eq!(MatchingPath::from_json(&fib, &p.to_json()).unwrap(), p);
    }

    #[test]
    fn base_disjoint_and_symmetric() {
        let fib = Fibration::conifold(None);
        let (up, low) = (upper_half(&fib), lower_half(&fib));
        // the two halves share both endpoints, where every level is zero
        assert!(!spheres_disjoint(&up, &low, &fib).unwrap().is_disjoint());
        let four = Fibration::new(
            BaseKind::Plane,
            vec![
                Marker { pos: q2(-1, 0), kind: MarkerKind::Twist([1, 0]) },
                Marker { pos: q2(1, 0), kind: MarkerKind::Twist([0, 1]) },
                Marker { pos: q2(-1, 5), kind: MarkerKind::Twist([1, 0]) },
                Marker { pos: q2(1, 5), kind: MarkerKind::Twist([0, 1]) },
            ],
        )
        .unwrap();
        let p = MatchingPath::new(&four, pts(&[(-1, 0), (1, 0)])).unwrap();
        let r = MatchingPath::new(&four, pts(&[(-1, 5), (1, 5)])).unwrap();
        assert_eq!(spheres_disjoint(&p, &r, &four).unwrap(), Disjointness::Disjoint { certificate: vec![] });
    }

    #[test]
    fn wrapped_families() {
        let fib = Fibration::conifold(Some(q2(1, 1)));
        for n in [1usize, 3, 10] {
            let fam = wrapped_family(&fib, n).unwrap();
            assert_eq!(fam.len(), n);
            for (k, p) in fam.iter().enumerate() {
                let md = matching_data(p, &fib).unwrap();
                assert_eq!(md.surgery, SurgeryType::ThreeSphere);
                assert_eq!(md.ends[0].c, q2(k as i64, k as i64));
            }
            let verdicts = family_verdicts(&fib, &fam).unwrap();
            assert_eq!(verdicts.len(), n * (n - 1) / 2);
            for ((i, j), v) in &verdicts {
                let Disjointness::Disjoint { certificate } = v else { panic!("pair {i},{j}: {v:?}") };
                assert!(certificate.len() >= 2);
                assert!(verify_certificate(&fam[*i], &fam[*j], &fib, certificate).unwrap());
                assert_eq!(spheres_disjoint(&fam[*j], &fam[*i], &fib).unwrap().is_disjoint(), true);
            }
        }
        let flat = Fibration::conifold(Some(q2(0, 0)));
        let fam = wrapped_family(&flat, 3).unwrap();
        for (_, v) in family_verdicts(&flat, &fam).unwrap() {
            assert!(!v.is_disjoint());
        }
        assert!(wrapped_family(&Fibration::conifold(None), 2).is_err());
        assert!(wrapped_family(&fib, 0).is_err());
    }

    #[test]
    fn forgetting_strands() {
        let a12 = pure_generator(3, 1, 2).unwrap();
        let a13 = pure_generator(3, 1, 3).unwrap();
        let a23 = pure_generator(3, 2, 3).unwrap();
        assert_eq!(a13.to_string(), BraidWord::parse(3, "s2 s1 s1 S2").unwrap().to_string());
        let sigma_sq = BraidWord::parse(2, "s1 s1").unwrap();
        assert!(braid_eq(&forget_strand(&a12, 3).unwrap(), &sigma_sq));
        assert!(braid_eq(&forget_strand(&a23, 3).unwrap(), &BraidWord::identity(2)));
        assert!(braid_eq(&forget_strand(&a13, 2).unwrap(), &sigma_sq));
        assert!(braid_eq(&forget_strand(&a23, 1).unwrap(), &sigma_sq));
        assert!(forget_strand(&BraidWord::sigma(3, 1).unwrap(), 1).is_err());
        let c = BraidWord::commutator(&a12, &a23).unwrap();
        for pair in [(1, 2), (1, 3), (2, 3)] {
            assert!(in_kernel_with(&c, pair).unwrap());
        }
        assert!(!braid_eq(&c, &BraidWord::identity(3)));
        assert!(!in_kernel(&a12).unwrap());
        assert!(!in_kernel(&a13).unwrap());
        // both moving points survive neither forgetting
        assert!(in_kernel(&a23).unwrap());
        assert!(!in_kernel_with(&a23, (1, 2)).unwrap());
    }

    fn arb_auto() -> impl Strategy<Value = FiberAuto> {
        (prop::collection::vec((0usize..4, any::<bool>()), 0..5), -5i64..5, -5i64..5, 1i64..4).prop_map(|(ws, s, t, d)| {
            let gens = [[1, 0], [0, 1], [1, 1], [1, -1]];
            let mut acc = FiberAuto { a: [[1, 0], [0, 1]], u: [q_frac(s, d), q_frac(t, d)] };
            for (g, inv) in ws {
                let f = FiberAuto { a: dehn_twist_matrix(gens[g]).unwrap(), u: zero2() };
                let f = if inv { f.inverse() } else { f };
                acc = acc.compose(&f);
            }
            acc
        })
    }

    fn pure_word() -> impl Strategy<Value = BraidWord> {
        prop::collection::vec((0usize..3, any::<bool>()), 0..5).prop_map(|gs| {
            let mut w = BraidWord::identity(3);
            for (g, inv) in gs {
                let (i, j) = [(1, 2), (1, 3), (2, 3)][g];
                let a = pure_generator(3, i, j).unwrap();
                w = w.mul(&if inv { a.inverse() } else { a }).unwrap();
            }
            w
        })
    }

    proptest! {
        #[test]
        fn composition_is_a_group_law(f in arb_auto(), g in arb_auto(), h in arb_auto()) {
            prop_assert_eq!(f.compose(&g).compose(&h), f.compose(&g.compose(&h)));
            prop_assert_eq!(f.compose(&FiberAuto::identity()), f.clone());
            prop_assert_eq!(f.compose(&f.inverse()), FiberAuto::identity());
            prop_assert_eq!(det(&f.compose(&g).a), 1);
        }

        #[test]
        fn monodromy_is_homotopy_invariant(xs in prop::collection::vec(-7i64..8, 3), cuts in 1usize..4) {
            // a loop based at (3, 4) through three random heights on the left, refined `cuts` times
            let fib = Fibration::conifold(Some(st()));
            let mut loop_: Vec<Q2> = vec![q2(3, 4), q2(-3, 4)];
            for &y in &xs {
                loop_.push([q(-3), q_frac(y, 2)]);
            }
            loop_.extend([q2(-3, -5), q2(3, -5), q2(3, 4)]);
            let m = monodromy_along(&loop_, &fib).unwrap();
            let mut fine = vec![loop_[0].clone()];
            for w in loop_.windows(2) {
                for s in 1..=cuts as i64 {
                    let t = q_frac(s, cuts as i64);
                    fine.push(add2(&w[0], &scale2(&t, &sub2(&w[1], &w[0]))));
                }
            }
            prop_assert_eq!(monodromy_along(&fine, &fib).unwrap(), m.clone());
            // the big loop encloses all three markers
            let expected = fib.markers[2].transform().compose(&fib.markers[1].transform()).compose(&fib.markers[0].transform());
            prop_assert_eq!(m, expected);
        }

        #[test]
        fn kernel_is_conjugation_stable(g in pure_word(), h in pure_word()) {
            let a12 = pure_generator(3, 1, 2).unwrap();
            let a23 = pure_generator(3, 2, 3).unwrap();
            let c = BraidWord::commutator(&a12, &a23).unwrap().mul(&BraidWord::commutator(&h, &a12).unwrap()).unwrap();
            let conj = g.mul(&c).unwrap().mul(&g.inverse()).unwrap();
            prop_assert_eq!(in_kernel(&c).unwrap(), in_kernel(&conj).unwrap());
            prop_assert!(in_kernel(&BraidWord::commutator(&a12, &a23).unwrap()).unwrap());
        }
    }
}
