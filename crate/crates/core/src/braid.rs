//! Braid words, the Artin action on the free group, arcs in the punctured disc
//! and the rank classification of pairs of arcs.
//!
//! Punctures sit on the real line at `1..=m`. The free generator `x_j` is the
//! loop from a base point at the top of the disc around puncture `j`
//! counterclockwise; `σ_i` acts by `x_i ↦ x_i x_{i+1} x_i⁻¹`, `x_{i+1} ↦ x_i`.
//! Words act right to left: `(w1 w2)·x = w1·(w2·x)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

/// A word in the Artin generators `σ_1..σ_{m-1}` and their inverses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BraidWord {
    pub strands: usize,
    /// `(i, ±1)` with `1 <= i < strands`.
    pub letters: Vec<(usize, i8)>,
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<(usize, i8)>) -> Result<Self> {
        if strands == 0 {
            return arg("a braid needs at least one strand");
        }
        for &(i, e) in &letters {
            if i == 0 || i >= strands || (e != 1 && e != -1) {
                return arg(format!("letter ({i},{e}) is not a generator of B_{strands}"));
            }
        }
        Ok(BraidWord { strands, letters })
    }

    pub fn identity(strands: usize) -> Self {
        BraidWord { strands, letters: Vec::new() }
    }

    pub fn sigma(strands: usize, i: usize) -> Result<Self> {
        BraidWord::new(strands, vec![(i, 1)])
    }

    /// Parses `"s1 S2 s1"` (capital letter = inverse); separators are optional.
    pub fn parse(strands: usize, text: &str) -> Result<Self> {
        let mut letters = Vec::new();
        let mut chars = text.chars().peekable();
        while let Some(c) = chars.next() {
            let sign = match c {
                's' => 1,
                'S' => -1,
                c if c.is_whitespace() || c == '.' || c == '*' || c == ',' => continue,
                other => return Err(Error::Parse(format!("unexpected character {other:?} in braid word"))),
            };
            let mut digits = String::new();
            while let Some(d) = chars.peek().filter(|d| d.is_ascii_digit()) {
                digits.push(*d);
                chars.next();
            }
            let i: usize = digits.parse().map_err(|_| Error::Parse(format!("generator index missing in {text:?}")))?;
            letters.push((i, sign));
        }
        BraidWord::new(strands, letters)
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    fn same_strands(&self, other: &BraidWord) -> Result<()> {
        if self.strands != other.strands {
            return arg(format!("strand counts differ: {} vs {}", self.strands, other.strands));
        }
        Ok(())
    }

    /// Concatenation `self · other`.
    pub fn mul(&self, other: &BraidWord) -> Result<BraidWord> {
        self.same_strands(other)?;
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { strands: self.strands, letters })
    }

    pub fn inverse(&self) -> BraidWord {
        let letters = self.letters.iter().rev().map(|&(i, e)| (i, -e)).collect();
        BraidWord { strands: self.strands, letters }
    }

    pub fn pow(&self, k: i64) -> BraidWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        BraidWord { strands: self.strands, letters }
    }

    /// Commutator `u v u⁻¹ v⁻¹`.
    pub fn commutator(u: &BraidWord, v: &BraidWord) -> Result<BraidWord> {
        u.mul(v)?.mul(&u.inverse())?.mul(&v.inverse())
    }

    /// The full twist `Δ² = (σ_1 ⋯ σ_{m-1})^m`, central in `B_m`.
    pub fn full_twist(strands: usize) -> BraidWord {
        let row: Vec<(usize, i8)> = (1..strands).map(|i| (i, 1)).collect();
        BraidWord { strands, letters: row.repeat(strands) }
    }

    /// Uniform random word of the given length.
    pub fn random<R: Rng + ?Sized>(strands: usize, len: usize, rng: &mut R) -> BraidWord {
        let letters = if strands < 2 {
            Vec::new()
        } else {
            (0..len).map(|_| (rng.gen_range(1..strands), if rng.gen_bool(0.5) { 1 } else { -1 })).collect()
        };
        BraidWord { strands, letters }
    }

    /// Image of every generator `x_1..x_m`.
    pub fn generator_images(&self) -> Vec<FreeWord> {
        (1..=self.strands).map(|j| artin_apply_unchecked(self, &FreeWord::generator(j as i32))).collect()
    }

    /// Underlying permutation `π` with `π(uv) = π(u) ∘ π(v)`; entry `j - 1` holds `π(j)`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut perm: Vec<usize> = (1..=self.strands).collect();
        for &(i, _) in self.letters.iter().rev() {
            for p in perm.iter_mut() {
                if *p == i {
                    *p = i + 1;
                } else if *p == i + 1 {
                    *p = i;
                }
            }
        }
        perm
    }

    pub fn is_pure(&self) -> bool {
        self.permutation().iter().enumerate().all(|(j, &p)| p == j + 1)
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.letters.iter().map(|&(i, e)| format!("{}{i}", if e > 0 { 's' } else { 'S' })).collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// A freely reduced word in `x_1..x_m`; letter `±j` stands for `x_j^{±1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FreeWord(pub Vec<i32>);

impl FreeWord {
    pub fn generator(j: i32) -> Self {
        FreeWord(vec![j])
    }

    /// Freely reduces any letter sequence.
    pub fn from_letters(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for l in letters {
            if out.last() == Some(&-l) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        FreeWord(out)
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        FreeWord::from_letters(self.0.iter().chain(&other.0).copied())
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| -l).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> =
            self.0.iter().map(|&l| if l > 0 { format!("x{l}") } else { format!("x{}^-1", -l) }).collect();
        write!(f, "{}", parts.join(" "))
    }
}

fn letter_image(i: usize, e: i8, j: i32) -> Vec<i32> {
    let (i, a) = (i as i32, j.abs());
    let image = if e > 0 {
        if a == i {
            vec![i, i + 1, -i]
        } else if a == i + 1 {
            vec![i]
        } else {
            vec![a]
        }
    } else if a == i {
        vec![i + 1]
    } else if a == i + 1 {
        vec![-(i + 1), i, i + 1]
    } else {
        vec![a]
    };
    if j > 0 {
        image
    } else {
        image.iter().rev().map(|l| -l).collect()
    }
}

fn artin_apply_unchecked(w: &BraidWord, x: &FreeWord) -> FreeWord {
    let mut cur = x.clone();
    for &(i, e) in w.letters.iter().rev() {
        cur = FreeWord::from_letters(cur.0.iter().flat_map(|&l| letter_image(i, e, l)));
    }
    cur
}

/// Artin action of `w` on a word in `x_1..x_m`.
pub fn artin_apply(w: &BraidWord, x: &FreeWord) -> Result<FreeWord> {
    if let Some(l) = x.0.iter().find(|l| l.unsigned_abs() as usize > w.strands || **l == 0) {
        return arg(format!("free letter {l} outside x_1..x_{}", w.strands));
    }
    Ok(artin_apply_unchecked(w, x))
}

/// Equality in the braid group, decided by the (faithful) Artin action.
pub fn braid_eq(w1: &BraidWord, w2: &BraidWord) -> bool {
    w1.strands == w2.strands && w1.generator_images() == w2.generator_images()
}

/// The arc `β · b_i`, where `b_i` is the straight segment from puncture `i` to `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Arc {
    pub braid: BraidWord,
    pub base: usize,
}

#[derive(Serialize, Deserialize)]
struct ArcJson {
    braid: String,
    base: usize,
}

impl Arc {
    pub fn new(braid: BraidWord, base: usize) -> Result<Self> {
        if base == 0 || base >= braid.strands {
            return arg(format!("base arc b_{base} does not exist with {} strands", braid.strands));
        }
        Ok(Arc { braid, base })
    }

    pub fn base_arc(strands: usize, i: usize) -> Result<Self> {
        Arc::new(BraidWord::identity(strands), i)
    }

    pub fn strands(&self) -> usize {
        self.braid.strands
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ArcJson { braid: self.braid.to_string(), base: self.base }).expect("arc serializes")
    }

    pub fn from_json(strands: usize, value: &serde_json::Value) -> Result<Self> {
        let doc: ArcJson = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        Arc::new(BraidWord::parse(strands, &doc.braid)?, doc.base)
    }
}

/// `w · a`: prepends `w` to the braid of `a`.
pub fn apply_to_arc(w: &BraidWord, a: &Arc) -> Result<Arc> {
    Ok(Arc { braid: w.mul(&a.braid)?, base: a.base })
}

/// Endpoint punctures, sorted.
pub fn endpoints(a: &Arc) -> (usize, usize) {
    let perm = a.braid.permutation();
    let (p, q) = (perm[a.base - 1], perm[a.base]);
    (p.min(q), p.max(q))
}

/// Half-twist along `a`: `β σ_i β⁻¹`.
pub fn braid_twist(a: &Arc) -> BraidWord {
    let mid = BraidWord { strands: a.strands(), letters: vec![(a.base, 1)] };
    let mut letters = a.braid.letters.clone();
    letters.extend(mid.letters);
    letters.extend(a.braid.inverse().letters);
    BraidWord { strands: a.strands(), letters }
}

/// Isotopy of arcs: same endpoints and equal half-twists.
pub fn arc_eq(a1: &Arc, a2: &Arc) -> bool {
    a1.strands() == a2.strands() && endpoints(a1) == endpoints(a2) && braid_eq(&braid_twist(a1), &braid_twist(a2))
}

/// Splits `c x_p c⁻¹` into `(c, p)`.
fn conjugate_parts(w: &FreeWord) -> (Vec<i32>, i32) {
    let n = w.0.len();
    debug_assert!(n % 2 == 1, "image of a generator is a conjugate of a generator");
    let mid = w.0[n / 2];
    (w.0[..n / 2].to_vec(), mid)
}

/// Crossings of the real line by `β · b_i`, as segment indices.
///
/// Segment `s_j` joins puncture `j` to `j + 1` (`s_0` and `s_m` run to the
/// boundary). The sequence is reduced, so it realizes the minimal intersection
/// with every segment at once.
pub fn real_line_crossings(a: &Arc) -> Vec<usize> {
    let images = a.braid.generator_images();
    let (c_p, p) = conjugate_parts(&images[a.base - 1]);
    let (c_q, q) = conjugate_parts(&images[a.base]);
    let (p, q) = (p.abs(), q.abs());
    // the arc is homotopic to the tail to p reversed, then the tail to q
    let mut word = FreeWord(c_p).inverse().mul(&FreeWord(c_q)).0;
    // winding around an endpoint is an isotopy
    let lead = word.iter().take_while(|l| l.abs() == p).count();
    word.drain(..lead);
    let trail = word.iter().rev().take_while(|l| l.abs() == q).count();
    word.truncate(word.len() - trail);
    let segments = rays_to_segments(&word);
    reduce_segments(segments, p as usize, q as usize)
}

/// Converts crossings of the downward rays below each puncture into crossings
/// of the real-line segments. Lower regions `L_0..L_m` sit between the rays;
/// `x_j` crosses ray `j` from `L_{j-1}` to `L_j`. The path starts and ends above the line.
fn rays_to_segments(word: &[i32]) -> Vec<usize> {
    let mut out = Vec::new();
    // None = upper half, Some(k) = lower region L_k
    let mut region: Option<usize> = None;
    for &l in word {
        let j = l.unsigned_abs() as usize;
        let (from, to) = if l > 0 { (j - 1, j) } else { (j, j - 1) };
        match region {
            None => out.push(from),
            Some(k) if k != from => {
                out.push(k);
                out.push(from);
            }
            Some(_) => {}
        }
        region = Some(to);
    }
    if let Some(k) = region {
        out.push(k);
    }
    out
}

/// Removes bigons (repeated consecutive segments) and half-bigons at the
/// endpoint punctures `p` (start) and `q` (end).
fn reduce_segments(segments: Vec<usize>, p: usize, q: usize) -> Vec<usize> {
    let mut stack: Vec<usize> = Vec::with_capacity(segments.len());
    for s in segments {
        if stack.last() == Some(&s) {
            stack.pop();
        } else {
            stack.push(s);
        }
    }
    let touches = |s: usize, v: usize| s + 1 == v || s == v;
    let start = stack.iter().take_while(|&&s| touches(s, p)).count();
    stack.drain(..start);
    while stack.last().is_some_and(|&s| touches(s, q)) {
        stack.pop();
    }
    stack
}

/// Minimal number of interior intersection points of two arcs.
pub fn interior_intersection(a1: &Arc, a2: &Arc) -> Result<usize> {
    a1.braid.same_strands(&a2.braid)?;
    // move a2 to its base segment
    let moved = Arc { braid: a2.braid.inverse().mul(&a1.braid)?, base: a1.base };
    Ok(real_line_crossings(&moved).iter().filter(|&&s| s == a2.base).count())
}

/// Combinatorial shadow of the Floer rank of two matching spheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RankClass {
    Equal,
    Rank0,
    Rank1,
    Rank2SharedEndpoints,
    Rank2Interior,
    Higher { shared: usize, interior: usize },
}

pub fn hf_rank_class(a1: &Arc, a2: &Arc) -> Result<RankClass> {
    a1.braid.same_strands(&a2.braid)?;
    if arc_eq(a1, a2) {
        return Ok(RankClass::Equal);
    }
    let (e1, e2) = (endpoints(a1), endpoints(a2));
    let shared = [e1.0, e1.1].iter().filter(|v| **v == e2.0 || **v == e2.1).count();
    let interior = interior_intersection(a1, a2)?;
    Ok(match (shared, interior) {
        (0, 0) => RankClass::Rank0,
        (1, 0) => RankClass::Rank1,
        (2, 0) => RankClass::Rank2SharedEndpoints,
        (0, 1) => RankClass::Rank2Interior,
        (shared, interior) => RankClass::Higher { shared, interior },
    })
}

impl FromStr for RankClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Equal" => Ok(RankClass::Equal),
            "Rank0" => Ok(RankClass::Rank0),
            "Rank1" => Ok(RankClass::Rank1),
            "Rank2SharedEndpoints" => Ok(RankClass::Rank2SharedEndpoints),
            "Rank2Interior" => Ok(RankClass::Rank2Interior),
            other => Err(Error::Parse(format!("unknown rank class {other}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(m: usize, s: &str) -> BraidWord {
        BraidWord::parse(m, s).unwrap()
    }

    fn arc(m: usize, s: &str, i: usize) -> Arc {
        Arc::new(w(m, s), i).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let b = w(4, "s1 S3s2");
        assert_eq!(b.letters, vec![(1, 1), (3, -1), (2, 1)]);
        assert_eq!(b.to_string(), "s1 S3 s2");
        assert!(BraidWord::parse(3, "s3").is_err());
        assert!(BraidWord::parse(3, "t1").is_err());
        assert!(BraidWord::parse(3, "s").is_err());
        assert!(w(3, "").is_empty());
    }

    #[test]
    fn generator_rules() {
        let x1 = FreeWord::generator(1);
        assert_eq!(artin_apply(&w(2, "s1"), &x1).unwrap(), FreeWord(vec![1, 2, -1]));
        assert_eq!(artin_apply(&w(2, "S1"), &x1).unwrap(), FreeWord(vec![2]));
        assert!(artin_apply(&w(2, "s1"), &FreeWord::generator(3)).is_err());
    }

    #[test]
    fn relations() {
        assert!(braid_eq(&w(3, "s1 s2 s1"), &w(3, "s2 s1 s2")));
        assert!(braid_eq(&w(4, "s1 s3"), &w(4, "s3 s1")));
        assert!(!braid_eq(&w(3, "s1"), &w(3, "s2")));
        assert!(!braid_eq(&w(3, "s1 s2"), &w(3, "s2 s1")));
        assert!(braid_eq(&w(3, "s1 S1"), &BraidWord::identity(3)));
    }

    #[test]
    fn permutations() {
        assert_eq!(w(3, "s1").permutation(), vec![2, 1, 3]);
        assert_eq!(w(3, "s1 s1").permutation(), vec![1, 2, 3]);
        let p = w(3, "s1 s2").permutation();
        assert!(p.iter().enumerate().all(|(j, &x)| x != j + 1));
    }

    #[test]
    fn arc_examples() {
        assert!(arc_eq(&arc(3, "s1", 1), &Arc::base_arc(3, 1).unwrap()));
        assert_eq!(endpoints(&arc(3, "s2", 1)), (1, 3));
        for m in 3..=5 {
            let delta2 = BraidWord::full_twist(m);
            for i in 1..m {
                let moved = apply_to_arc(&delta2, &Arc::base_arc(m, i).unwrap()).unwrap();
                assert!(arc_eq(&moved, &Arc::base_arc(m, i).unwrap()));
            }
        }
        assert!(!arc_eq(&arc(3, "s2 s2", 1), &Arc::base_arc(3, 1).unwrap()));
    }

    #[test]
    fn twists() {
        assert_eq!(braid_twist(&Arc::base_arc(3, 2).unwrap()), w(3, "s2"));
        let (a, b) = (braid_twist(&Arc::base_arc(3, 1).unwrap()), braid_twist(&Arc::base_arc(3, 2).unwrap()));
        assert!(braid_eq(&a.mul(&b).unwrap().mul(&a).unwrap(), &b.mul(&a).unwrap().mul(&b).unwrap()));
    }

    #[test]
    fn intersection_examples() {
        let b1 = Arc::base_arc(4, 1).unwrap();
        let b2 = Arc::base_arc(4, 2).unwrap();
        let b3 = Arc::base_arc(4, 3).unwrap();
        assert_eq!(interior_intersection(&b1, &b2).unwrap(), 0);
        assert_eq!(interior_intersection(&b1, &b3).unwrap(), 0);
        let (a, c) = (arc(4, "s2", 1), arc(4, "s3", 2));
        assert_eq!((endpoints(&a), endpoints(&c)), ((1, 3), (2, 4)));
        assert_eq!(interior_intersection(&a, &c).unwrap(), 1);
        let wrapped = arc(3, "s2 s2", 1);
        assert_eq!(endpoints(&wrapped), (1, 2));
        assert_eq!(interior_intersection(&Arc::base_arc(3, 1).unwrap(), &wrapped).unwrap(), 0);
    }

    #[test]
    fn rank_classes() {
        let b = |i| Arc::base_arc(4, i).unwrap();
        assert_eq!(hf_rank_class(&b(1), &b(2)).unwrap(), RankClass::Rank1);
        assert_eq!(hf_rank_class(&b(1), &b(3)).unwrap(), RankClass::Rank0);
        assert_eq!(hf_rank_class(&arc(4, "s2", 1), &arc(4, "s3", 2)).unwrap(), RankClass::Rank2Interior);
        assert_eq!(hf_rank_class(&b(1), &arc(4, "s2 s2", 1)).unwrap(), RankClass::Rank2SharedEndpoints);
        assert_eq!(hf_rank_class(&b(1), &arc(4, "s1", 1)).unwrap(), RankClass::Equal);
        assert!(matches!(
            hf_rank_class(&b(1), &arc(4, "s2 s2 s2 s2", 1)).unwrap(),
            RankClass::Higher { shared: 2, interior: 1 }
        ));
    }

    #[test]
    fn json_round_trip() {
        let a = arc(4, "s1 S3", 2);
        assert_eq!(Arc::from_json(4, &a.to_json()).unwrap(), a);
    }

    fn word_strategy() -> impl Strategy<Value = (usize, Vec<(usize, i8)>, Vec<(usize, i8)>)> {
        (3usize..=5).prop_flat_map(|m| {
            let letter = (1..m, prop::bool::ANY).prop_map(|(i, pos)| (i, if pos { 1i8 } else { -1 }));
            (Just(m), prop::collection::vec(letter.clone(), 0..=12), prop::collection::vec(letter, 0..=12))
        })
    }

    proptest! {
        #[test]
        fn action_law((m, u, v) in word_strategy()) {
            let (u, v) = (BraidWord::new(m, u).unwrap(), BraidWord::new(m, v).unwrap());
            let uv = u.mul(&v).unwrap();
            for j in 1..=m as i32 {
                let x = FreeWord::generator(j);
                prop_assert_eq!(artin_apply(&uv, &x).unwrap(), artin_apply(&u, &artin_apply(&v, &x).unwrap()).unwrap());
            }
            prop_assert!(braid_eq(&uv.mul(&uv.inverse()).unwrap(), &BraidWord::identity(m)));
        }

        #[test]
        fn congruence_and_twist_equivariance((m, u, v) in word_strategy(), base in 1usize..3) {
            let (u, v) = (BraidWord::new(m, u).unwrap(), BraidWord::new(m, v).unwrap());
            let rel_l = w(3, "s1 s2 s1");
            let rel_r = w(3, "s2 s1 s2");
            let lift = |b: &BraidWord| BraidWord::new(m, b.letters.clone()).unwrap();
            let (l, r) = (lift(&rel_l), lift(&rel_r));
            prop_assert!(braid_eq(&u.mul(&l).unwrap().mul(&v).unwrap(), &u.mul(&r).unwrap().mul(&v).unwrap()));
            let a = Arc::new(v.clone(), base).unwrap();
            let moved = apply_to_arc(&u, &a).unwrap();
            let conj = u.mul(&braid_twist(&a)).unwrap().mul(&u.inverse()).unwrap();
            prop_assert!(braid_eq(&braid_twist(&moved), &conj));
        }

        #[test]
        fn intersection_symmetric_and_invariant((m, u, v) in word_strategy(), g in prop::collection::vec((1usize..3, prop::bool::ANY), 0..8), i in 1usize..3, j in 1usize..3) {
            let a1 = Arc::new(BraidWord::new(m, u).unwrap(), i).unwrap();
            let a2 = Arc::new(BraidWord::new(m, v).unwrap(), j).unwrap();
            let g = BraidWord::new(m, g.into_iter().map(|(k, s)| (k, if s { 1 } else { -1 })).collect()).unwrap();
            let n = interior_intersection(&a1, &a2).unwrap();
            prop_assert_eq!(n, interior_intersection(&a2, &a1).unwrap());
            let (b1, b2) = (apply_to_arc(&g, &a1).unwrap(), apply_to_arc(&g, &a2).unwrap());
            prop_assert_eq!(n, interior_intersection(&b1, &b2).unwrap());
            let c = hf_rank_class(&a1, &a2).unwrap();
            prop_assert_eq!(c, hf_rank_class(&a2, &a1).unwrap());
            prop_assert_eq!(c, hf_rank_class(&b1, &b2).unwrap());
        }
    }
}
