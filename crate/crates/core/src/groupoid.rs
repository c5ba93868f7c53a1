//! The six-chamber Deligne groupoid of the double bubble: wall-crossing
//! morphisms, their word problem through `B_3`, and the K-theory shadow by
//! reflection matrices.
//!
//! A morphism is written as a gallery: the source chamber followed by the
//! walls crossed in order. Its braid and matrix are taken in functional order,
//! so the last crossing is the leftmost factor.

use std::collections::HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::braid::{braid_eq, BraidWord, FreeWord};
use crate::error::{arg, Error, Result};

/// Chambers in hexagonal order; consecutive chambers share a wall labelled
/// 1, 2, 1, 2, 1, 2 starting from `L | L1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Chamber {
    L,
    L1,
    L12,
    L121,
    L21,
    L2,
}

pub const CHAMBERS: [Chamber; 6] = [Chamber::L, Chamber::L1, Chamber::L12, Chamber::L121, Chamber::L21, Chamber::L2];

/// The base chamber `C_+`.
pub const BASE: Chamber = Chamber::L;

impl Chamber {
    fn index(self) -> usize {
        CHAMBERS.iter().position(|&c| c == self).expect("listed chamber")
    }

    fn wall_after(idx: usize) -> u8 {
        if idx % 2 == 0 {
            1
        } else {
            2
        }
    }

    /// The chamber across the wall labelled `wall`.
    pub fn neighbor(self, wall: u8) -> Chamber {
        let i = self.index();
        if Chamber::wall_after(i) == wall {
            CHAMBERS[(i + 1) % 6]
        } else {
            CHAMBERS[(i + 5) % 6]
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Chamber::L => "L",
            Chamber::L1 => "L1",
            Chamber::L12 => "L12",
            Chamber::L121 => "L121",
            Chamber::L21 => "L21",
            Chamber::L2 => "L2",
        }
    }

    pub fn parse(s: &str) -> Result<Chamber> {
        CHAMBERS
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown chamber {s:?}")))
    }

    /// Walls of a minimal gallery from the base chamber.
    pub fn gallery_from_base(self) -> &'static [u8] {
        match self {
            Chamber::L => &[],
            Chamber::L1 => &[1],
            Chamber::L12 => &[1, 2],
            Chamber::L121 => &[1, 2, 1],
            Chamber::L21 => &[2, 1],
            Chamber::L2 => &[2],
        }
    }

    /// Permutation `s_{c_1} ⋯ s_{c_r}` of the minimal gallery from the base;
    /// entry `j - 1` holds the image of `j`.
    pub fn permutation(self) -> Vec<usize> {
        let mut perm = vec![1, 2, 3];
        for &c in self.gallery_from_base().iter().rev() {
            let i = c as usize;
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
}

/// A gallery of signed wall crossings `Φ_i^{±1}` starting at `source`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupoidMorphism {
    pub source: Chamber,
    /// `(wall, ±1)` in crossing order.
    pub letters: Vec<(u8, i8)>,
}

pub type KMatrix = [[i64; 2]; 2];

pub const IDENTITY: KMatrix = [[1, 0], [0, 1]];
pub const R1: KMatrix = [[-1, 1], [0, 1]];
pub const R2: KMatrix = [[1, 0], [1, -1]];

pub fn mat_mul(a: &KMatrix, b: &KMatrix) -> KMatrix {
    let mut out = [[0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn reflection(wall: u8) -> &'static KMatrix {
    if wall == 1 {
        &R1
    } else {
        &R2
    }
}

impl GroupoidMorphism {
    pub fn new(source: Chamber, letters: Vec<(u8, i8)>) -> Result<Self> {
        if let Some(l) = letters.iter().find(|(w, e)| !(*w == 1 || *w == 2) || !(*e == 1 || *e == -1)) {
            return arg(format!("bad letter {l:?}; walls are 1 or 2, signs are ±1"));
        }
        Ok(GroupoidMorphism { source, letters })
    }

    pub fn identity(c: Chamber) -> Self {
        GroupoidMorphism { source: c, letters: Vec::new() }
    }

    pub fn target(&self) -> Chamber {
        self.letters.iter().fold(self.source, |c, &(w, _)| c.neighbor(w))
    }

    pub fn is_loop(&self) -> bool {
        self.source == self.target()
    }

    /// Braid in `B_3`: each crossing of wall `i` contributes `σ_i^{±1}`.
    pub fn realization(&self) -> BraidWord {
        let letters = self.letters.iter().rev().map(|&(w, e)| (w as usize, e)).collect();
        BraidWord { strands: 3, letters }
    }

    pub fn k_matrix(&self) -> KMatrix {
        self.letters.iter().fold(IDENTITY, |acc, &(w, _)| mat_mul(reflection(w), &acc))
    }

    /// Loops whose braid has trivial permutation.
    pub fn is_pure_loop(&self) -> bool {
        self.is_loop() && self.realization().is_pure()
    }

    /// Parses `"L121: F2 F1 F2"`; inverse letters are written `F1^-1`.
    pub fn parse(text: &str) -> Result<Self> {
        let (src, rest) = text.split_once(':').ok_or_else(|| Error::Parse(format!("missing ':' in {text:?}")))?;
        let source = Chamber::parse(src.trim())?;
        let mut letters = Vec::new();
        for tok in rest.split_whitespace() {
            let (body, sign) = match tok.strip_suffix("^-1") {
                Some(b) => (b, -1),
                None => (tok, 1),
            };
            let wall = match body {
                "F1" => 1,
                "F2" => 2,
                _ => return Err(Error::Parse(format!("unknown letter {tok:?}"))),
            };
            letters.push((wall, sign));
        }
        GroupoidMorphism::new(source, letters)
    }
}

impl fmt::Display for GroupoidMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.source.name())?;
        for &(w, e) in &self.letters {
            write!(f, " F{w}{}", if e < 0 { "^-1" } else { "" })?;
        }
        Ok(())
    }
}

/// `f ∘ g`: first `g`, then `f`.
pub fn compose(f: &GroupoidMorphism, g: &GroupoidMorphism) -> Result<GroupoidMorphism> {
    if g.target() != f.source {
        return arg(format!("cannot compose: {} ends at {}, {} starts at {}", g, g.target().name(), f, f.source.name()));
    }
    let mut letters = g.letters.clone();
    letters.extend_from_slice(&f.letters);
    Ok(GroupoidMorphism { source: g.source, letters })
}

pub fn invert(f: &GroupoidMorphism) -> GroupoidMorphism {
    let letters = f.letters.iter().rev().map(|&(w, e)| (w, -e)).collect();
    GroupoidMorphism { source: f.target(), letters }
}

/// Equality in the groupoid: same ends and equal braids.
pub fn morphism_eq(f: &GroupoidMorphism, g: &GroupoidMorphism) -> Result<bool> {
    if f.source != g.source || f.target() != g.target() {
        return arg("morphisms with different ends cannot be compared");
    }
    Ok(braid_eq(&f.realization(), &g.realization()))
}

pub fn k_matrix(f: &GroupoidMorphism) -> KMatrix {
    f.k_matrix()
}

/// `{I, r1, r2, r1 r2, r2 r1, r1 r2 r1}`.
pub fn six_composites() -> Vec<KMatrix> {
    let r12 = mat_mul(&R1, &R2);
    vec![IDENTITY, R1, R2, r12, mat_mul(&R2, &R1), mat_mul(&r12, &R1)]
}

pub fn is_permutation_matrix(m: &KMatrix) -> bool {
    m.iter().flatten().all(|&x| x == 0 || x == 1)
        && m.iter().all(|row| row.iter().sum::<i64>() == 1)
        && (0..2).all(|j| m[0][j] + m[1][j] == 1)
}

pub fn only_identity_is_permutation() -> bool {
    let perms: Vec<KMatrix> = six_composites().into_iter().filter(is_permutation_matrix).collect();
    perms == vec![IDENTITY]
}

/// Every gallery of at most `max_len` crossings from every chamber.
pub fn all_morphisms(max_len: usize) -> Vec<GroupoidMorphism> {
    let letters = [(1u8, 1i8), (1, -1), (2, 1), (2, -1)];
    let mut out = Vec::new();
    let mut layer: Vec<GroupoidMorphism> = CHAMBERS.iter().map(|&c| GroupoidMorphism::identity(c)).collect();
    for len in 0..=max_len {
        out.extend(layer.iter().cloned());
        if len == max_len {
            break;
        }
        layer = layer
            .iter()
            .flat_map(|m| {
                letters.iter().map(move |&l| {
                    let mut next = m.clone();
                    next.letters.push(l);
                    next
                })
            })
            .collect();
    }
    out
}

/// Distinct morphisms ending at the base chamber with at most `max_len` crossings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BaseEnumeration {
    pub total: usize,
    pub per_source: Vec<(Chamber, usize)>,
}

pub fn enumerate_to_base(max_len: usize) -> BaseEnumeration {
    let keys: Vec<(Chamber, Vec<FreeWord>)> = all_morphisms(max_len)
        .into_par_iter()
        .filter(|m| m.target() == BASE)
        .map(|m| (m.source, m.realization().generator_images()))
        .collect();
    let mut seen: HashMap<(Chamber, Vec<FreeWord>), ()> = HashMap::new();
    for k in keys {
        seen.insert(k, ());
    }
    let per_source = CHAMBERS.iter().map(|&c| (c, seen.keys().filter(|(s, _)| *s == c).count())).collect();
    BaseEnumeration { total: seen.len(), per_source }
}
