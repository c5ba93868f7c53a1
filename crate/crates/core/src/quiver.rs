//! Quivers with potential, exchange matrices and matrix mutation.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrow {
    pub src: usize,
    pub dst: usize,
    pub label: String,
}

/// `coef` times the cyclic word through `arrows` (indices into the arrow list).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PotentialTerm {
    pub coef: i64,
    pub arrows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverWithPotential {
    pub vertices: usize,
    pub arrows: Vec<Arrow>,
    pub potential: Vec<PotentialTerm>,
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    coef: i64,
    cycle: Vec<usize>,
    #[serde(default)]
    arrows: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    vertices: usize,
    arrows: Vec<[usize; 3]>,
    /// One label per arrow, listed by `(src, dst)` in the order of `arrows`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    arrow_labels: Vec<String>,
    #[serde(default)]
    potential: Vec<TermJson>,
}

impl QuiverWithPotential {
    /// Checks vertex ranges and that each potential term is a closed path.
    pub fn new(vertices: usize, arrows: Vec<Arrow>, potential: Vec<PotentialTerm>) -> Result<Self> {
        for a in &arrows {
            if a.src >= vertices || a.dst >= vertices {
                return arg(format!("arrow {} leaves the vertex range", a.label));
            }
        }
        for term in &potential {
            if term.arrows.is_empty() {
                return arg("empty potential term");
            }
            if term.arrows.iter().any(|&i| i >= arrows.len()) {
                return arg("potential term uses an unknown arrow");
            }
            let len = term.arrows.len();
            for x in 0..len {
                let here = &arrows[term.arrows[x]];
                let next = &arrows[term.arrows[(x + 1) % len]];
                if here.dst != next.src {
                    return arg(format!("potential term breaks at arrow {}", here.label));
                }
            }
        }
        Ok(QuiverWithPotential { vertices, arrows, potential })
    }

    /// Arrow counts `a[i][j]` = number of arrows `i -> j`.
    pub fn arrow_counts(&self) -> Vec<Vec<i64>> {
        let mut a = vec![vec![0; self.vertices]; self.vertices];
        for arrow in &self.arrows {
            a[arrow.src][arrow.dst] += 1;
        }
        a
    }

    pub fn exchange_matrix(&self) -> ExchangeMatrix {
        let a = self.arrow_counts();
        let n = self.vertices;
        let b = (0..n).map(|i| (0..n).map(|j| a[i][j] - a[j][i]).collect()).collect();
        ExchangeMatrix { b }
    }

    /// Vertex sequence `[v0, v1, ...]` traced by a potential term.
    pub fn term_cycle(&self, term: &PotentialTerm) -> Vec<usize> {
        term.arrows.iter().map(|&i| self.arrows[i].src).collect()
    }

    pub fn has_loops(&self) -> bool {
        self.arrows.iter().any(|a| a.src == a.dst)
    }

    pub fn has_two_cycles(&self) -> bool {
        let a = self.arrow_counts();
        (0..self.vertices).any(|i| (i + 1..self.vertices).any(|j| a[i][j] > 0 && a[j][i] > 0))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let a = self.arrow_counts();
        let mut arrows = Vec::new();
        for (i, row) in a.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                if c > 0 {
                    arrows.push([i, j, c as usize]);
                }
            }
        }
        let mut order: Vec<usize> = (0..self.arrows.len()).collect();
        order.sort_by_key(|&x| (self.arrows[x].src, self.arrows[x].dst, x));
        let arrow_labels = order.iter().map(|&x| self.arrows[x].label.clone()).collect();
        let potential = self
            .potential
            .iter()
            .map(|t| TermJson {
                coef: t.coef,
                cycle: self.term_cycle(t),
                arrows: t.arrows.iter().map(|&i| self.arrows[i].label.clone()).collect(),
            })
            .collect();
        serde_json::to_value(QuiverJson { vertices: self.vertices, arrows, arrow_labels, potential }).expect("quiver serializes")
    }

    /// Reads the JSON form. Without `arrow_labels` arrows are labelled
    /// `a{i}_{j}_{c}`; a term without labels picks the first arrow along each
    /// step of its cycle.
    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let doc: QuiverJson = serde_json::from_value(value.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let mut arrows = Vec::new();
        for &[i, j, c] in &doc.arrows {
            for x in 0..c {
                arrows.push(Arrow { src: i, dst: j, label: format!("a{i}_{j}_{x}") });
            }
        }
        if !doc.arrow_labels.is_empty() {
            if doc.arrow_labels.len() != arrows.len() {
                return Err(Error::Parse("arrow_labels length differs from the arrow count".into()));
            }
            for (a, l) in arrows.iter_mut().zip(&doc.arrow_labels) {
                a.label = l.clone();
            }
        }
        let mut potential = Vec::new();
        for t in doc.potential {
            let ids = if t.arrows.is_empty() {
                let len = t.cycle.len();
                (0..len)
                    .map(|x| {
                        let (s, d) = (t.cycle[x], t.cycle[(x + 1) % len]);
                        arrows
                            .iter()
                            .position(|a| a.src == s && a.dst == d)
                            .ok_or_else(|| Error::Parse(format!("no arrow {s}->{d} for potential term")))
                    })
                    .collect::<Result<Vec<_>>>()?
            } else {
                t.arrows
                    .iter()
                    .map(|l| {
                        arrows
                            .iter()
                            .position(|a| &a.label == l)
                            .ok_or_else(|| Error::Parse(format!("unknown arrow label {l}")))
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            potential.push(PotentialTerm { coef: t.coef, arrows: ids });
        }
        QuiverWithPotential::new(doc.vertices, arrows, potential)
    }
}

/// Skew-symmetric integer matrix `b_ij = a_ij - a_ji`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExchangeMatrix {
    pub b: Vec<Vec<i64>>,
}

impl ExchangeMatrix {
    pub fn new(b: Vec<Vec<i64>>) -> Result<Self> {
        let m = ExchangeMatrix { b };
        let n = m.size();
        if m.b.iter().any(|row| row.len() != n) {
            return arg("exchange matrix must be square");
        }
        if !m.is_skew_symmetric() {
            return arg("exchange matrix must be skew-symmetric");
        }
        Ok(m)
    }

    pub fn size(&self) -> usize {
        self.b.len()
    }

    pub fn is_skew_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.b[i][j] == -self.b[j][i]))
    }

    /// Fomin–Zelevinsky mutation at vertex `k` (0-based).
    pub fn mutate(&self, k: usize) -> Result<ExchangeMatrix> {
        let n = self.size();
        if k >= n {
            return arg(format!("vertex {k} out of range for {n} vertices"));
        }
        let b = &self.b;
        let out = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == k || j == k {
                            -b[i][j]
                        } else {
                            b[i][j] + b[i][k].signum() * (b[i][k] * b[k][j]).max(0)
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ExchangeMatrix { b: out })
    }
}

fn arrow(src: usize, dst: usize, label: &str) -> Arrow {
    Arrow { src, dst, label: label.to_string() }
}

/// Two vertices, `e: 0 -> 1`, `f: 1 -> 0`, potential `(ef)^2`.
pub fn double_bubble_quiver() -> QuiverWithPotential {
    QuiverWithPotential {
        vertices: 2,
        arrows: vec![arrow(0, 1, "e"), arrow(1, 0, "f")],
        potential: vec![PotentialTerm { coef: 1, arrows: vec![0, 1, 0, 1] }],
    }
}

/// Two vertices, `e, e': 0 -> 1`, `f, f': 1 -> 0`, potential `efe'f' - ef'e'f`.
pub fn conifold_quiver() -> QuiverWithPotential {
    QuiverWithPotential {
        vertices: 2,
        arrows: vec![arrow(0, 1, "e"), arrow(0, 1, "e'"), arrow(1, 0, "f"), arrow(1, 0, "f'")],
        potential: vec![
            PotentialTerm { coef: 1, arrows: vec![0, 2, 1, 3] },
            PotentialTerm { coef: -1, arrows: vec![0, 3, 1, 2] },
        ],
    }
}

/// Linear quiver `0 -> 1 -> ... -> k-1` with zero potential.
pub fn a_k_quiver(k: usize) -> Result<QuiverWithPotential> {
    if k == 0 {
        return arg("A_k needs k >= 1");
    }
    let arrows = (0..k - 1).map(|i| arrow(i, i + 1, &format!("a{i}"))).collect();
    Ok(QuiverWithPotential { vertices: k, arrows, potential: Vec::new() })
}

/// CY3 Euler pairing `chi_ij = a_ij - a_ji`.
pub fn euler_pairing_cy3(q: &QuiverWithPotential) -> Vec<Vec<i64>> {
    q.exchange_matrix().b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> ExchangeMatrix {
        ExchangeMatrix::new(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn a2_mutation() {
        let b = m(&[&[0, 1], &[-1, 0]]);
        assert_eq!(b.mutate(1).unwrap(), m(&[&[0, -1], &[1, 0]]));
        assert!(b.mutate(2).is_err());
    }

    #[test]
    fn a3_mutations_follow_the_rule() {
        // 0 -> 1 <- 2: only the incident arrows reverse
        let sink = m(&[&[0, 1, 0], &[-1, 0, -1], &[0, 1, 0]]);
        assert_eq!(sink.mutate(1).unwrap(), m(&[&[0, -1, 0], &[1, 0, 1], &[0, -1, 0]]));
        // 0 -> 1 -> 2: a shortcut 0 -> 2 appears
        let line = m(&[&[0, 1, 0], &[-1, 0, 1], &[0, -1, 0]]);
        assert_eq!(line.mutate(1).unwrap(), m(&[&[0, -1, 1], &[1, 0, -1], &[-1, 1, 0]]));
    }

    #[test]
    fn named_quivers() {
        let db = double_bubble_quiver();
        assert_eq!(db.arrow_counts(), vec![vec![0, 1], vec![1, 0]]);
        assert_eq!(db.term_cycle(&db.potential[0]), vec![0, 1, 0, 1]);
        let c = conifold_quiver();
        assert_eq!(c.arrow_counts(), vec![vec![0, 2], vec![2, 0]]);
        assert_eq!(c.potential.iter().map(|t| t.coef).collect::<Vec<_>>(), vec![1, -1]);
        let a3 = a_k_quiver(3).unwrap();
        assert_eq!((a3.vertices, a3.arrows.len()), (3, 2));
        for q in [db, c, a3] {
            assert!(QuiverWithPotential::new(q.vertices, q.arrows.clone(), q.potential.clone()).is_ok());
        }
    }

    #[test]
    fn euler_pairings() {
        assert_eq!(euler_pairing_cy3(&double_bubble_quiver()), vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(euler_pairing_cy3(&conifold_quiver()), vec![vec![0, 0], vec![0, 0]]);
        assert_eq!(euler_pairing_cy3(&a_k_quiver(2).unwrap()), vec![vec![0, 1], vec![-1, 0]]);
    }

    #[test]
    fn broken_potential_rejected() {
        let arrows = vec![arrow(0, 1, "e"), arrow(0, 1, "g")];
        assert!(QuiverWithPotential::new(2, arrows, vec![PotentialTerm { coef: 1, arrows: vec![0, 1] }]).is_err());
    }

    #[test]
    fn json_round_trip_keeps_counts_and_terms() {
        for q in [double_bubble_quiver(), conifold_quiver()] {
            let v = q.to_json();
            let back = QuiverWithPotential::from_json(&v).unwrap();
            assert_eq!(back.arrow_counts(), q.arrow_counts());
            assert_eq!(back.to_json(), v);
        }
        let v = serde_json::json!({"vertices": 2, "arrows": [[0, 1, 1], [1, 0, 1]],
            "potential": [{"coef": 1, "cycle": [0, 1, 0, 1]}]});
        let q = QuiverWithPotential::from_json(&v).unwrap();
        assert_eq!(q.term_cycle(&q.potential[0]), vec![0, 1, 0, 1]);
    }
}
