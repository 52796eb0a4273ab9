//! Input problem instances: 3SAT formulas (DIMACS-style signed
//! literals) and simple graphs for 3-coloring.

use crate::{Error, Result};

/// Three signed 1-based variable references, DIMACS convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Clause {
    pub lits: [i64; 3],
}

impl Clause {
    pub fn vars(&self) -> [usize; 3] {
        [
            self.lits[0].unsigned_abs() as usize - 1,
            self.lits[1].unsigned_abs() as usize - 1,
            self.lits[2].unsigned_abs() as usize - 1,
        ]
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.lits.iter().any(|&l| {
            let v = assignment[l.unsigned_abs() as usize - 1];
            if l > 0 {
                v
            } else {
                !v
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Formula {
    pub num_vars: usize,
    pub clauses: Vec<Clause>,
}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<Clause>) -> Result<Self> {
        for c in &clauses {
            for &l in &c.lits {
                if l == 0 || l.unsigned_abs() as usize > num_vars {
                    return Err(Error::BadParams(format!(
                        "literal {l} out of range for {num_vars} variables"
                    )));
                }
            }
        }
        Ok(Formula { num_vars, clauses })
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        assignment.len() == self.num_vars
            && self.clauses.iter().all(|c| c.satisfied_by(assignment))
    }
}

/// Simple undirected graph; edges are stored deduplicated with `u < v`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    pub num_vertices: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(num_vertices: usize, raw_edges: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::new();
        for &(a, b) in raw_edges {
            if a == b {
                return Err(Error::BadParams(format!("self-loop at vertex {a}")));
            }
            if a >= num_vertices || b >= num_vertices {
                return Err(Error::BadParams(format!(
                    "edge ({a}, {b}) out of range for {num_vertices} vertices"
                )));
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(Graph {
            num_vertices,
            edges,
        })
    }

    /// Colors are 0, 1, 2.
    pub fn properly_colored(&self, coloring: &[u8]) -> bool {
        coloring.len() == self.num_vertices
            && coloring.iter().all(|&c| c < 3)
            && self.edges.iter().all(|&(u, v)| coloring[u] != coloring[v])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clause_semantics() {
        let f = Formula::new(
            3,
            vec![Clause { lits: [1, -2, 3] }],
        )
        .unwrap();
        assert!(f.satisfied_by(&[true, true, false]));
        assert!(f.satisfied_by(&[false, false, false]));
        assert!(!f.satisfied_by(&[false, true, false]));
    }

    #[test]
    fn formula_rejects_bad_literals() {
        assert!(Formula::new(2, vec![Clause { lits: [1, 2, 3] }]).is_err());
        assert!(Formula::new(2, vec![Clause { lits: [0, 1, 2] }]).is_err());
    }

    #[test]
    fn graph_basics() {
        let g = Graph::new(3, &[(0, 1), (1, 2), (2, 0), (1, 0)]).unwrap();
        assert_eq!(g.edges.len(), 3);
        assert!(g.properly_colored(&[0, 1, 2]));
        assert!(!g.properly_colored(&[0, 0, 2]));
        assert!(Graph::new(2, &[(0, 0)]).is_err());
    }
}
