//! Input file parsers: DIMACS CNF, edge-list graphs, and witness files.

use svpforge_core::problem::{Clause, Formula, Graph};

#[derive(Debug, thiserror::Error)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("missing 'p cnf' header")]
    MissingHeader,
    #[error(transparent)]
    Core(#[from] svpforge_core::Error),
}

/// Parses DIMACS CNF. In strict mode every clause must have exactly
/// three literals; empty clauses are always rejected.
pub fn parse_cnf(text: &str, strict_3sat: bool) -> Result<Formula, ParseError> {
    let mut num_vars: Option<usize> = None;
    let mut declared_clauses = 0usize;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut current: Vec<i64> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            if parts.len() != 4 || parts[1] != "cnf" {
                return Err(ParseError::Malformed {
                    line,
                    msg: format!("bad problem line: {trimmed}"),
                });
            }
            num_vars = Some(parts[2].parse().map_err(|_| ParseError::Malformed {
                line,
                msg: format!("bad variable count: {}", parts[2]),
            })?);
            declared_clauses = parts[3].parse().map_err(|_| ParseError::Malformed {
                line,
                msg: format!("bad clause count: {}", parts[3]),
            })?;
            continue;
        }
        if num_vars.is_none() {
            return Err(ParseError::MissingHeader);
        }
        for tok in trimmed.split_whitespace() {
            let lit: i64 = tok.parse().map_err(|_| ParseError::Malformed {
                line,
                msg: format!("bad literal: {tok}"),
            })?;
            if lit == 0 {
                if current.is_empty() {
                    return Err(ParseError::Malformed {
                        line,
                        msg: "empty clause".into(),
                    });
                }
                if strict_3sat && current.len() != 3 {
                    return Err(ParseError::Malformed {
                        line,
                        msg: format!("clause has {} literals, need exactly 3", current.len()),
                    });
                }
                let mut lits = [0i64; 3];
                for (k, &l) in current.iter().enumerate().take(3) {
                    lits[k] = l;
                }
                // pad short clauses by repeating the last literal
                for k in current.len()..3 {
                    lits[k] = *current.last().unwrap();
                }
                clauses.push(Clause { lits });
                current.clear();
            } else {
                current.push(lit);
            }
        }
    }
    if !current.is_empty() {
        return Err(ParseError::Malformed {
            line: 0,
            msg: "clause not terminated by 0".into(),
        });
    }
    let num_vars = num_vars.ok_or(ParseError::MissingHeader)?;
    if declared_clauses != clauses.len() {
        // tolerated: some generators emit imprecise headers
    }
    Ok(Formula::new(num_vars, clauses)?)
}

/// Parses the `n m` + `u v` edge-list format. Self-loops are rejected;
/// duplicate edges are deduplicated (the count is returned for a
/// warning).
pub fn parse_graph(text: &str) -> Result<(Graph, usize), ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(ParseError::Malformed {
        line: 0,
        msg: "empty graph file".into(),
    })?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(ParseError::Malformed {
            line: hline,
            msg: format!("bad header: {header}"),
        });
    }
    let n: usize = parts[0].parse().map_err(|_| ParseError::Malformed {
        line: hline,
        msg: "bad vertex count".into(),
    })?;
    let m: usize = parts[1].parse().map_err(|_| ParseError::Malformed {
        line: hline,
        msg: "bad edge count".into(),
    })?;
    let mut edges = Vec::new();
    for (line, l) in lines {
        let parts: Vec<&str> = l.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(ParseError::Malformed {
                line,
                msg: format!("bad edge line: {l}"),
            });
        }
        let u: usize = parts[0].parse().map_err(|_| ParseError::Malformed {
            line,
            msg: "bad endpoint".into(),
        })?;
        let v: usize = parts[1].parse().map_err(|_| ParseError::Malformed {
            line,
            msg: "bad endpoint".into(),
        })?;
        edges.push((u, v));
    }
    if edges.len() != m {
        // tolerated, like the CNF header
    }
    let raw = edges.len();
    let graph = Graph::new(n, &edges)?;
    let dupes = raw - graph.edges.len();
    Ok((graph, dupes))
}

/// Boolean witness: whitespace-separated 0/1 values, one per variable.
pub fn parse_bool_witness(text: &str, n: usize) -> Result<Vec<bool>, ParseError> {
    let vals: Vec<bool> = text
        .split_whitespace()
        .map(|t| match t {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(ParseError::Malformed {
                line: 0,
                msg: format!("bad witness value: {other}"),
            }),
        })
        .collect::<Result<_, _>>()?;
    if vals.len() != n {
        return Err(ParseError::Malformed {
            line: 0,
            msg: format!("witness has {} values, expected {n}", vals.len()),
        });
    }
    Ok(vals)
}

/// Coloring witness: whitespace-separated colors, one per vertex.
pub fn parse_coloring(text: &str, n: usize) -> Result<Vec<u8>, ParseError> {
    let vals: Vec<u8> = text
        .split_whitespace()
        .map(|t| {
            t.parse::<u8>().map_err(|_| ParseError::Malformed {
                line: 0,
                msg: format!("bad color: {t}"),
            })
        })
        .collect::<Result<_, _>>()?;
    if vals.len() != n {
        return Err(ParseError::Malformed {
            line: 0,
            msg: format!("coloring has {} values, expected {n}", vals.len()),
        });
    }
    Ok(vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cnf_roundtrip() {
        let f = parse_cnf("c comment\np cnf 3 1\n1 -2 3 0\n", true).unwrap();
        assert_eq!(f.num_vars, 3);
        assert_eq!(f.clauses.len(), 1);
        assert_eq!(f.clauses[0].lits, [1, -2, 3]);
    }

    #[test]
    fn cnf_rejects_empty_clause_and_bad_arity() {
        assert!(parse_cnf("p cnf 2 1\n0\n", true).is_err());
        assert!(parse_cnf("p cnf 3 1\n1 2 0\n", true).is_err());
        assert!(parse_cnf("p cnf 2 1\n1 2 3 0\n", true).is_err());
        // literal out of range
        assert!(parse_cnf("p cnf 2 1\n1 2 5 0\n", false).is_err());
        // non-strict mode pads short clauses
        let f = parse_cnf("p cnf 2 1\n1 2 0\n", false).unwrap();
        assert_eq!(f.clauses[0].lits, [1, 2, 2]);
    }

    #[test]
    fn graph_parsing() {
        let (g, dupes) = parse_graph("3 3\n0 1\n1 2\n2 0\n").unwrap();
        assert_eq!(g.num_vertices, 3);
        assert_eq!(g.edges.len(), 3);
        assert_eq!(dupes, 0);
        // duplicates are deduplicated but counted
        let (g, dupes) = parse_graph("3 4\n0 1\n1 0\n1 2\n2 0\n").unwrap();
        assert_eq!(g.edges.len(), 3);
        assert_eq!(dupes, 1);
        assert!(parse_graph("2 1\n0 0\n").is_err());
        // isolated vertices are allowed
        let (g, _) = parse_graph("5 1\n0 1\n").unwrap();
        assert_eq!(g.num_vertices, 5);
    }

    #[test]
    fn witness_parsing() {
        assert_eq!(
            parse_bool_witness("1 0 1\n", 3).unwrap(),
            vec![true, false, true]
        );
        assert!(parse_bool_witness("1 0", 3).is_err());
        assert_eq!(parse_coloring("0 1 2", 3).unwrap(), vec![0, 1, 2]);
    }
}
