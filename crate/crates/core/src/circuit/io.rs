//! Plain-text NNF format: `nnf N E V` followed by one node per line.

use std::fmt::Write as _;

use super::{NnfCircuit, NnfNode, NodeId};
use crate::error::{parse_err, Error, Result};
use crate::literal::Lit;

const KIND: &str = "nnf";

fn ids(tokens: &[&str], count: usize, line: usize, limit: usize) -> Result<Vec<NodeId>> {
    if tokens.len() != count {
        return Err(parse_err(
            KIND,
            line,
            format!("expected {count} child ids, found {}", tokens.len()),
        ));
    }
    tokens
        .iter()
        .map(|t| {
            let id: NodeId = t
                .parse()
                .map_err(|_| parse_err(KIND, line, format!("bad node id `{t}`")))?;
            if id >= limit {
                return Err(parse_err(
                    KIND,
                    line,
                    format!("child {id} does not precede node {limit}"),
                ));
            }
            Ok(id)
        })
        .collect()
}

fn number<T: std::str::FromStr>(tok: Option<&&str>, line: usize, what: &str) -> Result<T> {
    tok.and_then(|t| t.parse().ok())
        .ok_or_else(|| parse_err(KIND, line, format!("missing or malformed {what}")))
}

impl NnfCircuit {
    pub fn parse(text: &str) -> Result<Self> {
        let mut header: Option<(usize, usize, u32)> = None;
        let mut nodes = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let tokens: Vec<&str> = raw.split_whitespace().collect();
            let Some(&head) = tokens.first() else {
                continue;
            };
            if head == "c" {
                continue;
            }
            let Some(_) = header else {
                if head != "nnf" || tokens.len() != 4 {
                    return Err(parse_err(KIND, line, "expected header `nnf N E V`"));
                }
                header = Some((
                    number(tokens.get(1), line, "node count")?,
                    number(tokens.get(2), line, "edge count")?,
                    number(tokens.get(3), line, "variable count")?,
                ));
                continue;
            };
            let here = nodes.len();
            let node = match head {
                "T" | "F" if tokens.len() == 1 => NnfNode::Const(head == "T"),
                "L" if tokens.len() == 2 => {
                    let v: i64 = number(tokens.get(1), line, "literal")?;
                    NnfNode::Lit(
                        Lit::from_signed(v).ok_or_else(|| parse_err(KIND, line, "literal 0"))?,
                    )
                }
                "A" => {
                    let k: usize = number(tokens.get(1), line, "fan-in")?;
                    NnfNode::And(ids(&tokens[2..], k, line, here)?)
                }
                "O" => {
                    let _slot: usize = number(tokens.get(1), line, "annotation slot")?;
                    let k: usize = number(tokens.get(2), line, "fan-in")?;
                    NnfNode::Or(ids(tokens.get(3..).unwrap_or(&[]), k, line, here)?)
                }
                _ => return Err(parse_err(KIND, line, format!("unknown node line `{raw}`"))),
            };
            nodes.push(node);
        }
        let (n, e, v) = header.ok_or_else(|| parse_err(KIND, 0, "missing header"))?;
        if nodes.len() != n {
            return Err(parse_err(
                KIND,
                0,
                format!("header declares {n} nodes, found {}", nodes.len()),
            ));
        }
        if n == 0 {
            return Err(parse_err(KIND, 0, "empty circuit"));
        }
        let edges: usize = nodes.iter().map(|n| n.children().len()).sum();
        if edges != e {
            return Err(parse_err(
                KIND,
                0,
                format!("header declares {e} edges, found {edges}"),
            ));
        }
        NnfCircuit::new(nodes, n - 1, v).map_err(|err| match err {
            Error::Invalid(msg) => parse_err(KIND, 0, msg),
            other => other,
        })
    }

    /// Serializes the part reachable from the root; the root is written last.
    pub fn to_text(&self) -> String {
        let c = self.compact();
        let mut out = format!("nnf {} {} {}\n", c.len(), c.edge_count(), c.var_count);
        for node in &c.nodes {
            match node {
                NnfNode::Const(true) => out.push_str("T\n"),
                NnfNode::Const(false) => out.push_str("F\n"),
                NnfNode::Lit(l) => {
                    let _ = writeln!(out, "L {l}");
                }
                NnfNode::And(ch) => {
                    let _ = write!(out, "A {}", ch.len());
                    for c in ch {
                        let _ = write!(out, " {c}");
                    }
                    out.push('\n');
                }
                NnfNode::Or(ch) => {
                    let _ = write!(out, "O 0 {}", ch.len());
                    for c in ch {
                        let _ = write!(out, " {c}");
                    }
                    out.push('\n');
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG1: &str = "c (A & B & C) | (!C & D)
nnf 8 7 4
L 1
L 2
L 3
A 3 0 1 2
L -3
L 4
A 2 4 5
O 0 2 3 6
";

    #[test]
    fn parse_and_roundtrip() {
        let c = NnfCircuit::parse(FIG1).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.root(), 7);
        assert_eq!(c.count_models_brute().unwrap(), 6);
        let again = NnfCircuit::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.to_text(), FIG1.lines().skip(1).map(|l| format!("{l}\n")).collect::<String>());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(NnfCircuit::parse("nnf 1 0 1\nL 2\n").is_err());
        assert!(NnfCircuit::parse("nnf 2 1 1\nA 1 1\nL 1\n").is_err());
        assert!(NnfCircuit::parse("nnf 2 0 1\nL 1\n").is_err());
        assert!(NnfCircuit::parse("nnf 1 0 1\nX\n").is_err());
        assert!(NnfCircuit::parse("L 1\n").is_err());
        assert!(NnfCircuit::parse("nnf 2 5 1\nL 1\nA 1 0\n").is_err());
    }

    #[test]
    fn empty_gates_are_constants() {
        let c = NnfCircuit::parse("nnf 1 0 2\nO 0 0\n").unwrap();
        assert_eq!(c.count_models_brute().unwrap(), 0);
        let c = NnfCircuit::parse("nnf 1 0 2\nA 0\n").unwrap();
        assert_eq!(c.count_models_brute().unwrap(), 4);
    }
}
