//! Text format: `sdd N` (or `psdd-pruned N`), then `F id`, `T id`,
//! `L id leaf lit`, `D id vnode k p1 s1 ... pk sk`, root last.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use super::{SddId, SddNode, SddOver, VtreeKind};
use crate::error::{parse_err, Result};
use crate::literal::Lit;

impl<V: VtreeKind> SddOver<V> {
    /// Nodes in ascending id order when that is topological (always the
    /// case for manager output), otherwise in DFS post-order.
    fn write_order(&self) -> Vec<SddId> {
        let ascending: Vec<SddId> = self.ids().collect();
        let ok = self.root == *ascending.last().expect("nonempty")
            && self
                .nodes
                .iter()
                .all(|(&id, n)| n.children().all(|c| c < id));
        if ok {
            ascending
        } else {
            self.topo_order()
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", V::HEADER, self.nodes.len());
        for id in self.write_order() {
            let _ = match &self.nodes[&id] {
                SddNode::False => writeln!(out, "F {id}"),
                SddNode::True => writeln!(out, "T {id}"),
                SddNode::Literal { leaf, lit } => writeln!(out, "L {id} {leaf} {lit}"),
                SddNode::Decision { vnode, elements } => {
                    let _ = write!(out, "D {id} {vnode} {}", elements.len());
                    for (p, s) in elements {
                        let _ = write!(out, " {p} {s}");
                    }
                    writeln!(out)
                }
            };
        }
        out
    }

    pub fn parse(text: &str, vtree: Arc<V>) -> Result<Self> {
        let kind = V::HEADER;
        let mut declared = None;
        let mut nodes: BTreeMap<SddId, SddNode> = BTreeMap::new();
        let mut last = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let t: Vec<&str> = raw.split_whitespace().collect();
            let Some(&head) = t.first() else { continue };
            if head == "c" {
                continue;
            }
            let num = |i: usize| -> Result<usize> {
                t.get(i)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| parse_err(kind, line, format!("bad field {i} in `{raw}`")))
            };
            if declared.is_none() {
                if head != kind || t.len() != 2 {
                    return Err(parse_err(kind, line, format!("expected header `{kind} N`")));
                }
                declared = Some(num(1)?);
                continue;
            }
            let id = num(1)?;
            let (node, arity) = match head {
                "F" => (SddNode::False, 2),
                "T" => (SddNode::True, 2),
                "L" => {
                    let lit: i64 = t
                        .get(3)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| parse_err(kind, line, "bad literal"))?;
                    let lit = Lit::from_signed(lit).ok_or_else(|| parse_err(kind, line, "literal 0"))?;
                    (SddNode::Literal { leaf: num(2)?, lit }, 4)
                }
                "D" => {
                    let k = num(3)?;
                    let elements = (0..k)
                        .map(|e| Ok((num(4 + 2 * e)?, num(5 + 2 * e)?)))
                        .collect::<Result<Vec<_>>>()?;
                    for &(p, s) in &elements {
                        if !nodes.contains_key(&p) || !nodes.contains_key(&s) {
                            return Err(parse_err(kind, line, "children must precede their parent"));
                        }
                    }
                    (
                        SddNode::Decision {
                            vnode: num(2)?,
                            elements,
                        },
                        4 + 2 * k,
                    )
                }
                _ => return Err(parse_err(kind, line, format!("unknown line `{raw}`"))),
            };
            if t.len() != arity {
                return Err(parse_err(kind, line, format!("wrong field count in `{raw}`")));
            }
            if let Some(pos) = node.position() {
                if !vtree.contains(pos) {
                    return Err(parse_err(kind, line, format!("vertex {pos} not in the vtree")));
                }
            }
            if nodes.insert(id, node).is_some() {
                return Err(parse_err(kind, line, format!("duplicate id {id}")));
            }
            last = Some(id);
        }
        let declared = declared.ok_or_else(|| parse_err(kind, 0, "missing header"))?;
        if nodes.len() != declared {
            return Err(parse_err(
                kind,
                0,
                format!("header declares {declared} nodes, found {}", nodes.len()),
            ));
        }
        let root = last.ok_or_else(|| parse_err(kind, 0, "no nodes"))?;
        SddOver::from_parts(vtree, nodes, root).map_err(|e| parse_err(kind, 0, e.to_string()))
    }
}
