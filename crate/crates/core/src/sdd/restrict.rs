use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::{PrunedSdd, Sdd, SddId, SddNode, SddOver, FALSE, TRUE};
use crate::error::{Error, Result, ORACLE_VAR_CAP};
use crate::literal::{Assignment, Var};
use crate::vtree::VtreeId;

impl Sdd {
    /// `alpha|rho`: plug in `rho`, replace gates that become constant, drop
    /// elements whose prime or sub is false, and keep only what the root
    /// still reaches. Surviving nodes keep their ids and labels.
    pub fn restrict(&self, rho: &Assignment) -> Result<PrunedSdd> {
        let domain: BTreeSet<Var> = rho.domain().collect();
        let pruned = Arc::new(self.vtree.prune(&domain)?);
        let mut out: HashMap<SddId, SddNode> = HashMap::new();
        let mut image: HashMap<SddId, SddId> = HashMap::new();
        for id in self.topo_order() {
            let r = match &self.nodes[&id] {
                SddNode::False => FALSE,
                SddNode::True => TRUE,
                SddNode::Literal { lit, .. } => match rho.get(lit.var) {
                    Some(v) if lit.holds(v) => TRUE,
                    Some(_) => FALSE,
                    None => {
                        out.insert(id, self.nodes[&id].clone());
                        id
                    }
                },
                SddNode::Decision { vnode, elements } => {
                    let kept: Vec<(SddId, SddId)> = elements
                        .iter()
                        .map(|(p, s)| (image[p], image[s]))
                        .filter(|&(p, s)| p != FALSE && s != FALSE)
                        .collect();
                    if kept.contains(&(TRUE, TRUE)) {
                        TRUE
                    } else if kept.is_empty() {
                        FALSE
                    } else {
                        out.insert(
                            id,
                            SddNode::Decision {
                                vnode: *vnode,
                                elements: kept,
                            },
                        );
                        id
                    }
                }
            };
            image.insert(id, r);
        }
        let root = image[&self.root];
        let mut nodes: BTreeMap<SddId, SddNode> = out.into_iter().collect();
        nodes.insert(FALSE, SddNode::False);
        nodes.insert(TRUE, SddNode::True);
        SddOver::from_parts(pruned, nodes, root)
    }
}

/// Checks that `restricted` is a subgraph of `original`: every surviving
/// node exists in `original` with the same label, and each of its elements
/// is an original element whose ends are kept or replaced by constants.
pub fn check_subgraph(restricted: &PrunedSdd, original: &Sdd) -> std::result::Result<(), String> {
    let fits = |new: SddId, old: SddId| new == old || new == FALSE || new == TRUE;
    for (&id, node) in restricted.nodes() {
        if node.is_constant() {
            continue;
        }
        let Some(old) = original.nodes().get(&id) else {
            return Err(format!("node {id} does not occur in the original"));
        };
        match (node, old) {
            (SddNode::Literal { .. }, SddNode::Literal { .. }) if node == old => {}
            (
                SddNode::Decision { vnode, elements },
                SddNode::Decision {
                    vnode: ov,
                    elements: oe,
                },
            ) if vnode == ov => {
                for &(p, s) in elements {
                    if !oe.iter().any(|&(op, os)| fits(p, op) && fits(s, os)) {
                        return Err(format!("element ({p},{s}) of node {id} is not in the original"));
                    }
                }
            }
            _ => return Err(format!("node {id} changed its label")),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShellCheck {
    Ok,
    /// Two members of `Sdds(b|A, alpha|rho)` share a model.
    Violation(SddId, SddId),
}

/// Restricts by the shell assignment `rho` and checks that the nodes left at
/// `b` compute pairwise disjoint functions.
pub fn check_shell_disjointness(s: &Sdd, b: VtreeId, rho: &Assignment) -> Result<ShellCheck> {
    let part = s.vtree().shell_partition(b)?;
    let domain: Vec<Var> = rho.domain().collect();
    if domain != part.shell {
        return Err(Error::NotShell(format!(
            "assignment covers {domain:?}, the shell of vertex {b} is {:?}",
            part.shell
        )));
    }
    if part.inner.len() > ORACLE_VAR_CAP {
        return Err(Error::OracleCap(part.inner.len()));
    }
    let r = s.restrict(rho)?;
    let members: Vec<SddId> = r.sdds_at(b)?.into_iter().filter(|&id| id != FALSE).collect();
    let tables = r.tables_of(&members, &part.inner, &Assignment::new())?;
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if tables[i].intersects(&tables[j])? {
                return Ok(ShellCheck::Violation(members[i], members[j]));
            }
        }
    }
    Ok(ShellCheck::Ok)
}
