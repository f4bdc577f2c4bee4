use super::*;
use crate::circuit::NnfBuilder;
use crate::vtree::VtreeShape;

fn fig1_circuit() -> NnfCircuit {
    let mut b = NnfBuilder::new(4);
    let (a, bb, c, nc, d) = (b.pos(1), b.pos(2), b.pos(3), b.neg(3), b.pos(4));
    let t1 = b.and(vec![a, bb, c]);
    let t2 = b.and(vec![nc, d]);
    let r = b.or(vec![t1, t2]);
    b.finish(r)
}

fn balanced(n: u32) -> Vtree {
    Vtree::build(&(1..=n).collect::<Vec<_>>(), VtreeShape::Balanced).unwrap()
}

fn hand_sdd(vtree: &Vtree, nodes: Vec<(SddId, SddNode)>) -> Sdd {
    let root = nodes.last().unwrap().0;
    Sdd::from_parts(Arc::new(vtree.clone()), nodes.into_iter().collect(), root).unwrap()
}

#[test]
fn compile_terminals_and_literals() {
    let v = balanced(3);
    let mut b = NnfBuilder::new(3);
    let x = b.pos(2);
    let s = compile(&b.finish(x), &v).unwrap();
    assert_eq!(
        s.node(s.root()),
        &SddNode::Literal {
            leaf: v.leaf_of(2).unwrap(),
            lit: Lit::pos(2)
        }
    );

    let mut b = NnfBuilder::new(3);
    let t = b.constant(true);
    let s = compile(&b.finish(t), &v).unwrap();
    assert_eq!(s.root(), TRUE);
    assert_eq!(s.size(), 1);
}

#[test]
fn compile_fig1_matches_oracle() {
    let c = fig1_circuit();
    for shape in [
        VtreeShape::Balanced,
        VtreeShape::RightLinear,
        VtreeShape::LeftLinear,
        VtreeShape::Random(1),
        VtreeShape::Random(2),
    ] {
        let v = Vtree::build(&[1, 2, 3, 4], shape).unwrap();
        let s = compile(&c, &v).unwrap();
        assert_eq!(s.truth_table().unwrap(), c.truth_table().unwrap(), "{shape:?}");
        assert_eq!(s.validate(), Validity::Ok);
        assert_eq!(s.count_models(), BigUint::from(6u8));
    }
}

#[test]
fn budget_aborts_and_leaves_manager_usable() {
    let c = fig1_circuit();
    let v = balanced(4);
    assert!(matches!(compile_with_budget(&c, &v, Some(4)), Err(Error::Budget(4))));
    let full = compile(&c, &v).unwrap();
    assert_eq!(compile_with_budget(&c, &v, Some(1000)).unwrap(), full);

    let mut m = SddManager::new(Arc::new(v.clone())).with_budget(Some(4));
    assert!(m.compile(&c).is_err());
    let mut free = SddManager::new(Arc::new(v)).with_budget(None);
    let root = free.compile(&c).unwrap();
    assert_eq!(free.export(root).truth_table().unwrap(), c.truth_table().unwrap());
}

#[test]
fn compile_rejects_unknown_variable() {
    let mut b = NnfBuilder::new(5);
    let x = b.pos(5);
    assert!(matches!(
        compile(&b.finish(x), &balanced(3)),
        Err(Error::VarMismatch(5))
    ));
}

#[test]
fn hash_consing_gives_identical_roots() {
    let c = fig1_circuit();
    let mut m = SddManager::new(Arc::new(balanced(4)));
    let a = m.compile(&c).unwrap();
    let b = m.compile(&c).unwrap();
    assert_eq!(a, b);
}

#[test]
fn apply_identities() {
    let mut m = SddManager::new(Arc::new(balanced(4)));
    let x = m.literal(Lit::pos(1)).unwrap();
    let nx = m.negate(x);
    assert_eq!(m.conjoin(x, nx), FALSE);
    assert_eq!(m.disjoin(x, nx), TRUE);
    let y = m.literal(Lit::pos(4)).unwrap();
    let xy = m.conjoin(x, y);
    let n = m.negate(xy);
    assert_eq!(m.conjoin(xy, n), FALSE);
    assert_eq!(m.disjoin(xy, n), TRUE);
    assert_eq!(m.negate(n), xy);
}

#[test]
fn validation_examples() {
    let v = balanced(2);
    let (c, d, root) = (v.leaf_of(1).unwrap(), v.leaf_of(2).unwrap(), v.root());
    let lit = |leaf, l| SddNode::Literal { leaf, lit: l };

    let ok = hand_sdd(
        &v,
        vec![
            (2, lit(c, Lit::pos(1))),
            (3, lit(c, Lit::neg(1))),
            (4, lit(d, Lit::pos(2))),
            (5, SddNode::Decision { vnode: root, elements: vec![(2, 4), (3, 4)] }),
        ],
    );
    assert_eq!(ok.validate(), Validity::Ok);

    let overlap = hand_sdd(
        &v,
        vec![
            (TRUE, SddNode::True),
            (2, lit(c, Lit::pos(1))),
            (4, lit(d, Lit::pos(2))),
            (5, SddNode::Decision { vnode: root, elements: vec![(2, 4), (TRUE, 4)] }),
        ],
    );
    assert_eq!(
        overlap.validate(),
        Validity::Violation { node: 5, kind: ViolationKind::Overlap }
    );

    let incomplete = hand_sdd(
        &v,
        vec![
            (2, lit(c, Lit::pos(1))),
            (4, lit(d, Lit::pos(2))),
            (5, SddNode::Decision { vnode: root, elements: vec![(2, 4)] }),
        ],
    );
    assert_eq!(
        incomplete.validate(),
        Validity::Violation { node: 5, kind: ViolationKind::Incomplete }
    );

    let misplaced = hand_sdd(
        &v,
        vec![
            (2, lit(c, Lit::pos(1))),
            (4, lit(d, Lit::pos(2))),
            (5, SddNode::Decision { vnode: root, elements: vec![(4, 2)] }),
        ],
    );
    assert_eq!(
        misplaced.validate(),
        Validity::Violation { node: 5, kind: ViolationKind::VtreeRespect }
    );
}

#[test]
fn restrict_fig1_to_d() {
    let c = fig1_circuit();
    let v = balanced(4);
    let s = compile(&c, &v).unwrap();
    let mut rho = Assignment::new();
    rho.set(3, false);
    let r = s.restrict(&rho).unwrap();
    let d = r.tables_of(&[r.root()], &[4], &[(1, true), (2, false)].into_iter().collect()).unwrap();
    assert_eq!(d[0].bits().collect::<Vec<_>>(), vec![false, true]);
    assert_eq!(r.vtree().vars(), vec![1, 2, 4]);
    assert_eq!(r.validate(), Validity::Ok);
    check_subgraph(&r, &s).unwrap();
    for bits in 0..8u64 {
        let a = Assignment::from_bits(&[1, 2, 4], bits);
        assert_eq!(r.eval(&a).unwrap(), bits >> 2 & 1 == 1);
    }
}

#[test]
fn empty_restriction_keeps_function_and_labels() {
    let c = fig1_circuit();
    let s = compile(&c, &balanced(4)).unwrap();
    let r = s.restrict(&Assignment::new()).unwrap();
    assert_eq!(r.truth_table().unwrap(), s.truth_table().unwrap());
    check_subgraph(&r, &s).unwrap();
    assert!(r.ids().all(|id| s.nodes().contains_key(&id)));
}

#[test]
fn restrict_everything_gives_constant_on_stub() {
    let c = fig1_circuit();
    let s = compile(&c, &balanced(4)).unwrap();
    let rho: Assignment = [(1, true), (2, true), (3, true), (4, false)].into_iter().collect();
    let r = s.restrict(&rho).unwrap();
    assert_eq!(r.root(), TRUE);
    assert!(r.vtree().is_stub(r.vtree().root()));
    assert_eq!(r.validate(), Validity::Ok);
}

#[test]
fn sdds_at_examples() {
    let c = fig1_circuit();
    let v = balanced(4);
    let s = compile(&c, &v).unwrap();
    assert_eq!(s.sdds_at(v.root()).unwrap(), [s.root()].into_iter().collect());

    let mut b = NnfBuilder::new(4);
    let (x, nx, y) = (b.pos(1), b.neg(1), b.pos(3));
    let l = b.and(vec![x, y]);
    let r = b.and(vec![nx, y]);
    let root = b.or(vec![l, r]);
    let s2 = compile(&b.finish(root), &v).unwrap();
    let at_leaf = s2.sdds_at(v.leaf_of(1).unwrap()).unwrap();
    assert!(at_leaf.iter().filter(|&&id| !s2.node(id).is_constant()).count() == 2);
    assert!(s.sdds_at(999).is_err());
}

#[test]
fn low_root_stands_at_vertices_above_it() {
    // x1 & x2 over ((1,2),(3,4)) sits at the left child of the root.
    let mut b = NnfBuilder::new(4);
    let (x, y) = (b.pos(1), b.pos(2));
    let root = b.and(vec![x, y]);
    let v = balanced(4);
    let s = compile(&b.finish(root), &v).unwrap();
    let (left, right) = v.children(v.root()).unwrap();
    assert_eq!(s.node(s.root()).position(), Some(left));
    assert_eq!(s.sdds_at(v.root()).unwrap(), [s.root()].into_iter().collect());
    assert_eq!(s.sdds_at(left).unwrap(), [s.root()].into_iter().collect());
    assert!(s.sdds_at(right).unwrap().is_empty());
    // x1 & x2 with x3, x4 free.
    assert_eq!(s.count_models(), BigUint::from(4u8));
}

#[test]
fn literal_flip_complements_inputs() {
    let mut b = NnfBuilder::new(2);
    let (x, y) = (b.pos(1), b.pos(2));
    let r = b.and(vec![x, y]);
    let s = compile(&b.finish(r), &balanced(2)).unwrap();
    let f = s.negate_by_literal_flip();
    assert_eq!(f.size(), s.size());
    let t = f.truth_table().unwrap();
    assert_eq!(t.bits().collect::<Vec<_>>(), vec![true, false, false, false]);
}

#[test]
fn lower_bound_values() {
    assert_eq!(sdd_lower_bound_from_cc(4), 2);
    assert_eq!(sdd_lower_bound_from_cc(12 / 3), 2);
    assert_eq!(sdd_lower_bound_from_cc(0), 1);
    assert_eq!(sdd_lower_bound_from_cc(9), 4);
}

#[test]
fn text_roundtrip() {
    let c = fig1_circuit();
    let v = Arc::new(balanced(4));
    let s = compile(&c, &v).unwrap();
    let back = Sdd::parse(&s.to_text(), v.clone()).unwrap();
    assert_eq!(back, s);
    let rho: Assignment = [(3, false)].into_iter().collect();
    let r = s.restrict(&rho).unwrap();
    let back = PrunedSdd::parse(&r.to_text(), r.vtree().clone()).unwrap();
    assert_eq!(back, r);
    assert!(Sdd::parse("sdd 1\nD 5 6 1 0 1\n", v.clone()).is_err());
    assert!(Sdd::parse("sdd 2\nT 1\n", v).is_err());
}

#[test]
fn counting_and_nnf_view_agree() {
    let c = fig1_circuit();
    let s = compile(&c, &Vtree::build(&[1, 2, 3, 4], VtreeShape::Random(9)).unwrap()).unwrap();
    let nnf = s.to_nnf(4);
    assert_eq!(nnf.check_decomposable(), crate::Decomposability::Ok);
    assert_eq!(nnf.weighted_count_ddnnf(&Default::default()).unwrap(), 6.0);
}

#[test]
fn compression_preserves_function() {
    let c = fig1_circuit();
    let v = Arc::new(balanced(4));
    let mut m = SddManager::new(v.clone()).with_compression(true);
    let root = m.compile(&c).unwrap();
    let s = m.export(root);
    assert_eq!(s.truth_table().unwrap(), c.truth_table().unwrap());
    assert_eq!(s.validate(), Validity::Ok);
}

#[test]
fn shell_disjointness() {
    let c = fig1_circuit();
    let v = balanced(4);
    let s = compile(&c, &v).unwrap();
    let b = v.find_balanced_vertex().unwrap();
    let shell = v.shell_partition(b).unwrap().shell;
    for bits in 0..(1u64 << shell.len()) {
        let rho = Assignment::from_bits(&shell, bits);
        assert_eq!(check_shell_disjointness(&s, b, &rho).unwrap(), ShellCheck::Ok);
    }
    let not_shell: Assignment = [(1, true)].into_iter().collect();
    assert!(matches!(
        check_shell_disjointness(&s, b, &not_shell),
        Err(Error::NotShell(_))
    ));
}

#[test]
fn shell_disjointness_detects_duplicated_element() {
    // Vtree ((1,2),3); two distinct ids both computing x1 as primes at (1,2).
    let v = Vtree::build(&[1, 2, 3], VtreeShape::LeftLinear).unwrap();
    let b = v.parent(v.leaf_of(1).unwrap()).unwrap();
    let lit = |var, pos: bool| SddNode::Literal {
        leaf: v.leaf_of(var).unwrap(),
        lit: if pos { Lit::pos(var) } else { Lit::neg(var) },
    };
    let copy = SddNode::Decision { vnode: b, elements: vec![(2, TRUE), (3, FALSE)] };
    let s = hand_sdd(
        &v,
        vec![
            (FALSE, SddNode::False),
            (TRUE, SddNode::True),
            (2, lit(1, true)),
            (3, lit(1, false)),
            (4, copy.clone()),
            (5, copy),
            (6, lit(3, true)),
            (7, SddNode::Decision { vnode: v.root(), elements: vec![(4, 6), (5, 6)] }),
        ],
    );
    assert_eq!(s.validate(), Validity::Violation { node: 7, kind: ViolationKind::Overlap });
    let rho: Assignment = [(3, true)].into_iter().collect();
    assert_eq!(check_shell_disjointness(&s, b, &rho).unwrap(), ShellCheck::Violation(4, 5));
}
