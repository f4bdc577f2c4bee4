//! Checks against the hand-written fixture files.

use std::path::PathBuf;
use std::sync::Arc;

use kc_core::families::{gen, Family};
use kc_core::protocols::{cover_from_protocol, extract_unambiguous, Yannakakis};
use kc_core::{
    compile, convert, Assignment, NnfCircuit, PrunedSdd, Sdd, Structure, Validity, ViolationKind, Vtree,
};

fn fixture(name: &str) -> String {
    let path: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn load_sdd(stem: &str) -> Sdd {
    let vt = Vtree::parse(&fixture(&format!("{stem}.vtree"))).unwrap();
    Sdd::parse(&fixture(&format!("{stem}.sdd")), Arc::new(vt)).unwrap()
}

#[test]
fn fig1_sdd_counts_six() {
    let s = load_sdd("fig1");
    let c = NnfCircuit::parse(&fixture("fig1.nnf")).unwrap();
    assert_eq!(s.validate(), Validity::Ok);
    assert_eq!(s.count_models(), 6u32.into());
    assert_eq!(c.count_models_brute().unwrap(), 6);
    assert_eq!(s.truth_table().unwrap(), c.truth_table().unwrap());
}

#[test]
fn fig1_fixture_is_what_compile_produces() {
    let vt = Vtree::parse(&fixture("fig1.vtree")).unwrap();
    let c = NnfCircuit::parse(&fixture("fig1.nnf")).unwrap();
    assert_eq!(compile(&c, &vt).unwrap().to_text(), fixture("fig1.sdd"));
}

#[test]
fn fig1_restricted_by_c_false_is_d() {
    let s = load_sdd("fig1");
    let r = s.restrict(&Assignment::parse("3=0").unwrap()).unwrap();
    let t = r.tables_of(&[r.root()], &[1, 2, 4], &Assignment::new()).unwrap().remove(0);
    for bits in 0..8u64 {
        assert_eq!(t.get(bits as usize), bits & 4 != 0);
    }
}

#[test]
fn fig2_restriction_prunes_three_subtrees() {
    let s = load_sdd("fig2");
    let rho = Assignment::parse("2=0,1=1,5=1,6=1").unwrap();
    let r = s.restrict(&rho).unwrap();
    assert_eq!(r.validate(), Validity::Ok);
    assert_eq!(r.vtree().stubs().len(), 2);
    // (A & B) | (~B & C & E) | (D & F) becomes C | D.
    let t = r.tables_of(&[r.root()], &[3, 4], &Assignment::new()).unwrap().remove(0);
    assert_eq!(t.bits().collect::<Vec<_>>(), vec![false, true, true, true]);
    let back = PrunedSdd::parse(&r.to_text(), r.vtree().clone()).unwrap();
    assert_eq!(back.to_text(), r.to_text());
}

#[test]
fn corrupted_sdd_reports_overlap_at_the_duplicated_node() {
    let s = load_sdd("corrupted");
    assert_eq!(
        s.validate(),
        Validity::Violation {
            node: 4,
            kind: ViolationKind::Overlap
        }
    );
}

#[test]
fn fig3_converts_within_bound() {
    let c = NnfCircuit::parse(&fixture("fig3.nnf")).unwrap();
    let conv = convert(&c).unwrap();
    assert_eq!(conv.fbdd.check_structure(None), Structure::Ok);
    assert_eq!(conv.fbdd.truth_table(&[1, 2, 3, 4]).unwrap(), c.truth_table().unwrap());
    assert!(conv.within_bound());
    assert_eq!(c.count_models_brute().unwrap(), 10);
}

#[test]
fn h0_protocol_matches_the_function_everywhere() {
    let inst = gen(Family::H0 { m: 1 }).unwrap();
    let vt = Vtree::build(&[1, 2, 3], kc_core::VtreeShape::Balanced).unwrap();
    let s = compile(&inst.circuit, &vt).unwrap();
    let b = vt.find_balanced_vertex().unwrap();
    let p = extract_unambiguous(&s, &vt.shell_partition(b).unwrap()).unwrap();
    for bits in 0..8u64 {
        let a = Assignment::from_bits(&[1, 2, 3], bits);
        let (rho, phi): (Assignment, Assignment) = {
            let part = p.partition();
            (
                part.shell.iter().map(|&v| (v, a.get(v).unwrap())).collect(),
                part.inner.iter().map(|&v| (v, a.get(v).unwrap())).collect(),
            )
        };
        assert_eq!(p.run(&rho, &phi).unwrap(), bits == 7);
    }
    let cover = cover_from_protocol(&p).unwrap();
    let y = Yannakakis::new(&cover, &p.matrix().unwrap()).unwrap();
    let rep = y.verify();
    assert!(rep.holds());
    assert!(rep.max_bits <= (p.cost_bound() + 1).pow(2));
}
