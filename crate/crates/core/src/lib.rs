//! Knowledge-compilation toolkit: NNF circuits, vtrees, SDDs, OR-FBDDs,
//! communication protocols extracted from them, and generators for the
//! function families used to probe their size.
//!
//! Every transformation is checked at small scale against a brute-force
//! truth-table oracle (see [`truth_table`]), capped at
//! [`ORACLE_VAR_CAP`] variables.

pub mod bdd;
pub mod circuit;
pub mod error;
pub mod experiment;
pub mod families;
pub mod literal;
pub mod protocols;
pub mod random;
pub mod sdd;
pub mod simulate;
pub mod truth_table;
pub mod vtree;

pub use circuit::{Decomposability, Determinism, NnfBuilder, NnfCircuit, NnfNode, Weights};
pub use error::{Error, Result, ORACLE_VAR_CAP};
pub use literal::{Assignment, Lit, Var};
pub use truth_table::TruthTable;
pub use vtree::{PrunedVtree, ShellPartition, Topology, Vtree, VtreeId, VtreeNode, VtreeShape};
pub use sdd::{PrunedSdd, Sdd, SddId, SddManager, SddNode, Validity, ViolationKind};
pub use bdd::{BddId, BddNode, OneWayProtocol, OrFbdd, PathWitness, Structure};
pub use experiment::{run_experiment, ExperimentSpec, Repr, SizeRecord, Strategy};
pub use families::{gen, Family, FamilyInstance, GridPartition};
pub use protocols::{CommMatrix, Rectangle, RectangleCover, UnambiguousProtocol, Yannakakis};
pub use sdd::{compile, SddOver, VtreeKind};
pub use simulate::{convert, Conversion};
