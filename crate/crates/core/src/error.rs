use crate::Var;

/// Maximum number of variables the brute-force truth-table oracle will enumerate.
pub const ORACLE_VAR_CAP: usize = 24;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("variable {0} is not assigned")]
    Unassigned(Var),

    #[error("{0} variables exceed the {ORACLE_VAR_CAP}-variable oracle cap")]
    OracleCap(usize),

    #[error("{what} has {got} variables, above the enumeration cap of {cap}")]
    EnumerationCap {
        what: &'static str,
        got: usize,
        cap: usize,
    },

    #[error("malformed {kind} input at line {line}: {msg}")]
    Parse {
        kind: &'static str,
        line: usize,
        msg: String,
    },

    #[error("invalid structure: {0}")]
    Invalid(String),

    #[error("variable {0} is not covered by the vtree")]
    VarMismatch(Var),

    #[error("node {0} is not a vertex of the vtree")]
    NoSuchVertex(usize),

    #[error("circuit is not decomposable: AND node {node} shares variable {var}")]
    NotDecomposable { node: usize, var: Var },

    #[error("circuit is not deterministic at OR node {0}")]
    NotDeterministic(usize),

    #[error("determinism of OR node {0} cannot be decided under the oracle cap")]
    DeterminismUnknown(usize),

    #[error("not a shell restriction: {0}")]
    NotShell(String),

    #[error("cover is not disjoint: rectangles {0} and {1} overlap")]
    OverlappingCover(usize, usize),

    #[error("diagram contains an OR node ({0}); path counting would be unsound")]
    HasOrNode(usize),

    #[error("diagram is not ordered: {0}")]
    Unordered(String),

    #[error("compilation exceeded the budget of {0} elements")]
    Budget(usize),

    #[error("bad parameter: {0}")]
    Parameter(String),

    #[error("{0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(kind: &'static str, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        kind,
        line,
        msg: msg.into(),
    }
}
