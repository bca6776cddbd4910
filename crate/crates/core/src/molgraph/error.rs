use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("bond from atom {0} to itself")]
    SelfBond(usize),
    #[error("atom index {0} out of range")]
    AtomOutOfRange(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmilesErrorKind {
    #[error("empty input")]
    Empty,
    #[error("unbalanced parenthesis")]
    UnbalancedParenthesis,
    #[error("ring closure {0} never closed")]
    UnclosedRing(u16),
    #[error("unknown element symbol {0:?}")]
    UnknownElement(String),
    #[error("ring closure bond orders disagree")]
    RingBondConflict,
    #[error("unexpected character {0:?}")]
    UnexpectedChar(char),
    #[error("unterminated bracket atom")]
    UnterminatedBracket,
    #[error("bond symbol without a following atom")]
    DanglingBond,
    #[error("ring closure duplicates an existing bond")]
    DuplicateBond,
}

/// SMILES syntax error with the byte offset at which it was detected.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("SMILES error at offset {offset}: {kind}")]
pub struct SmilesError {
    pub offset: usize,
    pub kind: SmilesErrorKind,
}

impl SmilesError {
    pub(crate) fn new(offset: usize, kind: SmilesErrorKind) -> SmilesError {
        SmilesError { offset, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SanitizeError {
    #[error("valence violation on atom {atom} ({element} with valence {valence})")]
    Valence { atom: usize, element: String, valence: u8 },
    #[error("cannot kekulize aromatic system containing atom {atom}")]
    Kekulize { atom: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MolfileError {
    #[error("line {line}: malformed counts line")]
    CountsLine { line: usize },
    #[error("line {line}: truncated atom block")]
    AtomLine { line: usize },
    #[error("line {line}: truncated bond block")]
    BondLine { line: usize },
    #[error("line {line}: unknown element {symbol:?}")]
    UnknownElement { line: usize, symbol: String },
    #[error("line {line}: invalid bond: {source}")]
    Graph { line: usize, source: GraphError },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("pattern error at offset {offset}: {message}")]
pub struct SmartsError {
    pub offset: usize,
    pub message: String,
}

/// Umbrella error for callers that chain several molecular operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChemError {
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error(transparent)]
    Sanitize(#[from] SanitizeError),
    #[error(transparent)]
    Molfile(#[from] MolfileError),
    #[error(transparent)]
    Smarts(#[from] SmartsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("operation requires a sanitized molecule")]
    NotSanitized,
    #[error("fingerprint widths differ ({0} vs {1})")]
    WidthMismatch(usize, usize),
    #[error("fingerprint width {0} is not a power of two")]
    InvalidWidth(usize),
    #[error("no compatible attachment pairing")]
    NoSolution,
}

/// A malformed line in a rule or parameter table.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{table} line {line}: {message}")]
pub struct RuleError {
    pub table: String,
    pub line: usize,
    pub message: String,
}

impl RuleError {
    pub fn new(table: &str, line: usize, message: impl Into<String>) -> RuleError {
        RuleError { table: table.to_string(), line, message: message.into() }
    }
}
