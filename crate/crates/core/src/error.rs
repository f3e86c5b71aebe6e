use std::fmt;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("automata are defined over different alphabets")]
    AlphabetMismatch,
    #[error("automaton is not complete: state {state} has no transition on `{event}`")]
    NotComplete { state: u32, event: String },
    #[error("automaton is not deterministic: {0}")]
    NotDeterministic(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("state budget of {limit} exceeded{}", detail_suffix(.detail))]
    BudgetExceeded { limit: usize, detail: Option<String> },
    #[error("time limit exceeded")]
    Timeout,
    #[error("observation mask is not defined on the automaton's alphabet")]
    MaskDomainMismatch,
    #[error("method not applicable: {0}")]
    MethodInapplicable(String),
    #[error("system is not observation extendable")]
    NotExtendable,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

fn detail_suffix(detail: &Option<String>) -> String {
    detail.as_ref().map(|d| format!(" ({d})")).unwrap_or_default()
}

impl Error {
    pub(crate) fn budget(limit: usize) -> Self {
        Error::BudgetExceeded { limit, detail: None }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Category of an automaton file parse failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax,
    UndefinedState,
    UndefinedEvent,
    DuplicateDeclaration,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParseErrorKind::Syntax => "syntax error",
            ParseErrorKind::UndefinedState => "undefined state",
            ParseErrorKind::UndefinedEvent => "undefined event",
            ParseErrorKind::DuplicateDeclaration => "duplicate declaration",
        })
    }
}

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{column}: {kind}: {message}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub column: usize,
    pub message: String,
}
