use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("mixed targets: {0}")]
    MixedTargets(String),
    #[error("cannot infer the signature of a bare 0; write `0 iota_n`")]
    UntypedZero,
    #[error("elements live in different tables: {0} vs {1}")]
    TableMismatch(String, String),
    #[error("cosets are taken modulo different subgroups")]
    SubgroupMismatch,
    #[error("`{0}` has no declared suspension")]
    NoSuspensionFamily(String),
    #[error("`{0}` is not a suspension class")]
    NotASuspension(String),
    #[error("conflicting relations for `{0}`")]
    ConflictingRelations(String),
    #[error("rewrite step limit of {0} exceeded")]
    StepLimit(usize),
    #[error("undetermined: {0}")]
    Undetermined(String),
    #[error("missing group table {0}")]
    MissingTable(String),
    #[error("bad levels ({a},{b}) for r={r}: need 0 <= a < b <= r")]
    BadLevels { a: usize, b: usize, r: usize },
    #[error("class {0} is not in the ring basis")]
    NotInRing(String),
    #[error("unknown query `{0}`")]
    UnknownQuery(String),
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("relations file line {line}: {msg}")]
    RelFile { line: usize, msg: String },
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
