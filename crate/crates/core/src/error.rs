use std::fmt;

/// Crate-wide error type.
#[derive(Debug)]
pub enum Error {
    /// Malformed input line (pedigree, genotype, phenotype, or spec file).
    Parse { line: usize, message: String },
    /// The same external identifier appears twice.
    DuplicateId(String),
    /// A parent is referenced but never defined, and placeholder creation is off.
    DanglingParent { child: String, parent: String },
    /// The parent relation contains a cycle; the ids involved are listed.
    Cycle(Vec<String>),
    /// A requested subject id is not a pedigree member (or not in the cohort).
    UnknownSubject(String),
    /// Cholesky factorization failed at the given pivot; usually unmerged
    /// duplicate rows such as monozygotic twins.
    NotPositiveDefinite { pivot: usize },
    /// Marker carries no variation on the effective subset.
    Monomorphic,
    /// One allele of a multi-allelic marker is unobserved.
    MonomorphicComponent(usize),
    /// Trait is constant on the effective subset, so the statistic is undefined.
    TraitConstant,
    /// Fewer than the minimum number of usable subjects remain.
    TooFewSubjects { needed: usize, got: usize },
    /// Genotype token does not have exactly two alleles.
    InconsistentArity { marker: String, token: String },
    /// Genotype token could not be parsed.
    MalformedGenotype { marker: String, token: String },
    /// Every subject is missing at this marker.
    AllMissing(String),
    /// The multi-allelic covariance matrix F is singular.
    SingularF,
    /// The generic score-test information matrix is singular.
    SingularInformation,
    /// A stratified analysis failed inside one population.
    Population { label: String, source: Box<Error> },
    /// Pedigree growth did not reach its target within the retry budget.
    GrowthBudget { attempts: usize },
    /// Invalid configuration or experiment spec.
    InvalidConfig(String),
    Io(std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::DuplicateId(id) => write!(f, "duplicate identifier '{id}'"),
            Error::DanglingParent { child, parent } => write!(
                f,
                "individual '{child}' references undefined parent '{parent}' \
                 (enable placeholder founders to accept this)"
            ),
            Error::Cycle(ids) => write!(f, "pedigree cycle involving: {}", ids.join(", ")),
            Error::UnknownSubject(id) => write!(f, "unknown subject '{id}'"),
            Error::NotPositiveDefinite { pivot } => write!(
                f,
                "correlation matrix is not positive definite at pivot {pivot}; \
                 check for duplicated subjects or unmerged monozygotic twins"
            ),
            Error::Monomorphic => write!(f, "marker is monomorphic on the effective subset"),
            Error::MonomorphicComponent(j) => {
                write!(f, "allele component {j} is unobserved (monomorphic)")
            }
            Error::TraitConstant => write!(f, "trait is constant on the effective subset"),
            Error::TooFewSubjects { needed, got } => {
                write!(f, "need at least {needed} usable subjects, got {got}")
            }
            Error::InconsistentArity { marker, token } => {
                write!(f, "marker '{marker}': genotype '{token}' is not diploid")
            }
            Error::MalformedGenotype { marker, token } => {
                write!(f, "marker '{marker}': malformed genotype token '{token}'")
            }
            Error::AllMissing(id) => write!(f, "marker '{id}' has no non-missing subjects"),
            Error::SingularF => write!(f, "allele covariance matrix F is singular"),
            Error::SingularInformation => write!(f, "information matrix is singular"),
            Error::Population { label, source } => {
                write!(f, "population '{label}': {source}")
            }
            Error::GrowthBudget { attempts } => {
                write!(f, "pedigree growth budget exhausted after {attempts} attempts")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            Error::Population { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
