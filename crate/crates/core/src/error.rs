use thiserror::Error;

/// Errors raised by the library. Each variant maps onto a stable code
/// string (see [`Error::code`]) that front ends print verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet must contain at least one symbol")]
    EmptyAlphabet,
    #[error("duplicate symbol {0:?} in alphabet")]
    DuplicateSymbol(String),
    #[error("invalid symbol label {0:?}: labels must be non-empty and contain no '.' or whitespace")]
    InvalidLabel(String),
    #[error("expected {expected} entries, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("negative probability {value} at index {index}")]
    NegativeProb { index: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within 1e-9")]
    BadSum { sum: f64 },
    #[error("row {row} sums to {sum}, expected 1 within 1e-9")]
    BadRowSum { row: usize, sum: f64 },
    #[error("crossover probability {0} outside [0, 1]")]
    BadP(f64),
    #[error("domain symbol {0:?} is not mapped")]
    PartialTable(String),
    #[error("unknown symbol {0}")]
    UnknownSymbol(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("output symbol {0} has zero marginal probability")]
    ZeroMarginal(usize),
    #[error("alphabet of size {0} is too large for the grid oracle (max 5)")]
    AlphabetTooLarge(usize),
    #[error("unsupported grid resolution {0} (use 0.01, 0.02 or 0.05)")]
    BadResolution(f64),
    #[error("did not converge within {0} iterations")]
    NoConvergence(usize),
    #[error("enumeration of {0} items exceeds the guard")]
    TooLarge(u128),
    #[error("symbol at position {0} has an empty preimage")]
    EmptyPreimage(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("rate {rate} does not exceed H(X|f(X)) = {h_x_given_fx}; target code size is zero")]
    RateTooHigh { rate: f64, h_x_given_fx: f64 },
    #[error("H(X|f(X)) = 0: f is injective, use plain Feinstein channel coding instead")]
    DegenerateGamma,
    #[error("H(X'|g(X')) = 0: g is injective, the model reduces to reliable transmission")]
    OuterInjective,
    #[error("no block-length pair with k <= {0}")]
    NoPair(usize),
    #[error("{groups} message groups but only {codewords} codewords")]
    TooFewCodewords { groups: usize, codewords: usize },
    #[error("group of {group_size} messages does not fit the {class_size} typical sequences of its input class")]
    GroupOverflow { group_size: usize, class_size: usize },
    #[error("rate {rate} exceeds the encoder limit H(X')/gamma = {limit}")]
    RateAboveEncoderLimit { rate: f64, limit: f64 },
    #[error("only {achieved} of {requested} codewords found")]
    Exhausted { achieved: usize, requested: u64 },
    #[error("no typical source draw was accepted")]
    NoAcceptedTrials,
    #[error("malformed code file, line {line}: {message}")]
    Format { line: usize, message: String },
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::EmptyAlphabet | Error::DuplicateSymbol(_) | Error::InvalidLabel(_) => "BAD_ALPHABET",
            Error::LengthMismatch { .. } => "LENGTH_MISMATCH",
            Error::NegativeProb { .. } => "NEGATIVE_PROB",
            Error::BadSum { .. } => "BAD_SUM",
            Error::BadRowSum { .. } => "BAD_ROW_SUM",
            Error::BadP(_) => "BAD_P",
            Error::PartialTable(_) => "PARTIAL_TABLE",
            Error::UnknownSymbol(_) => "UNKNOWN_SYMBOL",
            Error::AlphabetMismatch(_) => "ALPHABET_MISMATCH",
            Error::ZeroMarginal(_) => "ZERO_MARGINAL",
            Error::AlphabetTooLarge(_) => "ALPHABET_TOO_LARGE",
            Error::BadResolution(_) => "BAD_RESOLUTION",
            Error::NoConvergence(_) => "NO_CONVERGENCE",
            Error::TooLarge(_) => "TOO_LARGE",
            Error::EmptyPreimage(_) => "EMPTY_PREIMAGE",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::RateTooHigh { .. } => "RATE_TOO_HIGH",
            Error::DegenerateGamma => "DEGENERATE_GAMMA",
            Error::OuterInjective => "OUTER_INJECTIVE",
            Error::NoPair(_) => "NO_PAIR",
            Error::TooFewCodewords { .. } => "TOO_FEW_CODEWORDS",
            Error::GroupOverflow { .. } => "GROUP_OVERFLOW",
            Error::RateAboveEncoderLimit { .. } => "RATE_ABOVE_ENCODER_LIMIT",
            Error::Exhausted { .. } => "EXHAUSTED",
            Error::NoAcceptedTrials => "NO_ACCEPTED_TRIALS",
            Error::Format { .. } => "FORMAT_ERROR",
        }
    }

    /// True for errors that mean "this configuration cannot be realized"
    /// rather than "this input is malformed".
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::RateTooHigh { .. }
                | Error::DegenerateGamma
                | Error::OuterInjective
                | Error::NoPair(_)
                | Error::TooFewCodewords { .. }
                | Error::GroupOverflow { .. }
                | Error::RateAboveEncoderLimit { .. }
                | Error::Exhausted { .. }
                | Error::NoAcceptedTrials
                | Error::TooLarge(_)
                | Error::NoConvergence(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
