use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision of {digits} digits exceeds the representable limit of {limit} for p = {p}")]
    PrecisionTooLarge { p: u64, digits: u32, limit: u32 },
    #[error("invalid precision context: {0}")]
    InvalidContext(String),
    #[error("division by exact zero")]
    DivisionByZero,
    #[error("division by a value indistinguishable from zero (known only mod p^{0})")]
    DivisionByInexactZero(i64),
    #[error("operands live over different primes ({0} and {1})")]
    PrimeMismatch(u64, u64),
    #[error("argument outside convergence domain: {0}")]
    OutsideDomain(String),
    #[error("expected a p-adic unit: {0}")]
    NotUnit(String),
    #[error("expected a p-adic integer: {0}")]
    NotIntegral(String),
    #[error("substituted series must have vanishing constant term")]
    NonzeroConstantTerm,
    #[error("truncation degrees differ ({0} vs {1})")]
    TruncationMismatch(usize, usize),
    #[error("Weierstrass degree undetermined at this truncation: {0}")]
    Undetermined(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("character verification failed: {0}")]
    CharacterVerification(String),
    #[error("character conductor exceeds level {0}")]
    ConductorTooLarge(u32),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("element is not in the Iwahori subgroup image: {0}")]
    NotInIwahori(String),
    #[error("operation not defined on this Iwahori cell: {0}")]
    SideMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
