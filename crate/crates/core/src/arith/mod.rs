//! Exact and modular arithmetic.

pub mod bipoly;
pub mod gcd;
pub mod modp;
pub mod mpoly;
pub mod qlaurent;
pub mod ratfunc;
pub mod upoly;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("invalid modulus {0}: expected an odd prime below 2^31")]
    InvalidModulus(u64),
    #[error("unlucky prime {0}: a denominator vanishes modulo p")]
    UnluckyPrime(u64),
    #[error("specialization v0 = {0} is not invertible modulo p")]
    InvalidSpecialization(u64),
    #[error("zero input where a nonzero polynomial is required")]
    ZeroInput,
    #[error("division by zero")]
    DivisionByZero,
    #[error("value is not integral in q")]
    NotIntegral,
}
