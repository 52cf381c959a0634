//! Process exit codes.

use crate::formats::ParseError;

pub const SUCCESS: u8 = 0;
/// I/O failures and numerical errors (singular systems, unsupported sizes).
pub const FAILURE: u8 = 1;
/// Malformed command lines, input files or configs.
pub const PARSE_ERROR: u8 = 2;
/// A variational run stopped before reaching its cost tolerance. Outputs
/// are still written.
pub const NOT_CONVERGED: u8 = 3;
/// `decompose --verify-circuit` found a discrepancy.
pub const VERIFICATION_FAILED: u8 = 4;

#[derive(Debug, thiserror::Error)]
#[error("not converged: {0}")]
pub struct NotConverged(pub String);

#[derive(Debug, thiserror::Error)]
#[error("verification failed: {0}")]
pub struct VerificationFailed(pub String);

pub fn code_for(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ParseError>().is_some() || err.downcast_ref::<clap::Error>().is_some() {
        return PARSE_ERROR;
    }
    for cause in err.chain() {
        if cause.is::<ParseError>() || cause.is::<clap::Error>() {
            return PARSE_ERROR;
        }
        if cause.is::<NotConverged>() {
            return NOT_CONVERGED;
        }
        if cause.is::<VerificationFailed>() {
            return VERIFICATION_FAILED;
        }
    }
    FAILURE
}
