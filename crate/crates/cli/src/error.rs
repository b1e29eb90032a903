// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<cprsim_core::IntegrationError> for CliError {
    fn from(e: cprsim_core::IntegrationError) -> Self {
        use cprsim_core::IntegrationError as E;
        match e {
            E::NonFinite { .. } => CliError::Numerical(e.to_string()),
            E::Config(_) | E::Params(_) => CliError::Validation(e.to_string()),
        }
    }
}
