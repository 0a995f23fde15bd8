//! File formats and command implementations for the `refractor` binary.
//!
//! Structured input and output is JSON, tabular reports are CSV and surfaces
//! are Wavefront OBJ. Every float is written with 17 significant digits, so
//! outputs round-trip exactly and are byte-identical across thread counts.

use std::path::{Path, PathBuf};

use serde_json::json;

pub mod commands;
pub mod format;
pub mod mesh;
pub mod problem;

pub use problem::{MediaSpec, NormSpec, Problem, ProblemSpec};

/// Failure of a command, carrying its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] refractor_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    /// 1 validation, 2 no refraction, 3 non-convergence, 4 infeasible.
    pub fn exit_code(&self) -> i32 {
        use refractor_core::Error as E;
        match self {
            CliError::Core(E::NoRefraction) => 2,
            CliError::Core(E::NonConvergence { .. }) => 3,
            CliError::Core(E::Infeasible) => 4,
            _ => 1,
        }
    }

    /// Machine-readable form printed on stdout.
    pub fn payload(&self) -> serde_json::Value {
        use refractor_core::Error as E;
        let kind = match self {
            CliError::Core(E::NoRefraction) => "no_refraction",
            CliError::Core(E::NonConvergence { .. }) => "non_convergence",
            CliError::Core(E::Infeasible) => "infeasible",
            CliError::Io { .. } => "io",
            _ => "validation",
        };
        let mut v = json!({ "error": kind, "message": self.to_string() });
        if let CliError::Core(E::NonConvergence { sweeps, residual }) = self {
            v["sweeps"] = json!(sweeps);
            v["residual"] = json!(residual);
        }
        v
    }
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

pub(crate) fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}
