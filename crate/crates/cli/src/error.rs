use ricci_core::classify::ClassifyError;
use ricci_core::curvature::CurvatureError;
use ricci_core::graph::GraphError;
use ricci_core::kernel::KernelError;
use ricci_core::transport::TransportError;
use thiserror::Error;

/// Errors surfaced to the user, tagged by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags or flag combinations; exit code 1.
    #[error("usage error: {0}")]
    Usage(String),
    /// Input files that cannot be parsed or used; exit code 2.
    #[error("data error: {0}")]
    Data(String),
    /// A result failed its own consistency checks; exit code 3.
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Internal(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        CliError::Data(format!("{}: {err}", path.display()))
    }
}

fn transport_kind(e: &TransportError) -> fn(String) -> CliError {
    match e {
        TransportError::CertificateFailed(_) => CliError::Internal,
        TransportError::BadAlpha(_) => CliError::Usage,
        _ => CliError::Data,
    }
}

impl From<ricci_core::Error> for CliError {
    fn from(e: ricci_core::Error) -> Self {
        use ricci_core::Error as E;
        let kind: fn(String) -> CliError = match &e {
            E::Transport(t) | E::Curvature(CurvatureError::Transport(t)) => transport_kind(t),
            E::Curvature(CurvatureError::BadSampling(_)) => CliError::Usage,
            E::Graph(GraphError::InvalidParameter(_)) | E::Curvature(CurvatureError::Graph(GraphError::InvalidParameter(_))) => {
                CliError::Usage
            }
            E::Kernel(KernelError::Invariant(_)) => CliError::Internal,
            E::Kernel(KernelError::BadSigma(_)) => CliError::Usage,
            E::Classify(ClassifyError::ZeroNeighbors | ClassifyError::TooFewFolds(_)) => CliError::Usage,
            _ => CliError::Data,
        };
        kind(e.to_string())
    }
}

macro_rules! via_core {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                ricci_core::Error::from(e).into()
            }
        }
    )*};
}

via_core!(
    GraphError,
    ricci_core::graph::ParseError,
    TransportError,
    CurvatureError,
    ricci_core::distribution::HistogramError,
    KernelError,
    ClassifyError,
    ricci_core::io::IoError
);
