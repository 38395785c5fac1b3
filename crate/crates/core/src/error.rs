use thiserror::Error;

#[derive(Debug, Error)]
pub enum GkmError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unknown algebra {0:?} (expected su2, su3 or u1^n)")]
    UnknownAlgebra(String),
    #[error("unsupported manifold {0:?}")]
    UnsupportedManifold(String),
    #[error("algebra {0} is not semisimple; no Cartan-Weyl basis")]
    NotSemisimple(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("operands belong to different algebras")]
    MixedAlgebras,
    #[error("quadrature band limit {have} too small, need {need}")]
    BandLimit { have: usize, need: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unsupported dump schema version {0}")]
    SchemaVersion(u32),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GkmError>;
