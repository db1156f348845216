use thiserror::Error;

use crate::torus::TorusPoint;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value {value} at node {node:?}")]
    NonFinite { node: TorusPoint, value: f64 },

    /// The spectral parameter sits on (or numerically next to) a sampled
    /// kinetic energy, so a resolvent sum would blow up.
    #[error("z = {z} lies within {distance:e} of the sampled energy {energy} at node {node:?}")]
    PoleProximity {
        z: f64,
        energy: f64,
        distance: f64,
        node: TorusPoint,
    },

    #[error("no sign change of the two-body determinant at k = {k:?} in bracket [{lo}, {hi}]")]
    NoSignChange { k: TorusPoint, lo: f64, hi: f64 },

    /// A channel determinant is non-positive, so `z` is not on the side of
    /// the essential spectrum where the Birman-Schwinger kernel is defined.
    #[error("channel determinant {delta} <= 0 at p = {p:?} for z = {z}")]
    SideViolation { p: TorusPoint, z: f64, delta: f64 },

    #[error("no zero of the Fredholm determinant found at K = {k:?}; sampled {} values", samples.len())]
    NotFound {
        k: TorusPoint,
        /// `(z, D(z))` pairs visited by the search.
        samples: Vec<(f64, f64)>,
    },

    #[error("dense operator of {rows} rows exceeds the configured limit {limit}")]
    SizeLimit { rows: usize, limit: usize },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("at momentum {at:?}: {source}")]
    AtMomentum {
        at: TorusPoint,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn at(self, at: TorusPoint) -> Self {
        Error::AtMomentum {
            at,
            source: Box::new(self),
        }
    }
}
