//! Star products on Gaussian test functions, an exactly computable free
//! field on a spatial circle, and the linear-algebra analysis of the operator
//! space the two generate: Gram matrices, isotropic quotients, Krein
//! decompositions, and deformation sweeps toward the commutative limit.
//!
//! Three independent star-product engines (derivative series, analytic
//! Gaussian integrals, grid-based twisted convolution) cross-validate each
//! other; every smearing integral reduces to finite exact sums because the
//! test-function class has closed-form Fourier transforms.

pub mod error;
pub mod experiment;
pub mod gns;
pub mod grid;
pub mod linalg;
pub mod packet;
pub mod poly;
pub mod profile;
pub mod star;
pub mod wightman;
pub mod theta;

pub use error::{Error, Result};
pub use gns::{GramMatrix, GramOptions, KreinDecomposition, SequenceVector};
pub use grid::{BoxSpec, GridFunction};
pub use packet::{GaussianPacket, PacketTerm, TestFunction};
pub use profile::{DampingProfile, ProfileKind, StarVariant};
pub use star::{SeriesOrder, StarChain};
pub use wightman::{ModeField, PairingTable};
pub use theta::ThetaMatrix;
