//! The star-product engines.
//!
//! Three routes compute the same product and cross-validate each other:
//! a truncated derivative series (exact on polynomials), analytic Gaussian
//! integrals (exact on packets), and a grid-based twisted convolution (the
//! general numerical workhorse). Multi-point chains are evaluated in Fourier
//! form, which is the path every smearing integral reduces to.

pub mod chain;
pub mod closed;
pub mod fft;
pub mod series;

pub use chain::{star_chain_fourier, twist_phase, SeriesOrder, StarChain};
pub use closed::{chain_packet, star_gaussian_closed, tilde_star_2pt};
pub use fft::{sample, star_fft, star_fft_grids};
pub use series::star_series;
