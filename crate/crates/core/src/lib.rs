//! Numerical toolkit for generalized-function spaces with cone-shaped
//! spectral support: indicator profiles and their conjugates, defining
//! sequences, cone geometry, test-function spaces, Wick-power coefficient
//! checks and Laplace-transform bounds.

pub mod cone;
pub mod error;
pub mod extended;
pub mod lowdisc;
pub mod par;
pub mod profile;
pub mod quad;
pub mod report;
pub mod scenario;
pub mod search;
pub mod sequence;
pub mod space;
pub mod laplace;
pub mod wick;

pub use error::{GsgError, Result};
pub use extended::ExtendedValue;
pub use profile::FunctionProfile;
pub use report::{BoundReport, Status, Witness};
