//! Exact arithmetic for the p-adic disc, the cyclotomic tower over `Q_p`
//! and its field of norms, with a verifier for p-cyclic lifts of covers.
//!
//! Module map:
//! - [`padics`]: `Q_p` at tracked precision, Hensel lifting, Teichmüller lifts.
//! - [`cyclotomic`]: the levels `L^m = Q_p(zeta_{p^m})`, Galois action, norms.
//! - [`powerseries`]: truncated series over `Z_p` or `Z_p[zeta_p]`,
//!   Weierstrass preparation and specialization on the disc.
//! - [`ramification`]: lower/upper filtrations, Herbrand functions, differents.
//! - [`normsfield`]: norm-compatible sequences at finite depth.
//! - [`oortlift`]: the Kummer family `T^p = 1 + λ^p W / Z^c` and its checks.

pub mod cyclotomic;
pub mod error;
pub mod normsfield;
pub mod oortlift;
pub mod padics;
pub mod par;
pub mod powerseries;
pub mod ramification;

pub use error::{Error, Result};

/// Default coefficient precision, in p-adic digits.
pub const DEFAULT_PRECISION: u32 = 60;

/// Smallest precision accepted from users.
pub const MIN_PRECISION: u32 = 20;
