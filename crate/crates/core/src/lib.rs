//! Exact-arithmetic toolkit for Iwasawa modules of `GL_2(Z_p)`.

pub mod error;
pub mod padic;
pub mod series;
pub mod characters;
pub mod iwasawa;
pub mod linalg;
pub mod finite;
pub mod duality;
pub mod report;
pub mod selftest;

pub use error::{Error, Result};
pub use padic::{PadicNumber, PrecisionContext, Valuation};
