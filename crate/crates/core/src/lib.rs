//! Lawruk-elliptic boundary-value problems with additional unknown functions
//! on the boundary: slowly varying weights, refined Sobolev norms on mode
//! sequences, a collar operator algebra with the special Green formula,
//! pointwise ellipticity checks and an exact Fourier-mode solver on the unit
//! disk.

pub mod collarops;
pub mod disksolver;
pub mod ellipticity;
pub mod error;
pub mod hormander;
pub mod numeric;
pub mod slowvar;

pub use error::{Error, Result};
