#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

//! Construction and curvature verification of neutral-signature
//! cohomogeneity-one metrics `dt² + f²θ² − g²·g_can` on ruled surfaces.

pub mod construct;
pub mod curvature;
pub mod einstein;
pub mod error;
pub mod fd;
pub mod gray;
pub mod io;
pub mod kahler;
pub mod turning;
pub mod params;
pub mod poly;
pub mod product;
pub mod profile;
pub mod quadrature;
pub mod report;
pub mod sweep;
pub mod verify;

pub use error::{Error, Result};
