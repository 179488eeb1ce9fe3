//! Conformal modules of stretched rectangular frames.
//!
//! The frame `D_H^σ` is the ring domain `f_H([-1,1]² \ [-σ,σ]²)` where
//! `f_H(x + iy) = Hx + iy`. Three independent routes to its module are
//! provided and cross-checked:
//!
//! * [`frame_exact`]: the closed elliptic-integral chain for `σ = 1/2` and
//!   the Bowman closed form for `H = 1`,
//! * [`frame_asymptotic`]: the large-`H` estimator chain and leading-order
//!   asymptotes,
//! * [`oracle`]: finite-difference capacity computations on rectilinear
//!   grids with Richardson extrapolation.
//!
//! All module values use the normalization `m(D) = (1/2π) ln(r₂/r₁)` for
//! ring domains, which equals `1 / capacity`, and the aspect ratio `a/b`
//! for quadrilaterals.

pub mod elliptic;
pub mod error;
pub mod estimate;
pub mod frame_asymptotic;
pub mod frame_exact;
pub mod harness;
pub mod oracle;
mod roots;

pub use elliptic::{EllipticModulus, Tolerance};
pub use error::{Error, Result};
pub use estimate::{Method, ModuleEstimate};
pub use frame_exact::FrameGeometry;
