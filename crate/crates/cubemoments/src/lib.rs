//! Exact statistics of the number of fixed-dimensional subcubes contained in
//! a random subset of the discrete `n`-cube.
//!
//! The crate computes mixed, pure, and central moments of these counts as
//! closed-form bivariate polynomials in `n` and `2^n` with exact rational
//! coefficients, checks the moment/cumulant consequences of asymptotic
//! normality at desk scale, and ships enumeration and sampling oracles that
//! cross-validate the symbolic pipeline.
//!
//! Probability model: every point of `{0,1}^n` belongs to the random subset
//! independently with probability `p` (default 1/2), so a fixed
//! `r`-dimensional subcube is fully contained with probability `p^{2^r}`.

pub mod asymptotics;
pub mod cubes;
pub mod exactalg;
pub mod moments;
pub mod oracle;

pub use exactalg::{BiPoly, Rat, RenderFormat};
pub use moments::{Budget, MomentSpec};
