//! Special functions and quadrature kernels shared by every distribution.

pub mod halfline;
pub mod parabolic;
pub mod quadrature;
pub mod rules;
pub mod special;

pub use halfline::{halfline_sqrtp_gaussian_integral, power_gaussian_halfline, HalflineMethod, Sign};
pub use parabolic::{parabolic_cylinder_d, parabolic_cylinder_d_scaled, DBranch};
pub use special::{erf, erfc, gamma};
