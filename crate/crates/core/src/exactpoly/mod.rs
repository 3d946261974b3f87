//! Exact big-integer polynomial arithmetic: multivariate expansion, the
//! (λ, x) pencil polynomial, subresultant resultants, certified real-root
//! isolation, and a floating complex root finder for fibers.

mod bivariate;
mod complexroots;
mod multipoly;
mod realroots;
pub(crate) mod ring;
mod upoly;

pub use bivariate::{substitute_pencil, BivariatePoly};
pub use complexroots::{complex_roots, complex_roots_from, complex_roots_real};
pub use multipoly::MultiPoly;
pub use realroots::{count_real_roots, isolate_real_roots, tolerance_from_f64, IsolatedRealRoot};
pub use ring::ExactRing;
pub use upoly::UPoly;
