//! Presentations of fundamental groups attached to the singular locus of
//! Lauricella's `F_C`, together with the machinery used to derive and
//! cross-check them: free-group words, coset enumeration,
//! Reidemeister–Schreier rewriting, Tietze reduction, finite-quotient
//! evidence, exact polynomial arithmetic and a numerical braid-monodromy
//! engine for the plane cut of the three-variable case.

pub mod cosets;
pub mod equivalence;
mod error;
pub mod exactpoly;
pub mod monodromy;
pub mod presentations;
pub mod subgroup;
pub mod tietze;
pub mod words;

pub use error::{Error, Result};
pub use presentations::{IndexPair, Presentation};
pub use words::{Alphabet, Syllable, Word};
