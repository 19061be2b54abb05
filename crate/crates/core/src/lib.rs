//! Exhaustive verification of supermodularity, metric and LSH properties
//! for set similarities on small universes.

pub mod constructions;
pub mod generate;
pub mod lsh;
pub mod pgf;
pub mod report;
pub mod scalar;
pub mod set;
pub mod setfn;
pub mod similarity;
pub mod table1;

pub use scalar::{parse_rational, rat, Rational, Scalar};
pub use set::{Subset, Universe};
pub use setfn::{Certificate, SetFunctionTable, Verdict};
pub use similarity::{classify, SimilaritySpec, SimilarityVerdict};
