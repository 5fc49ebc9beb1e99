//! Stratification machinery for epistemic arithmetic with ordinal-indexed
//! knowledge operators below ω·ω.

pub mod gen;
pub mod intended;
pub mod ordinal;
pub mod prove;
pub mod semantics;
pub mod stratify;
pub mod syntax;
pub mod theory;
