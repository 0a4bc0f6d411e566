//! Jump coding, the free-group shift action, finite-condition forcing, and the
//! self-referential embedding of the F₂ shift into jump-coded reals, all
//! evaluated on finite prefixes.

pub mod conditions;
pub mod embedding;
pub mod forcing;
pub mod free_group;
pub mod jump;
pub mod prf;
pub mod report;
pub mod streams;
pub mod suite;
