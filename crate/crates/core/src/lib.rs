//! Hopping cyclic codes, optical orthogonal codes, frequency-hopping
//! sequence sets and weighted multiple-use codes built as independent sets
//! of a graph on cyclic classes of words.

pub mod bounds;
pub mod cli;
pub mod code;
pub mod codefile;
pub mod budget;
pub mod concentration;
pub mod error;
pub mod graph;
pub mod packed;
pub mod pipeline;
pub mod sci;
pub mod solver;
pub mod volume;
pub mod words;

pub use budget::Budget;
pub use error::{Error, Result};
pub use words::{CyclicClass, Word};
