pub mod axioms;
pub mod cli;
pub mod formula;
pub mod kernel;
pub mod model;
