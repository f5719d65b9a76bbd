//! Text format, builtin zoo, DOT export and run records.

pub mod dot;
pub mod record;
pub mod text;
pub mod zoo;

pub use dot::{diagram_dot, schreier_dot};
pub use text::{parse_automaton, print_automaton};
pub use zoo::builtin;
