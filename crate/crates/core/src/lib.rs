pub mod automata;
pub mod cli;
pub mod error;
pub mod inspection;
pub mod lookahead;
pub mod normalform;
pub mod oracle;
pub mod recognizability;
pub mod syntax;
pub mod terms;
pub mod transducer;

pub use error::{Error, Failure, Reason, Result};
pub use terms::{Name, Node, RankedAlphabet, Term, UPattern};
pub use transducer::{Rule, Transducer};
