//! Parsing, translation and exact bounded checking of probabilistic B
//! machines.

pub mod ast;
pub mod error;
mod exact;
pub mod mdp;
pub mod parser;
pub mod prism;
pub mod translate;
pub mod wp;

pub use ast::{Expr, Machine, Rational, Substitution, Value};
pub use error::Error;
pub use mdp::{check_expectations, CheckOptions, CheckReport, CheckVerdict, MdpError};
pub use parser::{parse_machine, pretty_print, ParseError};
pub use prism::{emit, emit_query, PrismModel};
pub use translate::{translate, TranslateError};
pub use wp::{check_obligations, Obligations, StateBox, Valuation, Verdict, WpError};
