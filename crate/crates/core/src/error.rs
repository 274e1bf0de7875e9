//! Errors of the whole pipeline.

use crate::mdp::MdpError;
use crate::parser::ParseError;
use crate::translate::TranslateError;
use crate::wp::WpError;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{}", render(.0))]
    Parse(Vec<ParseError>),
    #[error(transparent)]
    Translate(#[from] TranslateError),
    #[error(transparent)]
    Wp(#[from] WpError),
    #[error(transparent)]
    Mdp(#[from] MdpError),
}

fn render(errors: &[ParseError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

impl From<Vec<ParseError>> for Error {
    fn from(errors: Vec<ParseError>) -> Self {
        Error::Parse(errors)
    }
}

impl From<ParseError> for Error {
    fn from(error: ParseError) -> Self {
        Error::Parse(vec![error])
    }
}
