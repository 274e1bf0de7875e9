//! Tokenizer for pAMN source text.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use super::{ParseError, ParseErrorKind};
use crate::ast::{parse_decimal, Rational, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Keyword {
    Machine,
    Sees,
    Constants,
    Properties,
    Variables,
    Invariant,
    Expectations,
    Initialisation,
    Operations,
    End,
    Begin,
    Pre,
    Then,
    Pchoice,
    Of,
    Or,
    If,
    Else,
    Skip,
    Frac,
    Real,
}

impl Keyword {
    fn from_word(word: &str) -> Option<Keyword> {
        use Keyword::*;
        Some(match word {
            "MACHINE" => Machine,
            "SEES" => Sees,
            "CONSTANTS" => Constants,
            "PROPERTIES" => Properties,
            "VARIABLES" => Variables,
            "INVARIANT" => Invariant,
            "EXPECTATIONS" => Expectations,
            "INITIALISATION" | "INITIALIZATION" => Initialisation,
            "OPERATIONS" => Operations,
            "END" => End,
            "BEGIN" => Begin,
            "PRE" => Pre,
            "THEN" => Then,
            "PCHOICE" => Pchoice,
            "OF" => Of,
            "OR" => Or,
            "IF" => If,
            "ELSE" => Else,
            "skip" => Skip,
            "frac" => Frac,
            "real" => Real,
            _ => return None,
        })
    }

    pub fn text(self) -> &'static str {
        use Keyword::*;
        match self {
            Machine => "MACHINE",
            Sees => "SEES",
            Constants => "CONSTANTS",
            Properties => "PROPERTIES",
            Variables => "VARIABLES",
            Invariant => "INVARIANT",
            Expectations => "EXPECTATIONS",
            Initialisation => "INITIALISATION",
            Operations => "OPERATIONS",
            End => "END",
            Begin => "BEGIN",
            Pre => "PRE",
            Then => "THEN",
            Pchoice => "PCHOICE",
            Of => "OF",
            Or => "OR",
            If => "IF",
            Else => "ELSE",
            Skip => "skip",
            Frac => "frac",
            Real => "real",
        }
    }

    pub fn is_clause(self) -> bool {
        use Keyword::*;
        matches!(
            self,
            Machine
                | Sees
                | Constants
                | Properties
                | Variables
                | Invariant
                | Expectations
                | Initialisation
                | Operations
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Decimal(Rational),
    Kw(Keyword),
    LParen,
    RParen,
    Comma,
    Semi,
    /// `:=`
    Becomes,
    /// `:` or `∈`
    Colon,
    /// `||`
    Parallel,
    /// `|=>`
    Implies,
    /// `<--`
    Arrow,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
    Amp,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Int(i) => return write!(f, "`{i}`"),
            Tok::Decimal(r) => return write!(f, "`{r}`"),
            Tok::Kw(k) => return write!(f, "`{}`", k.text()),
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Becomes => ":=",
            Tok::Colon => ":",
            Tok::Parallel => "||",
            Tok::Implies => "|=>",
            Tok::Arrow => "<--",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Lt => "<",
            Tok::Le => "<=",
            Tok::Eq => "=",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Amp => "&",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "`{s}`")
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

struct Cursor<'s> {
    src: &'s str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'s> Cursor<'s> {
    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn peek_at(&self, n: usize) -> Option<char> {
        self.src[self.pos..].chars().nth(n)
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn starts_with(&self, s: &str) -> bool {
        self.src[self.pos..].starts_with(s)
    }

    fn mark(&self) -> Span {
        Span {
            begin: self.pos,
            end: self.pos,
            line: self.line,
            column: self.column,
        }
    }
}

/// Splits `src` into tokens, ending with `Tok::Eof`. Unknown characters and
/// unterminated comments are reported and skipped.
pub fn tokenize(src: &str) -> (Vec<Token>, Vec<ParseError>) {
    let mut cur = Cursor {
        src,
        pos: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    let mut errors = Vec::new();

    // Multi-character operators, longest first.
    const SYMBOLS: &[(&str, Tok)] = &[
        ("|=>", Tok::Implies),
        ("<--", Tok::Arrow),
        ("||", Tok::Parallel),
        (":=", Tok::Becomes),
        ("<=", Tok::Le),
        (">=", Tok::Ge),
        ("(", Tok::LParen),
        (")", Tok::RParen),
        (",", Tok::Comma),
        (";", Tok::Semi),
        (":", Tok::Colon),
        ("+", Tok::Plus),
        ("-", Tok::Minus),
        ("*", Tok::Star),
        ("<", Tok::Lt),
        ("=", Tok::Eq),
        (">", Tok::Gt),
        ("&", Tok::Amp),
        ("∧", Tok::Amp),
        ("∈", Tok::Colon),
        ("≤", Tok::Le),
        ("≥", Tok::Ge),
        ("×", Tok::Star),
        ("−", Tok::Minus),
        ("⇛", Tok::Implies),
        ("←", Tok::Arrow),
        ("∥", Tok::Parallel),
    ];

    'outer: while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        let mut span = cur.mark();
        if cur.starts_with("/*") {
            cur.bump();
            cur.bump();
            loop {
                if cur.starts_with("*/") {
                    cur.bump();
                    cur.bump();
                    continue 'outer;
                }
                if cur.bump().is_none() {
                    span.end = cur.pos;
                    errors.push(ParseError::new(
                        ParseErrorKind::UnexpectedToken,
                        span,
                        "unterminated comment: expected `*/`",
                    ));
                    break 'outer;
                }
            }
        }
        if c.is_ascii_alphabetic() || c == '_' {
            while cur
                .peek()
                .is_some_and(|c| c.is_ascii_alphanumeric() || c == '_')
            {
                cur.bump();
            }
            let word = &src[span.begin..cur.pos];
            span.end = cur.pos;
            let tok = match Keyword::from_word(word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word.to_string()),
            };
            tokens.push(Token { tok, span });
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit())) {
            while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
            }
            let mut decimal = false;
            if cur.peek() == Some('.') && cur.peek_at(1).is_some_and(|d| d.is_ascii_digit()) {
                decimal = true;
                cur.bump();
                while cur.peek().is_some_and(|c| c.is_ascii_digit()) {
                    cur.bump();
                }
            }
            let text = &src[span.begin..cur.pos];
            span.end = cur.pos;
            let tok = if decimal {
                Tok::Decimal(parse_decimal(text).expect("lexer produced a valid decimal"))
            } else {
                Tok::Int(BigInt::from_str(text).expect("lexer produced digits"))
            };
            tokens.push(Token { tok, span });
            continue;
        }
        for (text, tok) in SYMBOLS {
            if cur.starts_with(text) {
                for _ in text.chars() {
                    cur.bump();
                }
                span.end = cur.pos;
                tokens.push(Token {
                    tok: tok.clone(),
                    span,
                });
                continue 'outer;
            }
        }
        cur.bump();
        span.end = cur.pos;
        errors.push(ParseError::new(
            ParseErrorKind::UnexpectedToken,
            span,
            format!("unexpected character `{c}`"),
        ));
    }
    tokens.push(Token {
        tok: Tok::Eof,
        span: cur.mark(),
    });
    (tokens, errors)
}
