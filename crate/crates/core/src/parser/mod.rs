//! Recursive-descent parser for the pAMN subset.
//!
//! The accepted grammar is documented in `docs/grammar.ebnf`. Clauses may
//! appear in any order. After a syntax error the parser resumes at the next
//! clause keyword, so a single run reports problems in several clauses.

mod lexer;
mod printer;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::ast::{
    CmpOp, Expectations, Expr, ExprKind, Machine, Operation, Rational, Span, SubstKind,
    Substitution, TypeSet,
};
pub use lexer::{tokenize, Keyword, Tok, Token};
pub use printer::pretty_print;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedToken,
    UnknownClause,
    DuplicateClause,
    MissingClause,
    UndeclaredIdentifier,
    MalformedPchoice,
    /// Well-formedness violations found after parsing.
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub span: Span,
    pub message: String,
}

impl ParseError {
    pub fn new(kind: ParseErrorKind, span: Span, message: impl Into<String>) -> Self {
        ParseError {
            kind,
            span,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

type PResult<T> = Result<T, ParseError>;

/// B clauses outside the supported subset. Recovery resumes at these so that
/// each one is reported.
const FOREIGN_CLAUSES: &[&str] = &[
    "ABSTRACT_CONSTANTS",
    "ABSTRACT_VARIABLES",
    "ASSERTIONS",
    "CONCRETE_CONSTANTS",
    "CONCRETE_VARIABLES",
    "CONSTRAINTS",
    "DEFINITIONS",
    "EXTENDS",
    "IMPLEMENTATION",
    "IMPORTS",
    "INCLUDES",
    "LOCAL_OPERATIONS",
    "PROMOTES",
    "REFINEMENT",
    "REFINES",
    "SETS",
    "USES",
    "VALUES",
];

/// Parses and validates a complete machine.
pub fn parse_machine(source: &str) -> Result<Machine, Vec<ParseError>> {
    let (tokens, mut errors) = tokenize(source);
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: Vec::new(),
    };
    let machine = p.machine();
    errors.append(&mut p.errors);
    match machine {
        Some(m) if errors.is_empty() => {
            let problems = validate(&m);
            if problems.is_empty() {
                Ok(m)
            } else {
                Err(problems)
            }
        }
        _ => {
            errors.sort_by_key(|e| e.span.begin);
            Err(errors)
        }
    }
}

/// Parses a standalone expression.
pub fn parse_expr(source: &str) -> Result<Expr, ParseError> {
    let (tokens, errors) = tokenize(source);
    if let Some(e) = errors.into_iter().next() {
        return Err(e);
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: Vec::new(),
    };
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// Parses a standalone substitution.
pub fn parse_substitution(source: &str) -> Result<Substitution, ParseError> {
    let (tokens, errors) = tokenize(source);
    if let Some(e) = errors.into_iter().next() {
        return Err(e);
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        errors: Vec::new(),
    };
    let s = p.substitution(false)?;
    p.expect_eof()?;
    Ok(s)
}

#[derive(Default)]
struct Clauses {
    name: Option<String>,
    params: Vec<String>,
    sees: Vec<String>,
    constants: Vec<String>,
    properties: Vec<Expr>,
    variables: Option<Vec<String>>,
    invariant: Option<Vec<Expr>>,
    expectations: Option<Expectations>,
    initialisation: Option<Substitution>,
    operations: Option<Vec<Operation>>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    errors: Vec<ParseError>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn span(&self) -> Span {
        self.tokens[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.tokens[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::new(
            ParseErrorKind::UnexpectedToken,
            self.span(),
            format!("expected {expected}, found {}", self.peek()),
        )
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> PResult<Span> {
        if self.peek() == tok {
            Ok(self.bump().span)
        } else {
            Err(self.unexpected(expected))
        }
    }

    fn expect_kw(&mut self, kw: Keyword) -> PResult<Span> {
        self.expect(&Tok::Kw(kw), &format!("`{}`", kw.text()))
    }

    fn expect_eof(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Eof => Ok(()),
            _ => Err(self.unexpected("end of input")),
        }
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn ident_list(&mut self, what: &str) -> PResult<Vec<String>> {
        let mut out = vec![self.ident(what)?];
        while self.eat(&Tok::Comma) {
            out.push(self.ident(what)?);
        }
        Ok(out)
    }

    fn at_clause_boundary(&self) -> bool {
        matches!(self.peek(), Tok::Kw(k) if k.is_clause())
            || matches!(self.peek(), Tok::Kw(Keyword::End) | Tok::Eof)
    }

    /// Skips ahead to the next clause keyword.
    fn recover(&mut self) {
        while !matches!(self.peek(), Tok::Eof) {
            if matches!(self.peek(), Tok::Kw(k) if k.is_clause())
                || matches!(self.peek(), Tok::Ident(w) if FOREIGN_CLAUSES.contains(&w.as_str()))
            {
                return;
            }
            self.bump();
        }
    }

    // ---- machine -------------------------------------------------------

    fn machine(&mut self) -> Option<Machine> {
        let mut c = Clauses::default();
        let mut seen: HashMap<&'static str, Span> = HashMap::new();
        let mut saw_end = false;
        loop {
            let span = self.span();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Kw(Keyword::End) => {
                    self.bump();
                    saw_end = true;
                    if !matches!(self.peek(), Tok::Eof) {
                        let e = self.unexpected("end of input after the machine's `END`");
                        self.errors.push(e);
                    }
                    break;
                }
                Tok::Kw(k) if k.is_clause() => {
                    self.bump();
                    let key = k.text();
                    if let Some(first) = seen.get(key) {
                        self.errors.push(ParseError::new(
                            ParseErrorKind::DuplicateClause,
                            span,
                            format!("duplicate {key} clause (first given at {first})"),
                        ));
                        self.recover();
                        continue;
                    }
                    seen.insert(key, span);
                    if let Err(e) = self.clause(k, &mut c) {
                        self.errors.push(e);
                        self.recover();
                        continue;
                    }
                    if !self.at_clause_boundary() {
                        let e = self.unexpected(&format!("a clause keyword or `END` after {key}"));
                        self.errors.push(e);
                        self.recover();
                    }
                }
                Tok::Ident(word) if word.chars().all(|ch| ch.is_ascii_uppercase() || ch == '_') => {
                    self.errors.push(ParseError::new(
                        ParseErrorKind::UnknownClause,
                        span,
                        format!("unknown clause `{word}`"),
                    ));
                    self.bump();
                    self.recover();
                }
                _ => {
                    let e = self.unexpected("a clause keyword");
                    self.errors.push(e);
                    self.bump();
                    self.recover();
                }
            }
        }

        let end = self.span();
        // A clause that was present but malformed has already been reported.
        let mut missing = |present: bool, name: &str| {
            if !present && !seen.contains_key(name) {
                self.errors.push(ParseError::new(
                    ParseErrorKind::MissingClause,
                    end,
                    format!("missing {name} clause"),
                ));
            }
        };
        missing(c.name.is_some(), "MACHINE");
        missing(c.variables.is_some(), "VARIABLES");
        missing(c.invariant.is_some(), "INVARIANT");
        missing(c.expectations.is_some(), "EXPECTATIONS");
        missing(c.initialisation.is_some(), "INITIALISATION");
        missing(c.operations.is_some(), "OPERATIONS");
        if !saw_end && self.errors.is_empty() {
            self.errors.push(ParseError::new(
                ParseErrorKind::UnexpectedToken,
                end,
                "expected `END` closing the machine",
            ));
        }
        if !self.errors.is_empty() {
            return None;
        }
        Some(Machine {
            name: c.name?,
            params: c.params,
            sees: c.sees,
            constants: c.constants,
            properties: c.properties,
            variables: c.variables?,
            invariant: c.invariant?,
            expectations: c.expectations?,
            initialisation: c.initialisation?,
            operations: c.operations?,
        })
    }

    fn clause(&mut self, k: Keyword, c: &mut Clauses) -> PResult<()> {
        match k {
            Keyword::Machine => {
                c.name = Some(self.ident("the machine name")?);
                if self.eat(&Tok::LParen) {
                    c.params = self.ident_list("a machine parameter")?;
                    self.expect(&Tok::RParen, "`)` closing the parameter list")?;
                }
            }
            Keyword::Sees => c.sees = self.ident_list("a machine name in SEES")?,
            Keyword::Constants => c.constants = self.ident_list("a constant name")?,
            Keyword::Variables => c.variables = Some(self.ident_list("a variable name")?),
            Keyword::Properties => c.properties = flatten(self.expr()?),
            Keyword::Invariant => c.invariant = Some(flatten(self.expr()?)),
            Keyword::Expectations => {
                let initial = self.expr()?;
                self.expect(
                    &Tok::Implies,
                    "`|=>` between the initial expression and the random variable",
                )?;
                let random_variable = self.expr()?;
                c.expectations = Some(Expectations {
                    initial,
                    random_variable,
                });
            }
            Keyword::Initialisation => c.initialisation = Some(self.substitution(false)?),
            Keyword::Operations => c.operations = Some(self.operations()?),
            _ => unreachable!("not a clause keyword"),
        }
        Ok(())
    }

    fn operations(&mut self) -> PResult<Vec<Operation>> {
        let mut ops = Vec::new();
        if self.at_clause_boundary() {
            return Ok(ops);
        }
        loop {
            ops.push(self.operation()?);
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        Ok(ops)
    }

    fn operation(&mut self) -> PResult<Operation> {
        let mut outputs = Vec::new();
        if self.op_header_with_outputs(0) {
            outputs = self.ident_list("an output parameter")?;
            self.expect(&Tok::Arrow, "`<--`")?;
        }
        let name = self.ident("an operation name")?;
        self.expect(&Tok::Eq, "`=` after the operation name")?;
        let body = self.substitution(true)?;
        Ok(Operation {
            name,
            outputs,
            body,
        })
    }

    /// `ident (, ident)* <--` starting at `offset`.
    fn op_header_with_outputs(&self, mut offset: usize) -> bool {
        loop {
            if !matches!(self.peek_at(offset), Tok::Ident(_)) {
                return false;
            }
            match self.peek_at(offset + 1) {
                Tok::Comma => offset += 2,
                Tok::Arrow => return true,
                _ => return false,
            }
        }
    }

    fn op_header_at(&self, offset: usize) -> bool {
        self.op_header_with_outputs(offset)
            || (matches!(self.peek_at(offset), Tok::Ident(_))
                && matches!(self.peek_at(offset + 1), Tok::Eq))
    }

    // ---- substitutions -------------------------------------------------

    /// `par (';' par)*`. In the OPERATIONS clause a `;` followed by an
    /// operation header separates operations instead.
    fn substitution(&mut self, in_operations: bool) -> PResult<Substitution> {
        let first = self.parallel(in_operations)?;
        let start = first.span;
        let mut items = vec![first];
        while matches!(self.peek(), Tok::Semi) {
            if in_operations && self.op_header_at(1) {
                break;
            }
            self.bump();
            items.push(self.parallel(in_operations)?);
        }
        if items.len() == 1 {
            return Ok(items.pop().unwrap());
        }
        let span = start.to(self.prev_span());
        Ok(Substitution {
            kind: SubstKind::Sequence(items),
            span,
        })
    }

    fn parallel(&mut self, in_operations: bool) -> PResult<Substitution> {
        let first = self.primary_substitution(in_operations)?;
        let start = first.span;
        let mut items = Vec::new();
        splice_parallel(first, &mut items);
        while self.eat(&Tok::Parallel) {
            let next = self.primary_substitution(in_operations)?;
            splice_parallel(next, &mut items);
        }
        if items.len() == 1 {
            return Ok(items.pop().unwrap());
        }
        Ok(Substitution {
            kind: SubstKind::Parallel(items),
            span: start.to(self.prev_span()),
        })
    }

    fn primary_substitution(&mut self, in_ops: bool) -> PResult<Substitution> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Kw(Keyword::Skip) => {
                self.bump();
                SubstKind::Skip
            }
            Tok::Kw(Keyword::Begin) => {
                self.bump();
                let body = self.substitution(in_ops)?;
                self.expect_kw(Keyword::End)?;
                SubstKind::Begin(Box::new(body))
            }
            Tok::Kw(Keyword::Pre) => {
                self.bump();
                let cond = self.expr()?;
                self.expect_kw(Keyword::Then)?;
                let body = self.substitution(in_ops)?;
                self.expect_kw(Keyword::End)?;
                SubstKind::Pre(cond, Box::new(body))
            }
            Tok::Kw(Keyword::Pchoice) => {
                self.bump();
                return self.pchoice(start, in_ops);
            }
            Tok::Kw(Keyword::If) => {
                self.bump();
                let condition = self.expr()?;
                self.expect_kw(Keyword::Then)?;
                let then = self.substitution(in_ops)?;
                let otherwise = if self.eat(&Tok::Kw(Keyword::Else)) {
                    self.substitution(in_ops)?
                } else {
                    Substitution::skip()
                };
                self.expect_kw(Keyword::End)?;
                SubstKind::If {
                    condition,
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                }
            }
            Tok::Ident(_) => return self.assignment(),
            _ => return Err(self.unexpected("a substitution")),
        };
        Ok(Substitution {
            kind,
            span: start.to(self.prev_span()),
        })
    }

    fn pchoice(&mut self, start: Span, in_ops: bool) -> PResult<Substitution> {
        let malformed = |p: &Parser, what: &str| {
            ParseError::new(
                ParseErrorKind::MalformedPchoice,
                p.span(),
                format!("malformed PCHOICE: expected {what}, found {}", p.peek()),
            )
        };
        let probability = self.expr()?;
        if !self.eat(&Tok::Kw(Keyword::Of)) {
            return Err(malformed(self, "`OF` after the probability"));
        }
        let left = self.substitution(in_ops)?;
        if !self.eat(&Tok::Kw(Keyword::Or)) {
            return Err(malformed(self, "`OR` followed by the second branch"));
        }
        let right = self.substitution(in_ops)?;
        if matches!(self.peek(), Tok::Kw(Keyword::Or)) {
            return Err(malformed(self, "`END`; PCHOICE takes exactly two branches"));
        }
        if !self.eat(&Tok::Kw(Keyword::End)) {
            return Err(malformed(self, "`END` closing the PCHOICE"));
        }
        Ok(Substitution {
            kind: SubstKind::Choice {
                probability,
                left: Box::new(left),
                right: Box::new(right),
            },
            span: start.to(self.prev_span()),
        })
    }

    /// `x := e` or the multiple form `x, y := e, f`, which becomes a
    /// parallel composition of simple assignments.
    fn assignment(&mut self) -> PResult<Substitution> {
        let start = self.span();
        let mut targets = Vec::new();
        loop {
            let span = self.span();
            targets.push((self.ident("an assignment target")?, span));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        self.expect(&Tok::Becomes, "`:=`")?;
        let mut values = vec![self.expr()?];
        while self.eat(&Tok::Comma) {
            values.push(self.expr()?);
        }
        if targets.len() != values.len() {
            return Err(ParseError::new(
                ParseErrorKind::UnexpectedToken,
                start,
                format!(
                    "expected {} expressions on the right of `:=`, found {}",
                    targets.len(),
                    values.len()
                ),
            ));
        }
        let span = start.to(self.prev_span());
        let mut items: Vec<Substitution> = targets
            .into_iter()
            .zip(values)
            .map(|((t, tspan), v)| Substitution {
                span: tspan.to(v.span),
                kind: SubstKind::Assign(t, v),
            })
            .collect();
        if items.len() == 1 {
            return Ok(items.pop().unwrap());
        }
        Ok(Substitution {
            kind: SubstKind::Parallel(items),
            span,
        })
    }

    // ---- expressions ---------------------------------------------------

    fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.comparison()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.comparison()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::with_span(ExprKind::And(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    fn typing_atom_follows(&self) -> bool {
        let mut offset = 0;
        loop {
            if !matches!(self.peek_at(offset), Tok::Ident(_)) {
                return false;
            }
            match self.peek_at(offset + 1) {
                Tok::Comma => offset += 2,
                Tok::Colon => return true,
                _ => return false,
            }
        }
    }

    fn comparison(&mut self) -> PResult<Expr> {
        if self.typing_atom_follows() {
            let start = self.span();
            let names = self.ident_list("a name")?;
            self.expect(&Tok::Colon, "`:`")?;
            let set_span = self.span();
            let set_name = self.ident("a type (INT, NATURAL or REAL)")?;
            let set = TypeSet::from_name(&set_name).ok_or_else(|| {
                ParseError::new(
                    ParseErrorKind::UnexpectedToken,
                    set_span,
                    format!("expected a type (INT, NATURAL or REAL), found `{set_name}`"),
                )
            })?;
            return Ok(Expr::with_span(
                ExprKind::Member(names, set),
                start.to(self.prev_span()),
            ));
        }
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Eq => CmpOp::Eq,
            Tok::Ge => CmpOp::Ge,
            Tok::Gt => CmpOp::Gt,
            _ => return Ok(lhs),
        };
        self.bump();
        let rhs = self.additive()?;
        let span = lhs.span.to(rhs.span);
        Ok(Expr::with_span(
            ExprKind::Compare(op, Box::new(lhs), Box::new(rhs)),
            span,
        ))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => crate::ast::BinOp::Add,
                Tok::Minus => crate::ast::BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.multiplicative()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::with_span(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Star) {
            let rhs = self.unary()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::with_span(
                ExprKind::Binary(crate::ast::BinOp::Mul, Box::new(lhs), Box::new(rhs)),
                span,
            );
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let start = self.span();
        if self.eat(&Tok::Minus) {
            let inner = self.unary()?;
            let span = start.to(inner.span);
            return Ok(Expr::with_span(ExprKind::Neg(Box::new(inner)), span));
        }
        self.atom()
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::with_span(ExprKind::Var(name), start))
            }
            Tok::Int(i) => {
                self.bump();
                Ok(Expr::with_span(ExprKind::Int(i), start))
            }
            Tok::Decimal(r) => {
                self.bump();
                Ok(Expr::with_span(ExprKind::Rat(r), start))
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                e.span = start.to(self.prev_span());
                Ok(e)
            }
            Tok::Kw(Keyword::Frac) => {
                self.bump();
                self.expect(&Tok::LParen, "`(` after frac")?;
                let n = self.signed_int()?;
                self.expect(&Tok::Comma, "`,` between numerator and denominator")?;
                let d_span = self.span();
                let d = self.signed_int()?;
                self.expect(&Tok::RParen, "`)` closing frac")?;
                if num_traits::Zero::is_zero(&d) {
                    return Err(ParseError::new(
                        ParseErrorKind::UnexpectedToken,
                        d_span,
                        "expected a non-zero denominator in frac",
                    ));
                }
                Ok(Expr::with_span(
                    ExprKind::Rat(Rational::new(n, d)),
                    start.to(self.prev_span()),
                ))
            }
            Tok::Kw(Keyword::Real) => {
                // `real(n)` is a rational literal; `real(expr)` is a numeric
                // coercion, which is the identity on exact values.
                self.bump();
                self.expect(&Tok::LParen, "`(` after real")?;
                let inner = self.expr()?;
                self.expect(&Tok::RParen, "`)` closing real")?;
                let span = start.to(self.prev_span());
                let kind = match inner.kind {
                    ExprKind::Int(i) => ExprKind::Rat(Rational::from_integer(i)),
                    ExprKind::Neg(ref boxed) if matches!(boxed.kind, ExprKind::Int(_)) => {
                        let ExprKind::Int(i) = &boxed.kind else {
                            unreachable!()
                        };
                        ExprKind::Rat(Rational::from_integer(-i.clone()))
                    }
                    other => other,
                };
                Ok(Expr::with_span(kind, span))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }

    fn signed_int(&mut self) -> PResult<num_bigint::BigInt> {
        let negative = self.eat(&Tok::Minus);
        match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                Ok(if negative { -i } else { i })
            }
            _ => Err(self.unexpected("an integer literal")),
        }
    }
}

fn flatten(e: Expr) -> Vec<Expr> {
    e.conjuncts().into_iter().cloned().collect()
}

fn splice_parallel(s: Substitution, into: &mut Vec<Substitution>) {
    match s.kind {
        SubstKind::Parallel(items) => into.extend(items),
        _ => into.push(s),
    }
}

// ---- validation ----------------------------------------------------------

/// Checks name resolution and the structural rules a parsed machine must
/// satisfy. An empty result means the machine is well formed.
pub fn validate(m: &Machine) -> Vec<ParseError> {
    let mut errors = Vec::new();
    let invalid = |span: Span, msg: String| ParseError::new(ParseErrorKind::Invalid, span, msg);

    let constants: BTreeSet<&str> = m.all_constants().map(String::as_str).collect();
    let variables: BTreeSet<&str> = m.variables.iter().map(String::as_str).collect();

    let mut declared = BTreeSet::new();
    for name in m.all_constants().chain(m.variables.iter()) {
        if !declared.insert(name.as_str()) {
            errors.push(invalid(
                Span::default(),
                format!("`{name}` is declared more than once"),
            ));
        }
    }

    let check_names = |e: &Expr, allowed: &dyn Fn(&str) -> bool, errors: &mut Vec<ParseError>| {
        let mut reported = BTreeSet::new();
        e.visit_identifiers(&mut |n| {
            if !allowed(n) && reported.insert(n.to_string()) {
                errors.push(ParseError::new(
                    ParseErrorKind::UndeclaredIdentifier,
                    e.span,
                    format!("undeclared identifier `{n}`"),
                ));
            }
        });
    };

    let is_const = |n: &str| constants.contains(n);
    let is_known = |n: &str| constants.contains(n) || variables.contains(n);

    for p in &m.properties {
        check_names(p, &is_const, &mut errors);
    }
    for c in &m.invariant {
        check_names(c, &is_known, &mut errors);
    }
    check_names(&m.expectations.initial, &is_const, &mut errors);
    check_names(&m.expectations.random_variable, &is_known, &mut errors);

    for v in &m.variables {
        let typings = m
            .invariant
            .iter()
            .filter(|c| matches!(&c.kind, ExprKind::Member(names, _) if names.contains(v)))
            .count();
        match typings {
            1 => {}
            0 => errors.push(invalid(
                Span::default(),
                format!("variable `{v}` has no typing atom in INVARIANT"),
            )),
            _ => errors.push(invalid(
                Span::default(),
                format!("variable `{v}` has more than one typing atom in INVARIANT"),
            )),
        }
    }

    check_substitution(
        &m.initialisation,
        &is_known,
        &|n| variables.contains(n),
        &mut errors,
    );

    let mut op_names = BTreeSet::new();
    for op in &m.operations {
        if !op_names.insert(op.name.as_str()) {
            errors.push(invalid(
                op.body.span,
                format!("operation `{}` is defined more than once", op.name),
            ));
        }
        for o in &op.outputs {
            if constants.contains(o.as_str()) {
                errors.push(invalid(
                    op.body.span,
                    format!("output `{o}` of `{}` clashes with a constant", op.name),
                ));
            }
        }
        let outputs: BTreeSet<&str> = op.outputs.iter().map(String::as_str).collect();
        let readable = |n: &str| is_known(n) || outputs.contains(n);
        let writable = |n: &str| variables.contains(n) || outputs.contains(n);
        check_substitution(&op.body, &readable, &writable, &mut errors);
    }
    errors
}

fn check_substitution(
    s: &Substitution,
    readable: &dyn Fn(&str) -> bool,
    writable: &dyn Fn(&str) -> bool,
    errors: &mut Vec<ParseError>,
) {
    s.walk(&mut |node| {
        for e in node.own_expressions() {
            let mut reported = BTreeSet::new();
            e.visit_identifiers(&mut |n| {
                if !readable(n) && reported.insert(n.to_string()) {
                    errors.push(ParseError::new(
                        ParseErrorKind::UndeclaredIdentifier,
                        e.span,
                        format!("undeclared identifier `{n}`"),
                    ));
                }
            });
        }
        match &node.kind {
            SubstKind::Assign(target, _) if !writable(target) => {
                errors.push(ParseError::new(
                    ParseErrorKind::UndeclaredIdentifier,
                    node.span,
                    format!("assignment to undeclared variable `{target}`"),
                ));
            }
            SubstKind::Parallel(items) => {
                let mut seen = BTreeSet::new();
                for item in items {
                    for v in item.assigned() {
                        if !seen.insert(v.clone()) {
                            errors.push(ParseError::new(
                                ParseErrorKind::Invalid,
                                node.span,
                                format!("parallel composition assigns `{v}` more than once"),
                            ));
                        }
                    }
                }
            }
            SubstKind::Choice { probability, .. } => {
                let mut state_dependent = Vec::new();
                probability.visit_identifiers(&mut |n| {
                    if writable(n) {
                        state_dependent.push(n.to_string());
                    }
                });
                if let Some(n) = state_dependent.first() {
                    errors.push(ParseError::new(
                        ParseErrorKind::MalformedPchoice,
                        probability.span,
                        format!("PCHOICE probability must be constant, but reads variable `{n}`"),
                    ));
                }
            }
            _ => {}
        }
    });
}
