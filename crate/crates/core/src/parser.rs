//! Recursive-descent parser for `.mw` module files and queries.
//!
//! ```text
//! program   ::= statement*
//! statement ::= dgroup '.'
//! dgroup    ::= dclause ('&' dclause)*          right-nested choice
//! dclause   ::= head [':-' goal] | 'mod(' atom ')'
//! goal      ::= dante '=>' goal | conj           '=>' is right-associative
//! dante     ::= dgroup (',' dgroup)*
//! conj      ::= primary (',' primary)*
//! primary   ::= atom-term | '(' goal ')' | 'exists' VAR '.' goal
//! ```
//!
//! Inside an antecedent (`dante`), clause bodies are conjunctions and a
//! parenthesised `dante` may stand for a `dclause`.

use std::fmt;

use thiserror::Error;

use crate::ast::{desugar_clause, DFormula, GFormula, Sym, Term, Var};
use crate::lexer::{tokenize, Token, TokenKind};

pub use crate::printer::print_formula;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Lex(String),
    Syntax(String),
    MalformedModule(String),
    MalformedClause(String),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub line: usize,
    pub col: usize,
}

impl ParseError {
    pub(crate) fn new(kind: ParseErrorKind, line: usize, col: usize) -> Self {
        ParseError { kind, line, col }
    }
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Lex(m) => write!(f, "lex error: {m}"),
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::MalformedModule(m) => write!(f, "malformed module: {m}"),
            ParseErrorKind::MalformedClause(m) => write!(f, "malformed clause: {m}"),
        }
    }
}

/// A parsed `.mw` file. `name` comes from a leading `mod(name).` statement.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ModuleFile {
    pub name: Option<Sym>,
    pub clauses: Vec<DFormula>,
}

pub fn parse_program(text: &str) -> Result<ModuleFile, ParseError> {
    let mut p = Parser::new(text)?;
    let mut file = ModuleFile::default();
    let mut first = true;
    while p.peek() != TokenKind::Eof {
        let d = p.dgroup(Ctx::Statement)?;
        p.expect(TokenKind::Period)?;
        match d {
            DFormula::ModRef(name) if first => file.name = Some(name),
            d => file.clauses.push(d),
        }
        first = false;
    }
    Ok(file)
}

/// Parses a query. Free variables are left free; a trailing `.` is allowed.
pub fn parse_goal(text: &str) -> Result<GFormula, ParseError> {
    let mut p = Parser::new(text)?;
    let g = p.goal()?;
    p.eat(TokenKind::Period);
    p.expect(TokenKind::Eof)?;
    Ok(g)
}

pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term()?;
    p.expect(TokenKind::Eof)?;
    Ok(t)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Statement,
    Antecedent,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            anon: 0,
        })
    }

    fn tok(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek(&self) -> TokenKind {
        self.tok().kind
    }

    fn peek_at(&self, n: usize) -> Option<&Token> {
        self.toks.get(self.pos + n)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, kind: TokenKind) -> bool {
        if self.peek() == kind {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind) -> Result<Token, ParseError> {
        if self.peek() == kind {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("expected {kind}")))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        let t = self.tok();
        let found = if t.kind == TokenKind::Eof {
            "end of input".to_string()
        } else {
            format!("`{}`", t.text)
        };
        ParseError::new(
            ParseErrorKind::Syntax(format!("{what}, found {found}")),
            t.line,
            t.col,
        )
    }

    fn dgroup(&mut self, ctx: Ctx) -> Result<DFormula, ParseError> {
        let mut sides = vec![self.dclause(ctx)?];
        while self.eat(TokenKind::Amp) {
            sides.push(self.dclause(ctx)?);
        }
        Ok(DFormula::choices(sides).expect("at least one side"))
    }

    fn dclause(&mut self, ctx: Ctx) -> Result<DFormula, ParseError> {
        if ctx == Ctx::Antecedent && self.peek() == TokenKind::LParen {
            self.bump();
            let d = self.dante()?;
            self.expect(TokenKind::RParen)?;
            return Ok(d);
        }
        let start = self.tok().clone();
        let head = self.term()?;
        if let Some(name) = module_ref(&head, &start)? {
            if self.peek() == TokenKind::Turnstile {
                let t = self.tok();
                return Err(ParseError::new(
                    ParseErrorKind::MalformedModule("a module reference cannot have a body".into()),
                    t.line,
                    t.col,
                ));
            }
            return Ok(DFormula::ModRef(name));
        }
        if !head.is_atom_term() {
            return Err(ParseError::new(
                ParseErrorKind::MalformedClause(format!(
                    "clause head must be an atom, found `{}`",
                    start.text
                )),
                start.line,
                start.col,
            ));
        }
        let body = if self.eat(TokenKind::Turnstile) {
            Some(match ctx {
                Ctx::Statement => self.goal()?,
                Ctx::Antecedent => self.conj()?,
            })
        } else {
            None
        };
        match ctx {
            Ctx::Statement => desugar_clause(head, body).map_err(|e| {
                ParseError::new(
                    ParseErrorKind::MalformedClause(e.to_string()),
                    start.line,
                    start.col,
                )
            }),
            Ctx::Antecedent => Ok(match body {
                Some(b) => DFormula::imp(b, DFormula::atom(head)),
                None => DFormula::atom(head),
            }),
        }
    }

    fn dante(&mut self) -> Result<DFormula, ParseError> {
        let mut parts = vec![self.dgroup(Ctx::Antecedent)?];
        while self.eat(TokenKind::Comma) {
            parts.push(self.dgroup(Ctx::Antecedent)?);
        }
        Ok(DFormula::conj(parts).expect("at least one part"))
    }

    fn goal(&mut self) -> Result<GFormula, ParseError> {
        let (pos, anon) = (self.pos, self.anon);
        match self.dante() {
            Ok(d) if self.eat(TokenKind::ImpGoal) => {
                let g = self.goal()?;
                return Ok(GFormula::imp(d, g));
            }
            Err(e) if matches!(e.kind, ParseErrorKind::MalformedModule(_)) => return Err(e),
            _ => {}
        }
        self.pos = pos;
        self.anon = anon;
        self.conj()
    }

    fn conj(&mut self) -> Result<GFormula, ParseError> {
        let mut parts = vec![self.primary()?];
        while self.eat(TokenKind::Comma) {
            parts.push(self.primary()?);
        }
        Ok(GFormula::conj(parts).expect("at least one conjunct"))
    }

    fn primary(&mut self) -> Result<GFormula, ParseError> {
        match self.peek() {
            TokenKind::LParen => {
                self.bump();
                let g = self.goal()?;
                self.expect(TokenKind::RParen)?;
                Ok(g)
            }
            TokenKind::Atom if self.at_exists() => {
                self.bump();
                let v = self.bump();
                self.bump();
                let body = self.goal()?;
                Ok(GFormula::exists(Var::named(&v.text), body))
            }
            _ => {
                let start = self.tok().clone();
                let t = self.term()?;
                if !t.is_atom_term() {
                    return Err(ParseError::new(
                        ParseErrorKind::Syntax(format!(
                            "a goal must be an atom, found `{}`",
                            start.text
                        )),
                        start.line,
                        start.col,
                    ));
                }
                Ok(GFormula::Atom(t))
            }
        }
    }

    fn at_exists(&self) -> bool {
        self.tok().text == "exists"
            && self.peek_at(1).is_some_and(|t| t.kind == TokenKind::Var)
            && self.peek_at(2).is_some_and(|t| t.kind == TokenKind::Period)
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        match self.peek() {
            TokenKind::Var => {
                let t = self.bump();
                if t.text == "_" {
                    self.anon += 1;
                    Ok(Term::var(&format!("__{}", self.anon)))
                } else {
                    Ok(Term::var(&t.text))
                }
            }
            TokenKind::Int => {
                let t = self.bump();
                Ok(Term::Int(t.text.parse().expect("lexer validated range")))
            }
            TokenKind::Atom => {
                let name = self.bump().text;
                if self.eat(TokenKind::LParen) {
                    let mut args = vec![self.term()?];
                    while self.eat(TokenKind::Comma) {
                        args.push(self.term()?);
                    }
                    self.expect(TokenKind::RParen)?;
                    Ok(Term::compound(&name, args))
                } else {
                    Ok(Term::constant(&name))
                }
            }
            TokenKind::LBracket => {
                self.bump();
                if self.eat(TokenKind::RBracket) {
                    return Ok(Term::nil());
                }
                let mut items = vec![self.term()?];
                while self.eat(TokenKind::Comma) {
                    items.push(self.term()?);
                }
                let tail = if self.eat(TokenKind::Pipe) {
                    Some(self.term()?)
                } else {
                    None
                };
                self.expect(TokenKind::RBracket)?;
                Ok(Term::list(items, tail))
            }
            _ => Err(self.unexpected("expected a term")),
        }
    }
}

/// `mod(name)` with a constant argument names a module; `mod(X)` is an error.
fn module_ref(t: &Term, at: &Token) -> Result<Option<Sym>, ParseError> {
    match t {
        Term::Compound(f, args) if &**f == "mod" && args.len() == 1 => match &args[0] {
            Term::Const(name) => Ok(Some(name.clone())),
            _ => Err(ParseError::new(
                ParseErrorKind::MalformedModule("module name must be a constant".into()),
                at.line,
                at.col,
            )),
        },
        _ => Ok(None),
    }
}
