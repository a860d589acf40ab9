use std::fmt;

use crate::parser::{ParseError, ParseErrorKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Atom,
    Var,
    Int,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Pipe,
    Period,
    Amp,
    /// `:-`
    Turnstile,
    /// `=>`
    ImpGoal,
    Eof,
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TokenKind::Atom => "atom",
            TokenKind::Var => "variable",
            TokenKind::Int => "integer",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Comma => "`,`",
            TokenKind::Pipe => "`|`",
            TokenKind::Period => "`.`",
            TokenKind::Amp => "`&`",
            TokenKind::Turnstile => "`:-`",
            TokenKind::ImpGoal => "`=>`",
            TokenKind::Eof => "end of input",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub line: usize,
    pub col: usize,
}

/// Splits `text` into tokens. `%` starts a comment running to end of line.
/// The final token is always `Eof`.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);

    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };

        if c.is_whitespace() {
            bump(&mut chars);
            continue;
        }
        if c == '%' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
            continue;
        }

        let single = match c {
            '(' => Some(TokenKind::LParen),
            ')' => Some(TokenKind::RParen),
            '[' => Some(TokenKind::LBracket),
            ']' => Some(TokenKind::RBracket),
            ',' => Some(TokenKind::Comma),
            '|' => Some(TokenKind::Pipe),
            '.' => Some(TokenKind::Period),
            '&' => Some(TokenKind::Amp),
            _ => None,
        };
        let (kind, text) = if let Some(kind) = single {
            bump(&mut chars);
            (kind, c.to_string())
        } else if c == ':' || c == '=' {
            bump(&mut chars);
            match (c, chars.peek()) {
                (':', Some('-')) => {
                    bump(&mut chars);
                    (TokenKind::Turnstile, ":-".to_string())
                }
                ('=', Some('>')) => {
                    bump(&mut chars);
                    (TokenKind::ImpGoal, "=>".to_string())
                }
                _ => return Err(lex_error(c, start_line, start_col)),
            }
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !d.is_ascii_digit() {
                    break;
                }
                s.push(d);
                bump(&mut chars);
            }
            if s.parse::<i64>().is_err() {
                return Err(ParseError::new(
                    ParseErrorKind::Lex(format!("integer literal `{s}` out of range")),
                    start_line,
                    start_col,
                ));
            }
            (TokenKind::Int, s)
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if !(d.is_ascii_alphanumeric() || d == '_') {
                    break;
                }
                s.push(d);
                bump(&mut chars);
            }
            let kind = if c.is_ascii_lowercase() {
                TokenKind::Atom
            } else {
                TokenKind::Var
            };
            (kind, s)
        } else {
            return Err(lex_error(c, start_line, start_col));
        };
        out.push(Token {
            kind,
            text,
            line: start_line,
            col: start_col,
        });
    }

    out.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        line,
        col,
    });
    Ok(out)
}

fn lex_error(c: char, line: usize, col: usize) -> ParseError {
    ParseError::new(
        ParseErrorKind::Lex(format!("unrecognized character `{c}`")),
        line,
        col,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use TokenKind::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn simple_fact() {
        assert_eq!(kinds("p(X)."), vec![Atom, LParen, Var, RParen, Period, Eof]);
    }

    #[test]
    fn choice_group() {
        assert_eq!(kinds("a & b."), vec![Atom, Amp, Atom, Period, Eof]);
    }

    #[test]
    fn comment_is_skipped() {
        let toks = tokenize("% comment\nq.").unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![Atom, Period, Eof]
        );
        assert_eq!((toks[0].line, toks[0].col), (2, 1));
        assert_eq!(toks[0].text, "q");
    }

    #[test]
    fn operators_and_lists() {
        assert_eq!(
            kinds("h :- mod(m) => [1|T]"),
            vec![
                Atom, Turnstile, Atom, LParen, Atom, RParen, ImpGoal, LBracket, Int, Pipe, Var,
                RBracket, Eof
            ]
        );
    }

    #[test]
    fn underscore_starts_variable() {
        assert_eq!(kinds("_ _x"), vec![Var, Var, Eof]);
    }

    #[test]
    fn bad_character_reports_position() {
        let err = tokenize("p.\n  q # r").unwrap_err();
        assert_eq!((err.line, err.col), (2, 5));
        let err = tokenize("a : b").unwrap_err();
        assert_eq!((err.line, err.col), (1, 3));
    }
}
