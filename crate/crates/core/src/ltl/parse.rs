use std::collections::BTreeSet;

use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("syntax error at byte {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown atomic proposition \"{0}\"")]
    UnknownAtom(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    True,
    False,
    Atom(String),
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Release,
    Eventually,
    Always,
    LParen,
    RParen,
    End,
}

fn syntax(position: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        position,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' => {
                chars.next();
                out.push((pos, Tok::LParen));
            }
            ')' => {
                chars.next();
                out.push((pos, Tok::RParen));
            }
            '!' => {
                chars.next();
                out.push((pos, Tok::Not));
            }
            '&' => {
                chars.next();
                if chars.peek().map(|p| p.1) == Some('&') {
                    chars.next();
                }
                out.push((pos, Tok::And));
            }
            '|' => {
                chars.next();
                if chars.peek().map(|p| p.1) == Some('|') {
                    chars.next();
                }
                out.push((pos, Tok::Or));
            }
            '-' => {
                chars.next();
                match chars.next() {
                    Some((_, '>')) => out.push((pos, Tok::Implies)),
                    _ => return Err(syntax(pos, "expected '->'")),
                }
            }
            '"' => {
                chars.next();
                let mut name = String::new();
                loop {
                    match chars.next() {
                        Some((_, '"')) => break,
                        Some((_, ch)) => name.push(ch),
                        None => return Err(syntax(pos, "unterminated quoted atom")),
                    }
                }
                if name.is_empty() {
                    return Err(syntax(pos, "empty atom name"));
                }
                out.push((pos, Tok::Atom(name)));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut word = String::new();
                while let Some(&(_, ch)) = chars.peek() {
                    if ch.is_alphanumeric() || ch == '_' {
                        word.push(ch);
                        chars.next();
                    } else {
                        break;
                    }
                }
                let tok = match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "U" => Tok::Until,
                    "R" => Tok::Release,
                    "F" => Tok::Eventually,
                    "G" => Tok::Always,
                    _ => Tok::Atom(word),
                };
                out.push((pos, tok));
            }
            other => return Err(syntax(pos, format!("unexpected character '{other}'"))),
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    // implication := disjunction ('->' implication)?
    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(lhs.implies(rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = lhs.or(self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.binary_temporal()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = lhs.and(self.binary_temporal()?);
        }
        Ok(lhs)
    }

    // U and R are right-associative.
    fn binary_temporal(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                Ok(lhs.until(self.binary_temporal()?))
            }
            Tok::Release => {
                self.bump();
                Ok(lhs.release(self.binary_temporal()?))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Not => Ok(self.unary()?.not()),
            Tok::Next => Ok(self.unary()?.next()),
            Tok::Eventually => Ok(self.unary()?.eventually()),
            Tok::Always => Ok(self.unary()?.always()),
            Tok::True => Ok(Formula::True),
            Tok::False => Ok(Formula::False),
            Tok::Atom(a) => Ok(Formula::Atom(a)),
            Tok::LParen => {
                let inner = self.implication()?;
                if self.bump() != Tok::RParen {
                    return Err(syntax(self.toks[self.at.saturating_sub(1)].0, "expected ')'"));
                }
                Ok(inner)
            }
            Tok::End => Err(syntax(pos, "unexpected end of formula")),
            other => Err(syntax(pos, format!("unexpected token {other:?}"))),
        }
    }
}

/// Parses a formula without checking atom names.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let f = p.implication()?;
    if *p.peek() != Tok::End {
        return Err(syntax(p.pos(), "trailing input"));
    }
    Ok(f)
}

/// Parses a formula and checks every atom against `universe`.
pub fn parse_ltl(text: &str, universe: &BTreeSet<String>) -> Result<Formula, ParseError> {
    let f = parse_formula(text)?;
    if let Some(unknown) = f.atoms().into_iter().find(|a| !universe.contains(a)) {
        return Err(ParseError::UnknownAtom(unknown));
    }
    Ok(f)
}
