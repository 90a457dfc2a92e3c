//! Parser for the rule language.
//!
//! ```text
//! rules    := rule*
//! rule     := atom ( (":-" | "←") literal ("," literal)* )? "."
//! literal  := "not"? atom
//! atom     := IDENT ( "(" IDENT ("," IDENT)* ")" )?
//! ```
//!
//! `%` starts a comment that runs to the end of the line. Arguments that
//! start with an uppercase letter or `_` are variables.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::logic::ast::{Atom, HornRule, Literal, SymbolicPolicy, Term};
use crate::logic::facts::Vocabulary;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Neck => "`:-`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1, 1);
    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
        };
        match c {
            '%' => {
                while chars.peek().is_some_and(|&c| c != '\n') {
                    bump(&mut chars);
                }
            }
            c if c.is_whitespace() => bump(&mut chars),
            '(' => {
                bump(&mut chars);
                out.push((Tok::LParen, pos));
            }
            ')' => {
                bump(&mut chars);
                out.push((Tok::RParen, pos));
            }
            ',' => {
                bump(&mut chars);
                out.push((Tok::Comma, pos));
            }
            '.' => {
                bump(&mut chars);
                out.push((Tok::Dot, pos));
            }
            '←' => {
                bump(&mut chars);
                out.push((Tok::Neck, pos));
            }
            ':' => {
                bump(&mut chars);
                if chars.peek() == Some(&'-') {
                    bump(&mut chars);
                    out.push((Tok::Neck, pos));
                } else {
                    return Err(syntax(pos, "expected `:-`"));
                }
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut ident = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        ident.push(c);
                        bump(&mut chars);
                    } else {
                        break;
                    }
                }
                out.push((Tok::Ident(ident), pos));
            }
            other => return Err(syntax(pos, format!("unexpected character `{other}`"))),
        }
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &(Tok, Pos) {
        &self.toks[self.at]
    }

    fn next(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos)> {
        match self.next() {
            (Tok::Ident(s), pos) => Ok((s, pos)),
            (t, pos) => Err(syntax(pos, format!("expected {what}, found {}", t.describe()))),
        }
    }

    fn atom(&mut self) -> Result<(Atom, Pos)> {
        let (name, pos) = self.ident("a predicate name")?;
        if name == "not" {
            return Err(syntax(pos, "`not` cannot be used as a predicate name"));
        }
        let mut args = Vec::new();
        if self.peek().0 == Tok::LParen {
            let (_, open) = self.next();
            loop {
                let (arg, _) = self.ident("an argument")?;
                args.push(Term::parse(&arg));
                match self.next() {
                    (Tok::Comma, _) => continue,
                    (Tok::RParen, _) => break,
                    (t, p) => {
                        return Err(syntax(
                            p,
                            format!(
                                "expected `,` or `)` to close the argument list opened at {}:{}, found {}",
                                open.line,
                                open.column,
                                t.describe()
                            ),
                        ))
                    }
                }
            }
        }
        Ok((Atom::new(name, args), pos))
    }

    fn literal(&mut self) -> Result<Literal> {
        let negated = matches!(&self.peek().0, Tok::Ident(s) if s == "not")
            && matches!(self.toks.get(self.at + 1), Some((Tok::Ident(_), _)));
        if negated {
            self.next();
        }
        let (atom, _) = self.atom()?;
        Ok(Literal { atom, negated })
    }

    fn rule(&mut self) -> Result<(HornRule, usize)> {
        let (head, pos) = self.atom()?;
        let mut body = Vec::new();
        match self.next() {
            (Tok::Dot, _) => {}
            (Tok::Neck, _) => loop {
                body.push(self.literal()?);
                match self.next() {
                    (Tok::Comma, _) => continue,
                    (Tok::Dot, _) => break,
                    (t, p) => {
                        return Err(syntax(
                            p,
                            format!("expected `,` or `.` after a body literal, found {}", t.describe()),
                        ))
                    }
                }
            },
            (t, p) => {
                return Err(syntax(
                    p,
                    format!("expected `:-` or `.` after the rule head, found {}", t.describe()),
                ))
            }
        }
        Ok((HornRule { head, body }, pos.line))
    }
}

/// Parses rule text. With a vocabulary, head predicates must be declared
/// actions and body predicates declared features (with matching arity).
/// Every head variable must occur in a positive body literal.
pub fn parse_rules(name: &str, text: &str, vocab: Option<&Vocabulary>) -> Result<SymbolicPolicy> {
    let mut parser = Parser {
        toks: lex(text)?,
        at: 0,
    };
    let mut rules = Vec::new();
    while parser.peek().0 != Tok::Eof {
        let (rule, line) = parser.rule()?;
        check_rule(&rule, line, vocab)?;
        rules.push(rule);
    }
    Ok(SymbolicPolicy::new(name, rules))
}

fn check_rule(rule: &HornRule, line: usize, vocab: Option<&Vocabulary>) -> Result<()> {
    let bound: BTreeSet<&str> = rule.positive().flat_map(Atom::variables).collect();
    if let Some(v) = rule.head.variables().find(|v| !bound.contains(v)) {
        return Err(Error::Rule {
            line,
            message: format!(
                "head variable `{v}` of `{}` does not occur in a positive body literal",
                rule.head
            ),
        });
    }
    let Some(vocab) = vocab else { return Ok(()) };
    let check = |table: &std::collections::BTreeMap<String, usize>, atom: &Atom, kind: &str| {
        match table.get(&atom.predicate) {
            Some(&arity) if arity == atom.arity() => Ok(()),
            Some(&arity) => Err(Error::Rule {
                line,
                message: format!(
                    "{kind} predicate `{}` takes {arity} argument(s), got {}",
                    atom.predicate,
                    atom.arity()
                ),
            }),
            None => Err(Error::Rule {
                line,
                message: format!("unknown {kind} predicate `{}`", atom.predicate),
            }),
        }
    };
    check(&vocab.actions, &rule.head, "action")?;
    for lit in &rule.body {
        check(&vocab.features, &lit.atom, "feature")?;
    }
    Ok(())
}
