//! Text formats for instances and trees.
//!
//! Instance file:
//!
//! ```text
//! 2wcdt 1
//! # comment
//! query <value> <weight> <0|1>
//! class <id> <value> <value> ...
//! ```
//!
//! Tree file: `(leaf <id>)`, `(< <value> <yes> <no>)` or
//! `(= <value> <yes> <no>)`, with arbitrary whitespace between tokens.

use std::fmt::Write as _;

use thiserror::Error;

use crate::instance::{Instance, InstanceError, Query};
use crate::tree::{DecisionTree, Test, TestKind};

pub const MAGIC: &str = "2wcdt 1";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] InstanceError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(token: &str, what: &str, line: usize) -> Result<T, ParseError> {
    token.parse().map_err(|_| syntax(line, format!("bad {what} `{token}`")))
}

pub fn parse_instance(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    match lines.next() {
        Some((_, l)) if l.split_whitespace().eq(MAGIC.split_whitespace()) => {}
        Some((line, l)) => return Err(syntax(line, format!("expected `{MAGIC}`, found `{l}`"))),
        None => return Err(syntax(1, format!("expected `{MAGIC}`"))),
    }
    let mut queries = Vec::new();
    let mut classes = Vec::new();
    for (line, l) in lines {
        let mut tokens = l.split_whitespace();
        match tokens.next() {
            Some("query") => {
                if !classes.is_empty() {
                    return Err(syntax(line, "query after class lines"));
                }
                let fields: Vec<&str> = tokens.collect();
                let [value, weight, key] = fields[..] else {
                    return Err(syntax(line, "expected `query <value> <weight> <0|1>`"));
                };
                let value = parse_num::<i64>(value, "value", line)?;
                if let Some(prev) = queries.last().map(|q: &Query| q.value) {
                    if value <= prev {
                        return Err(syntax(
                            line,
                            format!("value {value} does not exceed previous value {prev}"),
                        ));
                    }
                }
                let weight = parse_num::<u64>(weight, "weight", line)?;
                let is_key = match key {
                    "0" => false,
                    "1" => true,
                    other => return Err(syntax(line, format!("bad key flag `{other}`"))),
                };
                queries.push(Query::new(value, weight, is_key));
            }
            Some("class") => {
                let id = tokens.next().ok_or_else(|| syntax(line, "class line without an id"))?;
                if id.contains(['(', ')']) {
                    return Err(syntax(line, format!("class id `{id}` contains a parenthesis")));
                }
                let values = tokens
                    .map(|t| parse_num::<i64>(t, "value", line))
                    .collect::<Result<Vec<_>, _>>()?;
                if values.is_empty() {
                    return Err(syntax(line, format!("class `{id}` has no members")));
                }
                classes.push((id.to_string(), values));
            }
            Some(other) => return Err(syntax(line, format!("unknown directive `{other}`"))),
            None => unreachable!("blank lines are filtered"),
        }
    }
    Ok(Instance::new(queries, classes)?)
}

pub fn print_instance(instance: &Instance) -> String {
    let mut out = String::new();
    writeln!(out, "{MAGIC}").unwrap();
    for q in instance.queries() {
        writeln!(out, "query {} {} {}", q.value, q.weight, u8::from(q.is_key)).unwrap();
    }
    for (name, values) in instance.class_specs() {
        write!(out, "class {name}").unwrap();
        for v in values {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    out
}

struct Token<'a> {
    text: &'a str,
    line: usize,
}

fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let mut rest = l;
        while let Some(start) = rest.find(|c: char| !c.is_whitespace()) {
            rest = &rest[start..];
            let len = if rest.starts_with(['(', ')']) {
                1
            } else {
                rest.find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len())
            };
            tokens.push(Token {
                text: &rest[..len],
                line: i + 1,
            });
            rest = &rest[len..];
        }
    }
    tokens
}

struct TreeParser<'a, 'i> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    instance: &'i Instance,
}

impl<'a> TreeParser<'a, '_> {
    fn line(&self) -> usize {
        self.tokens.get(self.pos).or(self.tokens.last()).map_or(1, |t| t.line)
    }

    fn next(&mut self, what: &str) -> Result<&'a str, ParseError> {
        let line = self.line();
        let t = self
            .tokens
            .get(self.pos)
            .ok_or_else(|| syntax(line, format!("unexpected end of input, expected {what}")))?;
        self.pos += 1;
        Ok(t.text)
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        let line = self.line();
        let t = self.next(&format!("`{s}`"))?;
        if t == s {
            Ok(())
        } else {
            Err(syntax(line, format!("expected `{s}`, found `{t}`")))
        }
    }

    fn tree(&mut self) -> Result<DecisionTree, ParseError> {
        self.expect("(")?;
        let line = self.line();
        let head = self.next("`leaf`, `<` or `=`")?.to_string();
        let tree = match head.as_str() {
            "leaf" => {
                let line = self.line();
                let id = self.next("class id")?;
                let c = self
                    .instance
                    .class_by_name(id)
                    .ok_or_else(|| syntax(line, format!("unknown class `{id}`")))?;
                DecisionTree::leaf(c)
            }
            "<" | "=" => {
                let line = self.line();
                let v = self.next("key value")?;
                let v = parse_num::<i64>(v, "value", line)?;
                let key = self
                    .instance
                    .rank_of_value(v)
                    .ok_or_else(|| syntax(line, format!("value {v} is not a query")))?;
                let test = if head == "<" { Test::less(key) } else { Test::equal(key) };
                let yes = self.tree()?;
                let no = self.tree()?;
                DecisionTree::node(test, yes, no)
            }
            other => return Err(syntax(line, format!("unknown node kind `{other}`"))),
        };
        self.expect(")")?;
        Ok(tree)
    }
}

/// Parses a tree, resolving class ids and values against `instance`.
/// Test legality is left to [`DecisionTree::validate`].
pub fn parse_tree(text: &str, instance: &Instance) -> Result<DecisionTree, ParseError> {
    let mut p = TreeParser {
        tokens: tokenize(text),
        pos: 0,
        instance,
    };
    let tree = p.tree()?;
    if let Some(t) = p.tokens.get(p.pos) {
        return Err(syntax(t.line, format!("trailing input `{}`", t.text)));
    }
    Ok(tree)
}

/// Single-line rendering; [`parse_tree`] reads it back unchanged.
pub fn print_tree(tree: &DecisionTree, instance: &Instance) -> String {
    fn go(t: &DecisionTree, instance: &Instance, out: &mut String) {
        match t {
            DecisionTree::Leaf(c) => write!(out, "(leaf {})", instance.class(*c).name).unwrap(),
            DecisionTree::Node { test, yes, no } => {
                let op = match test.kind {
                    TestKind::Less => '<',
                    TestKind::Equal => '=',
                };
                write!(out, "({op} {} ", instance.value(test.key)).unwrap();
                go(yes, instance, out);
                out.push(' ');
                go(no, instance, out);
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    go(tree, instance, &mut out);
    out
}
