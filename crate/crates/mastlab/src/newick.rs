//! Newick reading and writing.
//!
//! The dialect is deliberately narrow: rooted binary topologies with positive
//! integer leaf labels, no branch lengths, no internal-node labels. The
//! trailing semicolon is optional on input and always written on output.
//! Whitespace is tolerated between tokens.
//!
//! Output is canonical: at each internal node the child whose subtree has the
//! smaller minimum leaf label is printed first, so equal trees serialize to
//! identical bytes.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::tree::{Node, NodeId, Tree};

/// A parse failure, carrying the byte offset where it was detected.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("parse error at byte {pos}: {kind}")]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found '{found}'")]
    UnexpectedChar { expected: &'static str, found: char },
    #[error("expected {expected}, found end of input")]
    UnexpectedEnd { expected: &'static str },
    #[error("vertex is not binary")]
    NonBinaryNode,
    #[error("duplicate leaf label {0}")]
    DuplicateLabel(u32),
    #[error("leaf labels must be positive")]
    ZeroLabel,
    #[error("leaf label does not fit in 32 bits")]
    LabelOverflow,
    #[error("trailing input after tree")]
    TrailingInput,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    nodes: Vec<Node>,
    seen: BTreeSet<u32>,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, kind: ParseErrorKind) -> std::result::Result<T, ParseError> {
        Err(ParseError {
            pos: self.pos,
            kind,
        })
    }

    fn skip_ws(&mut self) {
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_whitespace())
        {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn subtree(&mut self) -> std::result::Result<NodeId, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let left = self.subtree()?;
                self.skip_ws();
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => return self.err(ParseErrorKind::NonBinaryNode),
                    Some(c) => {
                        return self.err(ParseErrorKind::UnexpectedChar {
                            expected: "','",
                            found: c as char,
                        })
                    }
                    None => return self.err(ParseErrorKind::UnexpectedEnd { expected: "','" }),
                }
                let right = self.subtree()?;
                self.skip_ws();
                match self.peek() {
                    Some(b')') => self.pos += 1,
                    Some(b',') => return self.err(ParseErrorKind::NonBinaryNode),
                    Some(c) => {
                        return self.err(ParseErrorKind::UnexpectedChar {
                            expected: "')'",
                            found: c as char,
                        })
                    }
                    None => return self.err(ParseErrorKind::UnexpectedEnd { expected: "')'" }),
                }
                self.nodes.push(Node::Internal(left, right));
                Ok(self.nodes.len() - 1)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                let mut value: u64 = 0;
                while let Some(d) = self.peek().filter(u8::is_ascii_digit) {
                    value = value * 10 + u64::from(d - b'0');
                    if value > u64::from(u32::MAX) {
                        self.pos = start;
                        return self.err(ParseErrorKind::LabelOverflow);
                    }
                    self.pos += 1;
                }
                let label = value as u32;
                if label == 0 {
                    self.pos = start;
                    return self.err(ParseErrorKind::ZeroLabel);
                }
                if !self.seen.insert(label) {
                    self.pos = start;
                    return self.err(ParseErrorKind::DuplicateLabel(label));
                }
                self.nodes.push(Node::Leaf(label));
                Ok(self.nodes.len() - 1)
            }
            Some(c) => self.err(ParseErrorKind::UnexpectedChar {
                expected: "'(' or a leaf label",
                found: c as char,
            }),
            None => self.err(ParseErrorKind::UnexpectedEnd {
                expected: "'(' or a leaf label",
            }),
        }
    }
}

/// Parses a rooted binary Newick expression.
pub fn parse_newick(text: &str) -> Result<Tree> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
        seen: BTreeSet::new(),
    };
    let root = p.subtree()?;
    p.skip_ws();
    if p.peek() == Some(b';') {
        p.pos += 1;
        p.skip_ws();
    }
    if p.pos != p.bytes.len() {
        return Err(ParseError {
            pos: p.pos,
            kind: ParseErrorKind::TrailingInput,
        }
        .into());
    }
    Tree::from_parts(p.nodes, root)
}

/// Serializes a tree in the canonical Newick form described in the module
/// docs, semicolon-terminated.
pub fn write_newick(tree: &Tree) -> String {
    let mins = tree.min_labels();
    let mut out = String::with_capacity(tree.node_count() * 3);
    fn go(tree: &Tree, id: NodeId, mins: &[u32], out: &mut String) {
        match tree.node(id) {
            Node::Leaf(l) => {
                out.push_str(&l.to_string());
            }
            Node::Internal(a, b) => {
                let (first, second) = if mins[a] < mins[b] { (a, b) } else { (b, a) };
                out.push('(');
                go(tree, first, mins, out);
                out.push(',');
                go(tree, second, mins, out);
                out.push(')');
            }
        }
    }
    go(tree, tree.root(), &mins, &mut out);
    out.push(';');
    out
}
