//! Penn-style bracketed constituency trees.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
    /// Set on preterminals: `(NN headset)`.
    pub word: Option<String>,
}

impl Tree {
    /// Label without function tags or indices: `NP-SBJ-1` → `NP`.
    pub fn base_label(&self) -> &str {
        if self.label.starts_with('-') {
            return &self.label;
        }
        self.label
            .split(['-', '='])
            .next()
            .unwrap_or(&self.label)
    }

    pub fn is_trace(&self) -> bool {
        self.label == "-NONE-"
    }

    /// Words at the leaves, left to right, skipping traces.
    pub fn leaves(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if self.is_trace() {
            return;
        }
        if let Some(w) = &self.word {
            out.push(w);
        }
        for c in &self.children {
            c.collect_leaves(out);
        }
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().len()
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: &str) -> Error {
        Error::Tree {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn atom(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || c == '(' || c == ')' {
                break;
            }
            self.pos += c.len_utf8();
        }
        &self.src[start..self.pos]
    }

    fn node(&mut self) -> Result<Tree> {
        self.skip_ws();
        if self.peek() != Some('(') {
            return Err(self.err("expected '('"));
        }
        self.pos += 1;
        self.skip_ws();
        let label = if self.peek() == Some('(') {
            String::new()
        } else {
            self.atom().to_string()
        };
        let mut children = Vec::new();
        let mut word = None;
        loop {
            self.skip_ws();
            match self.peek() {
                None => return Err(self.err("unexpected end of input")),
                Some(')') => {
                    self.pos += 1;
                    break;
                }
                Some('(') => children.push(self.node()?),
                Some(_) => {
                    if word.is_some() || !children.is_empty() {
                        return Err(self.err("unexpected token"));
                    }
                    word = Some(self.atom().to_string());
                }
            }
        }
        if word.is_some() && !children.is_empty() {
            return Err(self.err("node has both a word and children"));
        }
        if word.is_none() && children.is_empty() {
            return Err(self.err("empty node"));
        }
        Ok(Tree {
            label,
            children,
            word,
        })
    }
}

/// Parses one bracketed tree. Errors carry the byte offset of the failure.
pub fn parse_tree(src: &str) -> Result<Tree> {
    let mut p = Parser { src, pos: 0 };
    let t = p.node()?;
    p.skip_ws();
    if p.pos != src.len() {
        return Err(p.err("trailing input after tree"));
    }
    Ok(t)
}
