//! Minimal Newick reader for ultrametric trees with numeric branch lengths.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("newick parse error at byte {position}: {message}")]
pub struct NewickError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewickNode {
    pub label: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewickTree {
    pub nodes: Vec<NewickNode>,
    pub root: usize,
}

impl NewickTree {
    pub fn leaf_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.children.is_empty()).count()
    }

    /// Height above the leaves, following the first child down to a leaf.
    pub fn height(&self, id: usize) -> f64 {
        let mut h = 0.0;
        let mut node = id;
        while let Some(&c) = self.nodes[node].children.first() {
            h += self.nodes[c].length.unwrap_or(0.0);
            node = c;
        }
        h
    }

    /// Heights of all internal nodes, in node order.
    pub fn internal_heights(&self) -> Vec<f64> {
        (0..self.nodes.len())
            .filter(|&i| !self.nodes[i].children.is_empty())
            .map(|i| self.height(i))
            .collect()
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    nodes: Vec<NewickNode>,
}

impl<'a> Reader<'a> {
    fn fail<T>(&self, message: &str) -> Result<T, NewickError> {
        Err(NewickError {
            position: self.pos,
            message: message.to_string(),
        })
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn subtree(&mut self) -> Result<usize, NewickError> {
        let mut children = Vec::new();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                children.push(self.subtree()?);
                match self.peek() {
                    Some(b',') => self.pos += 1,
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    _ => return self.fail("expected `,` or `)`"),
                }
            }
        }
        let label = self.take_while(|b| !matches!(b, b':' | b',' | b')' | b'(' | b';'));
        let length = if self.peek() == Some(b':') {
            self.pos += 1;
            let start = self.pos;
            let text = self.take_while(|b| !matches!(b, b',' | b')' | b';'));
            match text.parse::<f64>() {
                Ok(v) => Some(v),
                Err(_) => {
                    self.pos = start;
                    return self.fail("malformed branch length");
                }
            }
        } else {
            None
        };
        if children.is_empty() && label.is_empty() {
            return self.fail("leaf without a label");
        }
        self.nodes.push(NewickNode {
            label: (!label.is_empty()).then(|| label.to_string()),
            length,
            children,
        });
        Ok(self.nodes.len() - 1)
    }

    fn take_while(&mut self, keep: impl Fn(u8) -> bool) -> &'a str {
        let start = self.pos;
        while self.peek().is_some_and(&keep) {
            self.pos += 1;
        }
        let bytes: &'a [u8] = self.bytes;
        core::str::from_utf8(&bytes[start..self.pos]).unwrap_or("")
    }
}

pub fn parse_newick(text: &str) -> Result<NewickTree, NewickError> {
    let trimmed = text.trim();
    let mut reader = Reader {
        bytes: trimmed.as_bytes(),
        pos: 0,
        nodes: Vec::new(),
    };
    let root = reader.subtree()?;
    if reader.peek() != Some(b';') || reader.pos + 1 != trimmed.len() {
        return reader.fail("expected `;` at the end");
    }
    Ok(NewickTree {
        nodes: reader.nodes,
        root,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_nested_tree() {
        let t = parse_newick("(1:0.4,(2:0.1,3:0.1):0.3);").unwrap();
        assert_eq!(t.leaf_count(), 3);
        assert!((t.height(t.root) - 0.4).abs() < 1e-15);
        let mut h = t.internal_heights();
        h.sort_by(f64::total_cmp);
        assert_eq!(h.len(), 2);
        assert!((h[0] - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse_newick("(1:0.4,2:0.4)").is_err());
        assert!(parse_newick("(1:x,2:0.4);").is_err());
        assert!(parse_newick("(,2:0.4);").is_err());
        assert!(parse_newick("(1:1,2:1;").is_err());
    }
}
