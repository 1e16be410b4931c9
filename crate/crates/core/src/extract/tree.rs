//! Flattened document tree used by the context extractors.
//!
//! HTML is parsed with a recovering html5 parser, then flattened into a
//! pre-order arena. Every node knows its parent and the end of its subtree,
//! which makes "walk backward from the table", "is this inside a heading?"
//! and "all descendants of this cell" cheap index arithmetic instead of
//! pointer chasing. Script and style subtrees and comments are dropped at
//! build time so their text can never leak into extracted fields.

use crate::error::{Error, Result};
use ego_tree::iter::Edge;
use scraper::{Html, Node};

/// Upper bound on `colspan`; mirrors the HTML specification's cap.
const MAX_COLSPAN: usize = 1000;

#[derive(Debug, Clone)]
pub(crate) enum NodeKind {
    Element {
        tag: String,
        attrs: Vec<(String, String)>,
    },
    Text(String),
}

#[derive(Debug, Clone)]
pub(crate) struct NodeData {
    pub(crate) kind: NodeKind,
    pub(crate) parent: Option<usize>,
    /// One past the last pre-order index of this node's subtree.
    pub(crate) end: usize,
}

/// A parsed HTML document flattened to a pre-order node arena.
#[derive(Debug, Clone)]
pub struct DocumentTree {
    nodes: Vec<NodeData>,
    tables: Vec<usize>,
}

impl DocumentTree {
    /// Parses HTML into a document tree.
    ///
    /// Parsing is recovering: malformed markup yields a best-effort tree and
    /// never fails. The only error is an empty (or whitespace-only) input.
    pub fn parse(html: &str) -> Result<Self> {
        if html.trim().is_empty() {
            return Err(Error::EmptyDocument);
        }
        let doc = Html::parse_document(html);
        let mut nodes: Vec<NodeData> = Vec::new();
        let mut tables = Vec::new();
        let mut stack: Vec<usize> = Vec::new();
        // Depth inside a <script>/<style> subtree; everything there is dropped.
        let mut skip_depth = 0usize;

        for edge in doc.tree.root().traverse() {
            match edge {
                Edge::Open(node) => match node.value() {
                    Node::Element(el) => {
                        let tag = el.name().to_ascii_lowercase();
                        if skip_depth > 0 || tag == "script" || tag == "style" {
                            skip_depth += 1;
                            continue;
                        }
                        let idx = nodes.len();
                        let attrs = el
                            .attrs()
                            .map(|(k, v)| (k.to_ascii_lowercase(), v.to_string()))
                            .collect();
                        if tag == "table" {
                            tables.push(idx);
                        }
                        nodes.push(NodeData {
                            kind: NodeKind::Element { tag, attrs },
                            parent: stack.last().copied(),
                            end: 0,
                        });
                        stack.push(idx);
                    }
                    Node::Text(t)
                        if skip_depth == 0 && !t.text.trim().is_empty() => {
                            let idx = nodes.len();
                            nodes.push(NodeData {
                                kind: NodeKind::Text(t.text.to_string()),
                                parent: stack.last().copied(),
                                end: idx + 1,
                            });
                        }
                    // Comments, doctypes and processing instructions carry no
                    // extractable text.
                    _ => {}
                },
                Edge::Close(node) => {
                    if let Node::Element(_) = node.value() {
                        if skip_depth > 0 {
                            skip_depth -= 1;
                        } else if let Some(idx) = stack.pop() {
                            let end = nodes.len();
                            nodes[idx].end = end;
                        }
                    }
                }
            }
        }
        Ok(DocumentTree { nodes, tables })
    }

    /// Number of `<table>` elements in document order.
    pub fn table_count(&self) -> usize {
        self.tables.len()
    }

    /// Arena index of the `table_index`-th table.
    pub(crate) fn table_node(&self, table_index: usize) -> Result<usize> {
        self.tables
            .get(table_index)
            .copied()
            .ok_or(Error::InvalidTableIndex {
                index: table_index,
                count: self.tables.len(),
            })
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }

    /// Element tag name, or `None` for text nodes.
    pub(crate) fn tag(&self, i: usize) -> Option<&str> {
        match &self.nodes[i].kind {
            NodeKind::Element { tag, .. } => Some(tag),
            NodeKind::Text(_) => None,
        }
    }

    pub(crate) fn text_of(&self, i: usize) -> Option<&str> {
        match &self.nodes[i].kind {
            NodeKind::Text(t) => Some(t),
            NodeKind::Element { .. } => None,
        }
    }

    pub(crate) fn parent(&self, i: usize) -> Option<usize> {
        self.nodes[i].parent
    }

    pub(crate) fn end(&self, i: usize) -> usize {
        self.nodes[i].end
    }

    /// Value of an attribute on an element node.
    pub(crate) fn attr(&self, i: usize, name: &str) -> Option<&str> {
        match &self.nodes[i].kind {
            NodeKind::Element { attrs, .. } => attrs
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| v.as_str()),
            NodeKind::Text(_) => None,
        }
    }

    /// Parsed `colspan` of a cell, clamped to `1..=1000`; anything
    /// unparseable counts as 1.
    pub(crate) fn colspan(&self, i: usize) -> usize {
        self.attr(i, "colspan")
            .and_then(|v| v.trim().parse::<usize>().ok())
            .map(|v| v.clamp(1, MAX_COLSPAN))
            .unwrap_or(1)
    }

    /// Whether any strict ancestor of `i` satisfies `pred` on its tag.
    pub(crate) fn has_ancestor(&self, i: usize, mut pred: impl FnMut(&str) -> bool) -> bool {
        let mut cur = self.parent(i);
        while let Some(p) = cur {
            if let Some(tag) = self.tag(p) {
                if pred(tag) {
                    return true;
                }
            }
            cur = self.parent(p);
        }
        false
    }

    /// Whitespace-normalized text content of the subtree rooted at `i`.
    ///
    /// With `skip_nested_tables`, any `<table>` subtree strictly below `i` is
    /// excluded, so a cell containing a nested table reports only its own
    /// text.
    pub(crate) fn subtree_text(&self, i: usize, skip_nested_tables: bool) -> String {
        let mut raw = String::new();
        let stop = self.end(i).max(i + 1);
        let mut j = i;
        while j < stop {
            if skip_nested_tables && j != i && self.tag(j) == Some("table") {
                j = self.end(j);
                continue;
            }
            if let Some(text) = self.text_of(j) {
                raw.push_str(text);
                raw.push(' ');
            }
            j += 1;
        }
        normalize_whitespace(&raw)
    }
}

/// Collapses all whitespace runs to single spaces and trims the ends.
pub(crate) fn normalize_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// `1..=6` for `h1`..`h6`, `None` otherwise.
pub(crate) fn heading_level(tag: &str) -> Option<u8> {
    match tag {
        "h1" => Some(1),
        "h2" => Some(2),
        "h3" => Some(3),
        "h4" => Some(4),
        "h5" => Some(5),
        "h6" => Some(6),
        _ => None,
    }
}
