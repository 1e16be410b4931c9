//! Extraction of the textual context surrounding an HTML table.
//!
//! Given a parsed [`DocumentTree`] and a table index, these functions pull
//! out the fields that describe the table: the page title, the section
//! heading trail, captions, column and spanning headers, data rows, and the
//! free text immediately before and after the table.

mod tree;

pub use tree::DocumentTree;

use crate::corpus::tokenize;
use crate::error::Result;
use tree::{heading_level, normalize_whitespace};

/// Token budget for each of the prefix and suffix fields.
pub const PREFIX_SUFFIX_TOKEN_LIMIT: usize = 200;

/// Everything the toolkit knows about one table.
///
/// All fields except `table_rows` hold tokenized text; `table_rows` keeps one
/// raw (case-preserving, whitespace-normalized) string per data row, with
/// cells joined by `", "`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableContext {
    pub page_title: Vec<String>,
    /// `(heading level, tokens)` pairs in reading order, outermost first.
    pub section_headings: Vec<(u8, Vec<String>)>,
    pub captions: Vec<Vec<String>>,
    pub spanning_headers: Vec<Vec<String>>,
    pub column_headers: Vec<Vec<String>>,
    pub prefix_text: Vec<String>,
    pub suffix_text: Vec<String>,
    pub table_rows: Vec<String>,
    /// Position of the table among all tables in its source document.
    pub table_index: usize,
    pub source_url: Option<String>,
}

/// Caption, header and row fields of a single table.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableFields {
    pub captions: Vec<Vec<String>>,
    pub spanning_headers: Vec<Vec<String>>,
    pub column_headers: Vec<Vec<String>>,
    pub table_rows: Vec<String>,
}

struct Cell {
    header: bool,
    colspan: usize,
    text: String,
}

/// Tokens of the first `<title>` inside `<head>`; empty when absent.
pub fn extract_page_title(doc: &DocumentTree) -> Vec<String> {
    for i in 0..doc.len() {
        if doc.tag(i) == Some("title") && doc.has_ancestor(i, |t| t == "head") {
            return tokenize(&doc.subtree_text(i, false));
        }
    }
    Vec::new()
}

/// Heading trail above the table, outermost heading first.
///
/// Walking backward from the table, a heading is kept only if its level is
/// strictly lower (more major) than every heading kept so far, so the result
/// is the chain of sections enclosing the table, e.g.
/// `h1 > ... h2 > ... h3 > table` yields the h1, h2 and h3.
pub fn extract_section_headings(
    doc: &DocumentTree,
    table_index: usize,
) -> Result<Vec<(u8, Vec<String>)>> {
    let t = doc.table_node(table_index)?;
    let mut kept: Vec<(u8, Vec<String>)> = Vec::new();
    let mut min_level = u8::MAX;
    for i in (0..t).rev() {
        let Some(level) = doc.tag(i).and_then(heading_level) else {
            continue;
        };
        if level < min_level {
            kept.push((level, tokenize(&doc.subtree_text(i, false))));
            min_level = level;
        }
    }
    kept.reverse();
    Ok(kept)
}

/// Captions, column headers, spanning headers and data rows of the table.
///
/// * every `<th>` contributes a column header;
/// * a `<th>` whose `colspan` equals the table's column count (the maximum
///   total colspan over its rows) also counts as a spanning header;
/// * each row that is not a header row (one where every cell is a `<th>`)
///   contributes one string: its cell texts joined by `", "`;
/// * nested tables contribute nothing to the outer table.
pub fn extract_table_fields(doc: &DocumentTree, table_index: usize) -> Result<TableFields> {
    let t = doc.table_node(table_index)?;
    let mut fields = TableFields::default();
    let mut rows: Vec<Vec<Cell>> = Vec::new();

    let mut i = t + 1;
    while i < doc.end(t) {
        match doc.tag(i) {
            Some("table") => i = doc.end(i),
            Some("caption") => {
                let tokens = tokenize(&doc.subtree_text(i, true));
                if !tokens.is_empty() {
                    fields.captions.push(tokens);
                }
                i = doc.end(i);
            }
            Some("tr") => {
                rows.push(collect_cells(doc, i));
                i = doc.end(i);
            }
            _ => i += 1,
        }
    }

    let column_count = rows
        .iter()
        .map(|row| row.iter().map(|c| c.colspan).sum::<usize>())
        .max()
        .unwrap_or(0);

    for row in &rows {
        let header_row = !row.is_empty() && row.iter().all(|c| c.header);
        for cell in row {
            if cell.header {
                let tokens = tokenize(&cell.text);
                if cell.colspan == column_count {
                    fields.spanning_headers.push(tokens.clone());
                }
                fields.column_headers.push(tokens);
            }
        }
        if !header_row && !row.is_empty() {
            fields
                .table_rows
                .push(normalize_whitespace(
                    &row.iter().map(|c| c.text.as_str()).collect::<Vec<_>>().join(", "),
                ));
        }
    }
    Ok(fields)
}

/// Cells directly belonging to row `tr`, skipping nested tables.
fn collect_cells(doc: &DocumentTree, tr: usize) -> Vec<Cell> {
    let mut cells = Vec::new();
    let mut j = tr + 1;
    while j < doc.end(tr) {
        match doc.tag(j) {
            Some("table") => j = doc.end(j),
            Some(tag @ ("td" | "th")) => {
                cells.push(Cell {
                    header: tag == "th",
                    colspan: doc.colspan(j),
                    text: doc.subtree_text(j, true),
                });
                j = doc.end(j);
            }
            _ => j += 1,
        }
    }
    cells
}

/// Free text immediately before and after the table, in reading order.
///
/// Each side walks outward from the table collecting text until it meets a
/// boundary — any other table or any `h1`..`h6` heading — or until
/// [`PREFIX_SUFFIX_TOKEN_LIMIT`] tokens have been gathered; the tokens
/// nearest the table are the ones kept. Text inside `<head>` never renders,
/// so it is skipped rather than collected.
pub fn extract_prefix_suffix(
    doc: &DocumentTree,
    table_index: usize,
) -> Result<(Vec<String>, Vec<String>)> {
    let t = doc.table_node(table_index)?;
    let limit = PREFIX_SUFFIX_TOKEN_LIMIT;

    // Prefix: walk backward, gathering tokens nearest-first, then flip.
    let mut rev_prefix: Vec<String> = Vec::new();
    'prefix: for i in (0..t).rev() {
        match boundary_or_text(doc, i) {
            Walk::Boundary => break,
            Walk::Skip => {}
            Walk::Text(text) => {
                for tok in tokenize(text).into_iter().rev() {
                    rev_prefix.push(tok);
                    if rev_prefix.len() == limit {
                        break 'prefix;
                    }
                }
            }
        }
    }
    rev_prefix.reverse();

    let mut suffix: Vec<String> = Vec::new();
    'suffix: for i in doc.end(t)..doc.len() {
        match boundary_or_text(doc, i) {
            Walk::Boundary => break,
            Walk::Skip => {}
            Walk::Text(text) => {
                for tok in tokenize(text) {
                    suffix.push(tok);
                    if suffix.len() == limit {
                        break 'suffix;
                    }
                }
            }
        }
    }
    Ok((rev_prefix, suffix))
}

enum Walk<'a> {
    Boundary,
    Skip,
    Text(&'a str),
}

fn boundary_or_text(doc: &DocumentTree, i: usize) -> Walk<'_> {
    if let Some(tag) = doc.tag(i) {
        if tag == "table" || heading_level(tag).is_some() {
            return Walk::Boundary;
        }
        return Walk::Skip;
    }
    // Text node: text inside another table or a heading marks the boundary
    // just like the element itself would.
    if doc.has_ancestor(i, |t| t == "table" || heading_level(t).is_some()) {
        return Walk::Boundary;
    }
    if doc.has_ancestor(i, |t| t == "head") {
        return Walk::Skip;
    }
    Walk::Text(doc.text_of(i).expect("non-element node carries text"))
}

/// Runs every extractor for one table and assembles the full context.
pub fn extract_context(doc: &DocumentTree, table_index: usize) -> Result<TableContext> {
    let fields = extract_table_fields(doc, table_index)?;
    let (prefix_text, suffix_text) = extract_prefix_suffix(doc, table_index)?;
    Ok(TableContext {
        page_title: extract_page_title(doc),
        section_headings: extract_section_headings(doc, table_index)?,
        captions: fields.captions,
        spanning_headers: fields.spanning_headers,
        column_headers: fields.column_headers,
        prefix_text,
        suffix_text,
        table_rows: fields.table_rows,
        table_index,
        source_url: None,
    })
}
