//! Flattening a table context into the model's source token sequence.

use crate::corpus::tokenize;
use crate::corpus::vocab::FIELD_MARKERS;
use crate::extract::TableContext;

/// Default cap on the linearized source length, in tokens.
pub const MAX_SOURCE_TOKENS: usize = 150;

/// Which context fields feed the model, and the source length cap.
///
/// The default enables the compact descriptive fields (page title, section
/// headings, captions, spanning headers, column headers). Rows and the
/// prefix/suffix text are bulky and off by default.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldConfig {
    pub page_title: bool,
    pub section_headings: bool,
    pub captions: bool,
    pub spanning_headers: bool,
    pub column_headers: bool,
    pub prefix_suffix: bool,
    pub table_rows: bool,
    pub max_tokens: usize,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig {
            page_title: true,
            section_headings: true,
            captions: true,
            spanning_headers: true,
            column_headers: true,
            prefix_suffix: false,
            table_rows: false,
            max_tokens: MAX_SOURCE_TOKENS,
        }
    }
}

impl FieldConfig {
    /// Every field enabled.
    pub fn all() -> Self {
        FieldConfig {
            prefix_suffix: true,
            table_rows: true,
            ..FieldConfig::default()
        }
    }
}

/// Serializes a context into one token sequence.
///
/// Each non-empty field value is emitted as its field marker followed by the
/// value's tokens; multi-valued fields repeat the marker per value. The
/// result is truncated to `config.max_tokens`.
pub fn linearize(context: &TableContext, config: &FieldConfig) -> Vec<String> {
    let [m_page, m_heading, m_caption, m_spanning, m_column, m_prefix, m_suffix, m_row] =
        FIELD_MARKERS;
    let mut out: Vec<String> = Vec::new();
    let push = |marker: &str, tokens: &[String], out: &mut Vec<String>| {
        if !tokens.is_empty() {
            out.push(marker.to_string());
            out.extend(tokens.iter().cloned());
        }
    };

    if config.page_title {
        push(m_page, &context.page_title, &mut out);
    }
    if config.section_headings {
        for (_, heading) in &context.section_headings {
            push(m_heading, heading, &mut out);
        }
    }
    if config.captions {
        for caption in &context.captions {
            push(m_caption, caption, &mut out);
        }
    }
    if config.spanning_headers {
        for header in &context.spanning_headers {
            push(m_spanning, header, &mut out);
        }
    }
    if config.column_headers {
        for header in &context.column_headers {
            push(m_column, header, &mut out);
        }
    }
    if config.prefix_suffix {
        push(m_prefix, &context.prefix_text, &mut out);
        push(m_suffix, &context.suffix_text, &mut out);
    }
    if config.table_rows {
        for row in &context.table_rows {
            push(m_row, &tokenize(row), &mut out);
        }
    }
    out.truncate(config.max_tokens);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_context() -> TableContext {
        TableContext {
            page_title: tokenize("nicole eggert - wikipedia"),
            section_headings: vec![(1, tokenize("nicole eggert")), (2, tokenize("filmography"))],
            captions: vec![tokenize("films")],
            spanning_headers: vec![],
            column_headers: vec![tokenize("year"), tokenize("title"), tokenize("role")],
            prefix_text: tokenize("appeared in"),
            suffix_text: tokenize("see also"),
            table_rows: vec!["1976, Rocky".to_string()],
            table_index: 0,
            source_url: None,
        }
    }

    #[test]
    fn default_fields_in_order_with_repeated_markers() {
        let got = linearize(&sample_context(), &FieldConfig::default());
        let want = [
            "#page_title", "nicole", "eggert", "-", "wikipedia",
            "#section_heading", "nicole", "eggert",
            "#section_heading", "filmography",
            "#caption", "films",
            "#column_header", "year",
            "#column_header", "title",
            "#column_header", "role",
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn optional_fields_append_prefix_suffix_then_rows() {
        let got = linearize(&sample_context(), &FieldConfig::all());
        let tail = [
            "#prefix", "appeared", "in",
            "#suffix", "see", "also",
            "#row", "1976", ",", "rocky",
        ];
        assert_eq!(&got[got.len() - tail.len()..], tail);
    }

    #[test]
    fn empty_values_emit_no_marker() {
        let context = TableContext::default();
        assert!(linearize(&context, &FieldConfig::all()).is_empty());

        let context = TableContext {
            captions: vec![vec![]],
            ..TableContext::default()
        };
        assert!(linearize(&context, &FieldConfig::all()).is_empty());
    }

    #[test]
    fn output_is_truncated_to_max_tokens() {
        let context = TableContext {
            prefix_text: (0..300).map(|i| format!("w{i}")).collect(),
            ..TableContext::default()
        };
        let config = FieldConfig::all();
        let got = linearize(&context, &config);
        assert_eq!(got.len(), MAX_SOURCE_TOKENS);
        assert_eq!(got[0], "#prefix");
        assert_eq!(got[149], "w148");

        // Truncation is idempotent: linearizing can never exceed the cap.
        let tight = FieldConfig {
            max_tokens: 5,
            ..FieldConfig::all()
        };
        assert_eq!(linearize(&context, &tight).len(), 5);
    }
}
