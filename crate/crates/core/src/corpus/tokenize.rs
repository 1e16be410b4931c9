//! Whitespace-and-punctuation tokenizer shared by every stage of the toolkit.

/// Lowercases `text` and splits it into tokens.
///
/// Words are split on whitespace and every punctuation character becomes its
/// own single-character token, with one exception: a hyphen or apostrophe
/// *between* two word characters stays inside the word, so `o'brien` and
/// `1976-77` survive as single tokens while a free-standing `-` does not.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for word in text.split_whitespace() {
        split_word(&word.to_lowercase(), &mut tokens);
    }
    tokens
}

fn split_word(word: &str, tokens: &mut Vec<String>) {
    let chars: Vec<char> = word.chars().collect();
    let mut current = String::new();
    for (i, &c) in chars.iter().enumerate() {
        let joins = (c == '-' || c == '\'')
            && !current.is_empty()
            && chars.get(i + 1).is_some_and(|n| n.is_alphanumeric());
        if c.is_alphanumeric() || joins {
            current.push(c);
        } else {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(c.to_string());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(text: &str) -> Vec<String> {
        tokenize(text)
    }

    #[test]
    fn lowercases_and_splits_on_whitespace() {
        assert_eq!(toks("Nicole Eggert"), ["nicole", "eggert"]);
        assert_eq!(toks("  a\tb\nc  "), ["a", "b", "c"]);
    }

    #[test]
    fn punctuation_becomes_its_own_token() {
        assert_eq!(
            toks("Nicole Eggert - Wikipedia"),
            ["nicole", "eggert", "-", "wikipedia"]
        );
        assert_eq!(toks("Filmography[edit]"), ["filmography", "[", "edit", "]"]);
        assert_eq!(
            toks("Chocolate Gifts | Artisan Truffles"),
            ["chocolate", "gifts", "|", "artisan", "truffles"]
        );
    }

    #[test]
    fn intra_word_hyphen_and_apostrophe_are_kept() {
        assert_eq!(toks("1976-77 season"), ["1976-77", "season"]);
        assert_eq!(toks("O'Brien's"), ["o'brien's"]);
        assert_eq!(toks("don't"), ["don't"]);
    }

    #[test]
    fn dangling_joiners_split_off() {
        assert_eq!(toks("x-"), ["x", "-"]);
        assert_eq!(toks("-x"), ["-", "x"]);
        assert_eq!(toks("rock'"), ["rock", "'"]);
        assert_eq!(toks("a--b"), ["a", "-", "-", "b"]);
    }

    #[test]
    fn empty_and_whitespace_only_inputs() {
        assert!(toks("").is_empty());
        assert!(toks(" \t\n ").is_empty());
    }

    #[test]
    fn mixed_symbols() {
        assert_eq!(toks("(1993)"), ["(", "1993", ")"]);
        assert_eq!(toks("u.s."), ["u", ".", "s", "."]);
        assert_eq!(toks("50%"), ["50", "%"]);
    }
}
