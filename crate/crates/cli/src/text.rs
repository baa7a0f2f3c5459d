//! Splitting command lines into operands.
//!
//! Operands are expressions, so splitting only happens at parenthesis depth
//! zero.

/// Byte ranges of the whitespace-separated words at depth zero.
fn top_level_words(text: &str) -> Vec<(usize, usize)> {
    let mut words = Vec::new();
    let mut depth = 0i32;
    let mut start = None;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if c.is_whitespace() && depth == 0 {
            if let Some(s) = start.take() {
                words.push((s, i));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        words.push((s, text.len()));
    }
    words
}

/// Splits at the first depth-zero word equal to `keyword`.
pub fn split_keyword<'a>(text: &'a str, keyword: &str) -> Option<(&'a str, &'a str)> {
    top_level_words(text)
        .into_iter()
        .find(|&(s, e)| &text[s..e] == keyword)
        .map(|(s, e)| (text[..s].trim(), text[e..].trim()))
}

/// Splits at the last depth-zero word equal to `keyword`.
pub fn rsplit_keyword<'a>(text: &'a str, keyword: &str) -> Option<(&'a str, &'a str)> {
    top_level_words(text)
        .into_iter()
        .rev()
        .find(|&(s, e)| &text[s..e] == keyword)
        .map(|(s, e)| (text[..s].trim(), text[e..].trim()))
}

/// The first word and the trimmed rest.
pub fn head(text: &str) -> (&str, &str) {
    let text = text.trim();
    match text.find(char::is_whitespace) {
        Some(i) => (&text[..i], text[i..].trim()),
        None => (text, ""),
    }
}

/// Splits at the first depth-zero comma, if any.
pub fn split_comma(text: &str) -> Option<(&str, &str)> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            ',' if depth == 0 => return Some((text[..i].trim(), text[i + 1..].trim())),
            _ => {}
        }
    }
    None
}

/// Candidate two-way splits at depth-zero whitespace, left to right.
pub fn whitespace_splits(text: &str) -> Vec<(&str, &str)> {
    let words = top_level_words(text);
    (1..words.len())
        .map(|i| (text[..words[i - 1].1].trim(), text[words[i].0..].trim()))
        .collect()
}

/// Whether `c` can continue an identifier.
pub fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

/// A token of an expression source as seen by name substitution.
#[derive(Debug, PartialEq)]
pub enum Piece<'a> {
    Ident(&'a str),
    /// A name immediately followed by a parenthesised argument.
    Call(&'a str, &'a str),
    Other(&'a str),
}

/// Cuts `text` into identifiers, calls and everything else. Runs that start
/// with a digit (number literals such as `2e5`) are never identifiers.
pub fn pieces(text: &str) -> Result<Vec<Piece<'_>>, String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if c.is_alphabetic() || c == '_' || c.is_ascii_digit() {
            let end = rest
                .find(|ch: char| !is_ident_char(ch) && ch != '.')
                .unwrap_or(rest.len());
            let word = &rest[..end];
            if c.is_ascii_digit() {
                out.push(Piece::Other(word));
                rest = &rest[end..];
                continue;
            }
            // a dot only belongs to number literals
            let end = word.find('.').unwrap_or(word.len());
            let word = &rest[..end];
            let after = &rest[end..];
            if after.starts_with('(') {
                let close = matching_paren(after)
                    .ok_or_else(|| format!("unbalanced parentheses after {word}"))?;
                out.push(Piece::Call(word, &after[1..close]));
                rest = &after[close + 1..];
            } else {
                out.push(Piece::Ident(word));
                rest = after;
            }
        } else {
            let end = rest
                .char_indices()
                .find(|&(i, ch)| i > 0 && (ch.is_alphabetic() || ch == '_' || ch.is_ascii_digit()))
                .map_or(rest.len(), |(i, _)| i);
            out.push(Piece::Other(&rest[..end]));
            rest = &rest[end..];
        }
    }
    Ok(out)
}

/// Byte offset of the parenthesis closing the one at offset 0.
fn matching_paren(text: &str) -> Option<usize> {
    let mut depth = 0i32;
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// `NAME(ARG)` spanning the whole text.
pub fn whole_call(text: &str) -> Option<(&str, &str)> {
    match pieces(text.trim()).ok()?.as_slice() {
        [Piece::Call(name, arg)] => Some((name, arg)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keywords_split_at_depth_zero() {
        assert_eq!(
            split_keyword("psi from 0 to ∂", "from"),
            Some(("psi", "0 to ∂"))
        );
        assert_eq!(split_keyword("f(from) to 1", "from"), None);
        assert_eq!(rsplit_keyword("a at b at c", "at"), Some(("a at b", "c")));
    }

    #[test]
    fn commas_and_whitespace() {
        assert_eq!(
            split_comma("periodic(1, 2), 3"),
            Some(("periodic(1, 2)", "3"))
        );
        assert_eq!(split_comma("f(1, 2)"), None);
        let splits = whitespace_splits("sqrt(∂) 0");
        assert_eq!(splits, vec![("sqrt(∂)", "0")]);
        assert_eq!(whitespace_splits("1 - ∂ 1").len(), 3);
    }

    #[test]
    fn pieces_keep_number_literals() {
        let p = pieces("2e5 + psi(x^2) * a_1").unwrap();
        assert_eq!(
            p,
            vec![
                Piece::Other("2e5"),
                Piece::Other(" + "),
                Piece::Call("psi", "x^2"),
                Piece::Other(" * "),
                Piece::Ident("a_1"),
            ]
        );
        assert_eq!(
            pieces("ξ^2").unwrap(),
            vec![Piece::Ident("ξ"), Piece::Other("^"), Piece::Other("2")]
        );
        assert!(pieces("f((1)").is_err());
        assert_eq!(whole_call(" phi(∞ / 2) "), Some(("phi", "∞ / 2")));
        assert_eq!(whole_call("phi(1) + 1"), None);
    }
}
