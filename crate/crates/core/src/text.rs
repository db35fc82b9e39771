//! Shared tokenization.
//!
//! Every module normalizes text the same way: split on non-alphanumeric
//! characters, split camelCase attribute names (`deathPlace` -> `death`,
//! `place`), lowercase, drop empty tokens. DBpedia attribute names are
//! camelCase, so matching query words against them requires decomposition.

/// Tokenize and normalize a piece of text.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    for chunk in text.split(|c: char| !c.is_alphanumeric()) {
        if chunk.is_empty() {
            continue;
        }
        split_camel_case(chunk, &mut tokens);
    }
    tokens
}

/// Tokenize into a deduplicated set, preserving nothing about order.
pub fn token_set(text: &str) -> std::collections::BTreeSet<String> {
    tokenize(text).into_iter().collect()
}

/// Normalized form used to compare names (entity ids vs. attribute values):
/// the token sequence joined by a single space, so `Mary_Todd` and
/// `mary todd` compare equal.
pub fn normalized_key(text: &str) -> String {
    tokenize(text).join(" ")
}

fn split_camel_case(chunk: &str, out: &mut Vec<String>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut start = 0;
    for i in 1..chars.len() {
        // Boundary at lower->Upper ("deathPlace") and at the last upper of an
        // acronym run ("HTTPServer" -> "HTTP", "Server").
        let boundary = (chars[i].is_uppercase() && chars[i - 1].is_lowercase())
            || (chars[i].is_uppercase()
                && chars[i - 1].is_uppercase()
                && i + 1 < chars.len()
                && chars[i + 1].is_lowercase());
        if boundary {
            out.push(chars[start..i].iter().collect::<String>().to_lowercase());
            start = i;
        }
    }
    if start < chars.len() {
        out.push(chars[start..].iter().collect::<String>().to_lowercase());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_non_alphanumeric() {
        assert_eq!(
            tokenize("the wife of Lincoln"),
            ["the", "wife", "of", "lincoln"]
        );
        assert_eq!(tokenize("Mary_Todd"), ["mary", "todd"]);
        assert_eq!(tokenize("Washington, D.C."), ["washington", "d", "c"]);
    }

    #[test]
    fn splits_camel_case() {
        assert_eq!(tokenize("deathPlace"), ["death", "place"]);
        assert_eq!(tokenize("birthPlaceName"), ["birth", "place", "name"]);
        assert_eq!(tokenize("spouse"), ["spouse"]);
        assert_eq!(tokenize("HTTPServer"), ["http", "server"]);
    }

    #[test]
    fn drops_empty_tokens() {
        assert_eq!(tokenize("  --  "), Vec::<String>::new());
        assert_eq!(tokenize(""), Vec::<String>::new());
    }

    #[test]
    fn digits_are_kept() {
        assert_eq!(tokenize("size 38"), ["size", "38"]);
    }

    #[test]
    fn normalized_key_unifies_separators() {
        assert_eq!(normalized_key("Mary_Todd"), normalized_key("mary todd"));
        assert_ne!(normalized_key("Mary_Todd"), normalized_key("mary"));
    }
}
