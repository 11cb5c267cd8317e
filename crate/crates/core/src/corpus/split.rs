//! Rule-based sentence splitter tuned for legal summaries.
//!
//! A boundary falls after `.`, `?` or `!` when the terminator is followed by
//! whitespace and then an uppercase letter or the end of the text. A `.` that
//! closes a known abbreviation (`v.`, `no.`, `para.`, ...) or a single capital
//! initial (`R.`) never ends a sentence. Each returned piece keeps its
//! trailing whitespace, so concatenating the pieces yields the input.

const ABBREVIATIONS: [&str; 13] = [
    "v.", "s.", "ss.", "no.", "mr.", "ms.", "dr.", "hon.", "para.", "paras.", "e.g.", "i.e.", "etc.",
];

fn is_guarded(text: &str, dot: usize) -> bool {
    let word_start = text[..dot]
        .rfind(char::is_whitespace)
        .map_or(0, |i| i + text[i..].chars().next().map_or(1, char::len_utf8));
    let word = text[word_start..=dot].trim_start_matches(|c: char| !c.is_alphanumeric());
    if ABBREVIATIONS.iter().any(|a| a.eq_ignore_ascii_case(word)) {
        return true;
    }
    let mut chars = word.chars();
    matches!((chars.next(), chars.next(), chars.next()), (Some(c), Some('.'), None) if c.is_uppercase())
}

pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut iter = text.char_indices().peekable();
    while let Some((i, c)) = iter.next() {
        if !matches!(c, '.' | '?' | '!') {
            continue;
        }
        let after = i + c.len_utf8();
        let rest = &text[after..];
        let ws_len = rest.len() - rest.trim_start().len();
        if ws_len == 0 {
            continue;
        }
        let next = rest[ws_len..].chars().next();
        let boundary = match next {
            None => true,
            Some(n) => n.is_uppercase(),
        };
        if !boundary || (c == '.' && is_guarded(text, i)) {
            continue;
        }
        let end = after + ws_len;
        pieces.push(&text[start..end]);
        start = end;
        while iter.peek().is_some_and(|(j, _)| *j < end) {
            iter.next();
        }
    }
    if start < text.len() {
        pieces.push(&text[start..]);
    }
    pieces
}

/// Sentences with surrounding whitespace removed, empty pieces dropped.
pub fn sentences_trimmed(text: &str) -> Vec<&str> {
    split_sentences(text)
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_on_capitalized_follow() {
        let s = split_sentences("At issue was custody. HELD: custody was given.");
        assert_eq!(s, vec!["At issue was custody. ", "HELD: custody was given."]);
    }

    #[test]
    fn abbreviation_guard() {
        assert_eq!(split_sentences("Smith v. Jones was cited.").len(), 1);
        assert_eq!(split_sentences("See R. v. Smith. The Crown appealed.").len(), 2);
        assert_eq!(split_sentences("Cited at Para. 4 and No. 12 here.").len(), 1);
        assert_eq!(split_sentences("It failed, e.g. Under the Act it did.").len(), 1);
    }

    #[test]
    fn edge_cases() {
        assert!(split_sentences("").is_empty());
        assert_eq!(split_sentences("   "), vec!["   "]);
        assert_eq!(split_sentences("no terminator"), vec!["no terminator"]);
        assert_eq!(split_sentences("lower. case follows."), vec!["lower. case follows."]);
        assert_eq!(split_sentences("Why? Because! Done."), vec!["Why? ", "Because! ", "Done."]);
        assert_eq!(split_sentences("Trailing.  "), vec!["Trailing.  "]);
        assert_eq!(split_sentences("A 1.5 ratio. Next"), vec!["A 1.5 ratio. ", "Next"]);
        assert_eq!(split_sentences("Über. Ärger."), vec!["Über. ", "Ärger."]);
    }

    #[test]
    fn trimmed_view() {
        assert_eq!(
            sentences_trimmed(" One here.  Two there. "),
            vec!["One here.", "Two there."]
        );
    }
}
