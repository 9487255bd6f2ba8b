//! Small helpers for Graphviz DOT text.

/// Quotes and escapes a DOT identifier or label.
pub fn quote(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 2);
    out.push('"');
    for c in text.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    #[test]
    fn escapes() {
        assert_eq!(super::quote(r#"a "b"\c"#), r#""a \"b\"\\c""#);
        assert_eq!(super::quote("x\ny"), r#""x\ny""#);
    }
}
