//! Replacement scripts: one `replace <rule> mode=<mode>` step per line,
//! `#` starts a comment.

use super::Mode;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptStep {
    /// Rule name, 1-based index or `#index`.
    pub rule: String,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

pub fn parse_script(src: &str) -> Result<Vec<ScriptStep>, ScriptError> {
    let mut steps = Vec::new();
    for (n, raw) in src.lines().enumerate() {
        let line = strip_comment(raw);
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        let err = |message: String| ScriptError { line: n + 1, message };
        match words.as_slice() {
            ["replace", rule, rest @ ..] => {
                let mut mode = Mode::Safe;
                for w in rest {
                    match w.strip_prefix("mode=") {
                        Some(m) => mode = m.parse().map_err(err)?,
                        None => return Err(err(format!("unexpected `{w}`"))),
                    }
                }
                steps.push(ScriptStep { rule: rule.to_string(), mode });
            }
            [w, ..] => return Err(err(format!("unknown command `{w}` (expected `replace`)"))),
            [] => unreachable!(),
        }
    }
    Ok(steps)
}

/// Cuts a `#` comment; `#` followed by a digit is an index selector.
fn strip_comment(raw: &str) -> &str {
    let b = raw.as_bytes();
    for i in 0..b.len() {
        if b[i] == b'#' && !b.get(i + 1).is_some_and(u8::is_ascii_digit) {
            return &raw[..i];
        }
    }
    raw
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_steps_and_comments() {
        let s = parse_script("# header\nreplace r1 mode=safe\n\nreplace #3 mode=weak # trailing\nreplace r2\n").unwrap();
        assert_eq!(
            s,
            vec![
                ScriptStep { rule: "r1".into(), mode: Mode::Safe },
                ScriptStep { rule: "#3".into(), mode: Mode::Weak },
                ScriptStep { rule: "r2".into(), mode: Mode::Safe },
            ]
        );
    }

    #[test]
    fn reports_line_numbers() {
        let e = parse_script("replace r1\nfold r2\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_script("replace r1 mode=fast\n").unwrap_err();
        assert_eq!(e.line, 1);
    }
}
