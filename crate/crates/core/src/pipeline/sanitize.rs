use std::sync::OnceLock;

use regex::Regex;

fn fence_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)```[A-Za-z0-9_+-]*[ \t]*\r?\n(.*?)```").unwrap())
}

fn statement_start_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*(:-|%|[a-z][A-Za-z0-9_]*\s*(\(|\.|:-))").unwrap())
}

/// Extracts the program from a model response.
///
/// Takes the body of the first fenced code block if there is one, drops prose
/// lines before the first statement, and cuts everything after the last period.
pub fn sanitize_program(response: &str) -> String {
    let body = match fence_re().captures(response) {
        Some(c) => c.get(1).unwrap().as_str(),
        None => response,
    };
    let lines: Vec<&str> = body.lines().collect();
    let Some(first) = lines.iter().position(|l| statement_start_re().is_match(l)) else {
        return body.trim().to_string();
    };
    let rest = lines[first..].join("\n");
    let end = last_statement_end(&rest);
    rest[..end].trim().to_string()
}

/// Byte offset just past the last period that is not inside a comment or a
/// quoted string; the whole text if there is none.
fn last_statement_end(text: &str) -> usize {
    let mut end = None;
    for (start, line) in line_offsets(text) {
        let mut in_str = false;
        for (i, c) in line.char_indices() {
            match c {
                '"' => in_str = !in_str,
                '%' if !in_str => break,
                '.' if !in_str => {
                    // `..` is never a statement end
                    let next = line[i + 1..].chars().next();
                    if next != Some('.') && !line[..i].ends_with('.') {
                        end = Some(start + i + 1);
                    }
                }
                _ => {}
            }
        }
    }
    end.unwrap_or(text.len())
}

fn line_offsets(text: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut offset = 0;
    text.split_inclusive('\n').map(move |l| {
        let start = offset;
        offset += l.len();
        (start, l)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_program_unchanged() {
        let p = "is(a,left,b).\nquery(a,b).";
        assert_eq!(sanitize_program(p), p);
    }

    #[test]
    fn strips_fences_and_prose() {
        let r =
            "Here is the program:\n```prolog\nis(a,left,b).\nquery(a,b).\n```\nHope this helps.";
        assert_eq!(sanitize_program(r), "is(a,left,b).\nquery(a,b).");
    }

    #[test]
    fn strips_leading_and_trailing_prose() {
        let r = "Sure! The facts are\nis(a,left,b).\nquery(a,b).\nThis encodes the story";
        assert_eq!(sanitize_program(r), "is(a,left,b).\nquery(a,b).");
    }

    #[test]
    fn keeps_broken_code() {
        assert_eq!(sanitize_program("is(a left b)."), "is(a left b).");
        assert_eq!(sanitize_program("is(a,left,b)"), "is(a,left,b)");
    }

    #[test]
    fn periods_in_comments_and_strings_ignored() {
        let r = "p(\"x.y\").\nq. % done. really\nnot a program";
        assert_eq!(sanitize_program(r), "p(\"x.y\").\nq.");
    }
}
