use super::Permutation;
use crate::error::{Error, Result};

fn err(position: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        position,
        message: message.into(),
    }
}

pub(super) fn parse_permutation(s: &str, n: Option<usize>) -> Result<Permutation> {
    let offset = s.len() - s.trim_start().len();
    let text = s.trim();
    match text.chars().next() {
        Some('(') => parse_cycles(text, offset, n),
        Some('[') => {
            let image: Vec<usize> = serde_json::from_str(text)
                .map_err(|e| err(offset + e.column().saturating_sub(1), format!("bad one-line permutation: {e}")))?;
            if let Some(n) = n {
                if image.len() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "one-line permutation has {} entries, expected {n}",
                        image.len()
                    )));
                }
            }
            Permutation::from_one_line(&image)
        }
        Some(c) => Err(err(offset, format!("expected '(' or '[', found {c:?}"))),
        None => Err(err(0, "empty permutation")),
    }
}

fn parse_cycles(text: &str, offset: usize, n: Option<usize>) -> Result<Permutation> {
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut first_seen: Vec<(usize, usize)> = Vec::new();
    let mut current: Option<Vec<usize>> = None;
    let mut chars = text.char_indices().peekable();
    while let Some((pos, c)) = chars.next() {
        let at = offset + pos;
        match c {
            '(' => {
                if current.is_some() {
                    return Err(err(at, "nested '('"));
                }
                current = Some(Vec::new());
            }
            ')' => {
                let cycle = current.take().ok_or_else(|| err(at, "unmatched ')'"))?;
                if cycle.is_empty() {
                    return Err(err(at, "empty cycle"));
                }
                cycles.push(cycle);
            }
            c if c.is_ascii_digit() => {
                let cycle = current.as_mut().ok_or_else(|| err(at, "number outside a cycle"))?;
                let mut value = c.to_digit(10).unwrap() as usize;
                while let Some(&(_, d)) = chars.peek() {
                    match d.to_digit(10) {
                        Some(digit) => {
                            value = value
                                .checked_mul(10)
                                .and_then(|v| v.checked_add(digit as usize))
                                .ok_or_else(|| err(at, "mode index overflows"))?;
                            chars.next();
                        }
                        None => break,
                    }
                }
                if value == 0 {
                    return Err(err(at, "mode indices start at 1"));
                }
                if let Some(&(_, prev)) = first_seen.iter().find(|(m, _)| *m == value) {
                    return Err(err(at, format!("repeated element {value} (first seen at position {prev})")));
                }
                first_seen.push((value, at));
                cycle.push(value);
            }
            c if c.is_whitespace() || c == ',' => {}
            c => return Err(err(at, format!("unexpected character {c:?}"))),
        }
    }
    if current.is_some() {
        return Err(err(offset + text.len(), "unterminated cycle"));
    }
    let max = first_seen.iter().map(|&(m, _)| m).max().unwrap_or(0);
    let n = match n {
        Some(n) if max > n => {
            let (_, pos) = first_seen.iter().find(|&&(m, _)| m == max).unwrap();
            return Err(err(*pos, format!("mode {max} exceeds mode count {n}")));
        }
        Some(n) => n,
        None => max,
    };
    Permutation::from_cycles(&cycles, n)
}
