//! The `HYP v1` text format.
//!
//! ```text
//! HYP 1 <m> <k> <H>
//! <m labels>      (H lines)
//! ```

use super::{HypothesisClass, Label};
use crate::error::{Error, Result};
use std::fmt::Write as _;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn parse_hyp(text: &str) -> Result<HypothesisClass> {
    let mut lines = text.split('\n').enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<&str> = header.split(' ').collect();
    if fields.len() != 5 || fields[0] != "HYP" || fields[1] != "1" {
        return Err(parse_err(1, "expected header `HYP 1 <m> <k> <H>`"));
    }
    let num = |s: &str, what: &str| -> Result<usize> {
        s.parse()
            .map_err(|_| parse_err(1, format!("bad {what} `{s}`")))
    };
    let m = num(fields[2], "domain size")?;
    let k = num(fields[3], "label count")?;
    let h = num(fields[4], "hypothesis count")?;
    let mut rows: Vec<Vec<Label>> = Vec::with_capacity(h);
    for (no, line) in lines {
        if line.is_empty() && rows.len() == h {
            continue;
        }
        if line.ends_with(' ') || line.ends_with('\r') || line.ends_with('\t') {
            return Err(parse_err(no, "trailing whitespace"));
        }
        if rows.len() == h {
            return Err(parse_err(no, format!("more than {h} rows")));
        }
        let row: Vec<Label> = if m == 0 {
            Vec::new()
        } else {
            line.split(' ')
                .map(|t| t.parse::<Label>().map_err(|_| parse_err(no, format!("bad label `{t}`"))))
                .collect::<Result<_>>()?
        };
        if row.len() != m {
            return Err(parse_err(no, format!("expected {m} labels, found {}", row.len())));
        }
        if let Some(bad) = row.iter().find(|&&y| y as usize >= k) {
            return Err(parse_err(no, format!("label {bad} outside [0, {k})")));
        }
        rows.push(row);
    }
    if rows.len() != h {
        return Err(parse_err(h + 1, format!("expected {h} rows, found {}", rows.len())));
    }
    let mut sorted = rows.clone();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        let line = rows.iter().rposition(|r| *r == w[0]).unwrap() + 2;
        return Err(parse_err(line, "duplicate hypothesis row"));
    }
    HypothesisClass::from_distinct_rows(m, k, rows)
}

/// Serialize with rows in lexicographic order.
pub fn write_hyp(class: &HypothesisClass) -> String {
    let rows = class.sorted_rows();
    let mut out = format!(
        "HYP 1 {} {} {}\n",
        class.domain_size(),
        class.label_count(),
        rows.len()
    );
    for row in rows {
        let mut first = true;
        for y in row {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{y}").unwrap();
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let text = "HYP 1 3 2 3\n0 0 0\n0 1 1\n1 0 1\n";
        let c = parse_hyp(text).unwrap();
        assert_eq!(write_hyp(&c), text);
        let unsorted = "HYP 1 3 2 3\n1 0 1\n0 0 0\n0 1 1\n";
        assert_eq!(write_hyp(&parse_hyp(unsorted).unwrap()), text);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(matches!(parse_hyp("HYP 1 2 2 2\n0 1\n0 1\n"), Err(Error::Parse { line: 3, .. })));
        assert!(parse_hyp("HYP 1 2 2 1\n0 2\n").is_err());
        assert!(parse_hyp("HYP 1 2 2 1\n0 1 \n").is_err());
        assert!(parse_hyp("HYP 2 2 2 1\n0 1\n").is_err());
        assert!(parse_hyp("HYP 1 2 2 2\n0 1\n").is_err());
        assert!(parse_hyp("HYP 1 2 2 1\n0 1\n1 1\n").is_err());
    }
}
