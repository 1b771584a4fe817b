//! Plain-text machines: one transition per line, three TAB-separated fields.
//!
//! ```text
//! x	red	y
//! y	blue	x
//! ```
//!
//! For a colored machine the fields are `state`, `color`, `next`; for a
//! transition system they are `source`, `label`, `target`. Blank lines and
//! lines starting with `#` are skipped. Output uses LF line endings.

use super::{CoalgebraError, ColoredMachine, Lts};

fn fields(text: &str) -> Result<Vec<(usize, [&str; 3])>, CoalgebraError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        let line_no = i + 1;
        if parts.len() != 3 {
            return Err(CoalgebraError::Parse {
                line: line_no,
                message: format!("expected 3 tab-separated fields, found {}", parts.len()),
            });
        }
        if let Some(empty) = parts.iter().position(|p| p.is_empty()) {
            return Err(CoalgebraError::Parse { line: line_no, message: format!("field {} is empty", empty + 1) });
        }
        out.push((line_no, [parts[0], parts[1], parts[2]]));
    }
    Ok(out)
}

pub fn parse_machine(text: &str) -> Result<ColoredMachine<String>, CoalgebraError> {
    let rows = fields(text)?;
    let mut seen = std::collections::HashMap::new();
    for (line, [state, _, _]) in &rows {
        if let Some(first) = seen.insert(*state, *line) {
            return Err(CoalgebraError::Parse {
                line: *line,
                message: format!("state {state} already has a transition on line {first}"),
            });
        }
    }
    for (line, [_, _, next]) in &rows {
        if !seen.contains_key(next) {
            return Err(CoalgebraError::Parse {
                line: *line,
                message: format!("next state {next} has no transition of its own"),
            });
        }
    }
    let triples: Vec<(&str, String, &str)> = rows.iter().map(|(_, [s, c, n])| (*s, c.to_string(), *n)).collect();
    ColoredMachine::from_triples(&triples)
}

pub fn write_machine(m: &ColoredMachine<String>) -> String {
    let mut out = String::new();
    for x in 0..m.len() {
        let (c, next) = m.mu(x);
        out.push_str(&format!("{}\t{}\t{}\n", m.name(x), c, m.name(next)));
    }
    out
}

pub fn parse_lts(text: &str) -> Result<Lts<String>, CoalgebraError> {
    let triples: Vec<(&str, String, &str)> =
        fields(text)?.into_iter().map(|(_, [p, l, q])| (p, l.to_string(), q)).collect();
    Lts::from_triples(&triples)
}

pub fn write_lts(lts: &Lts<String>) -> String {
    let mut out = String::new();
    for (p, l, q) in lts.transitions() {
        out.push_str(&format!("{}\t{}\t{}\n", lts.names()[p], l, lts.names()[q]));
    }
    out
}
