//! Plain-text potential configuration.
//!
//! Grammar (one statement per line, `#` starts a comment):
//!
//! ```text
//! file     := { line }
//! line     := blank | comment | header | pair
//! header   := "[potential.delta]" | "[potential.hardcore]" | "[potential.steps]"
//! pair     := key "=" value
//! value    := number | list
//! list     := ["["] number { ("," | whitespace) number } ["]"]
//! ```
//!
//! Every header opens a new component; sections may repeat. Required keys:
//!
//! | section               | keys                                 |
//! |-----------------------|--------------------------------------|
//! | `[potential.delta]`   | `x0`, `strength`                     |
//! | `[potential.hardcore]`| `x1`, `x2`                           |
//! | `[potential.steps]`   | `breakpoints` (list), `values` (list)|
//!
//! An empty file describes the free interaction `v = 0`.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::potential::{Potential, PotentialComponent};

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Delta,
    HardCore,
    Steps,
}

impl Section {
    fn keys(self) -> &'static [&'static str] {
        match self {
            Section::Delta => &["x0", "strength"],
            Section::HardCore => &["x1", "x2"],
            Section::Steps => &["breakpoints", "values"],
        }
    }
}

struct OpenSection {
    kind: Section,
    line: usize,
    entries: BTreeMap<String, (usize, Vec<f64>)>,
}

fn config_err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn parse_numbers(raw: &str, line: usize) -> Result<Vec<f64>> {
    let trimmed = raw.trim();
    let inner = trimmed
        .strip_prefix('[')
        .map(|s| {
            s.strip_suffix(']')
                .ok_or_else(|| config_err(line, "unterminated list"))
        })
        .transpose()?
        .unwrap_or(trimmed);
    let items: Vec<&str> = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .collect();
    if items.is_empty() {
        return Err(config_err(line, "missing value"));
    }
    items
        .iter()
        .map(|s| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| config_err(line, format!("not a finite number: '{s}'")))
        })
        .collect()
}

fn scalar(sec: &OpenSection, key: &str) -> Result<(usize, f64)> {
    let (line, vals) = sec
        .entries
        .get(key)
        .ok_or_else(|| config_err(sec.line, format!("missing key '{key}'")))?;
    if vals.len() != 1 {
        return Err(config_err(
            *line,
            format!("'{key}' expects a single number"),
        ));
    }
    Ok((*line, vals[0]))
}

fn finish(sec: OpenSection) -> Result<PotentialComponent> {
    let component = match sec.kind {
        Section::Delta => {
            let (lx, x0) = scalar(&sec, "x0")?;
            let (ls, strength) = scalar(&sec, "strength")?;
            if x0 < 0.0 {
                return Err(config_err(
                    lx,
                    format!("delta position must be >= 0, got {x0}"),
                ));
            }
            if strength <= 0.0 {
                return Err(config_err(
                    ls,
                    format!("delta strength must be > 0, got {strength}"),
                ));
            }
            PotentialComponent::DeltaSpike {
                position: x0,
                strength,
            }
        }
        Section::HardCore => {
            let (l1, inner) = scalar(&sec, "x1")?;
            let (l2, outer) = scalar(&sec, "x2")?;
            if inner < 0.0 {
                return Err(config_err(l1, format!("x1 must be >= 0, got {inner}")));
            }
            if outer < inner {
                return Err(config_err(
                    l2,
                    format!("x2 must be >= x1, got {outer} < {inner}"),
                ));
            }
            PotentialComponent::HardCoreBand { inner, outer }
        }
        Section::Steps => {
            let (lb, breakpoints) = sec
                .entries
                .get("breakpoints")
                .cloned()
                .ok_or_else(|| config_err(sec.line, "missing key 'breakpoints'"))?;
            let (lv, values) = sec
                .entries
                .get("values")
                .cloned()
                .ok_or_else(|| config_err(sec.line, "missing key 'values'"))?;
            if let Some(v) = values.iter().find(|v| **v < 0.0) {
                return Err(config_err(lv, format!("step values must be >= 0, got {v}")));
            }
            let c = PotentialComponent::PiecewiseConstant {
                breakpoints,
                values,
            };
            // Remaining structural checks are shared with programmatic construction.
            Potential::new(vec![c.clone()]).map_err(|e| config_err(lb, e.to_string()))?;
            c
        }
    };
    Ok(component)
}

/// Parses the configuration text into a validated potential.
pub fn parse_potential(text: &str) -> Result<Potential> {
    let mut components = Vec::new();
    let mut current: Option<OpenSection> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let kind = match name.trim() {
                "potential.delta" => Section::Delta,
                "potential.hardcore" => Section::HardCore,
                "potential.steps" => Section::Steps,
                other => return Err(config_err(line, format!("unknown section '[{other}]'"))),
            };
            if let Some(sec) = current.take() {
                components.push(finish(sec)?);
            }
            current = Some(OpenSection {
                kind,
                line,
                entries: BTreeMap::new(),
            });
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| config_err(line, format!("expected 'key = value', got '{content}'")))?;
        let key = key.trim();
        let sec = current
            .as_mut()
            .ok_or_else(|| config_err(line, "key outside of any section"))?;
        if !sec.kind.keys().contains(&key) {
            return Err(config_err(line, format!("unknown key '{key}'")));
        }
        if sec.entries.contains_key(key) {
            return Err(config_err(line, format!("duplicate key '{key}'")));
        }
        let numbers = parse_numbers(value, line)?;
        if key == "strength" && numbers.iter().any(|v| *v < 0.0) {
            return Err(config_err(line, "negative strength"));
        }
        sec.entries.insert(key.to_string(), (line, numbers));
    }
    if let Some(sec) = current.take() {
        components.push(finish(sec)?);
    }
    Potential::new(components)
}

/// Reads and parses a configuration file.
pub fn load_potential(path: &Path) -> Result<Potential> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_potential(&text)
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Serializes a potential in the configuration grammar. Numbers are written
/// in shortest round-trip form, so parsing the output reproduces the input.
pub fn to_config_text(p: &Potential) -> String {
    let mut out = String::new();
    for c in p.components() {
        if !out.is_empty() {
            out.push('\n');
        }
        match c {
            PotentialComponent::DeltaSpike { position, strength } => {
                out.push_str(&format!(
                    "[potential.delta]\nx0 = {position:?}\nstrength = {strength:?}\n"
                ));
            }
            PotentialComponent::HardCoreBand { inner, outer } => {
                out.push_str(&format!(
                    "[potential.hardcore]\nx1 = {inner:?}\nx2 = {outer:?}\n"
                ));
            }
            PotentialComponent::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                out.push_str(&format!(
                    "[potential.steps]\nbreakpoints = [{}]\nvalues = [{}]\n",
                    list(breakpoints),
                    list(values)
                ));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_sections() {
        let text = "\
# mixed interaction
[potential.delta]
x0 = 0
strength = 2.5

[potential.hardcore]
x1 = 0.1   # inner
x2 = 0.2

[potential.steps]
breakpoints = [0, 0.3, 0.5]
values = 4, 1
";
        let p = parse_potential(text).unwrap();
        assert_eq!(p.components().len(), 3);
        assert_eq!(p.range(), 0.5);
        assert_eq!(p.contact_strength(), 2.5);
    }

    #[test]
    fn empty_file_is_free() {
        assert!(parse_potential("# nothing\n\n").unwrap().is_free());
    }

    #[test]
    fn negative_strength_reports_line() {
        let err = parse_potential("[potential.delta]\nx0 = 0\nstrength = -1\n").unwrap_err();
        assert_eq!(
            err,
            Error::Config {
                line: 3,
                message: "negative strength".into()
            }
        );
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(matches!(
            parse_potential("[potential.magnet]\n"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            parse_potential("x0 = 1\n"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            parse_potential("[potential.delta]\nx0 = 0\n"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(
            parse_potential("[potential.delta]\nx0 = 0\nstrength = abc\n"),
            Err(Error::Config { line: 3, .. })
        ));
        assert!(matches!(
            parse_potential("[potential.steps]\nbreakpoints = 0, 1\nvalues = -2\n"),
            Err(Error::Config { line: 3, .. })
        ));
        assert!(matches!(
            parse_potential("[potential.hardcore]\nx1 = 0.3\nx2 = 0.1\n"),
            Err(Error::Config { line: 3, .. })
        ));
    }

    #[test]
    fn round_trip() {
        let text = "[potential.steps]\nbreakpoints = [0.0, 0.1, 0.25]\nvalues = [3.0, 0.5]\n\n\
                    [potential.delta]\nx0 = 0.4\nstrength = 1.25\n";
        let p = parse_potential(text).unwrap();
        let again = parse_potential(&to_config_text(&p)).unwrap();
        assert_eq!(p, again);
        assert_eq!(to_config_text(&p), to_config_text(&again));
    }
}
