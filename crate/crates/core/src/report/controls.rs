//! Plain-text controls files.
//!
//! ```text
//! # anything after '#' is ignored
//! T 20
//! K 200
//! u_max 20
//! n_max 20
//! 0.5 0 1.25      <- K lines of `u n1 n2`
//! ...
//! ```
//!
//! The four header keys may come in any order but must precede the data.
//! Values after the last line hold until `T`.

use crate::error::{Error, Result};
use crate::objective::{ControlSchedule, ScheduleTemplate};

fn field_err(line: usize, field: &str, reason: impl std::fmt::Display) -> Error {
    Error::param(format!("{field} (line {line})"), reason.to_string())
}

fn number(tok: &str, line: usize, field: &str) -> Result<f64> {
    let v: f64 = tok.parse().map_err(|_| field_err(line, field, format!("`{tok}` is not a number")))?;
    if !v.is_finite() {
        return Err(field_err(line, field, "must be finite"));
    }
    Ok(v)
}

pub fn parse_controls(text: &str) -> Result<ControlSchedule<f64>> {
    let mut horizon = None;
    let mut segments = None;
    let mut u_max = None;
    let mut n_max = None;
    let (mut u, mut n1, mut n2) = (Vec::new(), Vec::new(), Vec::new());

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let header = match toks[0] {
            "T" => Some(&mut horizon),
            "u_max" => Some(&mut u_max),
            "n_max" => Some(&mut n_max),
            _ => None,
        };
        if let Some(slot) = header {
            if !u.is_empty() {
                return Err(field_err(line, toks[0], "header after control values"));
            }
            if toks.len() != 2 {
                return Err(field_err(line, toks[0], "expected one value"));
            }
            *slot = Some(number(toks[1], line, toks[0])?);
            continue;
        }
        if toks[0] == "K" {
            if !u.is_empty() {
                return Err(field_err(line, "K", "header after control values"));
            }
            if toks.len() != 2 {
                return Err(field_err(line, "K", "expected one value"));
            }
            segments = Some(toks[1].parse::<usize>().map_err(|_| field_err(line, "K", format!("`{}` is not a count", toks[1])))?);
            continue;
        }
        if toks.len() != 3 {
            return Err(field_err(line, "controls", format!("expected `u n1 n2`, found {} values", toks.len())));
        }
        u.push(number(toks[0], line, "u")?);
        n1.push(number(toks[1], line, "n1")?);
        n2.push(number(toks[2], line, "n2")?);
    }

    let missing = |f: &str| Error::param(f, "missing header");
    let template = ScheduleTemplate {
        horizon: horizon.ok_or_else(|| missing("T"))?,
        segments: segments.ok_or_else(|| missing("K"))?,
        u_max: u_max.ok_or_else(|| missing("u_max"))?,
        n_max: n_max.ok_or_else(|| missing("n_max"))?,
    };
    template.validate()?;
    if u.len() != template.segments {
        return Err(Error::param("K", format!("header says {} segments but {} control lines follow", template.segments, u.len())));
    }
    ControlSchedule::new(template, u, n1, n2)
}

/// Serializes with 17 significant digits so parsing restores every value exactly.
pub fn format_controls(s: &ControlSchedule<f64>) -> String {
    let t = &s.template;
    let mut out = String::from("# u n1 n2 per segment; the last line holds until T\n");
    out.push_str(&format!("T {:.16e}\nK {}\nu_max {:.16e}\nn_max {:.16e}\n", t.horizon, t.segments, t.u_max, t.n_max));
    for i in 0..s.segments() {
        let (u, n1, n2) = s.segment(i);
        out.push_str(&format!("{u:.16e} {n1:.16e} {n2:.16e}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_commented_file() {
        let text = "# demo\nK 2\nT 1.5\nu_max 20\nn_max 10  # bound\n\n1 0 2\n-3.5 4 0\n";
        let s = parse_controls(text).unwrap();
        assert_eq!(s.template, ScheduleTemplate { horizon: 1.5, segments: 2, u_max: 20.0, n_max: 10.0 });
        assert_eq!(s.segment(1), (-3.5, 4.0, 0.0));
    }

    #[test]
    fn errors_name_the_field() {
        let cases = [
            ("K 1\nT 1\nu_max 20\n1 0 0\n", "n_max"),
            ("K 1\nT 1\nu_max 20\nn_max 20\n1 zero 0\n", "n1"),
            ("K 2\nT 1\nu_max 20\nn_max 20\n1 0 0\n", "K"),
            ("K 1\nT 1\nu_max 20\nn_max 20\n1 0\n", "controls"),
            ("K 1\nT -1\nu_max 20\nn_max 20\n1 0 0\n", "T"),
            ("K 1\nT 1\nu_max 20\nn_max 20\n25 0 0\n", "u"),
            ("K x\n", "K"),
        ];
        for (text, field) in cases {
            let msg = parse_controls(text).unwrap_err().to_string();
            assert!(msg.contains(field), "{text:?}: {msg}");
        }
    }

    proptest! {
        #[test]
        fn format_parse_round_trip(vals in proptest::collection::vec((-20.0f64..=20.0, 0.0f64..=20.0, 0.0f64..=20.0), 1..12)) {
            let tpl = ScheduleTemplate { horizon: 20.0, segments: vals.len(), u_max: 20.0, n_max: 20.0 };
            let s = ControlSchedule::new(
                tpl,
                vals.iter().map(|v| v.0).collect(),
                vals.iter().map(|v| v.1).collect(),
                vals.iter().map(|v| v.2).collect(),
            ).unwrap();
            prop_assert_eq!(parse_controls(&format_controls(&s)).unwrap(), s);
        }
    }
}
