//! Names and incidence expressions.
//!
//! Grammar used both by configuration definitions and by claim subjects:
//!
//! ```text
//! name   := [A-Z] [0-9]+ "'"?            M1, J7, Y1'
//! line   := name name                    J1J7  (join)
//!         | "t[" conic "](" name ")"     t[C1](X3)  (polar, tangent on the conic)
//! point  := name | line "^" line         J2J4^J6J8
//! ```

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineExpr {
    Join(String, String),
    Polar { conic: String, point: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PointExpr {
    Name(String),
    Meet(LineExpr, LineExpr),
}

impl fmt::Display for LineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LineExpr::Join(a, b) => write!(f, "{a}{b}"),
            LineExpr::Polar { conic, point } => write!(f, "t[{conic}]({point})"),
        }
    }
}

impl fmt::Display for PointExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointExpr::Name(n) => write!(f, "{n}"),
            PointExpr::Meet(l, m) => write!(f, "{l}^{m}"),
        }
    }
}

fn bad(s: &str) -> Error {
    Error::UnknownSubject(s.to_string())
}

/// Splits a leading point name off `s`.
fn take_name(s: &str) -> Option<(&str, &str)> {
    let bytes = s.as_bytes();
    if bytes.is_empty() || !bytes[0].is_ascii_uppercase() {
        return None;
    }
    let mut i = 1;
    while i < bytes.len() && bytes[i].is_ascii_digit() {
        i += 1;
    }
    if i == 1 {
        return None;
    }
    if i < bytes.len() && bytes[i] == b'\'' {
        i += 1;
    }
    Some(s.split_at(i))
}

pub fn is_name(s: &str) -> bool {
    matches!(take_name(s), Some((_, "")))
}

/// Family of a point name: its letter plus the prime marker (`Y1'` -> `Y'`).
pub fn family(name: &str) -> String {
    let mut f: String = name.chars().take(1).collect();
    if name.ends_with('\'') {
        f.push('\'');
    }
    f
}

/// Conic names: a capital letter optionally followed by digits (`C`, `C1`, `D1`, `F`).
fn is_conic_name(s: &str) -> bool {
    let mut c = s.chars();
    c.next().is_some_and(|x| x.is_ascii_uppercase()) && c.all(|x| x.is_ascii_digit())
}

pub fn parse_line(s: &str) -> Result<LineExpr> {
    if let Some(rest) = s.strip_prefix("t[") {
        let (conic, rest) = rest.split_once("](").ok_or_else(|| bad(s))?;
        let point = rest.strip_suffix(')').ok_or_else(|| bad(s))?;
        if !is_conic_name(conic) || !is_name(point) {
            return Err(bad(s));
        }
        return Ok(LineExpr::Polar {
            conic: conic.into(),
            point: point.into(),
        });
    }
    let (a, rest) = take_name(s).ok_or_else(|| bad(s))?;
    let (b, rest) = take_name(rest).ok_or_else(|| bad(s))?;
    if !rest.is_empty() || a == b {
        return Err(bad(s));
    }
    Ok(LineExpr::Join(a.into(), b.into()))
}

pub fn parse_point(s: &str) -> Result<PointExpr> {
    match s.split_once('^') {
        Some((l, m)) => Ok(PointExpr::Meet(parse_line(l)?, parse_line(m)?)),
        None if is_name(s) => Ok(PointExpr::Name(s.into())),
        None => Err(bad(s)),
    }
}

impl LineExpr {
    pub fn point_names(&self) -> Vec<&str> {
        match self {
            LineExpr::Join(a, b) => vec![a, b],
            LineExpr::Polar { point, .. } => vec![point],
        }
    }

    pub fn conic_names(&self) -> Vec<&str> {
        match self {
            LineExpr::Join(..) => vec![],
            LineExpr::Polar { conic, .. } => vec![conic],
        }
    }
}

impl PointExpr {
    pub fn point_names(&self) -> Vec<&str> {
        match self {
            PointExpr::Name(n) => vec![n],
            PointExpr::Meet(l, m) => {
                let mut v = l.point_names();
                v.extend(m.point_names());
                v
            }
        }
    }

    pub fn conic_names(&self) -> Vec<&str> {
        match self {
            PointExpr::Name(_) => vec![],
            PointExpr::Meet(l, m) => {
                let mut v = l.conic_names();
                v.extend(m.conic_names());
                v
            }
        }
    }
}

/// `name` with a 1-based cyclic index: `cyc("J", 0, 8)` is `J8`.
pub fn cyc(letter: &str, i: i64, n: i64) -> String {
    format!("{letter}{}", (i - 1).rem_euclid(n) + 1)
}
