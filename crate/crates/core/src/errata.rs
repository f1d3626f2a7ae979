//! The persisted resolution table for typographically ambiguous labels.
//!
//! The table is produced by [`crate::oracle::resolve_errata`] and shipped in
//! `data/errata.json`; the builder and registry read their resolved readings
//! from here.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ERRATA_VERSION: u32 = 1;

static EMBEDDED: &str = include_str!("../data/errata.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrataItem {
    pub id: String,
    pub question: String,
    pub literal: String,
    /// Number of candidate readings examined.
    pub candidates: usize,
    pub survivors: Vec<String>,
    pub resolved: String,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ErrataTable {
    pub version: u32,
    pub seeds: usize,
    pub items: Vec<ErrataItem>,
}

impl ErrataTable {
    pub fn parse(json: &str) -> Result<Self> {
        let t: ErrataTable =
            serde_json::from_str(json).map_err(|e| Error::Schema(e.to_string()))?;
        if t.version != ERRATA_VERSION {
            return Err(Error::Version {
                found: t.version,
                expected: ERRATA_VERSION,
            });
        }
        Ok(t)
    }

    pub fn item(&self, id: &str) -> Option<&ErrataItem> {
        self.items.iter().find(|i| i.id == id)
    }

    fn resolved(&self, id: &str) -> &str {
        &self.item(id).expect("errata item present").resolved
    }

    /// Side lines (as vertex index pairs) used for Y1..Y4.
    pub fn y_lines(&self) -> [(usize, usize); 4] {
        parse_y(self.resolved("Y")).expect("valid Y reading")
    }

    /// True when the V-based point keeps the label E1.
    pub fn e1_from_v(&self) -> bool {
        self.resolved("E1").starts_with("E1=V")
    }

    /// Theorem 5.2 groups five and six as R indices.
    pub fn r_groups_5_6(&self) -> [Vec<usize>; 2] {
        let (a, b) = self
            .resolved("thm-5.2/groups-5-6")
            .split_once('|')
            .expect("two groups");
        [parse_r(a), parse_r(b)]
    }

    pub fn bullet7_wraps(&self) -> bool {
        self.resolved("thm-4.1/bullet-7") == "wrap-mod-8"
    }

    pub fn pi_span(&self) -> usize {
        self.resolved("pi-span").parse().expect("integer span")
    }
}

fn parse_r(s: &str) -> Vec<usize> {
    s.split(',')
        .map(|r| r.trim_start_matches('R').parse().expect("R index"))
        .collect()
}

/// `"A2A4,A1A3,..."` to index pairs.
pub fn parse_y(s: &str) -> Option<[(usize, usize); 4]> {
    let v: Vec<(usize, usize)> = s
        .split(',')
        .map(|l| {
            let b = l.as_bytes();
            (b.len() == 4 && b[0] == b'A' && b[2] == b'A')
                .then(|| ((b[1] - b'0') as usize, (b[3] - b'0') as usize))
        })
        .collect::<Option<_>>()?;
    v.try_into().ok()
}

pub fn format_y(lines: &[(usize, usize); 4]) -> String {
    lines
        .iter()
        .map(|(a, b)| format!("A{a}A{b}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// The shipped table.
pub fn embedded() -> &'static ErrataTable {
    static TABLE: OnceLock<ErrataTable> = OnceLock::new();
    TABLE.get_or_init(|| ErrataTable::parse(EMBEDDED).expect("embedded errata table is valid"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_table_parses() {
        let t = embedded();
        assert_eq!(t.y_lines(), [(2, 4), (1, 3), (2, 4), (1, 3)]);
        assert!(t.e1_from_v());
        assert_eq!(t.r_groups_5_6()[0], vec![1, 3, 5, 7, 9, 11, 13, 15]);
        assert_eq!(format_y(&t.y_lines()), t.item("Y").unwrap().resolved);
    }

    #[test]
    fn version_is_checked() {
        let bad = EMBEDDED.replacen("\"version\": 1", "\"version\": 9", 1);
        assert_eq!(
            ErrataTable::parse(&bad),
            Err(Error::Version {
                found: 9,
                expected: 1
            })
        );
    }
}
