//! JSON and CSV emission.
//!
//! Floats are written in shortest round-trip form so that output is
//! byte-for-byte reproducible. Every JSON document carries a
//! `schema_version` naming one of the schemas in [`SCHEMAS`].

use serde::Serialize;

pub const VERDICT_SCHEMA: &str = "summatau.verdict.v1";
pub const PROBE_SCHEMA: &str = "summatau.probe.v1";
pub const OSCILLATION_SCHEMA: &str = "summatau.oscillation.v1";

/// `(schema_version, JSON schema text)` for every document type.
pub const SCHEMAS: [(&str, &str); 3] = [
    (VERDICT_SCHEMA, include_str!("../schemas/verdict.v1.json")),
    (PROBE_SCHEMA, include_str!("../schemas/probe.v1.json")),
    (
        OSCILLATION_SCHEMA,
        include_str!("../schemas/oscillation.v1.json"),
    ),
];

pub fn schema(version: &str) -> Option<&'static str> {
    SCHEMAS.iter().find(|(v, _)| *v == version).map(|(_, s)| *s)
}

/// Shortest round-trip representation; `inf`, `-inf` and `NaN` for
/// non-finite values.
pub fn csv_float(v: f64) -> String {
    format!("{v:?}")
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub(crate) struct CsvTable {
    out: String,
}

impl CsvTable {
    pub(crate) fn new(header: &[&str]) -> Self {
        let mut out = header.join(",");
        out.push('\n');
        Self { out }
    }

    pub(crate) fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let cells: Vec<String> = cells.into_iter().collect();
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub(crate) fn finish(self) -> String {
        self.out
    }
}
