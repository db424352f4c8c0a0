//! Deterministic line-oriented verification reports.
//!
//! The format is diff-friendly so that verification runs can be compared
//! across catalog revisions: a header with tool version and catalog hash,
//! one `check` line per record sorted by check id, and a trailing summary
//! whose counts equal the record tallies by construction.

use std::fmt;

pub const REPORT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Pass,
    Fail,
    ErrataCandidate,
    Undetermined,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => write!(f, "pass"),
            Status::Fail => write!(f, "fail"),
            Status::ErrataCandidate => write!(f, "errata-candidate"),
            Status::Undetermined => write!(f, "undetermined"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CheckRecord {
    pub id: String,
    pub kind: String,
    pub status: Status,
    pub details: String,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    pub catalog_hash: String,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new(catalog_hash: String) -> Self {
        Report {
            catalog_hash,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, id: impl Into<String>, kind: &str, status: Status, details: impl Into<String>) {
        self.records.push(CheckRecord {
            id: id.into(),
            kind: kind.to_string(),
            status,
            details: details.into(),
        });
    }

    pub fn merge(&mut self, other: Report) {
        self.records.extend(other.records);
    }

    pub fn count(&self, status: Status) -> usize {
        self.records.iter().filter(|r| r.status == status).count()
    }

    pub fn has_failures(&self) -> bool {
        self.count(Status::Fail) > 0
    }

    /// Renders the report; records are sorted by (id, kind) so the output
    /// is independent of completion order.
    pub fn render(&self) -> String {
        let mut records = self.records.clone();
        records.sort_by(|a, b| (&a.id, &a.kind).cmp(&(&b.id, &b.kind)));
        let mut out = String::new();
        out.push_str(&format!("# degenlab report v{REPORT_VERSION}\n"));
        out.push_str(&format!("# catalog-hash: {}\n", self.catalog_hash));
        for r in &records {
            let details = if r.details.is_empty() {
                String::new()
            } else {
                format!(" {}", r.details.replace('\n', " "))
            };
            out.push_str(&format!("check {} {} {}{}\n", r.id, r.kind, r.status, details));
        }
        out.push_str(&format!(
            "summary pass={} fail={} errata-candidate={} undetermined={} total={}\n",
            self.count(Status::Pass),
            self.count(Status::Fail),
            self.count(Status::ErrataCandidate),
            self.count(Status::Undetermined),
            self.records.len()
        ));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts_match_records() {
        let mut r = Report::new("abc".to_string());
        r.push("b", "identity", Status::Pass, "");
        r.push("a", "identity", Status::Fail, "boom");
        r.push("c", "witness", Status::ErrataCandidate, "fixed");
        let text = r.render();
        assert!(text.contains("summary pass=1 fail=1 errata-candidate=1 undetermined=0 total=3"));
        // Sorted by id.
        let a = text.find("check a ").unwrap();
        let b = text.find("check b ").unwrap();
        assert!(a < b);
    }

    #[test]
    fn rendering_is_deterministic() {
        let mut r = Report::new("h".to_string());
        r.push("x", "k", Status::Pass, "");
        assert_eq!(r.render(), r.render());
    }
}
