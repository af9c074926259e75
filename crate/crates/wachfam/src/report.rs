use std::fmt::Write as _;

use serde::Serialize;
use wachfam_core::claims;

use crate::format::ProfileHeader;

/// One checked statement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub claim: String,
    pub statement: String,
    pub profile: ProfileHeader,
    /// What the check was run on, e.g. `k=4 chi=2 alpha=1*3^1 (mod 3^13)`.
    pub subject: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Certificate {
    pub fn new(
        claim: &str,
        profile: ProfileHeader,
        subject: impl Into<String>,
        passed: bool,
    ) -> Self {
        Certificate {
            claim: claim.to_string(),
            statement: claims::statement(claim).to_string(),
            profile,
            subject: subject.into(),
            passed,
            detail: None,
        }
    }

    /// A check that could not run; recorded as a failure with the reason.
    pub fn from_error(
        claim: &str,
        profile: ProfileHeader,
        subject: impl Into<String>,
        err: impl ToString,
    ) -> Self {
        Certificate {
            detail: Some(err.to_string()),
            ..Self::new(claim, profile, subject, false)
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub certificates: Vec<Certificate>,
}

impl Report {
    pub fn push(&mut self, c: Certificate) {
        self.certificates.push(c);
    }

    pub fn extend(&mut self, cs: impl IntoIterator<Item = Certificate>) {
        self.certificates.extend(cs);
    }

    pub fn failed(&self) -> usize {
        self.certificates.iter().filter(|c| !c.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.failed() == 0
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }

    /// Aligned columns: result, claim, subject, statement.
    pub fn to_text(&self) -> String {
        let wc = self
            .certificates
            .iter()
            .map(|c| c.claim.len())
            .max()
            .unwrap_or(0);
        let ws = self
            .certificates
            .iter()
            .map(|c| c.subject.chars().count())
            .max()
            .unwrap_or(0);
        let mut out = String::new();
        for c in &self.certificates {
            let mark = if c.passed { "pass" } else { "FAIL" };
            let pad = ws - c.subject.chars().count();
            let _ = write!(
                out,
                "{mark}  {:<wc$}  {}{}  {}",
                c.claim,
                c.subject,
                " ".repeat(pad),
                c.statement
            );
            if let Some(d) = &c.detail {
                let _ = write!(out, " [{d}]");
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{} of {} passed",
            self.certificates.len() - self.failed(),
            self.certificates.len()
        );
        out
    }
}
