//! Verdicts and witnesses shared by every checker.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    SampledPass,
    Fail,
    NotApplicable,
    TrivialCase,
    PassExact,
    PassSampled,
    UndecidedAtPrecision,
}

impl Verdict {
    pub fn is_fail(self) -> bool {
        self == Verdict::Fail
    }

    /// Counts as success for exit codes and acceptance.
    pub fn is_ok(self) -> bool {
        matches!(
            self,
            Verdict::Pass
                | Verdict::SampledPass
                | Verdict::TrivialCase
                | Verdict::PassExact
                | Verdict::PassSampled
        )
    }
}

/// A counterexample that can be replayed: the level, the element in
/// canonical text and the operation that went wrong.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub level: u32,
    pub element: String,
    pub operation: String,
}

impl Witness {
    pub fn new(level: u32, element: impl Into<String>, operation: impl Into<String>) -> Self {
        Witness {
            level,
            element: element.into(),
            operation: operation.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub id: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Check {
    pub fn new(id: impl Into<String>, verdict: Verdict) -> Self {
        Check {
            id: id.into(),
            verdict,
            samples: None,
            witness: None,
            notes: Vec::new(),
        }
    }

    pub fn fail(id: impl Into<String>, witness: Witness) -> Self {
        Check {
            witness: Some(witness),
            ..Check::new(id, Verdict::Fail)
        }
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.samples = Some(n);
        self
    }

    pub fn note(mut self, s: impl Into<String>) -> Self {
        self.notes.push(s.into());
        self
    }
}

/// Render checks as a Markdown checklist.
pub fn checks_markdown(title: &str, checks: &[Check]) -> String {
    let mut out = format!("### {title}\n\n| check | verdict | witness |\n|---|---|---|\n");
    for c in checks {
        let w = c
            .witness
            .as_ref()
            .map(|w| format!("level {}: `{}` ({})", w.level, w.element, w.operation))
            .unwrap_or_default();
        let v = serde_json::to_value(c.verdict).unwrap();
        out.push_str(&format!(
            "| {} | {} | {} |\n",
            c.id,
            v.as_str().unwrap_or(""),
            w
        ));
    }
    out
}
