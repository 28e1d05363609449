//! Trace bundles and failure proxies.
//!
//! A [`TraceBundle`] carries everything collected from one program version:
//! the statement table, every test with its verdict and coverage, and the
//! per-statement variable snapshots taken after the last execution of each
//! statement. A [`FailureProxy`] is the view of one failed test restricted
//! to the selected breakpoints.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Statement identifier. Serialized as a decimal integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StmtId(pub u32);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "s{}", self.0)
    }
}

/// Serialized variable value. `None` is the null marker: the variable is in
/// scope but holds no value. A variable that is out of scope is simply not
/// present in the snapshot.
pub type Value = Option<String>;

/// Variable name to value, as observed at one statement.
pub type VarMap = BTreeMap<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotScope {
    #[default]
    All,
    Listed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub id: StmtId,
    pub line: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestExecution {
    pub name: String,
    pub verdict: Verdict,
    pub coverage: BTreeSet<StmtId>,
    #[serde(default)]
    pub snapshots: BTreeMap<StmtId, VarMap>,
}

impl TestExecution {
    pub fn is_failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    pub fn covers(&self, stmt: StmtId) -> bool {
        self.coverage.contains(&stmt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceBundle {
    pub program: String,
    #[serde(default)]
    pub snapshot_scope: SnapshotScope,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub listed: Option<BTreeSet<StmtId>>,
    pub statements: Vec<Statement>,
    pub tests: Vec<TestExecution>,
}

impl TraceBundle {
    /// Parses and validates a bundle document.
    pub fn parse(raw: &[u8]) -> Result<Self> {
        let bundle: TraceBundle =
            serde_json::from_slice(raw).map_err(|e| Error::Malformed(e.to_string()))?;
        bundle.validate()?;
        Ok(bundle)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let raw = std::fs::read(path).map_err(|e| Error::Io(path.display().to_string(), e))?;
        Self::parse(&raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("bundle serialization is infallible")
    }

    /// Checks every structural invariant of the bundle.
    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::with_capacity(self.statements.len());
        for st in &self.statements {
            if st.line == 0 {
                return Err(Error::Invalid(format!("statement {} has line 0", st.id.0)));
            }
            if !ids.insert(st.id) {
                return Err(Error::Invalid(format!("duplicate statement id {}", st.id.0)));
            }
        }
        match (self.snapshot_scope, &self.listed) {
            (SnapshotScope::Listed, None) => {
                return Err(Error::Invalid(
                    "snapshot_scope is \"listed\" but no listed ids are given".into(),
                ))
            }
            (_, Some(listed)) => {
                if let Some(bad) = listed.iter().find(|id| !ids.contains(id)) {
                    return Err(Error::UnknownStatement(bad.0, "listed".into()));
                }
            }
            _ => {}
        }
        let mut names = HashSet::with_capacity(self.tests.len());
        for test in &self.tests {
            if !names.insert(test.name.as_str()) {
                return Err(Error::Invalid(format!("duplicate test name {:?}", test.name)));
            }
            if let Some(bad) = test.coverage.iter().find(|id| !ids.contains(id)) {
                return Err(Error::UnknownStatement(bad.0, test.name.clone()));
            }
            for key in test.snapshots.keys() {
                if !test.coverage.contains(key) {
                    return Err(Error::SnapshotOutsideCoverage(key.0, test.name.clone()));
                }
                if self.snapshot_scope == SnapshotScope::Listed
                    && !self.listed.as_ref().is_some_and(|l| l.contains(key))
                {
                    return Err(Error::Invalid(format!(
                        "test {:?} has a snapshot at unlisted statement {}",
                        test.name, key.0
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &TestExecution> {
        self.tests.iter().filter(|t| t.is_failed())
    }

    pub fn failure_count(&self) -> usize {
        self.failures().count()
    }

    pub fn line_of(&self, id: StmtId) -> Option<u32> {
        self.statements.iter().find(|s| s.id == id).map(|s| s.line)
    }
}

/// One failure seen through the breakpoints: for each breakpoint the failure
/// covered, the variables observed there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureProxy {
    pub test_name: String,
    pub entries: BTreeMap<StmtId, VarMap>,
}

impl FailureProxy {
    pub fn covers(&self, bp: StmtId) -> bool {
        self.entries.contains_key(&bp)
    }

    pub fn covered(&self) -> impl Iterator<Item = StmtId> + '_ {
        self.entries.keys().copied()
    }

    pub fn at(&self, bp: StmtId) -> Option<&VarMap> {
        self.entries.get(&bp)
    }
}

/// Builds the proxy of a failed test against an ordered breakpoint set.
pub fn build_proxy(test: &TestExecution, breakpoints: &[StmtId]) -> Result<FailureProxy> {
    if !test.is_failed() {
        return Err(Error::NotAFailure(test.name.clone()));
    }
    let mut entries = BTreeMap::new();
    for &bp in breakpoints {
        if !test.covers(bp) {
            continue;
        }
        let vars = test
            .snapshots
            .get(&bp)
            .ok_or_else(|| Error::MissingSnapshot(bp.0, test.name.clone()))?;
        entries.insert(bp, vars.clone());
    }
    Ok(FailureProxy {
        test_name: test.name.clone(),
        entries,
    })
}

/// Builds proxies for every failed test of the bundle, in bundle order.
pub fn build_proxies(bundle: &TraceBundle, breakpoints: &[StmtId]) -> Result<Vec<FailureProxy>> {
    bundle.failures().map(|t| build_proxy(t, breakpoints)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(pairs: &[(&str, Option<&str>)]) -> VarMap {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.map(str::to_string)))
            .collect()
    }

    #[test]
    fn minimal_bundle_has_no_failures() {
        let doc = br#"{"program":"p","snapshot_scope":"all","statements":[{"id":1,"line":1}],
            "tests":[{"name":"t","verdict":"pass","coverage":[1],"snapshots":{}}]}"#;
        let b = TraceBundle::parse(doc).unwrap();
        assert_eq!(b.failure_count(), 0);
        assert_eq!(b.tests.len(), 1);
    }

    #[test]
    fn unknown_statement_in_coverage() {
        let doc = br#"{"program":"p","snapshot_scope":"all","statements":[{"id":1,"line":1}],
            "tests":[{"name":"t","verdict":"fail","coverage":[1,99],"snapshots":{}}]}"#;
        let err = TraceBundle::parse(doc).unwrap_err();
        assert!(matches!(err, Error::UnknownStatement(99, _)));
        assert!(err.to_string().contains("unknown statement"));
    }

    #[test]
    fn bad_verdict_is_rejected() {
        let doc = br#"{"program":"p","statements":[{"id":1,"line":1}],
            "tests":[{"name":"t","verdict":"flaky","coverage":[1]}]}"#;
        assert!(matches!(TraceBundle::parse(doc), Err(Error::Malformed(_))));
        let doc = br#"{"program":"p","statements":[{"id":1,"line":1}],
            "tests":[{"name":"t","coverage":[1]}]}"#;
        assert!(matches!(TraceBundle::parse(doc), Err(Error::Malformed(_))));
    }

    #[test]
    fn snapshot_outside_coverage_is_rejected() {
        let doc = br#"{"program":"p","statements":[{"id":1,"line":1},{"id":2,"line":2}],
            "tests":[{"name":"t","verdict":"fail","coverage":[1],"snapshots":{"2":{"x":"1"}}}]}"#;
        assert!(matches!(
            TraceBundle::parse(doc),
            Err(Error::SnapshotOutsideCoverage(2, _))
        ));
    }

    #[test]
    fn listed_scope_restricts_snapshot_keys() {
        let doc = br#"{"program":"p","snapshot_scope":"listed","listed":[2],
            "statements":[{"id":1,"line":1},{"id":2,"line":2}],
            "tests":[{"name":"t","verdict":"fail","coverage":[1,2],"snapshots":{"1":{"x":"1"}}}]}"#;
        assert!(matches!(TraceBundle::parse(doc), Err(Error::Invalid(_))));
    }

    #[test]
    fn null_is_distinct_from_the_string_null() {
        let doc = br#"{"program":"p","statements":[{"id":1,"line":1}],
            "tests":[{"name":"t","verdict":"fail","coverage":[1],
            "snapshots":{"1":{"a":null,"b":"null"}}}]}"#;
        let b = TraceBundle::parse(doc).unwrap();
        let snap = &b.tests[0].snapshots[&StmtId(1)];
        assert_eq!(snap["a"], None);
        assert_eq!(snap["b"].as_deref(), Some("null"));
    }

    fn failing(coverage: &[u32], snaps: &[(u32, VarMap)]) -> TestExecution {
        TestExecution {
            name: "f".into(),
            verdict: Verdict::Fail,
            coverage: coverage.iter().map(|&i| StmtId(i)).collect(),
            snapshots: snaps.iter().map(|(i, v)| (StmtId(*i), v.clone())).collect(),
        }
    }

    #[test]
    fn proxy_skips_uncovered_breakpoints() {
        let v = vars(&[("x", Some("1"))]);
        let t = failing(&[1, 15], &[(1, v.clone()), (15, v.clone())]);
        let p = build_proxy(&t, &[StmtId(15), StmtId(16)]).unwrap();
        assert_eq!(p.covered().collect::<Vec<_>>(), vec![StmtId(15)]);
        assert!(!p.covers(StmtId(16)));

        let t = failing(&[1], &[(1, v)]);
        let p = build_proxy(&t, &[StmtId(15), StmtId(16)]).unwrap();
        assert!(p.entries.is_empty());
    }

    #[test]
    fn proxy_requires_snapshot_at_covered_breakpoint() {
        let t = failing(&[15], &[]);
        assert!(matches!(
            build_proxy(&t, &[StmtId(15)]),
            Err(Error::MissingSnapshot(15, _))
        ));
    }

    #[test]
    fn proxy_of_passing_test_is_an_error() {
        let mut t = failing(&[1], &[]);
        t.verdict = Verdict::Pass;
        assert!(matches!(build_proxy(&t, &[]), Err(Error::NotAFailure(_))));
    }
}
