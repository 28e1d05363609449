mod common;

use failidx::model::{self, StmtId, Verdict};
use failidx::sbfl::{self, DStar, Spectrum};
use failidx::{index_failures, RunConfig, TraceBundle};

use common::*;

#[test]
fn shape() {
    let b = listing1();
    assert_eq!(b.statements.len(), 17);
    assert_eq!(b.tests.len(), 12);
    assert_eq!(b.failure_count(), 6);
    let failed: Vec<&str> = b.failures().map(|t| t.name.as_str()).collect();
    assert_eq!(failed, ["t1", "t2", "t3", "t4", "t5", "t6"]);
    assert!(b.tests[6..].iter().all(|t| t.verdict == Verdict::Pass));
}

#[test]
fn proxy_values() {
    let b = listing1();
    let bps = [StmtId(15), StmtId(16)];
    let f1 = model::build_proxy(&b.tests[0], &bps).unwrap();
    let at15 = f1.at(StmtId(15)).unwrap();
    let get = |k: &str| at15[k].as_deref();
    assert_eq!(get("s"), Some("speak ?1?"));
    assert_eq!(get("sign"), Some("1"));
    assert_eq!(get("sum_1"), Some("1"));
    assert_eq!(get("sum_2"), Some("0"));
    assert_eq!(get("msg"), Some("wordNone recognized"));
    assert_eq!(f1.at(StmtId(16)), Some(at15));
}

#[test]
fn spectra() {
    let counts = sbfl::spectrum_counts(&listing1());
    assert_eq!(counts.total_failed, 6);
    assert_eq!(counts.total_passed, 6);
    assert_eq!(counts.get(StmtId(15)), Some(Spectrum { ef: 6, ep: 3, nf: 0, np: 3 }));
    let s3 = counts.get(StmtId(3)).unwrap();
    assert_eq!(s3.ef, 0);
    assert!(s3.ep > 0);
}

#[test]
fn ranking_and_selection() {
    let b = listing1();
    let r = sbfl::rank_bundle(&b, &DStar::default());
    assert_eq!(r.len(), 17);
    assert_eq!(r.ids()[..5], [StmtId(15), StmtId(16), StmtId(17), StmtId(4), StmtId(5)]);
    assert_eq!(sbfl::select_breakpoints(&r, 5.0), [StmtId(15)]);
    assert_eq!(sbfl::select_breakpoints(&r, 10.0), [StmtId(15), StmtId(16)]);
    assert_eq!(sbfl::select_breakpoints(&r, 100.0), r.ids());
}

#[test]
fn round_trip() {
    let b = listing1();
    let again = TraceBundle::parse(b.to_json().as_bytes()).unwrap();
    assert_eq!(b, again);
}

#[test]
fn index_matches_oracle() {
    let out = index_failures(&listing1(), &RunConfig::default()).unwrap();
    assert_eq!(out.breakpoints, [StmtId(15), StmtId(16)]);
    assert_eq!(out.clustering.k, 2);
    let mut clusters = out.cluster_names();
    clusters.sort();
    assert_eq!(clusters, [names(&["t1", "t2", "t3", "t4"]), names(&["t5", "t6"])]);
    assert!(out.matrix.warnings.is_empty());
}

#[test]
fn every_corpus_bundle_parses() {
    let mut n = 0;
    for entry in std::fs::read_dir(corpus_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "trace") {
            let b = TraceBundle::from_path(&path).unwrap();
            assert!(b.failure_count() >= 2, "{}", path.display());
            n += 1;
        }
    }
    assert!(n >= 10);
}
