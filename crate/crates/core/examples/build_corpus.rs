//! Regenerates the checked-in fixture bundles under `fixtures/`.
//!
//! The toy programs below are hand-instrumented: every executed line records
//! its statement id into the coverage set and snapshots the locals in scope
//! right after the line ran, overwriting any earlier snapshot of the same
//! line. Verdicts come from comparing each faulty version's output with the
//! fault-free version's.
//!
//! Run with `cargo run -p failidx --example build_corpus -- <fixtures dir>`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use failidx::model::{
    SnapshotScope, Statement, StmtId, TestExecution, TraceBundle, VarMap, Verdict,
};

#[derive(Default)]
struct Trace {
    coverage: BTreeSet<StmtId>,
    snapshots: BTreeMap<StmtId, VarMap>,
}

impl Trace {
    fn hit(&mut self, line: u32, vars: VarMap) {
        self.coverage.insert(StmtId(line));
        self.snapshots.insert(StmtId(line), vars);
    }
}

macro_rules! snap {
    ($tr:expr, $line:expr $(; $($var:ident),* )?) => {{
        #[allow(unused_mut)]
        let mut m = VarMap::new();
        $($( m.insert(stringify!($var).to_string(), Some($var.to_string())); )*)?
        $tr.hit($line, m);
    }};
}

type Program = fn(&str, &[bool], &mut Trace) -> String;

struct Version {
    name: &'static str,
    program: &'static str,
    lines: u32,
    run: Program,
    faults: Vec<bool>,
    fault_names: &'static [&'static str],
    inputs: Vec<(&'static str, &'static str)>,
}

/// Port of the word-replacement example: `wordNone` -> `*1*`,
/// `wordNtwo` -> `*2*`, plus a log message.
fn process(input: &str, faults: &[bool], tr: &mut Trace) -> String {
    let mut s = input.to_string();
    snap!(tr, 1; s);
    let guard = s.contains("*1*") || s.contains("*2*");
    snap!(tr, 2; s);
    if guard {
        snap!(tr, 3; s);
        return String::new();
    }
    let mut sign = 0;
    snap!(tr, 4; s, sign);
    let mut sum_1 = 0;
    snap!(tr, 5; s, sign, sum_1);
    sum_1 = if s.contains("wordNone") { 1 } else { 0 };
    snap!(tr, 6; s, sign, sum_1);
    sign += sum_1;
    snap!(tr, 7; s, sign, sum_1);
    s = s.replace("wordNone", if faults[0] { "?1?" } else { "*1*" });
    snap!(tr, 8; s, sign, sum_1);
    let mut sum_2 = 0;
    snap!(tr, 9; s, sign, sum_1, sum_2);
    sum_2 = if s.contains("wordNtwo") { 2 } else { 0 };
    snap!(tr, 10; s, sign, sum_1, sum_2);
    sign += sum_2;
    snap!(tr, 11; s, sign, sum_1, sum_2);
    s = s.replace("wordNtwo", "*2*");
    snap!(tr, 12; s, sign, sum_1, sum_2);
    let both = sign == 3;
    snap!(tr, 13; s, sign, sum_1, sum_2);
    if both {
        snap!(tr, 14; s, sign, sum_1, sum_2);
        return "both pattern recognized".into();
    }
    let mut msg = if sign == 1 { "wordNone recognized" } else { "pass" };
    snap!(tr, 15; s, sign, sum_1, sum_2, msg);
    let two = if faults[1] { sign > 2 } else { sign == 2 };
    msg = if two { "wordNtwo recognized" } else { msg };
    snap!(tr, 16; s, sign, sum_1, sum_2, msg);
    let out = format!("{s}//{msg}");
    snap!(tr, 17; s, sign, sum_1, sum_2, msg);
    out
}

/// Tags a token by its character classes and renders `kind:token/width`.
/// Faults: a lone digit is not recognized as numeric; spaces become `-`
/// instead of `_`; the width counts uppercase letters twice.
fn tag(input: &str, faults: &[bool], tr: &mut Trace) -> String {
    let s = input.to_string();
    snap!(tr, 1; s);
    let comment = s.starts_with('#');
    snap!(tr, 2; s);
    if comment {
        snap!(tr, 3; s);
        return s;
    }
    let n_digit = s.chars().filter(char::is_ascii_digit).count();
    snap!(tr, 4; s, n_digit);
    let n_upper = s.chars().filter(char::is_ascii_uppercase).count();
    snap!(tr, 5; s, n_digit, n_upper);
    let n_space = s.chars().filter(|c| *c == ' ').count();
    snap!(tr, 6; s, n_digit, n_upper, n_space);
    let min_digits = if faults[0] { 1 } else { 0 };
    let kind = if n_digit > min_digits && n_upper == 0 {
        "num"
    } else if n_upper > 0 {
        "caps"
    } else {
        "text"
    };
    snap!(tr, 7; s, n_digit, n_upper, n_space, kind);
    let mut t = s.replace(' ', if faults[1] { "-" } else { "_" });
    snap!(tr, 8; s, n_digit, n_upper, n_space, kind, t);
    t = t.to_lowercase();
    snap!(tr, 9; s, n_digit, n_upper, n_space, kind, t);
    let width = t.len() + if faults[2] { n_upper } else { 0 };
    snap!(tr, 10; s, n_digit, n_upper, n_space, kind, t, width);
    let overflow = width > 30;
    snap!(tr, 11; s, n_digit, n_upper, n_space, kind, t, width);
    if overflow {
        snap!(tr, 12; s, n_digit, n_upper, n_space, kind, t, width);
        return "overflow".into();
    }
    let label = format!("{kind}:{t}");
    snap!(tr, 13; s, n_digit, n_upper, n_space, kind, t, width, label);
    let out = format!("{label}/{width}");
    snap!(tr, 14; s, n_digit, n_upper, n_space, kind, t, width, label);
    out
}

/// Shipping quote for `weight_g,zone`. Faults: the EU base rate is 8
/// instead of 9; heavy parcels pay 4 per kg instead of 3; weight is
/// truncated to whole kilograms instead of rounded up.
fn shipping(input: &str, faults: &[bool], tr: &mut Trace) -> String {
    let order = input.to_string();
    snap!(tr, 1; order);
    let parts: Vec<&str> = order.split(',').collect();
    let n_parts = parts.len();
    snap!(tr, 2; order, n_parts);
    let weight: Option<u64> = parts.first().and_then(|w| w.parse().ok());
    if n_parts != 2 || weight.is_none() {
        snap!(tr, 3; order, n_parts);
        return "bad order".into();
    }
    let weight = weight.unwrap();
    snap!(tr, 4; order, n_parts, weight);
    let zone = parts[1].to_string();
    snap!(tr, 5; order, n_parts, weight, zone);
    let mut base = 5;
    snap!(tr, 6; order, n_parts, weight, zone, base);
    let eu = zone == "EU";
    snap!(tr, 7; order, n_parts, weight, zone, base);
    if eu {
        base = if faults[0] { 8 } else { 9 };
        snap!(tr, 8; order, n_parts, weight, zone, base);
    } else {
        let intl = zone == "INTL";
        snap!(tr, 9; order, n_parts, weight, zone, base);
        if intl {
            base = 20;
            snap!(tr, 10; order, n_parts, weight, zone, base);
        }
    }
    let heavy_rate = if faults[1] { 4 } else { 3 };
    let per_kg = if weight > 5000 { heavy_rate } else { 2 };
    snap!(tr, 11; order, n_parts, weight, zone, base, per_kg);
    let kg = if faults[2] { weight / 1000 } else { weight.div_ceil(1000) };
    snap!(tr, 12; order, n_parts, weight, zone, base, per_kg, kg);
    let cost = base + per_kg * kg;
    snap!(tr, 13; order, n_parts, weight, zone, base, per_kg, kg, cost);
    let quote = cost > 100;
    snap!(tr, 14; order, n_parts, weight, zone, base, per_kg, kg, cost);
    if quote {
        snap!(tr, 15; order, n_parts, weight, zone, base, per_kg, kg, cost);
        return "quote required".into();
    }
    let out = format!("{zone}:{cost}");
    snap!(tr, 16; order, n_parts, weight, zone, base, per_kg, kg, cost);
    out
}

fn listing1_inputs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("t1", "speak wordNone"),
        ("t2", "wordNone"),
        ("t3", "wordNonecontained"),
        ("t4", "wwwwordNoneeee"),
        ("t5", "has wordNtwo"),
        ("t6", "wordNtwo"),
        ("t7", ""),
        ("t8", "midd*1*le"),
        ("t9", "*1*2*"),
        ("t10", "a normal sentence"),
        ("t11", "wordnonewordNtw"),
        ("t12", "wordNone and wordNtwo"),
    ]
}

fn tag_inputs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("lone_digit_a", "abc1"),
        ("lone_digit_b", "ab7"),
        ("lone_digit_c", "x5yz"),
        ("space_a", "red fox"),
        ("space_b", "big dog"),
        ("space_c", "old red barn"),
        ("upper_a", "Hello"),
        ("upper_b", "HELLO"),
        ("upper_c", "Hey"),
        ("comment", "# note"),
        ("plain", "abc"),
        ("digits", "x12"),
        ("snake", "hello_world"),
        ("long", "abcdefghijklmnopqrstuvwxyzabcdefgh"),
    ]
}

fn shipping_inputs() -> Vec<(&'static str, &'static str)> {
    vec![
        ("eu_2kg", "2000,EU"),
        ("eu_3kg", "3000,EU"),
        ("eu_4kg", "4000,EU"),
        ("heavy_6kg", "6000,INTL"),
        ("heavy_8kg", "8000,INTL"),
        ("heavy_7kg", "7000,DOM"),
        ("frac_1500", "1500,DOM"),
        ("frac_2500", "2500,DOM"),
        ("frac_3200", "3200,DOM"),
        ("dom_1kg", "1000,DOM"),
        ("intl_2kg", "2000,INTL"),
        ("us_3kg", "3000,US"),
        ("garbage", "heavy"),
        ("bulk", "40000,INTL"),
    ]
}

fn versions() -> Vec<Version> {
    let listing1 = |name, faults: [bool; 2]| Version {
        name,
        program: "listing1",
        lines: 17,
        run: process,
        faults: faults.to_vec(),
        fault_names: &["Fault1", "Fault2"],
        inputs: listing1_inputs(),
    };
    let tag_v = |name, faults: [bool; 3]| Version {
        name,
        program: "tag",
        lines: 14,
        run: tag,
        faults: faults.to_vec(),
        fault_names: &["lone_digit", "space_sep", "upper_width"],
        inputs: tag_inputs(),
    };
    let ship_v = |name, faults: [bool; 3]| Version {
        name,
        program: "shipping",
        lines: 16,
        run: shipping,
        faults: faults.to_vec(),
        fault_names: &["eu_base", "heavy_rate", "kg_rounding"],
        inputs: shipping_inputs(),
    };
    vec![
        listing1("listing1", [true, true]),
        listing1("listing1_f1", [true, false]),
        listing1("listing1_f2", [false, true]),
        tag_v("tag_v1", [true, true, true]),
        tag_v("tag_v2", [true, false, false]),
        tag_v("tag_v3", [false, true, true]),
        tag_v("tag_v4", [true, false, true]),
        ship_v("shipping_v1", [true, true, true]),
        ship_v("shipping_v2", [true, true, false]),
        ship_v("shipping_v3", [false, false, true]),
        ship_v("shipping_v4", [false, true, true]),
    ]
}

/// Bundle plus oracle groups for one version. A failure is attributed to
/// the single fault whose removal makes it pass.
fn trace_version(v: &Version) -> (TraceBundle, BTreeMap<String, Vec<String>>) {
    let clean = vec![false; v.faults.len()];
    let mut tests = Vec::new();
    let mut oracle: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (name, input) in &v.inputs {
        let expected = (v.run)(input, &clean, &mut Trace::default());
        let mut tr = Trace::default();
        let got = (v.run)(input, &v.faults, &mut tr);
        let verdict = if got == expected { Verdict::Pass } else { Verdict::Fail };
        if verdict == Verdict::Fail {
            let culprits: Vec<usize> = (0..v.faults.len())
                .filter(|&f| v.faults[f])
                .filter(|&f| {
                    let mut without = v.faults.clone();
                    without[f] = false;
                    (v.run)(input, &without, &mut Trace::default()) == expected
                })
                .collect();
            assert_eq!(culprits.len(), 1, "{}: {name} is not a single-fault failure", v.name);
            oracle
                .entry(v.fault_names[culprits[0]].to_string())
                .or_default()
                .push(name.to_string());
        }
        tests.push(TestExecution {
            name: name.to_string(),
            verdict,
            coverage: tr.coverage,
            snapshots: tr.snapshots,
        });
    }
    let bundle = TraceBundle {
        program: v.program.to_string(),
        snapshot_scope: SnapshotScope::All,
        listed: None,
        statements: (1..=v.lines).map(|i| Statement { id: StmtId(i), line: i }).collect(),
        tests,
    };
    bundle.validate().expect("generated bundle is valid");
    (bundle, oracle)
}

fn write(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
}

fn main() {
    let root = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures"));
    let corpus = root.join("corpus");
    std::fs::create_dir_all(&corpus).expect("create fixtures dir");
    for v in versions() {
        let (bundle, oracle) = trace_version(&v);
        let oracle_doc = serde_json::to_string_pretty(&serde_json::json!({ "faults": oracle }))
            .expect("oracle serializes");
        let json = bundle.to_json();
        write(&corpus.join(format!("{}.trace", v.name)), &(json.clone() + "\n"));
        write(&corpus.join(format!("{}.oracle.json", v.name)), &(oracle_doc.clone() + "\n"));
        if v.name == "listing1" {
            write(&root.join("listing1.trace"), &(json + "\n"));
            write(&root.join("listing1.oracle.json"), &(oracle_doc + "\n"));
        }
        println!(
            "{}: {} tests, {} failed, faults {:?}",
            v.name,
            bundle.tests.len(),
            bundle.failure_count(),
            oracle.iter().map(|(f, t)| (f.as_str(), t.len())).collect::<Vec<_>>()
        );
    }
}
