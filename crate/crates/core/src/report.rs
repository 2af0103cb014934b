//! Deterministic JSON reports (`"schema": 1`).

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::oracle::VerificationReport;

pub const SCHEMA: u64 = 1;
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Round to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64"), SIGNIFICANT_DIGITS);
            // Normalize negative zero so output is stable.
            let x = if x == 0.0 { 0.0 } else { x };
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_value).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

/// Serialize with every float rounded to 12 significant digits.
pub fn to_value<T: Serialize>(x: &T) -> Value {
    round_value(serde_json::to_value(x).expect("report types serialize"))
}

/// Per-check pass/fail tallies.
pub fn theorem_summary(rep: &VerificationReport) -> Value {
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    let mut inconclusive: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in &rep.records {
        for c in &rec.checks {
            if !c.conclusive {
                *inconclusive.entry(c.name).or_default() += 1;
                continue;
            }
            let e = tally.entry(c.name).or_default();
            if c.holds {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    for gr in &rep.group_records {
        for b in &gr.multi_bounds {
            let e = tally.entry("split_un_le_two_sided_bound").or_default();
            match b.holds {
                Some(true) => e.0 += 1,
                Some(false) => e.1 += 1,
                None => {}
            }
        }
    }
    for c in &rep.certifications {
        let e = tally.entry("certificate_un_le_snd_le_k").or_default();
        match c.sandwich_holds {
            Some(true) => e.0 += 1,
            Some(false) => e.1 += 1,
            None => {}
        }
    }
    let mut out = Map::new();
    for name in inconclusive.keys() {
        tally.entry(name).or_default();
    }
    for (name, (pass, fail)) in tally {
        let skipped = inconclusive.get(name).copied().unwrap_or(0);
        out.insert(name.to_string(), json!({ "pass": pass, "fail": fail, "inconclusive": skipped }));
    }
    Value::Object(out)
}

/// Full analysis document.
pub fn analysis_document(input: Value, rep: &VerificationReport) -> Value {
    json!({
        "schema": SCHEMA,
        "input": input,
        "n": rep.n,
        "group_tol": to_value(&rep.group_tol),
        "spectrum": to_value(&rep.eigenvalues),
        "groups": to_value(&rep.groups),
        "audit": to_value(&rep.audit),
        "eigenvectors": to_value(&rep.records),
        "multiple_groups": to_value(&rep.group_records),
        "certificates": to_value(&rep.certifications),
        "theorem_summary": theorem_summary(rep),
        "violations": to_value(&rep.violations),
        "all_bounds_hold": rep.all_bounds_hold,
    })
}

pub fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}
