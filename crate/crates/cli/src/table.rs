//! Plain-text rendering of the reports. Commands without a table layout
//! fall back to the canonical document.

use serde_json::Value;

use crate::commands::canonical;
use crate::{Command, OortCmd, RamCmd};

pub fn render(cmd: &Command, doc: &Value) -> String {
    match cmd {
        Command::Oort(OortCmd::Verify(_)) => oort(doc),
        Command::Ram(RamCmd::Profile { .. }) => profile(doc),
        _ => canonical(doc),
    }
}

fn field(v: &Value, key: &str) -> String {
    match &v[key] {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}

fn oort(doc: &Value) -> String {
    let mut out = format!(
        "p = {}  c = {}  W = {}  precision = {}  m0 = {}\n",
        field(doc, "p"),
        field(doc, "c"),
        field(doc, "w"),
        field(doc, "precision"),
        field(doc, "m0")
    );
    let g = &doc["generic"];
    out += &format!(
        "generic: weierstrass degree {}, {} branch points, different {}\n\n",
        field(g, "weierstrass_degree"),
        field(g, "branch_count"),
        field(g, "different")
    );
    out += " m  ν(u-1)  conductor  d_m  eisenstein  cross\n";
    for r in doc["level_records"].as_array().into_iter().flatten() {
        let cross = match &r["cross_check"] {
            Value::Null => "-".to_string(),
            x => field(x, "different"),
        };
        out += &format!(
            "{:>2}  {:>6}  {:>9}  {:>3}  {:>10}  {:>5}\n",
            field(r, "m"),
            field(r, "unit_index"),
            field(r, "conductor"),
            field(r, "different"),
            if r["eisenstein"]["ok"] == Value::Bool(true) {
                "ok"
            } else {
                "FAIL"
            },
            cross
        );
    }
    out += "\n levels  ν(Q-1)  bound\n";
    for q in doc["pth_power"]
        .as_array()
        .into_iter()
        .chain(doc["transitivity"].as_array())
        .flatten()
    {
        let idx = if q["exact"] == Value::Bool(true) {
            field(q, "index")
        } else {
            format!(">={}", field(q, "index"))
        };
        out += &format!(
            " {}..{}  {:>6}  {:>5}  {}\n",
            field(q, "m"),
            field(q, "top"),
            idx,
            field(q, "bound"),
            if q["ok"] == Value::Bool(true) { "ok" } else { "FAIL" }
        );
    }
    for f in doc["failures"].as_array().into_iter().flatten() {
        out += &format!("failure: {}\n", f.as_str().unwrap_or_default());
    }
    out += if doc["pass"] == Value::Bool(true) {
        "PASS\n"
    } else {
        "FAIL\n"
    };
    out
}

fn profile(doc: &Value) -> String {
    let mut out = format!(
        "L^{} | L^{} over p = {}\n",
        field(doc, "top"),
        field(doc, "base"),
        field(doc, "p")
    );
    out += "   a  i_L\n";
    if let Some(t) = doc["i_table"].as_object() {
        let mut rows: Vec<(u64, &Value)> = t.iter().map(|(k, v)| (k.parse().unwrap_or(0), v)).collect();
        rows.sort_by_key(|&(a, _)| a);
        for (a, i) in rows {
            out += &format!("{a:>4}  {i}\n");
        }
    }
    out += &format!("lower jumps: {}\n", doc["lower_jumps"]);
    out += &format!("upper jumps: {}\n", doc["upper_jumps"]);
    out += &format!("phi breakpoints: {}\n", doc["phi_breakpoints"]);
    out += &format!(
        "conductor {}  different {}\n",
        field(doc, "conductor"),
        field(doc, "different_degree")
    );
    out
}
