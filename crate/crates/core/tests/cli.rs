use std::process::{Command, Output};

use serde_json::Value;

fn dedesum(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dedesum"))
        .args(args)
        .env_remove("DEDESUM_CACHE")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

/// Number of primitive characters mod q, from its multiplicative formula.
fn primitive_count(mut q: u64) -> u64 {
    let mut count = 1;
    let mut p = 2;
    while q > 1 {
        let mut k = 0;
        let mut pk = 1;
        while q % p == 0 {
            q /= p;
            k += 1;
            pk *= p;
        }
        count *= match k {
            0 => 1,
            1 => p - 2,
            _ => pk / p / p * (p - 1) * (p - 1),
        };
        p += 1;
    }
    count
}

#[test]
fn chars_lists_every_primitive_character() {
    for q in [3u64, 4, 5, 8, 12, 15, 16, 21, 25, 27, 36] {
        let out = dedesum(&["chars", &q.to_string(), "--json"]);
        assert!(out.status.success());
        let rows = json(&out);
        let rows = rows.as_array().unwrap();
        assert_eq!(rows.len() as u64, primitive_count(q), "q = {q}");
        assert!(rows.iter().all(|r| r["conductor"] == q));
    }
}

#[test]
fn chars_rejects_tiny_moduli() {
    assert_eq!(dedesum(&["chars", "2"]).status.code(), Some(2));
}

#[test]
fn eval_rejects_parity_mismatch() {
    let out = dedesum(&["eval", "--chi1", "3.2", "--chi2", "5.4", "--a", "1", "--c", "15"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn eval_rejects_c_outside_level_multiples() {
    let out = dedesum(&["eval", "--chi1", "3.2", "--chi2", "7.6", "--a", "1", "--c", "20"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn matrix_and_column_forms_agree() {
    // (4, 3; 21, 16) ∈ Γ₀(21)
    let by_matrix = json(&dedesum(&["eval", "--chi1", "3.2", "--chi2", "7.6", "--matrix", "4,3,21,16", "--json"]));
    let by_column = json(&dedesum(&["eval", "--chi1", "3.2", "--chi2", "7.6", "--a", "4", "--c", "21", "--json"]));
    assert_eq!(by_matrix["value"], by_column["value"]);
    let negated = json(&dedesum(&["eval", "--chi1", "3.2", "--chi2", "7.6", "--matrix", "-4,-3,-21,-16", "--json"]));
    assert_eq!(negated["value"], by_column["value"]);
}

#[test]
fn every_formula_gives_the_same_value() {
    let values: Vec<Value> = ["bernoulli", "fractional", "floor"]
        .iter()
        .map(|f| {
            json(&dedesum(&[
                "eval", "--chi1", "5.4", "--chi2", "8.5", "--a", "-7", "--c", "80", "--formula", f, "--json",
            ]))["value"]
                .clone()
        })
        .collect();
    assert_eq!(values[0], values[1]);
    assert_eq!(values[1], values[2]);
}

#[test]
fn verify_passes_on_examples() {
    let out = dedesum(&["verify", "--chi1", "3.2", "--chi2", "7.6", "--samples", "30", "--json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["passed"], true);
    let out = dedesum(&["verify", "--q1", "4..5", "--q2", "5", "--suite", "formulas,reciprocity", "--samples", "20"]);
    assert!(out.status.success());
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = dedesum(&["verify", "--chi1", "3.2", "--chi2", "7.6", "--suite", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn cache_hit_is_marked_and_matches() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("results.jsonl");
    let cache = cache.to_str().unwrap();
    let args = ["image", "--chi1", "3.2", "--chi2", "7.6", "--json"];
    let fresh = json(&dedesum(&[&args[..], &["--no-cache"]].concat()));
    let first = json(&dedesum(&[&args[..], &["--cache", cache]].concat()));
    let second = json(&dedesum(&[&args[..], &["--cache", cache]].concat()));
    assert!(first.get("cached").is_none());
    assert_eq!(second["cached"], true);
    let mut stripped = second.clone();
    stripped.as_object_mut().unwrap().remove("cached");
    assert_eq!(stripped, fresh);
    assert_eq!(first, fresh);
    // a different seed does not affect exact mode, but a different mode misses
    let sampled = json(&dedesum(&[&args[..], &["--cache", cache, "--mode", "sampled"]].concat()));
    assert!(sampled.get("cached").is_none());
}

#[test]
fn empty_scan_range_gives_an_empty_report() {
    let out = dedesum(&["scan", "--q1", "3", "--q2", "3", "--coprime-only", "--no-cache", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["pairs"].as_array().unwrap().len(), 0);
    assert_eq!(v["summary"]["pairs"], 0);
}

#[test]
fn scan_reports_conjecture_only_for_coprime_pairs() {
    let out = dedesum(&["scan", "--q1", "3..4", "--q2", "3..4", "--quadratic-only", "--no-cache", "--json"]);
    let v = json(&out);
    for r in v["pairs"].as_array().unwrap() {
        let (q1, q2) = (r["q1"].as_u64().unwrap(), r["q2"].as_u64().unwrap());
        if q1 == q2 {
            assert!(r["conjecture"].is_null(), "{r}");
        } else {
            assert_eq!(r["conjecture"], true, "{r}");
        }
    }
}

#[test]
fn scan_csv_has_one_row_per_pair() {
    let out = dedesum(&["scan", "--q1", "3..5", "--q2", "7", "--no-cache", "--csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let pairs = json(&dedesum(&["scan", "--q1", "3..5", "--q2", "7", "--no-cache", "--json"]))["summary"]["pairs"]
        .as_u64()
        .unwrap();
    assert_eq!(lines.len() as u64, pairs + 1);
}

#[test]
fn sampled_image_is_seeded() {
    let run = |seed: &str| {
        dedesum(&["image", "--chi1", "5.2", "--chi2", "7.3", "--mode", "sampled", "--samples", "30", "--seed", seed, "--no-cache", "--json"]).stdout
    };
    assert_eq!(run("11"), run("11"));
}

#[test]
fn table_matches_golden_file() {
    let golden = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/table.md");
    let out = dedesum(&["table", "--no-cache", "--golden", golden]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
