//! The run-result JSON record and its schema.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::context::Context;
use crate::egg::{SearchResult, WordStats};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxRecord {
    pub mode: String,
    pub blocks: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Versions {
    pub toolkit: String,
    pub schema: u32,
}

impl Default for Versions {
    fn default() -> Self {
        Versions { toolkit: crate::VERSION.to_string(), schema: SCHEMA_VERSION }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub machine: String,
    pub aux: AuxRecord,
    pub weights: Vec<f64>,
    pub target: f64,
    pub status: String,
    pub eta: f64,
    pub alpha: Option<f64>,
    pub radius: usize,
    pub egg_size: usize,
    pub per_level_sizes: Vec<usize>,
    /// File holding the count matrix, when one was written.
    pub count_matrix_ref: Option<String>,
    pub seed: Option<u64>,
    pub versions: Versions,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RunRecord {
    pub fn from_result(ctx: &Context, r: &SearchResult) -> RunRecord {
        RunRecord {
            machine: ctx.name.clone(),
            aux: AuxRecord { mode: ctx.aux.mode().to_string(), blocks: ctx.aux.describe(&ctx.group) },
            weights: r.weights.as_slice().to_vec(),
            target: r.target,
            status: r.status.as_str().to_string(),
            eta: r.eta_max,
            alpha: r.alpha,
            radius: r.radius,
            egg_size: r.egg_size,
            per_level_sizes: r.per_level_sizes(),
            count_matrix_ref: None,
            seed: None,
            versions: Versions::default(),
            notes: Vec::new(),
        }
    }
}

impl RunRecord {
    /// Record of one strategy round; its bound stands on its own.
    pub fn from_round(ctx: &Context, round: &crate::strategy::Round, seed: Option<u64>) -> RunRecord {
        RunRecord {
            machine: ctx.name.clone(),
            aux: AuxRecord { mode: ctx.aux.mode().to_string(), blocks: ctx.aux.describe(&ctx.group) },
            weights: round.weights_out.as_slice().to_vec(),
            target: round.target,
            status: round.status.as_str().to_string(),
            eta: round.eta,
            alpha: round.alpha,
            radius: round.radius,
            egg_size: round.egg_size,
            per_level_sizes: round.per_level_sizes.clone(),
            count_matrix_ref: None,
            seed,
            versions: Versions::default(),
            notes: Vec::new(),
        }
    }
}

/// Occurrence counts of an egg: per word, how often each generator occurs
/// and how often it occurs in non-trivial sections.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountMatrix {
    pub generators: Vec<String>,
    pub rows: Vec<CountRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountRow {
    pub word: String,
    pub n: Vec<u32>,
    pub c: Vec<u32>,
}

impl CountMatrix {
    pub fn from_result(ctx: &Context, r: &SearchResult) -> CountMatrix {
        CountMatrix {
            generators: ctx.group.gen_names(),
            rows: r
                .shell
                .iter()
                .map(|s| CountRow { word: ctx.group.format_word(&s.word), n: s.stats.n.clone(), c: s.stats.c.clone() })
                .collect(),
        }
    }

    pub fn stats(&self) -> Vec<WordStats> {
        self.rows.iter().map(|r| WordStats { n: r.n.clone(), c: r.c.clone() }).collect()
    }
}

/// JSON schema of [`RunRecord`].
pub const RUN_RECORD_SCHEMA: &str = r#"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "growthbound run record",
  "type": "object",
  "required": ["machine", "aux", "weights", "target", "status", "eta", "alpha", "radius",
               "egg_size", "per_level_sizes", "count_matrix_ref", "seed", "versions"],
  "properties": {
    "machine": {"type": "string"},
    "aux": {"type": "object", "required": ["mode", "blocks"],
            "properties": {"mode": {"type": "string"}, "blocks": {"type": "string"}}},
    "weights": {"type": "array", "items": {"type": "number"}},
    "target": {"type": "number"},
    "status": {"enum": ["found", "radius-exceeded", "aborted"]},
    "eta": {"type": "number"},
    "alpha": {"type": ["number", "null"]},
    "radius": {"type": "integer", "minimum": 0},
    "egg_size": {"type": "integer", "minimum": 0},
    "per_level_sizes": {"type": "array", "items": {"type": "integer", "minimum": 0}},
    "count_matrix_ref": {"type": ["string", "null"]},
    "seed": {"type": ["integer", "null"]},
    "versions": {"type": "object", "required": ["toolkit", "schema"]},
    "notes": {"type": "array", "items": {"type": "string"}}
  }
}"#;

fn kind_ok(v: &Value, kind: &str) -> bool {
    match kind {
        "string" => v.is_string(),
        "number" => v.is_number(),
        "integer" => v.is_u64() || v.is_i64(),
        "null" => v.is_null(),
        "object" => v.is_object(),
        "array" => v.is_array(),
        "boolean" => v.is_boolean(),
        _ => false,
    }
}

fn check(v: &Value, schema: &Value, path: &str) -> Result<()> {
    let fail = |m: String| Err(Error::InvalidArgument(format!("{path}: {m}")));
    if let Some(t) = schema.get("type") {
        let ok = match t {
            Value::String(k) => kind_ok(v, k),
            Value::Array(ks) => ks.iter().filter_map(Value::as_str).any(|k| kind_ok(v, k)),
            _ => true,
        };
        if !ok {
            return fail(format!("expected {t}"));
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(v) {
            return fail(format!("{v} is not one of {options:?}"));
        }
    }
    if let (Some(min), Some(x)) = (schema.get("minimum").and_then(Value::as_f64), v.as_f64()) {
        if x < min {
            return fail(format!("{x} < {min}"));
        }
    }
    if let (Some(Value::Array(req)), Some(obj)) = (schema.get("required"), v.as_object()) {
        for k in req.iter().filter_map(Value::as_str) {
            if !obj.contains_key(k) {
                return fail(format!("missing field {k}"));
            }
        }
    }
    if let (Some(Value::Object(props)), Some(obj)) = (schema.get("properties"), v.as_object()) {
        for (k, sub) in props {
            if let Some(x) = obj.get(k) {
                check(x, sub, &format!("{path}.{k}"))?;
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), v.as_array()) {
        for (i, x) in arr.iter().enumerate() {
            check(x, items, &format!("{path}[{i}]"))?;
        }
    }
    Ok(())
}

/// Checks a JSON value against [`RUN_RECORD_SCHEMA`].
pub fn validate_run_record(v: &Value) -> Result<()> {
    let schema: Value = serde_json::from_str(RUN_RECORD_SCHEMA).expect("schema is valid JSON");
    check(v, &schema, "$")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::egg::{search_egg, SearchConfig};
    use crate::formats::zoo;
    use crate::weights::Weights;

    #[test]
    fn record_round_trips_and_validates() {
        let ctx = Context::builtin("grigorchuk").unwrap();
        let w = Weights::from_vec_unchecked(zoo::BARTHOLDI_WEIGHTS.to_vec());
        let (res, _) = search_egg(ctx.table.clone(), w, &ctx.constraints, &SearchConfig::new(0.99)).unwrap();
        let rec = RunRecord::from_result(&ctx, &res);
        let v = serde_json::to_value(&rec).unwrap();
        validate_run_record(&v).unwrap();
        let back: RunRecord = serde_json::from_value(v).unwrap();
        assert_eq!(back, rec);
        let cm = CountMatrix::from_result(&ctx, &res);
        assert_eq!(cm.rows.len(), 4);
        assert_eq!(cm.stats(), res.count_rows());
    }

    #[test]
    fn schema_violations_are_named() {
        let v = serde_json::json!({"machine": "x"});
        let e = validate_run_record(&v).unwrap_err().to_string();
        assert!(e.contains("missing field aux"), "{e}");
        let mut ok = serde_json::json!({
            "machine": "m", "aux": {"mode": "free", "blocks": "free"}, "weights": [1.0], "target": 0.9,
            "status": "found", "eta": 0.5, "alpha": null, "radius": 1, "egg_size": 1,
            "per_level_sizes": [1], "count_matrix_ref": null, "seed": null,
            "versions": {"toolkit": "0", "schema": 1}
        });
        validate_run_record(&ok).unwrap();
        ok["status"] = "done".into();
        assert!(validate_run_record(&ok).is_err());
    }
}
