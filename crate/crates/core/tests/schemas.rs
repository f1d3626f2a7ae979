//! The JSON schemas under `schemas/` against the types they describe.

use std::collections::BTreeSet;

use quadconic::claims::run_all;
use quadconic::protocol::Server;
use quadconic::sampler::{sample, SamplerSpec};
use quadconic::scalar::{Backend, Float, Tolerance};
use quadconic::scene::{SceneDocument, Style};
use serde_json::{json, Value};

fn schema(name: &str) -> Value {
    let p = format!("{}/../../schemas/{name}", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn kinds(variants: &Value) -> BTreeSet<String> {
    variants
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v["properties"]["kind"]["const"].as_str().unwrap().to_string())
        .collect()
}

fn strings(v: &Value) -> BTreeSet<String> {
    v.as_array().unwrap().iter().map(|s| s.as_str().unwrap().to_string()).collect()
}

#[test]
fn scene_conic_and_vertex_kinds_are_accepted() {
    let s = schema("scene.v1.schema.json");
    let conics = [
        json!({"kind": "unit-circle"}),
        json!({"kind": "circle", "center": [0, 0], "radius": 2}),
        json!({"kind": "coefficients", "coefficients": [1, 0, 1, 0, 0, -1], "base": [1, 0]}),
        json!({"kind": "canonical-pencil", "lambda": "1/2"}),
        json!({"kind": "random", "seed": 3}),
    ];
    let got: BTreeSet<String> = conics.iter().map(|c| c["kind"].as_str().unwrap().to_string()).collect();
    assert_eq!(got, kinds(&s["$defs"]["conic"]["oneOf"]));
    let vertices = [
        json!({"kind": "params", "params": [3, "1/2", -1, -4]}),
        json!({"kind": "random", "seed": 1, "roles": "any"}),
    ];
    for c in &conics {
        for v in &vertices {
            let doc = json!({"version": 1, "conic": c, "vertices": v});
            let d = SceneDocument::parse(&doc.to_string()).unwrap();
            d.build::<Float>().unwrap_or_else(|e| panic!("{doc}: {e}"));
        }
    }
    let all_vertex_kinds: BTreeSet<String> =
        ["points", "params", "random", "perfect-square"].iter().map(|s| s.to_string()).collect();
    assert_eq!(all_vertex_kinds, kinds(&s["$defs"]["vertices"]["oneOf"]));
    let exact = json!({"version": 1, "backend": "exact", "conic": {"kind": "unit-circle"},
        "vertices": {"kind": "perfect-square", "seed": 2, "roles": "m1-inside"}});
    SceneDocument::parse(&exact.to_string()).unwrap().build::<quadconic::scalar::Rational>().unwrap();
}

#[test]
fn style_tokens_match() {
    let s = schema("scene.v1.schema.json");
    let tokens = strings(&s["$defs"]["style"]["enum"]);
    for t in &tokens {
        let style: Style = serde_json::from_value(json!(t)).unwrap();
        assert_eq!(serde_json::to_value(style).unwrap(), json!(t));
    }
    assert_eq!(tokens.len(), 9);
}

#[test]
fn every_protocol_op_is_handled() {
    let s = schema("protocol.v1.schema.json");
    let server = Server::new();
    for op in strings(&s["$defs"]["request"]["properties"]["op"]["enum"]) {
        let r: Value = serde_json::from_str(&server.handle(&json!({"id": 1, "op": op}).to_string())).unwrap();
        assert_ne!(r["error"]["code"], "UnknownOp", "{op}");
    }
}

#[test]
fn report_keys_match() {
    let s = schema("report.v1.schema.json");
    let cfg = sample::<Float>(&SamplerSpec::new(5, Backend::Float)).unwrap();
    let allowed: BTreeSet<String> = s["properties"].as_object().unwrap().keys().cloned().collect();
    let required = strings(&s["required"]);
    for r in run_all(&cfg, &[], &Tolerance::new(1e-8)).unwrap() {
        let v = serde_json::to_value(&r).unwrap();
        let keys: BTreeSet<String> = v.as_object().unwrap().keys().cloned().collect();
        assert!(keys.is_subset(&allowed), "{keys:?}");
        assert!(required.is_subset(&keys), "{keys:?}");
        assert!(strings(&s["properties"]["status"]["enum"]).contains(v["status"].as_str().unwrap()));
        assert!(strings(&s["properties"]["provenance"]["enum"]).contains(v["provenance"].as_str().unwrap()));
    }
}
