//! Figures and configuration JSON against checked-in files.
//! `UPDATE_GOLDEN=1` rewrites them.

use std::path::PathBuf;

use quadconic::figures::{figure, FIGURES, REFERENCE_SCENE};
use quadconic::scalar::{Float, Rational};
use quadconic::scene::SceneDocument;

fn dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn golden(name: &str) -> PathBuf {
    dir().join(format!("{name}.svg"))
}

fn compare(path: &PathBuf, got: &str) {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(path)
        .unwrap_or_else(|_| panic!("missing {}; run with UPDATE_GOLDEN=1", path.display()));
    assert!(got == want, "output differs from {}", path.display());
}

#[test]
fn configuration_json_matches_golden_files() {
    for (name, backend) in [("reference_exact", "exact"), ("reference_float", "float")] {
        let scene = REFERENCE_SCENE.replace("\"float\"", &format!("\"{backend}\""));
        let doc = SceneDocument::parse(&scene).unwrap();
        let v = match backend {
            "exact" => doc.build::<Rational>().unwrap().to_json(),
            _ => doc.build::<Float>().unwrap().to_json(),
        };
        let text = serde_json::to_string_pretty(&v).unwrap() + "\n";
        compare(&dir().join(format!("{name}.json")), &text);
    }
}

#[test]
fn figures_match_golden_files() {
    for name in FIGURES {
        compare(&golden(name), &figure(name).unwrap());
    }
}

#[test]
fn figures_are_deterministic() {
    for name in FIGURES {
        assert_eq!(figure(name).unwrap(), figure(name).unwrap());
    }
}
