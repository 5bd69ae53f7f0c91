use std::fs;
use std::path::{Path, PathBuf};

use longtake::scenes::{scene_by_name, SCENE_NAMES};
use longtake::script::parse_script;
use longtake::sim::SceneSpec;

const KINDS: [&str; 4] = ["syntax_error", "unknown_actor", "unknown_behavior_kind", "invalid_parameter"];

fn corpus(dir: &str) -> Vec<PathBuf> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(dir);
    let mut files: Vec<_> = fs::read_dir(&root)
        .unwrap_or_else(|e| panic!("{}: {e}", root.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}

#[test]
fn valid_scripts_round_trip() {
    let files = corpus("scripts/valid");
    assert_eq!(files.len(), 20);
    for f in files {
        let script = parse_script(&fs::read_to_string(&f).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let again = parse_script(&script.to_json()).unwrap();
        assert_eq!(script, again, "{}", f.display());
    }
}

#[test]
fn valid_corpus_covers_every_kind() {
    let mut text = String::new();
    for f in corpus("scripts/valid") {
        text += &fs::read_to_string(f).unwrap();
    }
    for kind in [
        "multi_actor_framing", "path", "pan", "banking", "idle",
        "speech", "elapsed_time", "actor_appears", "actor_disappears", "landing_zone", "relative_size",
    ] {
        assert!(text.contains(&format!("\"kind\": \"{kind}\"")), "{kind}");
    }
}

#[test]
fn invalid_scripts_report_the_kind_in_their_name() {
    let files = corpus("scripts/invalid");
    assert!(files.len() >= 8);
    for f in files {
        let name = f.file_stem().unwrap().to_str().unwrap();
        let expected = KINDS.iter().find(|k| name.starts_with(*k)).unwrap_or_else(|| panic!("{name}: no kind prefix"));
        let err = parse_script(&fs::read_to_string(&f).unwrap()).expect_err(name);
        assert_eq!(err.kind(), *expected, "{name}: {err}");
    }
}

#[test]
fn scene_files_match_presets() {
    for name in SCENE_NAMES {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../corpus/scenes/{name}.json"));
        let spec: SceneSpec = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(spec, scene_by_name(name).unwrap(), "{name}");
    }
}

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/script.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn schema_accepts_the_valid_corpus() {
    let v = schema();
    for f in corpus("scripts/valid") {
        let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(&f).unwrap()).unwrap();
        if let Err(e) = v.validate(&doc) {
            panic!("{}: {e}", f.display());
        }
        // serialized form too, since it spells out defaults
        let out: serde_json::Value = serde_json::from_str(&parse_script(&doc.to_string()).unwrap().to_json()).unwrap();
        assert!(v.is_valid(&out), "{}", f.display());
    }
}

#[test]
fn schema_rejects_structural_errors() {
    let v = schema();
    for f in corpus("scripts/invalid") {
        let name = f.file_stem().unwrap().to_str().unwrap();
        let Ok(doc) = serde_json::from_str::<serde_json::Value>(&fs::read_to_string(&f).unwrap()) else { continue };
        // Cross-reference and speech checks live in the parser only.
        let semantic = ["unknown_actor", "duplicate_behavior_id", "missing_cue", "speech_collision", "zone_inverted"];
        if semantic.iter().any(|s| name.contains(s)) {
            continue;
        }
        assert!(!v.is_valid(&doc), "{name}");
    }
}
