//! Run the full pipeline on one buggy fixture and print the findings both
//! as the human-readable summary and as report JSON.

use airlint::{analyze, parse_app, AnalysisConfig, MappingStore};
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(root.join("corpus/device_id_upgrade_buggy.air"))
        .expect("fixture readable");
    let app = parse_app(&text).expect("fixture parses");
    let store = MappingStore::load_dir(&root.join("mappings")).expect("mappings load");
    let config = AnalysisConfig::default();

    let outcome = analyze(&app, &store, &config).expect("analysis runs");

    for diag in &outcome.diagnostics {
        eprintln!("note: {diag}");
    }
    print!("{}", airlint::report::to_text(&outcome, false));
    println!();
    print!("{}", airlint::report::to_json(&outcome, false));
}
