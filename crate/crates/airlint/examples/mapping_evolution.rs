//! Diff two mapping levels and list which corpus APIs evolve anywhere in
//! the loaded range.

use airlint::MappingStore;
use std::path::Path;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("mappings");
    let store = MappingStore::load_dir(&dir).expect("mappings load");
    println!(
        "loaded levels {}..={}",
        store.min_level(),
        store.max_level()
    );

    let report = store.diff_levels(28, 29);
    println!("\n28 -> 29");
    for api in &report.added {
        println!("  added   {api}");
    }
    for api in &report.deleted {
        println!("  deleted {api}");
    }
    for (api, kind) in &report.changed {
        println!("  changed {api}: {}", kind.as_str());
    }

    println!("\nevolving APIs across the whole range:");
    let mut apis: Vec<&str> = store
        .levels()
        .flat_map(|m| m.apis.keys().map(String::as_str))
        .collect();
    apis.sort_unstable();
    apis.dedup();
    for api in apis {
        if store.is_evolving(api) {
            println!("  {api}");
        }
    }
}
