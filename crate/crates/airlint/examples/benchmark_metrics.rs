//! Run the labeled corpus and print the per-kind precision/recall/F1 table,
//! then show the metrics engine on a directly supplied confusion matrix.

use airlint::bench::{percent, run_corpus, CorpusManifest, KindMetrics};
use airlint::{AnalysisConfig, MappingStore};
use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let manifest = CorpusManifest::load(&root.join("corpus/manifest.json"))
        .expect("manifest loads");
    let store = MappingStore::load_dir(&root.join("mappings")).expect("mappings load");
    let config = AnalysisConfig::default();

    let outcome = run_corpus(&manifest, &store, &config, false);
    print!("{}", airlint::bench::render_table(&outcome));

    // The same engine accepts raw counts, e.g. from an external evaluation.
    let m = KindMetrics::from_counts(26, 32, 3, 9);
    println!(
        "\nexternal counts tp=26 tn=32 fp=3 fn=9 -> precision {} recall {} f1 {}",
        percent(m.precision),
        percent(m.recall),
        percent(m.f1)
    );
}
