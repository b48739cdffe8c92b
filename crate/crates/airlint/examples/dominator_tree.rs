//! Compute and print the block-level dominator tree of each method in a
//! fixture with real branching.

use airlint::graphs::dominators;
use airlint::parse_app;

fn main() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/corpus/background_location_patched.air"
    );
    let text = std::fs::read_to_string(path).expect("fixture readable");
    let app = parse_app(&text).expect("fixture parses");

    for method in &app.methods {
        let cfg = dominators(method);
        println!("method {}", method.name);
        for (i, block) in method.blocks.iter().enumerate() {
            let succs: Vec<&str> = cfg.succs[i]
                .iter()
                .map(|&s| method.blocks[s].name.as_str())
                .collect();
            let idom = if i == 0 {
                "(entry)"
            } else {
                match cfg.doms.idom[i] {
                    Some(d) => method.blocks[d].name.as_str(),
                    None => "(unreachable)",
                }
            };
            println!(
                "  {:<10} succs [{}]  idom {}",
                block.name,
                succs.join(", "),
                idom
            );
        }
    }
}
