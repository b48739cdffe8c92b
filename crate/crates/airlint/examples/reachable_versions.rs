//! Compute the reachable runtime versions of every dangerous call site in
//! a fixture that fences its calls with sdk guards.

use airlint::config::DEFAULT_LAV;
use airlint::contexts::{extract_contexts, TargetKind};
use airlint::detector::reachable_rvs;
use airlint::graphs::build_call_graph;
use airlint::parse_app;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/p2p_group_patched.air");
    let text = std::fs::read_to_string(path).expect("fixture readable");
    let app = parse_app(&text).expect("fixture parses");

    let cg = build_call_graph(&app);
    let (contexts, _) = extract_contexts(&cg, &app, 16);

    println!(
        "target sdk {}; levels considered 23..={DEFAULT_LAV}\n",
        app.manifest.target_sdk
    );
    for ctx in &contexts {
        let TargetKind::Dangerous(api) = &ctx.target else {
            continue;
        };
        let rvs: Vec<String> = reachable_rvs(ctx, &app, DEFAULT_LAV)
            .into_iter()
            .map(|v| v.to_string())
            .collect();
        println!("{api} at {}  reachable on {{{}}}", ctx.site(), rvs.join(", "));
    }
}
