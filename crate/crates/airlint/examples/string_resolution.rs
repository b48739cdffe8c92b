//! Show the interprocedural permission-string dataflow: literals, the
//! wrapper pattern (literal flows through a parameter), and a branch join
//! that leaves two possible strings at one check site.

use airlint::dataflow::{resolve_site, solve_reaching};
use airlint::graphs::{build_call_graph, Icfg};
use airlint::parse_app;

const DEMO: &str = r#"
app com.example.flows targetSdk 29

activity Demo {
  onCreate = literalCheck
  onResume = wrapperCheck
  onClick = joinCheck
}

method literalCheck() {
  block entry:
    check "android.permission.CAMERA"
    return
}

method wrapperCheck() {
  block entry:
    def wanted = "android.permission.RECORD_AUDIO"
    call verify(wanted)
    return
}

method verify(perm: string) {
  block entry:
    def p = param perm
    check p
    return
}

method joinCheck() {
  block entry:
    branch sdk >= 29 fine coarse
  block fine:
    def perm = "android.permission.ACCESS_FINE_LOCATION"
    goto merged
  block coarse:
    def perm = "android.permission.ACCESS_COARSE_LOCATION"
    goto merged
  block merged:
    check perm
    return
}
"#;

fn main() {
    let app = parse_app(DEMO).expect("demo parses");
    let cg = build_call_graph(&app);
    let icfg = Icfg::build(&app, &cg);
    let resolution = solve_reaching(&app, &icfg);

    let mut sites: Vec<_> = resolution.sites().map(|(site, _)| site.clone()).collect();
    sites.sort();
    for site in sites {
        let resolved = resolve_site(&resolution, &site, &app);
        let perms: Vec<&str> = resolved.perms.iter().map(String::as_str).collect();
        println!(
            "{site}  -> {{{}}}{}",
            perms.join(", "),
            if resolved.fallback { "  (fallback)" } else { "" }
        );
    }
}
