//! Convert annotated framework stub text into a mapping level file.

use airlint::permspec::parse_stubs;
use std::path::Path;

fn main() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("stubs/framework.txt");
    let text = std::fs::read_to_string(&path).expect("stub fixture readable");

    let map = parse_stubs(&text, 30).expect("stubs parse");
    println!(
        "extracted level {}: {} permissions, {} annotated APIs\n",
        map.level,
        map.permissions.len(),
        map.apis.len()
    );
    for (api, req) in &map.apis {
        let perms: Vec<&str> = req.perms.keys().map(String::as_str).collect();
        println!("  {api}  {:?} {}", req.mode, perms.join(", "));
    }

    println!("\nmapping JSON:\n");
    print!("{}", map.to_json());
}
