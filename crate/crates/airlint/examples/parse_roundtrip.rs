//! Parse an AIR file, pretty-print it back, and re-parse the printed text.
//! The canonical printer round-trips: both parses yield equal models.

use airlint::{parse_app, pretty_print};

fn main() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/corpus/camera_click_patched.air"
    );
    let text = std::fs::read_to_string(path).expect("fixture readable");

    let app = match parse_app(&text) {
        Ok(app) => app,
        Err(errors) => {
            for e in errors {
                eprintln!("{e}");
            }
            std::process::exit(2);
        }
    };

    println!(
        "parsed {}: targetSdk {}, {} components, {} methods",
        app.manifest.package,
        app.manifest.target_sdk,
        app.components.len(),
        app.methods.len()
    );

    let printed = pretty_print(&app);
    let again = parse_app(&printed).expect("printed form parses");
    assert_eq!(app, again, "pretty-print must round-trip");

    println!("round-trip ok; canonical form:\n");
    print!("{printed}");
}
