fn main() {
    std::process::exit(airlint::cli::run(std::env::args_os()));
}
