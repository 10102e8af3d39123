fn main() {
    std::process::exit(pact_core::cli::run(std::env::args_os()));
}
