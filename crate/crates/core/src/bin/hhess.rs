fn main() {
    std::process::exit(hhess_core::cli::run(std::env::args_os()));
}
