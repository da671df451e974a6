fn main() {
    std::process::exit(tactile_core::cli::run(std::env::args_os()));
}
