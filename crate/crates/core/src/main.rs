fn main() {
    std::process::exit(memvac::cli::run_from(std::env::args_os()));
}
