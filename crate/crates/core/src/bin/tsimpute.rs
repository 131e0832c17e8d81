fn main() {
    std::process::exit(tsimpute::cli::run(std::env::args_os()));
}
