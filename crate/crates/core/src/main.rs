fn main() {
    std::process::exit(cdvrp::cli::run_cli(std::env::args_os()));
}
