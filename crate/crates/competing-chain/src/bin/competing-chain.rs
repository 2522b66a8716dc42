fn main() {
    std::process::exit(competing_chain::cli::run(std::env::args_os()));
}
