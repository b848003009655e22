fn main() {
    std::process::exit(range_consensus::cli::main_with_args(std::env::args_os()));
}
