fn main() {
    std::process::exit(resetdf_cli::main_with_args(std::env::args_os().collect()));
}
