fn main() {
    std::process::exit(perpetual_cli::main_with_args(std::env::args_os()));
}
