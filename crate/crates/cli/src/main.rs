fn main() {
    std::process::exit(adopt_cli::main_with_args(std::env::args_os()));
}
