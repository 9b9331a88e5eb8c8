fn main() {
    std::process::exit(dickman_cli::main_with_args(std::env::args_os()));
}
