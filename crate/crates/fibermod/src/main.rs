fn main() {
    std::process::exit(fibermod::cli::main_with_args(std::env::args_os()));
}
