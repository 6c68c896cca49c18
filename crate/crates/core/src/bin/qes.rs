fn main() {
    std::process::exit(qes_core::cli::main_with_args(std::env::args_os()));
}
