fn main() {
    std::process::exit(lflp::cli::main_with_args(std::env::args_os()));
}
