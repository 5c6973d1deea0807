fn main() {
    std::process::exit(qedvolterra::cli::main_with_args(std::env::args_os()));
}
