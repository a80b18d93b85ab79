fn main() {
    std::process::exit(vch::cli::main_with_args(std::env::args_os()));
}
