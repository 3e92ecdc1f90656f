fn main() {
    std::process::exit(cocomp::cli::main_from_args(std::env::args_os()));
}
