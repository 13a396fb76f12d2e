fn main() {
    std::process::exit(charp_linearize::cli::main_with_args(std::env::args_os()));
}
