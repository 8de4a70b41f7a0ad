fn main() {
    std::process::exit(bdcut::cli::main_with(std::env::args_os()));
}
