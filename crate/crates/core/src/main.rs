fn main() {
    std::process::exit(corrcap::cli::main_with(std::env::args_os()));
}
