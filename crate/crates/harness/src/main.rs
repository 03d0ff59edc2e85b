fn main() {
    std::process::exit(sparse_poincare::cli::main_with(std::env::args_os()));
}
