fn main() {
    std::process::exit(goi_core::cli::main_with(std::env::args_os()));
}
