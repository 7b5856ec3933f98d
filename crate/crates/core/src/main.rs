fn main() {
    std::process::exit(cnls_lab::cli::run(std::env::args_os()));
}
