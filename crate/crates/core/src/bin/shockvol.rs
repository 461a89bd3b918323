fn main() {
    std::process::exit(shockvol::cli::run(std::env::args_os()));
}
