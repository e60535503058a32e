fn main() {
    std::process::exit(monodr::cli::run(std::env::args_os()));
}
