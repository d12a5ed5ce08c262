fn main() {
    std::process::exit(safebb::cli::run(std::env::args_os()));
}
