fn main() {
    std::process::exit(hdkg::cli::run(std::env::args_os()));
}
