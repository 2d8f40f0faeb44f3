fn main() {
    std::process::exit(devport::cli::run(std::env::args_os()));
}
