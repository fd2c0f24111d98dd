fn main() {
    std::process::exit(cvbridge::cli::run(std::env::args_os()));
}
