fn main() {
    std::process::exit(polyheat::cli::run(std::env::args_os()));
}
