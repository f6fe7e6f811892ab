fn main() {
    std::process::exit(star::cli::run(std::env::args_os()));
}
