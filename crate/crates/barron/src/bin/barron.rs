fn main() {
    std::process::exit(barron::cli::run(std::env::args_os()));
}
