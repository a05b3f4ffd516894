fn main() {
    std::process::exit(qlab::cli::run(std::env::args_os()));
}
