fn main() {
    std::process::exit(torsmink::cli::run(std::env::args_os()));
}
