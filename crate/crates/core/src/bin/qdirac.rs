fn main() {
    std::process::exit(qdirac::cli::run(std::env::args_os()));
}
