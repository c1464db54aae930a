fn main() {
    std::process::exit(halflie::cli::execute(std::env::args_os()));
}
