fn main() {
    std::process::exit(critmt_cli::run(std::env::args_os()));
}
