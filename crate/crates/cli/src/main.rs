fn main() {
    std::process::exit(floq_cli::run(std::env::args_os()));
}
