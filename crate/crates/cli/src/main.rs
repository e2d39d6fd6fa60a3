fn main() {
    std::process::exit(kindap_cli::run(std::env::args_os()));
}
