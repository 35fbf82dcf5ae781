fn main() {
    std::process::exit(prodsys_cli::run(std::env::args_os()));
}
