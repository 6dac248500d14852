fn main() {
    std::process::exit(ymblowup_cli::run(std::env::args_os()));
}
