fn main() {
    std::process::exit(sigtqft_cli::run(std::env::args_os()));
}
