fn main() {
    std::process::exit(siamalign_cli::run(std::env::args_os()));
}
