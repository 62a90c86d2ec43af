fn main() {
    std::process::exit(mfcca_cli::run(std::env::args_os()));
}
