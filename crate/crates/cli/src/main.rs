fn main() {
    std::process::exit(dcmd_cli::run_cli(std::env::args_os()));
}
