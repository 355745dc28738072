fn main() {
    std::process::exit(robustscan_cli::run(std::env::args_os()));
}
