fn main() {
    std::process::exit(lagcurv::cli_io::run_cli(std::env::args_os()));
}
