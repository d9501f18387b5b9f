fn main() {
    std::process::exit(ncl_cli::run(std::env::args_os()));
}
