fn main() {
    std::process::exit(bml_cli::run_from_args(std::env::args_os()));
}
