fn main() {
    std::process::exit(pqvar_cli::run(std::env::args_os()));
}
