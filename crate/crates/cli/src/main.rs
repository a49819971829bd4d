fn main() {
    std::process::exit(rapdb_cli::run_command(std::env::args_os()));
}
