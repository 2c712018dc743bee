fn main() {
    std::process::exit(crowncount::cli::cli_main(std::env::args_os()));
}
