fn main() {
    std::process::exit(blindspot::cli::cli_main(std::env::args_os()));
}
