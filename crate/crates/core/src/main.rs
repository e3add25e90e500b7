fn main() {
    std::process::exit(catspec::cli::cli_main(std::env::args_os()));
}
