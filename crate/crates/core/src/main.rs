fn main() {
    std::process::exit(steiner::cli::cli_main(std::env::args()));
}
