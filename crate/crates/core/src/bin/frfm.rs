fn main() {
    std::process::exit(frfm::cli::main());
}
