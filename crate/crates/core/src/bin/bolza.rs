fn main() {
    std::process::exit(bolza::cli::run());
}
