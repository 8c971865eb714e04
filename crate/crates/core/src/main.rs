fn main() {
    std::process::exit(einrange::cli::run());
}
