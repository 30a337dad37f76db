fn main() {
    std::process::exit(gwaskit::cli::run());
}
