fn main() {
    std::process::exit(geocomplete::cli::run());
}
