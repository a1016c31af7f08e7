fn main() {
    std::process::exit(sensic::cli::run());
}
