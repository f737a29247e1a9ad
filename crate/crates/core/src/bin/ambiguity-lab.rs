fn main() {
    std::process::exit(ambiguity_lab::cli::run());
}
