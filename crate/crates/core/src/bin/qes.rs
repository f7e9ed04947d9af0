fn main() {
    std::process::exit(qes_quartic::cli::run());
}
