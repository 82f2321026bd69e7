fn main() {
    std::process::exit(symsq::cli::run());
}
