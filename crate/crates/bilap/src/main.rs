fn main() {
    std::process::exit(bilap::cli::run());
}
