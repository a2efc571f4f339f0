fn main() {
    std::process::exit(gas::cli::run(std::env::args().skip(1)));
}
