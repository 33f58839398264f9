fn main() {
    std::process::exit(copula_flow::harness::cli_main(std::env::args().collect()));
}
