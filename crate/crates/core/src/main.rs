fn main() {
    std::process::exit(monolab::harness::run_cli());
}
