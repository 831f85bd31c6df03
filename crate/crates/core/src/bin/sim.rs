fn main() {
    std::process::exit(tnntn::cli::main());
}
