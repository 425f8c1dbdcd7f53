fn main() {
    std::process::exit(value_lint::cli::main());
}
