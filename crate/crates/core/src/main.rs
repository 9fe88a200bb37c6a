fn main() {
    dpopt::cli::main();
}
