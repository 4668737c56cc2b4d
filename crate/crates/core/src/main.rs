fn main() {
    std::process::exit(farmopt::cli::main());
}
