fn main() {
    std::process::exit(elliptic_cauchy::cli::main_with_std());
}
