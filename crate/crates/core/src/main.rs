fn main() {
    std::process::exit(expsamp::cli::main_from_args(std::env::args()));
}
