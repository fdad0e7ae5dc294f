fn main() {
    std::process::exit(biform::cli::run(std::env::args_os()));
}
