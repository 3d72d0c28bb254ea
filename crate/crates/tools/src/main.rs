fn main() {
    std::process::exit(screwchain_tools::cli::run(std::env::args_os()));
}
