fn main() {
    std::process::exit(gevmc::cli::run(std::env::args_os()));
}
