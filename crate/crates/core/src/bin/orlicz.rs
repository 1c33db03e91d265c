fn main() {
    std::process::exit(orlicz_growth::cli::run(std::env::args_os()));
}
