fn main() {
    std::process::exit(incompat::cli::run(std::env::args_os()));
}
