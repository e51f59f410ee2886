fn main() {
    std::process::exit(dipeps::cli::run(std::env::args_os()));
}
