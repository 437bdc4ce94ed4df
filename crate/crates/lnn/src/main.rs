fn main() {
    std::process::exit(lnn::cli::run(std::env::args_os()));
}
