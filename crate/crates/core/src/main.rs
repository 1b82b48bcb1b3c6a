fn main() {
    std::process::exit(spincorr::cli::run(std::env::args_os()));
}
