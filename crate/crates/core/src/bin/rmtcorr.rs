fn main() {
    std::process::exit(rmtcorr::cli::run(std::env::args_os()));
}
