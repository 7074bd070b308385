fn main() {
    std::process::exit(lc_compress::cli::run(std::env::args_os()));
}
