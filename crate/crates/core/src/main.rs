fn main() {
    std::process::exit(dieout::cli::run(std::env::args_os()));
}
